#ifndef BFW_CLI_HPP
#define BFW_CLI_HPP

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bfw/engine.hpp"
#include "bfw/ensemble.hpp"
#include "bfw/error.hpp"
#include "bfw/io.hpp"
#include "bfw/theory.hpp"

namespace bfw::cli {

/// Process exit codes; a stable contract.
enum ExitCode : int { kOk = 0, kUsage = 2, kIo = 3, kInfeasible = 4 };

/// Output could not be written or input could not be read.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

/// Sends `text` to `path`, or to `out` when the path is empty or "-".
inline void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        out.flush();
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << text;
    f.flush();
    if (!f) throw IoError("write to '" + path + "' failed");
}

inline io::json read_json_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for reading");
    return io::parse_json(f);
}

struct EnsembleFlags {
    std::vector<double> alphas;
    std::uint64_t instances = 20;
    std::uint64_t nodes = 100000;
    std::uint64_t base_seed = 0;
    std::uint64_t sample_every = 1000;
    std::uint64_t window = 0;
    std::size_t top_k = 10;
    unsigned threads = 0;
    std::string out;

    void add_to(CLI::App& cmd, bool alphas_required) {
        auto* a = cmd.add_option("--alphas", alphas, "Comma-separated alpha values in (0,1]")->delimiter(',');
        if (alphas_required) a->required();
        cmd.add_option("--instances", instances, "Instances per alpha")->capture_default_str();
        cmd.add_option("--nodes", nodes, "Node count n")->capture_default_str();
        cmd.add_option("--base-seed", base_seed, "Base seed for per-instance seed derivation")->capture_default_str();
        cmd.add_option("--sample-every", sample_every, "Sampling stride in sampled edges")->capture_default_str();
        cmd.add_option("--window", window, "Steady-state window in sampled edges (0: n/10)")->capture_default_str();
        cmd.add_option("--top-k", top_k, "Largest fractions kept per sample")->capture_default_str();
        cmd.add_option("--threads", threads, "Worker threads (0: all cores)")->capture_default_str();
        cmd.add_option("--out", out, "Output path (default: stdout)");
    }

    [[nodiscard]] EnsembleConfig config() const {
        EnsembleConfig c;
        c.alphas = alphas;
        c.node_count = nodes;
        c.instances = instances;
        c.base_seed = base_seed;
        c.sample_every = sample_every;
        c.window = window;
        c.top_k = top_k;
        c.threads = threads;
        return c;
    }
};

struct TheoryFlags {
    bool empirical_alpha2 = false;
    bool x_at_alpha = false;
    double tol = 1e-12;

    void add_to(CLI::App& cmd) {
        cmd.add_flag("--empirical-alpha2", empirical_alpha2, "Use 0.52 as the upper end of the two-giant interval");
        cmd.add_flag("--x-at-alpha", x_at_alpha, "Evaluate x at the given alpha instead of the interval upper end");
        cmd.add_option("--tol", tol, "Residual tolerance of the root solve")->capture_default_str();
    }

    [[nodiscard]] theory::TheoryOptions options() const { return {empirical_alpha2, x_at_alpha, tol}; }
};

inline void report_infeasible(const io::TheoryFile& f, std::ostream& err) {
    for (const auto& r : f.reports)
        if (!r.feasible())
            err << "theory: size recursion infeasible at level m=" << r.infeasible_level << " for alpha "
                << io::format_real(r.alpha) << " (discriminant " << io::format_real(r.discriminant) << ")\n";
}

inline bool all_feasible(const io::TheoryFile& f) {
    for (const auto& r : f.reports)
        if (!r.feasible()) return false;
    return true;
}

}  // namespace detail

/**
 * Runs the command line `args` (args[0] is the program name). Normal output
 * goes to `out` unless --out names a file; diagnostics go to `err`.
 */
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"BFW(alpha) explosive percolation: simulation, ensembles and steady-state theory"};
    app.require_subcommand(1);

    std::function<int()> action;

    // simulate
    auto* sim = app.add_subcommand("simulate", "Run one instance and write its trace");
    EngineConfig sim_cfg;
    std::string sim_format = "csv";
    std::string sim_out;
    sim->add_option("--alpha", sim_cfg.alpha, "Alpha in (0,1]")->required();
    sim->add_option("--nodes", sim_cfg.node_count, "Node count n")->capture_default_str();
    sim->add_option("--seed", sim_cfg.seed, "Random seed")->capture_default_str();
    sim->add_option("--sample-every", sim_cfg.sample_every, "Sampling stride in sampled edges")->capture_default_str();
    sim->add_option("--top-k", sim_cfg.top_k, "Largest fractions kept per sample")->capture_default_str();
    sim->add_option("--max-accepted", sim_cfg.max_accepted, "Accepted-edge limit (0: 2n)")->capture_default_str();
    sim->add_flag("--record-merges", sim_cfg.record_merges, "Also record after every accepted merge");
    sim->add_option("--format", sim_format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    sim->add_option("--out", sim_out, "Output path (default: stdout)");
    sim->callback([&] {
        action = [&] {
            const io::TraceFile f = io::make_trace_file(run(sim_cfg));
            std::ostringstream text;
            if (sim_format == "json")
                io::write_trace_json(text, f);
            else
                io::write_trace_csv(text, f);
            detail::emit(sim_out, text.str(), out);
            return kOk;
        };
    });

    // theory
    auto* th = app.add_subcommand("theory", "Solve the steady-state size equations");
    std::vector<double> th_alphas;
    std::optional<int> th_m;
    detail::TheoryFlags th_flags;
    std::string th_out;
    th->add_option("--alpha,--alphas", th_alphas, "Alpha value(s) in (0,1], comma-separated")->delimiter(',');
    th->add_option("--m", th_m, "Giant count; defaults to the interval containing alpha");
    th_flags.add_to(*th);
    th->add_option("--out", th_out, "Output path (default: stdout)");
    th->callback([&] {
        action = [&] {
            io::TheoryFile f;
            f.options = th_flags.options();
            f.m_override = th_m;
            std::vector<double> alphas = th_alphas;
            if (alphas.empty()) {
                if (!th_m) throw ConfigError("theory needs --alpha or --m");
                if (*th_m < 1) throw ConfigError("m must be >= 1, got " + std::to_string(*th_m));
                alphas = {theory::alpha_upper(*th_m, f.options.empirical_alpha2)};
            }
            for (double a : alphas) f.reports.push_back(theory::predict(a, f.options, th_m));
            std::ostringstream text;
            io::write_theory_json(text, f);
            detail::emit(th_out, text.str(), out);
            if (!detail::all_feasible(f)) {
                detail::report_infeasible(f, err);
                return kInfeasible;
            }
            return kOk;
        };
    });

    // ensemble
    auto* ens = app.add_subcommand("ensemble", "Run many instances per alpha and summarise steady states");
    detail::EnsembleFlags ens_flags;
    ens_flags.add_to(*ens, true);
    ens->callback([&] {
        action = [&] {
            std::ostringstream text;
            io::write_summary_json(text, run_ensemble(ens_flags.config()));
            detail::emit(ens_flags.out, text.str(), out);
            return kOk;
        };
    });

    // staircase
    auto* st = app.add_subcommand("staircase", "Modal giant count per alpha");
    detail::EnsembleFlags st_flags;
    st_flags.add_to(*st, true);
    st->callback([&] {
        action = [&] {
            const EnsembleSummary s = run_ensemble(st_flags.config());
            io::StaircaseFile f{s.config, io::all_seeds(s), staircase(s)};
            std::ostringstream text;
            io::write_staircase_json(text, f);
            detail::emit(st_flags.out, text.str(), out);
            return kOk;
        };
    });

    // compare
    auto* cmp = app.add_subcommand("compare", "Compare simulated steady states with theory");
    detail::EnsembleFlags cmp_flags;
    detail::TheoryFlags cmp_theory;
    std::string cmp_summary, cmp_theory_file;
    cmp_flags.add_to(*cmp, false);
    cmp_theory.add_to(*cmp);
    cmp->add_option("--summary", cmp_summary, "Simulated side: an ensemble summary or theory file (default: run an ensemble)");
    cmp->add_option("--theory", cmp_theory_file, "Theory side: a theory file (default: solve for the simulated alphas)");
    cmp->callback([&] {
        action = [&] {
            io::Envelope env;
            env.kind = "comparison";
            std::vector<ComparisonPoint> left;
            io::json config;
            if (!cmp_summary.empty()) {
                const io::json j = detail::read_json_file(cmp_summary);
                const io::Envelope e = io::parse_envelope(j);
                config["summary"] = j.at("config");
                if (e.kind == "theory") {
                    for (const auto& r : io::theory_from_json(j).reports) left.push_back(to_point(r));
                } else {
                    const EnsembleSummary s = io::summary_from_json(j);
                    for (const auto& a : s.per_alpha) left.push_back(to_point(a));
                    env.seeds = io::all_seeds(s);
                }
            } else {
                if (cmp_flags.alphas.empty()) throw ConfigError("compare needs --summary or --alphas");
                const EnsembleSummary s = run_ensemble(cmp_flags.config());
                for (const auto& a : s.per_alpha) left.push_back(to_point(a));
                config["summary"] = io::ensemble_config_json(s.config);
                env.seeds = io::all_seeds(s);
            }

            std::vector<ComparisonPoint> right;
            if (!cmp_theory_file.empty()) {
                const io::json j = detail::read_json_file(cmp_theory_file);
                config["theory"] = j.at("config");
                for (const auto& r : io::theory_from_json(j).reports) right.push_back(to_point(r));
            } else {
                io::TheoryFile f;
                f.options = cmp_theory.options();
                for (const auto& p : left) f.reports.push_back(theory::predict(p.alpha, f.options));
                for (const auto& r : f.reports) right.push_back(to_point(r));
                config["theory"] = io::theory_config_json(f);
            }
            env.config = std::move(config);

            std::ostringstream text;
            io::write_comparison_csv(text, {env, compare_with_theory(left, right)});
            detail::emit(cmp_flags.out, text.str(), out);
            return kOk;
        };
    });

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, er;
        const int code = app.exit(e, o, er);
        out << o.str();
        err << er.str();
        return code == 0 ? kOk : kUsage;
    }

    try {
        return action ? action() : kUsage;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return kIo;
    } catch (const io::FormatError& e) {
        err << "I/O error: " << e.what() << '\n';
        return kIo;
    } catch (const io::json::exception& e) {
        err << "I/O error: malformed input: " << e.what() << '\n';
        return kIo;
    } catch (const InfeasibleError& e) {
        err << "theory: " << e.what() << '\n';
        return kInfeasible;
    }
}

}  // namespace bfw::cli

#endif  // BFW_CLI_HPP
