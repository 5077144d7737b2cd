#ifndef BFW_IO_HPP
#define BFW_IO_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <algorithm>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bfw/engine.hpp"
#include "bfw/ensemble.hpp"
#include "bfw/error.hpp"
#include "bfw/theory.hpp"

// Every file starts with an envelope: schema version, generator identity,
// kind, seeds and the configuration echo that regenerates it. CSV files
// carry the envelope as '#' lines above the header row; JSON files as
// top-level keys next to "payload". Results are written with 10 significant
// digits, so a parsed file re-emits byte for byte; configuration echoes keep
// inputs exact so that a run can be replayed from its envelope.

namespace bfw::io {

using json = nlohmann::ordered_json;

inline constexpr std::string_view kSchemaVersion = "bfw/1";

/// Malformed or unexpected input file.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Numbers

inline std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

/// v rounded to the printed precision; JSON's shortest form then has at most 10 digits.
inline double round_real(double v) {
    if (!std::isfinite(v)) return v;
    return std::strtod(format_real(v).c_str(), nullptr);
}

inline double parse_real(std::string_view s) {
    const std::string tmp(s);
    char* end = nullptr;
    const double v = std::strtod(tmp.c_str(), &end);
    if (tmp.empty() || end != tmp.c_str() + tmp.size()) throw FormatError("not a number: '" + tmp + "'");
    return v;
}

inline std::uint64_t parse_uint(std::string_view s) {
    const std::string tmp(s);
    char* end = nullptr;
    const unsigned long long v = std::strtoull(tmp.c_str(), &end, 10);
    if (tmp.empty() || tmp[0] == '-' || end != tmp.c_str() + tmp.size())
        throw FormatError("not an unsigned integer: '" + tmp + "'");
    return v;
}

// ---------------------------------------------------------------------------
// Envelope

struct Envelope {
    std::string schema_version{kSchemaVersion};
    std::string generator{kGeneratorIdentity};
    std::string kind;
    std::vector<std::uint64_t> seeds;
    json config = json::object();

    friend bool operator==(const Envelope&, const Envelope&) = default;
};

inline json envelope_json(const Envelope& e, json payload) {
    json j;
    j["schema_version"] = e.schema_version;
    j["generator"] = e.generator;
    j["kind"] = e.kind;
    j["seeds"] = e.seeds;
    j["config"] = e.config;
    j["payload"] = std::move(payload);
    return j;
}

inline Envelope parse_envelope(const json& j) {
    try {
        Envelope e;
        e.schema_version = j.at("schema_version").get<std::string>();
        e.generator = j.at("generator").get<std::string>();
        e.kind = j.at("kind").get<std::string>();
        e.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        e.config = j.at("config");
        if (e.schema_version != kSchemaVersion)
            throw FormatError("unsupported schema version '" + e.schema_version + "'");
        return e;
    } catch (const json::exception& ex) {
        throw FormatError(std::string("bad envelope: ") + ex.what());
    }
}

inline void write_csv_envelope(std::ostream& os, const Envelope& e) {
    os << "# schema_version: " << e.schema_version << '\n';
    os << "# generator: " << e.generator << '\n';
    os << "# kind: " << e.kind << '\n';
    os << "# seeds: " << json(e.seeds).dump() << '\n';
    os << "# config: " << e.config.dump() << '\n';
}

namespace detail {

inline std::vector<std::string> split(std::string_view line, char sep = ',') {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        out.emplace_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline bool getline_clean(std::istream& is, std::string& line) {
    if (!std::getline(is, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

/// Reads the '#' envelope block and returns it together with the first non-comment line.
inline std::pair<Envelope, std::string> read_csv_envelope(std::istream& is) {
    json j = json::object();
    std::string line;
    while (getline_clean(is, line)) {
        if (line.empty() || line[0] != '#') break;
        const std::size_t colon = line.find(':');
        if (colon == std::string::npos) continue;
        std::string key = line.substr(1, colon - 1);
        std::string value = line.substr(colon + 1);
        auto trim = [](std::string& s) {
            s.erase(0, s.find_first_not_of(' '));
            s.erase(s.find_last_not_of(' ') + 1);
        };
        trim(key);
        trim(value);
        try {
            if (key == "seeds" || key == "config")
                j[key] = json::parse(value);
            else
                j[key] = value;
        } catch (const json::exception& ex) {
            throw FormatError("bad envelope line '" + line + "': " + ex.what());
        }
    }
    return {parse_envelope(j), line};
}

template <class T>
T get(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& ex) {
        throw FormatError(std::string("field '") + key + "': " + ex.what());
    }
}

inline json optional_int(const std::optional<int>& v) { return v ? json(*v) : json(nullptr); }

inline std::optional<int> get_optional_int(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return get<int>(j, key);
}

inline json histogram_json(const std::map<int, std::uint64_t>& h) {
    json j = json::object();
    for (const auto& [m, c] : h) j[std::to_string(m)] = c;
    return j;
}

/// Payload alphas carry ten digits; the config echo carries them exactly.
template <class Entries>
void restore_alphas(const std::vector<double>& exact, Entries& entries) {
    if (exact.size() != entries.size()) throw FormatError("config and payload list different numbers of alphas");
    for (std::size_t i = 0; i < exact.size(); ++i) {
        if (round_real(exact[i]) != entries[i].alpha) throw FormatError("config and payload disagree on alpha");
        entries[i].alpha = exact[i];
    }
}

inline std::map<int, std::uint64_t> parse_histogram(const json& j) {
    std::map<int, std::uint64_t> h;
    for (const auto& [key, value] : j.items()) h[std::stoi(key)] = value.get<std::uint64_t>();
    return h;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Traces

inline json engine_config_json(const EngineConfig& c) {
    json j;
    j["alpha"] = c.alpha;  // exact: the echo must replay the run
    j["node_count"] = c.node_count;
    j["seed"] = c.seed;
    j["max_accepted"] = c.accepted_limit();
    j["sample_every"] = c.sample_every;
    j["top_k"] = c.top_k;
    j["record_merges"] = c.record_merges;
    return j;
}

inline EngineConfig parse_engine_config(const json& j) {
    EngineConfig c;
    c.alpha = detail::get<double>(j, "alpha");
    c.node_count = detail::get<std::uint64_t>(j, "node_count");
    c.seed = detail::get<std::uint64_t>(j, "seed");
    c.max_accepted = detail::get<std::uint64_t>(j, "max_accepted");
    c.sample_every = detail::get<std::uint64_t>(j, "sample_every");
    c.top_k = detail::get<std::size_t>(j, "top_k");
    c.record_merges = j.value("record_merges", false);
    return c;
}

struct TraceFile {
    Envelope envelope;
    EngineConfig config;
    std::vector<TraceRecord> records;
};

inline TraceFile make_trace_file(const RunResult& run) {
    TraceFile f;
    f.envelope.kind = "trace";
    f.envelope.seeds = {run.config.seed};
    f.envelope.config = engine_config_json(run.config);
    f.config = run.config;
    f.records = run.trace;
    return f;
}

/// Columns u,t,k,p1,p2,component_count,c1..cK; missing fractions are empty fields.
inline void write_trace_csv(std::ostream& os, const TraceFile& f) {
    write_csv_envelope(os, f.envelope);
    os << "u,t,k,p1,p2,component_count";
    for (std::size_t i = 1; i <= f.config.top_k; ++i) os << ",c" << i;
    os << '\n';
    for (const auto& r : f.records) {
        os << r.u << ',' << r.t << ',' << r.k << ',' << format_real(r.p1) << ',' << format_real(r.p2) << ','
           << r.component_count;
        for (std::size_t i = 0; i < f.config.top_k; ++i) {
            os << ',';
            if (i < r.top_sizes.size()) os << format_real(r.top_sizes[i]);
        }
        os << '\n';
    }
}

inline json trace_payload(const TraceFile& f) {
    json records = json::array();
    for (const auto& r : f.records) {
        json j;
        j["u"] = r.u;
        j["t"] = r.t;
        j["k"] = r.k;
        j["p1"] = round_real(r.p1);
        j["p2"] = round_real(r.p2);
        j["component_count"] = r.component_count;
        json c = json::array();
        for (double v : r.top_sizes) c.push_back(round_real(v));
        j["c"] = std::move(c);
        records.push_back(std::move(j));
    }
    return json{{"records", std::move(records)}};
}

inline void write_trace_json(std::ostream& os, const TraceFile& f) {
    os << envelope_json(f.envelope, trace_payload(f)).dump(1) << '\n';
}

inline TraceFile read_trace_csv(std::istream& is) {
    TraceFile f;
    auto [env, header] = detail::read_csv_envelope(is);
    f.envelope = std::move(env);
    if (f.envelope.kind != "trace") throw FormatError("expected a trace, got '" + f.envelope.kind + "'");
    f.config = parse_engine_config(f.envelope.config);

    const auto columns = detail::split(header);
    const std::vector<std::string> fixed = {"u", "t", "k", "p1", "p2", "component_count"};
    if (columns.size() < fixed.size() || !std::equal(fixed.begin(), fixed.end(), columns.begin()))
        throw FormatError("unexpected trace header '" + header + "'");

    std::string line;
    while (detail::getline_clean(is, line)) {
        if (line.empty()) continue;
        const auto cells = detail::split(line);
        if (cells.size() != columns.size()) throw FormatError("ragged trace row '" + line + "'");
        TraceRecord r;
        r.u = parse_uint(cells[0]);
        r.t = parse_uint(cells[1]);
        r.k = parse_uint(cells[2]);
        r.p1 = parse_real(cells[3]);
        r.p2 = parse_real(cells[4]);
        r.component_count = parse_uint(cells[5]);
        for (std::size_t i = fixed.size(); i < cells.size() && !cells[i].empty(); ++i)
            r.top_sizes.push_back(parse_real(cells[i]));
        f.records.push_back(std::move(r));
    }
    return f;
}

inline TraceFile trace_from_json(const json& j) {
    TraceFile f;
    f.envelope = parse_envelope(j);
    if (f.envelope.kind != "trace") throw FormatError("expected a trace, got '" + f.envelope.kind + "'");
    f.config = parse_engine_config(f.envelope.config);
    for (const auto& rj : detail::get<json>(j.at("payload"), "records")) {
        TraceRecord r;
        r.u = detail::get<std::uint64_t>(rj, "u");
        r.t = detail::get<std::uint64_t>(rj, "t");
        r.k = detail::get<std::uint64_t>(rj, "k");
        r.p1 = detail::get<double>(rj, "p1");
        r.p2 = detail::get<double>(rj, "p2");
        r.component_count = detail::get<std::uint64_t>(rj, "component_count");
        r.top_sizes = detail::get<std::vector<double>>(rj, "c");
        f.records.push_back(std::move(r));
    }
    return f;
}

inline json parse_json(std::istream& is) {
    try {
        return json::parse(is);
    } catch (const json::exception& ex) {
        throw FormatError(std::string("invalid JSON: ") + ex.what());
    }
}

/// Reads either trace format, chosen by the first non-blank character.
inline TraceFile read_trace(std::istream& is) {
    is >> std::ws;
    if (is.peek() == '#') return read_trace_csv(is);
    return trace_from_json(parse_json(is));
}

// ---------------------------------------------------------------------------
// Ensemble summaries

inline json ensemble_config_json(const EnsembleConfig& c) {
    json j;
    json alphas = json::array();
    for (double a : c.alphas) alphas.push_back(a);
    j["alphas"] = std::move(alphas);
    j["node_count"] = c.node_count;
    j["instances"] = c.instances;
    j["base_seed"] = c.base_seed;
    j["sample_every"] = c.sample_every;
    j["window"] = c.steady_window();
    j["top_k"] = c.top_k;
    j["giant_threshold"] = c.giant_threshold;
    return j;
}

inline EnsembleConfig parse_ensemble_config(const json& j) {
    EnsembleConfig c;
    c.alphas = detail::get<std::vector<double>>(j, "alphas");
    c.node_count = detail::get<std::uint64_t>(j, "node_count");
    c.instances = detail::get<std::uint64_t>(j, "instances");
    c.base_seed = detail::get<std::uint64_t>(j, "base_seed");
    c.sample_every = detail::get<std::uint64_t>(j, "sample_every");
    c.window = detail::get<std::uint64_t>(j, "window");
    c.top_k = detail::get<std::size_t>(j, "top_k");
    c.giant_threshold = detail::get<double>(j, "giant_threshold");
    return c;
}

inline json mean_std_json(const MeanStd& v) { return json{{"mean", round_real(v.mean)}, {"std", round_real(v.std)}}; }

inline MeanStd parse_mean_std(const json& j) {
    return {detail::get<double>(j, "mean"), detail::get<double>(j, "std")};
}

inline json alpha_summary_json(const AlphaSummary& s) {
    json j;
    j["alpha"] = round_real(s.alpha);
    j["instances"] = s.instances;
    j["seeds"] = s.seeds;
    j["m_histogram"] = detail::histogram_json(s.m_histogram);
    j["absent"] = s.absent;
    j["failed"] = s.failed;
    j["final_m_histogram"] = detail::histogram_json(s.final_m_histogram);
    j["modal_m"] = detail::optional_int(s.modal_m);
    j["modal_final_m"] = detail::optional_int(s.modal_final_m);
    j["aggregated"] = s.aggregated;
    json fr = json::array();
    for (const auto& f : s.fractions) fr.push_back(mean_std_json(f));
    j["fractions"] = std::move(fr);
    j["sum_sq"] = mean_std_json(s.sum_sq);
    j["x"] = mean_std_json(s.x);
    return j;
}

inline AlphaSummary parse_alpha_summary(const json& j) {
    AlphaSummary s;
    s.alpha = detail::get<double>(j, "alpha");
    s.instances = detail::get<std::uint64_t>(j, "instances");
    s.seeds = detail::get<std::vector<std::uint64_t>>(j, "seeds");
    s.m_histogram = detail::parse_histogram(j.at("m_histogram"));
    s.absent = detail::get<std::uint64_t>(j, "absent");
    s.failed = detail::get<std::uint64_t>(j, "failed");
    s.final_m_histogram = detail::parse_histogram(j.at("final_m_histogram"));
    s.modal_m = detail::get_optional_int(j, "modal_m");
    s.modal_final_m = detail::get_optional_int(j, "modal_final_m");
    s.aggregated = detail::get<std::uint64_t>(j, "aggregated");
    for (const auto& f : j.at("fractions")) s.fractions.push_back(parse_mean_std(f));
    s.sum_sq = parse_mean_std(j.at("sum_sq"));
    s.x = parse_mean_std(j.at("x"));
    return s;
}

inline std::vector<std::uint64_t> all_seeds(const EnsembleSummary& s) {
    std::vector<std::uint64_t> out;
    for (const auto& a : s.per_alpha) out.insert(out.end(), a.seeds.begin(), a.seeds.end());
    return out;
}

inline void write_summary_json(std::ostream& os, const EnsembleSummary& s) {
    Envelope e;
    e.kind = "ensemble_summary";
    e.seeds = all_seeds(s);
    e.config = ensemble_config_json(s.config);
    json per = json::array();
    for (const auto& a : s.per_alpha) per.push_back(alpha_summary_json(a));
    os << envelope_json(e, json{{"per_alpha", std::move(per)}}).dump(1) << '\n';
}

inline EnsembleSummary summary_from_json(const json& j) {
    const Envelope e = parse_envelope(j);
    if (e.kind != "ensemble_summary") throw FormatError("expected an ensemble summary, got '" + e.kind + "'");
    EnsembleSummary s;
    s.config = parse_ensemble_config(e.config);
    for (const auto& a : detail::get<json>(j.at("payload"), "per_alpha")) s.per_alpha.push_back(parse_alpha_summary(a));
    detail::restore_alphas(s.config.alphas, s.per_alpha);
    return s;
}

// ---------------------------------------------------------------------------
// Theory

struct TheoryFile {
    theory::TheoryOptions options;
    std::optional<int> m_override;
    std::vector<theory::TheoryReport> reports;
};

inline json theory_config_json(const TheoryFile& f) {
    json j;
    json alphas = json::array();
    for (const auto& r : f.reports) alphas.push_back(r.alpha);
    j["alphas"] = std::move(alphas);
    j["m"] = detail::optional_int(f.m_override);
    j["empirical_alpha2"] = f.options.empirical_alpha2;
    j["x_at_given_alpha"] = f.options.x_at_given_alpha;
    j["tol"] = f.options.tol;
    return j;
}

inline json theory_report_json(const theory::TheoryReport& r) {
    json j;
    j["alpha"] = round_real(r.alpha);
    j["m"] = r.m;
    j["alpha_m"] = round_real(r.alpha_m);
    j["x_m"] = round_real(r.x_m);
    j["alpha_x"] = round_real(r.alpha_x);
    j["feasible"] = r.feasible();
    if (r.sizes) {
        json fr = json::array();
        for (double c : r.sizes->fractions) fr.push_back(round_real(c));
        j["fractions"] = std::move(fr);
        json res;
        res["sum"] = round_real(r.sizes->residuals.sum);
        res["sum_sq"] = r.sizes->residuals.sum_sq ? json(round_real(*r.sizes->residuals.sum_sq)) : json(nullptr);
        res["fixed_point"] = round_real(r.sizes->residuals.fixed_point);
        j["residuals"] = std::move(res);
    } else {
        j["fractions"] = nullptr;
        j["infeasible_level"] = r.infeasible_level;
        j["discriminant"] = round_real(r.discriminant);
    }
    return j;
}

inline theory::TheoryReport parse_theory_report(const json& j) {
    theory::TheoryReport r;
    r.alpha = detail::get<double>(j, "alpha");
    r.m = detail::get<int>(j, "m");
    r.alpha_m = detail::get<double>(j, "alpha_m");
    r.x_m = detail::get<double>(j, "x_m");
    r.alpha_x = detail::get<double>(j, "alpha_x");
    if (detail::get<bool>(j, "feasible")) {
        theory::TheoryPrediction p;
        p.m = r.m;
        p.alpha_m = r.alpha_m;
        p.x_m = r.x_m;
        p.alpha_x = r.alpha_x;
        p.fractions = detail::get<std::vector<double>>(j, "fractions");
        const json& res = j.at("residuals");
        p.residuals.sum = detail::get<double>(res, "sum");
        if (!res.at("sum_sq").is_null()) p.residuals.sum_sq = detail::get<double>(res, "sum_sq");
        p.residuals.fixed_point = detail::get<double>(res, "fixed_point");
        r.sizes = std::move(p);
    } else {
        r.infeasible_level = detail::get<int>(j, "infeasible_level");
        r.discriminant = detail::get<double>(j, "discriminant");
    }
    return r;
}

inline void write_theory_json(std::ostream& os, const TheoryFile& f) {
    Envelope e;
    e.kind = "theory";
    e.config = theory_config_json(f);
    json preds = json::array();
    for (const auto& r : f.reports) preds.push_back(theory_report_json(r));
    os << envelope_json(e, json{{"predictions", std::move(preds)}}).dump(1) << '\n';
}

inline TheoryFile theory_from_json(const json& j) {
    const Envelope e = parse_envelope(j);
    if (e.kind != "theory") throw FormatError("expected a theory file, got '" + e.kind + "'");
    TheoryFile f;
    f.m_override = detail::get_optional_int(e.config, "m");
    f.options.empirical_alpha2 = detail::get<bool>(e.config, "empirical_alpha2");
    f.options.x_at_given_alpha = detail::get<bool>(e.config, "x_at_given_alpha");
    f.options.tol = detail::get<double>(e.config, "tol");
    for (const auto& p : detail::get<json>(j.at("payload"), "predictions")) f.reports.push_back(parse_theory_report(p));
    detail::restore_alphas(detail::get<std::vector<double>>(e.config, "alphas"), f.reports);
    return f;
}

// ---------------------------------------------------------------------------
// Staircase

struct StaircaseFile {
    EnsembleConfig config;
    std::vector<std::uint64_t> seeds;
    std::vector<StaircasePoint> points;
};

inline void write_staircase_json(std::ostream& os, const StaircaseFile& f) {
    Envelope e;
    e.kind = "staircase";
    e.seeds = f.seeds;
    e.config = ensemble_config_json(f.config);
    json pts = json::array();
    for (const auto& p : f.points) {
        json j;
        j["alpha"] = round_real(p.alpha);
        j["predicted_m"] = p.predicted_m;
        j["modal_m"] = detail::optional_int(p.modal_m);
        j["instances"] = p.instances;
        j["matching"] = p.matching;
        j["histogram"] = detail::histogram_json(p.histogram);
        pts.push_back(std::move(j));
    }
    os << envelope_json(e, json{{"points", std::move(pts)}}).dump(1) << '\n';
}

inline StaircaseFile staircase_from_json(const json& j) {
    const Envelope e = parse_envelope(j);
    if (e.kind != "staircase") throw FormatError("expected a staircase file, got '" + e.kind + "'");
    StaircaseFile f;
    f.config = parse_ensemble_config(e.config);
    f.seeds = e.seeds;
    for (const auto& pj : detail::get<json>(j.at("payload"), "points")) {
        StaircasePoint p;
        p.alpha = detail::get<double>(pj, "alpha");
        p.predicted_m = detail::get<int>(pj, "predicted_m");
        p.modal_m = detail::get_optional_int(pj, "modal_m");
        p.instances = detail::get<std::uint64_t>(pj, "instances");
        p.matching = detail::get<std::uint64_t>(pj, "matching");
        p.histogram = detail::parse_histogram(pj.at("histogram"));
        f.points.push_back(std::move(p));
    }
    detail::restore_alphas(f.config.alphas, f.points);
    return f;
}

// ---------------------------------------------------------------------------
// Comparison

struct ComparisonFile {
    Envelope envelope;
    std::vector<ComparisonRow> rows;
};

inline std::size_t max_ranks(const std::vector<ComparisonRow>& rows) {
    std::size_t r = 0;
    for (const auto& row : rows) r = std::max(r, row.fractions.size());
    return r;
}

/**
 * One row per alpha: m on both sides, then (simulated, theory, abs, rel)
 * for sum of squares, x and each fraction rank. Ranks missing on one side
 * are empty fields.
 */
inline void write_comparison_csv(std::ostream& os, const ComparisonFile& f) {
    write_csv_envelope(os, f.envelope);
    const std::size_t ranks = max_ranks(f.rows);
    auto quad = [&](const std::string& name) {
        os << ',' << name << "_sim," << name << "_theory," << name << "_abs," << name << "_rel";
    };
    os << "alpha,m_sim,m_theory";
    quad("sum_sq");
    quad("x");
    for (std::size_t i = 1; i <= ranks; ++i) quad("c" + std::to_string(i));
    os << '\n';

    auto put = [&](const ErrorPair& e) {
        os << ',' << format_real(e.simulated) << ',' << format_real(e.theory) << ',' << format_real(e.abs_error)
           << ',' << format_real(e.rel_error);
    };
    auto opt = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); };
    for (const auto& row : f.rows) {
        os << format_real(row.alpha) << ',' << opt(row.m_simulated) << ',' << opt(row.m_theory);
        put(row.sum_sq);
        put(row.x);
        for (std::size_t i = 0; i < ranks; ++i) {
            if (i < row.fractions.size())
                put(row.fractions[i]);
            else
                os << ",,,,";
        }
        os << '\n';
    }
}

inline ComparisonFile read_comparison_csv(std::istream& is) {
    ComparisonFile f;
    auto [env, header] = detail::read_csv_envelope(is);
    f.envelope = std::move(env);
    if (f.envelope.kind != "comparison") throw FormatError("expected a comparison, got '" + f.envelope.kind + "'");
    const auto columns = detail::split(header);
    if (columns.size() < 11 || (columns.size() - 3) % 4 != 0 || columns[0] != "alpha")
        throw FormatError("unexpected comparison header '" + header + "'");

    auto opt = [](const std::string& s) -> std::optional<int> {
        if (s.empty()) return std::nullopt;
        return static_cast<int>(parse_uint(s));
    };
    auto quad = [](const std::vector<std::string>& c, std::size_t at) {
        return ErrorPair{parse_real(c[at]), parse_real(c[at + 1]), parse_real(c[at + 2]), parse_real(c[at + 3])};
    };
    std::string line;
    while (detail::getline_clean(is, line)) {
        if (line.empty()) continue;
        const auto cells = detail::split(line);
        if (cells.size() != columns.size()) throw FormatError("ragged comparison row '" + line + "'");
        ComparisonRow row;
        row.alpha = parse_real(cells[0]);
        row.m_simulated = opt(cells[1]);
        row.m_theory = opt(cells[2]);
        row.sum_sq = quad(cells, 3);
        row.x = quad(cells, 7);
        for (std::size_t at = 11; at + 3 < cells.size() && !cells[at].empty(); at += 4)
            row.fractions.push_back(quad(cells, at));
        f.rows.push_back(std::move(row));
    }
    return f;
}

}  // namespace bfw::io

#endif  // BFW_IO_HPP
