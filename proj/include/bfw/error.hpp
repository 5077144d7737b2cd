#ifndef BFW_ERROR_HPP
#define BFW_ERROR_HPP

#include <stdexcept>
#include <string>

namespace bfw {

/// Rejected configuration or argument (bad n, alpha outside (0,1], ...).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Caller broke an operation's precondition on otherwise valid state.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// The size recursion produced a negative discriminant at `level`.
class InfeasibleError : public std::runtime_error {
public:
    InfeasibleError(int level, double discriminant)
        : std::runtime_error("size system infeasible at level m=" + std::to_string(level) +
                             " (discriminant " + std::to_string(discriminant) + ")"),
          level_(level),
          discriminant_(discriminant) {}

    [[nodiscard]] int level() const noexcept { return level_; }
    [[nodiscard]] double discriminant() const noexcept { return discriminant_; }

private:
    int level_;
    double discriminant_;
};

}  // namespace bfw

#endif  // BFW_ERROR_HPP
