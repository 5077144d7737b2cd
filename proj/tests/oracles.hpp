#ifndef BFW_TESTS_ORACLES_HPP
#define BFW_TESTS_ORACLES_HPP

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace oracle {

__extension__ typedef unsigned __int128 u128;

// Sign of t/u - g decided in integers: g = mant / 2^shift with a 53-bit
// integer mantissa; throws when the shifted t would not fit in 128 bits.
inline int compare_fraction(std::uint64_t t, std::uint64_t u, double g) {
    int e = 0;
    const double f = std::frexp(g, &e);
    const auto mant = static_cast<std::uint64_t>(std::ldexp(f, 53));
    const int shift = 53 - e;
    if (shift < 0 || std::bit_width(t) + shift > 127 || std::bit_width(u) > 64) throw std::logic_error("oracle out of range");
    const u128 lhs = static_cast<u128>(t) << shift, rhs = static_cast<u128>(mant) * u;
    return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

inline bool fraction_below(std::uint64_t t, std::uint64_t u, double g) { return compare_fraction(t, u, g) < 0; }

// The stage-growth test of the algorithm: t/u < alpha + 1/sqrt(2k).
inline bool may_grow(std::uint64_t t, std::uint64_t u, std::uint64_t k, double alpha) {
    return fraction_below(t, u, alpha + 1.0 / std::sqrt(2.0 * static_cast<double>(k)));
}

}  // namespace oracle

#endif  // BFW_TESTS_ORACLES_HPP
