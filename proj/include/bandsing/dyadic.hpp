#pragma once

#include <compare>
#include <cstdint>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace bandsing {

/// Non-negative dyadic rational numerator / 2^exponent, kept in lowest terms
/// (odd numerator, or zero with exponent 0).
class Dyadic {
public:
    using Int = boost::multiprecision::cpp_int;

    Dyadic() = default;
    Dyadic(Int numerator, unsigned exponent) : num_(std::move(numerator)), exp_(exponent) { normalize(); }

    static Dyadic one() { return Dyadic(1, 0); }

    const Int& numerator() const noexcept { return num_; }
    unsigned exponent() const noexcept { return exp_; }
    bool is_zero() const noexcept { return num_ == 0; }

    double to_double() const;
    /// "0", "1", "5/32", ...
    std::string str() const;

    friend bool operator==(const Dyadic& a, const Dyadic& b) { return a.exp_ == b.exp_ && a.num_ == b.num_; }
    friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b);

    /// Sign of (this - num/den) for a positive denominator.
    int compare_to(const Int& num, const Int& den) const;

    /// floor(log2(numerator)); the dyadic lies in [2^(msb - exponent), 2^(msb - exponent + 1)).
    long long floor_log2() const;

private:
    void normalize();

    Int num_ = 0;
    unsigned exp_ = 0;
};

}  // namespace bandsing
