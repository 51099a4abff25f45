#pragma once

#include <cstdint>
#include <string>

namespace bandsing {

/// Exact rational entered as "a/b" or "a". Always stored in lowest terms with
/// a positive denominator.
struct Fraction {
    std::int64_t num = 0;
    std::int64_t den = 1;

    /// Throws std::invalid_argument on malformed text, zero denominators, or
    /// decimal notation.
    static Fraction parse(const std::string& text);
    static Fraction of(std::int64_t num, std::int64_t den);

    double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
    std::string str() const;

    friend bool operator==(const Fraction&, const Fraction&) = default;
};

}  // namespace bandsing
