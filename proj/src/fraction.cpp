#include "bandsing/fraction.hpp"

#include <numeric>
#include <stdexcept>

namespace bandsing {

namespace {

std::int64_t parse_int(const std::string& text, const std::string& whole) {
    if (text.empty()) throw std::invalid_argument("bad fraction '" + whole + "'");
    std::size_t used = 0;
    std::int64_t v = 0;
    try {
        v = std::stoll(text, &used);
    } catch (const std::logic_error&) {
        throw std::invalid_argument("bad fraction '" + whole + "'");
    }
    if (used != text.size()) throw std::invalid_argument("bad fraction '" + whole + "' (use a/b, not decimals)");
    return v;
}

}  // namespace

Fraction Fraction::of(std::int64_t num, std::int64_t den) {
    if (den == 0) throw std::invalid_argument("fraction with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const std::int64_t g = std::gcd(num, den);
    return Fraction{num / g, den / g};
}

Fraction Fraction::parse(const std::string& text) {
    const auto slash = text.find('/');
    if (slash == std::string::npos) return of(parse_int(text, text), 1);
    return of(parse_int(text.substr(0, slash), text), parse_int(text.substr(slash + 1), text));
}

std::string Fraction::str() const {
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
}

}  // namespace bandsing
