#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "bandsing/lotools.hpp"

namespace bandsing {

using Int = Dyadic::Int;
namespace mp = boost::multiprecision;

// ---------------------------------------------------------------------------
// Dyadic

void Dyadic::normalize() {
    if (num_ == 0) {
        exp_ = 0;
        return;
    }
    if (num_ < 0) throw std::invalid_argument("dyadic masses are non-negative");
    const unsigned shift = std::min<unsigned>(static_cast<unsigned>(mp::lsb(num_)), exp_);
    num_ >>= shift;
    exp_ -= shift;
}

double Dyadic::to_double() const {
    if (num_ == 0) return 0.0;
    const auto top = static_cast<long long>(mp::msb(num_));
    if (top <= 60) return std::ldexp(num_.convert_to<double>(), -static_cast<int>(exp_));
    const auto drop = static_cast<unsigned>(top - 60);
    Int head = num_ >> drop;
    return std::ldexp(head.convert_to<double>(), static_cast<int>(drop) - static_cast<int>(exp_));
}

std::string Dyadic::str() const {
    if (exp_ == 0) return num_.str();
    Int den = Int(1) << exp_;
    return num_.str() + "/" + den.str();
}

std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b) {
    // Bring both numerators over the larger power of two.
    if (a.exp_ >= b.exp_) {
        const Int rhs = b.num_ << (a.exp_ - b.exp_);
        return a.num_ < rhs ? std::strong_ordering::less
                            : (a.num_ == rhs ? std::strong_ordering::equal : std::strong_ordering::greater);
    }
    const Int lhs = a.num_ << (b.exp_ - a.exp_);
    return lhs < b.num_ ? std::strong_ordering::less
                        : (lhs == b.num_ ? std::strong_ordering::equal : std::strong_ordering::greater);
}

int Dyadic::compare_to(const Int& num, const Int& den) const {
    const Int lhs = num_ * den;
    const Int rhs = num << exp_;
    return lhs < rhs ? -1 : (lhs == rhs ? 0 : 1);
}

long long Dyadic::floor_log2() const {
    if (num_ == 0) throw std::domain_error("log of zero");
    return static_cast<long long>(mp::msb(num_)) - static_cast<long long>(exp_);
}

// ---------------------------------------------------------------------------
// StepLaw

StepLaw::StepLaw(std::uint64_t numerator, unsigned exponent) : num_(numerator), exp_(exponent) {
    while (num_ != 0 && num_ % 2 == 0 && exp_ > 0) {
        num_ /= 2;
        --exp_;
    }
    if (exp_ > 32 || num_ == 0 || num_ > (std::uint64_t{1} << exp_))
        throw std::invalid_argument("step law mu must be a dyadic rational in (0, 1] with denominator <= 2^32");
}

StepLaw StepLaw::parse(const std::string& text) {
    const Fraction f = Fraction::parse(text);
    if (f.num <= 0 || f.num > f.den) throw std::invalid_argument("mu must lie in (0, 1]: '" + text + "'");
    const auto den = static_cast<std::uint64_t>(f.den);
    if ((den & (den - 1)) != 0) throw std::invalid_argument("mu must have a power-of-two denominator: '" + text + "'");
    unsigned e = 0;
    while ((std::uint64_t{1} << e) < den) ++e;
    return StepLaw(static_cast<std::uint64_t>(f.num), e);
}

double StepLaw::value() const noexcept { return std::ldexp(static_cast<double>(num_), -static_cast<int>(exp_)); }

std::string StepLaw::str() const {
    if (exp_ == 0) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(std::uint64_t{1} << exp_);
}

std::vector<StepLaw> default_law_grid() {
    return {StepLaw(1, 0), StepLaw(1, 1), StepLaw(1, 2), StepLaw(1, 3), StepLaw(1, 4)};
}

// ---------------------------------------------------------------------------
// MassFunction

namespace {

Int from_limbs(const u64* limbs, std::size_t width) {
    Int x;
    mp::import_bits(x, limbs, limbs + width, 64, false);
    return x;
}

double limbs_to_double(const u64* limbs, std::size_t width, unsigned exponent) {
    double x = 0.0;
    for (std::size_t l = width; l-- > 0;) x = x * 0x1.0p64 + static_cast<double>(limbs[l]);
    return std::ldexp(x, -static_cast<int>(exponent));
}

/// Three-way comparison of multi-word integers a and b.
int compare_limbs(const u64* a, const u64* b, std::size_t width) {
    for (std::size_t l = width; l-- > 0;)
        if (a[l] != b[l]) return a[l] < b[l] ? -1 : 1;
    return 0;
}

/// 2a >= b, where 2a still fits in `width` words.
bool twice_at_least(const u64* a, const u64* b, std::size_t width) {
    for (std::size_t l = width; l-- > 0;) {
        const u64 doubled = (a[l] << 1) | (l > 0 ? a[l - 1] >> 63 : 0);
        if (doubled != b[l]) return doubled > b[l];
    }
    return true;
}

constexpr double kUnitRoundoff = std::numeric_limits<double>::epsilon() / 2;

}  // namespace

MassFunction::MassFunction(PrimeModulus p, MassMode mode, std::uint64_t dense_threshold)
    : p_(p), mode_(mode), dense_(p.value() <= dense_threshold), threshold_(dense_threshold) {
    if (mode_ == MassMode::floating) {
        if (!dense_) throw std::length_error("floating mass functions need p within the dense threshold");
        masses_.assign(p.value(), 0.0);
        masses_[0] = 1.0;
    } else if (dense_) {
        limbs_.assign(p.value(), 0);
        limbs_[0] = 1;
    } else {
        sparse_[0] = 1;
    }
}

void MassFunction::widen_to(std::size_t width) {
    if (width <= width_) return;
    std::vector<u64> wide(p_.value() * width, 0);
    for (u64 x = 0; x < p_.value(); ++x) std::copy_n(&limbs_[x * width_], width_, &wide[x * width]);
    limbs_.swap(wide);
    width_ = width;
}

void MassFunction::add_step(u64 v, const StepLaw& law) {
    v %= p_.value();
    if (v == 0) return;  // X + 0 has the same law
    if (mode_ == MassMode::floating) return step_float(v, law);
    if (dense_) return step_dense_exact(v, law.zero_weight(), law.sign_weight(), law.bits());
    step_sparse_exact(v, law.zero_weight(), law.sign_weight(), law.bits());
}

void MassFunction::step_dense_exact(u64 v, std::uint64_t w0, std::uint64_t w1, unsigned bits) {
    // Masses are at most 2^exponent; keep one spare bit so that doubling a
    // mass (for neighbourhood tests) cannot overflow.
    const std::size_t need = (exponent_ + bits + 1) / 64 + 1;
    widen_to(need);
    const u64 p = p_.value();
    const std::size_t w = width_;
    std::vector<u64> next(limbs_.size());
    if (w == 1) {
        const u64* a = limbs_.data();
        for (u64 x = 0; x < p; ++x) {
            const u64 lo = x >= v ? x - v : x + p - v;
            const u64 hi = x + v < p ? x + v : x + v - p;
            next[x] = w0 * a[x] + w1 * (a[lo] + a[hi]);
        }
    } else {
        for (u64 x = 0; x < p; ++x) {
            const u64 lo = x >= v ? x - v : x + p - v;
            const u64 hi = x + v < p ? x + v : x + v - p;
            const u64* a = &limbs_[x * w];
            const u64* b = &limbs_[lo * w];
            const u64* c = &limbs_[hi * w];
            u64* out = &next[x * w];
            u128 carry = 0;
            for (std::size_t l = 0; l < w; ++l) {
                const u128 t = static_cast<u128>(w0) * a[l] + static_cast<u128>(w1) * b[l] +
                               static_cast<u128>(w1) * c[l] + carry;
                out[l] = static_cast<u64>(t);
                carry = t >> 64;
            }
        }
    }
    limbs_.swap(next);
    exponent_ += bits;
}

void MassFunction::step_sparse_exact(u64 v, std::uint64_t w0, std::uint64_t w1, unsigned bits) {
    const u64 p = p_.value();
    std::map<u64, Int> next;
    for (const auto& [x, m] : sparse_) {
        if (w0 != 0) next[x] += m * w0;
        next[(x + v) % p] += m * w1;
        next[(x + p - v) % p] += m * w1;
    }
    sparse_.swap(next);
    exponent_ += bits;
    const std::uint64_t limit = std::min<std::uint64_t>(p / 4, threshold_);
    if (sparse_.size() > limit)
        throw std::length_error("exact walk distribution outgrew the sparse limit for p = " + std::to_string(p) +
                                "; use collision_estimate_rho");
}

void MassFunction::step_float(u64 v, const StepLaw& law) {
    const u64 p = p_.value();
    const double w1 = law.value() / 2.0;
    const double w0 = 1.0 - law.value();
    std::vector<double> next(p);
    double top = 0.0, sum = 0.0;
    for (u64 x = 0; x < p; ++x) {
        const u64 lo = x >= v ? x - v : x + p - v;
        const u64 hi = x + v < p ? x + v : x + v - p;
        next[x] = w0 * masses_[x] + w1 * (masses_[lo] + masses_[hi]);
        top = std::max(top, next[x]);
        sum += next[x];
    }
    masses_.swap(next);
    // Each mass is three products and two sums of non-negative terms; the old
    // error is averaged, not amplified, by the step.
    err_ += 4 * kUnitRoundoff * top;
    sum_err_ += 4 * kUnitRoundoff * sum;
    exponent_ += law.bits();
}

Int MassFunction::numerator(u64 x) const {
    if (mode_ == MassMode::floating) throw std::logic_error("numerator() needs an exact mass function");
    x %= p_.value();
    if (dense_) return from_limbs(limbs(x), width_);
    auto it = sparse_.find(x);
    return it == sparse_.end() ? Int(0) : it->second;
}

Dyadic MassFunction::exact(u64 x) const { return Dyadic(numerator(x), exponent_); }

double MassFunction::approx(u64 x) const {
    x %= p_.value();
    if (mode_ == MassMode::floating) return masses_[x];
    if (dense_) return limbs_to_double(limbs(x), width_, exponent_);
    return exact(x).to_double();
}

std::vector<u64> MassFunction::support() const {
    std::vector<u64> out;
    if (mode_ == MassMode::floating) {
        for (u64 x = 0; x < p_.value(); ++x)
            if (masses_[x] > 0.0) out.push_back(x);
    } else if (dense_) {
        for (u64 x = 0; x < p_.value(); ++x) {
            const u64* m = limbs(x);
            if (std::any_of(m, m + width_, [](u64 l) { return l != 0; })) out.push_back(x);
        }
    } else {
        for (const auto& [x, m] : sparse_)
            if (m != 0) out.push_back(x);
    }
    return out;
}

Dyadic MassFunction::max_mass(u64* argmax) const {
    if (mode_ == MassMode::floating) throw std::logic_error("max_mass() needs an exact mass function");
    u64 best = 0;
    if (dense_) {
        for (u64 x = 1; x < p_.value(); ++x)
            if (compare_limbs(limbs(x), limbs(best), width_) > 0) best = x;
        if (argmax) *argmax = best;
        return exact(best);
    }
    const Int* top = nullptr;
    for (const auto& [x, m] : sparse_)
        if (!top || m > *top) {
            top = &m;
            best = x;
        }
    if (argmax) *argmax = best;
    return Dyadic(top ? *top : Int(0), exponent_);
}

double MassFunction::max_mass_approx(u64* argmax) const {
    if (mode_ != MassMode::floating) return max_mass(argmax).to_double();
    const auto it = std::max_element(masses_.begin(), masses_.end());
    if (argmax) *argmax = static_cast<u64>(it - masses_.begin());
    return *it;
}

std::vector<u64> MassFunction::half_zero_level_set() const {
    const u64 p = p_.value();
    std::vector<u64> out;
    if (mode_ == MassMode::floating) {
        for (u64 x = 0; x < p; ++x)
            if (2.0 * masses_[x] >= masses_[0]) out.push_back(x);
        return out;
    }
    if (dense_) {
        const u64* zero = limbs(0);
        if (width_ == 1) {
            for (u64 x = 0; x < p; ++x)
                if (2 * limbs_[x] >= zero[0]) out.push_back(x);
        } else {
            for (u64 x = 0; x < p; ++x)
                if (twice_at_least(limbs(x), zero, width_)) out.push_back(x);
        }
        return out;
    }
    const Int at_zero = numerator(0);
    if (at_zero == 0) {
        if (p > threshold_) throw std::length_error("neighbourhood is all of Z_p and too large to list");
        out.resize(p);
        for (u64 x = 0; x < p; ++x) out[x] = x;
        return out;
    }
    for (const auto& [x, m] : sparse_)
        if (2 * m >= at_zero) out.push_back(x);
    return out;
}

Dyadic MassFunction::total() const {
    if (mode_ == MassMode::floating) throw std::logic_error("total() needs an exact mass function");
    Int sum = 0;
    if (dense_) {
        for (u64 x = 0; x < p_.value(); ++x) sum += from_limbs(limbs(x), width_);
    } else {
        for (const auto& [x, m] : sparse_) sum += m;
    }
    return Dyadic(sum, exponent_);
}

bool operator==(const MassFunction& a, const MassFunction& b) {
    if (a.p_ != b.p_ || a.mode_ != b.mode_) return false;
    if (a.mode_ == MassMode::floating) return a.masses_ == b.masses_;
    const auto sa = a.support();
    if (sa != b.support()) return false;
    return std::all_of(sa.begin(), sa.end(), [&](u64 x) { return a.exact(x) == b.exact(x); });
}

MassFunction walk_distribution(std::span<const u64> v, const StepLaw& law, PrimeModulus p, WalkOptions options) {
    MassFunction f(p, options.mode, options.dense_threshold);
    for (u64 x : v) f.add_step(x, law);
    return f;
}

void write_pmf(std::ostream& out, const MassFunction& f) {
    for (u64 x : f.support()) {
        const Dyadic m = f.exact(x);
        out << x << ' ' << m.numerator() << ' ' << m.exponent() << '\n';
    }
}

}  // namespace bandsing
