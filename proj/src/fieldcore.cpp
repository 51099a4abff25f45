#include "bandsing/fieldcore.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace bandsing {

namespace {

bool miller_rabin_round(u64 n, u64 d, int r, u64 a) {
    u64 x = pow_mod(a % n, d, n);
    if (x == 1 || x == n - 1) return true;
    for (int i = 1; i < r; ++i) {
        x = mul_mod(x, x, n);
        if (x == n - 1) return true;
    }
    return false;
}

}  // namespace

u64 pow_mod(u64 base, u64 exp, u64 p) noexcept {
    u64 result = 1 % p;
    base %= p;
    while (exp > 0) {
        if (exp & 1) result = mul_mod(result, base, p);
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    return result;
}

bool is_prime(u64 m) {
    if (m < 2) return false;
    constexpr std::array<u64, 12> bases{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    for (u64 b : bases) {
        if (m == b) return true;
        if (m % b == 0) return false;
    }
    u64 d = m - 1;
    int r = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++r;
    }
    // These twelve bases are a deterministic witness set below 3.3e24.
    for (u64 b : bases)
        if (!miller_rabin_round(m, d, r, b)) return false;
    return true;
}

u64 next_prime(u64 lo) {
    if (lo <= 2) return 2;
    u64 c = lo | 1;
    while (c <= kMaxModulus) {
        if (is_prime(c)) return c;
        c += 2;
    }
    throw std::overflow_error("next_prime: no prime below 2^62 at or above " + std::to_string(lo));
}

u64 prev_prime(u64 hi) {
    if (hi < 2) return 0;
    if (hi == 2) return 2;
    u64 c = (hi % 2 == 0) ? hi - 1 : hi;
    for (; c >= 3; c -= 2)
        if (is_prime(c)) return c;
    return 2;
}

PrimeModulus::PrimeModulus(u64 p) : p_(p) {
    if (p < 3 || p >= kMaxModulus || !is_prime(p))
        throw std::invalid_argument("not an odd prime below 2^62: " + std::to_string(p));
}

PrimeChoice choose_prime(u64 n, double alpha, double rho, u64 cap) {
    if (cap < 3) throw std::invalid_argument("choose_prime: cap must be at least 3");
    if (n < 1 || !(rho > 0.0)) throw std::invalid_argument("choose_prime: need n >= 1 and rho > 0");
    cap = std::min(cap, kMaxModulus - 1);

    const double target = std::exp(rho * std::pow(static_cast<double>(n), alpha / 2.0));
    auto clamp = [&] { return PrimeChoice{PrimeModulus(prev_prime(cap)), true, target}; };
    if (!std::isfinite(target) || target > static_cast<double>(cap)) return clamp();

    u64 lo = static_cast<u64>(std::ceil(target));
    u64 p = next_prime(std::max<u64>(lo, 3));
    if (p > cap) return clamp();
    return PrimeChoice{PrimeModulus(p), false, target};
}

u64 inverse_mod(u64 a, u64 p) {
    a %= p;
    if (a == 0) throw std::domain_error("mod_inv: zero has no inverse");
    // Extended Euclid on signed 128-bit to stay clear of overflow.
    __int128 old_r = a, r = p, old_s = 1, s = 0;
    while (r != 0) {
        __int128 q = old_r / r;
        __int128 t = old_r - q * r;
        old_r = r;
        r = t;
        t = old_s - q * s;
        old_s = s;
        s = t;
    }
    __int128 x = old_s % static_cast<__int128>(p);
    if (x < 0) x += p;
    return static_cast<u64>(x);
}

u64 mod_inv(u64 a, PrimeModulus p) { return inverse_mod(a, p.value()); }

}  // namespace bandsing
