#pragma once

// Prime selection and word-sized modular arithmetic.
//
// Every modulus used by the toolkit is an odd prime below 2^62, so products
// of two residues fit in an unsigned 128-bit integer and Montgomery reduction
// with a single 64-bit word is exact.

#include <cstdint>
#include <stdexcept>

namespace bandsing {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

inline constexpr u64 kMaxModulus = (u64{1} << 62);

/// An odd prime p >= 3, certified by the deterministic Miller-Rabin test.
class PrimeModulus {
public:
    /// Throws std::invalid_argument unless p is an odd prime below 2^62.
    explicit PrimeModulus(u64 p);

    constexpr u64 value() const noexcept { return p_; }
    constexpr operator u64() const noexcept { return p_; }
    constexpr bool verified() const noexcept { return true; }

    friend constexpr bool operator==(PrimeModulus, PrimeModulus) = default;

private:
    u64 p_;
};

/// Deterministic for all 64-bit inputs (Miller-Rabin, first twelve prime bases).
bool is_prime(u64 m);

/// Smallest prime >= lo. Throws std::overflow_error past kMaxModulus.
u64 next_prime(u64 lo);

/// Largest prime <= hi, or 0 if hi < 2.
u64 prev_prime(u64 hi);

struct PrimeChoice {
    PrimeModulus p;
    bool clamped = false;
    double target = 0.0;  // exp(rho * n^(alpha/2)) before rounding to a prime
};

/// Smallest odd prime >= exp(rho * n^(alpha/2)); if that lies above cap, the
/// largest prime <= cap with `clamped` set.
PrimeChoice choose_prime(u64 n, double alpha, double rho, u64 cap);

constexpr u64 add_mod(u64 a, u64 b, u64 p) noexcept {
    u64 s = a + b;
    return s >= p ? s - p : s;
}

constexpr u64 sub_mod(u64 a, u64 b, u64 p) noexcept {
    return a >= b ? a - b : a + p - b;
}

constexpr u64 mul_mod(u64 a, u64 b, u64 p) noexcept {
    return static_cast<u64>(static_cast<u128>(a) * b % p);
}

u64 pow_mod(u64 base, u64 exp, u64 p) noexcept;

/// Reduces an arbitrary signed value into [0, p).
constexpr u64 residue(std::int64_t a, u64 p) noexcept {
    if (a >= 0) return static_cast<u64>(a) % p;
    u64 r = static_cast<u64>(-(a + 1)) % p;  // avoids overflow at INT64_MIN
    return r == p - 1 ? 0 : p - 1 - r;
}

/// Inverse of a modulo p. Throws std::domain_error when a == 0 (mod p).
u64 mod_inv(u64 a, PrimeModulus p);

/// Same as mod_inv without re-certifying p; for callers that already hold a
/// verified modulus as a raw word.
u64 inverse_mod(u64 a, u64 p);

/// Montgomery form arithmetic for an odd modulus below 2^63.
///
/// Values live as x*R mod p with R = 2^64. Zero maps to zero, so zero tests
/// survive the change of representation, which is all the elimination code
/// relies on.
class Montgomery {
public:
    explicit Montgomery(u64 p) noexcept : p_(p) {
        u64 inv = p;  // Newton iteration for p^-1 mod 2^64
        for (int i = 0; i < 5; ++i) inv *= 2 - p * inv;
        neg_inv_ = ~inv + 1;
        r2_ = static_cast<u64>(((~u128{0}) % p + 1) % p);  // 2^128 mod p
    }

    u64 modulus() const noexcept { return p_; }

    u64 reduce(u128 t) const noexcept {
        u64 m = static_cast<u64>(t) * neg_inv_;
        u128 s = t + static_cast<u128>(m) * p_;
        // s may overflow 128 bits only if p >= 2^63.
        u64 r = static_cast<u64>(s >> 64);
        return r >= p_ ? r - p_ : r;
    }

    u64 mul(u64 a, u64 b) const noexcept { return reduce(static_cast<u128>(a) * b); }
    u64 to_mont(u64 a) const noexcept { return mul(a % p_, r2_); }
    u64 from_mont(u64 a) const noexcept { return reduce(a); }
    u64 add(u64 a, u64 b) const noexcept { return add_mod(a, b, p_); }
    u64 sub(u64 a, u64 b) const noexcept { return sub_mod(a, b, p_); }

    /// Inverse of a Montgomery-form value, returned in Montgomery form.
    u64 inv(u64 a) const { return to_mont(inverse_mod(from_mont(a), p_)); }

private:
    u64 p_;
    u64 neg_inv_;
    u64 r2_;
};

}  // namespace bandsing
