#pragma once

// Littlewood-Offord machinery on Z_p.
//
// For v in Z_p^d and a lazy sign law with P(eps = +1) = P(eps = -1) = mu/2,
// the walk X = eps_1 v_1 + ... + eps_d v_d has an exact distribution whose
// masses are dyadic rationals when mu is dyadic. The concentration function
// is rho_mu(v) = max_x P(X = x), and the neighbourhood of w is the set of
// residues hit with at least half the probability of 0.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bandsing/dyadic.hpp"
#include "bandsing/fieldcore.hpp"
#include "bandsing/fraction.hpp"

namespace bandsing {

/// Raised when an operation's mathematical hypotheses do not hold for its input.
struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// mu = numerator / 2^exponent in (0, 1].
class StepLaw {
public:
    /// Throws std::invalid_argument unless 0 < num/2^exp <= 1 and exp <= 32.
    StepLaw(std::uint64_t numerator, unsigned exponent);
    static StepLaw parse(const std::string& text);  // "1", "1/4", "3/8"

    std::uint64_t numerator() const noexcept { return num_; }
    unsigned exponent() const noexcept { return exp_; }
    double value() const noexcept;
    std::string str() const;

    /// Every step's probabilities share the denominator 2^bits().
    unsigned bits() const noexcept { return exp_ + 1; }
    std::uint64_t zero_weight() const noexcept { return 2 * ((std::uint64_t{1} << exp_) - num_); }
    std::uint64_t sign_weight() const noexcept { return num_; }

    friend bool operator==(const StepLaw&, const StepLaw&) = default;

private:
    std::uint64_t num_;
    unsigned exp_;
};

/// Default grid of dyadic laws {1, 1/2, 1/4, 1/8, 1/16}.
std::vector<StepLaw> default_law_grid();

enum class MassMode { exact, floating };

struct WalkOptions {
    MassMode mode = MassMode::exact;
    std::uint64_t dense_threshold = std::uint64_t{1} << 22;
};

/// Distribution of a walk on Z_p.
///
/// Exact mode stores integer numerators over the common denominator
/// 2^exponent(), densely as multi-word integers for p up to the dense
/// threshold and sparsely above it. Floating mode stores binary64 masses and a
/// running bound on the absolute error of each mass.
class MassFunction {
public:
    /// Point mass at 0.
    MassFunction(PrimeModulus p, MassMode mode = MassMode::exact, std::uint64_t dense_threshold = std::uint64_t{1} << 22);

    /// Convolves with the step {0: 1 - mu, +v: mu/2, -v: mu/2}.
    void add_step(u64 v, const StepLaw& law);

    PrimeModulus modulus() const noexcept { return p_; }
    MassMode mode() const noexcept { return mode_; }
    bool dense() const noexcept { return dense_; }
    unsigned exponent() const noexcept { return exponent_; }

    Dyadic exact(u64 x) const;
    /// Raw numerator over 2^exponent(); exact mode only.
    Dyadic::Int numerator(u64 x) const;
    double approx(u64 x) const;

    /// Residues with positive mass, ascending.
    std::vector<u64> support() const;

    /// Largest mass and the smallest residue attaining it.
    Dyadic max_mass(u64* argmax = nullptr) const;
    double max_mass_approx(u64* argmax = nullptr) const;

    /// Residues x with P(x) >= P(0) / 2, ascending.
    std::vector<u64> half_zero_level_set() const;

    /// Per-mass absolute error bound (0 in exact mode).
    double error_bound() const noexcept { return err_; }
    /// Bound on |sum of masses - 1| (0 in exact mode).
    double sum_error_bound() const noexcept { return sum_err_; }

    /// Exact sum of all masses (exact mode) as a dyadic.
    Dyadic total() const;

    friend bool operator==(const MassFunction& a, const MassFunction& b);

private:
    void widen_to(std::size_t width);
    void step_dense_exact(u64 v, std::uint64_t w0, std::uint64_t w1, unsigned bits);
    void step_sparse_exact(u64 v, std::uint64_t w0, std::uint64_t w1, unsigned bits);
    void step_float(u64 v, const StepLaw& law);
    const u64* limbs(u64 x) const noexcept { return &limbs_[x * width_]; }

    PrimeModulus p_;
    MassMode mode_;
    bool dense_;
    std::uint64_t threshold_;
    unsigned exponent_ = 0;
    std::size_t width_ = 1;
    std::vector<u64> limbs_;                 // exact dense, p * width_ words
    std::map<u64, Dyadic::Int> sparse_;      // exact sparse
    std::vector<double> masses_;             // floating
    double err_ = 0.0;
    double sum_err_ = 0.0;
};

MassFunction walk_distribution(std::span<const u64> v, const StepLaw& law, PrimeModulus p, WalkOptions options = {});

Dyadic rho_mu(std::span<const u64> v, const StepLaw& law, PrimeModulus p, WalkOptions options = {});

/// Number of coordinates that are nonzero modulo p.
std::size_t support_size(std::span<const u64> v, u64 p);

/// {x : P(X_mu(w) = x) >= P(X_mu(w) = 0) / 2}, ascending. When P(0) = 0 the
/// condition holds everywhere and the result is all of Z_p.
std::vector<u64> neighborhood(std::span<const u64> w, const StepLaw& law, PrimeModulus p, WalkOptions options = {});

/// Budget (2/mu) * log2(1/rho).
double lo_budget(const Dyadic& rho, const StepLaw& law);

struct LOWitness {
    std::vector<std::size_t> T;          // ascending coordinate indices
    std::vector<u64> w;                  // v restricted to T
    std::vector<u64> N;                  // neighbourhood of w, ascending
    std::vector<std::size_t> exceptional;  // indices i with v_i outside N, ascending
    double D = 0.0;
    Dyadic rho;                          // rho_mu(v)
};

enum class SearchOutcome { greedy, exhaustive, not_found, budget_exhausted };

std::string to_string(SearchOutcome outcome);

struct WitnessOptions {
    std::size_t exhaustive_max_d = 20;
    std::size_t exhaustive_max_T = 6;
    std::uint64_t budget = 5'000'000;  // subset evaluations in the exhaustive phase
};

struct WitnessSearch {
    SearchOutcome outcome = SearchOutcome::not_found;
    std::optional<LOWitness> witness;
    std::uint64_t evaluated = 0;
};

/// Looks for T with |T| <= D such that all but at most D coordinates of v lie
/// in the neighbourhood of v_T: greedy growth first, then exhaustive search
/// over small T. Throws PreconditionError unless mu <= 1/4, |v| >= D and
/// rho_mu(v) >= 2/p.
WitnessSearch find_lo_witness(std::span<const u64> v, const StepLaw& law, PrimeModulus p, WitnessOptions options = {});

/// Recomputes everything in the witness from scratch.
bool verify_witness(std::span<const u64> v, const StepLaw& law, PrimeModulus p, const LOWitness& witness);

struct FourierCheck {
    std::optional<StepLaw> nu;
    double ratio = 0.0;  // rho_mu / rho_nu for the chosen nu, or the best ratio seen
};

/// Largest nu in the grid with rho_mu(v) <= c * rho_nu(v). Throws
/// PreconditionError unless rho_mu(v) >= 2d/p and |v| >= K.
FourierCheck check_fourier_lemma(std::span<const u64> v, const Fraction& c, const StepLaw& mu,
                                 std::span<const StepLaw> nu_grid, std::size_t K, PrimeModulus p);

struct CollisionEstimate {
    double lower = 0.0;  // Wilson 99% lower end for q = sum P(x)^2 <= rho
    double upper = 1.0;  // square root of the Wilson upper end, >= rho
    double q_hat = 0.0;
    double modal = 0.0;  // largest empirical frequency over all sampled endpoints
};

/// Monte Carlo bracket for rho from collisions of independent walk pairs.
CollisionEstimate collision_estimate_rho(std::span<const u64> v, const StepLaw& law, PrimeModulus p,
                                         std::uint64_t trials, std::uint64_t seed);

/// Lines "residue numerator exponent" for every residue with positive mass.
void write_pmf(std::ostream& out, const MassFunction& f);

}  // namespace bandsing
