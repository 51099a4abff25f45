#pragma once

// Monte Carlo campaigns and exact enumerations over band ensembles, and the
// per-block classification of kernel vectors of row-deleted matrices.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "bandsing/dyadic.hpp"
#include "bandsing/ensembles.hpp"
#include "bandsing/fieldcore.hpp"
#include "bandsing/fraction.hpp"
#include "bandsing/lotools.hpp"
#include "bandsing/stats.hpp"

namespace bandsing {

struct PrimePolicy {
    enum class Kind { fixed, choose, integer };

    Kind kind = Kind::choose;
    u64 p = 0;                        // fixed
    u64 cap = u64{1} << 20;           // choose

    friend bool operator==(const PrimePolicy&, const PrimePolicy&) = default;
};

struct RowPolicy {
    enum class Kind { fixed, uniform, center };

    Kind kind = Kind::center;
    std::size_t index = 0;            // fixed

    friend bool operator==(const RowPolicy&, const RowPolicy&) = default;
};

std::string to_string(PrimePolicy::Kind kind);
std::string to_string(RowPolicy::Kind kind);

struct ExperimentConfig {
    EnsembleKind kind = EnsembleKind::general;
    std::optional<std::size_t> d;     // nullopt: d = ceil(n^alpha)
    EntryLaw offband = EntryLaw::zero();
    std::vector<std::size_t> n_list;
    Fraction alpha = Fraction::of(3, 4);

    Fraction rho = Fraction::of(1, 2);
    Fraction tau = Fraction::of(1, 4);
    StepLaw mu{1, 2};
    std::size_t K = 8;

    PrimePolicy prime;
    std::uint64_t trials = 100;
    std::uint64_t master_seed = 1;
    RowPolicy row;
    unsigned threads = 1;

    /// Every violated constraint, empty when the config is usable.
    std::vector<std::string> problems() const;
    /// Constraints the proofs rely on but which do not prevent a run.
    std::vector<std::string> warnings() const;

    std::size_t bandwidth_for(std::size_t n) const;
    BandProfile profile_for(std::size_t n) const;
    /// nullopt under the integer policy.
    std::optional<PrimeChoice> prime_for(std::size_t n) const;
};

// ---- singularity probability ----------------------------------------------

struct SingularityCell {
    std::size_t n = 0;
    std::optional<u64> p;             // nullopt: decided over Z
    bool prime_clamped = false;
    std::uint64_t trials = 0;
    std::uint64_t singular = 0;
    double p_hat = 0.0;
    ProportionInterval ci;
    bool censored = false;            // no singular matrix seen
    double bound = 0.0;               // 3 / trials when censored, else ci.hi
};

struct SingularityRecord {
    std::uint64_t trial = 0;
    std::uint64_t seed = 0;
    std::size_t n = 0;
    std::optional<u64> p;
    bool singular = false;
};

/// Seed of trial t at dimension n.
std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t n, std::uint64_t t);

/// One cell per n in config order. Records, if requested, come out ordered by
/// (n, trial) whatever the thread count.
std::vector<SingularityCell> estimate_singularity_probability(const ExperimentConfig& cfg,
                                                              std::vector<SingularityRecord>* records = nullptr);

struct ExactProbability {
    std::uint64_t singular = 0;
    std::uint64_t total = 0;          // 2^(random entries)

    double value() const noexcept { return static_cast<double>(singular) / static_cast<double>(total); }
    Fraction fraction() const;
};

inline constexpr std::size_t kMaxEnumeratedEntries = 25;

/// Counts singular matrices over every sign pattern of the random support.
/// Off-band entries must be zero or constant. Throws std::invalid_argument
/// when the support has more than kMaxEnumeratedEntries entries.
ExactProbability enumerate_singularity_probability(const BandProfile& profile);

// ---- block classification -------------------------------------------------

struct CaseLabel {
    enum class Kind { small_support, strong_anticoncentration, dyadic };

    Kind kind = Kind::small_support;
    bool degenerate = false;          // small support with v_{I_k} = 0
    int t = 0;                        // dyadic bucket

    std::string str() const;          // SMALL_SUPPORT, SMALL_SUPPORT_ZERO, STRONG_ANTICONC, DYADIC(t)
    friend bool operator==(const CaseLabel&, const CaseLabel&) = default;
};

/// t with rho in [2^-t, 2^-t+1).
int dyadic_bucket(const Dyadic& rho);

/// Label of one block from its support size and rho_mu.
CaseLabel classify_block(std::size_t support, const Dyadic& rho_mu, std::size_t K, u64 p);

std::vector<CaseLabel> classify_blocks(std::span<const u64> v, const IntervalPartition& part, const StepLaw& mu,
                                       std::size_t K, PrimeModulus p);

struct BlockStat {
    std::size_t k = 0;
    std::size_t support = 0;
    Dyadic rho;                       // mu = 1
    Dyadic rho_mu;
    CaseLabel label;
};

struct VectorSurvey {
    std::vector<BlockStat> blocks;
    Dyadic home_rho;                  // rho of the block containing I
    bool conclusion_holds = false;    // home_rho <= exp(-tau n^(alpha/2))
};

struct TrialRecord {
    std::uint64_t trial = 0;
    std::uint64_t seed = 0;
    std::size_t n = 0;
    std::size_t d = 0;
    u64 p = 0;
    bool prime_clamped = false;
    std::size_t row = 0;              // I
    std::size_t home_block = 0;       // n_I
    std::size_t e = 0;
    double s = 0.0;
    bool partition_fallback = false;
    std::size_t block_count = 0;
    bool singular = false;            // A itself, over F_p
    std::size_t kernel_dim = 0;       // of A^I
    std::vector<VectorSurvey> vectors;  // one per canonical basis vector
};

std::vector<BlockStat> survey_blocks(std::span<const u64> v, const IntervalPartition& part, const StepLaw& mu,
                                     std::size_t K, PrimeModulus p);

/// Records ordered by (n, trial) whatever the thread count. Throws
/// std::invalid_argument under the integer policy and when the prime exceeds
/// the exact dense pmf threshold.
std::vector<TrialRecord> kernel_structure_survey(const ExperimentConfig& cfg);

struct SurveySummary {
    std::size_t n = 0;
    u64 p = 0;
    std::uint64_t trials = 0;
    std::size_t min_kernel_dim = 0;
    double conclusion_fraction = 0.0;  // over the first basis vector of each trial
    double median_home_rho = 0.0;
};

/// One row per n, in order of first appearance.
std::vector<SurveySummary> summarize_survey(const std::vector<TrialRecord>& records);

// ---- scaling fits ---------------------------------------------------------

struct ScalingPoint {
    std::size_t n = 0;
    double value = 0.0;               // estimate, or an upper bound if censored
    bool censored = false;
};

struct ScalingFit {
    double alpha = 0.0;
    double C = 0.0;                   // log(1/P) ~ C n^(alpha/2)
    double r_squared = 0.0;           // centered
    std::vector<ScalingPoint> points;
    std::vector<double> x;            // n^(alpha/2)
    std::vector<double> y;            // log(1/value)
    std::vector<double> residuals;    // y - C x for uncensored points, 0 otherwise
    std::vector<bool> consistent;     // censored: bound >= exp(-C x)
};

/// Least squares through the origin on the uncensored points. Throws
/// std::invalid_argument with fewer than two of them or values outside (0, 1].
ScalingFit fit_scaling(const std::vector<ScalingPoint>& points, double alpha);

// ---- row span certificates ------------------------------------------------

struct RowSpanCertificate {
    std::size_t row = 0;
    std::vector<u64> v;               // nonzero, A^row v = 0 and <A_row, v> = 0
};

/// Throws std::invalid_argument when A is nonsingular over F_p.
RowSpanCertificate singular_row_span_check(const IntegerMatrix& a, PrimeModulus p);
bool verify_row_span_certificate(const IntegerMatrix& a, PrimeModulus p, const RowSpanCertificate& cert);

// ---- persistence ----------------------------------------------------------

nlohmann::json to_json(const SingularityRecord& r);
nlohmann::json to_json(const TrialRecord& r);
nlohmann::json to_json(const ExperimentConfig& cfg);

void write_jsonl(std::ostream& out, const std::vector<SingularityRecord>& records);
void write_jsonl(std::ostream& out, const std::vector<TrialRecord>& records);

/// Columns n,p,trials,singular_count,P_hat,ci_lo,ci_hi,censored.
void write_summary_csv(std::ostream& out, const std::vector<SingularityCell>& cells);
/// Columns n,p,trials,min_kernel_dim,conclusion_fraction,median_home_rho.
void write_survey_csv(std::ostream& out, const std::vector<SurveySummary>& rows);
/// Columns n,x,log_inv_value,censored,residual,consistent.
void write_fit_csv(std::ostream& out, const ScalingFit& fit);

/// Runs f(i) for i in [0, count) on up to `threads` workers. The first
/// exception thrown by any call is rethrown.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& f);

}  // namespace bandsing
