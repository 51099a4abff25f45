#include "bandsing/experiments.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "bandsing/rankengine.hpp"
#include "bandsing/rng.hpp"

namespace bandsing {

using nlohmann::json;

std::string to_string(PrimePolicy::Kind kind) {
    switch (kind) {
        case PrimePolicy::Kind::fixed: return "fixed";
        case PrimePolicy::Kind::choose: return "choose";
        case PrimePolicy::Kind::integer: return "integer";
    }
    return "choose";
}

std::string to_string(RowPolicy::Kind kind) {
    switch (kind) {
        case RowPolicy::Kind::fixed: return "fixed";
        case RowPolicy::Kind::uniform: return "uniform";
        case RowPolicy::Kind::center: return "center";
    }
    return "center";
}

// ---- config ---------------------------------------------------------------

std::size_t ExperimentConfig::bandwidth_for(std::size_t n) const {
    if (d) return *d;
    const double x = std::pow(static_cast<double>(n), alpha.value());
    const auto c = static_cast<std::size_t>(std::ceil(x - 1e-9));
    return std::clamp<std::size_t>(c, 1, std::max<std::size_t>(n, 1));
}

BandProfile ExperimentConfig::profile_for(std::size_t n) const {
    BandProfile profile;
    profile.n = n;
    profile.d = bandwidth_for(n);
    profile.kind = kind;
    profile.offband = offband;
    profile.alpha = alpha.value();
    return profile;
}

std::optional<PrimeChoice> ExperimentConfig::prime_for(std::size_t n) const {
    switch (prime.kind) {
        case PrimePolicy::Kind::integer: return std::nullopt;
        case PrimePolicy::Kind::fixed: return PrimeChoice{PrimeModulus(prime.p), false, static_cast<double>(prime.p)};
        case PrimePolicy::Kind::choose: return choose_prime(n, alpha.value(), rho.value(), prime.cap);
    }
    return std::nullopt;
}

std::vector<std::string> ExperimentConfig::problems() const {
    std::vector<std::string> out;
    if (n_list.empty()) out.push_back("n_list must not be empty");
    if (alpha.num <= 0 || alpha.value() > 1.0) out.push_back("alpha must lie in (0, 1]");
    if (rho.num <= 0) out.push_back("rho must be positive");
    if (tau.num <= 0) out.push_back("tau must be positive");
    if (K < 1) out.push_back("K must be at least 1");
    if (trials < 1) out.push_back("trials must be at least 1");
    if (threads < 1) out.push_back("threads must be at least 1");
    if (d && *d < 1) out.push_back("d must be at least 1");
    if (prime.kind == PrimePolicy::Kind::fixed && (prime.p < 3 || prime.p >= kMaxModulus || !is_prime(prime.p)))
        out.push_back("p = " + std::to_string(prime.p) + " is not an odd prime below 2^62");
    if (prime.kind == PrimePolicy::Kind::choose && prime.cap < 3) out.push_back("prime cap must be at least 3");
    for (std::size_t n : n_list) {
        if (n < 1) {
            out.push_back("n must be at least 1");
            continue;
        }
        if (alpha.num > 0 || d) {
            try {
                profile_for(n).validate();
            } catch (const std::exception& e) {
                out.push_back("n = " + std::to_string(n) + ": " + e.what());
            }
        }
        if (row.kind == RowPolicy::Kind::fixed && row.index >= n)
            out.push_back("row index " + std::to_string(row.index) + " is outside [0, " + std::to_string(n) + ")");
    }
    return out;
}

std::vector<std::string> ExperimentConfig::warnings() const {
    std::vector<std::string> out;
    // tau < rho / 2  <=>  2 tau.num rho.den < rho.num tau.den
    if (!(2 * tau.num * rho.den < rho.num * tau.den))
        out.push_back("tau = " + tau.str() + " violates tau < rho/2 = " + Fraction::of(rho.num, 2 * rho.den).str() +
                      "; the kernel structure bound is only established under this constraint");
    if (mu.value() > 0.25) out.push_back("mu = " + mu.str() + " exceeds 1/4; the inverse theorem assumes mu <= 1/4");
    return out;
}

// ---- threads ----------------------------------------------------------------

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& f) {
    const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count || failed.load()) return;
            try {
                f(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true);
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// ---- singularity probability --------------------------------------------

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t n, std::uint64_t t) {
    return hash_key(master_seed, n, t);
}

std::vector<SingularityCell> estimate_singularity_probability(const ExperimentConfig& cfg,
                                                              std::vector<SingularityRecord>* records) {
    if (auto problems = cfg.problems(); !problems.empty()) throw std::invalid_argument(problems.front());
    std::vector<SingularityCell> cells;
    if (records) records->clear();

    for (std::size_t n : cfg.n_list) {
        const BandProfile profile = cfg.profile_for(n);
        const auto choice = cfg.prime_for(n);
        std::vector<char> singular(cfg.trials, 0);
        parallel_for(cfg.trials, cfg.threads, [&](std::size_t t) {
            const IntegerMatrix a = sample_matrix(profile, trial_seed(cfg.master_seed, n, t));
            singular[t] = choice ? is_singular_fp(reduce_mod(a, choice->p)) : is_singular_Z(a);
        });

        SingularityCell cell;
        cell.n = n;
        if (choice) {
            cell.p = choice->p.value();
            cell.prime_clamped = choice->clamped;
        }
        cell.trials = cfg.trials;
        for (std::uint64_t t = 0; t < cfg.trials; ++t) {
            cell.singular += singular[t] ? 1 : 0;
            if (records) records->push_back({t, trial_seed(cfg.master_seed, n, t), n, cell.p, singular[t] != 0});
        }
        cell.p_hat = static_cast<double>(cell.singular) / static_cast<double>(cell.trials);
        cell.ci = wilson_interval(cell.singular, cell.trials);
        cell.censored = cell.singular == 0;
        cell.bound = cell.censored ? 3.0 / static_cast<double>(cell.trials) : cell.ci.hi;
        cells.push_back(cell);
    }
    return cells;
}

Fraction ExactProbability::fraction() const {
    return Fraction::of(static_cast<std::int64_t>(singular), static_cast<std::int64_t>(total));
}

ExactProbability enumerate_singularity_probability(const BandProfile& profile) {
    profile.validate();
    const std::size_t n = profile.n;
    const bool general = profile.kind == EnsembleKind::general;
    const EntryLaw& law = profile.offband;
    if (general && law.kind == EntryLaw::Kind::uniform_range && law.lo != law.hi)
        throw std::invalid_argument("enumerate_singularity_probability: uniform off-band entries are not enumerable");

    IntegerMatrix base(n, n);
    std::vector<std::pair<std::size_t, std::size_t>> slots;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const bool random = in_random_support(profile, i, j) || (general && law.kind == EntryLaw::Kind::rademacher);
            if (random) {
                slots.emplace_back(i, j);
                base(i, j) = 1;
            } else if (general && law.kind != EntryLaw::Kind::zero) {
                base(i, j) = law.lo;
            }
        }
    if (slots.size() > kMaxEnumeratedEntries)
        throw std::invalid_argument("enumerate_singularity_probability: " + std::to_string(slots.size()) +
                                    " random entries exceed the limit of " + std::to_string(kMaxEnumeratedEntries));

    ExactProbability out;
    out.total = std::uint64_t{1} << slots.size();
    // Row norms do not depend on the signs, so one set of primes serves every
    // pattern.
    const auto bound_sq = hadamard_bound_squared(base);
    if (bound_sq == 0) {
        out.singular = out.total;
        return out;
    }
    const auto primes = crt_primes_for(bound_sq);
    IntegerMatrix a = base;
    for (std::uint64_t mask = 0; mask < out.total; ++mask) {
        for (std::size_t s = 0; s < slots.size(); ++s)
            a(slots[s].first, slots[s].second) = (mask >> s) & 1 ? -1 : 1;
        bool full = false;
        for (const auto& p : primes)
            if (rank_fp_dense(reduce_mod(a, p)) == n) {
                full = true;
                break;
            }
        out.singular += full ? 0 : 1;
    }
    return out;
}

// ---- block classification ---------------------------------------------

std::string CaseLabel::str() const {
    switch (kind) {
        case Kind::small_support: return degenerate ? "SMALL_SUPPORT_ZERO" : "SMALL_SUPPORT";
        case Kind::strong_anticoncentration: return "STRONG_ANTICONC";
        case Kind::dyadic: return "DYADIC(" + std::to_string(t) + ")";
    }
    return "SMALL_SUPPORT";
}

int dyadic_bucket(const Dyadic& rho) {
    if (rho.is_zero()) throw std::domain_error("dyadic_bucket: rho must be positive");
    return static_cast<int>(-rho.floor_log2());
}

CaseLabel classify_block(std::size_t support, const Dyadic& rho_mu, std::size_t K, u64 p) {
    CaseLabel label;
    if (support <= K) {
        label.kind = CaseLabel::Kind::small_support;
        label.degenerate = support == 0;
    } else if (rho_mu.compare_to(2, p) <= 0) {
        label.kind = CaseLabel::Kind::strong_anticoncentration;
    } else {
        label.kind = CaseLabel::Kind::dyadic;
        label.t = dyadic_bucket(rho_mu);
    }
    return label;
}

std::vector<BlockStat> survey_blocks(std::span<const u64> v, const IntervalPartition& part, const StepLaw& mu,
                                     std::size_t K, PrimeModulus p) {
    if (v.size() != part.n) throw std::invalid_argument("survey_blocks: vector length differs from the partition");
    static const StepLaw one(1, 0);
    std::vector<BlockStat> out;
    out.reserve(part.count());
    for (std::size_t k = 0; k < part.count(); ++k) {
        const Interval I = part.intervals[k];
        const auto block = v.subspan(I.begin, I.size());
        BlockStat stat;
        stat.k = k;
        stat.support = support_size(block, p.value());
        stat.rho = rho_mu(block, one, p);
        stat.rho_mu = mu == one ? stat.rho : rho_mu(block, mu, p);
        stat.label = classify_block(stat.support, stat.rho_mu, K, p.value());
        out.push_back(std::move(stat));
    }
    return out;
}

std::vector<CaseLabel> classify_blocks(std::span<const u64> v, const IntervalPartition& part, const StepLaw& mu,
                                       std::size_t K, PrimeModulus p) {
    std::vector<CaseLabel> out;
    for (const auto& stat : survey_blocks(v, part, mu, K, p)) out.push_back(stat.label);
    return out;
}

namespace {

std::size_t pick_row(const RowPolicy& policy, std::size_t n, std::uint64_t seed) {
    switch (policy.kind) {
        case RowPolicy::Kind::fixed: return policy.index;
        case RowPolicy::Kind::center: return n / 2;
        case RowPolicy::Kind::uniform: {
            SplitMix64 rng(hash_key(seed, ~std::uint64_t{0}));
            return static_cast<std::size_t>(rng.below(n));
        }
    }
    return n / 2;
}

}  // namespace

std::vector<TrialRecord> kernel_structure_survey(const ExperimentConfig& cfg) {
    if (auto problems = cfg.problems(); !problems.empty()) throw std::invalid_argument(problems.front());
    if (cfg.prime.kind == PrimePolicy::Kind::integer)
        throw std::invalid_argument("kernel survey needs a prime; the integer policy has none");
    const WalkOptions walk_defaults;

    std::vector<TrialRecord> records;
    for (std::size_t n : cfg.n_list) {
        const BandProfile profile = cfg.profile_for(n);
        const PrimeChoice choice = *cfg.prime_for(n);
        const PrimeModulus p = choice.p;
        if (p.value() > walk_defaults.dense_threshold)
            throw std::invalid_argument("p = " + std::to_string(p.value()) +
                                        " exceeds the exact pmf threshold; lower the prime cap");
        const IntervalPartition part = partition_intervals(n, profile.d);
        const double level = std::exp(-cfg.tau.value() * std::pow(static_cast<double>(n), cfg.alpha.value() / 2));

        std::vector<TrialRecord> batch(cfg.trials);
        parallel_for(cfg.trials, cfg.threads, [&](std::size_t t) {
            TrialRecord& r = batch[t];
            r.trial = t;
            r.seed = trial_seed(cfg.master_seed, n, t);
            r.n = n;
            r.d = profile.d;
            r.p = p.value();
            r.prime_clamped = choice.clamped;
            r.e = part.e;
            r.s = part.s;
            r.partition_fallback = part.fallback;
            r.block_count = part.count();

            const IntegerMatrix a = sample_matrix(profile, r.seed);
            r.row = pick_row(cfg.row, n, r.seed);
            r.home_block = make_row_context(part, r.row).block;
            r.singular = is_singular_fp(reduce_mod(a, p));

            const KernelBasis kernel = kernel_fp(reduce_mod(zero_row(a, r.row), p));
            r.kernel_dim = kernel.dim();
            for (const auto& v : kernel.vectors) {
                VectorSurvey survey;
                survey.blocks = survey_blocks(v, part, cfg.mu, cfg.K, p);
                survey.home_rho = survey.blocks[r.home_block].rho;
                survey.conclusion_holds = survey.home_rho.to_double() <= level;
                r.vectors.push_back(std::move(survey));
            }
        });
        for (auto& r : batch) records.push_back(std::move(r));
    }
    return records;
}

std::vector<SurveySummary> summarize_survey(const std::vector<TrialRecord>& records) {
    std::vector<SurveySummary> rows;
    std::vector<std::vector<double>> homes;
    for (const auto& r : records) {
        auto it = std::find_if(rows.begin(), rows.end(), [&](const SurveySummary& s) { return s.n == r.n; });
        if (it == rows.end()) {
            rows.push_back({r.n, r.p, 0, r.kernel_dim, 0.0, 0.0});
            homes.emplace_back();
            it = rows.end() - 1;
        }
        auto& h = homes[static_cast<std::size_t>(it - rows.begin())];
        ++it->trials;
        it->min_kernel_dim = std::min(it->min_kernel_dim, r.kernel_dim);
        if (!r.vectors.empty()) {
            it->conclusion_fraction += r.vectors.front().conclusion_holds ? 1.0 : 0.0;
            h.push_back(r.vectors.front().home_rho.to_double());
        }
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto& h = homes[i];
        rows[i].conclusion_fraction /= static_cast<double>(rows[i].trials);
        if (h.empty()) continue;
        std::sort(h.begin(), h.end());
        const std::size_t m = h.size() / 2;
        rows[i].median_home_rho = h.size() % 2 ? h[m] : (h[m - 1] + h[m]) / 2;
    }
    return rows;
}

// ---- row span certificates ------------------------------------------

RowSpanCertificate singular_row_span_check(const IntegerMatrix& a, PrimeModulus p) {
    if (!a.square()) throw std::invalid_argument("singular_row_span_check: matrix is not square");
    const KernelBasis left = left_kernel_fp(reduce_mod(a, p));
    if (left.dim() == 0) throw std::invalid_argument("singular_row_span_check: matrix is nonsingular over F_p");
    const auto& u = left.vectors.front();
    RowSpanCertificate cert;
    cert.row = static_cast<std::size_t>(std::find_if(u.begin(), u.end(), [](u64 x) { return x != 0; }) - u.begin());
    const KernelBasis right = kernel_fp(reduce_mod(zero_row(a, cert.row), p));
    cert.v = right.vectors.front();
    return cert;
}

bool verify_row_span_certificate(const IntegerMatrix& a, PrimeModulus p, const RowSpanCertificate& cert) {
    const u64 pv = p.value();
    if (!a.square() || cert.row >= a.rows() || cert.v.size() != a.cols()) return false;
    if (std::all_of(cert.v.begin(), cert.v.end(), [](u64 x) { return x == 0; })) return false;
    const FpMatrix full = reduce_mod(a, p);
    const FpMatrix deleted = reduce_mod(zero_row(a, cert.row), p);
    const auto image = multiply(full, cert.v);
    // Every row annihilates v, the deleted row included.
    if (std::any_of(image.begin(), image.end(), [](u64 x) { return x != 0; })) return false;
    // Zeroing the row keeps the rank, so it lies in the span of the others.
    return rank_fp_dense(deleted) == rank_fp_dense(full) && std::all_of(cert.v.begin(), cert.v.end(), [pv](u64 x) {
               return x < pv;
           });
}

// ---- persistence ------------------------------------------------------------

json to_json(const SingularityRecord& r) {
    json j;
    j["trial"] = r.trial;
    j["seed"] = r.seed;
    j["n"] = r.n;
    if (r.p)
        j["p"] = *r.p;
    else
        j["p"] = "Z";
    j["singular"] = r.singular;
    return j;
}

json to_json(const TrialRecord& r) {
    json j;
    j["trial"] = r.trial;
    j["seed"] = r.seed;
    j["n"] = r.n;
    j["d"] = r.d;
    j["p"] = r.p;
    j["prime_clamped"] = r.prime_clamped;
    j["row"] = r.row;
    j["home_block"] = r.home_block;
    j["partition"] = {{"e", r.e}, {"s", r.s}, {"fallback", r.partition_fallback}, {"count", r.block_count}};
    j["singular"] = r.singular;
    j["kernel_dim"] = r.kernel_dim;
    json vectors = json::array();
    for (const auto& v : r.vectors) {
        json blocks = json::array();
        for (const auto& b : v.blocks)
            blocks.push_back({{"k", b.k},
                              {"support", b.support},
                              {"rho", b.rho.str()},
                              {"rho_mu", b.rho_mu.str()},
                              {"case", b.label.str()},
                              {"t", dyadic_bucket(b.rho_mu)}});
        vectors.push_back({{"blocks", std::move(blocks)}, {"home_rho", v.home_rho.str()}, {"conclusion", v.conclusion_holds}});
    }
    j["vectors"] = std::move(vectors);
    return j;
}

json to_json(const ExperimentConfig& cfg) {
    json j;
    j["profile"] = {{"kind", to_string(cfg.kind)},
                    {"d", cfg.d ? json(*cfg.d) : json("auto")},
                    {"offband", cfg.offband.str()}};
    j["campaign"] = {{"n_list", cfg.n_list},
                     {"alpha", cfg.alpha.str()},
                     {"trials", cfg.trials},
                     {"master_seed", cfg.master_seed},
                     {"threads", cfg.threads}};
    j["constants"] = {{"rho", cfg.rho.str()}, {"tau", cfg.tau.str()}, {"mu", cfg.mu.str()}, {"K", cfg.K}};
    j["prime"] = {{"policy", to_string(cfg.prime.kind)}, {"p", cfg.prime.p}, {"cap", cfg.prime.cap}};
    j["row"] = {{"policy", to_string(cfg.row.kind)}, {"index", cfg.row.index}};
    return j;
}

void write_jsonl(std::ostream& out, const std::vector<SingularityRecord>& records) {
    for (const auto& r : records) out << to_json(r).dump() << '\n';
}

void write_jsonl(std::ostream& out, const std::vector<TrialRecord>& records) {
    for (const auto& r : records) out << to_json(r).dump() << '\n';
}

void write_summary_csv(std::ostream& out, const std::vector<SingularityCell>& cells) {
    const auto old = out.precision(17);
    out << "n,p,trials,singular_count,P_hat,ci_lo,ci_hi,censored\n";
    for (const auto& c : cells) {
        out << c.n << ',';
        if (c.p)
            out << *c.p;
        else
            out << 'Z';
        out << ',' << c.trials << ',' << c.singular << ',' << c.p_hat << ',' << c.ci.lo << ','
            << (c.censored ? c.bound : c.ci.hi) << ',' << (c.censored ? 1 : 0) << '\n';
    }
    out.precision(old);
}

void write_survey_csv(std::ostream& out, const std::vector<SurveySummary>& rows) {
    const auto old = out.precision(17);
    out << "n,p,trials,min_kernel_dim,conclusion_fraction,median_home_rho\n";
    for (const auto& r : rows)
        out << r.n << ',' << r.p << ',' << r.trials << ',' << r.min_kernel_dim << ',' << r.conclusion_fraction << ','
            << r.median_home_rho << '\n';
    out.precision(old);
}

void write_fit_csv(std::ostream& out, const ScalingFit& fit) {
    const auto old = out.precision(17);
    out << "n,x,log_inv_value,censored,residual,consistent\n";
    for (std::size_t i = 0; i < fit.points.size(); ++i)
        out << fit.points[i].n << ',' << fit.x[i] << ',' << fit.y[i] << ',' << (fit.points[i].censored ? 1 : 0) << ','
            << fit.residuals[i] << ',' << (fit.consistent[i] ? 1 : 0) << '\n';
    out.precision(old);
}

}  // namespace bandsing
