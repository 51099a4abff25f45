// Acceptance suite: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "bandsing/ensembles.hpp"
#include "bandsing/experiments.hpp"
#include "bandsing/lotools.hpp"
#include "bandsing/rankengine.hpp"
#include "bandsing/rng.hpp"
#include "oracles.hpp"

using namespace bandsing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

BandProfile full(std::size_t n) { return BandProfile{n, n, EnsembleKind::general, EntryLaw::zero(), {}}; }

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::uint64_t bareiss_singular_count(std::size_t n) {
    const std::size_t cells = n * n;
    std::uint64_t singular = 0;
    IntegerMatrix a(n, n);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << cells); ++mask) {
        for (std::size_t c = 0; c < cells; ++c) a.data()[c] = (mask >> c) & 1 ? 1 : -1;
        if (oracle::bareiss_det(a) == 0) ++singular;
    }
    return singular;
}

ExperimentConfig full_campaign(std::size_t n, std::uint64_t trials, std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.kind = EnsembleKind::general;
    cfg.d = n;
    cfg.n_list = {n};
    cfg.prime.kind = PrimePolicy::Kind::integer;
    cfg.trials = trials;
    cfg.master_seed = seed;
    return cfg;
}

// ---- 1 ----------------------------------------------------------------------

Outcome criterion1() {
    const auto t0 = Clock::now();
    const auto exact = enumerate_singularity_probability(full(2));
    const auto cells = estimate_singularity_probability(full_campaign(2, 100000, 1));
    const double secs = seconds_since(t0);
    const double p_hat = cells.at(0).p_hat;
    const bool ok = exact.fraction() == Fraction::of(1, 2) && p_hat >= 0.49 && p_hat <= 0.51 && secs < 5.0;
    return {ok, "exact " + exact.fraction().str() + ", P_hat " + fmt("%.5f", p_hat) + " (need [0.49, 0.51]), " +
                    fmt("%.2f s", secs) + " (need < 5 s)"};
}

// ---- 2 ----------------------------------------------------------------------

Outcome criterion2() {
    const auto t0 = Clock::now();
    bool ok = true;
    std::string detail;
    for (std::size_t n : {3, 4}) {
        const auto exact = enumerate_singularity_probability(full(n));
        const std::uint64_t oracle_count = bareiss_singular_count(n);
        const auto cell = estimate_singularity_probability(full_campaign(n, 1000000, 2)).at(0);
        const double P = exact.value();
        // P inside the Wilson interval at three standard errors
        const auto w = wilson_interval(cell.singular, cell.trials, 3.0);
        const bool agree = exact.singular == oracle_count && P >= w.lo && P <= w.hi;
        ok = ok && agree;
        detail += "n=" + std::to_string(n) + ": " + exact.fraction().str() + " (oracle " + std::to_string(oracle_count) +
                  "/" + std::to_string(exact.total) + "), P_hat " + fmt("%.5f", cell.p_hat) + " in 3-SE Wilson [" +
                  fmt("%.5f", w.lo) + ", " + fmt("%.5f", w.hi) + "]; ";
    }
    const double secs = seconds_since(t0);
    ok = ok && secs < 120.0;
    return {ok, detail + fmt("%.1f s", secs) + " (need < 120 s)"};
}

// ---- 3 ----------------------------------------------------------------------

Outcome criterion3() {
    const std::vector<StepLaw> laws{StepLaw(1, 0), StepLaw(1, 1), StepLaw(1, 2)};
    std::uint64_t vectors = 0, multisets = 0, mismatches = 0;
    for (u64 p : {3ULL, 5ULL, 17ULL, 101ULL}) {
        const PrimeModulus pm(p);
        for (const auto& law : laws) {
            for (std::size_t d = 0; d <= 8; ++d) {
                // Each multiset is checked against the enumeration oracle; every
                // ordering of it must then give the identical distribution.
                std::map<std::vector<u64>, MassFunction> reference;
                std::vector<u64> v(d, 0);
                for (;;) {
                    std::vector<u64> key = v;
                    std::sort(key.begin(), key.end());
                    auto it = reference.find(key);
                    if (it == reference.end()) {
                        auto f = walk_distribution(key, law, pm);
                        const auto expected = oracle::enumerate_walk(key, law, p);
                        for (u64 x = 0; x < p; ++x) {
                            const auto e = expected.find(x);
                            if (f.exact(x) != (e == expected.end() ? Dyadic() : e->second)) {
                                ++mismatches;
                                break;
                            }
                        }
                        ++multisets;
                        it = reference.emplace(key, std::move(f)).first;
                    }
                    if (!(walk_distribution(v, law, pm) == it->second)) ++mismatches;
                    ++vectors;
                    std::size_t k = 0;
                    while (k < d && v[k] == 4) v[k++] = 0;
                    if (k == d) break;
                    ++v[k];
                }
            }
        }
    }
    const auto spot = rho_mu(std::vector<u64>{1, 2, 3}, StepLaw(1, 1), PrimeModulus(101));
    const bool ok = mismatches == 0 && spot == Dyadic(5, 5);
    return {ok, std::to_string(vectors) + " vectors (" + std::to_string(multisets) + " oracle enumerations), " +
                    std::to_string(mismatches) + " mismatches; spot rho_1/2(1,2,3) mod 101 = " + spot.str()};
}

// ---- vector generators for 4 and 5 ------------------------------------------

const std::vector<u64>& small_primes() {
    static const std::vector<u64> primes = [] {
        std::vector<u64> out;
        for (u64 q = 3; q <= 1009; ++q)
            if (is_prime(q)) out.push_back(q);
        return out;
    }();
    return primes;
}

// v = c * a with a drawn mostly from {+1, -1}, sometimes 0 or +-2.
std::vector<u64> structured(SplitMix64& rng, std::size_t d, u64 p) {
    const u64 c = 1 + rng.below(p - 1);
    const unsigned flavour = static_cast<unsigned>(rng.below(4));
    std::vector<u64> v(d);
    for (auto& x : v) {
        std::int64_t a = rng.below(2) ? 1 : -1;
        const u64 r = rng.below(16);
        if (flavour >= 1 && r == 0) a = 0;
        if (flavour >= 2 && r == 1) a *= 2;
        if (flavour == 3 && r == 2) a *= 3;
        const u64 m = static_cast<u64>((a % static_cast<std::int64_t>(p) + static_cast<std::int64_t>(p)) %
                                       static_cast<std::int64_t>(p));
        x = mul_mod(m, c, p);
    }
    return v;
}

std::string show(const std::vector<u64>& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s + ")";
}

// ---- 4 ----------------------------------------------------------------------

Outcome criterion4() {
    const StepLaw law(1, 2);
    SplitMix64 rng(hash_key(4, 4));
    std::uint64_t tested = 0, passed = 0, attempts = 0, exhaustive = 0;
    std::string failures;
    while (tested < 1000 && attempts < 2000000) {
        ++attempts;
        const u64 p = small_primes()[rng.below(small_primes().size())];
        const std::size_t d = 1 + rng.below(20);
        const auto v = structured(rng, d, p);
        const PrimeModulus pm(p);
        const auto rho = rho_mu(v, law, pm);
        if (rho.compare_to(2, p) < 0) continue;
        if (static_cast<double>(support_size(v, p)) < lo_budget(rho, law)) continue;
        ++tested;
        const auto s = find_lo_witness(v, law, pm);
        if (s.outcome == SearchOutcome::exhaustive) ++exhaustive;
        if (s.witness && verify_witness(v, law, pm, *s.witness) &&
            rho.compare_to(256, static_cast<long long>(s.witness->N.size())) <= 0) {
            ++passed;
        } else if (failures.size() < 2000) {
            failures += " p=" + std::to_string(p) + " v=" + show(v) + " outcome=" + to_string(s.outcome) + ";";
        }
    }
    const bool ok = tested >= 1000 && passed == tested;
    std::string detail = std::to_string(passed) + "/" + std::to_string(tested) + " verified (" +
                         std::to_string(exhaustive) + " via exhaustive search, " + std::to_string(attempts) +
                         " draws)";
    if (!failures.empty()) detail += "; failures:" + failures;
    return {ok, detail};
}

// ---- 5 ----------------------------------------------------------------------

Outcome criterion5() {
    const StepLaw mu(1, 2);
    const std::vector<StepLaw> grid{StepLaw(1, 1), StepLaw(1, 2), StepLaw(1, 3), StepLaw(1, 4)};
    const std::size_t K = 16;
    SplitMix64 rng(hash_key(5, 5));
    std::uint64_t tested = 0, passed = 0, attempts = 0;
    std::map<std::string, int> chosen;
    std::string failures;
    while (tested < 1000 && attempts < 2000000) {
        ++attempts;
        const u64 p = small_primes()[rng.below(small_primes().size())];
        const std::size_t d = K + rng.below(64 - K + 1);
        const auto v = structured(rng, d, p);
        const PrimeModulus pm(p);
        if (support_size(v, p) < K) continue;
        const auto rho = rho_mu(v, mu, pm);
        if (rho.compare_to(static_cast<long long>(2 * d), static_cast<long long>(p)) < 0) continue;
        ++tested;
        const auto r = check_fourier_lemma(v, Fraction::of(1, 2), mu, grid, K, pm);
        if (r.nu) {
            ++passed;
            ++chosen[r.nu->str()];
        } else {
            std::cerr << "criterion 5 failure: p=" << p << " v=" << show(v) << " best ratio " << r.ratio << '\n';
            if (failures.size() < 600) failures += " p=" + std::to_string(p) + " ratio=" + fmt("%.4f", r.ratio) + ";";
        }
    }
    const bool ok = tested >= 1000 && passed * 100 >= tested * 99;
    std::string detail = std::to_string(passed) + "/" + std::to_string(tested) + " found nu (need >= 99%); chosen:";
    for (const auto& [nu, count] : chosen) detail += " " + nu + "x" + std::to_string(count);
    if (!failures.empty()) detail += "; failures:" + failures;
    return {ok, detail};
}

// ---- 6 ----------------------------------------------------------------------

Outcome criterion6() {
    const auto t0 = Clock::now();
    ExperimentConfig cfg;
    cfg.kind = EnsembleKind::periodic;
    cfg.alpha = Fraction::of(3, 4);
    cfg.n_list = {96, 144, 192, 240};
    cfg.prime.kind = PrimePolicy::Kind::choose;
    cfg.prime.cap = u64{1} << 20;
    cfg.trials = 200;
    cfg.master_seed = 6;
    cfg.threads = 1;
    const auto rows = summarize_survey(kernel_structure_survey(cfg));
    const double secs = seconds_since(t0);

    bool decreasing = rows.size() == 4;
    std::string detail = "medians:";
    std::vector<ScalingPoint> points;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        detail += " n=" + std::to_string(rows[i].n) + " (p=" + std::to_string(rows[i].p) + ") " +
                  fmt("%.5g", rows[i].median_home_rho);
        if (i && !(rows[i].median_home_rho < rows[i - 1].median_home_rho)) decreasing = false;
        points.push_back({rows[i].n, rows[i].median_home_rho, false});
    }
    double tau_hat = 0, r2 = 0;
    try {
        const auto fit = fit_scaling(points, cfg.alpha.value());
        tau_hat = fit.C;
        r2 = fit.r_squared;
    } catch (const std::exception& e) {
        detail += "; fit failed: " + std::string(e.what());
    }
    const bool ok = decreasing && tau_hat > 0 && r2 >= 0.8 && secs < 1800.0;
    detail += "; tau_hat " + fmt("%.4f", tau_hat) + ", R^2 " + fmt("%.4f", r2) + " (need >= 0.8), " +
              fmt("%.1f s", secs) + " (need < 1800 s)";
    return {ok, detail};
}

// ---- 7 ----------------------------------------------------------------------

Outcome criterion7() {
    SplitMix64 rng(hash_key(7, 7));
    std::uint64_t band_disagree = 0, z_disagree = 0, z_singular = 0;
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = 2 + rng.below(255);
        const std::size_t b = rng.below(std::min<std::size_t>(n, 33));
        const bool corners = t % 2;
        const BandMeta meta{b, corners};
        const u64 p = std::vector<u64>{3, 5, 101, 1000003, (u64{1} << 61) - 1}[rng.below(5)];
        FpMatrix m(n, n, PrimeModulus(p));
        const u64 density = 1 + rng.below(4);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (in_band_support(meta, n, i, j) && rng.below(density + 1) != 0) m(i, j) = rng.below(p);
        if (rank_fp_banded(m, meta) != rank_fp_dense(m)) ++band_disagree;
    }
    for (int t = 0; t < 10000; ++t) {
        const std::size_t n = 1 + rng.below(8);
        IntegerMatrix a(n, n);
        const bool wide = t % 4 == 0;
        for (auto& x : a.data())
            x = wide ? static_cast<std::int64_t>(rng.below(2001)) - 1000 : static_cast<std::int64_t>(rng.below(3)) - 1;
        if (t % 3 == 0 && n >= 2) {
            const std::size_t r = rng.below(n), s = (r + 1 + rng.below(n - 1)) % n;
            const std::int64_t k = static_cast<std::int64_t>(rng.below(5)) - 2;
            for (std::size_t j = 0; j < n; ++j) a(r, j) = k * a(s, j);
        }
        const bool oracle_singular = oracle::bareiss_det(a) == 0;
        z_singular += oracle_singular;
        if (is_singular_Z(a) != oracle_singular) ++z_disagree;
    }
    return {band_disagree == 0 && z_disagree == 0,
            "banded vs dense: " + std::to_string(band_disagree) + "/1000 disagreements; is_singular_Z vs Bareiss: " +
                std::to_string(z_disagree) + "/10000 disagreements (" + std::to_string(z_singular) + " singular)"};
}

// ---- 8 ----------------------------------------------------------------------

Outcome criterion8() {
    SplitMix64 rng(hash_key(8, 8));
    int covered = 0;
    for (int t = 0; t < 500; ++t) {
        const u64 p = small_primes()[rng.below(small_primes().size())];
        const std::size_t d = 1 + rng.below(12);
        std::vector<u64> v(d);
        const bool structured_case = rng.below(2);
        for (auto& x : v) x = structured_case ? rng.below(3) : rng.below(p);
        const StepLaw law = default_law_grid()[rng.below(5)];
        const auto exact = rho_mu(v, law, PrimeModulus(p)).to_double();
        const auto est = collision_estimate_rho(v, law, PrimeModulus(p), 20000, hash_key(8, t));
        if (est.lower <= exact && exact <= est.upper) ++covered;
    }
    return {covered >= 490, std::to_string(covered) + "/500 intervals contain the exact rho (need >= 490)"};
}

// ---- 9 ----------------------------------------------------------------------

Outcome criterion9() {
    auto singprob_jsonl = [](ExperimentConfig cfg, unsigned threads) {
        cfg.threads = threads;
        std::vector<SingularityRecord> records;
        estimate_singularity_probability(cfg, &records);
        std::ostringstream out;
        write_jsonl(out, records);
        return out.str();
    };
    auto survey_jsonl = [](ExperimentConfig cfg, unsigned threads) {
        cfg.threads = threads;
        std::ostringstream out;
        write_jsonl(out, kernel_structure_survey(cfg));
        return out.str();
    };
    std::vector<std::pair<std::string, std::function<std::string(unsigned)>>> campaigns;

    ExperimentConfig z;
    z.kind = EnsembleKind::general;
    z.n_list = {4, 9, 16};
    z.offband = EntryLaw::rademacher();
    z.d = 3;
    z.prime.kind = PrimePolicy::Kind::integer;
    z.trials = 400;
    z.master_seed = 91;
    campaigns.emplace_back("singprob/Z", [=](unsigned th) { return singprob_jsonl(z, th); });

    ExperimentConfig fp;
    fp.kind = EnsembleKind::modified;
    fp.n_list = {16, 32, 48};
    fp.prime.kind = PrimePolicy::Kind::choose;
    fp.trials = 400;
    fp.master_seed = 92;
    campaigns.emplace_back("singprob/F_p", [=](unsigned th) { return singprob_jsonl(fp, th); });

    ExperimentConfig ks;
    ks.kind = EnsembleKind::periodic;
    ks.n_list = {24, 48};
    ks.prime.kind = PrimePolicy::Kind::choose;
    ks.row.kind = RowPolicy::Kind::uniform;
    ks.trials = 60;
    ks.master_seed = 93;
    campaigns.emplace_back("kernel-survey", [=](unsigned th) { return survey_jsonl(ks, th); });

    ExperimentConfig kb;
    kb.kind = EnsembleKind::block;
    kb.d = 6;
    kb.n_list = {36};
    kb.prime.kind = PrimePolicy::Kind::fixed;
    kb.prime.p = 101;
    kb.trials = 60;
    kb.master_seed = 94;
    campaigns.emplace_back("kernel-survey/block", [=](unsigned th) { return survey_jsonl(kb, th); });

    bool ok = true;
    std::string detail;
    for (const auto& [name, run] : campaigns) {
        const auto a = run(1), b = run(1), c = run(8);
        const bool same = !a.empty() && a == b && a == c;
        ok = ok && same;
        detail += name + (same ? " identical" : " DIFFERS") + " (" + std::to_string(a.size()) + " bytes); ";
    }
    return {ok, detail};
}

// ---- 10 ---------------------------------------------------------------------

Outcome criterion10() {
    const PrimeModulus word((u64{1} << 61) - 1);
    const auto a = sample_matrix(BandProfile{4096, 64, EnsembleKind::general, EntryLaw::zero(), {}}, 10);
    const auto f = reduce_mod(a, word);
    auto t0 = Clock::now();
    const std::size_t r = rank_fp(f);
    const double rank_secs = seconds_since(t0);

    const PrimeModulus p(next_prime(u64{1} << 20));
    SplitMix64 rng(hash_key(10, 10));
    std::vector<u64> v(128);
    for (auto& x : v) x = rng.below(p.value());
    t0 = Clock::now();
    const auto dist = walk_distribution(v, StepLaw(1, 2), p);
    const double walk_secs = seconds_since(t0);
    const bool ok = rank_secs < 5.0 && walk_secs < 10.0 && dist.total() == Dyadic::one();
    return {ok, "rank " + std::to_string(r) + " of n=4096 d=64 band in " + fmt("%.3f s", rank_secs) +
                    " (need < 5 s); walk p=" + std::to_string(p.value()) + " d=128 in " + fmt("%.3f s", walk_secs) +
                    " (need < 10 s)"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                         criterion6, criterion7, criterion8, criterion9, criterion10};
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) selected.push_back(std::stoi(argv[i]));
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i + 1);
        if (!selected.empty() && std::find(selected.begin(), selected.end(), id) == selected.end()) continue;
        Outcome o;
        try {
            o = criteria[i]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << " - " << o.detail << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
