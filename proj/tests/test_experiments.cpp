#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bandsing/experiments.hpp"
#include "bandsing/rankengine.hpp"
#include "bandsing/rng.hpp"
#include "oracles.hpp"

using namespace bandsing;

namespace {

BandProfile full(std::size_t n) { return BandProfile{n, n, EnsembleKind::general, EntryLaw::zero(), {}}; }

// Singular count over every +-1 matrix of size n, by Bareiss determinants.
std::uint64_t oracle_full_singular(std::size_t n) {
    const std::size_t cells = n * n;
    std::uint64_t singular = 0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << cells); ++mask) {
        IntegerMatrix a(n, n);
        for (std::size_t c = 0; c < cells; ++c) a.data()[c] = (mask >> c) & 1 ? 1 : -1;
        if (oracle::bareiss_det(a) == 0) ++singular;
    }
    return singular;
}

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.kind = EnsembleKind::general;
    cfg.d = 2;
    cfg.n_list = {2};
    cfg.prime.kind = PrimePolicy::Kind::integer;
    cfg.trials = 2000;
    cfg.master_seed = 7;
    return cfg;
}

}  // namespace

TEST_CASE("exact enumeration matches a Bareiss oracle") {
    auto two = enumerate_singularity_probability(full(2));
    CHECK(two.singular == 8);
    CHECK(two.total == 16);
    CHECK(two.fraction() == Fraction::of(1, 2));
    CHECK(two.singular == oracle_full_singular(2));

    auto three = enumerate_singularity_probability(full(3));
    CHECK(three.total == 512);
    CHECK(three.singular == oracle_full_singular(3));
    CHECK(three.singular == 320);

    auto four = enumerate_singularity_probability(full(4));
    CHECK(four.total == 65536);
    CHECK(four.singular == oracle_full_singular(4));
    CHECK(four.singular == 43264);

    CHECK(enumerate_singularity_probability(BandProfile{3, 1, EnsembleKind::modified, EntryLaw::zero(), {}}).singular == 0);
    CHECK_THROWS_AS(enumerate_singularity_probability(full(6)), std::invalid_argument);
    CHECK_THROWS(enumerate_singularity_probability(BandProfile{4, 1, EnsembleKind::general, EntryLaw::uniform_range(-2, 2), {}}));
}

TEST_CASE("Monte Carlo estimate of the 2x2 full ensemble") {
    auto cfg = small_config();
    std::vector<SingularityRecord> records;
    const auto cells = estimate_singularity_probability(cfg, &records);
    REQUIRE(cells.size() == 1);
    const auto& c = cells[0];
    CHECK(c.trials == 2000);
    CHECK_FALSE(c.p);
    CHECK(c.ci.lo <= 0.5);
    CHECK(c.ci.hi >= 0.5);
    CHECK(std::abs(c.p_hat - 0.5) <= 3 * std::sqrt(0.25 / 2000));
    CHECK(records.size() == 2000);
    for (std::size_t t = 0; t < records.size(); ++t) {
        CHECK(records[t].trial == t);
        CHECK(records[t].seed == trial_seed(cfg.master_seed, 2, t));
        const bool expected = oracle::bareiss_det(sample_matrix(cfg.profile_for(2), records[t].seed)) == 0;
        REQUIRE(records[t].singular == expected);
    }
}

TEST_CASE("estimates do not depend on the thread count") {
    auto cfg = small_config();
    cfg.n_list = {2, 3, 5};
    cfg.d.reset();
    cfg.prime.kind = PrimePolicy::Kind::choose;
    cfg.trials = 300;
    std::vector<SingularityRecord> one, many;
    const auto a = estimate_singularity_probability(cfg, &one);
    cfg.threads = 4;
    const auto b = estimate_singularity_probability(cfg, &many);
    std::ostringstream sa, sb;
    write_jsonl(sa, one);
    write_jsonl(sb, many);
    CHECK(sa.str() == sb.str());
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].singular == b[i].singular);
}

TEST_CASE("censored cells report the rule of three") {
    ExperimentConfig cfg;
    cfg.kind = EnsembleKind::modified;
    cfg.d = 1;
    cfg.n_list = {4};
    cfg.prime.kind = PrimePolicy::Kind::integer;
    cfg.trials = 50;
    const auto cells = estimate_singularity_probability(cfg);
    REQUIRE(cells.size() == 1);
    CHECK(cells[0].censored);
    CHECK(cells[0].singular == 0);
    CHECK(cells[0].bound == doctest::Approx(3.0 / 50));
    // sound for every enumerable case with no singular draw
    const auto exact = enumerate_singularity_probability(cfg.profile_for(4));
    CHECK(exact.value() <= cells[0].bound);
}

TEST_CASE("block classification") {
    CHECK(classify_block(1, Dyadic(1, 1), 8, 101).str() == "SMALL_SUPPORT");
    CHECK(classify_block(0, Dyadic::one(), 8, 101).str() == "SMALL_SUPPORT_ZERO");
    CHECK(classify_block(9, Dyadic(1, 7), 8, 101).str() == "STRONG_ANTICONC");
    CHECK(classify_block(9, Dyadic(5, 5), 8, 101).str() == "DYADIC(3)");
    CHECK(classify_block(9, Dyadic::one(), 8, 101).str() == "DYADIC(0)");
    CHECK(dyadic_bucket(Dyadic(5, 5)) == 3);
    CHECK(dyadic_bucket(Dyadic(1, 3)) == 3);
    CHECK(dyadic_bucket(Dyadic(3, 4)) == 3);

    const auto part = IntervalPartition::with_length(16, 8);
    std::vector<u64> v(16, 0);
    v[0] = 1;
    for (std::size_t i = 8; i < 16; ++i) v[i] = i;
    const auto labels = classify_blocks(v, part, StepLaw(1, 2), 8, PrimeModulus(101));
    REQUIRE(labels.size() == 2);
    CHECK(labels[0].kind == CaseLabel::Kind::small_support);
    CHECK_FALSE(labels[0].degenerate);
    CHECK(labels[1].kind == CaseLabel::Kind::small_support);

    SplitMix64 rng(31);
    for (int t = 0; t < 300; ++t) {
        const u64 p = std::vector<u64>{5, 101, 1009}[rng.below(3)];
        const std::size_t len = 1 + rng.below(16);
        std::vector<u64> w(len);
        for (auto& x : w) x = rng.below(4) ? rng.below(p) : 0;
        const auto law = default_law_grid()[rng.below(5)];
        const std::size_t K = rng.below(10);
        const auto rho = rho_mu(w, law, PrimeModulus(p));
        const auto label = classify_block(support_size(w, p), rho, K, p);
        const bool small = support_size(w, p) <= K;
        const bool strong = !small && rho.compare_to(2, p) <= 0;
        CHECK((label.kind == CaseLabel::Kind::small_support) == small);
        CHECK((label.kind == CaseLabel::Kind::strong_anticoncentration) == strong);
        if (label.kind == CaseLabel::Kind::dyadic) {
            CHECK(rho.compare_to(1, boost::multiprecision::cpp_int(1) << label.t) >= 0);
            CHECK(rho.compare_to(2, boost::multiprecision::cpp_int(1) << label.t) < 0);
        }
    }
}

TEST_CASE("scaling fit") {
    const double alpha = 0.75;
    std::vector<ScalingPoint> pts;
    for (std::size_t n : {4, 9, 16, 25, 36}) pts.push_back({n, std::exp(-0.7 * std::pow(double(n), alpha / 2)), false});
    const auto fit = fit_scaling(pts, alpha);
    CHECK(fit.C == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(fit.r_squared == doctest::Approx(1.0));
    for (double r : fit.residuals) CHECK(std::abs(r) < 1e-12);

    const std::vector<ScalingPoint> two{{10, 0.3, false}, {20, 0.05, false}};
    const auto t = fit_scaling(two, 1.0);
    const double x1 = std::sqrt(10.0), x2 = std::sqrt(20.0);
    const double y1 = std::log(1 / 0.3), y2 = std::log(1 / 0.05);
    CHECK(t.C == doctest::Approx((x1 * y1 + x2 * y2) / (x1 * x1 + x2 * x2)));

    auto censored = pts;
    censored.push_back({100, 1e-9, true});
    censored.push_back({200, 0.5, true});
    const auto c = fit_scaling(censored, alpha);
    CHECK(c.C == doctest::Approx(0.7));
    CHECK_FALSE(c.consistent[5]);
    CHECK(c.consistent[6]);

    CHECK_THROWS(fit_scaling({{4, 0.5, false}, {9, 0.1, true}}, alpha));
    CHECK_THROWS(fit_scaling({{4, 0.5, false}, {9, 0.0, false}}, alpha));
    CHECK_THROWS(fit_scaling({{4, 0.5, false}, {9, 1.5, false}}, alpha));

    // exact small-n values
    std::vector<ScalingPoint> real;
    for (std::size_t n = 2; n <= 5; ++n) {
        const auto prof = full(n);
        if (n * n > kMaxEnumeratedEntries) break;
        real.push_back({n, enumerate_singularity_probability(prof).value(), false});
    }
    CHECK(fit_scaling(real, alpha).C > 0);
}

TEST_CASE("row span certificates") {
    IntegerMatrix ones(2, 2);
    for (auto& x : ones.data()) x = 1;
    const auto cert = singular_row_span_check(ones, PrimeModulus(5));
    CHECK(cert.row == 0);
    CHECK(cert.v == std::vector<u64>{1, 4});
    CHECK(verify_row_span_certificate(ones, PrimeModulus(5), cert));
    CHECK_THROWS_AS(singular_row_span_check(identity_matrix(3), PrimeModulus(5)), std::invalid_argument);

    auto bad = cert;
    bad.v = {1, 1};
    CHECK_FALSE(verify_row_span_certificate(ones, PrimeModulus(5), bad));

    const PrimeModulus p(3);
    int singular = 0;
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
        const auto a = sample_matrix(BandProfile{6, 2, EnsembleKind::periodic, EntryLaw::zero(), {}}, seed);
        if (!is_singular_fp(reduce_mod(a, p))) continue;
        ++singular;
        const auto c = singular_row_span_check(a, p);
        // independent recomputation of <A_row, v>
        u64 dot = 0;
        for (std::size_t j = 0; j < 6; ++j) dot = (dot + residue(a(c.row, j), p) * c.v[j]) % 3;
        CHECK(dot == 0);
        CHECK(verify_row_span_certificate(a, p, c));
    }
    CHECK(singular > 20);
}

TEST_CASE("kernel structure survey") {
    ExperimentConfig cfg;
    cfg.kind = EnsembleKind::periodic;
    cfg.d = 8;
    cfg.n_list = {24};
    cfg.prime.kind = PrimePolicy::Kind::choose;
    cfg.trials = 40;
    const auto records = kernel_structure_survey(cfg);
    REQUIRE(records.size() == 40);
    const auto part = partition_intervals(24, 8);
    bool saw_zero_block = false;
    for (const auto& r : records) {
        CHECK(r.kernel_dim >= 1);
        CHECK(r.vectors.size() == r.kernel_dim);
        CHECK(r.block_count == part.count());
        CHECK(r.row == 12);
        CHECK(r.home_block == part.block_of(12));
        for (const auto& vs : r.vectors) {
            REQUIRE(vs.blocks.size() == part.count());
            CHECK(vs.home_rho == vs.blocks[r.home_block].rho);
            for (const auto& b : vs.blocks) {
                if (b.support == 0) {
                    saw_zero_block = true;
                    CHECK(b.rho == Dyadic::one());
                    CHECK(b.label.str() == "SMALL_SUPPORT_ZERO");
                }
            }
        }
    }
    MESSAGE("sampled kernel vectors with a zero block: " << saw_zero_block);
    std::vector<u64> v(24, 0);
    for (std::size_t i = part.intervals[1].begin; i < 24; ++i) v[i] = 1 + i;
    const auto blocks = survey_blocks(v, part, StepLaw(1, 2), 8, PrimeModulus(101));
    REQUIRE(blocks.size() == part.count());
    CHECK(blocks[0].support == 0);
    CHECK(blocks[0].rho == Dyadic::one());
    CHECK(blocks[0].rho_mu == Dyadic::one());
    CHECK(blocks[0].label.str() == "SMALL_SUPPORT_ZERO");
    CHECK(blocks[1].support > 0);

    const auto summary = summarize_survey(records);
    REQUIRE(summary.size() == 1);
    CHECK(summary[0].trials == 40);
    CHECK(summary[0].min_kernel_dim >= 1);

    std::ostringstream a;
    write_jsonl(a, records);
    cfg.threads = 3;
    std::ostringstream b;
    write_jsonl(b, kernel_structure_survey(cfg));
    CHECK(a.str() == b.str());

    cfg.prime.kind = PrimePolicy::Kind::integer;
    CHECK_THROWS_AS(kernel_structure_survey(cfg), std::invalid_argument);
}

TEST_CASE("parallel_for rethrows") {
    std::vector<int> hits(100, 0);
    parallel_for(100, 4, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
    CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                        if (i == 7) throw std::runtime_error("boom");
                    }),
                    std::runtime_error);
}

TEST_CASE("csv writers") {
    SingularityCell c;
    c.n = 4;
    c.p = 101;
    c.trials = 10;
    c.censored = true;
    c.bound = 0.3;
    std::ostringstream out;
    write_summary_csv(out, {c});
    const auto text = out.str();
    CHECK(text.rfind("n,p,trials,singular_count,P_hat,ci_lo,ci_hi,censored\n", 0) == 0);
    CHECK(text.find("4,101,10,0,") != std::string::npos);
}
