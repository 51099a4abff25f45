#include "bandsing/ensembles.hpp"

#include <cmath>
#include <stdexcept>

#include "bandsing/rng.hpp"

namespace bandsing {

std::string to_string(EnsembleKind kind) {
    switch (kind) {
        case EnsembleKind::general: return "general";
        case EnsembleKind::block: return "block";
        case EnsembleKind::periodic: return "periodic";
        case EnsembleKind::modified: return "modified";
    }
    return "general";
}

EnsembleKind parse_ensemble_kind(const std::string& text) {
    if (text == "general") return EnsembleKind::general;
    if (text == "block") return EnsembleKind::block;
    if (text == "periodic") return EnsembleKind::periodic;
    if (text == "modified") return EnsembleKind::modified;
    throw std::invalid_argument("unknown ensemble kind '" + text + "'");
}

std::string EntryLaw::str() const {
    switch (kind) {
        case Kind::zero: return "zero";
        case Kind::rademacher: return "rademacher";
        case Kind::uniform_range: return "uniform(" + std::to_string(lo) + "," + std::to_string(hi) + ")";
        case Kind::constant: return "constant(" + std::to_string(lo) + ")";
    }
    return "zero";
}

EntryLaw EntryLaw::parse(const std::string& text) {
    if (text == "zero") return zero();
    if (text == "rademacher") return rademacher();
    auto args = [&](const std::string& head) -> std::string {
        if (text.rfind(head + "(", 0) != 0 || text.back() != ')')
            throw std::invalid_argument("bad entry law '" + text + "'");
        return text.substr(head.size() + 1, text.size() - head.size() - 2);
    };
    try {
        if (text.rfind("uniform", 0) == 0) {
            std::string inner = args("uniform");
            auto comma = inner.find(',');
            if (comma == std::string::npos) throw std::invalid_argument("bad entry law '" + text + "'");
            return uniform_range(std::stoll(inner.substr(0, comma)), std::stoll(inner.substr(comma + 1)));
        }
        if (text.rfind("constant", 0) == 0) return constant(std::stoll(args("constant")));
    } catch (const std::logic_error&) {
        throw std::invalid_argument("bad entry law '" + text + "'");
    }
    throw std::invalid_argument("unknown entry law '" + text + "'");
}

void BandProfile::validate() const {
    if (n < 1) throw std::invalid_argument("profile: n must be positive");
    if (d < 1 || d > n)
        throw std::invalid_argument("profile: need 1 <= d <= n, got d=" + std::to_string(d) + " n=" + std::to_string(n));
    if (kind == EnsembleKind::block && n % d != 0)
        throw std::invalid_argument("profile: block kind needs d | n, but " + std::to_string(d) + " does not divide " +
                                    std::to_string(n));
    if (offband.kind == EntryLaw::Kind::uniform_range && offband.lo > offband.hi)
        throw std::invalid_argument("profile: empty uniform range");
}

namespace {

std::size_t gap(std::size_t i, std::size_t j) { return i > j ? i - j : j - i; }

bool block_support(std::size_t n, std::size_t d, std::size_t i, std::size_t j) {
    const std::size_t m = n / d;
    const std::size_t diff = (j / d + m - i / d) % m;
    return diff == 0 || diff == 1 || diff == m - 1;
}

std::int64_t rademacher(SplitMix64& rng) { return (rng() >> 63) ? 1 : -1; }

std::int64_t draw_offband(const EntryLaw& law, SplitMix64& rng) {
    switch (law.kind) {
        case EntryLaw::Kind::zero: return 0;
        case EntryLaw::Kind::rademacher: return rademacher(rng);
        case EntryLaw::Kind::constant: return law.lo;
        case EntryLaw::Kind::uniform_range: {
            const auto width = static_cast<std::uint64_t>(law.hi - law.lo) + 1;
            if (width == 0) return static_cast<std::int64_t>(rng());  // the whole 64-bit range
            return law.lo + static_cast<std::int64_t>(rng.below(width));
        }
    }
    return 0;
}

std::optional<BandMeta> sampled_meta(const BandProfile& p) {
    switch (p.kind) {
        case EnsembleKind::general:
            if (p.offband.kind == EntryLaw::Kind::zero ||
                (p.offband.kind == EntryLaw::Kind::constant && p.offband.lo == 0))
                return BandMeta{p.d, false};
            return p.d + 1 >= p.n ? std::optional<BandMeta>(BandMeta{p.d, false}) : std::nullopt;
        case EnsembleKind::periodic: return BandMeta{p.d, true};
        case EnsembleKind::modified: return BandMeta{p.d - 1, false};
        case EnsembleKind::block: return BandMeta{2 * p.d - 1, true};
    }
    return std::nullopt;
}

}  // namespace

bool in_random_support(const BandProfile& profile, std::size_t i, std::size_t j) {
    const std::size_t n = profile.n, d = profile.d;
    switch (profile.kind) {
        case EnsembleKind::general: return gap(i, j) <= d;
        case EnsembleKind::periodic: return gap(i, j) <= d || gap(i, j) >= n - d;
        case EnsembleKind::modified: return gap(i, j) < d;
        case EnsembleKind::block: return block_support(n, d, i, j);
    }
    return false;
}

IntegerMatrix sample_matrix(const BandProfile& profile, std::uint64_t seed) {
    profile.validate();
    const std::size_t n = profile.n;
    IntegerMatrix a(n, n);
    const bool offband_random = profile.kind == EnsembleKind::general && profile.offband.kind != EntryLaw::Kind::zero;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const bool band = in_random_support(profile, i, j);
            if (!band && !offband_random) continue;
            SplitMix64 rng(hash_key(seed, i, j));
            a(i, j) = band ? rademacher(rng) : draw_offband(profile.offband, rng);
        }
    }
    a.set_band_meta(sampled_meta(profile));
    return a;
}

const std::vector<double>& partition_grid() {
    static const std::vector<double> grid{2.999, 2.99, 2.9, 2.8, 2.7, 2.6, 2.5, 2.4, 2.3, 2.2, 2.1, 2.01, 2.001};
    return grid;
}

std::size_t IntervalPartition::block_of(std::size_t i) const {
    if (i >= n) throw std::out_of_range("index outside partition");
    std::size_t k = std::min(i / e, intervals.size() - 1);
    while (!intervals[k].contains(i)) --k;  // merged tail is longer than e
    return k;
}

IntervalPartition IntervalPartition::with_length(std::size_t n, std::size_t e) {
    if (e < 1 || e > n) throw std::invalid_argument("interval length must lie in [1, n]");
    IntervalPartition part;
    part.n = n;
    part.e = e;
    for (std::size_t b = 0; b + e <= n; b += e) part.intervals.push_back({b, b + e});
    const std::size_t tail = n - (n / e) * e;
    if (tail == 0) {
        // an empty final interval is dropped; nothing to merge
    } else if (2 * tail >= e) {
        part.intervals.push_back({n - tail, n});
    } else {
        part.intervals.back().end = n;
        part.fallback = true;
    }
    return part;
}

IntervalPartition partition_intervals(std::size_t n, std::size_t d) {
    if (d < 3 || d > n)
        throw std::invalid_argument("partition_intervals: need 3 <= d <= n (floor(d/s) vanishes for d <= 2)");
    for (double s : partition_grid()) {
        const auto e = static_cast<std::size_t>(std::floor(static_cast<double>(d) / s));
        if (e < 1) continue;
        const std::size_t tail = n - (n / e) * e;
        if (2 * tail >= e && tail > 0) {
            IntervalPartition part = IntervalPartition::with_length(n, e);
            part.s = s;
            return part;
        }
    }
    constexpr double fallback_s = 2.5;
    const auto e = static_cast<std::size_t>(std::floor(static_cast<double>(d) / fallback_s));
    IntervalPartition part = IntervalPartition::with_length(n, e);
    part.s = fallback_s;
    part.fallback = true;
    return part;
}

RowContext make_row_context(const IntervalPartition& part, std::size_t row) {
    return RowContext{row, part.block_of(row)};
}

IntegerMatrix zero_row(const IntegerMatrix& a, std::size_t row) {
    if (row >= a.rows()) throw std::out_of_range("zero_row: row index out of range");
    IntegerMatrix out = a;
    for (auto& x : out.row(row)) x = 0;
    return out;
}

IntegerMatrix extract_DI(const IntegerMatrix& a, const IntervalPartition& part, const RowContext& ctx) {
    if (!a.square() || a.rows() != part.n)
        throw std::invalid_argument("extract_DI: partition does not match matrix dimension");
    if (ctx.row >= a.rows()) throw std::out_of_range("extract_DI: row index out of range");
    const std::size_t n = a.rows();
    std::vector<std::size_t> owner(n);
    for (std::size_t k = 0; k < part.count(); ++k)
        for (std::size_t i = part.intervals[k].begin; i < part.intervals[k].end; ++i) owner[i] = k;

    IntegerMatrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i == ctx.row) continue;
        for (std::size_t j = 0; j < n; ++j)
            if (gap(owner[i], owner[j]) <= 1) out(i, j) = a(i, j);
    }
    return out;
}

IntegerMatrix block(const IntegerMatrix& a, const IntervalPartition& part, std::size_t row_block, std::size_t col_block) {
    if (row_block >= part.count() || col_block >= part.count())
        throw std::out_of_range("block index outside partition");
    const Interval& r = part.intervals[row_block];
    const Interval& c = part.intervals[col_block];
    IntegerMatrix out(r.size(), c.size());
    for (std::size_t i = 0; i < r.size(); ++i)
        for (std::size_t j = 0; j < c.size(); ++j) out(i, j) = a(r.begin + i, c.begin + j);
    return out;
}

IntegerMatrix TriBlocks::U(std::size_t k) const {
    if (k == 0) throw std::out_of_range("U_k needs k >= 1");
    return block(a, part, k - 1, k);
}

IntegerMatrix TriBlocks::T(std::size_t k) const {
    if (k + 1 >= part.count()) throw std::out_of_range("T_k needs k + 1 < number of blocks");
    return block(a, part, k + 1, k);
}

}  // namespace bandsing
