#pragma once

// Band matrix ensembles and the interval/block decomposition used to study
// kernels of row-deleted band matrices.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bandsing/matrix.hpp"

namespace bandsing {

enum class EnsembleKind { general, block, periodic, modified };

std::string to_string(EnsembleKind kind);
EnsembleKind parse_ensemble_kind(const std::string& text);

/// Law of the entries outside the band for the general kind.
struct EntryLaw {
    enum class Kind { zero, rademacher, uniform_range, constant };

    Kind kind = Kind::zero;
    std::int64_t lo = 0;  // uniform_range lower end, or the constant
    std::int64_t hi = 0;  // uniform_range upper end

    static EntryLaw zero() { return {}; }
    static EntryLaw rademacher() { return {Kind::rademacher, -1, 1}; }
    static EntryLaw uniform_range(std::int64_t a, std::int64_t b) { return {Kind::uniform_range, a, b}; }
    static EntryLaw constant(std::int64_t c) { return {Kind::constant, c, c}; }

    /// Text form: "zero", "rademacher", "uniform(a,b)", "constant(c)".
    std::string str() const;
    static EntryLaw parse(const std::string& text);

    friend bool operator==(const EntryLaw&, const EntryLaw&) = default;
};

struct BandProfile {
    std::size_t n = 0;
    std::size_t d = 0;
    EnsembleKind kind = EnsembleKind::general;
    EntryLaw offband = EntryLaw::zero();
    std::optional<double> alpha;  // reporting only

    /// Throws std::invalid_argument on 1 <= d <= n violations, block kinds
    /// whose block size does not divide n, or empty uniform ranges.
    void validate() const;
};

/// True iff entry (i, j) is a uniform +-1 variable under the profile.
bool in_random_support(const BandProfile& profile, std::size_t i, std::size_t j);

/// Draws a matrix from the profile. Entry (i, j) depends only on (seed, i, j).
IntegerMatrix sample_matrix(const BandProfile& profile, std::uint64_t seed);

struct Interval {
    std::size_t begin = 0;  // half-open [begin, end)
    std::size_t end = 0;

    std::size_t size() const noexcept { return end - begin; }
    bool contains(std::size_t i) const noexcept { return begin <= i && i < end; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Cover of [0, n) by consecutive blocks of length e; the tail block is at
/// least e/2 long, or it has been merged into its predecessor (`fallback`).
struct IntervalPartition {
    std::size_t n = 0;
    std::size_t e = 0;
    double s = 0.0;
    bool fallback = false;
    std::vector<Interval> intervals;

    std::size_t count() const noexcept { return intervals.size(); }
    std::size_t block_of(std::size_t i) const;

    /// Blocks of length e with the remainder kept as its own tail when it is
    /// at least e/2 long and merged into the previous block otherwise.
    static IntervalPartition with_length(std::size_t n, std::size_t e);
};

/// Scans s over a fixed descending grid in (2, 3) with e = floor(d / s) and
/// takes the first s whose tail satisfies n - e*floor(n/e) >= e/2.
IntervalPartition partition_intervals(std::size_t n, std::size_t d);

/// Values of s tried by partition_intervals, in order.
const std::vector<double>& partition_grid();

struct RowContext {
    std::size_t row = 0;    // the deleted row I
    std::size_t block = 0;  // index k with I in I_k
};

RowContext make_row_context(const IntervalPartition& part, std::size_t row);

/// Copy of a with row `row` set to zero.
IntegerMatrix zero_row(const IntegerMatrix& a, std::size_t row);

/// Keeps the entries in diagonal and first off-diagonal blocks of the
/// partition, then zeroes the context row.
IntegerMatrix extract_DI(const IntegerMatrix& a, const IntervalPartition& part, const RowContext& ctx);

/// Sub-matrix on intervals (row_block, col_block).
IntegerMatrix block(const IntegerMatrix& a, const IntervalPartition& part, std::size_t row_block, std::size_t col_block);

/// D_k, U_k and T_k in the block tri-diagonal layout: D_k sits on (k, k),
/// U_k on (k-1, k) and T_k on (k+1, k).
struct TriBlocks {
    const IntegerMatrix& a;
    const IntervalPartition& part;

    IntegerMatrix D(std::size_t k) const { return block(a, part, k, k); }
    IntegerMatrix U(std::size_t k) const;
    IntegerMatrix T(std::size_t k) const;
};

}  // namespace bandsing
