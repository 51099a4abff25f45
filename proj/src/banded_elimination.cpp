// Rank of a band matrix over F_p, optionally with wrapped corners.
//
// With corners of width b the last b columns form a dense border and the last
// b rows are dense border rows; the remaining core is banded. Columns are
// eliminated left to right; a core row i joins the candidate set once the
// sweep reaches column i - b, so every row is only ever touched inside a
// window of O(b) columns plus its border tail. Fill stays within 2b to the
// right of the current column, which keeps the cost at O(n b^2).

#include <algorithm>
#include <stdexcept>

#include "bandsing/rankengine.hpp"

namespace bandsing {

namespace {

struct SparseRow {
    std::size_t base = 0;      // first column covered by `window`
    std::vector<u64> window;   // core columns [base, base + window.size())
    std::vector<u64> tail;     // border columns [core, n)

    std::size_t window_end() const noexcept { return base + window.size(); }
};

class BandedEliminator {
public:
    BandedEliminator(const FpMatrix& a, const BandMeta& meta)
        : mont_(a.modulus().value()), n_(a.rows()), b_(meta.bandwidth), core_(meta.corners ? n_ - b_ : n_) {
        rows_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            SparseRow& r = rows_[i];
            std::size_t lo = 0, hi = core_;
            if (i < core_) {
                lo = i > b_ ? i - b_ : 0;
                hi = std::min(core_, i + b_ + 1);
            }
            for (std::size_t j = 0; j < n_; ++j) {
                const u64 x = a(i, j);
                if (x != 0 && !in_band_support(meta, n_, i, j))
                    throw std::invalid_argument("rank_fp_banded: matrix support exceeds its band hint");
            }
            r.base = lo;
            r.window.resize(hi - lo);
            for (std::size_t j = lo; j < hi; ++j) r.window[j - lo] = mont_.to_mont(a(i, j));
            r.tail.resize(n_ - core_);
            for (std::size_t j = core_; j < n_; ++j) r.tail[j - core_] = mont_.to_mont(a(i, j));
        }
    }

    std::size_t rank() {
        std::vector<std::size_t> active;  // unpivoted core rows, ascending
        std::vector<std::size_t> border;  // unpivoted border rows, ascending
        for (std::size_t i = core_; i < n_; ++i) border.push_back(i);
        std::size_t next_core = 0;
        std::size_t rank = 0;

        for (std::size_t j = 0; j < n_; ++j) {
            while (next_core < core_ && next_core <= j + b_) active.push_back(next_core++);

            std::vector<std::size_t>* pivot_list = nullptr;
            std::size_t pivot_pos = 0;
            for (auto* list : {&active, &border}) {
                for (std::size_t k = 0; k < list->size(); ++k)
                    if (value((*list)[k], j) != 0) {
                        pivot_list = list;
                        pivot_pos = k;
                        break;
                    }
                if (pivot_list) break;
            }
            if (!pivot_list) continue;

            const std::size_t q = (*pivot_list)[pivot_pos];
            pivot_list->erase(pivot_list->begin() + static_cast<std::ptrdiff_t>(pivot_pos));
            ++rank;
            const u64 inv = mont_.inv(value(q, j));
            for (auto* list : {&active, &border})
                for (std::size_t r : *list) {
                    const u64 x = value(r, j);
                    if (x != 0) eliminate(r, q, j, mont_.mul(x, inv));
                }
        }
        return rank;
    }

private:
    u64 value(std::size_t row, std::size_t j) const noexcept {
        const SparseRow& r = rows_[row];
        if (j >= core_) return r.tail[j - core_];
        if (j < r.base || j >= r.window_end()) return 0;
        return r.window[j - r.base];
    }

    // row r -= f * row q over columns >= j, where q vanishes left of j.
    void eliminate(std::size_t r_index, std::size_t q_index, std::size_t j, u64 f) {
        SparseRow& r = rows_[r_index];
        const SparseRow& q = rows_[q_index];
        if (j < core_) {
            if (r.window_end() < q.window_end()) r.window.resize(q.window_end() - r.base, 0);
            for (std::size_t c = std::max(j, q.base); c < q.window_end(); ++c) {
                const u64 y = q.window[c - q.base];
                if (y != 0) r.window[c - r.base] = mont_.sub(r.window[c - r.base], mont_.mul(f, y));
            }
        }
        const std::size_t t0 = j >= core_ ? j - core_ : 0;
        for (std::size_t c = t0; c < q.tail.size(); ++c)
            if (q.tail[c] != 0) r.tail[c] = mont_.sub(r.tail[c], mont_.mul(f, q.tail[c]));
    }

    Montgomery mont_;
    std::size_t n_, b_, core_;
    std::vector<SparseRow> rows_;
};

}  // namespace

std::size_t rank_fp_banded(const FpMatrix& a, const BandMeta& meta) {
    if (!a.square()) throw std::invalid_argument("rank_fp_banded: matrix is not square");
    if (meta.corners && 2 * meta.bandwidth >= a.rows()) return rank_fp_dense(a);
    return BandedEliminator(a, meta).rank();
}

}  // namespace bandsing
