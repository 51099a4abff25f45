#include "bandsing/rankengine.hpp"

#include <algorithm>
#include <mutex>
#include <stdexcept>

namespace bandsing {

using boost::multiprecision::cpp_int;

namespace {

/// Row-reduces a rows x cols Montgomery-form matrix in place to reduced
/// echelon form and returns the pivot columns. Pivots are the first nonzero
/// entry scanning down each column.
std::vector<std::size_t> rref_in_place(std::vector<u64>& m, std::size_t rows, std::size_t cols, const Montgomery& mont,
                                       bool reduce_above) {
    std::vector<std::size_t> pivots;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t piv = r;
        while (piv < rows && m[piv * cols + c] == 0) ++piv;
        if (piv == rows) continue;
        if (piv != r)
            std::swap_ranges(m.begin() + static_cast<std::ptrdiff_t>(piv * cols),
                             m.begin() + static_cast<std::ptrdiff_t>((piv + 1) * cols),
                             m.begin() + static_cast<std::ptrdiff_t>(r * cols));
        u64* prow = &m[r * cols];
        const u64 inv = mont.inv(prow[c]);
        for (std::size_t k = c; k < cols; ++k) prow[k] = mont.mul(prow[k], inv);
        for (std::size_t i = reduce_above ? 0 : r + 1; i < rows; ++i) {
            if (i == r) continue;
            u64* row = &m[i * cols];
            const u64 f = row[c];
            if (f == 0) continue;
            for (std::size_t k = c; k < cols; ++k)
                if (prow[k] != 0) row[k] = mont.sub(row[k], mont.mul(f, prow[k]));
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

std::vector<u64> to_montgomery(const FpMatrix& a, const Montgomery& mont) {
    std::vector<u64> m(a.data().begin(), a.data().end());
    for (auto& x : m) x = mont.to_mont(x);
    return m;
}

KernelBasis kernel_of(std::vector<u64> m, std::size_t rows, std::size_t cols, PrimeModulus p) {
    const Montgomery mont(p.value());
    const auto pivots = rref_in_place(m, rows, cols, mont, true);

    std::vector<bool> is_pivot(cols, false);
    for (auto c : pivots) is_pivot[c] = true;
    const std::size_t dim = cols - pivots.size();

    // Null-space vectors from the free columns, stacked as a dim x cols matrix.
    std::vector<u64> basis(dim * cols, 0);
    std::size_t b = 0;
    for (std::size_t f = 0; f < cols; ++f) {
        if (is_pivot[f]) continue;
        u64* v = &basis[b * cols];
        v[f] = mont.to_mont(1);
        for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = mont.sub(0, m[r * cols + f]);
        ++b;
    }
    rref_in_place(basis, dim, cols, mont, true);

    KernelBasis out{p, cols, {}};
    out.vectors.reserve(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        std::vector<u64> v(cols);
        for (std::size_t k = 0; k < cols; ++k) v[k] = mont.from_mont(basis[i * cols + k]);
        out.vectors.push_back(std::move(v));
    }
    return out;
}

bool fits_banded_path(const FpMatrix& a, const BandMeta& meta) {
    if (!a.square()) return false;
    const std::size_t n = a.rows(), b = meta.bandwidth;
    return meta.corners ? 4 * b + 1 < n : 2 * b + 1 < n;
}

}  // namespace

FpMatrix reduce_mod(const IntegerMatrix& a, PrimeModulus p) {
    FpMatrix out(a.rows(), a.cols(), p);
    auto src = a.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = residue(src[i], p);
    out.set_band_meta(a.band_meta());
    return out;
}

std::size_t rank_fp_dense(const FpMatrix& a) {
    const Montgomery mont(a.modulus().value());
    auto m = to_montgomery(a, mont);
    return rref_in_place(m, a.rows(), a.cols(), mont, false).size();
}

std::size_t rank_fp(const FpMatrix& a) {
    const auto& meta = a.band_meta();
    if (meta && fits_banded_path(a, *meta)) return rank_fp_banded(a, *meta);
    return rank_fp_dense(a);
}

KernelBasis kernel_fp(const FpMatrix& a) {
    const Montgomery mont(a.modulus().value());
    return kernel_of(to_montgomery(a, mont), a.rows(), a.cols(), a.modulus());
}

KernelBasis left_kernel_fp(const FpMatrix& a) {
    const Montgomery mont(a.modulus().value());
    std::vector<u64> t(a.rows() * a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t[j * a.rows() + i] = mont.to_mont(a(i, j));
    return kernel_of(std::move(t), a.cols(), a.rows(), a.modulus());
}

bool is_singular_fp(const FpMatrix& a) {
    if (!a.square()) throw std::invalid_argument("is_singular_fp: matrix is not square");
    return rank_fp(a) < a.rows();
}

std::vector<u64> multiply(const FpMatrix& a, const std::vector<u64>& v) {
    if (v.size() != a.cols()) throw std::invalid_argument("multiply: dimension mismatch");
    const u64 p = a.modulus().value();
    std::vector<u64> out(a.rows(), 0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        u64 acc = 0;
        for (std::size_t j = 0; j < a.cols(); ++j) acc = add_mod(acc, mul_mod(a(i, j), v[j], p), p);
        out[i] = acc;
    }
    return out;
}

cpp_int hadamard_bound_squared(const IntegerMatrix& a) {
    cpp_int bound = 1;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        cpp_int norm_sq = 0;
        for (std::int64_t x : a.row(i)) norm_sq += cpp_int(x) * x;
        bound *= norm_sq;
    }
    return bound;
}

namespace {

/// Primes below 2^61 in descending order, extended on demand.
PrimeModulus crt_pool_prime(std::size_t index) {
    static std::mutex mutex;
    static std::vector<u64> pool;
    std::lock_guard lock(mutex);
    while (pool.size() <= index) {
        const u64 start = pool.empty() ? (u64{1} << 61) - 1 : pool.back() - 1;
        pool.push_back(prev_prime(start));
    }
    return PrimeModulus(pool[index]);
}

}  // namespace

std::vector<PrimeModulus> crt_primes_for(const cpp_int& bound_sq) {
    const cpp_int target = 4 * bound_sq;  // need product^2 > 4 * H^2
    std::vector<PrimeModulus> primes;
    cpp_int product_sq = 1;
    do {
        primes.push_back(crt_pool_prime(primes.size()));
        product_sq *= cpp_int(primes.back().value()) * primes.back().value();
    } while (product_sq <= target);
    return primes;
}

std::size_t rank_Z(const IntegerMatrix& a) {
    // Zero rows carry no minors; dropping them keeps every row norm >= 1, so the
    // bound on the full product also bounds every minor.
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < a.rows(); ++i)
        if (std::any_of(a.row(i).begin(), a.row(i).end(), [](std::int64_t x) { return x != 0; })) keep.push_back(i);
    if (keep.empty()) return 0;
    IntegerMatrix b(keep.size(), a.cols());
    for (std::size_t r = 0; r < keep.size(); ++r) std::copy(a.row(keep[r]).begin(), a.row(keep[r]).end(), b.row(r).begin());

    const std::size_t full = std::min(b.rows(), b.cols());
    std::size_t best = 0;
    for (const auto& p : crt_primes_for(hadamard_bound_squared(b))) {
        best = std::max(best, rank_fp_dense(reduce_mod(b, p)));
        if (best == full) break;
    }
    return best;
}

bool is_singular_Z(const IntegerMatrix& a) {
    if (!a.square()) throw std::invalid_argument("is_singular_Z: matrix is not square");
    const cpp_int bound_sq = hadamard_bound_squared(a);
    if (bound_sq == 0) return true;  // a zero row
    for (const auto& p : crt_primes_for(bound_sq)) {
        FpMatrix reduced = reduce_mod(a, p);
        if (rank_fp(reduced) == a.rows()) return false;
    }
    return true;
}

}  // namespace bandsing
