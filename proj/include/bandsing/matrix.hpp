#pragma once

// Dense row-major matrices over Z and over F_p. All indices are 0-based.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "bandsing/fieldcore.hpp"

namespace bandsing {

/// Structural hint: entries vanish off the band |i-j| <= bandwidth, except the
/// wrapped corners |i-j| >= n - bandwidth when `corners` is set.
struct BandMeta {
    std::size_t bandwidth = 0;
    bool corners = false;

    friend bool operator==(const BandMeta&, const BandMeta&) = default;
};

/// True iff (i, j) lies in the support allowed by `meta` for an n x n matrix.
constexpr bool in_band_support(const BandMeta& meta, std::size_t n, std::size_t i, std::size_t j) noexcept {
    const std::size_t gap = i > j ? i - j : j - i;
    if (gap <= meta.bandwidth) return true;
    return meta.corners && gap + meta.bandwidth >= n;
}

template <typename T>
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }

    T& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    T at(std::size_t i, std::size_t j) const {
        if (i >= rows_ || j >= cols_) throw std::out_of_range("matrix index out of range");
        return (*this)(i, j);
    }

    std::span<T> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
    std::span<const T> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }
    std::span<const T> data() const noexcept { return data_; }
    std::span<T> data() noexcept { return data_; }

    const std::optional<BandMeta>& band_meta() const noexcept { return band_meta_; }
    void set_band_meta(std::optional<BandMeta> meta) { band_meta_ = meta; }

    /// Compares entries and shape only; the band hint is not part of the value.
    friend bool operator==(const DenseMatrix& a, const DenseMatrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
    std::optional<BandMeta> band_meta_;
};

using IntegerMatrix = DenseMatrix<std::int64_t>;

/// Matrix over F_p; every entry is a residue in [0, p).
class FpMatrix : public DenseMatrix<u64> {
public:
    FpMatrix(std::size_t rows, std::size_t cols, PrimeModulus p) : DenseMatrix<u64>(rows, cols), p_(p) {}

    PrimeModulus modulus() const noexcept { return p_; }

    friend bool operator==(const FpMatrix& a, const FpMatrix& b) {
        return a.p_ == b.p_ && static_cast<const DenseMatrix<u64>&>(a) == static_cast<const DenseMatrix<u64>&>(b);
    }

private:
    PrimeModulus p_;
};

inline IntegerMatrix identity_matrix(std::size_t n) {
    IntegerMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
}

/// Smallest hint that covers the support of a square matrix: a pure band when
/// that is narrower than half the dimension, else a band with corners, else
/// nothing.
template <typename T>
std::optional<BandMeta> detect_band(const DenseMatrix<T>& a) {
    if (!a.square() || a.rows() == 0) return std::nullopt;
    const std::size_t n = a.rows();
    std::size_t pure = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (a(i, j) != 0) pure = std::max(pure, i > j ? i - j : j - i);
    if (2 * pure + 1 < n) return BandMeta{pure, false};
    // With corners: the band b must cover every gap g with min(g, n - g) <= b.
    std::size_t wrapped = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (a(i, j) != 0) {
                const std::size_t g = i > j ? i - j : j - i;
                wrapped = std::max(wrapped, std::min(g, n - g));
            }
    if (4 * wrapped + 1 < n) return BandMeta{wrapped, true};
    return std::nullopt;
}

}  // namespace bandsing
