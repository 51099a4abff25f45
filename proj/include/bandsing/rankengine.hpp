#pragma once

// Exact rank, kernel and singularity over F_p, and exact singularity over Z
// by multi-prime reduction.

#include <cstddef>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "bandsing/matrix.hpp"

namespace bandsing {

/// Canonical basis of a right null space: the rows of the reduced echelon
/// form of the kernel, so the first nonzero coordinate of each vector is 1.
struct KernelBasis {
    PrimeModulus p;
    std::size_t n = 0;  // ambient dimension (number of columns of the matrix)
    std::vector<std::vector<u64>> vectors;

    std::size_t dim() const noexcept { return vectors.size(); }
    friend bool operator==(const KernelBasis&, const KernelBasis&) = default;
};

/// Entrywise residue, keeping the band hint.
FpMatrix reduce_mod(const IntegerMatrix& a, PrimeModulus p);

/// Rank by plain Gaussian elimination on the full matrix.
std::size_t rank_fp_dense(const FpMatrix& a);

/// Rank by banded elimination using `meta`; rows near the wrapped corners are
/// kept as a dense border. Requires a square matrix whose support fits meta.
std::size_t rank_fp_banded(const FpMatrix& a, const BandMeta& meta);

/// Dispatches to the banded path when the matrix carries a band hint that is
/// narrow enough to pay off, and to the dense path otherwise.
std::size_t rank_fp(const FpMatrix& a);

KernelBasis kernel_fp(const FpMatrix& a);

/// Left null space, i.e. kernel_fp of the transpose.
KernelBasis left_kernel_fp(const FpMatrix& a);

/// Throws std::invalid_argument for non-square input.
bool is_singular_fp(const FpMatrix& a);

/// Squared Hadamard bound: the product of squared Euclidean row norms.
boost::multiprecision::cpp_int hadamard_bound_squared(const IntegerMatrix& a);

/// Descending primes below 2^61 whose product exceeds 2 * sqrt(bound_sq).
std::vector<PrimeModulus> crt_primes_for(const boost::multiprecision::cpp_int& bound_sq);

/// Exact rank over Q: the largest rank among enough primes to exceed twice the
/// Hadamard bound of every minor.
std::size_t rank_Z(const IntegerMatrix& a);

/// det(a) == 0 over Z. Throws std::invalid_argument for non-square input.
bool is_singular_Z(const IntegerMatrix& a);

/// A * v over F_p.
std::vector<u64> multiply(const FpMatrix& a, const std::vector<u64>& v);

}  // namespace bandsing
