#pragma once

// Matrix and kernel serialization.
//
// Text:   "<rows> <cols> <modulus or Z>" then the entries row-major, one row
//         per line.
// Binary: the 8 bytes "BANDMAT1", then rows, cols and modulus (0 for Z) as
//         little-endian u64, then the entries as little-endian int64,
//         row-major.
// Kernel: "kernel <p> <dim>" then one basis vector per line.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>

#include "bandsing/matrix.hpp"
#include "bandsing/rankengine.hpp"

namespace bandsing {

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class MatrixFormat { text, binary };

/// A matrix as stored on disk: integer entries plus the modulus, if any.
struct StoredMatrix {
    IntegerMatrix entries;
    std::optional<u64> modulus;

    FpMatrix as_fp() const;
};

void write_matrix_text(std::ostream& out, const IntegerMatrix& a, std::optional<u64> modulus = std::nullopt);
void write_matrix_binary(std::ostream& out, const IntegerMatrix& a, std::optional<u64> modulus = std::nullopt);
void write_matrix_text(std::ostream& out, const FpMatrix& a);

/// Throw FormatError on malformed input.
StoredMatrix read_matrix_text(std::istream& in);
StoredMatrix read_matrix_binary(std::istream& in);

/// Detects the format from the leading bytes.
StoredMatrix load_matrix(const std::filesystem::path& path);
void save_matrix(const std::filesystem::path& path, const IntegerMatrix& a, MatrixFormat format,
                 std::optional<u64> modulus = std::nullopt);

void write_kernel_text(std::ostream& out, const KernelBasis& k);
KernelBasis read_kernel_text(std::istream& in);

}  // namespace bandsing
