#include "bandsing/matrix_io.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace bandsing {

namespace {

constexpr std::array<char, 8> kMagic{'B', 'A', 'N', 'D', 'M', 'A', 'T', '1'};

void put_u64(std::ostream& out, std::uint64_t x) {
    std::array<char, 8> bytes;
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((x >> (8 * i)) & 0xFF);
    out.write(bytes.data(), 8);
}

std::uint64_t get_u64(std::istream& in) {
    std::array<unsigned char, 8> bytes;
    if (!in.read(reinterpret_cast<char*>(bytes.data()), 8)) throw FormatError("binary matrix: truncated");
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x |= std::uint64_t{bytes[i]} << (8 * i);
    return x;
}

std::size_t checked_dim(std::uint64_t rows, std::uint64_t cols) {
    constexpr std::uint64_t limit = std::uint64_t{1} << 32;
    if (rows > limit || cols > limit || (rows != 0 && cols > (std::uint64_t{1} << 40) / rows))
        throw FormatError("matrix dimensions too large");
    return static_cast<std::size_t>(rows * cols);
}

std::optional<u64> parse_modulus(const std::string& token) {
    if (token == "Z") return std::nullopt;
    try {
        std::size_t used = 0;
        const u64 p = std::stoull(token, &used);
        if (used != token.size()) throw FormatError("bad modulus '" + token + "'");
        return p;
    } catch (const std::logic_error&) {
        throw FormatError("bad modulus '" + token + "'");
    }
}

}  // namespace

FpMatrix StoredMatrix::as_fp() const {
    if (!modulus) throw std::invalid_argument("matrix is stored over Z, not F_p");
    PrimeModulus p(*modulus);
    FpMatrix out(entries.rows(), entries.cols(), p);
    for (std::size_t i = 0; i < entries.data().size(); ++i) out.data()[i] = residue(entries.data()[i], p);
    out.set_band_meta(entries.band_meta());
    return out;
}

void write_matrix_text(std::ostream& out, const IntegerMatrix& a, std::optional<u64> modulus) {
    out << a.rows() << ' ' << a.cols() << ' ';
    if (modulus) out << *modulus; else out << 'Z';
    out << '\n';
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (j) out << ' ';
            out << a(i, j);
        }
        out << '\n';
    }
}

void write_matrix_text(std::ostream& out, const FpMatrix& a) {
    out << a.rows() << ' ' << a.cols() << ' ' << a.modulus().value() << '\n';
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (j) out << ' ';
            out << a(i, j);
        }
        out << '\n';
    }
}

void write_matrix_binary(std::ostream& out, const IntegerMatrix& a, std::optional<u64> modulus) {
    out.write(kMagic.data(), kMagic.size());
    put_u64(out, a.rows());
    put_u64(out, a.cols());
    put_u64(out, modulus.value_or(0));
    for (std::int64_t x : a.data()) put_u64(out, static_cast<std::uint64_t>(x));
}

StoredMatrix read_matrix_text(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw FormatError("text matrix: missing header");
    std::istringstream hs(header);
    std::uint64_t rows = 0, cols = 0;
    std::string mod, extra;
    if (!(hs >> rows >> cols >> mod) || (hs >> extra))
        throw FormatError("text matrix: header must be '<rows> <cols> <modulus|Z>'");
    checked_dim(rows, cols);

    StoredMatrix m{IntegerMatrix(rows, cols), parse_modulus(mod)};
    for (auto& x : m.entries.data()) {
        if (!(in >> x)) throw FormatError("text matrix: expected " + std::to_string(rows * cols) + " entries");
        if (m.modulus && (x < 0 || static_cast<u64>(x) >= *m.modulus))
            throw FormatError("text matrix: entry outside [0, p)");
    }
    if (in >> extra) throw FormatError("text matrix: trailing data");
    m.entries.set_band_meta(detect_band(m.entries));
    return m;
}

StoredMatrix read_matrix_binary(std::istream& in) {
    std::array<char, 8> magic;
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw FormatError("binary matrix: bad magic");
    const std::uint64_t rows = get_u64(in), cols = get_u64(in), mod = get_u64(in);
    checked_dim(rows, cols);
    StoredMatrix m{IntegerMatrix(rows, cols), mod == 0 ? std::nullopt : std::optional<u64>(mod)};
    for (auto& x : m.entries.data()) x = static_cast<std::int64_t>(get_u64(in));
    if (in.peek() != std::char_traits<char>::eof()) throw FormatError("binary matrix: trailing data");
    m.entries.set_band_meta(detect_band(m.entries));
    return m;
}

StoredMatrix load_matrix(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::array<char, 8> head{};
    in.read(head.data(), head.size());
    const bool binary = in.gcount() == 8 && head == kMagic;
    in.clear();
    in.seekg(0);
    return binary ? read_matrix_binary(in) : read_matrix_text(in);
}

void save_matrix(const std::filesystem::path& path, const IntegerMatrix& a, MatrixFormat format,
                 std::optional<u64> modulus) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    if (format == MatrixFormat::binary) write_matrix_binary(out, a, modulus);
    else write_matrix_text(out, a, modulus);
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_kernel_text(std::ostream& out, const KernelBasis& k) {
    out << "kernel " << k.p.value() << ' ' << k.dim() << '\n';
    for (const auto& v : k.vectors) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out << ' ';
            out << v[i];
        }
        out << '\n';
    }
}

KernelBasis read_kernel_text(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw FormatError("kernel: missing header");
    std::istringstream hs(header);
    std::string tag, extra;
    u64 p = 0;
    std::size_t dim = 0;
    if (!(hs >> tag >> p >> dim) || tag != "kernel" || (hs >> extra))
        throw FormatError("kernel: header must be 'kernel <p> <dim>'");
    if (p < 3 || p >= kMaxModulus || !is_prime(p)) throw FormatError("kernel: modulus is not an odd prime");
    KernelBasis k{PrimeModulus(p), 0, {}};
    std::string line;
    while (k.vectors.size() < dim && std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::vector<u64> v;
        u64 x;
        while (ls >> x) {
            if (x >= p) throw FormatError("kernel: coordinate outside [0, p)");
            v.push_back(x);
        }
        if (!ls.eof()) throw FormatError("kernel: bad coordinate");
        if (!k.vectors.empty() && v.size() != k.vectors.front().size()) throw FormatError("kernel: ragged vectors");
        k.vectors.push_back(std::move(v));
    }
    if (k.vectors.size() != dim) throw FormatError("kernel: expected " + std::to_string(dim) + " vectors");
    if (!k.vectors.empty()) k.n = k.vectors.front().size();
    return k;
}

}  // namespace bandsing
