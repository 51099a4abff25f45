#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bandsing/ensembles.hpp"
#include "bandsing/matrix_io.hpp"
#include "bandsing/rankengine.hpp"

using namespace bandsing;
namespace fs = std::filesystem;

namespace {

BandProfile periodic(std::size_t n, std::size_t d) {
    BandProfile p;
    p.n = n;
    p.d = d;
    p.kind = EnsembleKind::periodic;
    return p;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "bandsing_io_tests";
    fs::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("text format header and round trip") {
    const auto a = sample_matrix(periodic(64, 8), 1);
    std::stringstream ss;
    write_matrix_text(ss, a);
    std::string header;
    std::getline(std::stringstream(ss.str()), header);
    CHECK(header == "64 64 Z");
    const auto back = read_matrix_text(ss);
    CHECK(back.entries == a);
    CHECK_FALSE(back.modulus);
    REQUIRE(back.entries.band_meta());
    CHECK(back.entries.band_meta()->bandwidth == 8);
    CHECK(back.entries.band_meta()->corners);
}

TEST_CASE("binary format round trip through files") {
    IntegerMatrix a(3, 4);
    std::int64_t v = -6;
    for (auto& x : a.data()) x = v++ * 1000000007LL;
    for (auto format : {MatrixFormat::text, MatrixFormat::binary}) {
        const auto path = scratch(format == MatrixFormat::text ? "a.txt" : "a.bin");
        save_matrix(path, a, format);
        const auto back = load_matrix(path);
        CHECK(back.entries == a);
        CHECK_FALSE(back.modulus);
    }
    IntegerMatrix b(2, 2);
    b(0, 0) = 4;
    b(1, 1) = 1;
    save_matrix(scratch("b.bin"), b, MatrixFormat::binary, 5);
    const auto sb = load_matrix(scratch("b.bin"));
    REQUIRE(sb.modulus);
    CHECK(*sb.modulus == 5);
    CHECK(sb.as_fp()(0, 0) == 4);
}

TEST_CASE("F_p matrices keep their modulus") {
    IntegerMatrix a(2, 2);
    a(0, 0) = -1;
    a(0, 1) = 1;
    a(1, 0) = 1;
    a(1, 1) = -1;
    const auto f = reduce_mod(a, PrimeModulus(5));
    std::stringstream ss;
    write_matrix_text(ss, f);
    CHECK(ss.str() == "2 2 5\n4 1\n1 4\n");
    const auto back = read_matrix_text(ss);
    CHECK(back.as_fp() == f);
}

TEST_CASE("malformed inputs are rejected") {
    auto bad = [](const std::string& text) {
        std::stringstream ss(text);
        CHECK_THROWS_AS(read_matrix_text(ss), FormatError);
    };
    bad("");
    bad("2 2\n1 0\n0 1\n");
    bad("2 2 Z\n1 0\n0\n");
    bad("2 2 Z\n1 0\n0 1 7\n");
    bad("2 2 Q\n1 0\n0 1\n");
    bad("2 2 5\n1 0\n0 9\n");
    bad("2 2 Z\n1 x\n0 1\n");
    bad("2 2 Z extra\n1 0\n0 1\n");

    std::stringstream bin;
    write_matrix_binary(bin, identity_matrix(3));
    std::string bytes = bin.str();
    std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS_AS(read_matrix_binary(truncated), FormatError);
    std::string corrupt = bytes;
    corrupt[0] = 'X';
    std::stringstream bad_magic(corrupt);
    CHECK_THROWS_AS(read_matrix_binary(bad_magic), FormatError);
    CHECK_THROWS_AS(load_matrix(scratch("does-not-exist")), FormatError);
}

TEST_CASE("kernel text round trip") {
    IntegerMatrix ones(3, 3);
    for (auto& x : ones.data()) x = 1;
    const auto k = kernel_fp(reduce_mod(ones, PrimeModulus(7)));
    std::stringstream ss;
    write_kernel_text(ss, k);
    CHECK(ss.str().rfind("kernel 7 2\n", 0) == 0);
    CHECK(read_kernel_text(ss) == k);

    std::stringstream bad("kernel 8 1\n1 2\n");
    CHECK_THROWS_AS(read_kernel_text(bad), FormatError);
    std::stringstream short_basis("kernel 7 2\n1 2 3\n");
    CHECK_THROWS_AS(read_kernel_text(short_basis), FormatError);
    std::stringstream out_of_range("kernel 7 1\n1 9\n");
    CHECK_THROWS_AS(read_kernel_text(out_of_range), FormatError);
}

TEST_CASE("detect_band") {
    CHECK_FALSE(detect_band(sample_matrix(BandProfile{6, 6, EnsembleKind::general, EntryLaw::zero(), {}}, 1)));
    const auto m = detect_band(sample_matrix(BandProfile{40, 3, EnsembleKind::general, EntryLaw::zero(), {}}, 1));
    REQUIRE(m);
    CHECK(m->bandwidth == 3);
    CHECK_FALSE(m->corners);
    const auto c = detect_band(sample_matrix(periodic(40, 3), 1));
    REQUIRE(c);
    CHECK(c->bandwidth == 3);
    CHECK(c->corners);
}
