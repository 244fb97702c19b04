#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "lfpp/field.hpp"
#include "lfpp/io.hpp"
#include "lfpp/properties.hpp"

using namespace lfpp;
namespace fs = std::filesystem;

namespace {
struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("lfpp_test_" + std::to_string(std::rand()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};
}  // namespace

TEST_CASE("field binary round trip") {
    TempDir tmp;
    const GridSpec spec{64, 4.0};
    const FieldGrid f = sample_gff(spec, 31337);
    const auto file = tmp.path / "field.fld";
    io::save_field(f, file);

    // Header: magic(8) + n(u32 LE) + spacing(f64 LE) = 20 bytes, then n^2 f64.
    CHECK(fs::file_size(file) == 20 + 8 * std::uint64_t(spec.n) * spec.n);
    std::ifstream is(file, std::ios::binary);
    char magic[8];
    is.read(magic, 8);
    CHECK(std::string(magic, 8) == "LFPPFLD1");

    const FieldGrid g = io::load_field(file);
    CHECK(g.spec.n == spec.n);
    CHECK(g.spec.spacing() == doctest::Approx(spec.spacing()).epsilon(1e-15));
    CHECK((g.values == f.values).all());
}

TEST_CASE("load rejects a corrupted magic") {
    TempDir tmp;
    const auto file = tmp.path / "bad.fld";
    std::ofstream(file, std::ios::binary) << "NOTAFILE" << std::string(100, '\0');
    CHECK_THROWS_AS(io::load_field(file), std::runtime_error);
}

TEST_CASE("pgm export is well formed") {
    TempDir tmp;
    const GridSpec spec{64, 4.0};
    const FieldGrid f = sample_gff(spec, 5);
    const auto file = tmp.path / "field.pgm";
    io::save_pgm(f.values, file);
    std::ifstream is(file, std::ios::binary);
    std::string word;
    is >> word;
    CHECK(word == "P5");
    int w, h, maxv;
    is >> w >> h >> maxv;
    CHECK(w == 64);
    CHECK(h == 64);
    CHECK(maxv == 255);
    is.get();
    CHECK(fs::file_size(file) == std::uint64_t(is.tellg()) + 64 * 64);
}

TEST_CASE("constant field maps to mid-gray") {
    TempDir tmp;
    Eigen::ArrayXXd flat = Eigen::ArrayXXd::Constant(16, 16, 3.0);
    const auto file = tmp.path / "flat.pgm";
    io::save_pgm(flat, file);
    std::ifstream is(file, std::ios::binary);
    std::string line;
    std::getline(is, line);
    std::getline(is, line);
    std::getline(is, line);
    const int byte = is.get();
    CHECK(byte == 128);
}

TEST_CASE("vertex csv format") {
    TempDir tmp;
    const auto file = tmp.path / "path.csv";
    io::save_vertex_csv({{1, 2}, {2, 3}}, {0.0, 1.5}, file);
    const std::string text = io::read_text(file);
    CHECK(text == "x_index,y_index,cumulative_distance\n1,2,0\n2,3,1.5\n");
}

TEST_CASE("distance json encodes the infinite sentinel as null") {
    CHECK(io::json_distance(2.5) == nlohmann::json(2.5));
    CHECK(io::json_distance(kUnreachable).is_null());
}

TEST_CASE("axiom report json round trip is lossless") {
    AxiomReport r;
    r.axiom = AxiomTag::Weyl;
    r.mode = CheckMode::Exact;
    r.add({"case a", 1.2345678901234567e-11, false, false});
    r.add({"case b", 0.5, true, false});
    r.add({"case c", 0.0, false, true});
    const auto j = r.to_json();
    const AxiomReport back = AxiomReport::from_json(j);
    CHECK(back.axiom == r.axiom);
    CHECK(back.mode == r.mode);
    CHECK(back.checked == r.checked);
    CHECK(back.violations == r.violations);
    CHECK(back.worst_error == r.worst_error);
    REQUIRE(back.details.size() == r.details.size());
    for (std::size_t i = 0; i < r.details.size(); ++i) {
        CHECK(back.details[i].what == r.details[i].what);
        CHECK(back.details[i].error == r.details[i].error);  // bit-exact via shortest repr
        CHECK(back.details[i].violated == r.details[i].violated);
        CHECK(back.details[i].skipped == r.details[i].skipped);
    }
    CHECK(AxiomReport::from_json(back.to_json()).to_json() == j);
}
