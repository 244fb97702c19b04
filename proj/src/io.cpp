#include "lfpp/io.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace lfpp::io {

namespace {
constexpr char kMagic[8] = {'L', 'F', 'P', 'P', 'F', 'L', 'D', '1'};

void put_u32_le(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {(unsigned char)(v), (unsigned char)(v >> 8), (unsigned char)(v >> 16),
                          (unsigned char)(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32_le(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
           (std::uint32_t(b[3]) << 24);
}

void put_f64_le(std::ostream& os, double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = (unsigned char)(u >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64_le(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= std::uint64_t(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &u, 8);
    return v;
}
}  // namespace

void save_field(const FieldGrid& field, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_field: cannot open " + path.string());
    os.write(kMagic, 8);
    put_u32_le(os, std::uint32_t(field.spec.n));
    put_f64_le(os, field.spec.spacing());
    const int n = field.spec.n;
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) put_f64_le(os, field.values(x, y));
    if (!os) throw std::runtime_error("save_field: write failed for " + path.string());
}

FieldGrid load_field(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_field: cannot open " + path.string());
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("load_field: bad magic in " + path.string());
    const int n = int(get_u32_le(is));
    const double spacing = get_f64_le(is);
    FieldGrid field;
    field.spec = GridSpec{n, spacing * n};
    field.spec.validate();
    field.values.resize(n, n);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) field.values(x, y) = get_f64_le(is);
    if (!is) throw std::runtime_error("load_field: truncated file " + path.string());
    field.normalization = Normalization::Raw;
    return field;
}

namespace {
Eigen::ArrayXXd rescaled_bytes(const Eigen::ArrayXXd& values) {
    const double lo = values.minCoeff();
    const double hi = values.maxCoeff();
    if (hi <= lo) return Eigen::ArrayXXd::Constant(values.rows(), values.cols(), 128.0);
    return ((values - lo) / (hi - lo) * 255.0).round();
}
}  // namespace

void save_pgm(const Eigen::ArrayXXd& values, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_pgm: cannot open " + path.string());
    const auto bytes = rescaled_bytes(values);
    os << "P5\n" << values.rows() << " " << values.cols() << "\n255\n";
    for (Eigen::Index y = 0; y < values.cols(); ++y)
        for (Eigen::Index x = 0; x < values.rows(); ++x) os.put(char((unsigned char)bytes(x, y)));
}

void save_ppm_overlay(const Eigen::ArrayXXd& values, const std::vector<OverlayPath>& overlays,
                      const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_ppm_overlay: cannot open " + path.string());
    const auto bytes = rescaled_bytes(values);
    const int n = int(values.rows());
    std::vector<unsigned char> img(std::size_t(3) * n * n);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            const auto g = (unsigned char)bytes(x, y);
            const std::size_t at = 3 * (std::size_t(y) * n + x);
            img[at] = img[at + 1] = img[at + 2] = g;
        }
    for (const auto& ov : overlays)
        for (const auto& v : ov.vertices) {
            const std::size_t at = 3 * (std::size_t(wrap_index(v.y, n)) * n + wrap_index(v.x, n));
            img[at] = ov.r;
            img[at + 1] = ov.g;
            img[at + 2] = ov.b;
        }
    os << "P6\n" << n << " " << n << "\n255\n";
    os.write(reinterpret_cast<const char*>(img.data()), std::streamsize(img.size()));
}

void save_vertex_csv(const std::vector<Vertex>& vertices, const std::vector<double>& cumulative,
                     const std::filesystem::path& path) {
    if (!cumulative.empty() && cumulative.size() != vertices.size())
        throw std::invalid_argument("save_vertex_csv: size mismatch");
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_vertex_csv: cannot open " + path.string());
    os << "x_index,y_index,cumulative_distance\n";
    os.precision(17);
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        os << vertices[i].x << "," << vertices[i].y << ",";
        os << (cumulative.empty() ? 0.0 : cumulative[i]) << "\n";
    }
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_text: cannot open " + path.string());
    os.write(content.data(), std::streamsize(content.size()));
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_text: cannot open " + path.string());
    return std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

nlohmann::json json_distance(double value) {
    if (std::isfinite(value)) return value;
    return nullptr;
}

}  // namespace lfpp::io
