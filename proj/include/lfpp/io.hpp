#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lfpp/field.hpp"
#include "lfpp/grid.hpp"

namespace lfpp::io {

/// Flat binary snapshot: header = magic "LFPPFLD1" (8 bytes), n (u32 LE),
/// spacing (f64 LE), followed by n^2 f64 LE values in row-major scanline
/// order (x fastest).
void save_field(const FieldGrid& field, const std::filesystem::path& path);
FieldGrid load_field(const std::filesystem::path& path);

/// 8-bit binary PGM, affinely rescaled to [0, 255]; constant input maps to 128.
void save_pgm(const Eigen::ArrayXXd& values, const std::filesystem::path& path);

struct OverlayPath {
    std::vector<Vertex> vertices;
    unsigned char r = 255, g = 32, b = 32;
};

/// Field heatmap as binary PPM with vertex overlays painted on top.
void save_ppm_overlay(const Eigen::ArrayXXd& values, const std::vector<OverlayPath>& overlays,
                      const std::filesystem::path& path);

/// One CSV row per path vertex: x_index, y_index, cumulative_distance.
void save_vertex_csv(const std::vector<Vertex>& vertices, const std::vector<double>& cumulative,
                     const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

/// Serialize a finite-or-infinite distance: finite doubles pass through,
/// infinities become null (the JSON wire form of the +inf sentinel).
nlohmann::json json_distance(double value);

}  // namespace lfpp::io
