#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <string>

#include "lfpp/grid.hpp"

namespace lfpp {

enum class Normalization { UnitCircleAverageZero, Raw };

/// Scalar field sampled on the torus lattice. values(x, y) is the field at
/// lattice vertex (x, y); storage is column-major so the flat layout is
/// x + n*y (x fastest), matching the serialized row-major scanline order.
struct FieldGrid {
    GridSpec spec;
    Eigen::ArrayXXd values;
    std::uint64_t seed = 0;
    Normalization normalization = Normalization::Raw;
};

/// Heat-kernel smoothed field at scale epsilon, kept together with the field
/// it was derived from.
struct MollifiedField {
    std::shared_ptr<const FieldGrid> base;
    double epsilon = 0.0;
    Eigen::ArrayXXd values;

    const GridSpec& spec() const { return base->spec; }
};

struct CircleAverageSample {
    Point center;
    double radius = 0.0;
    double value = 0.0;
    int sample_count = 0;
};

/// Field value at an off-lattice point (physical units), bilinear with
/// periodic wrap.
double bilinear_at(const Eigen::ArrayXXd& values, const GridSpec& spec, Point p);

/// Draws the stationary log-correlated torus field that stands in for the
/// whole-plane GFF: independent complex Gaussians per Fourier mode m != 0 with
/// E|coef|^2 = 1/(2*pi*|m|^2) (zero mode dropped), inverse-transformed, then
/// shifted so the radius-1 circle average about the grid center vanishes.
/// The per-mode draws are keyed by (seed, replica, mode), so a mode shared by
/// two resolutions receives the same Gaussian: refining the grid of a replica
/// keeps its coarse spectrum.
FieldGrid sample_gff(const GridSpec& spec, std::uint64_t seed, std::uint32_t replica = 0);

/// Heat-kernel convolution h * p_{eps^2/2}, applied as the exact spectral
/// multiplier exp(-|k|^2 eps^2 / 4). Requires epsilon >= spacing.
MollifiedField mollify(const FieldGrid& field, double epsilon);

/// Fused campaign path: mollify(sample_gff(spec, seed, replica), eps).values
/// computed with a single inverse transform, the heat multiplier applied in
/// spectral space and the normalization shift evaluated spectrally through a
/// cached circle functional. Agrees with the two-step composition to
/// floating-point roundoff.
Eigen::ArrayXXd sample_mollified(const GridSpec& spec, std::uint64_t seed, std::uint32_t replica,
                                 double epsilon);

/// Mean of the field over m equally spaced points of the circle of radius r
/// about z, bilinearly interpolated, periodic wrap. m <= 0 picks the default
/// max(64, ceil(2*pi*r/spacing)). Requires r >= 2*spacing and m >= 64.
CircleAverageSample circle_average(const FieldGrid& field, Point z, double r, int m = 0);

/// Finite-resolution thickness proxy at z: max over dyadic radii
/// r in {r_min, 2 r_min, ...} ∩ (0, 1] of h_r(z)/log(1/r), skipping radii
/// with log(1/r) <= 0.1. Requires r_min >= 2*spacing.
double thickness(const FieldGrid& field, Point z, double r_min);

/// Pointwise sum; the result is tagged Raw.
FieldGrid add_function(const FieldGrid& field, const Eigen::ArrayXXd& f);

namespace detail {
/// Raw spectral amplitude: E|coef_m|^2 for integer mode m != 0.
inline double mode_variance(std::int64_t m1, std::int64_t m2) {
    return 1.0 / (2.0 * M_PI * double(m1 * m1 + m2 * m2));
}
}  // namespace detail

}  // namespace lfpp
