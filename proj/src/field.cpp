#include "lfpp/field.hpp"

#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include "lfpp/fft.hpp"
#include "lfpp/rng.hpp"

namespace lfpp {

double bilinear_at(const Eigen::ArrayXXd& values, const GridSpec& spec, Point p) {
    const int n = spec.n;
    const double s = spec.spacing();
    const double gx = p.x / s;
    const double gy = p.y / s;
    const double fx0 = std::floor(gx);
    const double fy0 = std::floor(gy);
    const double tx = gx - fx0;
    const double ty = gy - fy0;
    const int x0 = wrap_index(int(fx0), n);
    const int y0 = wrap_index(int(fy0), n);
    const int x1 = x0 + 1 == n ? 0 : x0 + 1;
    const int y1 = y0 + 1 == n ? 0 : y0 + 1;
    return (1.0 - tx) * (1.0 - ty) * values(x0, y0) + tx * (1.0 - ty) * values(x1, y0) +
           (1.0 - tx) * ty * values(x0, y1) + tx * ty * values(x1, y1);
}

namespace {

int default_circle_samples(double r, double spacing) {
    return std::max(64, int(std::ceil(2.0 * M_PI * r / spacing)));
}

double circle_mean(const Eigen::ArrayXXd& values, const GridSpec& spec, Point z, double r, int m) {
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
        const double ang = 2.0 * M_PI * double(i) / double(m);
        sum += bilinear_at(values, spec, Point{z.x + r * std::cos(ang), z.y + r * std::sin(ang)});
    }
    return sum / double(m);
}

}  // namespace

namespace {

ComplexGrid synthesize_spectrum(const GridSpec& spec, std::uint64_t seed, std::uint32_t replica) {
    const int n = spec.n;
    const CounterRng rng(seed, replica, RngStream::FieldModes);
    ComplexGrid coef(n, n);
    const int half = n / 2;
    for (int j2 = 0; j2 < n; ++j2) {
        const int m2 = j2 <= half ? j2 : j2 - n;
        for (int j1 = 0; j1 < n; ++j1) {
            const int m1 = j1 <= half ? j1 : j1 - n;
            if (m1 == 0 && m2 == 0) {
                coef(j1, j2) = 0.0;
                continue;
            }
            const bool self_paired = (j1 == 0 || j1 == half) && (j2 == 0 || j2 == half);
            // One Gaussian draw per unordered {m, -m} pair, attributed to the
            // lexicographically positive member so the mirror entry is its
            // conjugate. The counter is keyed by the signed mode, not the bin,
            // which makes the draw independent of n: refining a replica's
            // grid keeps its coarse spectrum.
            const bool canonical = self_paired || (m2 > 0 || (m2 == 0 && m1 > 0));
            if (!canonical) continue;
            const std::uint64_t idx =
                (std::uint64_t(std::uint32_t(m1)) << 32) | std::uint64_t(std::uint32_t(m2));
            const auto g = rng.gaussian_pair(idx);
            const double sigma = std::sqrt(detail::mode_variance(m1, m2));
            if (self_paired) {
                coef(j1, j2) = sigma * g[0];
            } else {
                const std::complex<double> c(sigma * g[0] * M_SQRT1_2, sigma * g[1] * M_SQRT1_2);
                coef(j1, j2) = c;
                coef((n - j1) % n, (n - j2) % n) = std::conj(c);
            }
        }
    }
    return coef;
}

void apply_heat_multiplier(ComplexGrid& spectrum, const GridSpec& spec, double epsilon) {
    const int n = spec.n;
    const int half = n / 2;
    const double k_unit = 2.0 * M_PI / spec.side_length;
    for (int j2 = 0; j2 < n; ++j2) {
        const int m2 = j2 <= half ? j2 : j2 - n;
        const double ky = k_unit * m2;
        for (int j1 = 0; j1 < n; ++j1) {
            const int m1 = j1 <= half ? j1 : j1 - n;
            const double kx = k_unit * m1;
            spectrum(j1, j2) *= std::exp(-(kx * kx + ky * ky) * epsilon * epsilon / 4.0);
        }
    }
}

/// Spectral form of the radius-1 circle-average functional about the grid
/// center: h_1(c) = sum over bins of coef * functional. Cached per grid.
std::shared_ptr<const ComplexGrid> unit_circle_functional(const GridSpec& spec) {
    static std::mutex mu;
    static std::map<std::pair<int, std::uint64_t>, std::shared_ptr<const ComplexGrid>> cache;
    std::uint64_t lbits;
    std::memcpy(&lbits, &spec.side_length, 8);
    const auto key = std::make_pair(spec.n, lbits);
    std::lock_guard<std::mutex> lock(mu);
    const auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    const int n = spec.n;
    const double s = spec.spacing();
    const Point c = grid_center(spec);
    const int m = default_circle_samples(1.0, s);
    auto weights = std::make_shared<ComplexGrid>(ComplexGrid::Zero(n, n));
    for (int i = 0; i < m; ++i) {
        const double ang = 2.0 * M_PI * double(i) / double(m);
        const double gx = (c.x + std::cos(ang)) / s;
        const double gy = (c.y + std::sin(ang)) / s;
        const double fx0 = std::floor(gx), fy0 = std::floor(gy);
        const double tx = gx - fx0, ty = gy - fy0;
        const int x0 = wrap_index(int(fx0), n), y0 = wrap_index(int(fy0), n);
        const int x1 = (x0 + 1) % n, y1 = (y0 + 1) % n;
        (*weights)(x0, y0) += (1.0 - tx) * (1.0 - ty) / m;
        (*weights)(x1, y0) += tx * (1.0 - ty) / m;
        (*weights)(x0, y1) += (1.0 - tx) * ty / m;
        (*weights)(x1, y1) += tx * ty / m;
    }
    fft2_pow2(*weights, /*inverse=*/true);
    cache[key] = weights;
    return weights;
}

}  // namespace

FieldGrid sample_gff(const GridSpec& spec, std::uint64_t seed, std::uint32_t replica) {
    spec.validate();
    ComplexGrid coef = synthesize_spectrum(spec, seed, replica);
    fft2_pow2(coef, /*inverse=*/true);

    FieldGrid out;
    out.spec = spec;
    out.values = coef.real();
    out.seed = seed;

    const Point c = grid_center(spec);
    const double unit_avg =
        circle_mean(out.values, spec, c, 1.0, default_circle_samples(1.0, spec.spacing()));
    out.values -= unit_avg;
    out.normalization = Normalization::UnitCircleAverageZero;
    return out;
}

Eigen::ArrayXXd sample_mollified(const GridSpec& spec, std::uint64_t seed, std::uint32_t replica,
                                 double epsilon) {
    spec.validate();
    if (!(epsilon >= spec.spacing()))
        throw std::invalid_argument("sample_mollified: epsilon must be >= lattice spacing");
    ComplexGrid coef = synthesize_spectrum(spec, seed, replica);

    // The normalization shift from the raw spectrum; mollification preserves
    // constants, so subtracting it afterwards matches shifting first.
    const auto functional = unit_circle_functional(spec);
    const double unit_avg = (coef * *functional).sum().real();

    apply_heat_multiplier(coef, spec, epsilon);
    fft2_pow2(coef, /*inverse=*/true);
    return coef.real() - unit_avg;
}

MollifiedField mollify(const FieldGrid& field, double epsilon) {
    const GridSpec& spec = field.spec;
    if (!(epsilon >= spec.spacing()))
        throw std::invalid_argument("mollify: epsilon must be >= lattice spacing");
    const int n = spec.n;
    const int half = n / 2;
    const double k_unit = 2.0 * M_PI / spec.side_length;

    ComplexGrid spectrum = field.values.cast<std::complex<double>>();
    fft2_pow2(spectrum, /*inverse=*/false);
    for (int j2 = 0; j2 < n; ++j2) {
        const int m2 = j2 <= half ? j2 : j2 - n;
        const double ky = k_unit * m2;
        for (int j1 = 0; j1 < n; ++j1) {
            const int m1 = j1 <= half ? j1 : j1 - n;
            const double kx = k_unit * m1;
            spectrum(j1, j2) *= std::exp(-(kx * kx + ky * ky) * epsilon * epsilon / 4.0);
        }
    }
    fft2_pow2(spectrum, /*inverse=*/true);

    MollifiedField out;
    out.base = std::make_shared<FieldGrid>(field);
    out.epsilon = epsilon;
    out.values = spectrum.real() / double(std::int64_t(n) * n);
    return out;
}

CircleAverageSample circle_average(const FieldGrid& field, Point z, double r, int m) {
    const double s = field.spec.spacing();
    if (!(r >= 2.0 * s)) throw std::invalid_argument("circle_average: radius must be >= 2*spacing");
    if (m <= 0) m = default_circle_samples(r, s);
    if (m < 64) throw std::invalid_argument("circle_average: sample count must be >= 64");
    CircleAverageSample out;
    out.center = z;
    out.radius = r;
    out.sample_count = m;
    out.value = circle_mean(field.values, field.spec, z, r, m);
    return out;
}

double thickness(const FieldGrid& field, Point z, double r_min) {
    const double s = field.spec.spacing();
    if (!(r_min >= 2.0 * s)) throw std::invalid_argument("thickness: r_min must be >= 2*spacing");
    double best = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (double r = r_min; r <= 1.0 + 1e-12; r *= 2.0) {
        const double denom = std::log(1.0 / r);
        if (denom <= 0.1) continue;
        const auto sample = circle_average(field, z, r);
        best = std::max(best, sample.value / denom);
        any = true;
    }
    if (!any) throw std::invalid_argument("thickness: no usable dyadic radius in [r_min, 1]");
    return best;
}

FieldGrid add_function(const FieldGrid& field, const Eigen::ArrayXXd& f) {
    if (f.rows() != field.values.rows() || f.cols() != field.values.cols())
        throw std::invalid_argument("add_function: shape mismatch");
    FieldGrid out;
    out.spec = field.spec;
    out.values = field.values + f;
    out.seed = field.seed;
    out.normalization = Normalization::Raw;
    return out;
}

}  // namespace lfpp
