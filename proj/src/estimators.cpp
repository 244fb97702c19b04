#include "lfpp/estimators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "lfpp/parallel.hpp"
#include "lfpp/rng.hpp"

namespace lfpp {

using nlohmann::json;

double median_of(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median_of: empty sample");
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + std::ptrdiff_t(mid), values.end());
    double m = values[mid];
    if (values.size() % 2 == 0) {
        const double lower =
            *std::max_element(values.begin(), values.begin() + std::ptrdiff_t(mid));
        m = 0.5 * (lower + m);
    }
    return m;
}

void ExponentFit::validate() const {
    if (eps_grid.size() < 4) throw std::invalid_argument("ExponentFit: need >= 4 eps values");
    for (std::size_t i = 1; i < eps_grid.size(); ++i)
        if (!(eps_grid[i] < eps_grid[i - 1]))
            throw std::invalid_argument("ExponentFit: eps grid must be strictly decreasing");
    for (double m : medians)
        if (!(m > 0.0)) throw std::invalid_argument("ExponentFit: medians must be positive");
    if (std::abs(q_hat - (1.0 - slope) / xi) > 1e-12 * std::max(1.0, std::abs(q_hat)))
        throw std::invalid_argument("ExponentFit: q_hat inconsistent with slope");
    if (std::abs(c_m_hat - (25.0 - 6.0 * q_hat * q_hat)) >
        1e-12 * std::max(1.0, std::abs(c_m_hat)))
        throw std::invalid_argument("ExponentFit: c_m_hat inconsistent with q_hat");
    if (gamma_hat.has_value() != (q_hat >= 2.0))
        throw std::invalid_argument("ExponentFit: gamma_hat present iff q_hat >= 2");
    if (gamma_hat) {
        const double g = *gamma_hat;
        if (std::abs(2.0 / g + g / 2.0 - q_hat) > 1e-9)
            throw std::invalid_argument("ExponentFit: gamma_hat does not solve its equation");
    }
}

GridSpec refine_for_epsilon(const GridSpec& base, double epsilon, int max_n) {
    base.validate();
    if (!(epsilon > 0.0)) throw std::invalid_argument("refine_for_epsilon: epsilon must be positive");
    GridSpec out = base;
    while (out.spacing() > epsilon / 4.0) {
        if (out.n * 2 > max_n)
            throw std::invalid_argument("epsilon below resolution: refinement would exceed max grid");
        out.n *= 2;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Campaign scaffolding

namespace {

/// Scratch JSONL used to resume interrupted campaigns. First line echoes the
/// config; subsequent lines are {"k": <work item>, "v": <value>}.
class ReplicaSink {
  public:
    ReplicaSink(std::filesystem::path path, const json& config) : path_(std::move(path)) {
        const std::string want = config.dump();
        std::ifstream is(path_);
        if (is) {
            std::string line;
            if (std::getline(is, line) && line == want) {
                while (std::getline(is, line)) {
                    if (line.empty()) continue;
                    const auto rec = json::parse(line, nullptr, false);
                    if (rec.is_discarded() || !rec.contains("k") || !rec.contains("v")) continue;
                    done_[rec["k"].get<std::int64_t>()] = rec["v"].get<double>();
                }
            }
        }
        os_.open(path_, std::ios::trunc);
        os_ << want << "\n";
        for (const auto& [k, v] : done_) os_ << json{{"k", k}, {"v", v}}.dump() << "\n";
        os_.flush();
    }

    std::optional<double> lookup(std::int64_t key) {
        std::lock_guard<std::mutex> lock(mu_);
        const auto it = done_.find(key);
        if (it == done_.end()) return std::nullopt;
        return it->second;
    }

    void record(std::int64_t key, double value) {
        std::lock_guard<std::mutex> lock(mu_);
        done_[key] = value;
        os_ << json{{"k", key}, {"v", value}}.dump() << "\n";
        os_.flush();
    }

    void finish() {
        std::lock_guard<std::mutex> lock(mu_);
        os_.close();
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }

  private:
    std::filesystem::path path_;
    std::map<std::int64_t, double> done_;
    std::ofstream os_;
    std::mutex mu_;
};

int effective_threads(const CampaignOptions& opts) {
    return opts.threads > 0 ? opts.threads : hardware_threads();
}

/// Workers running grids of n^2 cells; keeps peak memory under the budget.
int memory_capped_threads(const CampaignOptions& opts, int n) {
    const std::int64_t per_replica = std::int64_t(n) * n * 56;  // spectrum + field + metric
    const int cap = int(std::max<std::int64_t>(1, opts.memory_budget_bytes / per_replica));
    return std::min(effective_threads(opts), cap);
}

double crossing_one_replica(double xi, double epsilon, const GridSpec& grid_eff,
                            std::uint64_t seed, std::uint32_t replica) {
    const LatticeMetric metric = build_metric_from_values(
        grid_eff, sample_mollified(grid_eff, seed, replica, epsilon), xi);
    const Point c = grid_center(grid_eff);
    return crossing_distance(metric, 1.0, Point{c.x - 0.5, c.y - 0.5});
}

}  // namespace

std::vector<double> crossing_samples(double xi, double epsilon, int replicas, const GridSpec& grid,
                                     std::uint64_t seed, const CampaignOptions& opts) {
    if (!(xi > 0.0)) throw std::invalid_argument("crossing_samples: xi must be positive");
    if (replicas < 10) throw std::invalid_argument("crossing_samples: need >= 10 replicas");
    if (grid.side_length < 2.0)
        throw std::invalid_argument("crossing_samples: domain must fit the unit square centrally");
    const GridSpec eff = refine_for_epsilon(grid, epsilon, opts.max_n);
    if (std::abs(1.0 / eff.spacing() - std::lround(1.0 / eff.spacing())) > 1e-9)
        throw std::invalid_argument("crossing_samples: unit square must align with the lattice");

    std::vector<double> values(static_cast<std::size_t>(replicas));
    parallel_for(0, replicas, memory_capped_threads(opts, eff.n), [&](std::int64_t r) {
        values[std::size_t(r)] = crossing_one_replica(xi, epsilon, eff, seed, std::uint32_t(r));
    });
    return values;
}

double estimate_a_eps(double xi, double epsilon, int replicas, const GridSpec& grid,
                      std::uint64_t seed, const CampaignOptions& opts) {
    return median_of(crossing_samples(xi, epsilon, replicas, grid, seed, opts));
}

PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_power_law: need >= 2 matched points");
    const std::size_t n = x.size();
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw std::invalid_argument("fit_power_law: inputs must be positive");
        sx += std::log(x[i]);
        sy += std::log(y[i]);
    }
    const double mx = sx / double(n), my = sy / double(n);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(x[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(y[i]) - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("fit_power_law: degenerate abscissae");
    PowerLawFit out;
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    return out;
}

namespace {

void validate_eps_grid(std::span<const double> eps_grid) {
    if (eps_grid.size() < 4) throw std::invalid_argument("fit_q: need >= 4 eps values");
    for (std::size_t i = 0; i < eps_grid.size(); ++i) {
        if (!(eps_grid[i] > 0.0)) throw std::invalid_argument("fit_q: eps must be positive");
        if (i > 0 && !(eps_grid[i] < eps_grid[i - 1]))
            throw std::invalid_argument("fit_q: eps grid must be strictly decreasing");
    }
    if (!(eps_grid.front() / eps_grid.back() >= 8.0 * (1.0 - 1e-12)))
        throw std::invalid_argument("fit_q: eps grid must span at least a factor of 8");
}

ExponentFit assemble_fit(double xi, std::span<const double> eps_grid,
                         std::vector<double> medians) {
    ExponentFit fit;
    fit.xi = xi;
    fit.eps_grid.assign(eps_grid.begin(), eps_grid.end());
    fit.medians = std::move(medians);
    for (double m : fit.medians)
        if (!(m > 0.0)) throw std::invalid_argument("fit_q: non-positive median (broken metric?)");
    const auto ols = fit_power_law(fit.eps_grid, fit.medians);
    fit.slope = ols.slope;
    fit.q_hat = (1.0 - fit.slope) / xi;
    fit.c_m_hat = 25.0 - 6.0 * fit.q_hat * fit.q_hat;
    fit.gamma_hat = gamma_from_q(fit.q_hat);
    return fit;
}

}  // namespace

double central_charge(double q) {
    if (!(q > 0.0)) throw std::invalid_argument("central_charge: q must be positive");
    return 25.0 - 6.0 * q * q;
}

std::optional<double> gamma_from_q(double q) {
    if (q < 2.0) return std::nullopt;
    // Smaller root of g^2 - 2 q g + 4 = 0, written to avoid cancellation.
    return 4.0 / (q + std::sqrt(q * q - 4.0));
}

ExponentFit fit_q_from_medians(double xi, std::span<const double> eps_grid,
                               std::span<const double> medians) {
    if (!(xi > 0.0)) throw std::invalid_argument("fit_q: xi must be positive");
    validate_eps_grid(eps_grid);
    if (medians.size() != eps_grid.size())
        throw std::invalid_argument("fit_q: medians size mismatch");
    auto fit = assemble_fit(xi, eps_grid, std::vector<double>(medians.begin(), medians.end()));
    fit.validate();
    return fit;
}

ExponentFit fit_q(double xi, std::span<const double> eps_grid, int replicas, const GridSpec& grid,
                  std::uint64_t seed, const CampaignOptions& opts) {
    if (!(xi > 0.0)) throw std::invalid_argument("fit_q: xi must be positive");
    validate_eps_grid(eps_grid);
    if (replicas < 10) throw std::invalid_argument("fit_q: need >= 10 replicas");

    const std::size_t ne = eps_grid.size();
    const std::size_t nr = std::size_t(replicas);

    std::unique_ptr<ReplicaSink> sink;
    if (opts.partial_path) {
        json config{{"op", "fit_q"},      {"xi", xi},   {"eps", eps_grid},
                    {"n", grid.n},        {"L", grid.side_length},
                    {"replicas", replicas}, {"seed", seed}};
        sink = std::make_unique<ReplicaSink>(*opts.partial_path, config);
    }

    // Flat work list over (eps, replica); the refined grid depends on eps.
    std::vector<GridSpec> eff(ne);
    for (std::size_t e = 0; e < ne; ++e) eff[e] = refine_for_epsilon(grid, eps_grid[e], opts.max_n);
    if (grid.side_length < 2.0)
        throw std::invalid_argument("fit_q: domain must fit the unit square centrally");

    std::vector<double> values(ne * nr);
    const int max_n = eff.back().n;  // finest grid governs the memory cap
    parallel_for(0, std::int64_t(ne * nr), memory_capped_threads(opts, max_n), [&](std::int64_t k) {
        const std::size_t e = std::size_t(k) / nr;
        const std::size_t r = std::size_t(k) % nr;
        if (sink) {
            if (const auto hit = sink->lookup(k)) {
                values[std::size_t(k)] = *hit;
                return;
            }
        }
        const double v =
            crossing_one_replica(xi, eps_grid[e], eff[e], seed, std::uint32_t(r));
        values[std::size_t(k)] = v;
        if (sink) sink->record(k, v);
    });

    std::vector<double> medians(ne);
    for (std::size_t e = 0; e < ne; ++e)
        medians[e] = median_of(std::vector<double>(values.begin() + std::ptrdiff_t(e * nr),
                                                   values.begin() + std::ptrdiff_t((e + 1) * nr)));

    ExponentFit fit = assemble_fit(xi, eps_grid, std::move(medians));
    fit.replicas = replicas;
    fit.seed = seed;

    // Bootstrap over replica indices, the same resample across the eps grid
    // (matching the common-random-numbers pairing of the campaign).
    const int B = std::max(200, opts.bootstrap_resamples);
    const CounterRng boot(seed, 0, RngStream::Bootstrap);
    std::vector<double> qs(static_cast<std::size_t>(B));
    std::vector<double> resampled(nr), med(ne);
    for (int b = 0; b < B; ++b) {
        std::vector<std::size_t> pick(nr);
        for (std::size_t i = 0; i < nr; ++i)
            pick[i] = std::size_t(boot.uniform_int(std::uint64_t(b) * nr + i, nr));
        for (std::size_t e = 0; e < ne; ++e) {
            for (std::size_t i = 0; i < nr; ++i) resampled[i] = values[e * nr + pick[i]];
            med[e] = median_of(resampled);
        }
        const auto ols = fit_power_law(fit.eps_grid, med);
        qs[std::size_t(b)] = (1.0 - ols.slope) / xi;
    }
    double mean = 0;
    for (double q : qs) mean += q;
    mean /= double(B);
    double var = 0;
    for (double q : qs) var += (q - mean) * (q - mean);
    fit.stderr_q = std::sqrt(var / double(B - 1));

    fit.validate();
    if (sink) sink->finish();
    return fit;
}

XiCritResult xi_crit_from_fits(std::span<const ExponentFit> fits) {
    XiCritResult out;
    out.fits.assign(fits.begin(), fits.end());
    for (std::size_t i = 0; i + 1 < fits.size(); ++i) {
        const double a = fits[i].q_hat - 2.0;
        const double b = fits[i + 1].q_hat - 2.0;
        if (a >= 0.0 && b < 0.0) {
            out.bracket = {fits[i].xi, fits[i + 1].xi};
            const double t = a / (a - b);
            out.root_estimate = fits[i].xi + t * (fits[i + 1].xi - fits[i].xi);
            break;
        }
    }
    return out;
}

XiCritResult estimate_xi_crit(std::span<const double> xi_grid, std::span<const double> eps_grid,
                              int replicas, const GridSpec& grid, std::uint64_t seed,
                              const CampaignOptions& opts) {
    if (xi_grid.size() < 2) throw std::invalid_argument("estimate_xi_crit: need >= 2 xi values");
    for (std::size_t i = 1; i < xi_grid.size(); ++i)
        if (!(xi_grid[i] > xi_grid[i - 1]))
            throw std::invalid_argument("estimate_xi_crit: xi grid must be increasing");
    std::vector<ExponentFit> fits;
    fits.reserve(xi_grid.size());
    for (const double xi : xi_grid) fits.push_back(fit_q(xi, eps_grid, replicas, grid, seed, opts));
    return xi_crit_from_fits(fits);
}

// ---------------------------------------------------------------------------
// Annulus campaigns

namespace {

std::array<double, 5> quantiles5(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto at = [&](double p) {
        const double idx = p * double(v.size() - 1);
        const std::size_t lo = std::size_t(idx);
        const std::size_t hi = std::min(lo + 1, v.size() - 1);
        const double t = idx - double(lo);
        return (1.0 - t) * v[lo] + t * v[hi];
    };
    return {at(0.05), at(0.25), at(0.50), at(0.75), at(0.95)};
}

}  // namespace

ScaleStats tightness_stats(double xi, double q_used, std::span<const double> radii,
                           const AnnulusTemplate& shape, double epsilon, int replicas,
                           const GridSpec& grid, std::uint64_t seed, const CampaignOptions& opts) {
    if (radii.empty()) throw std::invalid_argument("tightness_stats: need at least one radius");
    if (radii.size() >= 2) {
        const auto [lo, hi] = std::minmax_element(radii.begin(), radii.end());
        if (!(*hi / *lo >= 4.0 * (1.0 - 1e-12)))
            throw std::invalid_argument("tightness_stats: radii must span >= factor 4");
    }
    if (!(shape.inner_ratio > 0.0 && shape.outer_ratio > shape.inner_ratio))
        throw std::invalid_argument("tightness_stats: bad annulus template");
    const GridSpec eff = refine_for_epsilon(grid, epsilon, opts.max_n);
    const Point c = grid_center(eff);
    for (const double r : radii)
        validate_annulus(eff, AnnulusSpec{c, r * shape.inner_ratio, r * shape.outer_ratio});

    const std::size_t nrad = radii.size();
    std::vector<double> acr(nrad * std::size_t(replicas)), arn(nrad * std::size_t(replicas));
    parallel_for(0, replicas, memory_capped_threads(opts, eff.n), [&](std::int64_t rep) {
        const FieldGrid field = sample_gff(eff, seed, std::uint32_t(rep));
        const MollifiedField mol = mollify(field, epsilon);
        const LatticeMetric metric = build_metric(mol, xi);
        for (std::size_t i = 0; i < nrad; ++i) {
            const double r = radii[i];
            const AnnulusSpec a{c, r * shape.inner_ratio, r * shape.outer_ratio};
            const double hr = circle_average(field, c, r).value;
            const double norm = std::pow(r, -xi * q_used) * std::exp(-xi * hr);
            acr[i * std::size_t(replicas) + std::size_t(rep)] = norm * across(metric, a);
            arn[i * std::size_t(replicas) + std::size_t(rep)] = norm * around(metric, a);
        }
    });

    ScaleStats out;
    out.xi = xi;
    out.q_used = q_used;
    out.radii.assign(radii.begin(), radii.end());
    for (std::size_t i = 0; i < nrad; ++i) {
        out.normalized_across.push_back(quantiles5(std::vector<double>(
            acr.begin() + std::ptrdiff_t(i * std::size_t(replicas)),
            acr.begin() + std::ptrdiff_t((i + 1) * std::size_t(replicas)))));
        out.normalized_around.push_back(quantiles5(std::vector<double>(
            arn.begin() + std::ptrdiff_t(i * std::size_t(replicas)),
            arn.begin() + std::ptrdiff_t((i + 1) * std::size_t(replicas)))));
    }
    return out;
}

AnnulusRatioResult annulus_ratio_check(double xi, std::span<const double> delta_grid, double zeta,
                                       int centers, int replicas, double epsilon,
                                       const GridSpec& grid, std::uint64_t seed,
                                       const AnnulusRatioShape& shape,
                                       const CampaignOptions& opts) {
    if (delta_grid.empty()) throw std::invalid_argument("annulus_ratio_check: empty delta grid");
    for (const double d : delta_grid)
        if (!(d > 0.0 && d <= 0.25))
            throw std::invalid_argument("annulus_ratio_check: delta must lie in (0, 1/4]");
    if (centers < 1 || replicas < 1)
        throw std::invalid_argument("annulus_ratio_check: need centers, replicas >= 1");
    const GridSpec eff = refine_for_epsilon(grid, epsilon, opts.max_n);

    // Deterministic center layout: a ring of radius L/8 about the domain
    // center, snapped to the lattice (keeps every annulus in the central
    // quarter).
    const Point c0 = grid_center(eff);
    std::vector<Point> pts(static_cast<std::size_t>(centers));
    for (int i = 0; i < centers; ++i) {
        const double ang = 2.0 * M_PI * double(i) / double(centers);
        const double rad = centers == 1 ? 0.0 : eff.side_length / 8.0;
        const Vertex v = nearest_vertex(
            Point{c0.x + rad * std::cos(ang), c0.y + rad * std::sin(ang)}, eff);
        pts[std::size_t(i)] = vertex_position(v, eff);
    }
    for (const double delta : delta_grid)
        for (const auto& z : pts) {
            validate_annulus(eff, AnnulusSpec{z, shape.a * delta * shape.base_r,
                                              shape.b * delta * shape.base_r});
            validate_annulus(eff, AnnulusSpec{z, shape.c * delta * shape.base_r,
                                              shape.d * delta * shape.base_r});
        }

    const std::size_t nd = delta_grid.size();
    std::vector<std::int64_t> violations(nd, 0);
    std::mutex viol_mu;
    parallel_for(0, replicas, memory_capped_threads(opts, eff.n), [&](std::int64_t rep) {
        const FieldGrid field = sample_gff(eff, seed, std::uint32_t(rep));
        const MollifiedField mol = mollify(field, epsilon);
        const LatticeMetric metric = build_metric(mol, xi);
        std::vector<std::int64_t> local(nd, 0);
        for (std::size_t i = 0; i < nd; ++i) {
            const double delta = delta_grid[i];
            const double bound_factor = std::pow(delta, -zeta);
            for (const auto& z : pts) {
                const double arn = around(
                    metric, AnnulusSpec{z, shape.a * delta * shape.base_r, shape.b * delta * shape.base_r});
                const double acr = across(
                    metric, AnnulusSpec{z, shape.c * delta * shape.base_r, shape.d * delta * shape.base_r});
                if (arn > bound_factor * acr) ++local[i];
            }
        }
        std::lock_guard<std::mutex> lock(viol_mu);
        for (std::size_t i = 0; i < nd; ++i) violations[i] += local[i];
    });

    AnnulusRatioResult out;
    out.xi = xi;
    out.zeta = zeta;
    out.delta_grid.assign(delta_grid.begin(), delta_grid.end());
    out.trials_per_delta = std::int64_t(centers) * replicas;
    for (std::size_t i = 0; i < nd; ++i)
        out.violation_fraction.push_back(double(violations[i]) / double(out.trials_per_delta));
    return out;
}

SingularCensus singular_census(double xi, double q_ref, const GridSpec& grid, double r_min,
                               std::uint64_t seed, int stride, std::uint32_t replica,
                               double region_side) {
    grid.validate();
    if (stride < 4) throw std::invalid_argument("singular_census: stride must be >= 4");
    if (!(q_ref == q_ref)) throw std::invalid_argument("singular_census: q_ref must be a number");
    if (region_side <= 0.0) region_side = grid.side_length / 2.0;
    if (region_side > grid.side_length)
        throw std::invalid_argument("singular_census: region exceeds the domain");
    const FieldGrid field = sample_gff(grid, seed, replica);

    const int n = grid.n;
    const int half_cells = int(std::lround(region_side / (2.0 * grid.spacing())));
    const int first = n / 2 - half_cells;
    const int last = n / 2 + half_cells;
    SingularCensus out;
    out.xi = xi;
    out.q_ref = q_ref;
    out.r_min = r_min;
    for (int y = first; y <= last; y += stride)
        for (int x = first; x <= last; x += stride) {
            const double t = thickness(field, vertex_position(Vertex{x, y}, grid), r_min);
            ++out.total_vertices;
            if (t > q_ref) ++out.exceed_count;
        }
    out.fraction = double(out.exceed_count) / double(out.total_vertices);
    return out;
}

}  // namespace lfpp
