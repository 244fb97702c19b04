#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lfpp/field.hpp"
#include "lfpp/grid.hpp"
#include "lfpp/metric.hpp"

namespace lfpp {

/// Campaign-wide knobs shared by the Monte Carlo drivers.
struct CampaignOptions {
    int threads = 0;  // 0 = hardware concurrency
    /// Largest grid the per-epsilon refinement may request.
    int max_n = 8192;
    /// Memory budget steering how many replicas run concurrently.
    std::int64_t memory_budget_bytes = std::int64_t(3) << 30;
    /// When set, per-replica results are appended here as they complete and
    /// recovered on restart (scratch file, not part of the bit-for-bit
    /// output contract).
    std::optional<std::filesystem::path> partial_path;
    int bootstrap_resamples = 200;
};

/// Per-xi record of an exponent-fit campaign.
struct ExponentFit {
    double xi = 0.0;
    std::vector<double> eps_grid;  // strictly decreasing
    std::vector<double> medians;   // estimated medians per eps
    double slope = 0.0;            // d log median / d log eps
    double q_hat = 0.0;            // (1 - slope) / xi
    double c_m_hat = 0.0;          // 25 - 6 q^2
    std::optional<double> gamma_hat;  // present iff q_hat >= 2
    double stderr_q = 0.0;         // bootstrap standard error of q_hat
    int replicas = 0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct PowerLawFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Quantile summaries of normalized annulus observables across scales.
struct ScaleStats {
    double xi = 0.0;
    double q_used = 0.0;
    std::vector<double> radii;
    // Rows follow `radii`; columns are the 5/25/50/75/95 percent quantiles.
    std::vector<std::array<double, 5>> normalized_across;
    std::vector<std::array<double, 5>> normalized_around;
};

struct SingularCensus {
    double xi = 0.0;
    double q_ref = 0.0;
    double r_min = 0.0;
    std::int64_t total_vertices = 0;
    std::int64_t exceed_count = 0;
    double fraction = 0.0;
};

struct XiCritResult {
    std::optional<std::pair<double, double>> bracket;
    std::optional<double> root_estimate;
    std::vector<ExponentFit> fits;
};

struct AnnulusRatioResult {
    double xi = 0.0;
    double zeta = 0.0;
    std::vector<double> delta_grid;
    std::vector<double> violation_fraction;  // per delta
    std::int64_t trials_per_delta = 0;
};

/// Smallest power-of-two refinement of `base` (same physical extent) with
/// spacing <= epsilon/4; `base` acts as the minimum resolution.
GridSpec refine_for_epsilon(const GridSpec& base, double epsilon, int max_n = 8192);

/// Left-right crossing distances of the centrally embedded unit square, one
/// value per replica. The workhorse behind the median estimator.
std::vector<double> crossing_samples(double xi, double epsilon, int replicas, const GridSpec& grid,
                                     std::uint64_t seed, const CampaignOptions& opts = {});

/// Median crossing distance of the unit square over independent replicas;
/// the discrete stand-in for the normalizing median. replicas >= 10, odd
/// preferred.
double estimate_a_eps(double xi, double epsilon, int replicas, const GridSpec& grid,
                      std::uint64_t seed, const CampaignOptions& opts = {});

/// Ordinary least squares of log(y) on log(x).
PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y);

/// Full exponent campaign: medians over the eps grid, log-log slope,
/// q = (1 - slope)/xi, central charge, gamma when defined, and a bootstrap
/// standard error from replica resampling.
ExponentFit fit_q(double xi, std::span<const double> eps_grid, int replicas, const GridSpec& grid,
                  std::uint64_t seed, const CampaignOptions& opts = {});

/// Assembles an ExponentFit from externally supplied medians (no sampling);
/// used to validate the regression against synthetic power laws.
ExponentFit fit_q_from_medians(double xi, std::span<const double> eps_grid,
                               std::span<const double> medians);

double central_charge(double q);

/// gamma in (0, 2] solving 2/gamma + gamma/2 = q; empty when q < 2.
std::optional<double> gamma_from_q(double q);

/// Runs fit_q per xi (common random numbers across the grid) and brackets the
/// crossing of q_hat through 2 by monotone piecewise-linear interpolation.
/// No sign change is reported as an empty bracket, not an error.
XiCritResult estimate_xi_crit(std::span<const double> xi_grid, std::span<const double> eps_grid,
                              int replicas, const GridSpec& grid, std::uint64_t seed,
                              const CampaignOptions& opts = {});
XiCritResult xi_crit_from_fits(std::span<const ExponentFit> fits);

/// Tightness-across-scales summary: per radius r, quantiles of
/// r^{-xi q} e^{-xi h_r(0)} D(across rA) and the around analogue, with
/// A = the annulus template {center, inner_ratio, outer_ratio}.
struct AnnulusTemplate {
    double inner_ratio = 1.0;
    double outer_ratio = 2.0;
};
ScaleStats tightness_stats(double xi, double q_used, std::span<const double> radii,
                           const AnnulusTemplate& shape, double epsilon, int replicas,
                           const GridSpec& grid, std::uint64_t seed,
                           const CampaignOptions& opts = {});

/// Lemma-shaped ratio check: fraction of (center, delta, replica) triples
/// with around(A_{a dr, b dr}) > delta^{-zeta} across(A_{c dr, d dr}).
struct AnnulusRatioShape {
    double a = 1.0, b = 2.0;  // around annulus, multiples of delta*r
    double c = 3.0, d = 4.0;  // across annulus
    double base_r = 1.0;
};
AnnulusRatioResult annulus_ratio_check(double xi, std::span<const double> delta_grid, double zeta,
                                       int centers, int replicas, double epsilon,
                                       const GridSpec& grid, std::uint64_t seed,
                                       const AnnulusRatioShape& shape = {},
                                       const CampaignOptions& opts = {});

/// Thickness census on a stride-subsampled centered square, counting
/// vertices with thickness > q_ref. region_side <= 0 selects the default
/// central quarter by area (side L/2).
SingularCensus singular_census(double xi, double q_ref, const GridSpec& grid, double r_min,
                               std::uint64_t seed, int stride = 4, std::uint32_t replica = 0,
                               double region_side = 0.0);

double median_of(std::vector<double> values);

}  // namespace lfpp
