#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lfpp/field.hpp"
#include "lfpp/grid.hpp"
#include "lfpp/metric.hpp"

namespace lfpp {

enum class AxiomTag { LengthSpace, Locality, Weyl, Translation, Tightness, ScalingRelation };
enum class CheckMode { Exact, Statistical };

std::string to_string(AxiomTag tag);
std::string to_string(CheckMode mode);

struct CaseRecord {
    std::string what;
    double error = 0.0;
    bool violated = false;
    bool skipped = false;
};

struct AxiomReport {
    AxiomTag axiom = AxiomTag::LengthSpace;
    CheckMode mode = CheckMode::Exact;
    std::int64_t checked = 0;
    std::int64_t violations = 0;
    double worst_error = 0.0;
    std::vector<CaseRecord> details;

    bool passed() const { return violations == 0; }
    void add(CaseRecord rec);

    nlohmann::json to_json() const;
    static AxiomReport from_json(const nlohmann::json& j);
};

struct BiLipschitzEstimate {
    std::int64_t pairs_sampled = 0;
    std::int64_t excluded = 0;  // infinite in at least one metric
    double c_hat = 0.0;         // min ratio D_b / D_a
    double C_hat = 0.0;         // max ratio D_b / D_a
};

using VertexPair = std::pair<Vertex, Vertex>;

/// Deterministic pseudo-random pairs with Chebyshev separation of at least
/// `min_sep` cells, drawn inside the central square of fractional side
/// `central` (1.0 = whole torus).
std::vector<VertexPair> sample_vertex_pairs(const GridSpec& grid, int count, std::uint64_t seed,
                                            int min_sep = 4, double central = 0.5);

/// Exact metric axioms on sampled pairs: symmetry d(z,w) = d(w,z) (1e-10
/// relative) and the triangle inequality through a third sampled vertex.
AxiomReport check_metric_axioms(const LatticeMetric& metric, std::span<const VertexPair> pairs);

/// Weyl scaling checks against the metric built from phi + f:
///  (i)   constant f: all pair distances scale by exp(xi*c)   [if f constant]
///  (ii)  sandwich: e^{xi min f} D <= D_f <= e^{xi max f} D   [always]
///  (iii) any D-geodesic, reweighted by e^{xi(f(u)+f(v))/2}, is >= D_f.
/// Violation threshold: 1e-10 relative.
AxiomReport check_weyl(const MollifiedField& phi, double xi, const Eigen::ArrayXXd& f,
                       std::span<const VertexPair> pairs);

/// Geodesic midpoint decomposition d(z,v) + d(v,w) = d(z,w) at every path
/// vertex, 1e-10 relative. Unreachable pairs are recorded as skipped.
AxiomReport check_length_space(const LatticeMetric& metric, std::span<const VertexPair> pairs);

/// Bit-exact invariance of internal distances within `region` under a
/// perturbation supported away from the region's closed neighborhood.
AxiomReport check_locality(const MollifiedField& phi, double xi, const Region& region,
                           const Eigen::ArrayXXd& perturbation, std::span<const VertexPair> pairs);

/// Two-sample rank test (Mann-Whitney, normal approximation) comparing
/// crossing distances at the centered square against the lattice-shifted
/// location, independent replica sets. Passes when p >= alpha.
/// `injected_bias`, when given, is added to every sampled field (used to
/// demonstrate the test's power against planted non-stationarity).
AxiomReport check_translation(const GridSpec& spec, double xi, double epsilon, Vertex shift,
                              int replicas, std::uint64_t seed, double alpha = 0.01,
                              const Eigen::ArrayXXd* injected_bias = nullptr);

/// Compares r * D^{eps/r} on the 2x-subsampled field against D^eps on the
/// fine grid (r = 2) over matched vertex pairs (coarse coordinates); reports
/// the median relative discrepancy as worst_error. Statistical mode.
AxiomReport check_scaling_relation(const FieldGrid& fine, double xi, double epsilon,
                                   std::span<const VertexPair> pairs, double pass_threshold = 0.25);

/// Empirical bi-Lipschitz envelope between two metrics on the same grid.
BiLipschitzEstimate compare_metrics(const LatticeMetric& a, const LatticeMetric& b,
                                    std::span<const VertexPair> pairs);

/// Two-sided Mann-Whitney p-value, normal approximation.
double mann_whitney_p(std::span<const double> xs, std::span<const double> ys);

/// 2x decimation: values at even indices, half the vertices over half the
/// extent (same spacing).
FieldGrid subsample_half(const FieldGrid& fine);

}  // namespace lfpp
