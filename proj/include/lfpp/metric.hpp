#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "lfpp/field.hpp"
#include "lfpp/grid.hpp"

namespace lfpp {

constexpr double kUnreachable = std::numeric_limits<double>::infinity();

/// Exponentially weighted 8-neighbor torus graph: the edge {u, v} weighs
/// exp(xi * (phi(u) + phi(v)) / 2) * |u - v|, with |u - v| either the lattice
/// spacing or spacing * sqrt(2). Vertices in the mask have no usable edges.
/// Immutable once built; queries share it freely across threads.
class LatticeMetric {
  public:
    LatticeMetric() = default;
    LatticeMetric(GridSpec grid, double xi, std::shared_ptr<const Eigen::ArrayXXd> phi,
                  std::shared_ptr<const std::vector<std::uint8_t>> mask);

    const GridSpec& grid() const { return grid_; }
    double xi() const { return xi_; }
    const Eigen::ArrayXXd& phi() const { return *phi_; }
    bool has_mask() const { return mask_ != nullptr; }
    bool masked(Vertex v) const { return mask_ && (*mask_)[std::size_t(flat_index(v, grid_.n))] != 0; }

    double edge_weight(Vertex u, Vertex v) const;

    /// Edge weight from precomputed site factors exp(xi*phi/2); the hot path
    /// for the solvers.
    double edge_weight_fast(std::int64_t u_flat, std::int64_t v_flat, double geom_len) const {
        return site_factor_[std::size_t(u_flat)] * site_factor_[std::size_t(v_flat)] * geom_len;
    }

  private:
    GridSpec grid_;
    double xi_ = 0.0;
    std::shared_ptr<const Eigen::ArrayXXd> phi_;
    std::shared_ptr<const std::vector<std::uint8_t>> mask_;
    std::vector<double> site_factor_;  // exp(xi * phi / 2) per vertex
};

/// Annulus A_{r1,r2}(z) on the torus, radii in physical units.
struct AnnulusSpec {
    Point center;
    double r_inner = 0.0;
    double r_outer = 0.0;
};

struct GeodesicPath {
    std::vector<Vertex> vertices;
    double length = 0.0;

    bool empty() const { return vertices.empty(); }
};

/// Vertex subset with a torus-aligned bounding window; membership is a bitmap
/// over the window. Used to restrict solvers to internal metrics.
class Region {
  public:
    static Region all(const GridSpec& g);
    /// Axis-aligned box of w x h vertices anchored at (x0, y0), torus wrap.
    static Region box(const GridSpec& g, int x0, int y0, int w, int h);
    /// Closed annulus r1 <= |p - center| <= r2 (torus metric).
    static Region annulus(const GridSpec& g, const AnnulusSpec& a);
    static Region from_vertices(const GridSpec& g, std::span<const Vertex> vertices);

    bool contains(Vertex v) const;
    std::vector<Vertex> vertices() const;
    std::int64_t size() const { return count_; }

    int x0 = 0, y0 = 0, w = 0, h = 0;  // window, torus coordinates
    int n = 0;

    /// Local window coordinates of v, or -1 if outside the window.
    std::int64_t local_index(Vertex v) const {
        const int lx = wrap_index(v.x - x0, n);
        const int ly = wrap_index(v.y - y0, n);
        if (lx >= w || ly >= h) return -1;
        return std::int64_t(lx) + std::int64_t(w) * ly;
    }
    Vertex from_local(std::int64_t idx) const {
        return Vertex{wrap_index(x0 + int(idx % w), n), wrap_index(y0 + int(idx / w), n)};
    }
    bool member_local(std::int64_t idx) const { return member_[std::size_t(idx)] != 0; }

  private:
    std::vector<std::uint8_t> member_;
    std::int64_t count_ = 0;
};

/// Single-source (or multi-source) shortest-path table over a region window.
struct DistanceField {
    Region region;
    std::vector<double> dist;        // by local window index; kUnreachable if not reached
    std::vector<std::int32_t> pred;  // local index of predecessor; -1 for sources/unreached

    double at(Vertex v) const {
        const auto idx = region.local_index(v);
        return idx < 0 ? kUnreachable : dist[std::size_t(idx)];
    }
    /// Path from the source tree to v; empty if unreached.
    std::vector<Vertex> path_to(Vertex v) const;
};

struct DistanceResult {
    double distance = kUnreachable;
    GeodesicPath path;
};

LatticeMetric build_metric(const MollifiedField& phi, double xi,
                           std::shared_ptr<const std::vector<std::uint8_t>> mask = nullptr);

/// Metric over explicit site values (used by the Weyl checks, which perturb
/// the mollified field pointwise).
LatticeMetric build_metric_from_values(const GridSpec& grid, const Eigen::ArrayXXd& values, double xi,
                                       std::shared_ptr<const std::vector<std::uint8_t>> mask = nullptr);

/// Shortest-path table from `sources` restricted to `region`. Stops early
/// once `stop_after_targets` of the targets are settled (0 = all of them) or
/// once the frontier exceeds `radius_cap`. After an early exit only settled
/// entries are final; tentative labels elsewhere are upper bounds.
DistanceField shortest_paths(const LatticeMetric& metric, const Region& region,
                             std::span<const Vertex> sources,
                             std::span<const Vertex> targets = {},
                             std::optional<double> radius_cap = std::nullopt,
                             std::size_t stop_after_targets = 0);

/// Audit pass for complete tables: dist(v) <= dist(u) + w(u, v) on every
/// usable edge (up to 1e-12 relative rounding).
bool audit_relaxed(const LatticeMetric& metric, const DistanceField& table);

/// True if removing `cycle` disconnects the annulus boundaries in the
/// 4-connected complement (the separation notion an 8-step closed polyline
/// blocks exactly).
bool separates_annulus(const LatticeMetric& metric, const AnnulusSpec& a,
                       std::span<const Vertex> cycle);

/// Set-to-set distance inf_{a in A, b in B} d(a, b) with one realizing path.
/// Returns the +inf sentinel and an empty path when B is unreachable.
/// A and B must be nonempty, disjoint, and unmasked.
DistanceResult distance(const LatticeMetric& metric, std::span<const Vertex> A,
                        std::span<const Vertex> B);

/// Distance through paths whose vertices all lie in `region` (internal
/// metric). A and B must be subsets of the region.
double internal_distance(const LatticeMetric& metric, std::span<const Vertex> A,
                         std::span<const Vertex> B, const Region& region);

/// Boundary vertex sets of the closed lattice annulus: inner = vertices
/// adjacent to the hole, outer = vertices adjacent to the outside.
std::vector<Vertex> annulus_inner_boundary(const GridSpec& g, const AnnulusSpec& a);
std::vector<Vertex> annulus_outer_boundary(const GridSpec& g, const AnnulusSpec& a);

void validate_annulus(const GridSpec& g, const AnnulusSpec& a);

/// d(across A): internal distance between the annulus boundaries.
double across(const LatticeMetric& metric, const AnnulusSpec& a);

/// d(around A): weight of the lightest lattice cycle inside the closed
/// annulus separating its boundaries. Found by cutting along the +x radial
/// slit, duplicating slit vertices into left/right copies, and minimizing the
/// left->right shortest path over slit vertices; the winner is audited by a
/// flood-fill disconnection check. The reported weight is the canonical
/// (index-sorted) sum of the cycle's edge weights.
double around(const LatticeMetric& metric, const AnnulusSpec& a);

/// Same as around() but also exposes the realizing cycle.
struct CycleResult {
    double weight = kUnreachable;
    std::vector<Vertex> cycle;
};
CycleResult around_cycle(const LatticeMetric& metric, const AnnulusSpec& a);

/// Internal distance between the left and right edges of the axis-aligned
/// square with lower-left corner `origin` and side `side`, restricted to the
/// square. The square must fit within the central half of the torus.
double crossing_distance(const LatticeMetric& metric, double side, Point origin);

/// Shortest path between two vertices with deterministic lexicographic
/// tie-breaking on the predecessor index.
GeodesicPath geodesic(const LatticeMetric& metric, Vertex z, Vertex w);

/// {v : d(z, v) <= s}, sorted by flat index.
std::vector<Vertex> ball(const LatticeMetric& metric, Vertex z, double s);

/// Fraction of unordered target pairs whose geodesics from z share their
/// first k vertices. Returns 1 by convention when fewer than two distinct
/// targets remain after deduplication.
double confluence_fraction(const LatticeMetric& metric, Vertex z, std::span<const Vertex> targets,
                           int k);

}  // namespace lfpp
