#include "lfpp/metric.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace lfpp {

LatticeMetric::LatticeMetric(GridSpec grid, double xi, std::shared_ptr<const Eigen::ArrayXXd> phi,
                             std::shared_ptr<const std::vector<std::uint8_t>> mask)
    : grid_(grid), xi_(xi), phi_(std::move(phi)), mask_(std::move(mask)) {
    grid_.validate();
    if (!(xi_ > 0.0)) throw std::invalid_argument("LatticeMetric: xi must be positive");
    if (phi_->rows() != grid_.n || phi_->cols() != grid_.n)
        throw std::invalid_argument("LatticeMetric: field shape does not match grid");
    if (mask_ && std::int64_t(mask_->size()) != grid_.vertex_count())
        throw std::invalid_argument("LatticeMetric: mask size does not match grid");
    if (!phi_->allFinite()) throw std::invalid_argument("LatticeMetric: field has non-finite values");
    // The edge weight exp(xi*(phi(u)+phi(v))/2)*len factors into per-site
    // terms exp(xi*phi/2); precomputing them makes relaxation exp-free.
    const Eigen::ArrayXXd f = (0.5 * xi_ * (*phi_)).exp();
    site_factor_.assign(f.data(), f.data() + f.size());
}

double LatticeMetric::edge_weight(Vertex u, Vertex v) const {
    const int n = grid_.n;
    const int dx = std::abs(wrap_index(u.x - v.x, n));
    const int dy = std::abs(wrap_index(u.y - v.y, n));
    const int ddx = std::min(dx, n - dx), ddy = std::min(dy, n - dy);
    if (ddx > 1 || ddy > 1 || (ddx == 0 && ddy == 0))
        throw std::invalid_argument("edge_weight: vertices are not 8-neighbors");
    const double len = (ddx + ddy == 2) ? grid_.spacing() * M_SQRT2 : grid_.spacing();
    return edge_weight_fast(flat_index(u, n), flat_index(v, n), len);
}

LatticeMetric build_metric(const MollifiedField& phi, double xi,
                           std::shared_ptr<const std::vector<std::uint8_t>> mask) {
    return LatticeMetric(phi.spec(), xi, std::make_shared<Eigen::ArrayXXd>(phi.values),
                         std::move(mask));
}

LatticeMetric build_metric_from_values(const GridSpec& grid, const Eigen::ArrayXXd& values,
                                       double xi,
                                       std::shared_ptr<const std::vector<std::uint8_t>> mask) {
    return LatticeMetric(grid, xi, std::make_shared<Eigen::ArrayXXd>(values), std::move(mask));
}

// ---------------------------------------------------------------------------
// Region

Region Region::all(const GridSpec& g) {
    Region r;
    r.n = g.n;
    r.x0 = r.y0 = 0;
    r.w = r.h = g.n;
    r.member_.assign(std::size_t(g.vertex_count()), 1);
    r.count_ = g.vertex_count();
    return r;
}

Region Region::box(const GridSpec& g, int x0, int y0, int w, int h) {
    if (w <= 0 || h <= 0 || w > g.n || h > g.n) throw std::invalid_argument("Region::box: bad size");
    Region r;
    r.n = g.n;
    r.x0 = wrap_index(x0, g.n);
    r.y0 = wrap_index(y0, g.n);
    r.w = w;
    r.h = h;
    r.member_.assign(std::size_t(w) * h, 1);
    r.count_ = std::int64_t(w) * h;
    return r;
}

Region Region::annulus(const GridSpec& g, const AnnulusSpec& a) {
    validate_annulus(g, a);
    const double s = g.spacing();
    const int margin = 2;
    const int cells = int(std::ceil(a.r_outer / s)) + margin;
    const int cx = int(std::lround(a.center.x / s));
    const int cy = int(std::lround(a.center.y / s));
    const int w = std::min(2 * cells + 1, g.n);
    Region r;
    r.n = g.n;
    r.x0 = wrap_index(cx - cells, g.n);
    r.y0 = wrap_index(cy - cells, g.n);
    r.w = w;
    r.h = w;
    r.member_.assign(std::size_t(w) * w, 0);
    for (int ly = 0; ly < w; ++ly)
        for (int lx = 0; lx < w; ++lx) {
            const Vertex v{wrap_index(r.x0 + lx, g.n), wrap_index(r.y0 + ly, g.n)};
            const double d = torus_distance(vertex_position(v, g), a.center, g.side_length);
            if (d >= a.r_inner && d <= a.r_outer) {
                r.member_[std::size_t(lx) + std::size_t(w) * ly] = 1;
                ++r.count_;
            }
        }
    return r;
}

Region Region::from_vertices(const GridSpec& g, std::span<const Vertex> vertices) {
    Region r;
    r.n = g.n;
    r.x0 = r.y0 = 0;
    r.w = r.h = g.n;
    r.member_.assign(std::size_t(g.vertex_count()), 0);
    for (const auto& v : vertices) {
        auto& cell = r.member_[std::size_t(flat_index(v, g.n))];
        if (!cell) {
            cell = 1;
            ++r.count_;
        }
    }
    return r;
}

bool Region::contains(Vertex v) const {
    const auto idx = local_index(v);
    return idx >= 0 && member_[std::size_t(idx)] != 0;
}

std::vector<Vertex> Region::vertices() const {
    std::vector<Vertex> out;
    out.reserve(std::size_t(count_));
    for (std::int64_t i = 0; i < std::int64_t(member_.size()); ++i)
        if (member_[std::size_t(i)]) out.push_back(from_local(i));
    return out;
}

std::vector<Vertex> DistanceField::path_to(Vertex v) const {
    std::vector<Vertex> rev;
    auto idx = region.local_index(v);
    if (idx < 0 || dist[std::size_t(idx)] == kUnreachable) return {};
    while (idx >= 0) {
        rev.push_back(region.from_local(idx));
        idx = pred[std::size_t(idx)];
    }
    std::reverse(rev.begin(), rev.end());
    return rev;
}

// ---------------------------------------------------------------------------
// Dijkstra

namespace {

struct NeighborOffsets {
    int dx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    int dy[8] = {0, 0, 1, -1, 1, -1, 1, -1};
};
constexpr NeighborOffsets kNbr;

using HeapEntry = std::pair<double, std::int64_t>;
using MinHeap = std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>>;

}  // namespace

DistanceField shortest_paths(const LatticeMetric& metric, const Region& region,
                             std::span<const Vertex> sources, std::span<const Vertex> targets,
                             std::optional<double> radius_cap, std::size_t stop_after_targets) {
    const GridSpec& g = metric.grid();
    const int n = g.n;
    const int w = region.w, h = region.h;
    const bool full = (w == n && h == n);
    const double s = g.spacing();
    const double len_by_diag[2] = {s, s * M_SQRT2};

    // Global coordinates per local row/column, so flat indices need no
    // modular arithmetic in the inner loop.
    std::vector<std::int64_t> gx(static_cast<std::size_t>(w)), gyn(static_cast<std::size_t>(h));
    for (int i = 0; i < w; ++i) gx[std::size_t(i)] = wrap_index(region.x0 + i, n);
    for (int j = 0; j < h; ++j) gyn[std::size_t(j)] = std::int64_t(n) * wrap_index(region.y0 + j, n);

    DistanceField out;
    out.region = region;
    const std::size_t cells = std::size_t(w) * h;
    out.dist.assign(cells, kUnreachable);
    out.pred.assign(cells, -1);
    std::vector<std::uint8_t> settled(cells, 0);

    MinHeap heap;
    for (const auto& v : sources) {
        const auto li = region.local_index(v);
        if (li < 0 || !region.member_local(li))
            throw std::invalid_argument("shortest_paths: source outside region");
        if (metric.masked(v)) throw std::invalid_argument("shortest_paths: source is masked");
        out.dist[std::size_t(li)] = 0.0;
        heap.emplace(0.0, li);
    }

    std::vector<std::uint8_t> is_target(targets.empty() ? 0 : cells, 0);
    std::size_t targets_left = 0;
    for (const auto& v : targets) {
        const auto li = region.local_index(v);
        if (li >= 0 && !is_target[std::size_t(li)]) {
            is_target[std::size_t(li)] = 1;
            ++targets_left;
        }
    }
    if (stop_after_targets == 0 || stop_after_targets > targets_left)
        stop_after_targets = targets_left;

    while (!heap.empty()) {
        const auto [d, li] = heap.top();
        heap.pop();
        if (settled[std::size_t(li)]) continue;
        if (radius_cap && d > *radius_cap) break;
        settled[std::size_t(li)] = 1;
        if (!targets.empty() && is_target[std::size_t(li)] && --stop_after_targets == 0) break;

        const int lx = int(li % w), ly = int(li / w);
        const std::int64_t uflat = gx[std::size_t(lx)] + gyn[std::size_t(ly)];
        for (int e = 0; e < 8; ++e) {
            int nx = lx + kNbr.dx[e], ny = ly + kNbr.dy[e];
            if (full) {
                nx &= n - 1;
                ny &= n - 1;
            } else if (nx < 0 || nx >= w || ny < 0 || ny >= h) {
                continue;
            }
            const std::int64_t lj = std::int64_t(nx) + std::int64_t(w) * ny;
            if (settled[std::size_t(lj)] || !region.member_local(lj)) continue;
            const std::int64_t vflat = gx[std::size_t(nx)] + gyn[std::size_t(ny)];
            if (metric.has_mask() &&
                metric.masked(Vertex{int(vflat % n), int(vflat / n)}))
                continue;
            const double nd =
                d + metric.edge_weight_fast(uflat, vflat, len_by_diag[e >= 4]);
            double& cur = out.dist[std::size_t(lj)];
            if (nd < cur) {
                cur = nd;
                out.pred[std::size_t(lj)] = std::int32_t(li);
                heap.emplace(nd, lj);
            } else if (nd == cur && out.pred[std::size_t(lj)] >= 0) {
                // Deterministic tie-breaking: keep the lexicographically
                // smallest predecessor (by global flat index).
                const auto cand = uflat;
                const auto curpred = out.pred[std::size_t(lj)];
                const std::int64_t curflat = gx[std::size_t(curpred % w)] + gyn[std::size_t(curpred / w)];
                if (cand < curflat) out.pred[std::size_t(lj)] = std::int32_t(li);
            }
        }
    }
    // Erase padding: sources that were masked off or never reached keep the
    // sentinel; unsettled-but-relaxed vertices beyond an early exit keep
    // their tentative labels, which callers must not rely on.
    return out;
}

bool audit_relaxed(const LatticeMetric& metric, const DistanceField& table) {
    const GridSpec& g = metric.grid();
    const int n = g.n;
    const double s = g.spacing();
    for (std::int64_t li = 0; li < std::int64_t(table.dist.size()); ++li) {
        if (!table.region.member_local(li)) continue;
        const Vertex u = table.region.from_local(li);
        if (metric.masked(u) || table.dist[std::size_t(li)] == kUnreachable) continue;
        for (int e = 0; e < 8; ++e) {
            const Vertex v{wrap_index(u.x + kNbr.dx[e], n), wrap_index(u.y + kNbr.dy[e], n)};
            const auto lj = table.region.local_index(v);
            if (lj < 0 || !table.region.member_local(lj) || metric.masked(v)) continue;
            const double len = (e >= 4) ? s * M_SQRT2 : s;
            const double bound = table.dist[std::size_t(li)] +
                                 metric.edge_weight_fast(flat_index(u, n), flat_index(v, n), len);
            if (table.dist[std::size_t(lj)] > bound * (1.0 + 1e-12)) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Set queries

namespace {

void validate_set(const LatticeMetric& metric, std::span<const Vertex> set, const char* name) {
    if (set.empty()) throw std::invalid_argument(std::string("distance: empty set ") + name);
    for (const auto& v : set)
        if (metric.masked(v))
            throw std::invalid_argument(std::string("distance: masked vertex in set ") + name);
}

void validate_disjoint(const GridSpec& g, std::span<const Vertex> A, std::span<const Vertex> B) {
    std::unordered_set<std::int64_t> a;
    a.reserve(A.size() * 2);
    for (const auto& v : A) a.insert(flat_index(v, g.n));
    for (const auto& v : B)
        if (a.count(flat_index(v, g.n)))
            throw std::invalid_argument("distance: sets A and B overlap");
}

/// First settled target realizes the set-to-set minimum.
std::optional<Vertex> best_target(const DistanceField& table, std::span<const Vertex> targets) {
    std::optional<Vertex> best;
    double bd = kUnreachable;
    for (const auto& t : targets) {
        const double d = table.at(t);
        if (d < bd) {
            bd = d;
            best = t;
        }
    }
    return bd == kUnreachable ? std::nullopt : best;
}

}  // namespace

DistanceResult distance(const LatticeMetric& metric, std::span<const Vertex> A,
                        std::span<const Vertex> B) {
    validate_set(metric, A, "A");
    validate_set(metric, B, "B");
    validate_disjoint(metric.grid(), A, B);
    const Region region = Region::all(metric.grid());
    // Early exit at the first settled target is exact: Dijkstra settles in
    // nondecreasing distance order.
    const auto table = shortest_paths(metric, region, A, B, std::nullopt, 1);
    const auto t = best_target(table, B);
    DistanceResult out;
    if (!t) return out;
    out.distance = table.at(*t);
    out.path.vertices = table.path_to(*t);
    out.path.length = out.distance;
    return out;
}

double internal_distance(const LatticeMetric& metric, std::span<const Vertex> A,
                         std::span<const Vertex> B, const Region& region) {
    validate_set(metric, A, "A");
    validate_set(metric, B, "B");
    validate_disjoint(metric.grid(), A, B);
    for (const auto& v : A)
        if (!region.contains(v)) throw std::invalid_argument("internal_distance: A outside region");
    for (const auto& v : B)
        if (!region.contains(v)) throw std::invalid_argument("internal_distance: B outside region");
    const auto table = shortest_paths(metric, region, A, B, std::nullopt, 1);
    const auto t = best_target(table, B);
    return t ? table.at(*t) : kUnreachable;
}

// ---------------------------------------------------------------------------
// Annuli

void validate_annulus(const GridSpec& g, const AnnulusSpec& a) {
    const double s = g.spacing();
    if (!(a.r_inner >= 2.0 * s))
        throw std::invalid_argument("annulus: r_inner must be >= 2*spacing");
    if (!(a.r_inner < a.r_outer)) throw std::invalid_argument("annulus: need r_inner < r_outer");
    if (!(a.r_outer <= g.side_length / 2.0))
        throw std::invalid_argument("annulus: r_outer must be <= L/2");
}

namespace {

double center_dist(const GridSpec& g, const AnnulusSpec& a, Vertex v) {
    return torus_distance(vertex_position(v, g), a.center, g.side_length);
}

std::vector<Vertex> annulus_boundary(const GridSpec& g, const AnnulusSpec& a, bool inner) {
    std::vector<Vertex> out;
    const Region region = Region::annulus(g, a);
    for (int ly = 0; ly < region.h; ++ly)
        for (int lx = 0; lx < region.w; ++lx) {
            const std::int64_t li = std::int64_t(lx) + std::int64_t(region.w) * ly;
            if (!region.member_local(li)) continue;
            const Vertex v = region.from_local(li);
            bool edge = false;
            for (int e = 0; e < 8 && !edge; ++e) {
                const Vertex u{wrap_index(v.x + kNbr.dx[e], g.n), wrap_index(v.y + kNbr.dy[e], g.n)};
                const double d = center_dist(g, a, u);
                edge = inner ? (d < a.r_inner) : (d > a.r_outer);
            }
            if (edge) out.push_back(v);
        }
    return out;
}

}  // namespace

std::vector<Vertex> annulus_inner_boundary(const GridSpec& g, const AnnulusSpec& a) {
    return annulus_boundary(g, a, true);
}
std::vector<Vertex> annulus_outer_boundary(const GridSpec& g, const AnnulusSpec& a) {
    return annulus_boundary(g, a, false);
}

double across(const LatticeMetric& metric, const AnnulusSpec& a) {
    const GridSpec& g = metric.grid();
    validate_annulus(g, a);
    const auto inner = annulus_inner_boundary(g, a);
    const auto outer = annulus_outer_boundary(g, a);
    if (inner.empty() || outer.empty())
        throw std::invalid_argument("across: annulus has an empty boundary set");
    {
        std::unordered_set<std::int64_t> inner_set;
        for (const auto& v : inner) inner_set.insert(flat_index(v, g.n));
        for (const auto& v : outer)
            if (inner_set.count(flat_index(v, g.n)))
                throw std::invalid_argument(
                    "across: annulus too thin, boundary vertex sets intersect");
    }
    const Region region = Region::annulus(g, a);
    return internal_distance(metric, inner, outer, region);
}

// ---------------------------------------------------------------------------
// around: slit-duplication shortest separating cycle

namespace {

struct SlitLayout {
    Region region;
    int row = 0;                 // slit row (torus y)
    int x_begin = 0, x_end = 0;  // inclusive torus x range of slit vertices
    std::vector<std::int64_t> slit_local;  // local indices, west to east
};

SlitLayout make_slit(const GridSpec& g, const AnnulusSpec& a) {
    SlitLayout sl;
    sl.region = Region::annulus(g, a);
    const double s = g.spacing();
    sl.row = wrap_index(int(std::lround(a.center.y / s)), g.n);
    const int cx = int(std::lround(a.center.x / s));
    // Walk east from the center until membership starts, then ends.
    int x = cx;
    while (!sl.region.contains(Vertex{wrap_index(x, g.n), sl.row})) {
        ++x;
        if (x - cx > g.n) throw std::invalid_argument("around: slit does not meet the annulus");
    }
    sl.x_begin = x;
    while (sl.region.contains(Vertex{wrap_index(x + 1, g.n), sl.row})) ++x;
    sl.x_end = x;
    for (int xi = sl.x_begin; xi <= sl.x_end; ++xi)
        sl.slit_local.push_back(sl.region.local_index(Vertex{wrap_index(xi, g.n), sl.row}));
    return sl;
}

}  // namespace

bool separates_annulus(const LatticeMetric& metric, const AnnulusSpec& a,
                       std::span<const Vertex> cycle) {
    // Curve-level separation: a 4-step cannot cross an 8-step polyline except
    // at a shared vertex, so removing the cycle vertices and 4-flooding from
    // the hole decides whether the closed curve encloses it. The flood runs
    // over the whole bounding window (membership is irrelevant to paths in
    // the plane); reaching any cell beyond the outer radius is a leak.
    const GridSpec& g = metric.grid();
    const Region region = Region::annulus(g, a);
    const int w = region.w, h = region.h;
    std::vector<std::uint8_t> blocked(std::size_t(w) * h, 0);
    for (const auto& v : cycle) {
        const auto li = region.local_index(v);
        if (li >= 0) blocked[std::size_t(li)] = 1;
    }
    std::vector<std::uint8_t> seen(blocked.size(), 0);
    std::vector<std::int64_t> stack;
    for (std::int64_t li = 0; li < std::int64_t(blocked.size()); ++li) {
        if (blocked[std::size_t(li)]) continue;
        if (center_dist(g, a, region.from_local(li)) < a.r_inner) {
            seen[std::size_t(li)] = 1;
            stack.push_back(li);
        }
    }
    const int dx4[4] = {1, -1, 0, 0}, dy4[4] = {0, 0, 1, -1};
    while (!stack.empty()) {
        const auto li = stack.back();
        stack.pop_back();
        if (center_dist(g, a, region.from_local(li)) > a.r_outer) return false;
        const int lx = int(li % w), ly = int(li / w);
        for (int e = 0; e < 4; ++e) {
            const int nx = lx + dx4[e], ny = ly + dy4[e];
            if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
            const auto lj = std::int64_t(nx) + std::int64_t(w) * ny;
            if (seen[std::size_t(lj)] || blocked[std::size_t(lj)]) continue;
            seen[std::size_t(lj)] = 1;
            stack.push_back(lj);
        }
    }
    return true;
}

CycleResult around_cycle(const LatticeMetric& metric, const AnnulusSpec& a) {
    const GridSpec& g = metric.grid();
    validate_annulus(g, a);
    const SlitLayout sl = make_slit(g, a);
    const Region& region = sl.region;
    const int n = g.n;
    const int w = region.w, h = region.h;
    const double s = g.spacing();
    const double len_by_diag[2] = {s, s * M_SQRT2};

    // The annulus must be thick enough that blocking all of it separates the
    // hole from the outside; otherwise no in-annulus cycle can either.
    {
        std::vector<Vertex> band;
        for (std::int64_t li = 0; li < std::int64_t(std::size_t(w) * h); ++li)
            if (region.member_local(li)) band.push_back(region.from_local(li));
        if (!separates_annulus(metric, a, band))
            throw std::invalid_argument("around: annulus too thin for a separating cycle");
    }

    // Duplicated graph: every slit vertex exists as a LEFT (approached from
    // above, y = row+1) and RIGHT (from below) copy; all other annulus
    // vertices have a single copy. Node ids: local index for plain vertices
    // and for slit-LEFT; w*h + slit position for slit-RIGHT.
    const std::size_t cells = std::size_t(w) * h;
    std::vector<std::int32_t> slit_pos(cells, -1);
    for (std::size_t i = 0; i < sl.slit_local.size(); ++i)
        slit_pos[std::size_t(sl.slit_local[i])] = std::int32_t(i);
    const std::size_t node_count = cells + sl.slit_local.size();

    std::vector<std::int64_t> gx(static_cast<std::size_t>(w)), gyn(static_cast<std::size_t>(h));
    for (int i = 0; i < w; ++i) gx[std::size_t(i)] = wrap_index(region.x0 + i, n);
    for (int j = 0; j < h; ++j) gyn[std::size_t(j)] = std::int64_t(n) * wrap_index(region.y0 + j, n);

    const auto flat_of_local = [&](std::int64_t li) {
        return gx[std::size_t(li % w)] + gyn[std::size_t(li / w)];
    };
    const auto masked_local = [&](std::int64_t li) {
        if (!metric.has_mask()) return false;
        const auto f = flat_of_local(li);
        return metric.masked(Vertex{int(f % n), int(f / n)});
    };

    double best = kUnreachable;
    std::vector<Vertex> best_cycle;
    std::vector<double> dist(node_count);
    std::vector<std::int32_t> pred(node_count);
    std::vector<std::uint8_t> settled(node_count);

    for (std::size_t start = 0; start < sl.slit_local.size(); ++start) {
        const std::int64_t s_local = sl.slit_local[start];
        if (masked_local(s_local)) continue;
        const std::int64_t src = s_local;                       // LEFT copy
        const std::int64_t dst = std::int64_t(cells + start);   // RIGHT copy

        std::fill(dist.begin(), dist.end(), kUnreachable);
        std::fill(pred.begin(), pred.end(), -1);
        std::fill(settled.begin(), settled.end(), 0);
        MinHeap heap;
        dist[std::size_t(src)] = 0.0;
        heap.emplace(0.0, src);

        while (!heap.empty()) {
            const auto [d, node] = heap.top();
            heap.pop();
            if (settled[std::size_t(node)]) continue;
            if (d >= best) break;  // cannot beat the incumbent cycle
            settled[std::size_t(node)] = 1;
            if (node == dst) break;

            const bool right_copy = node >= std::int64_t(cells);
            const std::int64_t li = right_copy ? sl.slit_local[std::size_t(node - cells)] : node;
            const bool on_slit = slit_pos[std::size_t(li)] >= 0;
            const int lx = int(li % w), ly = int(li / w);
            const std::int64_t uflat = gx[std::size_t(lx)] + gyn[std::size_t(ly)];

            for (int e = 0; e < 8; ++e) {
                const int nx = lx + kNbr.dx[e], ny = ly + kNbr.dy[e];
                if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                const std::int64_t lj = std::int64_t(nx) + std::int64_t(w) * ny;
                if (!region.member_local(lj) || masked_local(lj)) continue;
                const std::int32_t spv = slit_pos[std::size_t(lj)];
                std::int64_t to;
                if (spv >= 0) {
                    // Entering the slit: pick the copy matching the approach
                    // side; along the slit row, stay on the current copy.
                    if (ny == ly) {
                        if (!on_slit) continue;  // cannot happen: guarded by membership
                        to = right_copy ? std::int64_t(cells + spv) : lj;
                    } else {
                        // Moving down (dy < 0) lands on the slit from above,
                        // i.e. on the LEFT copy; moving up lands on RIGHT.
                        to = (kNbr.dy[e] < 0) ? lj : std::int64_t(cells + spv);
                    }
                } else {
                    if (on_slit) {
                        // Leaving the slit: only to the side this copy faces.
                        if (ny == ly) continue;  // non-member handled above
                        const bool upward = kNbr.dy[e] > 0;
                        if (upward != !right_copy) continue;  // LEFT faces up, RIGHT faces down
                    }
                    to = lj;
                }
                if (settled[std::size_t(to)]) continue;
                const std::int64_t vflat = gx[std::size_t(nx)] + gyn[std::size_t(ny)];
                const double nd = d + metric.edge_weight_fast(uflat, vflat, len_by_diag[e >= 4]);
                if (nd < dist[std::size_t(to)]) {
                    dist[std::size_t(to)] = nd;
                    pred[std::size_t(to)] = std::int32_t(node);
                    heap.emplace(nd, to);
                }
            }
        }

        if (dist[std::size_t(dst)] < best) {
            best = dist[std::size_t(dst)];
            best_cycle.clear();
            std::int64_t node = dst;
            while (node >= 0) {
                const std::int64_t li =
                    node >= std::int64_t(cells) ? sl.slit_local[std::size_t(node - cells)] : node;
                best_cycle.push_back(region.from_local(li));
                node = pred[std::size_t(node)];
            }
        }
    }

    CycleResult out;
    if (best == kUnreachable) {
        if (!metric.has_mask())
            throw std::logic_error("around: no separating cycle found on unmasked metric");
        return out;  // masked off: +inf sentinel
    }

    // The walk starts and ends at the same slit vertex; drop the duplicate.
    if (best_cycle.size() >= 2 && best_cycle.front() == best_cycle.back()) best_cycle.pop_back();

    if (!separates_annulus(metric, a, best_cycle)) {
        std::string msg = "around: audit failed, returned cycle does not separate:";
        for (const auto& v : best_cycle)
            msg += " (" + std::to_string(v.x) + "," + std::to_string(v.y) + ")";
        throw std::logic_error(msg);
    }

    // Canonical weight: sort the traversed edges by endpoint indices and sum,
    // so identical cycles produce bit-identical totals however they were found.
    std::vector<std::pair<std::pair<std::int64_t, std::int64_t>, double>> edges;
    edges.reserve(best_cycle.size());
    for (std::size_t i = 0; i < best_cycle.size(); ++i) {
        const Vertex u = best_cycle[i];
        const Vertex v = best_cycle[(i + 1) % best_cycle.size()];
        const auto fu = flat_index(u, n), fv = flat_index(v, n);
        edges.push_back({{std::min(fu, fv), std::max(fu, fv)}, metric.edge_weight(u, v)});
    }
    std::sort(edges.begin(), edges.end(),
              [](const auto& a_, const auto& b_) { return a_.first < b_.first; });
    double canonical = 0.0;
    for (const auto& e : edges) canonical += e.second;

    out.weight = canonical;
    out.cycle = std::move(best_cycle);
    return out;
}

double around(const LatticeMetric& metric, const AnnulusSpec& a) {
    return around_cycle(metric, a).weight;
}

// ---------------------------------------------------------------------------
// Crossings, geodesics, balls

double crossing_distance(const LatticeMetric& metric, double side, Point origin) {
    const GridSpec& g = metric.grid();
    const double s = g.spacing();
    const int k = int(std::lround(side / s));
    if (k < 1 || std::abs(k * s - side) > 1e-9 * std::max(side, s))
        throw std::invalid_argument("crossing_distance: side must be a positive lattice multiple");
    if (side > g.side_length / 2.0 + 1e-12)
        throw std::invalid_argument("crossing_distance: square exceeds the central region");
    const int x0 = int(std::lround(origin.x / s));
    const int y0 = int(std::lround(origin.y / s));
    const Region region = Region::box(g, x0, y0, k + 1, k + 1);
    std::vector<Vertex> left, right;
    left.reserve(std::size_t(k) + 1);
    right.reserve(std::size_t(k) + 1);
    for (int j = 0; j <= k; ++j) {
        left.push_back(Vertex{wrap_index(x0, g.n), wrap_index(y0 + j, g.n)});
        right.push_back(Vertex{wrap_index(x0 + k, g.n), wrap_index(y0 + j, g.n)});
    }
    return internal_distance(metric, left, right, region);
}

GeodesicPath geodesic(const LatticeMetric& metric, Vertex z, Vertex w) {
    const GridSpec& g = metric.grid();
    if (flat_index(z, g.n) == flat_index(w, g.n))
        throw std::invalid_argument("geodesic: endpoints must differ");
    if (metric.masked(z) || metric.masked(w))
        throw std::invalid_argument("geodesic: masked endpoint");
    const Region region = Region::all(g);
    const Vertex sources[1] = {z}, targets[1] = {w};
    const auto table = shortest_paths(metric, region, sources, targets);
    const double d = table.at(w);
    if (d == kUnreachable) throw std::runtime_error("geodesic: endpoints are unreachable");
    GeodesicPath out;
    out.vertices = table.path_to(w);
    out.length = d;
    return out;
}

std::vector<Vertex> ball(const LatticeMetric& metric, Vertex z, double s) {
    if (!(s >= 0.0)) throw std::invalid_argument("ball: radius must be >= 0");
    if (metric.masked(z)) throw std::invalid_argument("ball: masked center");
    const GridSpec& g = metric.grid();
    const Region region = Region::all(g);
    const Vertex sources[1] = {z};
    const auto table = shortest_paths(metric, region, sources, {}, s);
    std::vector<Vertex> out;
    for (std::int64_t li = 0; li < std::int64_t(table.dist.size()); ++li)
        if (table.dist[std::size_t(li)] <= s) out.push_back(table.region.from_local(li));
    std::sort(out.begin(), out.end(), [&](Vertex a, Vertex b) {
        return flat_index(a, g.n) < flat_index(b, g.n);
    });
    return out;
}

double confluence_fraction(const LatticeMetric& metric, Vertex z, std::span<const Vertex> targets,
                           int k) {
    const GridSpec& g = metric.grid();
    std::vector<Vertex> uniq;
    {
        std::unordered_set<std::int64_t> seen;
        for (const auto& t : targets)
            if (seen.insert(flat_index(t, g.n)).second) uniq.push_back(t);
    }
    for (const auto& t : uniq) {
        const int dx = std::abs(wrap_index(t.x - z.x, g.n));
        const int dy = std::abs(wrap_index(t.y - z.y, g.n));
        const int hops = std::max(std::min(dx, g.n - dx), std::min(dy, g.n - dy));
        if (hops <= k)
            throw std::invalid_argument("confluence_fraction: target within k hops of source");
    }
    if (uniq.size() < 2) return 1.0;  // zero pairs: vacuously confluent

    const Region region = Region::all(g);
    const Vertex sources[1] = {z};
    const auto table = shortest_paths(metric, region, sources, uniq);
    std::vector<std::vector<Vertex>> prefixes;
    prefixes.reserve(uniq.size());
    for (const auto& t : uniq) {
        auto path = table.path_to(t);
        if (path.empty()) throw std::runtime_error("confluence_fraction: unreachable target");
        path.resize(std::min<std::size_t>(path.size(), std::size_t(k)));
        prefixes.push_back(std::move(path));
    }
    std::int64_t shared = 0, pairs = 0;
    for (std::size_t i = 0; i < prefixes.size(); ++i)
        for (std::size_t j = i + 1; j < prefixes.size(); ++j) {
            ++pairs;
            if (prefixes[i] == prefixes[j]) ++shared;
        }
    return double(shared) / double(pairs);
}

}  // namespace lfpp
