#include "lfpp/properties.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "lfpp/rng.hpp"

namespace lfpp {

using nlohmann::json;

std::string to_string(AxiomTag tag) {
    switch (tag) {
        case AxiomTag::LengthSpace: return "length-space";
        case AxiomTag::Locality: return "locality";
        case AxiomTag::Weyl: return "weyl";
        case AxiomTag::Translation: return "translation";
        case AxiomTag::Tightness: return "tightness";
        case AxiomTag::ScalingRelation: return "scaling-relation";
    }
    return "unknown";
}

std::string to_string(CheckMode mode) {
    return mode == CheckMode::Exact ? "exact" : "statistical";
}

namespace {
AxiomTag tag_from_string(const std::string& s) {
    if (s == "length-space") return AxiomTag::LengthSpace;
    if (s == "locality") return AxiomTag::Locality;
    if (s == "weyl") return AxiomTag::Weyl;
    if (s == "translation") return AxiomTag::Translation;
    if (s == "tightness") return AxiomTag::Tightness;
    if (s == "scaling-relation") return AxiomTag::ScalingRelation;
    throw std::invalid_argument("unknown axiom tag: " + s);
}
constexpr double kRelTol = 1e-10;
}  // namespace

void AxiomReport::add(CaseRecord rec) {
    if (!rec.skipped) {
        ++checked;
        if (rec.violated) ++violations;
        worst_error = std::max(worst_error, rec.error);
    }
    details.push_back(std::move(rec));
}

json AxiomReport::to_json() const {
    json cases = json::array();
    for (const auto& c : details)
        cases.push_back({{"what", c.what}, {"error", c.error}, {"violated", c.violated},
                         {"skipped", c.skipped}});
    return json{{"axiom", to_string(axiom)},   {"mode", to_string(mode)},
                {"checked", checked},          {"violations", violations},
                {"worst_error", worst_error},  {"details", cases}};
}

AxiomReport AxiomReport::from_json(const json& j) {
    AxiomReport r;
    r.axiom = tag_from_string(j.at("axiom").get<std::string>());
    r.mode = j.at("mode").get<std::string>() == "exact" ? CheckMode::Exact : CheckMode::Statistical;
    r.checked = j.at("checked").get<std::int64_t>();
    r.violations = j.at("violations").get<std::int64_t>();
    r.worst_error = j.at("worst_error").get<double>();
    for (const auto& c : j.at("details")) {
        CaseRecord rec;
        rec.what = c.at("what").get<std::string>();
        rec.error = c.at("error").get<double>();
        rec.violated = c.at("violated").get<bool>();
        rec.skipped = c.at("skipped").get<bool>();
        r.details.push_back(std::move(rec));
    }
    return r;
}

std::vector<VertexPair> sample_vertex_pairs(const GridSpec& grid, int count, std::uint64_t seed,
                                            int min_sep, double central) {
    grid.validate();
    const CounterRng rng(seed, 0, RngStream::PairSampling);
    const int n = grid.n;
    const int span = std::max(2, int(std::floor(n * central)));
    const int lo = (n - span) / 2;
    std::vector<VertexPair> out;
    out.reserve(std::size_t(count));
    std::uint64_t idx = 0;
    while (int(out.size()) < count) {
        const Vertex a{lo + int(rng.uniform_int(idx, std::uint64_t(span))),
                       lo + int(rng.uniform_int(idx + 1, std::uint64_t(span)))};
        const Vertex b{lo + int(rng.uniform_int(idx + 2, std::uint64_t(span))),
                       lo + int(rng.uniform_int(idx + 3, std::uint64_t(span)))};
        idx += 4;
        const int dx = std::abs(a.x - b.x), dy = std::abs(a.y - b.y);
        if (std::max(dx, dy) < min_sep) continue;
        out.push_back({a, b});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Metric axioms

AxiomReport check_metric_axioms(const LatticeMetric& metric, std::span<const VertexPair> pairs) {
    AxiomReport report;
    report.axiom = AxiomTag::LengthSpace;
    report.mode = CheckMode::Exact;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& [z, w] = pairs[i];
        const Vertex zs[1] = {z}, ws[1] = {w};
        const double dzw = distance(metric, zs, ws).distance;
        const double dwz = distance(metric, ws, zs).distance;
        if (dzw == kUnreachable || dwz == kUnreachable) {
            report.add({"unreachable pair", 0.0, dzw != dwz, false});
            continue;
        }
        const double sym_err = std::abs(dzw - dwz) / dzw;
        report.add({"symmetry", sym_err, sym_err > kRelTol, false});

        // Triangle through the partner vertex of the next sampled pair.
        const Vertex v = pairs[(i + 1) % pairs.size()].first;
        if (flat_index(v, metric.grid().n) == flat_index(z, metric.grid().n) ||
            flat_index(v, metric.grid().n) == flat_index(w, metric.grid().n))
            continue;
        const Vertex vs[1] = {v};
        const double dzv = distance(metric, zs, vs).distance;
        const double dvw = distance(metric, vs, ws).distance;
        if (dzv == kUnreachable || dvw == kUnreachable) continue;
        const double slack = dzw - (dzv + dvw);
        const double tri_err = std::max(0.0, slack / dzw);
        report.add({"triangle inequality", tri_err, tri_err > kRelTol, false});
    }
    return report;
}

// ---------------------------------------------------------------------------
// Weyl

AxiomReport check_weyl(const MollifiedField& phi, double xi, const Eigen::ArrayXXd& f,
                       std::span<const VertexPair> pairs) {
    const GridSpec& g = phi.spec();
    if (f.rows() != g.n || f.cols() != g.n) throw std::invalid_argument("check_weyl: f shape mismatch");
    if (!f.allFinite()) throw std::invalid_argument("check_weyl: f must be finite");

    const LatticeMetric base = build_metric_from_values(g, phi.values, xi);
    const LatticeMetric shifted = build_metric_from_values(g, phi.values + f, xi);
    const double fmin = f.minCoeff();
    const double fmax = f.maxCoeff();
    const bool constant_f = (fmax - fmin) == 0.0;

    AxiomReport report;
    report.axiom = AxiomTag::Weyl;
    report.mode = CheckMode::Exact;

    for (const auto& [z, w] : pairs) {
        const Vertex zs[1] = {z}, ws[1] = {w};
        const auto base_res = distance(base, zs, ws);
        const auto shifted_res = distance(shifted, zs, ws);
        if (base_res.distance == kUnreachable || shifted_res.distance == kUnreachable) {
            report.add({"unreachable pair", 0.0, false, true});
            continue;
        }
        const double d = base_res.distance;
        const double df = shifted_res.distance;

        if (constant_f) {
            const double target = std::exp(xi * fmin) * d;
            const double err = std::abs(df - target) / std::max(target, 1e-300);
            report.add({"constant-shift scaling", err, err > kRelTol, false});
        }

        const double lo = std::exp(xi * fmin) * d;
        const double hi = std::exp(xi * fmax) * d;
        const double viol_lo = std::max(0.0, (lo - df) / std::max(lo, 1e-300));
        const double viol_hi = std::max(0.0, (df - hi) / std::max(hi, 1e-300));
        const double sandwich_err = std::max(viol_lo, viol_hi);
        report.add({"two-sided sandwich", sandwich_err, sandwich_err > kRelTol, false});

        // Reweighting the D_h-geodesic gives some admissible path length for
        // D_{h+f}, hence an upper bound that the true distance cannot exceed.
        double reweighted = 0.0;
        const auto& path = base_res.path.vertices;
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
            const double we = base.edge_weight(path[i], path[i + 1]);
            const double favg = 0.5 * (f(path[i].x, path[i].y) + f(path[i + 1].x, path[i + 1].y));
            reweighted += std::exp(xi * favg) * we;
        }
        const double path_err = std::max(0.0, (df - reweighted) / std::max(reweighted, 1e-300));
        report.add({"geodesic reweighting bound", path_err, path_err > kRelTol, false});
    }
    return report;
}

// ---------------------------------------------------------------------------
// Length space

AxiomReport check_length_space(const LatticeMetric& metric, std::span<const VertexPair> pairs) {
    AxiomReport report;
    report.axiom = AxiomTag::LengthSpace;
    report.mode = CheckMode::Exact;
    const Region region = Region::all(metric.grid());

    for (const auto& [z, w] : pairs) {
        const Vertex zs[1] = {z}, ws[1] = {w};
        const auto res = distance(metric, zs, ws);
        if (res.distance == kUnreachable) {
            report.add({"unreachable pair", 0.0, false, true});
            continue;
        }
        const auto from_z = shortest_paths(metric, region, zs, ws, std::nullopt, 1);
        const auto from_w = shortest_paths(metric, region, ws, zs, std::nullopt, 1);
        double worst = 0.0;
        for (const auto& v : res.path.vertices) {
            const double sum = from_z.at(v) + from_w.at(v);
            worst = std::max(worst, std::abs(sum - res.distance) / res.distance);
        }
        report.add({"geodesic decomposition", worst, worst > kRelTol, false});
    }
    return report;
}

// ---------------------------------------------------------------------------
// Locality

AxiomReport check_locality(const MollifiedField& phi, double xi, const Region& region,
                           const Eigen::ArrayXXd& perturbation, std::span<const VertexPair> pairs) {
    const GridSpec& g = phi.spec();
    if (perturbation.rows() != g.n || perturbation.cols() != g.n)
        throw std::invalid_argument("check_locality: perturbation shape mismatch");
    // The perturbation must vanish on the region and on everything adjacent
    // to it (field values at vertices with an edge into the region do enter
    // the internal metric).
    for (int y = 0; y < g.n; ++y)
        for (int x = 0; x < g.n; ++x) {
            if (perturbation(x, y) == 0.0) continue;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx)
                    if (region.contains(Vertex{wrap_index(x + dx, g.n), wrap_index(y + dy, g.n)}))
                        throw std::invalid_argument(
                            "check_locality: perturbation touches the region closure");
        }

    const LatticeMetric before = build_metric_from_values(g, phi.values, xi);
    const LatticeMetric after = build_metric_from_values(g, phi.values + perturbation, xi);

    AxiomReport report;
    report.axiom = AxiomTag::Locality;
    report.mode = CheckMode::Exact;
    for (const auto& [z, w] : pairs) {
        const Vertex zs[1] = {z}, ws[1] = {w};
        const double a = internal_distance(before, zs, ws, region);
        const double b = internal_distance(after, zs, ws, region);
        const bool same = (a == b) || (a == kUnreachable && b == kUnreachable);
        report.add({"internal distance bit-equality", same ? 0.0 : std::abs(a - b), !same, false});
    }
    return report;
}

// ---------------------------------------------------------------------------
// Translation invariance (statistical)

double mann_whitney_p(std::span<const double> xs, std::span<const double> ys) {
    if (xs.empty() || ys.empty()) throw std::invalid_argument("mann_whitney_p: empty sample");
    std::vector<std::pair<double, int>> all;
    all.reserve(xs.size() + ys.size());
    for (double v : xs) all.push_back({v, 0});
    for (double v : ys) all.push_back({v, 1});
    std::sort(all.begin(), all.end());
    // Midranks for ties.
    std::vector<double> rank(all.size());
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        while (j + 1 < all.size() && all[j + 1].first == all[i].first) ++j;
        const double mid = 0.5 * double(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[k] = mid;
        i = j + 1;
    }
    double rank_sum_x = 0.0;
    for (std::size_t i = 0; i < all.size(); ++i)
        if (all[i].second == 0) rank_sum_x += rank[i];
    const double nx = double(xs.size()), ny = double(ys.size());
    const double u = rank_sum_x - nx * (nx + 1.0) / 2.0;
    const double mean = nx * ny / 2.0;
    const double sd = std::sqrt(nx * ny * (nx + ny + 1.0) / 12.0);
    const double z = (u - mean) / sd;
    return std::erfc(std::abs(z) / M_SQRT2);
}

AxiomReport check_translation(const GridSpec& spec, double xi, double epsilon, Vertex shift,
                              int replicas, std::uint64_t seed, double alpha,
                              const Eigen::ArrayXXd* injected_bias) {
    spec.validate();
    if (replicas < 10) throw std::invalid_argument("check_translation: need >= 10 replicas");
    if (spec.side_length < 4.0)
        throw std::invalid_argument("check_translation: domain too small for shifted squares");

    const double s = spec.spacing();
    const Point c = grid_center(spec);
    const Point origin_a{c.x - 0.5, c.y - 0.5};
    const Point origin_b{origin_a.x + shift.x * s, origin_a.y + shift.y * s};

    // Both locations are read off the same replicas: distributions match by
    // stationarity, a zero shift compares identical samples, and any shared
    // large-scale randomness only makes the rank test conservative.
    std::vector<double> at_a(static_cast<std::size_t>(replicas)), at_b(static_cast<std::size_t>(replicas));
    for (int r = 0; r < replicas; ++r) {
        const FieldGrid field = [&] {
            FieldGrid f = sample_gff(spec, seed, std::uint32_t(r));
            if (injected_bias) f = add_function(f, *injected_bias);
            return f;
        }();
        const MollifiedField mol = mollify(field, epsilon);
        const LatticeMetric metric = build_metric(mol, xi);
        at_a[std::size_t(r)] = crossing_distance(metric, 1.0, origin_a);
        at_b[std::size_t(r)] = crossing_distance(metric, 1.0, origin_b);
    }

    const double p = mann_whitney_p(at_a, at_b);
    AxiomReport report;
    report.axiom = AxiomTag::Translation;
    report.mode = CheckMode::Statistical;
    report.add({"rank test p-value " + std::to_string(p), 1.0 - p, p < alpha, false});
    return report;
}

// ---------------------------------------------------------------------------
// eps-transfer scaling relation (statistical)

FieldGrid subsample_half(const FieldGrid& fine) {
    const int n = fine.spec.n;
    if (n / 2 < 16) throw std::invalid_argument("subsample_half: grid too small");
    FieldGrid out;
    out.spec = GridSpec{n / 2, fine.spec.side_length / 2.0};
    out.seed = fine.seed;
    out.normalization = Normalization::Raw;
    out.values.resize(n / 2, n / 2);
    for (int y = 0; y < n / 2; ++y)
        for (int x = 0; x < n / 2; ++x) out.values(x, y) = fine.values(2 * x, 2 * y);
    return out;
}

AxiomReport check_scaling_relation(const FieldGrid& fine, double xi, double epsilon,
                                   std::span<const VertexPair> pairs, double pass_threshold) {
    if (!(epsilon / 2.0 >= fine.spec.spacing()))
        throw std::invalid_argument("check_scaling_relation: eps/2 below half-grid resolution");
    const FieldGrid coarse = subsample_half(fine);
    const LatticeMetric fine_metric = build_metric(mollify(fine, epsilon), xi);
    const LatticeMetric coarse_metric = build_metric(mollify(coarse, epsilon / 2.0), xi);

    AxiomReport report;
    report.axiom = AxiomTag::ScalingRelation;
    report.mode = CheckMode::Statistical;

    std::vector<double> discrepancies;
    for (const auto& [z, w] : pairs) {
        const Vertex fz{2 * z.x, 2 * z.y}, fw{2 * w.x, 2 * w.y};
        const Vertex zs[1] = {z}, ws[1] = {w};
        const Vertex fzs[1] = {fz}, fws[1] = {fw};
        const double d_fine = distance(fine_metric, fzs, fws).distance;
        const double d_coarse = distance(coarse_metric, zs, ws).distance;
        if (d_fine == kUnreachable || d_coarse == kUnreachable) continue;
        discrepancies.push_back(std::abs(2.0 * d_coarse - d_fine) / d_fine);
    }
    if (discrepancies.empty())
        throw std::invalid_argument("check_scaling_relation: no usable pairs");
    std::sort(discrepancies.begin(), discrepancies.end());
    const double med = discrepancies[discrepancies.size() / 2];
    report.add({"median relative discrepancy", med, med >= pass_threshold, false});
    return report;
}

// ---------------------------------------------------------------------------
// Bi-Lipschitz comparison

BiLipschitzEstimate compare_metrics(const LatticeMetric& a, const LatticeMetric& b,
                                    std::span<const VertexPair> pairs) {
    if (a.grid().n != b.grid().n || a.grid().side_length != b.grid().side_length)
        throw std::invalid_argument("compare_metrics: metrics live on different grids");
    BiLipschitzEstimate out;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const auto& [z, w] : pairs) {
        if (a.masked(z) || a.masked(w) || b.masked(z) || b.masked(w))
            throw std::invalid_argument("compare_metrics: masked pair");
        const Vertex zs[1] = {z}, ws[1] = {w};
        const double da = distance(a, zs, ws).distance;
        const double db = distance(b, zs, ws).distance;
        ++out.pairs_sampled;
        if (da == kUnreachable || db == kUnreachable) {
            ++out.excluded;
            continue;
        }
        const double ratio = db / da;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    if (out.pairs_sampled == out.excluded)
        throw std::invalid_argument("compare_metrics: no finite pairs");
    out.c_hat = lo;
    out.C_hat = hi;
    return out;
}

}  // namespace lfpp
