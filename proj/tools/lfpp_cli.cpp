// lfpp: simulation laboratory for Liouville first passage percolation on the
// torus lattice. Samples log-correlated fields, builds the exponentially
// weighted metric, and runs the measurement campaigns.
//
// Every command prints a final machine-parseable line `RESULT <json>`.
// Exit codes: 0 success, 2 configuration error, 3 exact-check violation.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lfpp/estimators.hpp"
#include "lfpp/field.hpp"
#include "lfpp/io.hpp"
#include "lfpp/metric.hpp"
#include "lfpp/parallel.hpp"
#include "lfpp/properties.hpp"
#include "lfpp/rng.hpp"

using namespace lfpp;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CommonArgs {
    int n = 256;
    double length = 4.0;
    double xi = 0.4;
    double eps = 0.125;
    int replicas = 51;
    std::uint64_t seed = 1;
    int threads = 0;
    std::string out;
};

void add_grid_flags(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--n", a.n, "Vertices per side (power of two)")->capture_default_str();
    cmd->add_option("--length,-L", a.length, "Physical side length")->capture_default_str();
    cmd->add_option("--seed", a.seed, "Master seed")->capture_default_str();
    cmd->add_option("--threads", a.threads, "Worker threads (0 = all cores)")
        ->capture_default_str();
}

CampaignOptions campaign_options(const CommonArgs& a) {
    CampaignOptions opts;
    opts.threads = a.threads;
    return opts;
}

void ensure_parent(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void write_json(const fs::path& path, const json& j) {
    ensure_parent(path);
    io::write_text(path, j.dump(2) + "\n");
}

void result_line(const json& j) { std::cout << "RESULT " << j.dump() << "\n"; }

json grid_echo(const CommonArgs& a) {
    return json{{"n", a.n}, {"L", a.length}, {"seed", a.seed}};
}

MollifiedField sampled(const CommonArgs& a, std::uint32_t replica = 0) {
    const GridSpec spec{a.n, a.length};
    return mollify(sample_gff(spec, a.seed, replica), a.eps);
}

Vertex parse_vertex(const std::vector<int>& xy, const char* what) {
    if (xy.size() != 2) throw std::invalid_argument(std::string(what) + " needs x,y");
    return Vertex{xy[0], xy[1]};
}

// The flat key=value config format: keys xi, eps_grid, n, L, replicas, seed,
// observable (the command), plus any long flag name. Expanded onto argv
// before normal parsing.
std::vector<std::string> expand_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file: " + path);
    std::string observable;
    std::vector<std::string> flags;
    std::string line;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) continue;
        if (key == "observable") {
            observable = value;
        } else if (key == "eps_grid") {
            flags.push_back("--eps");
            flags.push_back(value);
        } else if (key == "L") {
            flags.push_back("--length");
            flags.push_back(value);
        } else {
            flags.push_back("--" + key);
            flags.push_back(value);
        }
    }
    if (observable.empty())
        throw std::runtime_error("config file must name an observable=<command>");
    std::vector<std::string> argv_out{observable};
    argv_out.insert(argv_out.end(), flags.begin(), flags.end());
    return argv_out;
}

// ---------------------------------------------------------------------------
// verify suites

int run_verify(const CommonArgs& a, const std::string& suite, int pairs_count, int seeds) {
    const GridSpec spec{a.n, a.length};
    std::vector<json> reports;
    std::int64_t exact_violations = 0;

    const auto note = [&](const AxiomReport& rep, const std::string& label) {
        json j = rep.to_json();
        j["label"] = label;
        j.erase("details");
        reports.push_back(j);
        if (rep.mode == CheckMode::Exact) exact_violations += rep.violations;
        std::cout << label << ": " << (rep.violations == 0 ? "ok" : "VIOLATED")
                  << " (checked " << rep.checked << ", worst " << rep.worst_error << ")\n";
    };

    for (int s = 0; s < seeds; ++s) {
        const std::uint64_t seed = a.seed + std::uint64_t(s);
        const auto pairs = sample_vertex_pairs(spec, pairs_count, seed + 1000);
        const MollifiedField phi = mollify(sample_gff(spec, seed), a.eps);
        const LatticeMetric metric = build_metric(phi, a.xi);
        const std::string tag = " [seed " + std::to_string(seed) + "]";

        if (suite == "exact" || suite == "all") {
            note(check_metric_axioms(metric, pairs), "metric-axioms" + tag);
            note(check_length_space(metric, pairs), "length-space" + tag);

            note(check_weyl(phi, a.xi, Eigen::ArrayXXd::Zero(a.n, a.n), pairs),
                 "weyl-zero" + tag);
            note(check_weyl(phi, a.xi,
                            Eigen::ArrayXXd::Constant(a.n, a.n, std::log(2.0) / a.xi), pairs),
                 "weyl-constant" + tag);
            Eigen::ArrayXXd bump = Eigen::ArrayXXd::Zero(a.n, a.n);
            const Point c = grid_center(spec);
            for (int y = 0; y < a.n; ++y)
                for (int x = 0; x < a.n; ++x) {
                    const double d = torus_distance(vertex_position(Vertex{x, y}, spec), c,
                                                    spec.side_length);
                    const double lo = 0.125 * a.length, hi = 0.3 * a.length;
                    if (d > lo && d < hi)
                        bump(x, y) = 0.75 * std::sin(M_PI * (d - lo) / (hi - lo));
                }
            note(check_weyl(phi, a.xi, bump, pairs), "weyl-bump" + tag);

            const Region region = Region::box(spec, a.n / 8, a.n / 8, a.n / 4, a.n / 4);
            Eigen::ArrayXXd far = Eigen::ArrayXXd::Zero(a.n, a.n);
            const CounterRng rng(seed, 0, RngStream::Generic);
            for (int y = a.n / 2; y < 3 * a.n / 4; ++y)
                for (int x = a.n / 2; x < 3 * a.n / 4; ++x)
                    far(x, y) = rng.gaussian(std::uint64_t(y) * a.n + std::uint64_t(x));
            std::vector<VertexPair> region_pairs;
            for (int k = 0; k < pairs_count; ++k)
                region_pairs.push_back({Vertex{a.n / 8 + 1 + k % (a.n / 8), a.n / 8 + 1},
                                        Vertex{a.n / 8 + 2, a.n / 8 + 2 + k % (a.n / 8)}});
            note(check_locality(phi, a.xi, region, far, region_pairs), "locality" + tag);
        }
        if (suite == "statistical" || suite == "all") {
            note(check_translation(spec, a.xi, a.eps, Vertex{a.n / 2, a.n / 2},
                                   std::max(50, pairs_count), seed),
                 "translation" + tag);
            const FieldGrid fine = sample_gff(spec, seed);
            note(check_scaling_relation(fine, a.xi, std::max(a.eps, 4.0 * spec.spacing()),
                                        sample_vertex_pairs(GridSpec{a.n / 2, a.length / 2.0},
                                                            pairs_count, seed + 2000)),
                 "scaling-relation" + tag);
        }
    }

    if (!a.out.empty()) write_json(a.out + ".report.json", json(reports));
    result_line(json{{"suite", suite},
                     {"reports", std::int64_t(reports.size())},
                     {"exact_violations", exact_violations}});
    return exact_violations == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LFPP simulation laboratory"};
    app.require_subcommand(1);

    // Flat key=value config support: expand before CLI11 parsing.
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        if (args.size() >= 2 && args[0] == "--config")
            args = expand_config_file(args[1]);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    CommonArgs a;

    // --- sample-field
    auto* c_field = app.add_subcommand("sample-field", "Sample a field snapshot");
    add_grid_flags(c_field, a);
    double sf_eps = 0.0;
    std::uint32_t sf_replica = 0;
    c_field->add_option("--eps", sf_eps, "Also write the mollified field at this scale");
    c_field->add_option("--replica", sf_replica, "Replica index")->capture_default_str();
    c_field->add_option("--out,-o", a.out, "Output prefix")->required();

    // --- crossing
    auto* c_cross = app.add_subcommand("crossing", "Unit-square crossing distances");
    add_grid_flags(c_cross, a);
    c_cross->add_option("--xi", a.xi, "LFPP parameter")->capture_default_str();
    c_cross->add_option("--eps", a.eps, "Mollification scale")->capture_default_str();
    c_cross->add_option("--replicas", a.replicas, "Replica count")->capture_default_str();
    c_cross->add_option("--out,-o", a.out, "Output prefix");

    // --- fit-q
    auto* c_fitq = app.add_subcommand("fit-q", "Exponent fit over an eps grid");
    add_grid_flags(c_fitq, a);
    std::vector<double> eps_grid{0.5, 0.25, 0.125, 0.0625};
    c_fitq->add_option("--xi", a.xi)->capture_default_str();
    c_fitq->add_option("--eps", eps_grid, "Decreasing eps grid")
        ->delimiter(',')
        ->capture_default_str();
    c_fitq->add_option("--replicas", a.replicas)->capture_default_str();
    c_fitq->add_option("--out,-o", a.out, "Output prefix");
    bool resume = false;
    c_fitq->add_flag("--resume", resume, "Reuse / persist partial replica results");

    // --- xi-crit
    auto* c_crit = app.add_subcommand("xi-crit", "Bracket the critical xi");
    add_grid_flags(c_crit, a);
    std::vector<double> xi_grid{0.25, 0.35, 0.45, 0.55};
    c_crit->add_option("--xi-grid", xi_grid, "Increasing xi grid")
        ->delimiter(',')
        ->capture_default_str();
    c_crit->add_option("--eps", eps_grid, "Decreasing eps grid")
        ->delimiter(',')
        ->capture_default_str();
    c_crit->add_option("--replicas", a.replicas)->capture_default_str();
    c_crit->add_option("--out,-o", a.out, "Output prefix");

    // --- annulus (ratio check)
    auto* c_ann = app.add_subcommand("annulus", "Around <= delta^-zeta across ratio check");
    add_grid_flags(c_ann, a);
    std::vector<double> deltas{0.125, 0.0625, 0.03125};
    double zeta = 0.5;
    int centers = 4;
    c_ann->add_option("--xi", a.xi)->capture_default_str();
    c_ann->add_option("--eps", a.eps)->capture_default_str();
    c_ann->add_option("--deltas", deltas)->delimiter(',')->capture_default_str();
    c_ann->add_option("--zeta", zeta)->capture_default_str();
    c_ann->add_option("--centers", centers)->capture_default_str();
    c_ann->add_option("--replicas", a.replicas)->capture_default_str();
    c_ann->add_option("--out,-o", a.out, "Output prefix");

    // --- tightness
    auto* c_tight = app.add_subcommand("tightness", "Normalized annulus statistics per scale");
    add_grid_flags(c_tight, a);
    std::vector<double> radii{0.25, 0.5, 1.0};
    double q_used = 2.0;
    c_tight->add_option("--xi", a.xi)->capture_default_str();
    c_tight->add_option("--eps", a.eps)->capture_default_str();
    c_tight->add_option("--q", q_used, "Q used in the normalization")->capture_default_str();
    c_tight->add_option("--radii", radii)->delimiter(',')->capture_default_str();
    c_tight->add_option("--replicas", a.replicas)->capture_default_str();
    c_tight->add_option("--out,-o", a.out, "Output prefix");

    // --- singular-census
    auto* c_census = app.add_subcommand("singular-census", "Thick-point census");
    add_grid_flags(c_census, a);
    double q_ref = 2.0, r_min = 0.0;
    int stride = 4;
    c_census->add_option("--xi", a.xi)->capture_default_str();
    c_census->add_option("--q-ref", q_ref, "Thickness threshold")->capture_default_str();
    c_census->add_option("--r-min", r_min, "Smallest dyadic radius (default 2*spacing)");
    c_census->add_option("--stride", stride, "Census stride (>= 4)")->capture_default_str();
    c_census->add_option("--out,-o", a.out, "Output prefix");

    // --- geodesics
    auto* c_geo = app.add_subcommand("geodesics", "Trace a geodesic between two vertices");
    add_grid_flags(c_geo, a);
    std::vector<int> from_xy, to_xy;
    c_geo->add_option("--xi", a.xi)->capture_default_str();
    c_geo->add_option("--eps", a.eps)->capture_default_str();
    c_geo->add_option("--from", from_xy, "Source vertex x,y")->delimiter(',')->required();
    c_geo->add_option("--to", to_xy, "Target vertex x,y")->delimiter(',')->required();
    c_geo->add_option("--out,-o", a.out, "Output prefix")->required();

    // --- ball
    auto* c_ball = app.add_subcommand("ball", "Metric ball around a vertex");
    add_grid_flags(c_ball, a);
    std::vector<int> center_xy;
    double ball_radius = 0.5;
    c_ball->add_option("--xi", a.xi)->capture_default_str();
    c_ball->add_option("--eps", a.eps)->capture_default_str();
    c_ball->add_option("--center", center_xy, "Center vertex x,y")->delimiter(',')->required();
    c_ball->add_option("--radius", ball_radius, "Metric radius")->capture_default_str();
    c_ball->add_option("--out,-o", a.out, "Output prefix")->required();

    // --- verify
    auto* c_verify = app.add_subcommand("verify", "Run the axiom verification suites");
    add_grid_flags(c_verify, a);
    std::string suite = "exact";
    int pairs_count = 100, verify_seeds = 3;
    c_verify->add_option("--suite", suite, "exact | statistical | all")
        ->check(CLI::IsMember({"exact", "statistical", "all"}))
        ->capture_default_str();
    c_verify->add_option("--xi", a.xi)->capture_default_str();
    c_verify->add_option("--eps", a.eps)->capture_default_str();
    c_verify->add_option("--pairs", pairs_count)->capture_default_str();
    c_verify->add_option("--seeds", verify_seeds)->capture_default_str();
    c_verify->add_option("--out,-o", a.out, "Output prefix");

    // --- compare
    auto* c_cmp = app.add_subcommand("compare", "Bi-Lipschitz envelope between two scales");
    add_grid_flags(c_cmp, a);
    double eps_a = 0.25, eps_b = 0.125;
    int cmp_pairs = 200;
    c_cmp->add_option("--xi", a.xi)->capture_default_str();
    c_cmp->add_option("--eps-a", eps_a)->capture_default_str();
    c_cmp->add_option("--eps-b", eps_b)->capture_default_str();
    c_cmp->add_option("--pairs", cmp_pairs)->capture_default_str();
    c_cmp->add_option("--out,-o", a.out, "Output prefix");

    // --- central-charge
    auto* c_cc = app.add_subcommand("central-charge", "Evaluate 25 - 6 Q^2");
    double q_in = 2.0;
    c_cc->add_option("--q", q_in, "Distance exponent Q")->required();

    try {
        std::vector<char*> cargs;
        cargs.push_back(argv[0]);
        for (auto& s : args) cargs.push_back(s.data());
        app.parse(int(cargs.size()), cargs.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(c_field)) {
            const GridSpec spec{a.n, a.length};
            const FieldGrid f = sample_gff(spec, a.seed, sf_replica);
            ensure_parent(fs::path(a.out + ".fld"));
            io::save_field(f, a.out + ".fld");
            io::save_pgm(f.values, a.out + ".pgm");
            json res{{"config", grid_echo(a)},
                     {"field", a.out + ".fld"},
                     {"mean", f.values.mean()},
                     {"min", f.values.minCoeff()},
                     {"max", f.values.maxCoeff()}};
            if (sf_eps > 0.0) {
                const MollifiedField m = mollify(f, sf_eps);
                io::save_pgm(m.values, a.out + ".mollified.pgm");
                res["eps"] = sf_eps;
            }
            std::cout << "field written to " << a.out << ".fld\n";
            result_line(res);
        } else if (app.got_subcommand(c_cross)) {
            const GridSpec grid{a.n, a.length};
            const auto samples =
                crossing_samples(a.xi, a.eps, a.replicas, grid, a.seed, campaign_options(a));
            const double median = median_of(samples);
            json config = grid_echo(a);
            config["xi"] = a.xi;
            config["eps"] = a.eps;
            config["replicas"] = a.replicas;
            if (!a.out.empty()) {
                ensure_parent(fs::path(a.out + ".jsonl"));
                std::ostringstream lines;
                for (std::size_t r = 0; r < samples.size(); ++r)
                    lines << json{{"seed", a.seed},          {"xi", a.xi},
                                  {"epsilon", a.eps},        {"observable", "crossing"},
                                  {"replica", r},            {"value", samples[r]}}
                                 .dump()
                          << "\n";
                io::write_text(a.out + ".jsonl", lines.str());
                write_json(a.out + ".summary.json",
                           json{{"config", config}, {"median", median}});
            }
            std::cout << "median crossing = " << median << "\n";
            result_line(json{{"config", config}, {"median", median}});
        } else if (app.got_subcommand(c_fitq)) {
            const GridSpec grid{a.n, a.length};
            CampaignOptions opts = campaign_options(a);
            if (resume && !a.out.empty()) opts.partial_path = a.out + ".partial.jsonl";
            const auto fit = fit_q(a.xi, eps_grid, a.replicas, grid, a.seed, opts);
            json config = grid_echo(a);
            config["xi"] = a.xi;
            config["eps_grid"] = eps_grid;
            config["replicas"] = a.replicas;
            json summary{{"config", config},
                         {"medians", fit.medians},
                         {"slope", fit.slope},
                         {"q_hat", fit.q_hat},
                         {"c_m_hat", fit.c_m_hat},
                         {"stderr_q", fit.stderr_q}};
            if (fit.gamma_hat) summary["gamma_hat"] = *fit.gamma_hat;
            if (!a.out.empty()) {
                write_json(a.out + ".summary.json", summary);
                std::ostringstream csv;
                csv.precision(17);
                csv << "eps,median\n";
                for (std::size_t i = 0; i < fit.eps_grid.size(); ++i)
                    csv << fit.eps_grid[i] << "," << fit.medians[i] << "\n";
                io::write_text(a.out + ".csv", csv.str());
            }
            std::cout << "Q_hat = " << fit.q_hat << " +- " << fit.stderr_q
                      << ", c_M_hat = " << fit.c_m_hat << "\n";
            result_line(summary);
        } else if (app.got_subcommand(c_crit)) {
            const GridSpec grid{a.n, a.length};
            const auto res =
                estimate_xi_crit(xi_grid, eps_grid, a.replicas, grid, a.seed, campaign_options(a));
            json fits = json::array();
            for (const auto& f : res.fits)
                fits.push_back(json{{"xi", f.xi}, {"q_hat", f.q_hat}, {"stderr_q", f.stderr_q}});
            json config = grid_echo(a);
            config["xi_grid"] = xi_grid;
            config["eps_grid"] = eps_grid;
            config["replicas"] = a.replicas;
            json summary{{"config", config}, {"fits", fits}};
            if (res.bracket) {
                summary["bracket"] = {res.bracket->first, res.bracket->second};
                summary["root_estimate"] = *res.root_estimate;
                std::cout << "xi_crit bracket [" << res.bracket->first << ", "
                          << res.bracket->second << "]\n";
            } else {
                summary["bracket"] = nullptr;
                std::cout << "no bracket: q_hat does not cross 2 on this grid\n";
            }
            if (!a.out.empty()) write_json(a.out + ".summary.json", summary);
            result_line(summary);
        } else if (app.got_subcommand(c_ann)) {
            const GridSpec grid{a.n, a.length};
            const auto res = annulus_ratio_check(a.xi, deltas, zeta, centers, a.replicas, a.eps,
                                                 grid, a.seed, {}, campaign_options(a));
            json config = grid_echo(a);
            config["xi"] = a.xi;
            config["zeta"] = zeta;
            config["deltas"] = deltas;
            config["centers"] = centers;
            config["replicas"] = a.replicas;
            json summary{{"config", config},
                         {"violation_fraction", res.violation_fraction},
                         {"trials_per_delta", res.trials_per_delta}};
            if (!a.out.empty()) {
                write_json(a.out + ".summary.json", summary);
                std::ostringstream csv;
                csv.precision(17);
                csv << "delta,violation_fraction\n";
                for (std::size_t i = 0; i < res.delta_grid.size(); ++i)
                    csv << res.delta_grid[i] << "," << res.violation_fraction[i] << "\n";
                io::write_text(a.out + ".csv", csv.str());
            }
            result_line(summary);
        } else if (app.got_subcommand(c_tight)) {
            const GridSpec grid{a.n, a.length};
            const auto st = tightness_stats(a.xi, q_used, radii, {}, a.eps, a.replicas, grid,
                                            a.seed, campaign_options(a));
            json per_r = json::array();
            for (std::size_t i = 0; i < st.radii.size(); ++i)
                per_r.push_back(json{{"r", st.radii[i]},
                                     {"across_q", st.normalized_across[i]},
                                     {"around_q", st.normalized_around[i]}});
            json config = grid_echo(a);
            config["xi"] = a.xi;
            config["q_used"] = q_used;
            config["replicas"] = a.replicas;
            json summary{{"config", config}, {"scales", per_r}};
            if (!a.out.empty()) {
                write_json(a.out + ".summary.json", summary);
                std::ostringstream csv;
                csv.precision(17);
                csv << "r,across_p05,across_p25,across_p50,across_p75,across_p95,"
                       "around_p05,around_p25,around_p50,around_p75,around_p95\n";
                for (std::size_t i = 0; i < st.radii.size(); ++i) {
                    csv << st.radii[i];
                    for (const double v : st.normalized_across[i]) csv << "," << v;
                    for (const double v : st.normalized_around[i]) csv << "," << v;
                    csv << "\n";
                }
                io::write_text(a.out + ".csv", csv.str());
            }
            result_line(summary);
        } else if (app.got_subcommand(c_census)) {
            const GridSpec grid{a.n, a.length};
            if (r_min <= 0.0) r_min = 2.0 * grid.spacing();
            const auto census = singular_census(a.xi, q_ref, grid, r_min, a.seed, stride);
            json config = grid_echo(a);
            config["xi"] = a.xi;
            config["q_ref"] = q_ref;
            config["r_min"] = r_min;
            config["stride"] = stride;
            json summary{{"config", config},
                         {"total_vertices", census.total_vertices},
                         {"exceed_count", census.exceed_count},
                         {"fraction", census.fraction}};
            if (!a.out.empty()) write_json(a.out + ".summary.json", summary);
            std::cout << "thick fraction = " << census.fraction << "\n";
            result_line(summary);
        } else if (app.got_subcommand(c_geo)) {
            const MollifiedField phi = sampled(a);
            const LatticeMetric metric = build_metric(phi, a.xi);
            const auto path =
                geodesic(metric, parse_vertex(from_xy, "--from"), parse_vertex(to_xy, "--to"));
            std::vector<double> cumulative(path.vertices.size(), 0.0);
            for (std::size_t i = 1; i < path.vertices.size(); ++i)
                cumulative[i] =
                    cumulative[i - 1] + metric.edge_weight(path.vertices[i - 1], path.vertices[i]);
            ensure_parent(fs::path(a.out + ".csv"));
            io::save_vertex_csv(path.vertices, cumulative, a.out + ".csv");
            io::save_ppm_overlay(phi.values, {{path.vertices, 255, 32, 32}}, a.out + ".ppm");
            json config = grid_echo(a);
            config["xi"] = a.xi;
            config["eps"] = a.eps;
            result_line(json{{"config", config},
                             {"length", path.length},
                             {"vertices", std::int64_t(path.vertices.size())}});
        } else if (app.got_subcommand(c_ball)) {
            const MollifiedField phi = sampled(a);
            const LatticeMetric metric = build_metric(phi, a.xi);
            const auto b = ball(metric, parse_vertex(center_xy, "--center"), ball_radius);
            ensure_parent(fs::path(a.out + ".csv"));
            io::save_vertex_csv(b, {}, a.out + ".csv");
            io::save_ppm_overlay(phi.values, {{b, 64, 64, 255}}, a.out + ".ppm");
            json config = grid_echo(a);
            config["xi"] = a.xi;
            config["eps"] = a.eps;
            config["radius"] = ball_radius;
            result_line(json{{"config", config}, {"vertices", std::int64_t(b.size())}});
        } else if (app.got_subcommand(c_verify)) {
            return run_verify(a, suite, pairs_count, verify_seeds);
        } else if (app.got_subcommand(c_cmp)) {
            const GridSpec spec{a.n, a.length};
            const FieldGrid f = sample_gff(spec, a.seed);
            const LatticeMetric ma = build_metric(mollify(f, eps_a), a.xi);
            const LatticeMetric mb = build_metric(mollify(f, eps_b), a.xi);
            const auto pairs = sample_vertex_pairs(spec, cmp_pairs, a.seed + 1);
            const auto est = compare_metrics(ma, mb, pairs);
            json config = grid_echo(a);
            config["xi"] = a.xi;
            config["eps_a"] = eps_a;
            config["eps_b"] = eps_b;
            json summary{{"config", config},
                         {"c_hat", est.c_hat},
                         {"C_hat", est.C_hat},
                         {"pairs", est.pairs_sampled},
                         {"excluded", est.excluded}};
            if (!a.out.empty()) write_json(a.out + ".summary.json", summary);
            std::cout << "ratio envelope [" << est.c_hat << ", " << est.C_hat << "]\n";
            result_line(summary);
        } else if (app.got_subcommand(c_cc)) {
            const double cm = central_charge(q_in);
            std::cout << cm << "\n";
            result_line(json{{"q", q_in}, {"c_m", cm}});
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
