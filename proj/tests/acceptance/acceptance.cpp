// One line per acceptance criterion; exit status 0 only when every line passes.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hel/config.hpp"
#include "hel/sampling.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace hel;
using config::Json;

namespace {

const fs::path kBin = HEL_CLI_PATH;
const fs::path kConfigs = HEL_CONFIG_DIR;

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

std::string sci(double x) { return fmt("%.3g", x); }

std::uint64_t stream(std::uint64_t criterion, std::size_t space) { return derive_seed(derive_seed(0xACCE, criterion), space); }

Json load_cfg(const std::string& name) { return config::load(kConfigs / (name + ".cfg")); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    std::string cmd = kBin.string() + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch_root() { return fs::temp_directory_path() / ("hel_acceptance_" + std::to_string(::getpid())); }

// ---------------------------------------------------------------------------

Verdict c1_geometry() {
    double worst_cn = 0.0, worst_metric = 0.0;
    std::size_t triples = 0;
    const auto spaces = sampling::standard_spaces();
    for (std::size_t k = 0; k < spaces.size(); ++k) {
        CounterRng rng(stream(1, k));
        const auto& sp = spaces[k].space;
        for (int i = 0; i < 1000; ++i, ++triples) {
            auto x = sampling::random_point(sp, rng), y = sampling::random_point(sp, rng),
                 z = sampling::random_point(sp, rng);
            worst_cn = std::max(worst_cn, cn_inequality_residual(x, y, z));
            double dxy = dist(x, y), t = rng.uniform();
            auto g = geodesic_point(x, y, t);
            double m = std::max({std::abs(dxy - dist(y, x)),           // symmetry
                                 dist(x, x),                           // zero on the diagonal
                                 dist(x, z) - dxy - dist(y, z),        // triangle inequality
                                 std::abs(dist(x, g) - t * dxy) / (1.0 + dxy),
                                 std::abs(dist(g, y) - (1.0 - t) * dxy) / (1.0 + dxy),
                                 dist(geodesic_point(x, y, 0.0), x), dist(geodesic_point(x, y, 1.0), y)});
            if (dxy < 0.0) m = 1.0;
            worst_metric = std::max(worst_metric, m);
        }
    }
    return {worst_cn <= 1e-9 && worst_metric <= 1e-9,
            std::to_string(triples) + " triples over 4 spaces, max CN residual " + sci(worst_cn) +
                ", max metric/geodesic defect " + sci(worst_metric)};
}

Verdict c2_barycentre_oracles() {
    double euclid = 0.0;
    CounterRng rng(stream(2, 0));
    BarycentreOptions generic;
    generic.force_generic = true;
    for (int i = 0; i < 200; ++i) {
        auto mu = sampling::random_measure(SpaceDescriptor::euclidean(3), rng, 20, 10.0);
        euclid = std::max(euclid, dist(barycentre(mu).point, barycentre(mu, generic).point));
    }
    double hyp = 0.0, tree = 0.0;
    const auto spaces = sampling::standard_spaces();
    for (const auto& ns : spaces) {
        if (ns.space.kind() == SpaceKind::hyperboloid2) {
            CounterRng r(stream(2, 1));
            for (int i = 0; i < 50; ++i) {
                auto mu = sampling::random_measure(ns.space, r, 8);
                hyp = std::max(hyp, dist(barycentre(mu).point, oracle::hyperboloid_grid_barycentre(mu)));
            }
        } else if (ns.space.kind() == SpaceKind::metric_tree) {
            CounterRng r(stream(2, 2));
            for (int i = 0; i < 50; ++i) {
                auto mu = sampling::random_measure(ns.space, r, 8);
                tree = std::max(tree, dist(barycentre(mu).point, oracle::tree_grid_barycentre(mu)));
            }
        }
    }
    return {euclid <= 1e-6 && hyp <= 2e-3 && tree <= 2e-3,
            "generic vs closed form " + sci(euclid) + " (200), hyperboloid vs grid " + sci(hyp) +
                " (50), tree vs grid " + sci(tree) + " (50)"};
}

Verdict per_space_count(std::uint64_t id, int cases, const std::function<bool(CounterRng&, const SpaceDescriptor&)>& ok,
                        const std::string& what) {
    std::size_t failures = 0, total = 0;
    const auto spaces = sampling::standard_spaces();
    for (std::size_t k = 0; k < spaces.size(); ++k) {
        CounterRng rng(stream(id, k));
        for (int i = 0; i < cases; ++i, ++total)
            if (!ok(rng, spaces[k].space)) ++failures;
    }
    return {failures == 0, std::to_string(failures) + " violations in " + std::to_string(total) + " " + what};
}

Verdict c3_lipschitz() {
    return per_space_count(3, 500, [](CounterRng& rng, const SpaceDescriptor& sp) {
        return lipschitz_check(sampling::random_measure(sp, rng), sampling::random_measure(sp, rng)).holds;
    }, "measure pairs over 4 spaces");
}

Verdict c4_variance() {
    double worst = HUGE_VAL;
    auto v = per_space_count(4, 500, [&](CounterRng& rng, const SpaceDescriptor& sp) {
        auto mu = sampling::random_measure(sp, rng);
        double gap = variance_gap(mu, sampling::random_point(sp, rng), barycentre(mu));
        worst = std::min(worst, gap);
        return gap >= -1e-8;
    }, "(measure, probe) pairs over 4 spaces");
    v.detail += ", smallest gap " + sci(worst);
    return v;
}

Verdict c5_w2() {
    double worst_lp = 0.0, worst_axiom = 0.0;
    const auto spaces = sampling::standard_spaces();
    for (std::size_t k = 0; k < spaces.size(); ++k) {
        CounterRng rng(stream(5, k));
        const auto& sp = spaces[k].space;
        for (int i = 0; i < 200; ++i) {
            std::size_t n = 1 + rng.below(6);
            std::vector<SpacePoint> xs, ys;
            for (std::size_t j = 0; j < n; ++j) {
                xs.push_back(sampling::random_point(sp, rng));
                ys.push_back(sampling::random_point(sp, rng));
            }
            double lp = w2_distance(FiniteMeasure::uniform(xs), FiniteMeasure::uniform(ys)).distance;
            worst_lp = std::max(worst_lp, std::abs(lp - oracle::permutation_w2(xs, ys)));

            auto a = sampling::random_measure(sp, rng, 6), b = sampling::random_measure(sp, rng, 6),
                 c = sampling::random_measure(sp, rng, 6);
            double ab = w2_distance(a, b).distance;
            worst_axiom = std::max({worst_axiom, w2_distance(a, a).distance, std::abs(ab - w2_distance(b, a).distance),
                                    w2_distance(a, c).distance - ab - w2_distance(b, c).distance});
        }
    }
    return {worst_lp <= 1e-9 && worst_axiom <= 1e-9,
            "LP vs permutation brute force " + sci(worst_lp) + " (800 cases), metric axiom defect " +
                sci(worst_axiom) + " (800 triples)"};
}

Verdict c6_tv() {
    return per_space_count(6, 1000, [](CounterRng& rng, const SpaceDescriptor& sp) {
        std::vector<SpacePoint> support;
        std::size_t n = 2 + rng.below(7);
        for (std::size_t j = 0; j < n; ++j) support.push_back(sampling::random_point(sp, rng));
        return tv_to_w2_bound_check(sampling::random_measure_on(support, rng), sampling::random_measure_on(support, rng))
            .holds;
    }, "pairs on common supports over 4 spaces");
}

Verdict c7_tempered() {
    auto interval = tempered_report(FolnerSequence::interval(Group::integers()), 100, 2.0);
    std::vector<std::vector<std::vector<std::int64_t>>> sets;
    for (std::int64_t n = 1; n <= 100; ++n) {
        std::vector<std::vector<std::int64_t>> s;
        for (std::int64_t i = 0; i < n; ++i) s.push_back({i});
        sets.push_back(std::move(s));
    }
    double enumerated = 0.0;
    for (std::size_t n = 2; n <= 100; ++n) enumerated = std::max(enumerated, oracle::brute_shulman_ratio(sets, n));

    auto box = tempered_report(FolnerSequence::box(Group::lattice(2)), 50, 4.0);

    Json root = load_cfg("folner_shrinking");
    auto group = config::build_group(root);
    auto shrinking = tempered_report(config::build_folner(root, group), config::get_uint(root, "folner.horizon"),
                                     config::get_double(root, "folner.shulman_bound"));

    bool ok = interval.max_ratio == 1.98 && enumerated == 1.98 && interval.argmax == 100 && box.max_ratio < 4.0 &&
              box.is_tempered && !shrinking.is_tempered && shrinking.bound == 2.0;
    return {ok, "interval N=100 max_ratio " + fmt("%.17g", interval.max_ratio) + " (enumeration " +
                    fmt("%.17g", enumerated) + "), Z^2 boxes N=50 max_ratio " + fmt("%.6g", box.max_ratio) +
                    " < 4, shrinking family max_ratio " + fmt("%.6g", shrinking.max_ratio) +
                    (shrinking.is_tempered ? " tempered" : " flagged non-tempered") + " for C=2"};
}

struct ConvergeRun {
    config::Scenario scenario;
    ConvergenceSetup setup;
    ConvergenceResult result;
};

ConvergeRun converge(const std::string& name) {
    Json root = load_cfg(name);
    ConvergeRun run{config::build_scenario(root), {}, {}};
    run.setup = config::convergence_setup(root, run.scenario);
    run.result = convergence_experiment(run.scenario.observable, run.scenario.folner, run.setup);
    return run;
}

double dist_at(const ConvergenceResult& r, std::size_t n) {
    double worst = 0.0;
    for (const auto& rec : r.records)
        if (rec.n == n) worst = std::max(worst, rec.dist_to_reference);
    return worst;
}

Verdict c8_euclidean() {
    auto run = converge("golden_rotation_euclidean");
    const auto& s = run.result.summary;
    double ref_err = dist(s.references.at(0).point, euclidean_point({0.0, 0.0}));
    bool shape = run.setup.omega_samples == 20 && run.setup.schedule_exponent == 14 && run.setup.tolerance == 0.01;
    bool ok = shape && s.pass && s.tempered && ref_err <= 1e-12 && s.max_final_quarter_dist < 0.01;
    return {ok, "20 omegas, n up to 2^14: max final-quarter dist to (0,0) " + sci(s.max_final_quarter_dist) +
                    " < 0.01, quadrature reference off (0,0) by " + sci(ref_err)};
}

Verdict c9_curved() {
    auto hyp = converge("golden_rotation_hyperbolic");
    auto tree = converge("golden_rotation_tree");
    const std::size_t top = std::size_t{1} << 14;

    const auto& fh = hyp.scenario.observable;
    double hyp_oracle = dist(hyp.result.summary.references.at(0).point,
                             oracle::hyperboloid_grid_barycentre(pushforward_measure(fh, 512)));
    const auto& ft = tree.scenario.observable;
    double tree_closed = dist(tree.result.summary.references.at(0).point, tree_point(ft.target(), 2, 1.0 / 12.0));
    double tree_oracle = dist(tree.result.summary.references.at(0).point,
                              oracle::tree_grid_barycentre(pushforward_measure(ft, 900)));

    double dh = dist_at(hyp.result, top), dt = dist_at(tree.result, top);
    bool ok = hyp.setup.omega_samples == 20 && tree.setup.omega_samples == 20 && hyp.result.summary.pass &&
              tree.result.summary.pass && dh < 0.02 && dt < 0.02 && hyp_oracle <= 2e-3 && tree_oracle <= 2e-3 &&
              tree_closed <= 1e-5;
    return {ok, "at n=2^14 hyperbolic max dist " + sci(dh) + ", tripod max dist " + sci(dt) +
                    " (< 0.02); references vs grid oracle " + sci(hyp_oracle) + " / " + sci(tree_oracle) +
                    ", tripod reference vs closed form " + sci(tree_closed)};
}

Verdict c10_two_component() {
    auto run = converge("two_component");
    const auto& s = run.result.summary;
    const auto& sys = run.scenario.system;
    std::vector<int> seen(2, 0);
    for (const auto& w : sys.sample(derive_seed(run.setup.seed, 0x0E6A), run.setup.omega_samples))
        seen.at(sys.ergodic_component(w)) = 1;
    double r0 = dist(s.references.at(0).point, euclidean_point({0.0, 0.0}));
    double r1 = dist(s.references.at(1).point, euclidean_point({3.0, 1.0}));
    bool ok = s.pass && run.setup.tolerance == 0.01 && s.max_final_quarter_dist < 0.01 && seen[0] && seen[1] &&
              r0 <= 1e-9 && r1 <= 1e-9 && s.invariance_max_dist && *s.invariance_max_dist <= 0.02;
    return {ok, "per-component limits within " + sci(s.max_final_quarter_dist) +
                    " of conditional barycentres (0,0) and (3,1); omega vs T^7 omega limits differ by at most " +
                    sci(s.invariance_max_dist.value_or(NAN))};
}

Verdict c11_z2() {
    auto run = converge("z2_torus_boxes");
    const auto& s = run.result.summary;
    double ref_err = dist(s.references.at(0).point, euclidean_point({0.0, 0.0, 0.0, 0.0}));
    bool ok = s.pass && run.scenario.group.rank() == 2 && run.setup.schedule_exponent == 7 &&
              run.setup.tolerance == 0.02 && run.setup.shulman_bound == 4.0 && s.tempered && ref_err <= 1e-12;
    return {ok, "boxes of side up to 2^7: max final-quarter dist " + sci(s.max_final_quarter_dist) +
                    " < 0.02, max Shulman ratio " + fmt("%.4g", s.max_shulman_ratio) + " <= C=4"};
}

Verdict c12_maximal() {
    auto dir = scratch_root() / "maximal";
    std::string detail;
    bool ok = true;
    for (const char* tag : {"0p1", "0p5", "1p0"}) {
        std::string name = std::string("maximal_circle_d2_") + tag;
        int code = run_cli("maximal --out " + dir.string() + " --config " + (kConfigs / (name + ".cfg")).string());
        Json j = Json::parse(slurp(dir / (name + ".json")));
        double target = j["approximation_target"].get<double>();

        // Rowwise domination, re-read from the tails file.
        std::istringstream csv(slurp(dir / (name + "_tails.csv")));
        std::string line;
        std::getline(csv, line);
        std::getline(csv, line);
        bool header = line == "alpha,empirical_tail,bound";
        std::size_t rows = 0, dominated = 0;
        while (std::getline(csv, line)) {
            double a, t, b;
            if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &a, &t, &b) != 3) break;
            ++rows;
            if (t <= b) ++dominated;
        }
        double c0 = j["fitted_c"].get<double>(), c1 = j["stability"]["fitted_c"].get<double>();
        double change = std::abs(c1 - c0) / c0;
        std::size_t checks = j["chain_checks"], audited = j["audited_cells"];
        std::size_t violations = j["chain_violations"].get<std::size_t>() + j["lemma_violations"].get<std::size_t>() +
                                 j["coupling_violations"].get<std::size_t>();
        bool this_ok = code == 0 && header && rows == 8 && dominated == 8 && j["d2"].get<double>() < target && j["d2"].get<double>() >= 0.9 * target &&
                       j["omega_samples"] == 500 && j["horizon"] == 1024 && c0 > 0.0 && change <= 0.25 &&
                       violations == 0 && checks == 500u * 1024u && audited == 500u * 11u;
        ok = ok && this_ok;
        detail += (detail.empty() ? "" : "; ") + std::string("d2<") + fmt("%g", target) + ": realised " +
                  fmt("%.3g", j["d2"].get<double>()) + ", c " + fmt("%.3g", c0) + ", refit change " +
                  fmt("%.1f%%", 100.0 * change) + ", tails " + std::to_string(dominated) + "/" + std::to_string(rows) +
                  " dominated, " + std::to_string(violations) + " violations in " + std::to_string(checks) +
                  " chain + " + std::to_string(audited) + " LP cells";
    }
    return {ok, detail};
}

Verdict c13_determinism() {
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(kConfigs)) {
        if (e.path().extension() != ".cfg") continue;
        if (config::find(config::load(e.path()), "converge")) names.push_back(e.path().stem().string());
    }
    std::sort(names.begin(), names.end());
    auto root = scratch_root() / "det";
    std::size_t files = 0, mismatches = 0;
    bool all_ran = true;
    for (const auto& name : names) {
        std::string cfg = (kConfigs / (name + ".cfg")).string();
        std::vector<fs::path> dirs = {root / "a", root / "b", root / "t8"};
        all_ran = run_cli("converge --threads 1 --out " + dirs[0].string() + " --config " + cfg) == 0 && all_ran;
        all_ran = run_cli("converge --threads 1 --out " + dirs[1].string() + " --config " + cfg) == 0 && all_ran;
        all_ran = run_cli("converge --threads 8 --out " + dirs[2].string() + " --config " + cfg) == 0 && all_ran;
        for (const char* ext : {".csv", ".json"}) {
            ++files;
            auto ref = slurp(dirs[0] / (name + ext));
            if (ref.empty() || ref != slurp(dirs[1] / (name + ext)) || ref != slurp(dirs[2] / (name + ext)))
                ++mismatches;
        }
    }
    return {all_ran && mismatches == 0 && names.size() >= 5,
            std::to_string(names.size()) + " shipped converge configs, " + std::to_string(files) +
                " output files compared over two runs and --threads 1 vs 8, " + std::to_string(mismatches) +
                " mismatches"};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"CAT(0) geometry", c1_geometry},
        {"barycentre oracles", c2_barycentre_oracles},
        {"1-Lipschitz barycentre map", c3_lipschitz},
        {"variance inequality", c4_variance},
        {"W2 exactness and axioms", c5_w2},
        {"TV to W2 step", c6_tv},
        {"temperedness", c7_tempered},
        {"ergodic Euclidean convergence", c8_euclidean},
        {"ergodic hyperbolic and tree convergence", c9_curved},
        {"non-ergodic two-component convergence", c10_two_component},
        {"Z^2 box averages", c11_z2},
        {"maximal inequalities", c12_maximal},
        {"determinism", c13_determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!v.pass) ++failed;
        std::printf("%s  [%2zu] %s: %s (%.1fs)\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    v.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::error_code ec;
    fs::remove_all(scratch_root(), ec);
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
