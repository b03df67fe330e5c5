#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include <omp.h>

#include <CLI11.hpp>

#include "hel/config.hpp"
#include "hel/errors.hpp"
#include "selftest.hpp"

namespace fs = std::filesystem;
using hel::config::Json;

namespace {

constexpr const char* kCsvVersion = "# hadamard-ergodic-lab v1";

struct Globals {
    std::optional<std::uint64_t> seed;
    int threads = 0;
    std::string out = "out";
    std::string config;
    bool record_timing = false;
};

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

std::string pretty(const Json& j) { return j.dump(2) + "\n"; }

Json load_config(const Globals& g) {
    if (g.config.empty()) throw hel::ParseError("missing --config");
    return hel::config::load(g.config);
}

hel::config::Scenario load_scenario(const Json& root, const Globals& g) {
    auto s = hel::config::build_scenario(root);
    if (g.seed) s.seed = *g.seed;
    return s;
}

Json bary_json(const hel::BarycentreResult& r) {
    return {{"point", hel::config::point_json(r.point)},
            {"functional_value", r.functional_value},
            {"residual", r.stationarity_residual},
            {"iterations", r.iterations},
            {"method", hel::to_string(r.method)}};
}

int cmd_bary(const std::string& file, const Globals& g) {
    auto mu = hel::config::parse_measure(hel::config::load(file));
    hel::BarycentreOptions opts;
    opts.seed = g.seed.value_or(0);
    std::cout << pretty(bary_json(hel::barycentre(mu, opts)));
    return 0;
}

int cmd_w2(const std::string& a, const std::string& b) {
    auto mu = hel::config::parse_measure(hel::config::load(a));
    auto nu = hel::config::parse_measure(hel::config::load(b));
    hel::TransportOptions opts;
    opts.support_cap = 4096;
    auto r = hel::w2_distance(mu, nu, opts);
    Json entries = Json::array();
    for (const auto& e : r.coupling.entries) entries.push_back({{"row", e.row}, {"col", e.col}, {"mass", e.mass}});
    Json out = {{"distance", r.distance},
                {"cost", r.cost},
                {"coupling", {{"rows", hel::config::measure_json(r.coupling.rows)},
                              {"cols", hel::config::measure_json(r.coupling.cols)},
                              {"entries", entries}}}};
    std::cout << pretty(out);
    return 0;
}

int cmd_folner(const Globals& g, std::optional<std::size_t> horizon_flag) {
    Json root = load_config(g);
    auto group = hel::config::build_group(root);
    auto folner = hel::config::build_folner(root, group);
    double bound = hel::config::get_double(root, "folner.shulman_bound", 2.0);
    std::size_t horizon = horizon_flag.value_or(hel::config::get_uint(root, "folner.horizon", 100));
    auto report = hel::tempered_report(folner, horizon, bound);
    std::string name = hel::config::get_string(root, "scenario", "folner");
    Json out = {{"scenario", name},
                {"family", folner.label()},
                {"group", group.describe()},
                {"horizon", horizon},
                {"bound", report.bound},
                {"max_ratio", report.max_ratio},
                {"argmax", report.argmax},
                {"is_tempered", report.is_tempered},
                {"ratios", report.ratios}};
    std::cout << pretty(out);
    if (!g.out.empty()) write_file(fs::path(g.out) / (name + ".json"), pretty(out));
    return report.is_tempered ? 0 : 1;
}

int cmd_converge(const Globals& g) {
    Json root = load_config(g);
    auto s = load_scenario(root, g);
    auto setup = hel::config::convergence_setup(root, s);
    auto result = hel::convergence_experiment(s.observable, s.folner, setup, hel::Execution::parallel);
    const auto& sum = result.summary;

    std::ostringstream csv;
    csv << kCsvVersion << '\n' << "omega_id,n";
    std::size_t coords = s.observable.target().coord_size();
    for (std::size_t i = 0; i < coords; ++i) csv << ",c" << i;
    csv << ",dist_to_reference,wall_ms\n";
    for (const auto& r : result.records) {
        csv << r.omega_id << ',' << r.n;
        for (double c : r.barycentre.coords()) csv << ',' << num(c);
        csv << ',' << num(r.dist_to_reference) << ',' << num(g.record_timing ? r.wall_ms : 0.0) << '\n';
    }

    Json refs = Json::array();
    for (const auto& ref : sum.references)
        refs.push_back({{"component", ref.component}, {"point", hel::config::point_json(ref.point)}});
    Json extras = {{"tempered", sum.tempered},
                   {"max_shulman_ratio", finite_or_null(sum.max_shulman_ratio)},
                   {"shulman_bound", setup.shulman_bound},
                   {"omega_samples", setup.omega_samples},
                   {"schedule_exponent", setup.schedule_exponent},
                   {"final_quarter_dist", sum.final_quarter_dist},
                   {"references", refs},
                   {"invariance_max_dist", sum.invariance_max_dist ? Json(*sum.invariance_max_dist) : Json(nullptr)},
                   {"invariance_tolerance", setup.invariance_tolerance},
                   {"failure", sum.failure}};
    Json summary = {{"scenario", sum.scenario},
                    {"seed", sum.seed},
                    {"tolerance", sum.tolerance},
                    {"pass", sum.pass},
                    {"fitted_c", nullptr},
                    {"max_final_quarter_dist", finite_or_null(sum.max_final_quarter_dist)},
                    {"extras", extras}};

    fs::path dir(g.out);
    write_file(dir / (s.name + ".csv"), csv.str());
    write_file(dir / (s.name + ".json"), pretty(summary));
    std::cerr << s.name << ": " << (sum.pass ? "pass" : "FAIL") << ", max final-quarter dist "
              << num(sum.max_final_quarter_dist) << (sum.failure.empty() ? "" : " (" + sum.failure + ")") << '\n';
    return sum.pass ? 0 : 1;
}

std::string tails_csv(const std::vector<double>& alphas, const std::vector<double>& tails,
                      const std::vector<double>& bounds) {
    std::ostringstream csv;
    csv << kCsvVersion << '\n' << "alpha,empirical_tail,bound\n";
    for (std::size_t i = 0; i < alphas.size(); ++i)
        csv << num(alphas[i]) << ',' << num(tails[i]) << ',' << num(bounds[i]) << '\n';
    return csv.str();
}

int cmd_maximal(const Globals& g) {
    Json root = load_config(g);
    auto s = load_scenario(root, g);
    auto plan = hel::config::maximal_plan(root, s);
    const auto& f = s.observable;
    hel::Observable h = plan.comparison == "identical" ? f : hel::finite_valued_approximation(f, plan.approximation_target);

    auto est = hel::maximal_experiment(f, h, s.folner, plan.setup, hel::Execution::parallel);
    bool ok = est.tails_dominated && est.chain_violations == 0 && est.lemma_violations == 0 &&
              est.coupling_violations == 0;

    Json stability = nullptr;
    if (plan.stability_seed) {
        auto again_setup = plan.setup;
        again_setup.seed = *plan.stability_seed;
        again_setup.audit_omegas = 0;
        auto again = hel::maximal_experiment(f, h, s.folner, again_setup, hel::Execution::parallel);
        // Relative to the primary fit; a zero primary constant only matches another zero.
        double change = est.fitted_c == again.fitted_c ? 0.0
                        : est.fitted_c > 0.0           ? std::abs(again.fitted_c - est.fitted_c) / est.fitted_c
                                                       : std::numeric_limits<double>::infinity();
        bool stable = change <= plan.stability_tolerance;
        ok = ok && stable && again.tails_dominated && again.chain_violations == 0;
        stability = {{"seed", *plan.stability_seed},
                     {"fitted_c", again.fitted_c},
                     {"relative_change", finite_or_null(change)},
                     {"tolerance", plan.stability_tolerance},
                     {"stable", stable}};
    }

    Json out = {{"scenario", est.scenario},
                {"seed", est.seed},
                {"pass", ok},
                {"fitted_c", est.fitted_c},
                {"comparison", plan.comparison},
                {"approximation_target", plan.approximation_target},
                {"approximation_centres", h.is_partition() ? Json(h.values().size()) : Json(nullptr)},
                {"d2", est.d2},
                {"l1_norm", est.l1_norm},
                {"horizon", est.horizon},
                {"omega_samples", est.omega_samples},
                {"alphas", est.alphas},
                {"tail_probs", est.tail_probs},
                {"bounds", est.bounds},
                {"scalar_fitted_c", est.scalar_fitted_c},
                {"scalar_alphas", est.scalar_alphas},
                {"scalar_tail_probs", est.scalar_tail_probs},
                {"scalar_bounds", est.scalar_bounds},
                {"tails_dominated", est.tails_dominated},
                {"chain_checks", est.chain_checks},
                {"chain_violations", est.chain_violations},
                {"audited_cells", est.audited_cells},
                {"lemma_violations", est.lemma_violations},
                {"coupling_violations", est.coupling_violations},
                {"stability", stability}};

    std::ostringstream sups;
    sups << kCsvVersion << '\n' << "omega_id,sup_dist,sup_average\n";
    for (std::size_t i = 0; i < est.sup_dist.size(); ++i)
        sups << i << ',' << num(est.sup_dist[i]) << ',' << num(est.sup_average[i]) << '\n';

    fs::path dir(g.out);
    write_file(dir / (s.name + ".json"), pretty(out));
    write_file(dir / (s.name + "_tails.csv"), tails_csv(est.alphas, est.tail_probs, est.bounds));
    write_file(dir / (s.name + "_scalar_tails.csv"),
               tails_csv(est.scalar_alphas, est.scalar_tail_probs, est.scalar_bounds));
    write_file(dir / (s.name + "_sups.csv"), sups.str());
    std::cerr << s.name << ": " << (ok ? "pass" : "FAIL") << ", d2 " << num(est.d2) << ", fitted_c "
              << num(est.fitted_c) << '\n';
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Barycentric ergodic averages in Hadamard spaces"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "Override the configured master seed");
    app.add_option("--threads", g.threads, "OpenMP worker threads (0: runtime default)")->check(CLI::NonNegativeNumber);
    app.add_option("--out", g.out, "Output directory");
    app.add_option("--config", g.config, "Experiment config (.cfg or .json)");
    app.add_flag("--record-timing", g.record_timing, "Write measured wall_ms instead of 0");

    std::string measure_a, measure_b;
    auto* bary = app.add_subcommand("bary", "Barycentre of a measure file");
    bary->add_option("measure", measure_a, "Measure JSON")->required();
    auto* w2 = app.add_subcommand("w2", "W2 distance and optimal coupling of two measure files");
    w2->add_option("mu", measure_a, "Measure JSON")->required();
    w2->add_option("nu", measure_b, "Measure JSON")->required();
    std::optional<std::size_t> horizon;
    auto* folner = app.add_subcommand("folner", "Temperedness report of a configured Folner family");
    folner->add_option("--horizon", horizon, "Largest n checked");
    auto* converge = app.add_subcommand("converge", "Run the convergence experiment");
    auto* maximal = app.add_subcommand("maximal", "Run the maximal-inequality experiment");
    auto* selftest = app.add_subcommand("selftest", "Run the built-in property suites");
    std::size_t scale = 1;
    selftest->add_option("--scale", scale, "Multiply case counts")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    if (app.count("--seed")) g.seed = seed;
    if (g.threads > 0) omp_set_num_threads(g.threads);

    try {
        if (*bary) return cmd_bary(measure_a, g);
        if (*w2) return cmd_w2(measure_a, measure_b);
        if (*folner) return cmd_folner(g, horizon);
        if (*converge) return cmd_converge(g);
        if (*maximal) return cmd_maximal(g);
        if (*selftest) return hel::tools::run_selftest(g.seed.value_or(0), scale, std::cout) ? 0 : 1;
    } catch (const hel::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const hel::DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "experiment failed: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
