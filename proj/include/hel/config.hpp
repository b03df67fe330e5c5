#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "hel/ergodic.hpp"

namespace hel::config {

using Json = nlohmann::json;

/*
 * Experiment configuration text. One entry per line:
 *
 *   # comment                 whole-line comments only
 *   key = <JSON value>        value may continue over following lines while
 *                             brackets or braces are open
 *   [section.sub]             later keys go into root.section.sub
 *
 * Keys match [A-Za-z_][A-Za-z0-9_]*. Repeating a key is an error.
 * See docs/config_format.md.
 */
Json parse_cfg(std::string_view text);
/// Canonical text form; parse_cfg(to_cfg(j)) == j for every object j.
std::string to_cfg(const Json& root);
/// `.json` files are read as JSON, anything else as cfg text.
Json load(const std::filesystem::path& path);

/// Field at a dotted path; ParseError("missing field", path) when absent.
const Json& require(const Json& root, std::string_view path);
const Json* find(const Json& root, std::string_view path);

double get_double(const Json& root, std::string_view path);
double get_double(const Json& root, std::string_view path, double fallback);
std::uint64_t get_uint(const Json& root, std::string_view path);
std::uint64_t get_uint(const Json& root, std::string_view path, std::uint64_t fallback);
std::string get_string(const Json& root, std::string_view path);
std::string get_string(const Json& root, std::string_view path, const std::string& fallback);
bool get_bool(const Json& root, std::string_view path, bool fallback);

// Spaces, points and measures.
SpaceDescriptor parse_space(const Json& j, const std::string& path);
Json space_json(const SpaceDescriptor& space);
SpacePoint parse_point(const SpaceDescriptor& space, const Json& j, const std::string& path);
Json point_json(const SpacePoint& p);
/// {"space": ..., "atoms": [[...], ...], "weights": [...]}; weights are normalised.
FiniteMeasure parse_measure(const Json& j);
Json measure_json(const FiniteMeasure& mu);

// Scenario pieces.
Group build_group(const Json& root);
FolnerSequence build_folner(const Json& root, const Group& group);
System build_system(const Json& root, const Group& group);
Observable build_observable(const Json& root, std::string_view section, const System& system);

struct Scenario {
    std::string name;
    std::uint64_t seed = 0;
    Group group = Group::integers();
    FolnerSequence folner = FolnerSequence::interval(Group::integers());
    System system = System::cyclic_rotation(1);
    Observable observable = observables::constant(System::cyclic_rotation(1), euclidean_point({0.0}));
};

/// Reads scenario, seed, group, folner, system and observable.
Scenario build_scenario(const Json& root);

ConvergenceSetup convergence_setup(const Json& root, const Scenario& s);

struct MaximalPlan {
    MaximalSetup setup;
    /// "identical" (h = f) or "approximation" (h = finite_valued_approximation(f, target)).
    std::string comparison = "approximation";
    double approximation_target = 0.0;
    /// Refit on a fresh ω-sample drawn with this seed and compare fitted constants.
    std::optional<std::uint64_t> stability_seed;
    double stability_tolerance = 0.25;
};

MaximalPlan maximal_plan(const Json& root, const Scenario& s);

}  // namespace hel::config
