#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hel/barycentre.hpp"
#include "hel/group.hpp"
#include "hel/measure.hpp"
#include "hel/observable.hpp"

namespace hel {

/// ν_{f,F_n}(ω): uniform mass over g in F_n at f(T^g ω), duplicates merged.
FiniteMeasure empirical_measure(const Observable& f, const FolnerSequence& folner, const OmegaPoint& omega,
                                std::size_t n, std::size_t cap = kDefaultEnumerationCap);

BarycentreResult empirical_barycentre(const Observable& f, const FolnerSequence& folner, const OmegaPoint& omega,
                                      std::size_t n, const BarycentreOptions& options = {});

/// Plain average of f(T^g ω) over F_n; Euclidean targets only.
std::vector<double> ergodic_average(const Observable& f, const FolnerSequence& folner, const OmegaPoint& omega,
                                    std::size_t n);

struct QuadratureOptions {
    /// Stop once two successive grid doublings each move the result by less than this.
    double precision = 1e-6;
    std::size_t initial_points = 256;  // per torus axis
    std::size_t max_nodes = std::size_t{1} << 22;
};

/// Pushforward f_# P as a finite measure: exact for finite models, otherwise a
/// midpoint grid with `points_per_axis` nodes per axis. Optionally conditioned on
/// one ergodic component.
FiniteMeasure pushforward_measure(const Observable& f, std::size_t points_per_axis,
                                  std::optional<std::uint64_t> component = std::nullopt);

/// b(f_# P), or the conditional barycentre on one ergodic component. Self-refining
/// on torus models; throws PrecisionError when max_nodes is reached first.
BarycentreResult pushforward_reference(const Observable& f, const QuadratureOptions& quad = {},
                                       std::optional<std::uint64_t> component = std::nullopt,
                                       const BarycentreOptions& options = {});

/// d_2(f, h) = sqrt(∫ d(f, h)^2 dP), self-refining on torus models.
double d2_distance(const Observable& f, const Observable& h, const QuadratureOptions& quad = {});

struct ApproximationOptions {
    std::size_t net_cap = 4096;
    /// Grid points per torus axis used to sample the image of f.
    std::size_t image_points = 4096;
    std::size_t max_halvings = 8;
    /// Bisection steps on the net radius so that d_2(f, h) ends just below the target;
    /// 0 returns the first passing radius.
    std::size_t calibration_steps = 6;
    /// d_2 check; precision is raised to at least target / 1000.
    QuadratureOptions quad{1e-5};
};

/*
 * Partition observable h with d_2(f, h) < target. Greedy net of radius r over
 * sampled images of f; ω falls in the cell of the first centre within r of
 * f(ω), else the nearest centre. Starting from r = target, the radius is
 * bracketed (doubled while the d_2 check passes, halved while it fails) and
 * then bisected, keeping the largest passing radius, so the realised d_2 sits
 * just under the target. Partition observables are returned unchanged.
 */
Observable finite_valued_approximation(const Observable& f, double target_d2, const ApproximationOptions& options = {});

enum class Execution { serial, parallel };

struct ConvergenceSetup {
    std::string scenario = "converge";
    std::uint64_t seed = 0;
    std::size_t omega_samples = 20;
    std::size_t schedule_exponent = 14;  // n in {2^0, ..., 2^K}
    double tolerance = 0.01;
    double shulman_bound = 2.0;
    /// Horizon of the temperedness precondition; 0 means the largest scheduled n.
    std::size_t temper_horizon = 0;
    /// When set, the limit at ω is compared with the limit at T^g ω.
    std::optional<GroupElement> invariance_shift;
    double invariance_tolerance = 0.02;
    BarycentreOptions bary{};
    QuadratureOptions quad{1e-6};
};

struct ConvergenceRecord {
    std::size_t omega_id = 0;
    std::size_t n = 0;
    SpacePoint barycentre;
    double dist_to_reference = 0.0;
    double wall_ms = 0.0;
};

struct ComponentReference {
    std::uint64_t component = 0;
    SpacePoint point;
};

struct ConvergenceSummary {
    std::string scenario;
    std::uint64_t seed = 0;
    double tolerance = 0.0;
    bool pass = false;
    bool tempered = false;
    double max_shulman_ratio = 0.0;
    double max_final_quarter_dist = 0.0;
    std::vector<double> final_quarter_dist;  // per ω
    std::vector<ComponentReference> references;
    std::optional<double> invariance_max_dist;
    std::string failure;
};

struct ConvergenceResult {
    std::vector<ConvergenceRecord> records;  // sorted by (omega_id, n)
    ConvergenceSummary summary;
};

ConvergenceResult convergence_experiment(const Observable& f, const FolnerSequence& folner,
                                         const ConvergenceSetup& setup, Execution exec = Execution::parallel);

struct MaximalSetup {
    std::string scenario = "maximal";
    std::uint64_t seed = 0;
    std::size_t omega_samples = 500;
    std::size_t horizon = 1024;
    /// Empty: alpha_j = s 2^((j-3)/2), j = 0..7, with s = d_2(f, h) (1 if zero).
    std::vector<double> alphas;
    /// The first audit_omegas ω get the exact transport audit at dyadic n and n = N.
    /// The composed bound d(b_f, b_h) <= sqrt(orbit coupling cost) is checked at every (ω, n).
    std::size_t audit_omegas = 50;
    TransportOptions transport{4096};
    BarycentreOptions bary{};
    QuadratureOptions quad{1e-4};
};

struct MaximalEstimate {
    std::string scenario;
    std::uint64_t seed = 0;
    std::size_t horizon = 0;
    std::size_t omega_samples = 0;
    double d2 = 0.0;       // d_2(f, h)
    double l1_norm = 0.0;  // ||F||_1 = d_2(f, h)^2 with F = d(f, h)^2

    std::vector<double> alphas;
    std::vector<double> tail_probs;  // P{sup_{n<=N} d(b_f, b_h) > alpha}
    std::vector<double> bounds;      // fitted_c d2^2 / alpha^2
    double fitted_c = 0.0;

    std::vector<double> scalar_alphas;
    std::vector<double> scalar_tail_probs;  // P{sup_{n<=N} avg F > alpha}
    std::vector<double> scalar_bounds;      // scalar_fitted_c ||F||_1 / alpha
    double scalar_fitted_c = 0.0;

    std::vector<double> sup_dist;     // per ω
    std::vector<double> sup_average;  // per ω, maximal function of F

    std::size_t chain_checks = 0;
    std::size_t chain_violations = 0;  // d(b_f, b_h) > sqrt(orbit coupling cost)
    std::size_t audited_cells = 0;
    std::size_t lemma_violations = 0;     // d(b_f, b_h) > W2 + tolerance
    std::size_t coupling_violations = 0;  // W2^2 > orbit coupling cost + tolerance
    bool tails_dominated = true;
};

MaximalEstimate maximal_experiment(const Observable& f, const Observable& h, const FolnerSequence& folner,
                                   const MaximalSetup& setup, Execution exec = Execution::parallel);

}  // namespace hel
