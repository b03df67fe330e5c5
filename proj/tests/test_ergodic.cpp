#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hel/ergodic.hpp"
#include "hel/errors.hpp"
#include "hel/random.hpp"
#include "hel/sampling.hpp"
#include "oracles.hpp"

using namespace hel;

namespace {

System golden() { return System::torus_rotation(Group::integers(), 1, {{kGoldenRotation, 0, 0}}); }

SpaceDescriptor tripod() {
    const double legs[] = {1.0, 1.5, 2.0};
    return SpaceDescriptor::metric_tree(TreeShape::star(legs));
}

OmegaPoint atom(std::size_t i) {
    OmegaPoint w;
    w.state = i;
    return w;
}

}  // namespace

TEST(EmpiricalMeasure, Examples) {
    const auto sys = golden();
    const auto f = observables::circle(sys);
    const auto z = FolnerSequence::interval(Group::integers());
    const auto w = sys.sample(1, 1)[0];
    EXPECT_EQ(empirical_measure(f, z, w, 1), FiniteMeasure::dirac(f(w)));

    const auto cyc = System::cyclic_rotation(4);
    const auto g = observables::atom_values(
        cyc, {euclidean_point({0}), euclidean_point({1}), euclidean_point({2}), euclidean_point({3})});
    const auto nu = empirical_measure(g, FolnerSequence::interval(cyc.group()), atom(2), 4);
    ASSERT_EQ(nu.size(), 4u);
    for (const double x : nu.weights()) EXPECT_DOUBLE_EQ(x, 0.25);

    const auto c = observables::constant(sys, hyperboloid_polar(1.0, 2.0));
    const auto one = empirical_measure(c, z, w, 50);
    EXPECT_EQ(one.size(), 1u);
    EXPECT_EQ(one.weights()[0], 1.0);
    EXPECT_THROW(empirical_measure(f, FolnerSequence::box(Group::lattice(2)), w, 3), DomainError);
}

TEST(EmpiricalBarycentre, EuclideanEqualsErgodicAverage) {
    const auto sys = System::torus_rotation(Group::lattice(2), 2, {{kGoldenRotation, 0.2, 0}, {0.1, std::sqrt(2.0) - 1, 0}});
    const auto f = observables::torus_embedding(sys);
    const auto box = FolnerSequence::box(sys.group());
    for (const auto& w : sys.sample(3, 5))
        for (std::size_t n : {1u, 2u, 7u, 20u}) {
            const auto b = empirical_barycentre(f, box, w, n);
            const auto avg = ergodic_average(f, box, w, n);
            for (std::size_t i = 0; i < 4; ++i) ASSERT_NEAR(b.point[i], avg[i], 1e-10);
        }
}

TEST(EmpiricalBarycentre, ConstantObservable) {
    const auto sys = golden();
    const auto p = hyperboloid_polar(0.7, 1.0);
    const auto c = observables::constant(sys, p);
    for (std::size_t n : {1u, 10u, 100u})
        EXPECT_EQ(empirical_barycentre(c, FolnerSequence::interval(sys.group()), sys.sample(2, 1)[0], n).point, p);
}

TEST(EmpiricalBarycentre, FullPeriodEqualsPushforward) {
    const auto cyc = System::cyclic_rotation(5);
    std::vector<SpacePoint> vals;
    for (int i = 0; i < 5; ++i) vals.push_back(hyperboloid_polar(0.3 * i, 1.3 * i));
    const auto f = observables::atom_values(cyc, vals);
    BarycentreOptions opt;
    opt.seed = 9;
    const auto ref = pushforward_reference(f, {}, std::nullopt, opt);
    for (std::size_t s = 0; s < 5; ++s)
        EXPECT_LT(dist(empirical_barycentre(f, FolnerSequence::interval(cyc.group()), atom(s), 5, opt).point, ref.point),
                  1e-8);
}

TEST(PushforwardReference, Examples) {
    const auto sys = golden();
    EXPECT_LT(dist(pushforward_reference(observables::circle(sys)).point, euclidean_point({0, 0})), 1e-12);

    // Partition on a finite model: barycentre of sum p_i delta_{x_i}.
    const auto fin = System::finite_permutation(Group::integers(), {0.5, 0.25, 0.25}, {{0, 2, 1}});
    const auto f = observables::atom_values(fin, {euclidean_point({0}), euclidean_point({4}), euclidean_point({8})});
    EXPECT_DOUBLE_EQ(pushforward_reference(f).point[0], 3.0);
    EXPECT_DOUBLE_EQ(pushforward_reference(f, {}, 1).point[0], 6.0);  // orbit {1, 2}

    // Hyperbolic loop: stable under one more refinement.
    const auto h = observables::hyperbolic_loop(sys);
    QuadratureOptions q;
    q.precision = 1e-8;
    const auto ref = pushforward_reference(h, q);
    const auto finer = barycentre(pushforward_measure(h, 1 << 14));
    EXPECT_LT(dist(ref.point, finer.point), 1e-8);
    const auto grid = oracle::hyperboloid_grid_barycentre(pushforward_measure(h, 512));
    EXPECT_LT(dist(ref.point, grid), 2e-3);
}

TEST(PushforwardReference, TripodLoopMatchesClosedForm) {
    // Mass 2L_i/9 spread uniformly along each leg; folding legs 1 and 2 onto the
    // negative half-line, the mean signed position is (4 - 1 - 2.25)/9 = 1/12 on leg 3.
    const auto t = tripod();
    QuadratureOptions q;
    q.precision = 1e-6;
    const auto ref = pushforward_reference(observables::tripod_loop(golden(), t), q);
    EXPECT_LT(dist(ref.point, tree_point(t, 2, 1.0 / 12.0)), 1e-5);
    const auto oracle_point = oracle::tree_grid_barycentre(pushforward_measure(observables::tripod_loop(golden(), t), 900));
    EXPECT_LT(dist(ref.point, oracle_point), 2e-3);
}

TEST(PushforwardReference, RefinementFailureRaises) {
    QuadratureOptions q;
    q.precision = 1e-15;
    q.max_nodes = 4096;
    EXPECT_THROW(pushforward_reference(observables::tripod_loop(golden(), tripod()), q), PrecisionError);
}

TEST(D2Distance, Examples) {
    const auto sys = golden();
    const auto f = observables::circle(sys);
    EXPECT_EQ(d2_distance(f, f), 0.0);
    const auto a = observables::constant(sys, euclidean_point({0, 0}));
    const auto b = observables::constant(sys, euclidean_point({3, 4}));
    EXPECT_DOUBLE_EQ(d2_distance(a, b), 5.0);
    EXPECT_NEAR(d2_distance(f, a), 1.0, 1e-12);
    EXPECT_THROW(d2_distance(f, observables::hyperbolic_loop(sys)), DomainError);
}

TEST(D2Distance, TriangleInequalityOnRandomPartitions) {
    const std::size_t k = 12;
    std::vector<double> w(k, 1.0 / k);
    std::vector<std::size_t> perm(k);
    for (std::size_t i = 0; i < k; ++i) perm[i] = (i + 1) % k;
    const auto sys = System::finite_permutation(Group::integers(), w, {perm});
    CounterRng rng(31);
    for (const auto& [name, space] : std::vector<std::pair<std::string, SpaceDescriptor>>{
             {"e2", SpaceDescriptor::euclidean(2)}, {"h2", SpaceDescriptor::hyperboloid2()}, {"tree", tripod()}}) {
        auto random_obs = [&] {
            std::vector<SpacePoint> vals;
            for (std::size_t i = 0; i < k; ++i) vals.push_back(sampling::random_point(space, rng));
            return observables::atom_values(sys, vals);
        };
        for (int trial = 0; trial < 100; ++trial) {
            const auto f = random_obs(), g = random_obs(), h = random_obs();
            ASSERT_LE(d2_distance(f, h), d2_distance(f, g) + d2_distance(g, h) + 1e-9) << name;
        }
    }
}

TEST(FiniteValuedApproximation, Examples) {
    const auto cyc = System::cyclic_rotation(3);
    const auto f = observables::atom_values(cyc, {euclidean_point({0}), euclidean_point({1}), euclidean_point({5})});
    const auto same = finite_valued_approximation(f, 0.5);
    EXPECT_EQ(same.values().size(), 3u);

    const auto sys = golden();
    const auto circle = observables::circle(sys);
    const auto h = finite_valued_approximation(circle, 0.1);
    EXPECT_TRUE(h.is_partition());
    EXPECT_LE(h.values().size(), static_cast<std::size_t>(std::ceil(2 * std::numbers::pi / 0.05)));
    EXPECT_LT(d2_distance(circle, h, {1e-4}), 0.1);

    double prev = HUGE_VAL;
    for (const double t : {0.8, 0.4, 0.2, 0.1, 0.05}) {
        const double d = d2_distance(circle, finite_valued_approximation(circle, t), {1e-4});
        EXPECT_LT(d, prev);
        EXPECT_LT(d, t);
        EXPECT_GT(d, 0.85 * t);
        prev = d;
    }
    ApproximationOptions first;
    first.calibration_steps = 0;
    const double uncalibrated = d2_distance(circle, finite_valued_approximation(circle, 0.4, first), {1e-4});
    EXPECT_LT(uncalibrated, 0.4);
    EXPECT_LT(uncalibrated, d2_distance(circle, finite_valued_approximation(circle, 0.4), {1e-4}));
    ApproximationOptions tight;
    tight.net_cap = 10;
    EXPECT_THROW(finite_valued_approximation(circle, 0.01, tight), CapacityError);
}

TEST(ConvergenceExperiment, FiniteTransitiveHitsZero) {
    const auto cyc = System::cyclic_rotation(8);
    std::vector<SpacePoint> vals;
    for (int i = 0; i < 8; ++i) vals.push_back(euclidean_point({std::cos(i * 1.0), std::sin(2.0 * i)}));
    const auto f = observables::atom_values(cyc, vals);
    ConvergenceSetup s;
    s.omega_samples = 6;
    s.schedule_exponent = 5;
    s.tolerance = 1e-12;
    const auto r = convergence_experiment(f, FolnerSequence::interval(cyc.group()), s);
    EXPECT_TRUE(r.summary.pass) << r.summary.failure;
    for (const auto& rec : r.records)
        if (rec.n >= 8) EXPECT_EQ(rec.dist_to_reference, 0.0);
}

TEST(ConvergenceExperiment, GoldenCircleShortRun) {
    const auto sys = golden();
    ConvergenceSetup s;
    s.omega_samples = 5;
    s.schedule_exponent = 10;
    s.tolerance = 0.01;
    const auto r = convergence_experiment(observables::circle(sys), FolnerSequence::interval(sys.group()), s);
    EXPECT_TRUE(r.summary.pass) << r.summary.failure;
    EXPECT_EQ(r.records.size(), 5u * 11u);
    EXPECT_EQ(r.summary.final_quarter_dist.size(), 5u);
    for (std::size_t i = 1; i < r.records.size(); ++i) {
        const auto& a = r.records[i - 1];
        const auto& b = r.records[i];
        EXPECT_TRUE(a.omega_id < b.omega_id || (a.omega_id == b.omega_id && a.n < b.n));
    }
}

TEST(ConvergenceExperiment, SerialAndParallelAgreeBitwise) {
    const auto sys = golden();
    ConvergenceSetup s;
    s.omega_samples = 8;
    s.schedule_exponent = 8;
    s.seed = 77;
    const auto f = observables::hyperbolic_loop(sys);
    const auto z = FolnerSequence::interval(sys.group());
    const auto a = convergence_experiment(f, z, s, Execution::serial);
    const auto b = convergence_experiment(f, z, s, Execution::parallel);
    ASSERT_EQ(a.records.size(), b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        EXPECT_EQ(a.records[i].barycentre, b.records[i].barycentre);
        EXPECT_EQ(a.records[i].dist_to_reference, b.records[i].dist_to_reference);
    }
    EXPECT_EQ(a.summary.max_final_quarter_dist, b.summary.max_final_quarter_dist);
}

TEST(ConvergenceExperiment, TwoComponentLimitsAreInvariant) {
    const auto sys = System::two_component(kGoldenRotation, std::sqrt(2.0) - 1.0);
    const auto f = observables::component_circles(sys, {0, 0}, 1.0, {3, 1}, 0.5);
    ConvergenceSetup s;
    s.omega_samples = 6;
    s.schedule_exponent = 11;
    s.invariance_shift = GroupElement{{5, 0, 0}};
    const auto r = convergence_experiment(f, FolnerSequence::interval(sys.group()), s);
    EXPECT_TRUE(r.summary.pass) << r.summary.failure;
    ASSERT_EQ(r.summary.references.size(), 2u);
    EXPECT_LT(dist(r.summary.references[1].point, euclidean_point({3, 1})), 1e-12);
    ASSERT_TRUE(r.summary.invariance_max_dist.has_value());
    EXPECT_LT(*r.summary.invariance_max_dist, 0.02);
}

TEST(ConvergenceExperiment, NonTemperedSequenceFlagsFailure) {
    const auto sys = golden();
    std::vector<GroupElement> big, small{GroupElement{}};
    for (std::int64_t i = 0; i < 100; ++i) big.push_back({{i, 0, 0}});
    const auto seq = FolnerSequence::custom(sys.group(), {big, small});
    ConvergenceSetup s;
    s.omega_samples = 2;
    s.schedule_exponent = 1;
    s.tolerance = 10.0;
    const auto r = convergence_experiment(observables::circle(sys), seq, s);
    EXPECT_FALSE(r.summary.pass);
    EXPECT_FALSE(r.summary.tempered);
    EXPECT_EQ(r.records.size(), 4u);
    EXPECT_NE(r.summary.failure.find("tempered"), std::string::npos);
}

TEST(MaximalExperiment, IdenticalObservablesGiveZero) {
    const auto sys = golden();
    const auto f = observables::circle(sys);
    MaximalSetup s;
    s.omega_samples = 20;
    s.horizon = 64;
    s.audit_omegas = 2;
    const auto est = maximal_experiment(f, f, FolnerSequence::interval(sys.group()), s);
    EXPECT_EQ(est.fitted_c, 0.0);
    for (const double t : est.tail_probs) EXPECT_EQ(t, 0.0);
    for (const double v : est.sup_dist) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(est.lemma_violations + est.coupling_violations + est.chain_violations, 0u);
}

TEST(MaximalExperiment, TailsDominatedAndSupMonotoneInHorizon) {
    const auto sys = golden();
    const auto f = observables::circle(sys);
    const auto h = finite_valued_approximation(f, 0.5);
    const auto z = FolnerSequence::interval(sys.group());
    MaximalSetup s;
    s.omega_samples = 60;
    s.horizon = 128;
    s.audit_omegas = 10;
    const auto est = maximal_experiment(f, h, z, s);
    EXPECT_TRUE(est.tails_dominated);
    for (std::size_t j = 0; j < est.alphas.size(); ++j) EXPECT_LE(est.tail_probs[j], est.bounds[j] * (1 + 1e-12));
    for (std::size_t j = 1; j < est.alphas.size(); ++j) EXPECT_LE(est.tail_probs[j], est.tail_probs[j - 1]);
    EXPECT_EQ(est.lemma_violations + est.coupling_violations + est.chain_violations, 0u);
    EXPECT_EQ(est.audited_cells, 10u * 8u);
    EXPECT_GT(est.fitted_c, 0.0);

    s.horizon = 64;
    const auto shorter = maximal_experiment(f, h, z, s);
    for (std::size_t i = 0; i < est.sup_dist.size(); ++i) {
        EXPECT_LE(shorter.sup_dist[i], est.sup_dist[i]);
        EXPECT_LE(shorter.sup_average[i], est.sup_average[i]);
    }
}

TEST(MaximalExperiment, GenericPathMatchesRunningSums) {
    // The box family in Z^1 is the same sets as the interval family but takes the generic path.
    const auto sys = golden();
    const auto f = observables::circle(sys);
    const auto h = finite_valued_approximation(f, 0.5);
    MaximalSetup s;
    s.omega_samples = 10;
    s.horizon = 40;
    s.audit_omegas = 0;
    const auto a = maximal_experiment(f, h, FolnerSequence::interval(sys.group()), s, Execution::serial);
    const auto b = maximal_experiment(f, h, FolnerSequence::box(sys.group()), s, Execution::serial);
    for (std::size_t i = 0; i < a.sup_dist.size(); ++i) {
        EXPECT_NEAR(a.sup_dist[i], b.sup_dist[i], 1e-12);
        EXPECT_NEAR(a.sup_average[i], b.sup_average[i], 1e-12);
    }
}

TEST(MaximalExperiment, HyperbolicTargetAuditsHold) {
    const auto sys = golden();
    const auto f = observables::hyperbolic_loop(sys);
    const auto h = finite_valued_approximation(f, 0.5);
    MaximalSetup s;
    s.omega_samples = 8;
    s.horizon = 32;
    s.audit_omegas = 8;
    const auto est = maximal_experiment(f, h, FolnerSequence::interval(sys.group()), s);
    EXPECT_EQ(est.lemma_violations + est.coupling_violations + est.chain_violations, 0u);
    EXPECT_TRUE(est.tails_dominated);
}
