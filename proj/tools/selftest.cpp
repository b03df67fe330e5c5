#include "selftest.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "hel/barycentre.hpp"
#include "hel/dynamics.hpp"
#include "hel/ergodic.hpp"
#include "hel/sampling.hpp"

namespace hel::tools {

namespace {

struct Suite {
    std::string name;
    std::size_t cases = 0;
    std::size_t failures = 0;
    double worst = 0.0;
};

void report(std::ostream& out, const Suite& s) {
    out << (s.failures == 0 ? "PASS " : "FAIL ") << s.name << "  cases=" << s.cases << " failures=" << s.failures
        << " worst=" << s.worst << '\n';
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
    return h;
}

}  // namespace

bool run_selftest(std::uint64_t seed, std::size_t scale, std::ostream& out) {
    const std::size_t n = 100 * scale;
    const auto spaces = sampling::standard_spaces();
    bool all = true;
    auto run = [&](const std::string& name, const std::function<double(CounterRng&, const SpaceDescriptor&)>& one,
                   double limit) {
        for (std::size_t k = 0; k < spaces.size(); ++k) {
            Suite s{name + "/" + spaces[k].name};
            CounterRng rng(derive_seed(seed, fnv1a(s.name)));
            for (std::size_t i = 0; i < n; ++i, ++s.cases) {
                double v = one(rng, spaces[k].space);
                s.worst = std::max(s.worst, v);
                if (!(v <= limit)) ++s.failures;
            }
            report(out, s);
            all = all && s.failures == 0;
        }
    };

    run("cn_inequality", [](CounterRng& rng, const SpaceDescriptor& sp) {
        auto x = sampling::random_point(sp, rng), y = sampling::random_point(sp, rng), z = sampling::random_point(sp, rng);
        return cn_inequality_residual(x, y, z);
    }, 1e-9);

    run("metric_axioms", [](CounterRng& rng, const SpaceDescriptor& sp) {
        auto x = sampling::random_point(sp, rng), y = sampling::random_point(sp, rng), z = sampling::random_point(sp, rng);
        double dxy = dist(x, y);
        double sym = std::abs(dxy - dist(y, x));
        double tri = dist(x, z) - dxy - dist(y, z);
        double t = rng.uniform();
        double geo = std::abs(dist(x, geodesic_point(x, y, t)) - t * dxy);
        return std::max({sym, tri, geo / (1.0 + dxy)});
    }, 1e-9);

    run("lipschitz_barycentre", [](CounterRng& rng, const SpaceDescriptor& sp) {
        auto mu = sampling::random_measure(sp, rng, 5), nu = sampling::random_measure(sp, rng, 5);
        auto c = lipschitz_check(mu, nu);
        return c.holds ? 0.0 : c.lhs - c.rhs;
    }, 0.0);

    run("variance_gap", [](CounterRng& rng, const SpaceDescriptor& sp) {
        auto mu = sampling::random_measure(sp, rng, 6);
        return -variance_gap(mu, sampling::random_point(sp, rng), barycentre(mu));
    }, 1e-8);

    run("w2_axioms", [](CounterRng& rng, const SpaceDescriptor& sp) {
        auto a = sampling::random_measure(sp, rng, 5), b = sampling::random_measure(sp, rng, 5),
             c = sampling::random_measure(sp, rng, 5);
        double ab = w2_distance(a, b).distance;
        double sym = std::abs(ab - w2_distance(b, a).distance);
        double self = w2_distance(a, a).distance;
        double tri = w2_distance(a, c).distance - ab - w2_distance(b, c).distance;
        return std::max({sym, self, tri});
    }, 1e-9);

    run("tv_to_w2", [](CounterRng& rng, const SpaceDescriptor& sp) {
        std::vector<SpacePoint> support;
        for (int i = 0; i < 6; ++i) support.push_back(sampling::random_point(sp, rng));
        auto c = tv_to_w2_bound_check(sampling::random_measure_on(support, rng), sampling::random_measure_on(support, rng));
        return c.holds ? 0.0 : c.w2 - c.bound;
    }, 0.0);

    {
        Suite s{"euclidean_generic_vs_closed_form"};
        CounterRng rng(derive_seed(seed, 0xE0C1));
        BarycentreOptions generic;
        generic.force_generic = true;
        auto sp = SpaceDescriptor::euclidean(3);
        for (std::size_t i = 0; i < n; ++i, ++s.cases) {
            auto mu = sampling::random_measure(sp, rng, 12);
            double d = dist(barycentre(mu).point, barycentre(mu, generic).point);
            s.worst = std::max(s.worst, d);
            if (!(d <= 1e-6)) ++s.failures;
        }
        report(out, s);
        all = all && s.failures == 0;
    }

    {
        Suite s{"shulman_interval_N100"};
        auto r = tempered_report(FolnerSequence::interval(Group::integers()), 100, 2.0);
        s.cases = 1;
        s.worst = r.max_ratio;
        if (std::abs(r.max_ratio - 1.98) > 1e-12 || !r.is_tempered) ++s.failures;
        report(out, s);
        all = all && s.failures == 0;
    }

    {
        Suite s{"action_homomorphism"};
        std::vector<System> systems = {
            System::cyclic_rotation(7),
            System::torus_rotation(Group::lattice(2), 2, {{0.6180339887498949, 0.25}, {0.1, 0.4142135623730951}}),
            System::torus_rotation(Group::heisenberg(), 2, {{0.3, 0.0}, {0.0, 0.7}}),
            System::two_component(0.6180339887498949, 0.4142135623730951),
        };
        for (const auto& sys : systems) {
            ++s.cases;
            auto pts = sys.sample(derive_seed(seed, 0xAC7), 64);
            if (!sys.check_homomorphism(pts) || !sys.check_measure_preservation()) ++s.failures;
        }
        report(out, s);
        all = all && s.failures == 0;
    }

    {
        Suite s{"hilbert_reduction"};
        auto sys = System::torus_rotation(Group::integers(), 1, {{0.6180339887498949}});
        auto f = observables::circle(sys);
        auto folner = FolnerSequence::interval(Group::integers());
        for (const auto& w : sys.sample(derive_seed(seed, 0x4B), n / 10 + 1)) {
            for (std::size_t m : {1u, 7u, 64u, 333u}) {
                ++s.cases;
                auto avg = ergodic_average(f, folner, w, m);
                auto b = empirical_barycentre(f, folner, w, m);
                double d = std::hypot(avg[0] - b.point[0], avg[1] - b.point[1]);
                s.worst = std::max(s.worst, d);
                if (!(d <= 1e-10)) ++s.failures;
            }
        }
        report(out, s);
        all = all && s.failures == 0;
    }

    out << (all ? "selftest: all suites passed" : "selftest: FAILURES") << '\n';
    return all;
}

}  // namespace hel::tools
