#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hel::oracle {

double permutation_w2(const std::vector<SpacePoint>& xs, const std::vector<SpacePoint>& ys) {
    std::vector<std::size_t> perm(ys.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    double best = std::numeric_limits<double>::infinity();
    do {
        double s = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double d = dist(xs[i], ys[perm[i]]);
            s += d * d;
        }
        best = std::min(best, s / static_cast<double>(xs.size()));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::sqrt(best);
}

namespace {

SpacePoint from_klein(double k1, double k2) {
    const double x0 = 1.0 / std::sqrt(1.0 - k1 * k1 - k2 * k2);
    return SpacePoint(SpaceDescriptor::hyperboloid2(), {x0, k1 * x0, k2 * x0});
}

}  // namespace

SpacePoint hyperboloid_grid_barycentre(const FiniteMeasure& mu, int grid) {
    double lo1 = 1, hi1 = -1, lo2 = 1, hi2 = -1;
    for (const auto& a : mu.atoms()) {
        const double k1 = a[1] / a[0], k2 = a[2] / a[0];
        lo1 = std::min(lo1, k1);
        hi1 = std::max(hi1, k1);
        lo2 = std::min(lo2, k2);
        hi2 = std::max(hi2, k2);
    }
    auto F = [&](double k1, double k2) {
        if (k1 * k1 + k2 * k2 >= 1.0) return std::numeric_limits<double>::infinity();
        return second_moment(mu, from_klein(k1, k2));
    };
    double b1 = lo1, b2 = lo2, bf = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid; ++i)
        for (int j = 0; j < grid; ++j) {
            const double k1 = lo1 + (hi1 - lo1) * i / (grid - 1);
            const double k2 = lo2 + (hi2 - lo2) * j / (grid - 1);
            const double f = F(k1, k2);
            if (f < bf) {
                bf = f;
                b1 = k1;
                b2 = k2;
            }
        }
    double step = std::max({(hi1 - lo1), (hi2 - lo2), 1e-6}) / (grid - 1);
    while (step > 1e-12) {
        bool moved = false;
        const double cand[4][2] = {{b1 + step, b2}, {b1 - step, b2}, {b1, b2 + step}, {b1, b2 - step}};
        for (const auto& c : cand) {
            const double f = F(c[0], c[1]);
            if (f < bf) {
                bf = f;
                b1 = c[0];
                b2 = c[1];
                moved = true;
            }
        }
        if (!moved) step *= 0.5;
    }
    return from_klein(b1, b2);
}

SpacePoint tree_grid_barycentre(const FiniteMeasure& mu, int samples_per_edge) {
    const auto& space = mu.space();
    const TreeShape& tree = space.tree();
    std::size_t be = 0;
    double bs = 0.0, bf = std::numeric_limits<double>::infinity();
    auto F = [&](std::size_t e, double s) { return second_moment(mu, tree_point(space, e, s)); };
    for (std::size_t e = 0; e < tree.edge_count(); ++e) {
        const double len = tree.edge(e).length;
        for (int k = 0; k < samples_per_edge; ++k) {
            const double s = len * k / (samples_per_edge - 1);
            const double f = F(e, s);
            if (f < bf) {
                bf = f;
                be = e;
                bs = s;
            }
        }
    }
    const double len = tree.edge(be).length;
    const double h = len / (samples_per_edge - 1);
    double a = std::max(0.0, bs - h), b = std::min(len, bs + h);
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - g * (b - a), d = a + g * (b - a);
    for (int it = 0; it < 200 && b - a > 1e-13; ++it) {
        if (F(be, c) < F(be, d)) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    const double s = 0.5 * (a + b);
    return F(be, s) < bf ? tree_point(space, be, s) : tree_point(space, be, bs);
}

double brute_shulman_ratio(const std::vector<std::vector<std::vector<std::int64_t>>>& sets, std::size_t n) {
    if (n <= 1) return 0.0;
    const auto& fn = sets.at(n - 1);
    std::set<std::vector<std::int64_t>> product;
    for (std::size_t k = 1; k < n; ++k)
        for (const auto& a : sets.at(k - 1))
            for (const auto& b : fn) {
                std::vector<std::int64_t> c(a.size());
                for (std::size_t i = 0; i < a.size(); ++i) c[i] = b[i] - a[i];
                product.insert(std::move(c));
            }
    return static_cast<double>(product.size()) / static_cast<double>(fn.size());
}

}  // namespace hel::oracle
