#include "hel/barycentre.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hel/random.hpp"
#include "hel/tangent.hpp"

namespace hel {

std::string to_string(BarycentreMethod m) {
    switch (m) {
        case BarycentreMethod::euclidean_closed_form: return "euclidean_closed_form";
        case BarycentreMethod::inductive_refined: return "inductive_refined";
        case BarycentreMethod::tree_exact: return "tree_exact";
    }
    return "?";
}

namespace {

double functional(const FiniteMeasure& mu, std::span<const double> x) {
    const auto& space = mu.space();
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double d = raw::dist(space, mu.atoms()[i].coords(), x);
        s += mu.weights()[i] * d * d;
    }
    return s;
}

BarycentreResult euclidean_mean(const FiniteMeasure& mu) {
    const std::size_t dim = mu.space().coord_size();
    std::vector<double> mean(dim, 0.0);
    for (std::size_t i = 0; i < mu.size(); ++i)
        for (std::size_t k = 0; k < dim; ++k) mean[k] += mu.weights()[i] * mu.atoms()[i][k];
    std::vector<double> g(dim, 0.0);
    for (std::size_t i = 0; i < mu.size(); ++i)
        for (std::size_t k = 0; k < dim; ++k) g[k] += mu.weights()[i] * (mu.atoms()[i][k] - mean[k]);
    SpacePoint p(mu.space(), std::move(mean));
    const double f = functional(mu, p.coords());
    return {std::move(p), f, tangent::norm(g), 0, BarycentreMethod::euclidean_closed_form};
}

// F restricted to an edge is sum_i w_i (c_i + sigma_i s)^2 = s^2 + b s + c since the weights sum to 1.
struct EdgeQuadratic {
    double b = 0.0;
    double c = 0.0;
    double slope(double s) const { return 2.0 * s + b; }
    double value(double s) const { return s * s + b * s + c; }
};

double vertex_to_point(const TreeShape& tree, std::size_t vertex, std::span<const double> p) {
    const TreeEdge& E = tree.edge(static_cast<std::size_t>(p[0]));
    return std::min(p[1] + tree.vertex_distance(vertex, E.u), E.length - p[1] + tree.vertex_distance(vertex, E.v));
}

BarycentreResult tree_barycentre(const FiniteMeasure& mu) {
    const TreeShape& tree = mu.space().tree();
    std::vector<EdgeQuadratic> quad(tree.edge_count());
    for (std::size_t e = 0; e < tree.edge_count(); ++e) {
        const TreeEdge& E = tree.edge(e);
        EdgeQuadratic q;
        for (std::size_t i = 0; i < mu.size(); ++i) {
            const auto a = mu.atoms()[i].coords();
            const double w = mu.weights()[i];
            double c, sigma;
            if (static_cast<std::size_t>(a[0]) == e) {
                c = -a[1];
                sigma = 1.0;
            } else {
                const double du = vertex_to_point(tree, E.u, a);
                const double dv = vertex_to_point(tree, E.v, a);
                if (du <= dv) {
                    c = du;
                    sigma = 1.0;
                } else {
                    c = dv + E.length;
                    sigma = -1.0;
                }
            }
            q.b += 2.0 * w * c * sigma;
            q.c += w * c * c;
        }
        quad[e] = q;
    }

    std::size_t best_edge = 0;
    double best_s = 0.0, best_val = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < tree.edge_count(); ++e) {
        const double s = std::clamp(-0.5 * quad[e].b, 0.0, tree.edge(e).length);
        const double v = quad[e].value(s);
        if (v < best_val) {
            best_val = v;
            best_edge = e;
            best_s = s;
        }
    }
    SpacePoint p = tree_point(mu.space(), best_edge, best_s);

    // Steepest one-sided descent slope over the directions available at p.
    double min_slope = 0.0;
    const std::size_t pe = static_cast<std::size_t>(p[0]);
    const TreeEdge& PE = tree.edge(pe);
    const bool at_u = p[1] == 0.0, at_v = p[1] == PE.length;
    if (!at_u && !at_v) {
        const double slope = quad[pe].slope(p[1]);
        min_slope = std::min(slope, -slope);
    } else {
        const std::size_t vertex = at_u ? PE.u : PE.v;
        for (auto [nbr, e] : tree.neighbours(vertex)) {
            const TreeEdge& E = tree.edge(e);
            const double slope = (E.u == vertex) ? quad[e].slope(0.0) : -quad[e].slope(E.length);
            min_slope = std::min(min_slope, slope);
        }
    }
    const double f = functional(mu, p.coords());
    return {std::move(p), f, std::max(0.0, -min_slope) / 2.0, 1, BarycentreMethod::tree_exact};
}

// Solves the small symmetric positive system h s = v in place (v becomes s).
bool solve_dense(std::vector<double> h, std::vector<double>& v) {
    const std::size_t n = v.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(h[r * n + col]) > std::abs(h[piv * n + col])) piv = r;
        if (std::abs(h[piv * n + col]) < 1e-300) return false;
        if (piv != col) {
            for (std::size_t k = 0; k < n; ++k) std::swap(h[col * n + k], h[piv * n + k]);
            std::swap(v[col], v[piv]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = h[r * n + col] / h[col * n + col];
            for (std::size_t k = col; k < n; ++k) h[r * n + k] -= f * h[col * n + k];
            v[r] -= f * v[col];
        }
    }
    for (std::size_t col = n; col-- > 0;) {
        double s = v[col];
        for (std::size_t k = col + 1; k < n; ++k) s -= h[col * n + k] * v[k];
        v[col] = s / h[col * n + col];
    }
    return true;
}

std::vector<double> inductive_mean(const FiniteMeasure& mu, const BarycentreOptions& opt) {
    const auto& space = mu.space();
    const std::size_t m = mu.size();
    const double per_atom = std::ceil(1.0 / std::sqrt(opt.tol));
    const double wanted = 50.0 * static_cast<double>(m) * per_atom;
    const auto steps = static_cast<std::size_t>(std::min(wanted, static_cast<double>(std::max<std::size_t>(1, opt.inductive_cap))));

    std::vector<double> cumulative(m);
    std::partial_sum(mu.weights().begin(), mu.weights().end(), cumulative.begin());
    CounterRng rng(derive_seed(opt.seed, 0xBA5E));
    auto draw = [&]() -> std::span<const double> {
        const double u = rng.uniform() * cumulative.back();
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), m - 1);
        return mu.atoms()[k].coords();
    };

    const auto first = draw();
    std::vector<double> b(first.begin(), first.end()), next(b.size());
    for (std::size_t k = 1; k < steps; ++k) {
        raw::geodesic(space, b, draw(), 1.0 / static_cast<double>(k + 1), next);
        b.swap(next);
    }
    return b;
}

BarycentreResult riemannian_barycentre(const FiniteMeasure& mu, const BarycentreOptions& opt) {
    const auto& space = mu.space();
    const std::size_t td = space.tangent_dim();
    std::vector<double> x = inductive_mean(mu, opt);
    double fx = functional(mu, x);

    std::vector<double> v(td), h(td * td), step(td), cand(x.size());
    auto evaluate = [&](std::span<const double> at) {
        std::fill(v.begin(), v.end(), 0.0);
        std::fill(h.begin(), h.end(), 0.0);
        for (std::size_t i = 0; i < mu.size(); ++i)
            tangent::accumulate(space, at, mu.atoms()[i].coords(), mu.weights()[i], v, h, td);
        return tangent::norm(v);
    };

    std::vector<double> best_x = x;
    double best_r = std::numeric_limits<double>::infinity();
    for (std::size_t it = 0; it <= opt.max_refine_iterations; ++it) {
        const double r = evaluate(x);
        if (r < best_r) {
            best_r = r;
            best_x = x;
        }
        if (r <= opt.tol) {
            SpacePoint p(space, x);
            return {std::move(p), fx, r, static_cast<int>(it), BarycentreMethod::inductive_refined};
        }
        if (it == opt.max_refine_iterations) break;

        step = v;
        if (!solve_dense(h, step)) step = v;
        double slope = 0.0;  // -dF/d(eta) / 2 at eta = 0
        for (std::size_t k = 0; k < td; ++k) slope += v[k] * step[k];
        if (!(slope > 0.0)) {
            step = v;
            slope = r * r;
        }

        double eta = 1.0;
        std::vector<double> scaled(td);
        for (int tries = 0; tries < 60; ++tries, eta *= 0.5) {
            for (std::size_t k = 0; k < td; ++k) scaled[k] = eta * step[k];
            tangent::exp(space, x, scaled, cand);
            const double fc = functional(mu, cand);
            const bool armijo = fc <= fx - 2e-4 * eta * slope;
            const bool flat = std::abs(fc - fx) <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, fx);
            if (armijo || flat) {
                fx = fc;
                break;
            }
        }
        x.swap(cand);
        fx = functional(mu, x);
    }
    SpacePoint p(space, best_x);
    const double f = functional(mu, p.coords());
    throw ConvergenceError("barycentre: refinement did not reach tolerance (residual " + std::to_string(best_r) + ")",
                           BarycentreResult{std::move(p), f, best_r, static_cast<int>(opt.max_refine_iterations),
                                            BarycentreMethod::inductive_refined});
}

BarycentreResult factorwise_barycentre(const FiniteMeasure& mu, const BarycentreOptions& opt) {
    const auto& space = mu.space();
    const auto& fs = space.factors();
    std::vector<SpacePoint> components;
    double residual2 = 0.0;
    int iterations = 0;
    bool any_generic = false, any_tree = false;
    for (std::size_t f = 0; f < fs.size(); ++f) {
        std::vector<SpacePoint> atoms;
        atoms.reserve(mu.size());
        for (const auto& a : mu.atoms()) atoms.push_back(a.factor(f));
        FiniteMeasure marginal = FiniteMeasure::normalized(std::move(atoms), mu.weights());
        BarycentreOptions sub = opt;
        sub.seed = derive_seed(opt.seed, f + 1);
        auto r = barycentre(marginal, sub);
        residual2 += r.stationarity_residual * r.stationarity_residual;
        iterations += r.iterations;
        any_generic |= r.method == BarycentreMethod::inductive_refined;
        any_tree |= r.method == BarycentreMethod::tree_exact;
        components.push_back(std::move(r.point));
    }
    SpacePoint p = product_point(space, components);
    const double f = functional(mu, p.coords());
    const auto method = any_generic ? BarycentreMethod::inductive_refined
                        : any_tree  ? BarycentreMethod::tree_exact
                                    : BarycentreMethod::euclidean_closed_form;
    return {std::move(p), f, std::sqrt(residual2), iterations, method};
}

}  // namespace

BarycentreResult barycentre(const FiniteMeasure& mu, const BarycentreOptions& options) {
    if (!(options.tol > 0.0)) throw DomainError("barycentre tolerance must be positive");
    const auto& space = mu.space();
    switch (space.kind()) {
        case SpaceKind::euclidean:
            return options.force_generic ? riemannian_barycentre(mu, options) : euclidean_mean(mu);
        case SpaceKind::metric_tree: return tree_barycentre(mu);
        case SpaceKind::hyperboloid2: return riemannian_barycentre(mu, options);
        case SpaceKind::product:
            return space.is_riemannian() ? riemannian_barycentre(mu, options) : factorwise_barycentre(mu, options);
    }
    throw DomainError("unsupported space");
}

double variance_gap(const FiniteMeasure& mu, const SpacePoint& x, const BarycentreResult& bary) {
    require_same_space(mu.space(), x.space(), "variance_gap");
    const double d = dist(x, bary.point);
    return second_moment(mu, x) - d * d;
}

LipschitzCheck lipschitz_check(const FiniteMeasure& mu, const FiniteMeasure& nu, const BarycentreOptions& options,
                               const TransportOptions& transport) {
    require_same_space(mu.space(), nu.space(), "lipschitz_check");
    const auto bm = barycentre(mu, options);
    const auto bn = barycentre(nu, options);
    const double lhs = dist(bm.point, bn.point);
    const double rhs = w2_distance(mu, nu, transport).distance;
    return {lhs, rhs, lhs <= rhs + 1e-6 * (1.0 + rhs)};
}

}  // namespace hel
