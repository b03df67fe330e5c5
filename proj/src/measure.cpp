#include "hel/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hel/errors.hpp"
#include "hel/transport.hpp"

namespace hel {

namespace {

constexpr double kMassTolerance = 1e-12;

std::size_t index_of(const std::vector<SpacePoint>& sorted, const SpacePoint& p) {
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), p);
    if (it == sorted.end() || !(*it == p)) throw Error("atom missing from support");
    return static_cast<std::size_t>(it - sorted.begin());
}

long double total_mass(std::span<const double> w) {
    long double s = 0.0L;
    for (double x : w) s += x;
    return s;
}

}  // namespace

FiniteMeasure::FiniteMeasure(std::vector<SpacePoint> atoms, std::vector<double> weights) {
    if (atoms.empty()) throw DomainError("measure needs at least one atom");
    const long double mass = total_mass(weights);
    if (std::abs(mass - 1.0L) > kMassTolerance)
        throw DomainError("measure weights must sum to 1 (got " + std::to_string(static_cast<double>(mass)) + ")");
    merge_and_validate(std::move(atoms), std::move(weights));
}

FiniteMeasure FiniteMeasure::normalized(std::vector<SpacePoint> atoms, std::vector<double> weights) {
    if (atoms.empty()) throw DomainError("measure needs at least one atom");
    const long double mass = total_mass(weights);
    if (!(mass > 0.0L)) throw DomainError("measure weights must have positive total");
    FiniteMeasure m;
    m.merge_and_validate(std::move(atoms), std::move(weights));
    for (double& w : m.weights_) w = static_cast<double>(w / mass);
    return m;
}

FiniteMeasure FiniteMeasure::dirac(SpacePoint atom) { return FiniteMeasure({std::move(atom)}, {1.0}); }

FiniteMeasure FiniteMeasure::uniform(std::vector<SpacePoint> atoms) {
    std::vector<double> w(atoms.size(), 1.0);
    return normalized(std::move(atoms), std::move(w));
}

void FiniteMeasure::merge_and_validate(std::vector<SpacePoint> atoms, std::vector<double> weights) {
    if (atoms.size() != weights.size()) throw DomainError("measure atoms and weights differ in length");
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        require_same_space(atoms[0].space(), atoms[i].space(), "FiniteMeasure");
        if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) throw DomainError("measure weights must be positive");
    }
    std::vector<std::size_t> order(atoms.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return atoms[a] < atoms[b]; });
    atoms_.clear();
    weights_.clear();
    atoms_.reserve(atoms.size());
    weights_.reserve(atoms.size());
    for (std::size_t k : order) {
        if (!atoms_.empty() && atoms_.back() == atoms[k]) {
            weights_.back() += weights[k];
        } else {
            atoms_.push_back(std::move(atoms[k]));
            weights_.push_back(weights[k]);
        }
    }
}

double second_moment(const FiniteMeasure& mu, const SpacePoint& x) {
    require_same_space(mu.space(), x.space(), "second_moment");
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double d = raw::dist(x.space(), mu.atoms()[i].coords(), x.coords());
        s += mu.weights()[i] * d * d;
    }
    return s;
}

double tv_distance(const FiniteMeasure& mu, const FiniteMeasure& nu) {
    require_same_space(mu.space(), nu.space(), "tv_distance");
    // Both supports are sorted: merge-walk them.
    double l1 = 0.0;
    std::size_t i = 0, j = 0;
    while (i < mu.size() || j < nu.size()) {
        if (j == nu.size() || (i < mu.size() && mu.atoms()[i] < nu.atoms()[j])) {
            l1 += mu.weights()[i++];
        } else if (i == mu.size() || nu.atoms()[j] < mu.atoms()[i]) {
            l1 += nu.weights()[j++];
        } else {
            l1 += std::abs(mu.weights()[i++] - nu.weights()[j++]);
        }
    }
    return std::clamp(0.5 * l1, 0.0, 1.0);
}

std::vector<SpacePoint> union_support(const FiniteMeasure& mu, const FiniteMeasure& nu) {
    require_same_space(mu.space(), nu.space(), "union_support");
    std::vector<SpacePoint> out;
    out.reserve(mu.size() + nu.size());
    std::set_union(mu.atoms().begin(), mu.atoms().end(), nu.atoms().begin(), nu.atoms().end(),
                   std::back_inserter(out));
    return out;
}

double Coupling::marginal_error() const {
    std::vector<double> r(rows.size(), 0.0), c(cols.size(), 0.0);
    for (const auto& e : entries) {
        r.at(e.row) += e.mass;
        c.at(e.col) += e.mass;
    }
    double err = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) err = std::max(err, std::abs(r[i] - rows.weights()[i]));
    for (std::size_t j = 0; j < c.size(); ++j) err = std::max(err, std::abs(c[j] - cols.weights()[j]));
    return err;
}

double coupling_cost(const Coupling& coupling) {
    const auto& space = coupling.rows.space();
    double s = 0.0;
    for (const auto& e : coupling.entries) {
        const double d = raw::dist(space, coupling.rows.atoms()[e.row].coords(), coupling.cols.atoms()[e.col].coords());
        s += e.mass * d * d;
    }
    return s;
}

W2Result w2_distance(const FiniteMeasure& mu, const FiniteMeasure& nu, const TransportOptions& options) {
    require_same_space(mu.space(), nu.space(), "w2_distance");
    if (mu.size() > options.support_cap || nu.size() > options.support_cap)
        throw CapacityError("w2_distance: support size " + std::to_string(std::max(mu.size(), nu.size())) +
                            " exceeds cap " + std::to_string(options.support_cap));
    const auto& space = mu.space();
    const std::size_t m = mu.size(), n = nu.size();
    std::vector<double> cost(m * n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double d = raw::dist(space, mu.atoms()[i].coords(), nu.atoms()[j].coords());
            cost[i * n + j] = d * d;
        }
    const TransportSolution sol = solve_transport(mu.weights(), nu.weights(), cost);
    Coupling coupling{mu, nu, {}};
    coupling.entries.reserve(sol.plan.size());
    for (const auto& p : sol.plan) coupling.entries.push_back({p.row, p.col, p.mass});
    const double c = std::max(0.0, sol.cost);
    return W2Result{std::sqrt(c), c, std::move(coupling)};
}

Coupling orbit_coupling(std::span<const std::pair<SpacePoint, SpacePoint>> pairs, std::span<const double> weights) {
    if (pairs.size() != weights.size()) throw DomainError("orbit_coupling: pairs and weights differ in length");
    if (pairs.empty()) throw DomainError("orbit_coupling: no pairs");
    std::vector<SpacePoint> xs, ys;
    xs.reserve(pairs.size());
    ys.reserve(pairs.size());
    for (const auto& [x, y] : pairs) {
        require_same_space(pairs[0].first.space(), x.space(), "orbit_coupling");
        require_same_space(pairs[0].second.space(), y.space(), "orbit_coupling");
        xs.push_back(x);
        ys.push_back(y);
    }
    std::vector<double> w(weights.begin(), weights.end());
    Coupling c{FiniteMeasure(std::move(xs), w), FiniteMeasure(std::move(ys), w), {}};

    std::vector<CouplingEntry> raw_entries;
    raw_entries.reserve(pairs.size());
    for (std::size_t k = 0; k < pairs.size(); ++k)
        raw_entries.push_back({index_of(c.rows.atoms(), pairs[k].first), index_of(c.cols.atoms(), pairs[k].second),
                               weights[k]});
    std::sort(raw_entries.begin(), raw_entries.end(), [](const CouplingEntry& a, const CouplingEntry& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    for (const auto& e : raw_entries) {
        if (!c.entries.empty() && c.entries.back().row == e.row && c.entries.back().col == e.col)
            c.entries.back().mass += e.mass;
        else
            c.entries.push_back(e);
    }
    return c;
}

TvW2Check tv_to_w2_bound_check(const FiniteMeasure& mu, const FiniteMeasure& nu, const TransportOptions& options) {
    const double w2 = w2_distance(mu, nu, options).distance;
    const auto support = union_support(mu, nu);
    const double bound = std::sqrt(tv_distance(mu, nu)) * diameter(support);
    return {w2, bound, w2 <= bound + 1e-9};
}

}  // namespace hel
