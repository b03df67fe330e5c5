#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "hel/space.hpp"

namespace hel {

/*
 * Finitely supported probability measure. Atoms are kept sorted by
 * coordinates with duplicates merged, so two measures are equal exactly when
 * they have the same support and weights.
 */
class FiniteMeasure {
public:
    /// Weights must be positive and sum to 1 within 1e-12.
    FiniteMeasure(std::vector<SpacePoint> atoms, std::vector<double> weights);

    /// Rescales positive weights to unit mass.
    static FiniteMeasure normalized(std::vector<SpacePoint> atoms, std::vector<double> weights);
    static FiniteMeasure dirac(SpacePoint atom);
    static FiniteMeasure uniform(std::vector<SpacePoint> atoms);

    const SpaceDescriptor& space() const noexcept { return atoms_.front().space(); }
    std::size_t size() const noexcept { return atoms_.size(); }
    const std::vector<SpacePoint>& atoms() const noexcept { return atoms_; }
    const std::vector<double>& weights() const noexcept { return weights_; }

    friend bool operator==(const FiniteMeasure&, const FiniteMeasure&) = default;

private:
    FiniteMeasure() = default;
    void merge_and_validate(std::vector<SpacePoint> atoms, std::vector<double> weights);

    std::vector<SpacePoint> atoms_;
    std::vector<double> weights_;
};

/// sum_i w_i d(atom_i, x)^2, i.e. the Frechet functional at x.
double second_moment(const FiniteMeasure& mu, const SpacePoint& x);

/// sup_A |mu(A) - nu(A)| = half the l1 distance of the weight vectors on the union support.
double tv_distance(const FiniteMeasure& mu, const FiniteMeasure& nu);

struct CouplingEntry {
    std::size_t row = 0;
    std::size_t col = 0;
    double mass = 0.0;
};

/// Sparse coupling between two finite measures; entries index their atoms.
struct Coupling {
    FiniteMeasure rows;
    FiniteMeasure cols;
    std::vector<CouplingEntry> entries;

    /// Largest deviation of a row or column sum from the prescribed marginal weight.
    double marginal_error() const;
};

/// sum over entries of mass * d(row atom, col atom)^2.
double coupling_cost(const Coupling& coupling);

struct TransportOptions {
    std::size_t support_cap = 512;
};

struct W2Result {
    double distance = 0.0;
    double cost = 0.0;  // distance^2, the optimal transport cost
    Coupling coupling;
};

/// Exact W2 with an optimal coupling. Throws CapacityError when either support exceeds the cap.
W2Result w2_distance(const FiniteMeasure& mu, const FiniteMeasure& nu, const TransportOptions& options = {});

/// The coupling placing weight w_i on (x_i, y_i); its marginals are the two empirical measures.
Coupling orbit_coupling(std::span<const std::pair<SpacePoint, SpacePoint>> pairs, std::span<const double> weights);

struct TvW2Check {
    double w2 = 0.0;
    double bound = 0.0;  // sqrt(tv) * diameter(union support)
    bool holds = false;
};

TvW2Check tv_to_w2_bound_check(const FiniteMeasure& mu, const FiniteMeasure& nu, const TransportOptions& options = {});

/// Union of the supports, sorted and deduplicated.
std::vector<SpacePoint> union_support(const FiniteMeasure& mu, const FiniteMeasure& nu);

}  // namespace hel
