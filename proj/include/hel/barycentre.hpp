#pragma once

#include <cstdint>
#include <string>

#include "hel/errors.hpp"
#include "hel/measure.hpp"
#include "hel/space.hpp"

namespace hel {

enum class BarycentreMethod { euclidean_closed_form, inductive_refined, tree_exact };

std::string to_string(BarycentreMethod m);

struct BarycentreOptions {
    double tol = 1e-8;
    /// Seeds the resampling stream of the inductive mean.
    std::uint64_t seed = 0;
    /// Upper bound on the inductive-mean stream length.
    std::size_t inductive_cap = 10000;
    std::size_t max_refine_iterations = 200;
    /// Use the generic two-phase solver even where a closed form exists (testing aid).
    bool force_generic = false;
};

struct BarycentreResult {
    SpacePoint point;
    double functional_value = 0.0;
    double stationarity_residual = 0.0;
    int iterations = 0;
    BarycentreMethod method = BarycentreMethod::euclidean_closed_form;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, BarycentreResult best) : Error(what), best_(std::move(best)) {}
    const BarycentreResult& best() const noexcept { return best_; }

private:
    BarycentreResult best_;
};

/*
 * Unique minimiser of F(x) = sum_i w_i d(x, a_i)^2.
 *
 *   euclidean     weighted arithmetic mean
 *   metric_tree   F is one quadratic in the offset on each edge; exact
 *                 minimisation edge by edge, best edge wins
 *   hyperboloid2  inductive mean b_{k+1} = [b_k, y_{k+1}](1/(k+1)) over a
 *   / product     weight-proportional resampled stream, then damped Newton
 *                 refinement in the tangent frame with a geodesic backtracking
 *                 search, until |sum_i w_i log_x a_i| <= tol
 *
 * Products containing a tree factor split into factorwise problems, which is
 * exact because F separates over an l2 product.
 *
 * The stationarity residual is |sum_i w_i log_x a_i| (half the gradient norm);
 * for trees it is half the largest descent slope over the directions at x.
 */
BarycentreResult barycentre(const FiniteMeasure& mu, const BarycentreOptions& options = {});

/// second_moment(mu, x) - d(x, bary)^2; nonnegative in a CAT(0) space.
double variance_gap(const FiniteMeasure& mu, const SpacePoint& x, const BarycentreResult& bary);

struct LipschitzCheck {
    double lhs = 0.0;  // d(b(mu), b(nu))
    double rhs = 0.0;  // W2(mu, nu)
    bool holds = false;
};

/// Holds when lhs <= rhs + 1e-6 (1 + rhs).
LipschitzCheck lipschitz_check(const FiniteMeasure& mu, const FiniteMeasure& nu, const BarycentreOptions& options = {},
                               const TransportOptions& transport = {});

}  // namespace hel
