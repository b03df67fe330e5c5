#pragma once

#include <span>

#include "hel/space.hpp"

// Log/exp maps in a local orthonormal frame for the Riemannian spaces
// (euclidean, hyperboloid2, products of those). Tangent vectors are plain
// coordinate arrays of length space.tangent_dim(); the frame at x depends only
// on x, so log and exp at the same base point agree.
namespace hel::tangent {

/// Adds weight * log_x(y) to `v` and weight * Hess_x(d(., y)^2 / 2) to the
/// block of `hessian` (row-major, leading dimension `ld`) starting at (offset, offset).
void accumulate(const SpaceDescriptor& space, std::span<const double> x, std::span<const double> y, double weight,
                std::span<double> v, std::span<double> hessian, std::size_t ld, std::size_t offset = 0);

/// exp_x(v), written to `out` (canonical coordinates).
void exp(const SpaceDescriptor& space, std::span<const double> x, std::span<const double> v, std::span<double> out);

double norm(std::span<const double> v);

}  // namespace hel::tangent
