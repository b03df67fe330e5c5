#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hel {

struct PlanEntry {
    std::size_t row = 0;
    std::size_t col = 0;
    double mass = 0.0;
};

struct TransportSolution {
    double cost = 0.0;
    std::vector<PlanEntry> plan;  // positive-mass cells only
    std::size_t pivots = 0;
};

/*
 * Exact solver for the balanced transportation problem
 *
 *   minimise sum_ij cost[i*n + j] * x_ij   s.t.  row sums = supply, column sums = demand, x >= 0
 *
 * using the primal network simplex on the bipartite graph: northwest-corner
 * start, spanning-tree basis with node potentials, block pricing. Supply and
 * demand must be positive and have equal totals (up to roundoff).
 */
TransportSolution solve_transport(std::span<const double> supply, std::span<const double> demand,
                                  std::span<const double> cost);

}  // namespace hel
