#include "hel/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hel/errors.hpp"

namespace hel {

namespace {

struct BasicCell {
    std::size_t row;
    std::size_t col;
    double flow;
};

class NetworkSimplex {
public:
    NetworkSimplex(std::span<const double> supply, std::span<const double> demand, std::span<const double> cost)
        : m_(supply.size()), n_(demand.size()), cost_(cost) {
        northwest_corner(supply, demand);
        const std::size_t nodes = m_ + n_;
        adj_start_.resize(nodes + 1);
        adj_.resize(2 * basis_.size());
        parent_node_.resize(nodes);
        parent_cell_.resize(nodes);
        depth_.resize(nodes);
        potential_.resize(nodes);
        queue_.resize(nodes);
        const double max_cost = cost.empty() ? 0.0 : *std::max_element(cost.begin(), cost.end());
        eps_ = 1e-13 * std::max(1.0, max_cost);
        block_ = std::max<std::size_t>(16, static_cast<std::size_t>(std::sqrt(double(m_ * n_))));
    }

    TransportSolution run() {
        const std::size_t cells = m_ * n_;
        const std::size_t max_pivots = 50 * cells + 10000;
        std::size_t pivots = 0;
        for (;;) {
            build_tree();
            const auto entering = price();
            if (entering == cells) break;
            pivot(entering / n_, entering % n_);
            if (++pivots > max_pivots) throw CapacityError("transport simplex exceeded its pivot budget");
        }
        TransportSolution sol;
        sol.pivots = pivots;
        for (const auto& b : basis_) {
            if (b.flow <= 0.0) continue;
            sol.plan.push_back({b.row, b.col, b.flow});
            sol.cost += b.flow * cost_[b.row * n_ + b.col];
        }
        std::sort(sol.plan.begin(), sol.plan.end(),
                  [](const PlanEntry& a, const PlanEntry& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
        return sol;
    }

private:
    void northwest_corner(std::span<const double> supply, std::span<const double> demand) {
        std::vector<double> a(supply.begin(), supply.end()), b(demand.begin(), demand.end());
        std::size_t i = 0, j = 0;
        basis_.reserve(m_ + n_ - 1);
        for (;;) {
            const double x = std::max(0.0, std::min(a[i], b[j]));
            basis_.push_back({i, j, x});
            a[i] -= x;
            b[j] -= x;
            if (i == m_ - 1 && j == n_ - 1) break;
            if (i == m_ - 1)
                ++j;
            else if (j == n_ - 1)
                ++i;
            else if (a[i] <= b[j])
                ++i;
            else
                ++j;
        }
        // Absorb the roundoff imbalance into the final cell.
        basis_.back().flow = std::max(0.0, basis_.back().flow + std::min(a[m_ - 1], b[n_ - 1]));
    }

    // Nodes 0..m-1 are rows, m..m+n-1 columns. Rooted at row 0.
    void build_tree() {
        const std::size_t nodes = m_ + n_;
        std::fill(adj_start_.begin(), adj_start_.end(), 0);
        for (const auto& c : basis_) {
            ++adj_start_[c.row + 1];
            ++adj_start_[m_ + c.col + 1];
        }
        for (std::size_t v = 0; v < nodes; ++v) adj_start_[v + 1] += adj_start_[v];
        fill_pos_.assign(adj_start_.begin(), adj_start_.end() - 1);
        for (std::size_t k = 0; k < basis_.size(); ++k) {
            adj_[fill_pos_[basis_[k].row]++] = k;
            adj_[fill_pos_[m_ + basis_[k].col]++] = k;
        }

        constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
        std::fill(parent_node_.begin(), parent_node_.end(), none);
        std::size_t head = 0, tail = 0;
        queue_[tail++] = 0;
        parent_node_[0] = 0;
        parent_cell_[0] = none;
        depth_[0] = 0;
        potential_[0] = 0.0;
        while (head < tail) {
            const std::size_t v = queue_[head++];
            for (std::size_t p = adj_start_[v]; p < adj_start_[v + 1]; ++p) {
                const auto& c = basis_[adj_[p]];
                const std::size_t w = (v < m_) ? m_ + c.col : c.row;
                if (parent_node_[w] != none) continue;
                parent_node_[w] = v;
                parent_cell_[w] = adj_[p];
                depth_[w] = depth_[v] + 1;
                potential_[w] = cost_[c.row * n_ + c.col] - potential_[v];
                queue_[tail++] = w;
            }
        }
        if (tail != nodes) throw Error("transport basis is not a spanning tree");
    }

    // Returns the flat index of the entering cell, or m*n when optimal.
    std::size_t price() {
        const std::size_t cells = m_ * n_;
        std::size_t best = cells;
        double best_rc = -eps_;
        std::size_t scanned = 0;
        while (scanned < cells) {
            const std::size_t chunk = std::min(block_, cells - scanned);
            for (std::size_t k = 0; k < chunk; ++k) {
                const std::size_t idx = cursor_;
                if (++cursor_ == cells) cursor_ = 0;
                const std::size_t i = idx / n_, j = idx % n_;
                const double rc = cost_[idx] - potential_[i] - potential_[m_ + j];
                if (rc < best_rc) {
                    best_rc = rc;
                    best = idx;
                }
            }
            scanned += chunk;
            if (best != cells) return best;
        }
        return cells;
    }

    void pivot(std::size_t row, std::size_t col) {
        // Tree path from the column node up to the row node; signs alternate - + - ...
        path_a_.clear();
        path_b_.clear();
        std::size_t a = row, b = m_ + col;
        while (depth_[a] > depth_[b]) {
            path_a_.push_back(parent_cell_[a]);
            a = parent_node_[a];
        }
        while (depth_[b] > depth_[a]) {
            path_b_.push_back(parent_cell_[b]);
            b = parent_node_[b];
        }
        while (a != b) {
            path_a_.push_back(parent_cell_[a]);
            a = parent_node_[a];
            path_b_.push_back(parent_cell_[b]);
            b = parent_node_[b];
        }
        cycle_.assign(path_b_.begin(), path_b_.end());
        cycle_.insert(cycle_.end(), path_a_.rbegin(), path_a_.rend());

        double theta = std::numeric_limits<double>::infinity();
        std::size_t leaving = 0;
        for (std::size_t k = 0; k < cycle_.size(); k += 2) {
            const double f = basis_[cycle_[k]].flow;
            if (f < theta) {
                theta = f;
                leaving = cycle_[k];
            }
        }
        theta = std::max(0.0, theta);
        for (std::size_t k = 0; k < cycle_.size(); ++k) {
            double& f = basis_[cycle_[k]].flow;
            f = (k % 2 == 0) ? std::max(0.0, f - theta) : f + theta;
        }
        basis_[leaving] = {row, col, theta};
    }

    std::size_t m_, n_;
    std::span<const double> cost_;
    std::vector<BasicCell> basis_;
    std::vector<std::size_t> adj_start_, fill_pos_, adj_;
    std::vector<std::size_t> parent_node_, parent_cell_, depth_, queue_;
    std::vector<double> potential_;
    std::vector<std::size_t> path_a_, path_b_, cycle_;
    double eps_ = 0.0;
    std::size_t block_ = 16;
    std::size_t cursor_ = 0;
};

}  // namespace

TransportSolution solve_transport(std::span<const double> supply, std::span<const double> demand,
                                  std::span<const double> cost) {
    if (supply.empty() || demand.empty()) throw DomainError("transport problem needs non-empty marginals");
    if (cost.size() != supply.size() * demand.size()) throw DomainError("cost matrix has the wrong size");
    for (double s : supply)
        if (!(s > 0.0)) throw DomainError("transport supplies must be positive");
    for (double d : demand)
        if (!(d > 0.0)) throw DomainError("transport demands must be positive");
    for (double c : cost)
        if (!std::isfinite(c)) throw DomainError("transport costs must be finite");
    return NetworkSimplex(supply, demand, cost).run();
}

}  // namespace hel
