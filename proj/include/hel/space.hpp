#pragma once

#include <compare>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hel {

struct TreeEdge {
    std::size_t u = 0;
    std::size_t v = 0;
    double length = 0.0;

    friend bool operator==(const TreeEdge&, const TreeEdge&) = default;
};

/*
 * Weighted tree on vertices 0..V-1. Rooted at vertex 0 internally; vertex
 * distances go through the lowest common ancestor (binary lifting).
 */
class TreeShape {
public:
    explicit TreeShape(std::vector<TreeEdge> edges);

    /// Parses the `u v length` edge-list text form, one edge per line. Blank
    /// lines and lines starting with '#' are ignored.
    static TreeShape parse_edge_list(std::string_view text);
    std::string to_edge_list() const;

    /// Star with `lengths.size()` legs hanging off vertex 0; leg i ends at vertex i+1.
    static TreeShape star(std::span<const double> lengths);

    std::size_t vertex_count() const noexcept { return adjacency_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    const std::vector<TreeEdge>& edges() const noexcept { return edges_; }
    const TreeEdge& edge(std::size_t e) const { return edges_.at(e); }

    std::size_t lca(std::size_t a, std::size_t b) const;
    double vertex_distance(std::size_t a, std::size_t b) const;

    /// Vertices on the path from a to b, both ends included.
    std::vector<std::size_t> vertex_path(std::size_t a, std::size_t b) const;

    /// Edge id joining two adjacent vertices.
    std::size_t edge_between(std::size_t a, std::size_t b) const;

    const std::vector<std::pair<std::size_t, std::size_t>>& neighbours(std::size_t v) const {
        return adjacency_.at(v);
    }
    std::size_t lowest_incident_edge(std::size_t v) const;

    friend bool operator==(const TreeShape& a, const TreeShape& b) { return a.edges_ == b.edges_; }

private:
    std::vector<TreeEdge> edges_;
    // (neighbour, edge id) pairs, sorted by edge id.
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adjacency_;
    std::vector<std::size_t> depth_;
    std::vector<double> weighted_depth_;
    std::vector<std::vector<std::size_t>> up_;
};

enum class SpaceKind { euclidean, hyperboloid2, metric_tree, product };

/// Immutable, cheaply copyable handle describing one of the implemented Hadamard spaces.
class SpaceDescriptor {
public:
    static SpaceDescriptor euclidean(std::size_t dim);
    static SpaceDescriptor hyperboloid2();
    static SpaceDescriptor metric_tree(TreeShape tree);
    static SpaceDescriptor product(std::vector<SpaceDescriptor> factors);

    SpaceKind kind() const noexcept;
    std::size_t dim() const;
    const TreeShape& tree() const;
    const std::vector<SpaceDescriptor>& factors() const;

    /// Length of the flat coordinate vector of a point.
    std::size_t coord_size() const noexcept;
    std::size_t factor_offset(std::size_t i) const;

    /// True when log/exp maps exist everywhere (euclidean, hyperboloid and products of those).
    bool is_riemannian() const noexcept;
    /// Dimension of the tangent space; only meaningful for Riemannian spaces.
    std::size_t tangent_dim() const;

    std::string describe() const;

    friend bool operator==(const SpaceDescriptor& a, const SpaceDescriptor& b);

private:
    struct Node;
    explicit SpaceDescriptor(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

/*
 * A point of a space, stored as a flat coordinate vector:
 *   euclidean     x_1..x_dim
 *   hyperboloid2  (x0, x1, x2) with x0 = sqrt(1 + x1^2 + x2^2)
 *   metric_tree   (edge id, offset) in canonical form
 *   product       concatenated factor coordinates
 * Construction validates and canonicalises, so equal points compare equal.
 */
class SpacePoint {
public:
    SpacePoint(SpaceDescriptor space, std::vector<double> coords);

    const SpaceDescriptor& space() const noexcept { return space_; }
    std::span<const double> coords() const noexcept { return coords_; }
    double operator[](std::size_t i) const { return coords_[i]; }

    SpacePoint factor(std::size_t i) const;

    friend bool operator==(const SpacePoint& a, const SpacePoint& b) {
        return a.coords_ == b.coords_ && a.space_ == b.space_;
    }
    /// Lexicographic order on coordinates; only meaningful within one space.
    friend std::weak_ordering operator<=>(const SpacePoint& a, const SpacePoint& b);

private:
    SpaceDescriptor space_;
    std::vector<double> coords_;
};

SpacePoint euclidean_point(std::vector<double> coords);
SpacePoint hyperboloid_point(double x1, double x2);
/// Point at hyperbolic distance r from the origin (1,0,0) in direction theta.
SpacePoint hyperboloid_polar(double r, double theta);
SpacePoint tree_point(const SpaceDescriptor& space, std::size_t edge, double offset);
SpacePoint tree_vertex(const SpaceDescriptor& space, std::size_t vertex);
SpacePoint product_point(const SpaceDescriptor& space, std::span<const SpacePoint> components);

/// Throws DomainError when the spaces differ.
void require_same_space(const SpaceDescriptor& a, const SpaceDescriptor& b, std::string_view context);

double dist(const SpacePoint& a, const SpacePoint& b);
SpacePoint geodesic_point(const SpacePoint& a, const SpacePoint& b, double t);

/// d(x,m)^2 - d(x,y)^2/2 - d(x,z)^2/2 + d(y,z)^2/4 with m the midpoint of [y,z].
/// Nonpositive (up to roundoff) in every CAT(0) space.
double cn_inequality_residual(const SpacePoint& x, const SpacePoint& y, const SpacePoint& z);

double diameter(std::span<const SpacePoint> points);

/*
 * Coordinate-level kernels. No space checks; callers guarantee that the spans
 * hold canonical coordinates of the given space.
 */
namespace raw {

double dist(const SpaceDescriptor& space, std::span<const double> a, std::span<const double> b);
void geodesic(const SpaceDescriptor& space, std::span<const double> a, std::span<const double> b,
              double t, std::span<double> out);
/// Validates and canonicalises coordinates in place; throws DomainError.
void canonicalize(const SpaceDescriptor& space, std::span<double> coords);

}  // namespace raw

}  // namespace hel
