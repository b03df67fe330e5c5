#include "hel/space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <variant>

#include "hel/errors.hpp"

namespace hel {

namespace {

constexpr double kVertexSnap = 1e-12;
constexpr double kSheetTolerance = 1e-6;

}  // namespace

// ---------------------------------------------------------------------------
// TreeShape

TreeShape::TreeShape(std::vector<TreeEdge> edges) : edges_(std::move(edges)) {
    if (edges_.empty()) throw DomainError("tree needs at least one edge");
    const std::size_t n = edges_.size() + 1;
    adjacency_.assign(n, {});
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        const auto& [u, v, len] = edges_[e];
        if (!(len > 0.0) || !std::isfinite(len))
            throw DomainError("tree edge " + std::to_string(e) + " has non-positive length");
        if (u >= n || v >= n)
            throw DomainError("tree vertex ids must be 0..edges (edge " + std::to_string(e) + ")");
        if (u == v) throw DomainError("tree edge " + std::to_string(e) + " is a loop");
        adjacency_[u].emplace_back(v, e);
        adjacency_[v].emplace_back(u, e);
    }

    // BFS from vertex 0; E = V - 1 plus connectivity implies acyclic.
    constexpr std::size_t unseen = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> parent(n, unseen);
    depth_.assign(n, 0);
    weighted_depth_.assign(n, 0.0);
    std::vector<std::size_t> order{0};
    parent[0] = 0;
    for (std::size_t head = 0; head < order.size(); ++head) {
        const std::size_t v = order[head];
        for (auto [w, e] : adjacency_[v]) {
            if (parent[w] != unseen) continue;
            parent[w] = v;
            depth_[w] = depth_[v] + 1;
            weighted_depth_[w] = weighted_depth_[v] + edges_[e].length;
            order.push_back(w);
        }
    }
    if (order.size() != n) throw DomainError("tree edges do not form a connected acyclic graph");

    std::size_t levels = 1;
    while ((std::size_t{1} << levels) < n) ++levels;
    up_.assign(levels, std::vector<std::size_t>(n));
    up_[0] = parent;
    for (std::size_t k = 1; k < levels; ++k)
        for (std::size_t v = 0; v < n; ++v) up_[k][v] = up_[k - 1][up_[k - 1][v]];
}

TreeShape TreeShape::parse_edge_list(std::string_view text) {
    std::vector<TreeEdge> edges;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream fields(line);
        long long u = -1, v = -1;
        double len = 0.0;
        std::string rest;
        if (!(fields >> u >> v >> len) || (fields >> rest) || u < 0 || v < 0)
            throw ParseError("bad tree edge line " + std::to_string(line_no) + " (expected `u v length`)");
        edges.push_back({static_cast<std::size_t>(u), static_cast<std::size_t>(v), len});
    }
    return TreeShape(std::move(edges));
}

std::string TreeShape::to_edge_list() const {
    std::ostringstream out;
    out.precision(17);
    for (const auto& e : edges_) out << e.u << ' ' << e.v << ' ' << e.length << '\n';
    return out.str();
}

TreeShape TreeShape::star(std::span<const double> lengths) {
    std::vector<TreeEdge> edges;
    for (std::size_t i = 0; i < lengths.size(); ++i) edges.push_back({0, i + 1, lengths[i]});
    return TreeShape(std::move(edges));
}

std::size_t TreeShape::lca(std::size_t a, std::size_t b) const {
    if (depth_[a] < depth_[b]) std::swap(a, b);
    std::size_t diff = depth_[a] - depth_[b];
    for (std::size_t k = 0; diff != 0; ++k, diff >>= 1)
        if (diff & 1U) a = up_[k][a];
    if (a == b) return a;
    for (std::size_t k = up_.size(); k-- > 0;) {
        if (up_[k][a] != up_[k][b]) {
            a = up_[k][a];
            b = up_[k][b];
        }
    }
    return up_[0][a];
}

double TreeShape::vertex_distance(std::size_t a, std::size_t b) const {
    if (a == b) return 0.0;
    return weighted_depth_[a] + weighted_depth_[b] - 2.0 * weighted_depth_[lca(a, b)];
}

std::vector<std::size_t> TreeShape::vertex_path(std::size_t a, std::size_t b) const {
    const std::size_t top = lca(a, b);
    std::vector<std::size_t> path;
    for (std::size_t v = a; v != top; v = up_[0][v]) path.push_back(v);
    path.push_back(top);
    std::vector<std::size_t> tail;
    for (std::size_t v = b; v != top; v = up_[0][v]) tail.push_back(v);
    path.insert(path.end(), tail.rbegin(), tail.rend());
    return path;
}

std::size_t TreeShape::edge_between(std::size_t a, std::size_t b) const {
    for (auto [w, e] : adjacency_.at(a))
        if (w == b) return e;
    throw DomainError("vertices " + std::to_string(a) + " and " + std::to_string(b) + " are not adjacent");
}

std::size_t TreeShape::lowest_incident_edge(std::size_t v) const {
    const auto& nb = adjacency_.at(v);
    return std::min_element(nb.begin(), nb.end(), [](auto x, auto y) { return x.second < y.second; })->second;
}

// ---------------------------------------------------------------------------
// SpaceDescriptor

struct Euclidean {
    std::size_t dim;
};
struct Hyperboloid {};
struct Product {
    std::vector<SpaceDescriptor> factors;
    std::vector<std::size_t> offsets;
};

struct SpaceDescriptor::Node {
    std::variant<Euclidean, Hyperboloid, TreeShape, Product> data;
    std::size_t coord_size;
};

SpaceDescriptor SpaceDescriptor::euclidean(std::size_t dim) {
    if (dim < 1) throw DomainError("euclidean dimension must be at least 1");
    return SpaceDescriptor(std::make_shared<const Node>(Node{Euclidean{dim}, dim}));
}

SpaceDescriptor SpaceDescriptor::hyperboloid2() {
    static const SpaceDescriptor instance(std::make_shared<const Node>(Node{Hyperboloid{}, 3}));
    return instance;
}

SpaceDescriptor SpaceDescriptor::metric_tree(TreeShape tree) {
    return SpaceDescriptor(std::make_shared<const Node>(Node{std::move(tree), 2}));
}

SpaceDescriptor SpaceDescriptor::product(std::vector<SpaceDescriptor> factors) {
    if (factors.size() < 2) throw DomainError("product space needs at least two factors");
    std::vector<std::size_t> offsets;
    std::size_t total = 0;
    for (const auto& f : factors) {
        offsets.push_back(total);
        total += f.coord_size();
    }
    return SpaceDescriptor(std::make_shared<const Node>(Node{Product{std::move(factors), std::move(offsets)}, total}));
}

SpaceKind SpaceDescriptor::kind() const noexcept { return static_cast<SpaceKind>(node_->data.index()); }

std::size_t SpaceDescriptor::dim() const {
    if (const auto* e = std::get_if<Euclidean>(&node_->data)) return e->dim;
    throw DomainError("dim() requested on a non-euclidean space");
}

const TreeShape& SpaceDescriptor::tree() const {
    if (const auto* t = std::get_if<TreeShape>(&node_->data)) return *t;
    throw DomainError("tree() requested on a non-tree space");
}

const std::vector<SpaceDescriptor>& SpaceDescriptor::factors() const {
    if (const auto* p = std::get_if<Product>(&node_->data)) return p->factors;
    throw DomainError("factors() requested on a non-product space");
}

std::size_t SpaceDescriptor::coord_size() const noexcept { return node_->coord_size; }

std::size_t SpaceDescriptor::factor_offset(std::size_t i) const {
    if (const auto* p = std::get_if<Product>(&node_->data)) return p->offsets.at(i);
    throw DomainError("factor_offset() requested on a non-product space");
}

bool SpaceDescriptor::is_riemannian() const noexcept {
    switch (kind()) {
        case SpaceKind::euclidean:
        case SpaceKind::hyperboloid2: return true;
        case SpaceKind::metric_tree: return false;
        case SpaceKind::product:
            return std::ranges::all_of(std::get<Product>(node_->data).factors,
                                       [](const SpaceDescriptor& f) { return f.is_riemannian(); });
    }
    return false;
}

std::size_t SpaceDescriptor::tangent_dim() const {
    switch (kind()) {
        case SpaceKind::euclidean: return dim();
        case SpaceKind::hyperboloid2: return 2;
        case SpaceKind::metric_tree: break;
        case SpaceKind::product: {
            std::size_t total = 0;
            for (const auto& f : factors()) total += f.tangent_dim();
            return total;
        }
    }
    throw DomainError("tree spaces have no tangent space");
}

std::string SpaceDescriptor::describe() const {
    switch (kind()) {
        case SpaceKind::euclidean: return "euclidean(" + std::to_string(dim()) + ")";
        case SpaceKind::hyperboloid2: return "hyperboloid2";
        case SpaceKind::metric_tree: return "metric_tree(" + std::to_string(tree().edge_count()) + " edges)";
        case SpaceKind::product: {
            std::string s = "product(";
            for (std::size_t i = 0; i < factors().size(); ++i) s += (i ? ", " : "") + factors()[i].describe();
            return s + ")";
        }
    }
    return "?";
}

bool operator==(const SpaceDescriptor& a, const SpaceDescriptor& b) {
    if (a.node_ == b.node_) return true;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
        case SpaceKind::euclidean: return a.dim() == b.dim();
        case SpaceKind::hyperboloid2: return true;
        case SpaceKind::metric_tree: return a.tree() == b.tree();
        case SpaceKind::product: return a.factors() == b.factors();
    }
    return false;
}

void require_same_space(const SpaceDescriptor& a, const SpaceDescriptor& b, std::string_view context) {
    if (!(a == b))
        throw DomainError(std::string(context) + ": space mismatch (" + a.describe() + " vs " + b.describe() + ")");
}

// ---------------------------------------------------------------------------
// Coordinate kernels

namespace raw {

namespace {

double minkowski(std::span<const double> a, std::span<const double> b) {
    return -a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

double hyperboloid_dist(std::span<const double> a, std::span<const double> b) {
    const double B = -minkowski(a, b);
    if (B > 2.0) return std::acosh(B);
    // Near the diagonal use the chord form 2 asinh(|a-b|_M / 2), which keeps
    // full relative precision where acosh(1 + eps) would not.
    const double d0 = a[0] - b[0], d1 = a[1] - b[1], d2 = a[2] - b[2];
    const double q = std::max(0.0, d1 * d1 + d2 * d2 - d0 * d0);
    return 2.0 * std::asinh(0.5 * std::sqrt(q));
}

void lift_to_sheet(std::span<double> x) { x[0] = std::sqrt(1.0 + x[1] * x[1] + x[2] * x[2]); }

struct TreeRoute {
    std::size_t exit_vertex;
    double exit_cost;
    std::size_t entry_vertex;
    double entry_cost;
    double total;
};

TreeRoute tree_route(const TreeShape& tree, std::span<const double> a, std::span<const double> b) {
    const auto ea = static_cast<std::size_t>(a[0]);
    const auto eb = static_cast<std::size_t>(b[0]);
    const TreeEdge& A = tree.edge(ea);
    const TreeEdge& B = tree.edge(eb);
    const std::pair<std::size_t, double> exits[2] = {{A.u, a[1]}, {A.v, A.length - a[1]}};
    const std::pair<std::size_t, double> entries[2] = {{B.u, b[1]}, {B.v, B.length - b[1]}};
    TreeRoute best{0, 0, 0, 0, std::numeric_limits<double>::infinity()};
    for (const auto& [xv, xc] : exits)
        for (const auto& [yv, yc] : entries) {
            const double total = xc + tree.vertex_distance(xv, yv) + yc;
            if (total < best.total) best = {xv, xc, yv, yc, total};
        }
    return best;
}

void tree_geodesic(const TreeShape& tree, std::span<const double> a, std::span<const double> b, double t,
                   std::span<double> out) {
    if (a[0] == b[0]) {
        out[0] = a[0];
        out[1] = a[1] + t * (b[1] - a[1]);
        return;
    }
    const TreeRoute r = tree_route(tree, a, b);
    double tau = t * r.total;

    const auto ea = static_cast<std::size_t>(a[0]);
    if (tau <= r.exit_cost) {
        out[0] = a[0];
        out[1] = (r.exit_vertex == tree.edge(ea).u) ? a[1] - tau : a[1] + tau;
        return;
    }
    tau -= r.exit_cost;

    const auto path = tree.vertex_path(r.exit_vertex, r.entry_vertex);
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        const std::size_t e = tree.edge_between(path[k], path[k + 1]);
        const TreeEdge& E = tree.edge(e);
        if (tau <= E.length) {
            out[0] = static_cast<double>(e);
            out[1] = (path[k] == E.u) ? tau : E.length - tau;
            return;
        }
        tau -= E.length;
    }

    const auto eb = static_cast<std::size_t>(b[0]);
    const TreeEdge& B = tree.edge(eb);
    tau = std::min(tau, r.entry_cost);
    out[0] = b[0];
    out[1] = (r.entry_vertex == B.u) ? tau : B.length - tau;
}

}  // namespace

double dist(const SpaceDescriptor& space, std::span<const double> a, std::span<const double> b) {
    switch (space.kind()) {
        case SpaceKind::euclidean: {
            double s = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) {
                const double d = a[i] - b[i];
                s += d * d;
            }
            return std::sqrt(s);
        }
        case SpaceKind::hyperboloid2: return hyperboloid_dist(a, b);
        case SpaceKind::metric_tree: {
            if (a[0] == b[0]) return std::abs(a[1] - b[1]);
            return tree_route(space.tree(), a, b).total;
        }
        case SpaceKind::product: {
            double s = 0.0;
            const auto& fs = space.factors();
            for (std::size_t i = 0; i < fs.size(); ++i) {
                const std::size_t off = space.factor_offset(i), len = fs[i].coord_size();
                const double d = dist(fs[i], a.subspan(off, len), b.subspan(off, len));
                s += d * d;
            }
            return std::sqrt(s);
        }
    }
    return 0.0;
}

void geodesic(const SpaceDescriptor& space, std::span<const double> a, std::span<const double> b, double t,
              std::span<double> out) {
    switch (space.kind()) {
        case SpaceKind::euclidean:
            for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + t * (b[i] - a[i]);
            return;
        case SpaceKind::hyperboloid2: {
            const double d = hyperboloid_dist(a, b);
            if (d < 1e-9) {
                for (std::size_t i = 0; i < 3; ++i) out[i] = a[i] + t * (b[i] - a[i]);
            } else {
                const double s = std::sinh(d);
                const double ca = std::sinh((1.0 - t) * d) / s;
                const double cb = std::sinh(t * d) / s;
                for (std::size_t i = 0; i < 3; ++i) out[i] = ca * a[i] + cb * b[i];
            }
            lift_to_sheet(out);
            return;
        }
        case SpaceKind::metric_tree:
            tree_geodesic(space.tree(), a, b, t, out);
            canonicalize(space, out);
            return;
        case SpaceKind::product: {
            const auto& fs = space.factors();
            for (std::size_t i = 0; i < fs.size(); ++i) {
                const std::size_t off = space.factor_offset(i), len = fs[i].coord_size();
                geodesic(fs[i], a.subspan(off, len), b.subspan(off, len), t, out.subspan(off, len));
            }
            return;
        }
    }
}

void canonicalize(const SpaceDescriptor& space, std::span<double> x) {
    if (x.size() != space.coord_size())
        throw DomainError("point has " + std::to_string(x.size()) + " coordinates, " + space.describe() +
                          " expects " + std::to_string(space.coord_size()));
    for (double& v : x) {
        if (!std::isfinite(v)) throw DomainError("point coordinates must be finite");
        if (v == 0.0) v = 0.0;  // fold -0.0
    }
    switch (space.kind()) {
        case SpaceKind::euclidean: return;
        case SpaceKind::hyperboloid2: {
            const double residual = x[0] * x[0] - x[1] * x[1] - x[2] * x[2] - 1.0;
            if (!(x[0] > 0.0) || std::abs(residual) > kSheetTolerance * std::max(1.0, x[0] * x[0]))
                throw DomainError("point is not on the upper hyperboloid sheet");
            lift_to_sheet(x);
            return;
        }
        case SpaceKind::metric_tree: {
            const TreeShape& tree = space.tree();
            const double e_raw = x[0];
            if (e_raw < 0 || e_raw != std::floor(e_raw) || e_raw >= static_cast<double>(tree.edge_count()))
                throw DomainError("tree point references an unknown edge");
            const auto e = static_cast<std::size_t>(e_raw);
            const TreeEdge& E = tree.edge(e);
            const double snap = kVertexSnap * std::max(1.0, E.length);
            if (x[1] < -snap || x[1] > E.length + snap) throw DomainError("tree offset outside its edge");
            std::size_t vertex;
            if (x[1] <= snap)
                vertex = E.u;
            else if (x[1] >= E.length - snap)
                vertex = E.v;
            else
                return;
            const std::size_t ce = tree.lowest_incident_edge(vertex);
            x[0] = static_cast<double>(ce);
            x[1] = (tree.edge(ce).u == vertex) ? 0.0 : tree.edge(ce).length;
            return;
        }
        case SpaceKind::product: {
            const auto& fs = space.factors();
            for (std::size_t i = 0; i < fs.size(); ++i)
                canonicalize(fs[i], x.subspan(space.factor_offset(i), fs[i].coord_size()));
            return;
        }
    }
}

}  // namespace raw

// ---------------------------------------------------------------------------
// SpacePoint

SpacePoint::SpacePoint(SpaceDescriptor space, std::vector<double> coords)
    : space_(std::move(space)), coords_(std::move(coords)) {
    raw::canonicalize(space_, coords_);
}

SpacePoint SpacePoint::factor(std::size_t i) const {
    const auto& f = space_.factors().at(i);
    const std::size_t off = space_.factor_offset(i);
    return SpacePoint(f, std::vector<double>(coords_.begin() + static_cast<std::ptrdiff_t>(off),
                                             coords_.begin() + static_cast<std::ptrdiff_t>(off + f.coord_size())));
}

std::weak_ordering operator<=>(const SpacePoint& a, const SpacePoint& b) {
    const auto n = std::min(a.coords_.size(), b.coords_.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (a.coords_[i] < b.coords_[i]) return std::weak_ordering::less;
        if (a.coords_[i] > b.coords_[i]) return std::weak_ordering::greater;
    }
    return a.coords_.size() <=> b.coords_.size();
}

SpacePoint euclidean_point(std::vector<double> coords) {
    auto space = SpaceDescriptor::euclidean(coords.size());
    return SpacePoint(std::move(space), std::move(coords));
}

SpacePoint hyperboloid_point(double x1, double x2) {
    return SpacePoint(SpaceDescriptor::hyperboloid2(), {std::sqrt(1.0 + x1 * x1 + x2 * x2), x1, x2});
}

SpacePoint hyperboloid_polar(double r, double theta) {
    const double s = std::sinh(r);
    return hyperboloid_point(s * std::cos(theta), s * std::sin(theta));
}

SpacePoint tree_point(const SpaceDescriptor& space, std::size_t edge, double offset) {
    return SpacePoint(space, {static_cast<double>(edge), offset});
}

SpacePoint tree_vertex(const SpaceDescriptor& space, std::size_t vertex) {
    const TreeShape& tree = space.tree();
    if (vertex >= tree.vertex_count()) throw DomainError("unknown tree vertex");
    const std::size_t e = tree.lowest_incident_edge(vertex);
    return tree_point(space, e, tree.edge(e).u == vertex ? 0.0 : tree.edge(e).length);
}

SpacePoint product_point(const SpaceDescriptor& space, std::span<const SpacePoint> components) {
    const auto& fs = space.factors();
    if (components.size() != fs.size()) throw DomainError("product point needs one component per factor");
    std::vector<double> coords;
    coords.reserve(space.coord_size());
    for (std::size_t i = 0; i < fs.size(); ++i) {
        require_same_space(components[i].space(), fs[i], "product_point");
        coords.insert(coords.end(), components[i].coords().begin(), components[i].coords().end());
    }
    return SpacePoint(space, std::move(coords));
}

// ---------------------------------------------------------------------------
// Public operations

double dist(const SpacePoint& a, const SpacePoint& b) {
    require_same_space(a.space(), b.space(), "dist");
    return raw::dist(a.space(), a.coords(), b.coords());
}

SpacePoint geodesic_point(const SpacePoint& a, const SpacePoint& b, double t) {
    require_same_space(a.space(), b.space(), "geodesic_point");
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("geodesic parameter must lie in [0, 1]");
    if (t == 0.0) return a;
    if (t == 1.0) return b;
    std::vector<double> out(a.space().coord_size());
    raw::geodesic(a.space(), a.coords(), b.coords(), t, out);
    return SpacePoint(a.space(), std::move(out));
}

double cn_inequality_residual(const SpacePoint& x, const SpacePoint& y, const SpacePoint& z) {
    require_same_space(x.space(), y.space(), "cn_inequality_residual");
    require_same_space(x.space(), z.space(), "cn_inequality_residual");
    const SpacePoint m = geodesic_point(y, z, 0.5);
    const double xm = dist(x, m), xy = dist(x, y), xz = dist(x, z), yz = dist(y, z);
    return xm * xm - 0.5 * xy * xy - 0.5 * xz * xz + 0.25 * yz * yz;
}

double diameter(std::span<const SpacePoint> points) {
    if (points.empty()) throw DomainError("diameter of an empty point set");
    double best = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        require_same_space(points[0].space(), points[i].space(), "diameter");
        for (std::size_t j = i + 1; j < points.size(); ++j)
            best = std::max(best, raw::dist(points[0].space(), points[i].coords(), points[j].coords()));
    }
    return best;
}

}  // namespace hel
