#include "hel/observable.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hel/errors.hpp"

namespace hel {

Observable Observable::closed_form(System system, SpaceDescriptor target, Map map, std::string label) {
    if (!map) throw DomainError("observable map is empty");
    Observable o(std::move(system), std::move(target), std::move(label));
    o.map_ = std::move(map);
    return o;
}

Observable Observable::partition(System system, SpaceDescriptor target, CellMap cell, std::vector<SpacePoint> values,
                                 std::string label) {
    if (!cell) throw DomainError("partition cell map is empty");
    if (values.empty()) throw DomainError("partition needs at least one value");
    for (const auto& v : values) require_same_space(v.space(), target, "partition value");
    Observable o(std::move(system), std::move(target), std::move(label));
    o.cell_ = std::move(cell);
    o.values_ = std::make_shared<const std::vector<SpacePoint>>(std::move(values));
    return o;
}

SpacePoint Observable::operator()(const OmegaPoint& omega) const {
    if (cell_) return (*values_)[cell(omega)];
    return map_(omega);
}

std::size_t Observable::cell(const OmegaPoint& omega) const {
    if (!cell_) throw DomainError("observable is not a partition");
    const std::size_t c = cell_(omega);
    if (c >= values_->size()) throw DomainError("partition cell index out of range");
    return c;
}

const std::vector<SpacePoint>& Observable::values() const {
    if (!values_) throw DomainError("observable is not a partition");
    return *values_;
}

namespace observables {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_circle_source(const System& sys, const char* name) {
    if (sys.kind() != SystemKind::torus_rotation && sys.kind() != SystemKind::two_component)
        throw DomainError(std::string(name) + " needs a torus or two-component system");
}

}  // namespace

Observable circle(System sys, double radius, double cx, double cy) {
    require_circle_source(sys, "circle");
    return Observable::closed_form(
        sys, SpaceDescriptor::euclidean(2),
        [=](const OmegaPoint& w) {
            return euclidean_point({cx + radius * std::cos(kTwoPi * w.x[0]), cy + radius * std::sin(kTwoPi * w.x[0])});
        },
        "circle");
}

Observable torus_embedding(System sys) {
    if (sys.kind() != SystemKind::torus_rotation || sys.dim() != 2)
        throw DomainError("torus_embedding needs a 2-dimensional torus rotation");
    return Observable::closed_form(
        sys, SpaceDescriptor::euclidean(4),
        [](const OmegaPoint& w) {
            return euclidean_point({std::cos(kTwoPi * w.x[0]), std::sin(kTwoPi * w.x[0]), std::cos(kTwoPi * w.x[1]),
                                    std::sin(kTwoPi * w.x[1])});
        },
        "torus_embedding");
}

Observable hyperbolic_loop(System sys, double offset, double radius) {
    require_circle_source(sys, "hyperbolic_loop");
    return Observable::closed_form(
        sys, SpaceDescriptor::hyperboloid2(),
        [=](const OmegaPoint& w) {
            const double v1 = offset + radius * std::cos(kTwoPi * w.x[0]);
            const double v2 = radius * std::sin(kTwoPi * w.x[0]);
            const double r = std::hypot(v1, v2);
            if (r == 0.0) return hyperboloid_point(0.0, 0.0);
            const double s = std::sinh(r) / r;
            return hyperboloid_point(s * v1, s * v2);
        },
        "hyperbolic_loop");
}

Observable tripod_loop(System sys, SpaceDescriptor star_tree) {
    require_circle_source(sys, "tripod_loop");
    if (star_tree.kind() != SpaceKind::metric_tree) throw DomainError("tripod_loop needs a metric tree target");
    const auto& tree = star_tree.tree();
    double total = 0.0;
    for (const auto& e : tree.edges()) {
        if (e.u != 0 && e.v != 0) throw DomainError("tripod_loop needs every edge incident to vertex 0");
        total += 2.0 * e.length;
    }
    return Observable::closed_form(
        sys, star_tree,
        [star_tree, total](const OmegaPoint& w) {
            const auto& edges = star_tree.tree().edges();
            double s = w.x[0] * total;
            for (std::size_t i = 0; i < edges.size(); ++i) {
                const double len = edges[i].length;
                if (s <= 2.0 * len || i + 1 == edges.size()) {
                    const double out = std::min(s <= len ? s : 2.0 * len - s, len);
                    const double off = edges[i].u == 0 ? out : len - out;
                    return tree_point(star_tree, i, std::clamp(off, 0.0, len));
                }
                s -= 2.0 * len;
            }
            return tree_vertex(star_tree, 0);
        },
        "tripod_loop");
}

Observable component_circles(System sys, std::array<double, 2> c0, double r0, std::array<double, 2> c1, double r1) {
    if (sys.kind() != SystemKind::two_component) throw DomainError("component_circles needs a two-component system");
    return Observable::closed_form(
        sys, SpaceDescriptor::euclidean(2),
        [=](const OmegaPoint& w) {
            const auto& c = w.component == 0 ? c0 : c1;
            const double r = w.component == 0 ? r0 : r1;
            return euclidean_point({c[0] + r * std::cos(kTwoPi * w.x[0]), c[1] + r * std::sin(kTwoPi * w.x[0])});
        },
        "component_circles");
}

Observable atom_values(System sys, std::vector<SpacePoint> values) {
    if (sys.kind() != SystemKind::finite_permutation) throw DomainError("atom_values needs a finite model");
    if (values.size() != sys.dim()) throw DomainError("atom_values needs one value per atom");
    auto target = values.front().space();
    return Observable::partition(
        sys, std::move(target), [](const OmegaPoint& w) { return static_cast<std::size_t>(w.state); },
        std::move(values), "atom_values");
}

Observable shift_coordinate(System sys, SpacePoint zero, SpacePoint one) {
    if (sys.kind() != SystemKind::bernoulli_shift) throw DomainError("shift_coordinate needs a Bernoulli shift");
    auto target = zero.space();
    return Observable::partition(
        sys, std::move(target),
        [sys](const OmegaPoint& w) { return static_cast<std::size_t>(sys.shift_coordinate(w, 0)); },
        {std::move(zero), std::move(one)}, "shift_coordinate");
}

Observable constant(System sys, SpacePoint value) {
    auto target = value.space();
    return Observable::partition(
        sys, std::move(target), [](const OmegaPoint&) { return std::size_t{0}; }, {std::move(value)}, "constant");
}

}  // namespace observables

}  // namespace hel
