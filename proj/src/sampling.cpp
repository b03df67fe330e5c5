#include "hel/sampling.hpp"

#include <numbers>

#include "hel/errors.hpp"

namespace hel::sampling {

std::vector<NamedSpace> standard_spaces() {
    const double legs[] = {1.0, 1.0, 1.0};
    return {
        {"euclidean3", SpaceDescriptor::euclidean(3)},
        {"hyperboloid2", SpaceDescriptor::hyperboloid2()},
        {"tripod", SpaceDescriptor::metric_tree(TreeShape::star(legs))},
        {"product_e2_h2", SpaceDescriptor::product({SpaceDescriptor::euclidean(2), SpaceDescriptor::hyperboloid2()})},
    };
}

SpacePoint random_point(const SpaceDescriptor& space, CounterRng& rng, double scale) {
    switch (space.kind()) {
        case SpaceKind::euclidean: {
            std::vector<double> c(space.dim());
            for (double& x : c) x = rng.uniform(-scale, scale);
            return SpacePoint(space, std::move(c));
        }
        case SpaceKind::hyperboloid2:
            return hyperboloid_polar(rng.uniform(0.0, scale / 4.0), rng.uniform(0.0, 2.0 * std::numbers::pi));
        case SpaceKind::metric_tree: {
            const TreeShape& tree = space.tree();
            if (rng.uniform() < 0.1) return tree_vertex(space, rng.below(tree.vertex_count()));
            const std::size_t e = rng.below(tree.edge_count());
            return tree_point(space, e, rng.uniform() * tree.edge(e).length);
        }
        case SpaceKind::product: {
            std::vector<SpacePoint> parts;
            for (const auto& f : space.factors()) parts.push_back(random_point(f, rng, scale));
            return product_point(space, parts);
        }
    }
    throw DomainError("unsupported space");
}

FiniteMeasure random_measure(const SpaceDescriptor& space, CounterRng& rng, std::size_t max_atoms, double scale) {
    const std::size_t n = 1 + rng.below(max_atoms);
    std::vector<SpacePoint> atoms;
    std::vector<double> w;
    for (std::size_t i = 0; i < n; ++i) {
        atoms.push_back(random_point(space, rng, scale));
        w.push_back(rng.uniform(0.1, 1.0));
    }
    return FiniteMeasure::normalized(std::move(atoms), std::move(w));
}

FiniteMeasure random_measure_on(const std::vector<SpacePoint>& support, CounterRng& rng) {
    std::vector<SpacePoint> atoms;
    std::vector<double> w;
    for (const auto& p : support) {
        if (rng.uniform() < 0.6) {
            atoms.push_back(p);
            w.push_back(rng.uniform(0.05, 1.0));
        }
    }
    if (atoms.empty()) {
        atoms.push_back(support[rng.below(support.size())]);
        w.push_back(1.0);
    }
    return FiniteMeasure::normalized(std::move(atoms), std::move(w));
}

}  // namespace hel::sampling
