#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "hel/measure.hpp"
#include "hel/random.hpp"
#include "hel/space.hpp"

// Random generators for property sweeps.
namespace hel::sampling {

struct NamedSpace {
    std::string name;
    SpaceDescriptor space;

    friend std::ostream& operator<<(std::ostream& os, const NamedSpace& s) { return os << s.name; }
};

/// euclidean(3), hyperboloid2, unit tripod, product(euclidean(2), hyperboloid2).
std::vector<NamedSpace> standard_spaces();

/// Euclidean coordinates in [-scale, scale]; hyperbolic radius up to scale / 4;
/// trees uniform over edges with some mass on vertices; products componentwise.
SpacePoint random_point(const SpaceDescriptor& space, CounterRng& rng, double scale = 4.0);

/// 1..max_atoms atoms with weights drawn from [0.1, 1) then normalised.
FiniteMeasure random_measure(const SpaceDescriptor& space, CounterRng& rng, std::size_t max_atoms = 8,
                             double scale = 4.0);

/// Random positive weights on a random non-empty subset of `support`.
FiniteMeasure random_measure_on(const std::vector<SpacePoint>& support, CounterRng& rng);

}  // namespace hel::sampling
