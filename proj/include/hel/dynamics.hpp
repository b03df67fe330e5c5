#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hel/group.hpp"

namespace hel {

/*
 * A point of Ω. Which fields are meaningful depends on the model:
 *   finite_permutation   state = atom index
 *   torus_rotation       x[0..d) in [0, 1)
 *   two_component        component in {0, 1}, x[0] in [0, 1)
 *   bernoulli_shift      state = sequence key, shift = window offset
 */
struct OmegaPoint {
    std::uint32_t component = 0;
    std::uint64_t state = 0;
    std::int64_t shift = 0;
    std::array<double, 3> x{};

    friend bool operator==(const OmegaPoint&, const OmegaPoint&) = default;
};

enum class SystemKind { finite_permutation, torus_rotation, two_component, bernoulli_shift };

std::string to_string(SystemKind k);

/// Weighted node of an exact or midpoint quadrature of P.
struct QuadratureNode {
    OmegaPoint omega;
    double weight = 0.0;
};

/*
 * Probability-preserving action of a Group on a sampleable Ω.
 *
 *   finite_permutation  Ω = {0..k-1} with weights; generator j acts by a permutation.
 *                       Supported groups: Z, Z^d (commuting permutations), Z/NZ.
 *   torus_rotation      Ω = T^d with Lebesgue measure; x -> x + sum_j g_j alpha_j mod 1.
 *                       The Heisenberg group acts through its abelianisation (a, b).
 *   two_component       Ω = {0,1} x T with P = (p, 1-p) x Lebesgue; Z rotates
 *                       component c by alpha_c. Not ergodic: the components are invariant.
 *   bernoulli_shift     pseudorandom stand-in for the shift on {0,1}^Z; demonstration only.
 */
class System {
public:
    static System finite_permutation(Group group, std::vector<double> weights,
                                     std::vector<std::vector<std::size_t>> generator_perms,
                                     std::string label = "finite_permutation");
    /// x -> x + 1 mod N on N equally likely atoms, acted on by Z/NZ.
    static System cyclic_rotation(std::int64_t order);
    static System torus_rotation(Group group, std::size_t dim, std::vector<std::array<double, 3>> alphas,
                                 std::string label = "torus_rotation");
    static System two_component(double alpha0, double alpha1, double p0 = 0.5, std::string label = "two_component");
    static System bernoulli_shift(double p_one, std::string label = "bernoulli_shift");

    SystemKind kind() const noexcept;
    const Group& group() const noexcept;
    const std::string& label() const noexcept;

    /// Number of atoms (finite), torus dimension (torus), 1 (two_component).
    std::size_t dim() const noexcept;
    const std::vector<double>& weights() const;                    // finite models
    const std::vector<std::array<double, 3>>& alphas() const;       // rotation vectors per generator / component
    double component_probability(std::uint32_t c) const;           // two_component
    double bernoulli_p() const;
    /// k-th coordinate (0 or 1) of the shifted sequence seen from ω (bernoulli_shift).
    int shift_coordinate(const OmegaPoint& omega, std::int64_t k) const;

    OmegaPoint act(const GroupElement& g, const OmegaPoint& omega) const;

    /// i.i.d. P-distributed points; element i depends only on (seed, i).
    std::vector<OmegaPoint> sample(std::uint64_t seed, std::size_t count) const;

    /// Label of the invariant piece of Ω containing ω: the orbit for finite
    /// models, the component for two_component, 0 for the (ergodic) rotations.
    std::uint64_t ergodic_component(const OmegaPoint& omega) const;
    /// Probability of that invariant piece.
    double ergodic_component_probability(std::uint64_t component) const;

    /// Exact nodes for finite models; midpoint grid with `points_per_axis` per
    /// torus axis otherwise. Restricted to one invariant piece when `component` is set
    /// (weights then sum to 1).
    std::vector<QuadratureNode> quadrature(std::size_t points_per_axis,
                                           std::optional<std::uint64_t> component = std::nullopt) const;
    /// True when quadrature() is exact, independent of points_per_axis.
    bool exact_quadrature() const noexcept;

    /// Exhaustive check act(gh, ω) = act(g, act(h, ω)) over generators, their
    /// inverses and all atoms (finite), or over the given torus points within 1e-12.
    bool check_homomorphism(const std::vector<OmegaPoint>& torus_points = {}) const;
    /// Each generator permutes atoms preserving weights (finite); true by construction otherwise.
    bool check_measure_preservation() const;

    struct Impl;

private:
    explicit System(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const Impl> impl_;
};

}  // namespace hel
