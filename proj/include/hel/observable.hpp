#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hel/dynamics.hpp"
#include "hel/space.hpp"

namespace hel {

/// Golden ratio conjugate (sqrt(5) - 1) / 2.
inline constexpr double kGoldenRotation = 0.6180339887498949;

/*
 * f: Ω -> X, either a closed-form map or a finite partition of Ω
 * (cells A_0..A_{k-1}, value x_i on A_i).
 */
class Observable {
public:
    using Map = std::function<SpacePoint(const OmegaPoint&)>;
    using CellMap = std::function<std::size_t(const OmegaPoint&)>;

    static Observable closed_form(System system, SpaceDescriptor target, Map map, std::string label);
    static Observable partition(System system, SpaceDescriptor target, CellMap cell, std::vector<SpacePoint> values,
                                std::string label);

    const System& system() const noexcept { return system_; }
    const SpaceDescriptor& target() const noexcept { return target_; }
    const std::string& label() const noexcept { return label_; }

    SpacePoint operator()(const OmegaPoint& omega) const;

    bool is_partition() const noexcept { return static_cast<bool>(cell_); }
    /// Cell index of ω (partition observables only).
    std::size_t cell(const OmegaPoint& omega) const;
    /// Cell values (partition observables only).
    const std::vector<SpacePoint>& values() const;

private:
    Observable(System s, SpaceDescriptor t, std::string label)
        : system_(std::move(s)), target_(std::move(t)), label_(std::move(label)) {}

    System system_;
    SpaceDescriptor target_;
    std::string label_;
    Map map_;
    CellMap cell_;
    std::shared_ptr<const std::vector<SpacePoint>> values_;
};

// Built-in observables. The 1-dimensional ones read ω.x[0] and therefore work on
// torus_rotation and two_component systems alike.
namespace observables {

/// x -> centre + radius (cos 2πx, sin 2πx) in R^2.
Observable circle(System sys, double radius = 1.0, double cx = 0.0, double cy = 0.0);

/// (x, y) -> (cos 2πx, sin 2πx, cos 2πy, sin 2πy) in R^4; needs a 2-torus.
Observable torus_embedding(System sys);

/// x -> exp_o(v(x)) in H^2 with v(x) = (offset + radius cos 2πx, radius sin 2πx)
/// in the tangent plane at o = (1, 0, 0).
Observable hyperbolic_loop(System sys, double offset = 0.8, double radius = 1.0);

/// Constant-speed closed walk centre -> leaf 1 -> centre -> leaf 2 -> ... on a
/// star tree (every edge incident to vertex 0), parametrised by x in [0, 1).
Observable tripod_loop(System sys, SpaceDescriptor star_tree);

/// Two-component systems: component c traces circle(centre_c, radius_c).
Observable component_circles(System sys, std::array<double, 2> centre0, double radius0,
                             std::array<double, 2> centre1, double radius1);

/// Finite models: atom i -> values[i] (a partition with singleton cells).
Observable atom_values(System sys, std::vector<SpacePoint> values);

/// Bernoulli demonstration shift: ω -> values[coordinate 0].
Observable shift_coordinate(System sys, SpacePoint zero, SpacePoint one);

Observable constant(System sys, SpacePoint value);

}  // namespace observables

}  // namespace hel
