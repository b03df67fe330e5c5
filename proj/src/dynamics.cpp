#include "hel/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hel/errors.hpp"
#include "hel/random.hpp"

namespace hel {

struct System::Impl {
    SystemKind kind;
    Group group;
    std::string label;
    std::size_t dim = 0;

    // finite_permutation
    std::vector<double> weights;
    std::vector<double> cumulative;
    std::vector<std::vector<std::size_t>> perms;
    std::vector<std::vector<std::vector<std::size_t>>> cycles;  // [generator][cycle] -> atoms
    std::vector<std::vector<std::size_t>> cycle_of, position;   // [generator][atom]
    std::vector<std::size_t> orbit;                             // atom -> smallest atom of its orbit

    // torus_rotation / two_component
    std::vector<std::array<double, 3>> alphas;
    double p0 = 1.0;

    // bernoulli_shift
    double p_one = 0.5;

    Impl(SystemKind k, Group g, std::string l) : kind(k), group(g), label(std::move(l)) {}
};

namespace {

double frac(long double v) {
    long double f = v - std::floor(v);
    if (f >= 1.0L) f = 0.0L;
    return static_cast<double>(f);
}

double circle_gap(double a, double b) {
    const double d = std::abs(a - b);
    return std::min(d, 1.0 - d);
}

std::int64_t mod(std::int64_t a, std::int64_t n) {
    const std::int64_t r = a % n;
    return r < 0 ? r + n : r;
}

void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError(std::string(what) + " must lie in [0, 1]");
}

}  // namespace

std::string to_string(SystemKind k) {
    switch (k) {
        case SystemKind::finite_permutation:
            return "finite_permutation";
        case SystemKind::torus_rotation:
            return "torus_rotation";
        case SystemKind::two_component:
            return "two_component";
        case SystemKind::bernoulli_shift:
            return "bernoulli_shift";
    }
    return "?";
}

System System::finite_permutation(Group group, std::vector<double> weights,
                                  std::vector<std::vector<std::size_t>> perms, std::string label) {
    if (group.kind() == GroupKind::heisenberg) throw DomainError("finite permutation models need an abelian group");
    if (perms.size() != group.rank())
        throw DomainError("finite model needs one permutation per group generator");
    const std::size_t k = weights.size();
    if (k == 0) throw DomainError("finite model needs at least one atom");
    long double total = 0.0L;
    for (const double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("finite model weights must be nonnegative");
        total += w;
    }
    if (std::abs(static_cast<double>(total) - 1.0) > 1e-12) throw DomainError("finite model weights must sum to 1");

    auto impl = std::make_shared<Impl>(SystemKind::finite_permutation, group, std::move(label));
    impl->dim = k;
    for (const auto& p : perms) {
        if (p.size() != k) throw DomainError("permutation length differs from the number of atoms");
        std::vector<char> seen(k, 0);
        for (const auto v : p) {
            if (v >= k || seen[v]) throw DomainError("generator map is not a permutation");
            seen[v] = 1;
        }
    }
    for (std::size_t a = 0; a < perms.size(); ++a)
        for (std::size_t b = a + 1; b < perms.size(); ++b)
            for (std::size_t i = 0; i < k; ++i)
                if (perms[a][perms[b][i]] != perms[b][perms[a][i]])
                    throw DomainError("generator permutations must commute");

    for (const auto& p : perms) {
        std::vector<std::vector<std::size_t>> cyc;
        std::vector<std::size_t> cof(k, k), pos(k, 0);
        for (std::size_t s = 0; s < k; ++s) {
            if (cof[s] != k) continue;
            std::vector<std::size_t> c;
            for (std::size_t v = s; cof[v] == k; v = p[v]) {
                cof[v] = cyc.size();
                pos[v] = c.size();
                c.push_back(v);
            }
            if (group.kind() == GroupKind::cyclic && group.order() % static_cast<std::int64_t>(c.size()) != 0)
                throw DomainError("permutation order does not divide the cyclic group order");
            cyc.push_back(std::move(c));
        }
        impl->cycles.push_back(std::move(cyc));
        impl->cycle_of.push_back(std::move(cof));
        impl->position.push_back(std::move(pos));
    }

    std::vector<std::size_t> parent(k);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    for (const auto& p : perms)
        for (std::size_t i = 0; i < k; ++i) {
            const auto a = find(i), b = find(p[i]);
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
    impl->orbit.resize(k);
    for (std::size_t i = 0; i < k; ++i) impl->orbit[i] = find(i);

    impl->cumulative.resize(k);
    long double run = 0.0L;
    for (std::size_t i = 0; i < k; ++i) {
        run += weights[i];
        impl->cumulative[i] = static_cast<double>(run / total);
    }
    impl->cumulative.back() = 1.0;
    impl->weights = std::move(weights);
    impl->perms = std::move(perms);
    return System(std::move(impl));
}

System System::cyclic_rotation(std::int64_t order) {
    if (order < 1 || order > (std::int64_t{1} << 24)) throw DomainError("cyclic rotation order out of range");
    const auto n = static_cast<std::size_t>(order);
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = (i + 1) % n;
    return finite_permutation(Group::cyclic(order), std::vector<double>(n, 1.0 / static_cast<double>(n)), {perm},
                              "cyclic_rotation");
}

System System::torus_rotation(Group group, std::size_t dim, std::vector<std::array<double, 3>> alphas,
                              std::string label) {
    if (dim == 0 || dim > 3) throw DomainError("torus dimension must be 1, 2 or 3");
    if (group.kind() == GroupKind::cyclic) throw DomainError("torus rotations need Z, Z^d or the Heisenberg group");
    const std::size_t gens = group.kind() == GroupKind::heisenberg ? 2 : group.rank();
    if (alphas.size() != gens) throw DomainError("torus rotation needs one rotation vector per generator");
    for (auto& a : alphas)
        for (std::size_t i = 0; i < 3; ++i) {
            if (!std::isfinite(a[i])) throw DomainError("rotation vector must be finite");
            a[i] = i < dim ? frac(a[i]) : 0.0;
        }
    auto impl = std::make_shared<Impl>(SystemKind::torus_rotation, group, std::move(label));
    impl->dim = dim;
    impl->alphas = std::move(alphas);
    return System(std::move(impl));
}

System System::two_component(double alpha0, double alpha1, double p0, std::string label) {
    check_probability(p0, "component probability");
    if (!std::isfinite(alpha0) || !std::isfinite(alpha1)) throw DomainError("rotation numbers must be finite");
    auto impl = std::make_shared<Impl>(SystemKind::two_component, Group::integers(), std::move(label));
    impl->dim = 1;
    impl->alphas = {{frac(alpha0), 0.0, 0.0}, {frac(alpha1), 0.0, 0.0}};
    impl->p0 = p0;
    return System(std::move(impl));
}

System System::bernoulli_shift(double p_one, std::string label) {
    check_probability(p_one, "Bernoulli parameter");
    auto impl = std::make_shared<Impl>(SystemKind::bernoulli_shift, Group::integers(), std::move(label));
    impl->p_one = p_one;
    return System(std::move(impl));
}

SystemKind System::kind() const noexcept { return impl_->kind; }
const Group& System::group() const noexcept { return impl_->group; }
const std::string& System::label() const noexcept { return impl_->label; }
std::size_t System::dim() const noexcept { return impl_->dim; }

const std::vector<double>& System::weights() const {
    if (impl_->kind != SystemKind::finite_permutation) throw DomainError("weights() needs a finite model");
    return impl_->weights;
}

const std::vector<std::array<double, 3>>& System::alphas() const { return impl_->alphas; }

double System::component_probability(std::uint32_t c) const {
    if (impl_->kind != SystemKind::two_component || c > 1) throw DomainError("no such component");
    return c == 0 ? impl_->p0 : 1.0 - impl_->p0;
}

double System::bernoulli_p() const { return impl_->p_one; }

int System::shift_coordinate(const OmegaPoint& omega, std::int64_t k) const {
    if (impl_->kind != SystemKind::bernoulli_shift) throw DomainError("shift_coordinate needs a Bernoulli shift");
    const std::uint64_t h = derive_seed(omega.state, static_cast<std::uint64_t>(omega.shift + k));
    return static_cast<double>(h >> 11) * 0x1.0p-53 < impl_->p_one ? 1 : 0;
}

OmegaPoint System::act(const GroupElement& g0, const OmegaPoint& omega) const {
    const Impl& m = *impl_;
    const GroupElement g = m.group.normalize(g0);
    OmegaPoint r = omega;
    switch (m.kind) {
        case SystemKind::finite_permutation: {
            if (omega.state >= m.dim) throw DomainError("atom index out of range");
            std::size_t v = omega.state;
            for (std::size_t j = 0; j < m.perms.size(); ++j) {
                if (g.c[j] == 0) continue;
                const auto& cyc = m.cycles[j][m.cycle_of[j][v]];
                const auto len = static_cast<std::int64_t>(cyc.size());
                v = cyc[static_cast<std::size_t>(mod(static_cast<std::int64_t>(m.position[j][v]) + g.c[j], len))];
            }
            r.state = v;
            return r;
        }
        case SystemKind::torus_rotation:
            for (std::size_t i = 0; i < m.dim; ++i) {
                long double s = omega.x[i];
                for (std::size_t j = 0; j < m.alphas.size(); ++j)
                    s += static_cast<long double>(g.c[j]) * static_cast<long double>(m.alphas[j][i]);
                r.x[i] = frac(s);
            }
            return r;
        case SystemKind::two_component:
            if (omega.component > 1) throw DomainError("component index out of range");
            r.x[0] = frac(static_cast<long double>(omega.x[0]) +
                          static_cast<long double>(g.c[0]) * static_cast<long double>(m.alphas[omega.component][0]));
            return r;
        case SystemKind::bernoulli_shift:
            r.shift = omega.shift + g.c[0];
            return r;
    }
    return r;
}

std::vector<OmegaPoint> System::sample(std::uint64_t seed, std::size_t count) const {
    if (count == 0) throw DomainError("sample count must be at least 1");
    const Impl& m = *impl_;
    std::vector<OmegaPoint> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        CounterRng rng(derive_seed(seed, i));
        OmegaPoint& w = out[i];
        switch (m.kind) {
            case SystemKind::finite_permutation: {
                const double u = rng.uniform();
                auto it = std::upper_bound(m.cumulative.begin(), m.cumulative.end(), u);
                auto idx = static_cast<std::size_t>(it - m.cumulative.begin());
                if (idx >= m.dim) idx = m.dim - 1;
                while (m.weights[idx] == 0.0 && idx + 1 < m.dim) ++idx;
                w.state = idx;
                break;
            }
            case SystemKind::torus_rotation:
                for (std::size_t k = 0; k < m.dim; ++k) w.x[k] = rng.uniform();
                break;
            case SystemKind::two_component:
                w.component = rng.uniform() < m.p0 ? 0 : 1;
                w.x[0] = rng.uniform();
                break;
            case SystemKind::bernoulli_shift:
                w.state = rng.next_u64();
                break;
        }
    }
    return out;
}

std::uint64_t System::ergodic_component(const OmegaPoint& omega) const {
    switch (impl_->kind) {
        case SystemKind::finite_permutation:
            if (omega.state >= impl_->dim) throw DomainError("atom index out of range");
            return impl_->orbit[omega.state];
        case SystemKind::two_component:
            return omega.component;
        default:
            return 0;
    }
}

double System::ergodic_component_probability(std::uint64_t component) const {
    const Impl& m = *impl_;
    switch (m.kind) {
        case SystemKind::finite_permutation: {
            long double p = 0.0L;
            for (std::size_t i = 0; i < m.dim; ++i)
                if (m.orbit[i] == component) p += m.weights[i];
            return static_cast<double>(p);
        }
        case SystemKind::two_component:
            return component_probability(static_cast<std::uint32_t>(component));
        default:
            if (component != 0) throw DomainError("no such ergodic component");
            return 1.0;
    }
}

bool System::exact_quadrature() const noexcept { return impl_->kind == SystemKind::finite_permutation; }

std::vector<QuadratureNode> System::quadrature(std::size_t m_axis, std::optional<std::uint64_t> component) const {
    const Impl& m = *impl_;
    std::vector<QuadratureNode> nodes;
    if (m.kind == SystemKind::bernoulli_shift)
        throw DomainError("the Bernoulli demonstration shift has no quadrature");
    if (m.kind == SystemKind::finite_permutation) {
        const double mass = component ? ergodic_component_probability(*component) : 1.0;
        if (!(mass > 0.0)) throw DomainError("ergodic component has zero probability");
        for (std::size_t i = 0; i < m.dim; ++i) {
            if (m.weights[i] == 0.0 || (component && m.orbit[i] != *component)) continue;
            QuadratureNode q;
            q.omega.state = i;
            q.weight = m.weights[i] / mass;
            nodes.push_back(q);
        }
        return nodes;
    }
    if (m_axis == 0) throw DomainError("quadrature needs at least one point per axis");
    const double h = 1.0 / static_cast<double>(m_axis);
    if (m.kind == SystemKind::two_component) {
        for (std::uint32_t c = 0; c < 2; ++c) {
            if (component && *component != c) continue;
            const double mass = component ? 1.0 : component_probability(c);
            if (mass == 0.0) continue;
            for (std::size_t i = 0; i < m_axis; ++i) {
                QuadratureNode q;
                q.omega.component = c;
                q.omega.x[0] = (static_cast<double>(i) + 0.5) * h;
                q.weight = mass * h;
                nodes.push_back(q);
            }
        }
        if (nodes.empty()) throw DomainError("ergodic component has zero probability");
        return nodes;
    }
    if (component && *component != 0) throw DomainError("no such ergodic component");
    std::size_t total = 1;
    for (std::size_t i = 0; i < m.dim; ++i) total *= m_axis;
    if (total > (std::size_t{1} << 26)) throw CapacityError("torus quadrature grid too large");
    nodes.reserve(total);
    const double w = 1.0 / static_cast<double>(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
        QuadratureNode q;
        std::size_t r = idx;
        for (std::size_t i = 0; i < m.dim; ++i) {
            q.omega.x[i] = (static_cast<double>(r % m_axis) + 0.5) * h;
            r /= m_axis;
        }
        q.weight = w;
        nodes.push_back(q);
    }
    return nodes;
}

bool System::check_homomorphism(const std::vector<OmegaPoint>& torus_points) const {
    const Impl& m = *impl_;
    std::vector<GroupElement> elems{m.group.identity()};
    for (const auto& g : m.group.generators()) {
        elems.push_back(g);
        elems.push_back(m.group.inverse(g));
    }
    const std::size_t base = elems.size();
    for (std::size_t a = 1; a < base; ++a)
        for (std::size_t b = 1; b < base; ++b) elems.push_back(m.group.multiply(elems[a], elems[b]));

    std::vector<OmegaPoint> points;
    if (m.kind == SystemKind::finite_permutation) {
        for (std::size_t i = 0; i < m.dim; ++i) {
            OmegaPoint w;
            w.state = i;
            points.push_back(w);
        }
    } else {
        points = torus_points;
    }
    for (const auto& w : points) {
        if (act(m.group.identity(), w) != w) return false;
        for (const auto& g : elems)
            for (const auto& h : elems) {
                const auto lhs = act(m.group.multiply(g, h), w);
                const auto rhs = act(g, act(h, w));
                if (m.kind == SystemKind::finite_permutation || m.kind == SystemKind::bernoulli_shift) {
                    if (lhs != rhs) return false;
                } else {
                    if (lhs.component != rhs.component) return false;
                    for (std::size_t i = 0; i < 3; ++i)
                        if (circle_gap(lhs.x[i], rhs.x[i]) > 1e-12) return false;
                }
            }
    }
    return true;
}

bool System::check_measure_preservation() const {
    const Impl& m = *impl_;
    if (m.kind != SystemKind::finite_permutation) return true;
    for (const auto& p : m.perms)
        for (std::size_t i = 0; i < m.dim; ++i)
            if (m.weights[p[i]] != m.weights[i]) return false;
    return true;
}

}  // namespace hel
