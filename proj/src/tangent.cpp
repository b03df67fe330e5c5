#include "hel/tangent.hpp"

#include <array>
#include <cmath>

#include "hel/errors.hpp"

namespace hel::tangent {

namespace {

using Vec3 = std::array<double, 3>;

double minkowski(const Vec3& a, std::span<const double> b) { return -a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

// Minkowski-orthonormal frame of the tangent plane at x.
void hyperboloid_frame(std::span<const double> x, Vec3& e1, Vec3& e2) {
    const double r = std::sqrt(1.0 + x[1] * x[1]);
    e1 = {x[1] * x[0] / r, (1.0 + x[1] * x[1]) / r, x[1] * x[2] / r};
    Vec3 w{x[2] * x[0], x[2] * x[1], 1.0 + x[2] * x[2]};
    const double p = e1[2];
    for (int k = 0; k < 3; ++k) w[k] -= p * e1[k];
    const double nw = std::sqrt(minkowski(w, w));
    for (double& c : w) c /= nw;
    e2 = w;
}

// d * coth(d), continuous at 0.
double d_coth_d(double d) { return d < 1e-8 ? 1.0 : d / std::tanh(d); }

void hyperboloid_accumulate(std::span<const double> x, std::span<const double> y, double weight, std::span<double> v,
                            std::span<double> h, std::size_t ld, std::size_t off) {
    const double d = raw::dist(SpaceDescriptor::hyperboloid2(), x, y);
    h[off * ld + off] += weight;
    h[(off + 1) * ld + off + 1] += weight;
    if (d == 0.0) return;
    Vec3 e1, e2;
    hyperboloid_frame(x, e1, e2);
    // <y - Bx, e_k> = <y, e_k> because e_k is orthogonal to x.
    double c1 = minkowski(e1, y), c2 = minkowski(e2, y);
    const double cn = std::hypot(c1, c2);
    if (cn == 0.0) return;
    const double u1 = c1 / cn, u2 = c2 / cn;
    v[off] += weight * d * u1;
    v[off + 1] += weight * d * u2;
    const double extra = weight * (d_coth_d(d) - 1.0);
    // H = u u^T + dcoth(d) (I - u u^T) = I + (dcoth(d) - 1)(I - u u^T)
    h[off * ld + off] += extra * (1.0 - u1 * u1);
    h[off * ld + off + 1] += extra * (-u1 * u2);
    h[(off + 1) * ld + off] += extra * (-u1 * u2);
    h[(off + 1) * ld + off + 1] += extra * (1.0 - u2 * u2);
}

void hyperboloid_exp(std::span<const double> x, std::span<const double> v, std::span<double> out) {
    const double n = std::hypot(v[0], v[1]);
    if (n == 0.0) {
        for (int k = 0; k < 3; ++k) out[k] = x[k];
        return;
    }
    Vec3 e1, e2;
    hyperboloid_frame(x, e1, e2);
    const double ch = std::cosh(n), sh_n = std::sinh(n) / n;
    for (int k = 0; k < 3; ++k) out[k] = ch * x[k] + sh_n * (v[0] * e1[k] + v[1] * e2[k]);
    out[0] = std::sqrt(1.0 + out[1] * out[1] + out[2] * out[2]);
}

}  // namespace

void accumulate(const SpaceDescriptor& space, std::span<const double> x, std::span<const double> y, double weight,
                std::span<double> v, std::span<double> hessian, std::size_t ld, std::size_t offset) {
    switch (space.kind()) {
        case SpaceKind::euclidean:
            for (std::size_t i = 0; i < x.size(); ++i) {
                v[offset + i] += weight * (y[i] - x[i]);
                hessian[(offset + i) * ld + offset + i] += weight;
            }
            return;
        case SpaceKind::hyperboloid2: hyperboloid_accumulate(x, y, weight, v, hessian, ld, offset); return;
        case SpaceKind::metric_tree: throw DomainError("tree spaces have no tangent space");
        case SpaceKind::product: {
            std::size_t t_off = offset;
            const auto& fs = space.factors();
            for (std::size_t i = 0; i < fs.size(); ++i) {
                const std::size_t c_off = space.factor_offset(i), len = fs[i].coord_size();
                accumulate(fs[i], x.subspan(c_off, len), y.subspan(c_off, len), weight, v, hessian, ld, t_off);
                t_off += fs[i].tangent_dim();
            }
            return;
        }
    }
}

void exp(const SpaceDescriptor& space, std::span<const double> x, std::span<const double> v, std::span<double> out) {
    switch (space.kind()) {
        case SpaceKind::euclidean:
            for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + v[i];
            return;
        case SpaceKind::hyperboloid2: hyperboloid_exp(x, v, out); return;
        case SpaceKind::metric_tree: throw DomainError("tree spaces have no tangent space");
        case SpaceKind::product: {
            std::size_t t_off = 0;
            const auto& fs = space.factors();
            for (std::size_t i = 0; i < fs.size(); ++i) {
                const std::size_t c_off = space.factor_offset(i), len = fs[i].coord_size();
                const std::size_t td = fs[i].tangent_dim();
                exp(fs[i], x.subspan(c_off, len), v.subspan(t_off, td), out.subspan(c_off, len));
                t_off += td;
            }
            return;
        }
    }
}

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double c : v) s += c * c;
    return std::sqrt(s);
}

}  // namespace hel::tangent
