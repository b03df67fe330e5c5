#include "hel/ergodic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <unordered_map>

#include "hel/errors.hpp"
#include "hel/random.hpp"

namespace hel {

namespace {

void require_compatible(const Observable& f, const FolnerSequence& folner) {
    if (!(f.system().group() == folner.group()))
        throw DomainError("observable system group " + f.system().group().describe() + " differs from Folner group " +
                          folner.group().describe());
}

void require_same_setting(const Observable& f, const Observable& h) {
    if (f.system().kind() != h.system().kind() || !(f.system().group() == h.system().group()) ||
        f.system().dim() != h.system().dim())
        throw DomainError("observables live on different systems");
    require_same_space(f.target(), h.target(), "observables");
}

/// f(T^g ω) memoised per group element.
class OrbitCache {
public:
    OrbitCache(const Observable& f, const OmegaPoint& omega) : f_(f), omega_(omega) {}

    const SpacePoint& at(const GroupElement& g) {
        auto it = cache_.find(g);
        if (it == cache_.end()) it = cache_.emplace(g, f_(f_.system().act(g, omega_))).first;
        return it->second;
    }

    std::vector<SpacePoint> patch(const FolnerSequence& folner, std::size_t n) {
        std::vector<SpacePoint> pts;
        pts.reserve(folner.size(n));
        folner.for_each(n, [&](const GroupElement& g) { pts.push_back(at(g)); });
        return pts;
    }

private:
    const Observable& f_;
    OmegaPoint omega_;
    std::unordered_map<GroupElement, SpacePoint, GroupElementHash> cache_;
};

FiniteMeasure uniform_over(std::vector<SpacePoint> pts) {
    std::vector<double> w(pts.size(), 1.0);
    return FiniteMeasure::normalized(std::move(pts), std::move(w));
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

std::size_t torus_nodes(const System& sys, std::size_t m) {
    if (sys.kind() != SystemKind::torus_rotation) return m;
    std::size_t total = 1;
    for (std::size_t i = 0; i < sys.dim(); ++i) {
        if (total > (std::size_t{1} << 40) / m) return std::size_t{1} << 40;
        total *= m;
    }
    return total;
}

BarycentreOptions reference_options(BarycentreOptions opts, double precision) {
    opts.tol = std::max(std::min(opts.tol, 0.1 * precision), 1e-13);
    return opts;
}

/// Runs body(i) for i in [0, count), serially or with OpenMP; the first exception is rethrown.
template <class Body>
void for_each_index(std::size_t count, Execution exec, Body&& body) {
    std::vector<std::exception_ptr> errors(count);
    const auto n = static_cast<std::ptrdiff_t>(count);
    if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            try {
                body(static_cast<std::size_t>(i));
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            try {
                body(static_cast<std::size_t>(i));
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::string describe_exception(std::exception_ptr e) {
    try {
        std::rethrow_exception(e);
    } catch (const std::exception& ex) {
        return ex.what();
    } catch (...) {
        return "unknown error";
    }
}

std::vector<double> default_grid(double scale) {
    if (!(scale > 0.0)) scale = 1.0;
    std::vector<double> g;
    for (int j = 0; j < 8; ++j) g.push_back(scale * std::pow(2.0, (j - 3) / 2.0));
    return g;
}

}  // namespace

FiniteMeasure empirical_measure(const Observable& f, const FolnerSequence& folner, const OmegaPoint& omega,
                                std::size_t n, std::size_t cap) {
    require_compatible(f, folner);
    if (folner.size(n) > cap) throw CapacityError("Folner set larger than the enumeration cap");
    OrbitCache cache(f, omega);
    return uniform_over(cache.patch(folner, n));
}

BarycentreResult empirical_barycentre(const Observable& f, const FolnerSequence& folner, const OmegaPoint& omega,
                                      std::size_t n, const BarycentreOptions& options) {
    return barycentre(empirical_measure(f, folner, omega, n), options);
}

std::vector<double> ergodic_average(const Observable& f, const FolnerSequence& folner, const OmegaPoint& omega,
                                    std::size_t n) {
    require_compatible(f, folner);
    if (f.target().kind() != SpaceKind::euclidean) throw DomainError("ergodic_average needs a Euclidean target");
    std::vector<long double> sum(f.target().dim(), 0.0L);
    std::size_t count = 0;
    folner.for_each(n, [&](const GroupElement& g) {
        const auto p = f(f.system().act(g, omega));
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += p[i];
        ++count;
    });
    std::vector<double> avg(sum.size());
    for (std::size_t i = 0; i < sum.size(); ++i) avg[i] = static_cast<double>(sum[i] / count);
    return avg;
}

FiniteMeasure pushforward_measure(const Observable& f, std::size_t points_per_axis,
                                  std::optional<std::uint64_t> component) {
    const auto nodes = f.system().quadrature(points_per_axis, component);
    std::vector<SpacePoint> pts;
    std::vector<double> w;
    pts.reserve(nodes.size());
    w.reserve(nodes.size());
    for (const auto& q : nodes) {
        pts.push_back(f(q.omega));
        w.push_back(q.weight);
    }
    return FiniteMeasure::normalized(std::move(pts), std::move(w));
}

BarycentreResult pushforward_reference(const Observable& f, const QuadratureOptions& quad,
                                       std::optional<std::uint64_t> component, const BarycentreOptions& options) {
    if (!(quad.precision > 0.0)) throw DomainError("quadrature precision must be positive");
    const auto opts = reference_options(options, quad.precision);
    const System& sys = f.system();
    if (sys.exact_quadrature()) return barycentre(pushforward_measure(f, 1, component), opts);
    std::size_t m = std::max<std::size_t>(quad.initial_points, 2);
    // Two consecutive stable doublings: a single one can be a coincidence of grid alignment.
    auto prev = barycentre(pushforward_measure(f, m, component), opts);
    int stable = 0;
    for (;;) {
        m *= 2;
        if (torus_nodes(sys, m) > quad.max_nodes)
            throw PrecisionError("pushforward quadrature did not stabilise to " + std::to_string(quad.precision) +
                                 " within " + std::to_string(quad.max_nodes) + " nodes");
        auto next = barycentre(pushforward_measure(f, m, component), opts);
        stable = dist(prev.point, next.point) < quad.precision ? stable + 1 : 0;
        if (stable == 2) return next;
        prev = std::move(next);
    }
}

double d2_distance(const Observable& f, const Observable& h, const QuadratureOptions& quad) {
    require_same_setting(f, h);
    const System& sys = f.system();
    auto integrate = [&](std::size_t m) {
        long double s = 0.0L;
        for (const auto& q : sys.quadrature(m)) {
            const double d = dist(f(q.omega), h(q.omega));
            s += static_cast<long double>(q.weight) * d * d;
        }
        return static_cast<double>(s);
    };
    if (sys.exact_quadrature()) return std::sqrt(integrate(1));
    std::size_t m = std::max<std::size_t>(quad.initial_points, 2);
    double prev = integrate(m);
    int stable = 0;
    for (;;) {
        m *= 2;
        if (torus_nodes(sys, m) > quad.max_nodes)
            throw PrecisionError("d2 quadrature did not stabilise to " + std::to_string(quad.precision));
        const double next = integrate(m);
        stable = std::abs(std::sqrt(next) - std::sqrt(prev)) < quad.precision ? stable + 1 : 0;
        if (stable == 2) return std::sqrt(next);
        prev = next;
    }
}

Observable finite_valued_approximation(const Observable& f, double target, const ApproximationOptions& options) {
    if (!(target > 0.0)) throw DomainError("approximation target must be positive");
    if (f.is_partition()) return f;
    const System& sys = f.system();
    std::size_t per_axis = options.image_points;
    if (sys.kind() == SystemKind::torus_rotation && sys.dim() > 1)
        per_axis = static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(options.image_points),
                                                                1.0 / static_cast<double>(sys.dim()))));
    std::vector<SpacePoint> images;
    for (const auto& q : sys.quadrature(per_axis)) images.push_back(f(q.omega));

    QuadratureOptions quad = options.quad;
    quad.precision = std::max(quad.precision, 1e-3 * target);

    // Greedy net of radius r; returns h and whether d_2(f, h) < target.
    auto build = [&](double r) {
        auto centres = std::make_shared<std::vector<SpacePoint>>();
        for (const auto& y : images) {
            bool covered = false;
            for (const auto& c : *centres)
                if (dist(y, c) <= r) {
                    covered = true;
                    break;
                }
            if (!covered) {
                centres->push_back(y);
                if (centres->size() > options.net_cap)
                    throw CapacityError("finite-valued approximation needs more than " +
                                        std::to_string(options.net_cap) + " net centres");
            }
        }
        auto cell = [f, centres, r](const OmegaPoint& w) {
            const auto y = f(w);
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < centres->size(); ++i) {
                const double d = dist(y, (*centres)[i]);
                if (d <= r) return i;
                if (d < best_d) {
                    best_d = d;
                    best = i;
                }
            }
            return best;
        };
        auto h = Observable::partition(sys, f.target(), cell, *centres, f.label() + "_net");
        const bool ok = d2_distance(f, h, quad) + quad.precision < target;
        return std::pair{std::move(h), ok};
    };

    std::optional<Observable> best;
    double lo = 0.0, hi = 0.0;  // lo passes, hi fails (0: unknown)
    auto [h0, ok0] = build(target);
    if (ok0) {
        best = std::move(h0);
        lo = target;
        if (options.calibration_steps == 0) return *best;
        for (int k = 0; k < 4 && hi == 0.0; ++k) {
            auto [h, ok] = build(2.0 * lo);
            if (ok) {
                best = std::move(h);
                lo *= 2.0;
            } else {
                hi = 2.0 * lo;
            }
        }
        if (hi == 0.0) return *best;
    } else {
        hi = target;
        for (std::size_t attempt = 0; attempt < options.max_halvings && !best; ++attempt) {
            auto [h, ok] = build(0.5 * hi);
            if (ok) {
                best = std::move(h);
                lo = 0.5 * hi;
            } else {
                hi *= 0.5;
            }
        }
        if (!best) throw PrecisionError("finite-valued approximation missed the d2 target after radius halving");
    }
    for (std::size_t step = 0; step < options.calibration_steps; ++step) {
        const double mid = 0.5 * (lo + hi);
        auto [h, ok] = build(mid);
        if (ok) {
            best = std::move(h);
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return *best;
}

// ---------------------------------------------------------------------------

ConvergenceResult convergence_experiment(const Observable& f, const FolnerSequence& folner,
                                         const ConvergenceSetup& setup, Execution exec) {
    require_compatible(f, folner);
    if (setup.omega_samples == 0) throw DomainError("omega_samples must be at least 1");
    if (setup.schedule_exponent > 40) throw DomainError("schedule exponent too large");
    const System& sys = f.system();

    std::vector<std::size_t> schedule;
    for (std::size_t k = 0; k <= setup.schedule_exponent; ++k) schedule.push_back(std::size_t{1} << k);
    const std::size_t quarter = std::max<std::size_t>(1, (schedule.size() + 3) / 4);
    const std::size_t n_max = schedule.back();
    if (const auto len = folner.length(); len && n_max > *len)
        throw DomainError("schedule exceeds the custom Folner family length");

    ConvergenceResult result;
    auto& sum = result.summary;
    sum.scenario = setup.scenario;
    sum.seed = setup.seed;
    sum.tolerance = setup.tolerance;

    const std::size_t horizon = setup.temper_horizon ? setup.temper_horizon : n_max;
    const auto temper = tempered_report(folner, horizon, setup.shulman_bound);
    sum.tempered = temper.is_tempered;
    sum.max_shulman_ratio = temper.max_ratio;
    if (!temper.is_tempered)
        sum.failure = "Folner sequence not tempered: Shulman ratio " + std::to_string(temper.max_ratio) + " at n = " +
                      std::to_string(temper.argmax) + " exceeds " + std::to_string(setup.shulman_bound);

    BarycentreOptions bary = setup.bary;
    bary.seed = derive_seed(setup.seed, 0xBA7C);

    const auto omegas = sys.sample(derive_seed(setup.seed, 0x0E6A), setup.omega_samples);
    std::map<std::uint64_t, SpacePoint> refs;
    for (const auto& w : omegas) {
        const auto c = sys.ergodic_component(w);
        if (!refs.count(c)) refs.emplace(c, pushforward_reference(f, setup.quad, c, bary).point);
    }
    for (const auto& [c, p] : refs) sum.references.push_back({c, p});

    struct Outcome {
        std::vector<ConvergenceRecord> records;
        double final_quarter = 0.0;
        std::optional<double> invariance;
        std::string error;
    };
    std::vector<Outcome> outcomes(omegas.size());

    for_each_index(omegas.size(), exec, [&](std::size_t i) {
        Outcome& out = outcomes[i];
        try {
            const auto& ref = refs.at(sys.ergodic_component(omegas[i]));
            OrbitCache cache(f, omegas[i]);
            for (std::size_t s = 0; s < schedule.size(); ++s) {
                const auto t0 = std::chrono::steady_clock::now();
                const auto b = barycentre(uniform_over(cache.patch(folner, schedule[s])), bary);
                ConvergenceRecord rec{i, schedule[s], b.point, dist(b.point, ref), 0.0};
                rec.wall_ms = elapsed_ms(t0);
                if (s + quarter >= schedule.size()) out.final_quarter = std::max(out.final_quarter, rec.dist_to_reference);
                out.records.push_back(std::move(rec));
            }
            if (setup.invariance_shift) {
                const auto shifted = sys.act(*setup.invariance_shift, omegas[i]);
                const auto b = empirical_barycentre(f, folner, shifted, n_max, bary);
                out.invariance = dist(b.point, out.records.back().barycentre);
            }
        } catch (...) {
            out.error = "omega " + std::to_string(i) + ": " + describe_exception(std::current_exception());
        }
    });

    bool ok = sum.failure.empty();
    for (auto& out : outcomes) {
        for (auto& r : out.records) result.records.push_back(std::move(r));
        if (!out.error.empty()) {
            ok = false;
            if (sum.failure.empty()) sum.failure = out.error;
            continue;
        }
        sum.final_quarter_dist.push_back(out.final_quarter);
        sum.max_final_quarter_dist = std::max(sum.max_final_quarter_dist, out.final_quarter);
        if (out.final_quarter > setup.tolerance) ok = false;
        if (out.invariance) {
            sum.invariance_max_dist = std::max(sum.invariance_max_dist.value_or(0.0), *out.invariance);
            if (*out.invariance > setup.invariance_tolerance) ok = false;
        }
    }
    if (ok == false && sum.failure.empty()) {
        if (sum.max_final_quarter_dist > setup.tolerance)
            sum.failure = "final-quarter distance " + std::to_string(sum.max_final_quarter_dist) +
                          " exceeds tolerance " + std::to_string(setup.tolerance);
        else
            sum.failure = "limits from omega and its translate differ by " +
                          std::to_string(sum.invariance_max_dist.value_or(0.0));
    }
    sum.pass = ok;
    return result;
}

// ---------------------------------------------------------------------------

MaximalEstimate maximal_experiment(const Observable& f, const Observable& h, const FolnerSequence& folner,
                                   const MaximalSetup& setup, Execution exec) {
    require_same_setting(f, h);
    require_compatible(f, folner);
    if (setup.omega_samples == 0 || setup.horizon == 0) throw DomainError("maximal experiment needs samples and horizon");
    if (const auto len = folner.length(); len && setup.horizon > *len)
        throw DomainError("horizon exceeds the custom Folner family length");
    const System& sys = f.system();

    MaximalEstimate est;
    est.scenario = setup.scenario;
    est.seed = setup.seed;
    est.horizon = setup.horizon;
    est.omega_samples = setup.omega_samples;
    est.d2 = d2_distance(f, h, setup.quad);
    est.l1_norm = est.d2 * est.d2;
    est.alphas = setup.alphas.empty() ? default_grid(est.d2) : setup.alphas;
    for (const double a : est.alphas)
        if (!(a > 0.0)) throw DomainError("alpha grid must be positive");
    std::sort(est.alphas.begin(), est.alphas.end());
    est.scalar_alphas = default_grid(est.l1_norm);

    BarycentreOptions bary = setup.bary;
    bary.seed = derive_seed(setup.seed, 0xBA7C);

    const auto omegas = sys.sample(derive_seed(setup.seed, 0x0E6A), setup.omega_samples);
    const bool running = f.target().kind() == SpaceKind::euclidean && folner.family() == FolnerFamily::interval;
    const std::size_t dim = f.target().coord_size();

    struct Outcome {
        double sup_dist = 0.0, sup_avg = 0.0;
        std::size_t chain = 0, chain_bad = 0, audited = 0, lemma_bad = 0, coupling_bad = 0;
    };
    std::vector<Outcome> outcomes(omegas.size());

    for_each_index(omegas.size(), exec, [&](std::size_t i) {
        Outcome& out = outcomes[i];
        OrbitCache fc(f, omegas[i]), hc(h, omegas[i]);
        std::vector<long double> sf(dim, 0.0L), sh(dim, 0.0L);
        long double scost = 0.0L;
        std::size_t prev_size = 0;
        const bool audit_omega = i < setup.audit_omegas;
        for (std::size_t n = 1; n <= setup.horizon; ++n) {
            const std::size_t size = folner.size(n);
            double d = 0.0, avg = 0.0;
            if (running) {
                for (std::size_t k = prev_size; k < size; ++k) {
                    GroupElement g;
                    g.c[0] = static_cast<std::int64_t>(k);
                    const auto& a = fc.at(g);
                    const auto& b = hc.at(g);
                    for (std::size_t j = 0; j < dim; ++j) {
                        sf[j] += a[j];
                        sh[j] += b[j];
                    }
                    const double dd = dist(a, b);
                    scost += static_cast<long double>(dd) * dd;
                }
                prev_size = size;
                long double sq = 0.0L;
                for (std::size_t j = 0; j < dim; ++j) {
                    const long double diff = (sf[j] - sh[j]) / static_cast<long double>(size);
                    sq += diff * diff;
                }
                d = static_cast<double>(std::sqrt(sq));
                avg = static_cast<double>(scost / static_cast<long double>(size));
            } else {
                const auto pf = fc.patch(folner, n), ph = hc.patch(folner, n);
                long double c = 0.0L;
                for (std::size_t k = 0; k < pf.size(); ++k) {
                    const double dd = dist(pf[k], ph[k]);
                    c += static_cast<long double>(dd) * dd;
                }
                avg = static_cast<double>(c / static_cast<long double>(pf.size()));
                d = dist(barycentre(uniform_over(pf), bary).point, barycentre(uniform_over(ph), bary).point);
            }
            out.sup_dist = std::max(out.sup_dist, d);
            out.sup_avg = std::max(out.sup_avg, avg);
            ++out.chain;
            if (d > std::sqrt(avg) + 1e-9 * (1.0 + std::sqrt(avg))) ++out.chain_bad;

            const bool dyadic = (n & (n - 1)) == 0 || n == setup.horizon;
            if (audit_omega && dyadic) {
                const auto pf = fc.patch(folner, n), ph = hc.patch(folner, n);
                std::vector<std::pair<SpacePoint, SpacePoint>> pairs;
                pairs.reserve(pf.size());
                for (std::size_t k = 0; k < pf.size(); ++k) pairs.emplace_back(pf[k], ph[k]);
                const std::vector<double> w(pf.size(), 1.0 / static_cast<double>(pf.size()));
                const auto lambda = orbit_coupling(pairs, w);
                const auto w2 = w2_distance(lambda.rows, lambda.cols, setup.transport);
                const double lhs = dist(barycentre(lambda.rows, bary).point, barycentre(lambda.cols, bary).point);
                ++out.audited;
                if (lhs > w2.distance + 1e-6 * (1.0 + w2.distance)) ++out.lemma_bad;
                const double cost = coupling_cost(lambda);
                if (w2.cost > cost + 1e-9 * (1.0 + cost)) ++out.coupling_bad;
            }
        }
    });

    for (const auto& o : outcomes) {
        est.sup_dist.push_back(o.sup_dist);
        est.sup_average.push_back(o.sup_avg);
        est.chain_checks += o.chain;
        est.chain_violations += o.chain_bad;
        est.audited_cells += o.audited;
        est.lemma_violations += o.lemma_bad;
        est.coupling_violations += o.coupling_bad;
    }

    auto tail = [&](const std::vector<double>& sups, double alpha) {
        std::size_t c = 0;
        for (const double s : sups)
            if (s > alpha) ++c;
        return static_cast<double>(c) / static_cast<double>(sups.size());
    };

    const double d2sq = est.d2 * est.d2;
    for (const double a : est.alphas) {
        const double t = tail(est.sup_dist, a);
        est.tail_probs.push_back(t);
        if (t > 0.0) est.fitted_c = std::max(est.fitted_c, d2sq > 0.0 ? t * a * a / d2sq : HUGE_VAL);
    }
    for (std::size_t j = 0; j < est.alphas.size(); ++j) {
        const double a = est.alphas[j];
        est.bounds.push_back(est.fitted_c == 0.0 ? 0.0 : est.fitted_c * d2sq / (a * a));
        if (est.tail_probs[j] > est.bounds[j] * (1.0 + 1e-12)) est.tails_dominated = false;
    }
    for (const double a : est.scalar_alphas) {
        const double t = tail(est.sup_average, a);
        est.scalar_tail_probs.push_back(t);
        if (t > 0.0) est.scalar_fitted_c = std::max(est.scalar_fitted_c, est.l1_norm > 0.0 ? t * a / est.l1_norm : HUGE_VAL);
    }
    for (std::size_t j = 0; j < est.scalar_alphas.size(); ++j) {
        const double a = est.scalar_alphas[j];
        est.scalar_bounds.push_back(est.scalar_fitted_c == 0.0 ? 0.0 : est.scalar_fitted_c * est.l1_norm / a);
        if (est.scalar_tail_probs[j] > est.scalar_bounds[j] * (1.0 + 1e-12)) est.tails_dominated = false;
    }
    return est;
}

}  // namespace hel
