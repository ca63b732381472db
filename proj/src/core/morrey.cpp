#include "core/morrey.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "core/errors.hpp"
#include "core/quadrature.hpp"

namespace qlap {

MorreyContext MorreyContext::make(double p, double q, int d) {
    if (!(p > 1)) throw std::invalid_argument("p must exceed 1");
    if (d < 2) throw std::invalid_argument("d must be >= 2");
    MorreyContext ctx;
    ctx.p = p;
    ctx.q = q;
    ctx.d = d;
    if (p < d) {
        ctx.regime = MorreyRegime::subdim;
        if (!(q > double(d) / p))
            throw std::invalid_argument("subdimensional regime needs q > d/p");
        ctx.q_eff = q;
    } else if (p > d) {
        ctx.regime = MorreyRegime::superdim;
        ctx.q_eff = 1.0; // L^1 flavour; q is irrelevant
    } else {
        ctx.regime = MorreyRegime::critical;
        if (!(q > double(d)))
            throw std::invalid_argument("critical regime needs q > d");
        ctx.q_eff = q;
    }
    return ctx;
}

double MorreyContext::radius_weight_exponent() const {
    if (q_eff <= 1.0) return 0.0;
    return -double(d) * (1.0 - 1.0 / q_eff); // -d/q'
}

namespace {

constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------------------
// Ray machinery.  Along x(t) = y + t e (|e| = 1) every radius is
// r(t) = sqrt((t - t0)^2 + m2) with t0 = -y.e and m2 the squared distance of
// the ray from the origin, so breakpoint shells cut at quadratic roots and
// the only hard point is a ray passing through the origin itself.
// ---------------------------------------------------------------------------

struct Ray {
    double y2;   // |y|^2
    double yd;   // y . e
    int d;
    const Potential* f;

    double radius(double t) const { return std::sqrt(std::max(0.0, y2 + t * (2.0 * yd + t))); }
    double eval(double t) const {
        const double val = std::abs(f->radial(radius(t)));
        return d == 2 ? val * t : val * t * t;
    }
};

// Integral of |f| t^{d-1} over one smooth piece (no breakpoints inside).
double ray_piece(const Ray& ray, double a, double b, double rel_tol) {
    if (!(b > a)) return 0.0;
    Quad1DOptions opt;
    opt.rel_tol = rel_tol;
    opt.abs_tol = 0;
    return integrate_1d([&ray](double t) { return ray.eval(t); }, a, b, opt);
}

// Piece with an integrable singularity at t = ts (ray through the origin,
// |f| ~ c |x|^s there).  Geometric panels toward ts plus the closed-form tail
// of the dropped sliver, with c estimated just outside it.
double ray_piece_singular(const Ray& ray, double ts, double a, double b, double s,
                          double rel_tol) {
    if (!(b > a)) return 0.0;
    const bool at_left = std::abs(ts - a) <= std::abs(b - ts);
    const double len = b - a;
    const double sliver = len * std::pow(2.0, -48);
    double total = 0;
    Quad1DOptions opt;
    opt.rel_tol = rel_tol;
    opt.abs_tol = 0;
    opt.graded_panels = 48;
    if (at_left) {
        opt.graded_at_a = true;
        total = integrate_1d([&ray](double t) { return ray.eval(t); }, a + sliver, b, opt);
    } else {
        opt.graded_at_b = true;
        total = integrate_1d([&ray](double t) { return ray.eval(t); }, a, b - sliver, opt);
    }
    // Tail over the sliver [ts, ts + sliver]: integrand ~ c u^s (ts + u)^{d-1}.
    const double probe = ray.radius(at_left ? a + sliver : b - sliver);
    if (probe > 0) {
        const double c = std::abs(ray.f->radial(probe)) * std::pow(probe, -s);
        double tail;
        if (ts > sliver) {
            tail = c * std::pow(ts, ray.d - 1) * std::pow(sliver, s + 1.0) / (s + 1.0);
        } else {
            tail = c * std::pow(sliver, s + ray.d) / (s + double(ray.d));
        }
        if (std::isfinite(tail)) total += tail;
    }
    return total;
}

// Integral of |f| t^{d-1} dt over {t in [0, cap] : y + t e in window}.
double ray_integral(const Potential& f, const Window& w, const Vec& y, const Vec& e,
                    double cap, double rel_tol) {
    auto intervals = w.ray_intervals(y, e);
    if (intervals.empty()) return 0.0;
    Ray ray{y.squaredNorm(), y.dot(e), w.dim(), &f};

    // Clip to the ball and cut at the radial breakpoints of f.
    std::vector<std::pair<double, double>> pieces;
    std::vector<double> cuts;
    for (double bp : f.radial_breakpoints()) {
        // r(t) = bp  <=>  t^2 + 2 yd t + (y2 - bp^2) = 0
        const double disc = ray.yd * ray.yd - (ray.y2 - bp * bp);
        if (disc <= 0) continue;
        const double sq = std::sqrt(disc);
        cuts.push_back(-ray.yd - sq);
        cuts.push_back(-ray.yd + sq);
    }
    std::sort(cuts.begin(), cuts.end());
    for (auto [lo, hi] : intervals) {
        lo = std::max(lo, 0.0);
        hi = std::min(hi, cap);
        if (!(hi > lo)) continue;
        double prev = lo;
        for (double c : cuts) {
            if (c > prev && c < hi) {
                pieces.emplace_back(prev, c);
                prev = c;
            }
        }
        pieces.emplace_back(prev, hi);
    }

    const double m2 = std::max(0.0, ray.y2 - ray.yd * ray.yd);
    const double t0 = -ray.yd;
    const double scale = std::max(1.0, cap);
    const bool through_origin = m2 < 1e-24 * scale * scale && f.origin_exponent() < 0;

    double total = 0;
    for (auto [a, b] : pieces) {
        if (through_origin && t0 > a - 1e-12 * scale && t0 < b + 1e-12 * scale) {
            const double mid = std::min(b, std::max(a, t0));
            total += ray_piece_singular(ray, mid, a, mid, f.origin_exponent(), rel_tol);
            total += ray_piece_singular(ray, mid, mid, b, f.origin_exponent(), rel_tol);
        } else {
            total += ray_piece(ray, a, b, rel_tol);
        }
    }
    return total;
}

// ---------------------------------------------------------------------------
// Angular integration.  In 2D the integrand is piecewise smooth in the angle;
// the kinks sit where a ray becomes tangent to one of the bounding quadrics
// or where the ball rim crosses one.  Those angles are located by a scan plus
// bisection and the panels between them are integrated adaptively.
// ---------------------------------------------------------------------------

void bisect_roots(const std::function<double(double)>& g, int samples, double period,
                  std::vector<double>& out) {
    double prev = g(0.0);
    for (int i = 1; i <= samples; ++i) {
        const double th = period * i / samples;
        const double cur = g(th);
        if ((prev < 0) != (cur < 0)) {
            double lo = period * (i - 1) / samples, hi = th;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                if ((g(mid) < 0) == (prev < 0)) lo = mid;
                else hi = mid;
            }
            out.push_back(0.5 * (lo + hi));
        }
        prev = cur;
    }
}

// Marker angles for one origin-centered quadric level {x.Qx = s^2}: tangency
// of the ray from y, and crossing of the ball rim y + cap e(theta).
void quadric_markers_2d(const Mat& Q, double s2, const Vec& y, double cap,
                        std::vector<double>& out) {
    auto dir = [](double th) { return Vec(Eigen::Vector2d(std::cos(th), std::sin(th))); };
    bisect_roots(
        [&](double th) {
            const Vec e = dir(th);
            const double a = e.dot(Q * e), b = y.dot(Q * e), c = y.dot(Q * y) - s2;
            return b * b - a * c;
        },
        720, 2.0 * kPi, out);
    bisect_roots(
        [&](double th) {
            const Vec x = y + cap * dir(th);
            return x.dot(Q * x) - s2;
        },
        720, 2.0 * kPi, out);
}

std::vector<double> angular_breaks_2d(const Potential& f, const Window& w, const Vec& y,
                                      double cap) {
    std::vector<double> breaks;
    if (w.is_ball()) {
        const Mat Q = Mat::Identity(2, 2);
        const Vec rel = y - w.center();
        quadric_markers_2d(Q, w.radius() * w.radius(), rel, cap, breaks);
    } else {
        const Mat& Q = w.matrix().inverse();
        quadric_markers_2d(Q, w.outer() * w.outer(), y, cap, breaks);
        if (w.inner() > 0) quadric_markers_2d(Q, w.inner() * w.inner(), y, cap, breaks);
    }
    const Mat I2 = Mat::Identity(2, 2);
    for (double bp : f.radial_breakpoints())
        quadric_markers_2d(I2, bp * bp, y, cap, breaks);
    breaks.push_back(0.0);
    breaks.push_back(2.0 * kPi);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end(),
                             [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                 breaks.end());
    return breaks;
}

double angular_panel(const std::function<double(double)>& g, double a, double b,
                     double tol_abs, int depth) {
    const double whole = gauss_legendre(g, a, b, 12);
    const double mid = 0.5 * (a + b);
    const double halves = gauss_legendre(g, a, mid, 12) + gauss_legendre(g, mid, b, 12);
    if (depth <= 0 || std::abs(halves - whole) <= tol_abs)
        return halves;
    return angular_panel(g, a, mid, 0.5 * tol_abs, depth - 1) +
           angular_panel(g, mid, b, 0.5 * tol_abs, depth - 1);
}

double ball_integral_2d(const Potential& f, const Window& w, const Vec& y, double cap,
                        double rel_tol) {
    auto g = [&](double th) {
        Vec e(2);
        e << std::cos(th), std::sin(th);
        return ray_integral(f, w, y, e, cap, 0.1 * rel_tol);
    };
    const auto breaks = angular_breaks_2d(f, w, y, cap);
    // First pass for the absolute budget, second pass adaptive.
    double rough = 0;
    for (size_t i = 0; i + 1 < breaks.size(); ++i)
        rough += gauss_legendre(g, breaks[i], breaks[i + 1], 8);
    const double tol_abs = std::max(rel_tol * std::abs(rough), 1e-300);
    double total = 0;
    for (size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double span = (breaks[i + 1] - breaks[i]) / (2.0 * kPi);
        total += angular_panel(g, breaks[i], breaks[i + 1], tol_abs * std::max(span, 0.05), 8);
    }
    return total;
}

// 3D: Gauss-Legendre in cos(polar) x periodic trapezoid in azimuth, doubled
// until two levels agree.  Kinks in direction space keep this at algebraic
// order, so the returned accuracy is the agreement estimate, not a bound.
double ball_integral_3d(const Potential& f, const Window& w, const Vec& y, double cap,
                        double rel_tol) {
    auto level_value = [&](int level) {
        const int ngl = 12 << level, naz = 24 << level;
        const auto& rule = gauss_legendre_rule(ngl);
        double sum = 0;
        Vec e(3);
        for (int i = 0; i < ngl; ++i) {
            const double u = rule.nodes[i];
            const double s = std::sqrt(std::max(0.0, 1.0 - u * u));
            double ring = 0;
            for (int k = 0; k < naz; ++k) {
                const double a = 2.0 * kPi * k / naz;
                e << s * std::cos(a), s * std::sin(a), u;
                ring += ray_integral(f, w, y, e, cap, 0.1 * rel_tol);
            }
            sum += rule.weights[i] * ring * (2.0 * kPi / naz);
        }
        return sum;
    };
    double prev = level_value(0);
    for (int level = 1; level <= 2; ++level) {
        const double cur = level_value(level);
        if (std::abs(cur - prev) <= rel_tol * std::abs(cur)) return cur;
        prev = cur;
    }
    return prev;
}

} // namespace

double window_ball_integral(const Potential& f, const Window& w, const Vec& y, double r,
                            double rel_tol) {
    if (y.size() != w.dim()) throw std::invalid_argument("center dimension mismatch");
    if (!(r > 0)) throw std::invalid_argument("ball radius must be positive");
    if (w.closure_contains_origin() && f.origin_exponent() <= -double(w.dim()))
        throw diverged_error("integral of |x|^s with s <= -d across the origin diverges");
    if (w.dim() == 2) return ball_integral_2d(f, w, y, r, rel_tol);
    if (w.dim() == 3) return ball_integral_3d(f, w, y, r, rel_tol);
    throw unsupported_error("window integrals support d = 2 and d = 3 only");
}

namespace {

std::vector<Vec> family_centers(const Window& w, int level) {
    const int n = (1 << level) + 1;
    const auto [lo, hi] = w.bounding_box();
    const int d = w.dim();
    std::vector<Vec> centers;
    std::vector<int> idx(d, 0);
    Vec x(d);
    while (true) {
        for (int k = 0; k < d; ++k)
            x[k] = lo[k] + (hi[k] - lo[k]) * idx[k] / (n - 1);
        // Closed-window membership for the supremum family.
        bool keep;
        if (w.is_ball()) {
            keep = (x - w.center()).norm() <= w.radius() * (1 + 1e-12);
        } else {
            const double s = w.matrix().anorm_inv(x);
            keep = s >= w.inner() * (1 - 1e-12) && s <= w.outer() * (1 + 1e-12);
        }
        if (keep) centers.push_back(x);
        int k = 0;
        while (k < d && ++idx[k] == n) idx[k++] = 0;
        if (k == d) break;
    }
    if (centers.empty())
        throw std::invalid_argument("center lattice missed the window; raise centers_level");
    return centers;
}

std::vector<double> family_radii(double diam, int count) {
    std::vector<double> radii;
    for (int j = 1; j <= count; ++j) radii.push_back(diam * std::pow(0.5, j));
    return radii;
}

double norm_over_family(const MorreyContext& ctx, const Potential& f, const Window& w,
                        const MorreyGridSpec& grid, bool critical_weight) {
    if (w.dim() != ctx.d) throw std::invalid_argument("window dimension mismatch");
    const int level = grid.centers_level + grid.refine;
    const int rungs = grid.radii_count + grid.refine;
    const auto centers = family_centers(w, level);
    const auto radii = family_radii(w.diameter(), rungs);
    const double wexp = ctx.radius_weight_exponent();
    const double logexp = ctx.q / (double(ctx.d) / (ctx.d - 1.0)); // q/d'
    double best = 0;
    for (const auto& y : centers) {
        for (double r : radii) {
            const double integral = window_ball_integral(f, w, y, r, grid.ball_rel_tol);
            const double weight = critical_weight
                                      ? std::pow(std::log(w.diameter() / r), logexp)
                                      : std::pow(r, wexp);
            best = std::max(best, weight * integral);
        }
    }
    return best;
}

} // namespace

double morrey_norm(const MorreyContext& ctx, const Potential& f, const Window& w,
                   const MorreyGridSpec& grid) {
    return norm_over_family(ctx, f, w, grid, /*critical_weight=*/false);
}

double morrey_norm_critical(const MorreyContext& ctx, const Potential& f, const Window& w,
                            const MorreyGridSpec& grid) {
    if (ctx.regime != MorreyRegime::critical)
        throw std::invalid_argument("critical norm requires p = d");
    return norm_over_family(ctx, f, w, grid, /*critical_weight=*/true);
}

double special_morrey_norm(const MorreyContext& ctx, const Potential& f, const Window& w,
                           const MorreyGridSpec& grid) {
    if (ctx.regime == MorreyRegime::critical) return morrey_norm_critical(ctx, f, w, grid);
    return morrey_norm(ctx, f, w, grid);
}

double weighted_fuchsian_norm(const MorreyContext& ctx, const Potential& V,
                              const AnnulusSpec& annulus, const MorreyGridSpec& grid) {
    const Window w = annulus.window();
    if (ctx.regime == MorreyRegime::critical)
        return morrey_norm_critical(ctx, V, w, grid);
    const double t = ctx.p - double(ctx.d) / ctx.q_eff;
    return morrey_norm(ctx, V.multiply_radial_power(t), w, grid);
}

FuchsianReport fuchsian_check(const MorreyContext& ctx, const Potential& V, Zeta zeta,
                              const std::vector<double>& scales, double stability_factor,
                              const AnisotropyMatrix* annulus_matrix,
                              const MorreyGridSpec& grid) {
    if (scales.size() < 4)
        throw std::invalid_argument("fuchsian check needs at least 4 scales");
    for (size_t i = 1; i < scales.size(); ++i) {
        const bool ok = zeta == Zeta::origin ? scales[i] < scales[i - 1]
                                             : scales[i] > scales[i - 1];
        if (!ok || !(scales[i] > 0))
            throw std::invalid_argument("scales must move strictly monotonically toward the singular point");
    }
    FuchsianReport rep;
    rep.zeta = zeta;
    rep.scales = scales;
    rep.stability_factor = stability_factor;
    const AnisotropyMatrix mat =
        annulus_matrix ? *annulus_matrix : AnisotropyMatrix::identity(ctx.d);
    double vmax = 0, vmin = std::numeric_limits<double>::infinity();
    for (double R : scales) {
        AnnulusSpec spec(mat, R);
        double val;
        bool div = false;
        try {
            val = weighted_fuchsian_norm(ctx, V, spec, grid);
        } catch (const diverged_error&) {
            val = std::numeric_limits<double>::quiet_NaN();
            div = true;
        }
        rep.norms.push_back(val);
        rep.diverged.push_back(div ? 1 : 0);
        if (!div) {
            vmax = std::max(vmax, val);
            vmin = std::min(vmin, val);
        }
    }
    rep.bound = vmax;
    const bool any_div =
        std::any_of(rep.diverged.begin(), rep.diverged.end(), [](char c) { return c != 0; });
    if (any_div) {
        rep.stability_ratio = std::numeric_limits<double>::infinity();
        rep.is_fuchsian = false;
        return rep;
    }
    if (vmax == 0) rep.stability_ratio = 1.0; // identically vanishing norms
    else if (vmin == 0) rep.stability_ratio = std::numeric_limits<double>::infinity();
    else rep.stability_ratio = vmax / vmin;
    rep.is_fuchsian = rep.stability_ratio <= stability_factor;
    return rep;
}

std::vector<double> dilation_norm_sequence(const MorreyContext& ctx, const Potential& V,
                                           const std::vector<double>& scales,
                                           const Window& test_window,
                                           const MorreyGridSpec& grid) {
    std::vector<double> norms;
    norms.reserve(scales.size());
    for (double R : scales) {
        if (!(R > 0)) throw std::invalid_argument("dilation scales must be positive");
        norms.push_back(special_morrey_norm(ctx, V.dilate(R, ctx.p), test_window, grid));
    }
    return norms;
}

double morrey_adams_min_constant(const MorreyContext& ctx, const Potential& V,
                                 const RadialBump& u, double delta) {
    if (!(delta > 0)) throw std::invalid_argument("delta must be positive");
    const double p = ctx.p;
    const int d = ctx.d;
    const double area = unit_sphere_area(d);
    Quad1DOptions opt;
    opt.rel_tol = 1e-10;

    auto radial_integral = [&](const std::function<double(double)>& g) {
        // Split at the breakpoints of V inside the support of u.
        std::vector<double> cuts{u.a, u.b};
        for (double bp : V.radial_breakpoints())
            if (bp > u.a && bp < u.b) cuts.push_back(bp);
        std::sort(cuts.begin(), cuts.end());
        double total = 0;
        for (size_t i = 0; i + 1 < cuts.size(); ++i)
            total += integrate_1d(g, cuts[i], cuts[i + 1], opt);
        return area * total;
    };

    const double num = radial_integral([&](double r) {
        return std::abs(V.radial(r)) * std::pow(u.value(r), p) * std::pow(r, d - 1);
    });
    const double grad = radial_integral([&](double r) {
        return std::pow(std::abs(u.derivative(r)), p) * std::pow(r, d - 1);
    });
    const double mass = radial_integral([&](double r) {
        return std::pow(u.value(r), p) * std::pow(r, d - 1);
    });
    if (!(mass > 0)) throw std::invalid_argument("test function must be nonzero");
    return (num - delta * grad) / mass;
}

} // namespace qlap
