#include "core/radial.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "core/errors.hpp"

namespace qlap {

namespace {

double phi_p(double p, double s) {
    if (s == 0.0) return 0.0;
    return std::pow(std::abs(s), p - 1.0) * (s > 0 ? 1.0 : -1.0);
}

double phi_p_inverse(double p, double s) {
    if (s == 0.0) return 0.0;
    return std::pow(std::abs(s), 1.0 / (p - 1.0)) * (s > 0 ? 1.0 : -1.0);
}

} // namespace

RadialOperatorValue radial_operator_apply(const RadialContext& ctx, const C2Radial& f, double r) {
    if (!(r > 0)) throw std::domain_error("radius must be positive");
    const double p = ctx.p, d = ctx.d;
    const double df = f.df(r);
    RadialOperatorValue out;
    if (p < 2.0 && df == 0.0) {
        // |f'|^{p-2} blows up; fall back to differencing the conserved flux
        // F(r) = r^{d-1} |f'|^{p-2} f', which stays continuous.
        const double h = 1e-6 * r;
        auto flux = [&](double s) { return std::pow(s, d - 1.0) * phi_p(p, f.df(s)); };
        out.value = std::pow(r, 1.0 - d) * (flux(r + h) - flux(r - h)) / (2.0 * h);
        out.degenerate = true;
        return out;
    }
    out.value = std::pow(std::abs(df), p - 2.0) * ((p - 1.0) * f.d2f(r) + (d - 1.0) * df / r);
    return out;
}

namespace {

// State integrator for the first-order system in t = log r:
//   du/dt = r phi_p^{-1}(g r^{1-d}),   dg/dt = r^d V(r) phi_p(u),
// classic RK4 with two half-steps per cell so midpoints come out for free.
struct StepperResult {
    std::vector<double> r, u, flux, r_mid, u_mid, flux_mid;
};

StepperResult integrate_system(double p, int d, const Potential& V, double r0, double r1,
                               double u0, double g0, int cells) {
    if (!(r0 > 0) || !(r1 > r0)) throw std::invalid_argument("need 0 < r0 < r1");
    if (cells < 8) throw std::invalid_argument("need at least 8 cells");
    const double t0 = std::log(r0), t1 = std::log(r1);
    const double h = (t1 - t0) / cells;

    auto rhs = [&](double t, double u, double g, double& du, double& dg) {
        const double r = std::exp(t);
        du = r * phi_p_inverse(p, g * std::pow(r, 1.0 - double(d)));
        dg = std::pow(r, double(d)) * V.radial(r) * phi_p(p, u);
    };
    auto rk4 = [&](double t, double& u, double& g, double step) {
        double k1u, k1g, k2u, k2g, k3u, k3g, k4u, k4g;
        rhs(t, u, g, k1u, k1g);
        rhs(t + 0.5 * step, u + 0.5 * step * k1u, g + 0.5 * step * k1g, k2u, k2g);
        rhs(t + 0.5 * step, u + 0.5 * step * k2u, g + 0.5 * step * k2g, k3u, k3g);
        rhs(t + step, u + step * k3u, g + step * k3g, k4u, k4g);
        u += step / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        g += step / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
    };

    StepperResult out;
    out.r.reserve(cells + 1);
    out.u.reserve(cells + 1);
    out.flux.reserve(cells + 1);
    double u = u0, g = g0;
    out.r.push_back(r0);
    out.u.push_back(u);
    out.flux.push_back(g);
    for (int i = 0; i < cells; ++i) {
        const double t = t0 + i * h;
        rk4(t, u, g, 0.5 * h);
        out.r_mid.push_back(std::exp(t + 0.5 * h));
        out.u_mid.push_back(u);
        out.flux_mid.push_back(g);
        rk4(t + 0.5 * h, u, g, 0.5 * h);
        out.r.push_back(std::exp(t0 + (i + 1) * h));
        out.u.push_back(u);
        out.flux.push_back(g);
    }
    return out;
}

RadialSolution package_solution(double p, int d, const Potential& V, StepperResult&& res) {
    RadialSolution sol;
    sol.p = p;
    sol.d = d;
    sol.r = std::move(res.r);
    sol.u = std::move(res.u);
    sol.flux = std::move(res.flux);
    sol.r_mid = std::move(res.r_mid);
    sol.u_mid = std::move(res.u_mid);
    sol.flux_mid = std::move(res.flux_mid);
    const size_t cells = sol.r_mid.size();
    sol.conservation_residual.resize(cells);
    for (size_t i = 0; i < cells; ++i) {
        // Simpson in t of r^d V phi_p(u) against the flux increment.
        const double ht = std::log(sol.r[i + 1] / sol.r[i]);
        auto F = [&](double r, double u) {
            return std::pow(r, double(d)) * V.radial(r) * phi_p(p, u);
        };
        const double integral = ht / 6.0 *
                                (F(sol.r[i], sol.u[i]) + 4.0 * F(sol.r_mid[i], sol.u_mid[i]) +
                                 F(sol.r[i + 1], sol.u[i + 1]));
        sol.conservation_residual[i] = sol.flux[i + 1] - sol.flux[i] - integral;
    }
    return sol;
}

} // namespace

double RadialSolution::derivative_from_flux(double radius, double g) const {
    return phi_p_inverse(p, g * std::pow(radius, 1.0 - double(d)));
}

double RadialSolution::value_at(double radius) const {
    if (r.empty()) throw std::logic_error("empty solution");
    if (radius <= r.front()) return u.front();
    if (radius >= r.back()) return u.back();
    const double t = std::log(radius);
    const double t0 = std::log(r.front());
    const double h = std::log(r[1] / r[0]);
    size_t i = std::min(r.size() - 2, static_cast<size_t>((t - t0) / h));
    while (i + 1 < r.size() - 1 && std::log(r[i + 1]) < t) ++i;
    while (i > 0 && std::log(r[i]) > t) --i;
    // Cubic Hermite in t; nodal slopes du/dt = r u'(r) come from the flux.
    const double ta = std::log(r[i]), tb = std::log(r[i + 1]);
    const double s = (t - ta) / (tb - ta);
    const double ma = r[i] * derivative_from_flux(r[i], flux[i]) * (tb - ta);
    const double mb = r[i + 1] * derivative_from_flux(r[i + 1], flux[i + 1]) * (tb - ta);
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * u[i] + (s3 - 2 * s2 + s) * ma +
           (-2 * s3 + 3 * s2) * u[i + 1] + (s3 - s2) * mb;
}

double RadialSolution::derivative_at(double radius) const {
    if (r.empty()) throw std::logic_error("empty solution");
    const double rc = std::clamp(radius, r.front(), r.back());
    const double t = std::log(rc);
    size_t i = 0;
    while (i + 2 < r.size() && std::log(r[i + 1]) < t) ++i;
    const double s = (t - std::log(r[i])) / std::log(r[i + 1] / r[i]);
    const double ga = derivative_from_flux(r[i], flux[i]);
    const double gb = derivative_from_flux(r[i + 1], flux[i + 1]);
    return ga + s * (gb - ga);
}

double RadialSolution::max_conservation_residual() const {
    double m = 0;
    for (double v : conservation_residual) m = std::max(m, std::abs(v));
    return m;
}

RadialSolution solve_radial_ivp(const RadialContext& ctx, const Potential& V, double r0,
                                double r1, double u0, double du0, int cells) {
    const double g0 = std::pow(r0, ctx.d - 1.0) * phi_p(ctx.p, du0);
    return package_solution(ctx.p, ctx.d, V,
                            integrate_system(ctx.p, ctx.d, V, r0, r1, u0, g0, cells));
}

namespace {

// End value u(outer) as a function of the inner flux.
double shoot(double p, int d, const Potential& V, const RadialProblem& prob, double g0,
             int cells) {
    return integrate_system(p, d, V, prob.inner, prob.outer, prob.bc_inner, g0, cells)
        .u.back();
}

// Homogeneous-problem estimate of the inner flux for the given boundary jump.
double flux_guess(double p, int d, double inner, double outer, double delta_u) {
    if (delta_u == 0.0) return 0.0;
    const double e = (1.0 - double(d)) / (p - 1.0);
    double I;
    if (std::abs(e + 1.0) < 1e-14) I = std::log(outer / inner);
    else I = (std::pow(outer, e + 1.0) - std::pow(inner, e + 1.0)) / (e + 1.0);
    return phi_p(p, delta_u / I);
}

struct BracketedSolve {
    double g0 = 0;
    bool ok = false;
};

BracketedSolve solve_by_bracket(const RadialProblem& prob, const Potential& V,
                                const RadialSolverSpec& spec) {
    const double p = prob.ctx.p;
    const int d = prob.ctx.d;
    auto F = [&](double g) { return shoot(p, d, V, prob, g, spec.cells) - prob.bc_outer; };

    const double guess = flux_guess(p, d, prob.inner, prob.outer, prob.bc_outer - prob.bc_inner);
    double scale = std::max(std::abs(guess), 1e-3);
    double lo = guess - scale, hi = guess + scale;
    double flo = F(lo), fhi = F(hi);
    BracketedSolve out;
    // u(outer) grows with the inner flux; expand the bracket until it
    // straddles zero.
    int expand = 0;
    while (flo > 0 && expand < spec.max_expand) {
        hi = lo;
        fhi = flo;
        scale *= 2.0;
        lo -= scale;
        flo = F(lo);
        ++expand;
    }
    while (fhi < 0 && expand < spec.max_expand) {
        lo = hi;
        flo = fhi;
        scale *= 2.0;
        hi += scale;
        fhi = F(hi);
        ++expand;
    }
    if (!(flo <= 0 && fhi >= 0)) return out;

    // Bisection with a secant candidate each step (falls back to the
    // midpoint when the secant leaves the bracket).
    double g = 0.5 * (lo + hi), fg = 0;
    for (int it = 0; it < 300; ++it) {
        double cand = 0.5 * (lo + hi);
        if (fhi != flo) {
            const double sec = hi - fhi * (hi - lo) / (fhi - flo);
            if (sec > lo && sec < hi) cand = sec;
        }
        g = cand;
        fg = F(g);
        if (std::abs(fg) <= spec.bc_tol ||
            hi - lo <= spec.bracket_tol * std::max(1.0, std::abs(g)))
            break;
        if (fg < 0) {
            lo = g;
            flo = fg;
        } else {
            hi = g;
            fhi = fg;
        }
    }
    if (std::abs(fg) > spec.bc_tol) return out;
    out.g0 = g;
    out.ok = true;
    return out;
}

} // namespace

RadialSolution solve_radial_dirichlet(const RadialProblem& prob, const RadialSolverSpec& spec) {
    if (!(prob.inner > 0) || !(prob.outer > prob.inner))
        throw std::invalid_argument("need 0 < inner < outer");
    auto direct = solve_by_bracket(prob, prob.V, spec);
    if (!direct.ok) {
        // Sign-changing potentials can defeat the straight bracket; continue
        // from the homogeneous problem in damped potential steps.
        const int steps = 8;
        bool ok = true;
        for (int s = 1; s <= steps && ok; ++s) {
            const double f = double(s) / steps;
            const Potential damped = Potential::generic(
                [f, V = prob.V](double r) { return f * V.radial(r); }, std::nullopt,
                prob.V.radial_breakpoints(), prob.V.origin_exponent());
            auto attempt = solve_by_bracket(prob, damped, spec);
            if (!attempt.ok) ok = false;
            else direct = attempt;
        }
        if (!ok || !direct.ok)
            throw no_solution_error("shooting bracket could not be closed");
    }
    auto sol = package_solution(
        prob.ctx.p, prob.ctx.d, prob.V,
        integrate_system(prob.ctx.p, prob.ctx.d, prob.V, prob.inner, prob.outer, prob.bc_inner,
                         direct.g0, spec.cells));
    if (std::abs(sol.u.back() - prob.bc_outer) > spec.bc_tol * 10)
        throw no_solution_error("outer boundary mismatch after shooting");
    return sol;
}

std::function<double(double)> radial_homogeneous_solution(const RadialContext& ctx, double inner,
                                                          double outer, double bc_inner,
                                                          double bc_outer) {
    if (!(inner > 0) || !(outer > inner))
        throw std::invalid_argument("need 0 < inner < outer");
    if (ctx.p == double(ctx.d)) {
        const double b = (bc_outer - bc_inner) / std::log(outer / inner);
        const double a = bc_inner - b * std::log(inner);
        return [a, b](double r) { return a + b * std::log(r); };
    }
    const double alpha = (ctx.p - double(ctx.d)) / (ctx.p - 1.0);
    const double b = (bc_outer - bc_inner) / (std::pow(outer, alpha) - std::pow(inner, alpha));
    const double a = bc_inner - b * std::pow(inner, alpha);
    return [a, b, alpha](double r) { return a + b * std::pow(r, alpha); };
}

FittedLimit fit_limit(const std::vector<double>& radii, const std::vector<double>& values,
                      Zeta zeta) {
    if (radii.size() != values.size() || radii.size() < 3)
        throw std::invalid_argument("need >= 3 ladder samples");
    FittedLimit out;
    const size_t n = values.size();
    const size_t tail = std::min<size_t>(5, n);
    // Log-log slope over the tail decides divergence or vanishing.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    size_t m = 0;
    for (size_t i = n - tail; i < n; ++i) {
        if (!(std::abs(values[i]) > 0)) continue;
        const double x = std::log(radii[i]);
        const double y = std::log(std::abs(values[i]));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m >= 3) {
        const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        const bool toward_zero = zeta == Zeta::origin;
        // values ~ r^slope: approaching the singular point the sign of the
        // slope decides growth or decay.
        const double eff = toward_zero ? slope : -slope;
        if (eff > 0.05) {
            out.cls = LimitClass::zero;
            return out;
        }
        if (eff < -0.05) {
            out.cls = LimitClass::infinite;
            return out;
        }
    } else if (std::abs(values.back()) == 0.0) {
        out.cls = LimitClass::zero;
        return out;
    }
    // Finite limit: Aitken acceleration on the last three samples when the
    // differences contract, else take the last value.
    out.cls = LimitClass::finite;
    out.value = values.back();
    if (n >= 3) {
        const double d1 = values[n - 2] - values[n - 3];
        const double d2 = values[n - 1] - values[n - 2];
        if (d1 != 0.0 && std::abs(d2) < std::abs(d1)) {
            const double rho = d2 / d1;
            out.value = values[n - 1] + d2 * rho / (1.0 - rho);
        }
    }
    return out;
}

namespace {

bool limits_agree(const FittedLimit& a, const FittedLimit& b, double rtol) {
    if (a.cls != b.cls) return false;
    if (a.cls != LimitClass::finite) return true;
    return std::abs(a.value - b.value) <= rtol * std::max({1.0, std::abs(a.value), std::abs(b.value)});
}

} // namespace

RatioDiagnostics ratio_limit(const std::function<double(double)>& u,
                             const std::function<double(double)>& v,
                             const std::vector<double>& radii, Zeta zeta, double rtol) {
    RatioDiagnostics out;
    out.radii = radii;
    for (double r : radii) {
        const double denom = v(r);
        if (denom == 0.0) throw std::domain_error("denominator solution vanishes on the ladder");
        const double ratio = u(r) / denom;
        out.lower.push_back(ratio);
        out.upper.push_back(ratio);
    }
    out.limit_lower = fit_limit(radii, out.lower, zeta);
    out.limit_upper = out.limit_lower; // single-valued ratios: bands coincide
    out.regular = limits_agree(out.limit_lower, out.limit_upper, rtol);
    return out;
}

RatioDiagnostics ratio_limit_bands(const std::vector<double>& radii,
                                   const std::vector<double>& lower,
                                   const std::vector<double>& upper, Zeta zeta, double rtol) {
    if (lower.size() != radii.size() || upper.size() != radii.size())
        throw std::invalid_argument("band sizes must match the ladder");
    RatioDiagnostics out;
    out.radii = radii;
    out.lower = lower;
    out.upper = upper;
    out.limit_lower = fit_limit(radii, lower, zeta);
    out.limit_upper = fit_limit(radii, upper, zeta);
    out.regular = limits_agree(out.limit_lower, out.limit_upper, rtol);
    return out;
}

MonotonicityReport monotonicity_check(const std::vector<double>& seq, double burn_in_frac,
                                      double tol) {
    if (seq.size() < 3) throw std::invalid_argument("need >= 3 entries");
    MonotonicityReport rep;
    const size_t start = static_cast<size_t>(std::floor(seq.size() * burn_in_frac));
    double scale = 0;
    for (double v : seq) scale = std::max(scale, std::abs(v));
    const double slack = tol * std::max(scale, 1.0);
    auto check_dir = [&](int dir) {
        for (size_t i = std::max<size_t>(start, 1); i < seq.size(); ++i) {
            const double diff = (seq[i] - seq[i - 1]) * dir;
            if (diff < -slack) return static_cast<int>(i);
        }
        return -1;
    };
    const int viol_up = check_dir(+1);
    const int viol_down = check_dir(-1);
    if (viol_up < 0) {
        rep.eventually_monotone = true;
        rep.direction = +1;
    } else if (viol_down < 0) {
        rep.eventually_monotone = true;
        rep.direction = -1;
    } else {
        rep.first_violation = std::min(viol_up, viol_down);
    }
    return rep;
}

CriticalityReport criticality_probe(const RadialContext& ctx, const std::vector<double>& ks,
                                    double probe_radius, int cells) {
    CriticalityReport rep;
    rep.k = ks;
    rep.probe_radius = probe_radius;
    const double alpha = ctx.p == double(ctx.d) ? 0.0 : (ctx.p - double(ctx.d)) / (ctx.p - 1.0);
    rep.limit = ctx.p < double(ctx.d) ? std::pow(probe_radius, alpha) : 1.0;
    for (double k : ks) {
        if (!(k > probe_radius)) throw std::invalid_argument("ladder values must exceed the probe radius");
        RadialProblem prob;
        prob.ctx = ctx;
        prob.V = Potential::zero();
        prob.inner = 1.0;
        prob.outer = k;
        prob.bc_inner = 1.0;
        prob.bc_outer = 0.0;
        RadialSolverSpec spec;
        spec.cells = cells;
        const auto sol = solve_radial_dirichlet(prob, spec);
        rep.w_probe.push_back(sol.value_at(probe_radius));
        rep.closed_form.push_back(
            radial_homogeneous_solution(ctx, 1.0, k, 1.0, 0.0)(probe_radius));
    }
    return rep;
}

AsymptoticsReport asymptotics_probe(const std::function<double(double)>& u,
                                    const FundamentalSolution& fs,
                                    const std::vector<double>& radii, Zeta zeta) {
    AsymptoticsReport rep;
    rep.radii = radii;
    for (double r : radii) {
        const double denom = zeta == Zeta::origin ? fs.radial_value(r) : -fs.radial_value(r);
        if (denom == 0.0) throw std::domain_error("kernel vanishes at a ladder radius");
        rep.ratio.push_back(u(r) / denom);
    }
    rep.limit = fit_limit(radii, rep.ratio, zeta);
    rep.removable = rep.limit.cls == LimitClass::zero;
    return rep;
}

ComparisonReport weak_comparison_probe(const RadialProblem& prob1, const RadialProblem& prob2,
                                       const RadialSolverSpec& spec) {
    if (prob1.ctx.p != prob2.ctx.p || prob1.ctx.d != prob2.ctx.d ||
        prob1.inner != prob2.inner || prob1.outer != prob2.outer)
        throw std::invalid_argument("comparison problems must share context and domain");
    if (prob1.bc_inner > prob2.bc_inner || prob1.bc_outer > prob2.bc_outer)
        throw std::invalid_argument("boundary data must be ordered: first <= second");
    const auto u1 = solve_radial_dirichlet(prob1, spec);
    const auto u2 = solve_radial_dirichlet(prob2, spec);
    ComparisonReport rep;
    for (size_t i = 0; i < u1.u.size(); ++i)
        rep.max_violation = std::max(rep.max_violation, u1.u[i] - u2.u[i]);
    rep.max_violation = std::max(rep.max_violation, 0.0);
    rep.ordered = rep.max_violation <= 1e-8;
    return rep;
}

} // namespace qlap
