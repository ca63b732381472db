#include "core/fundamental.hpp"

#include <cmath>
#include <stdexcept>

#include "core/errors.hpp"
#include "core/quadrature.hpp"

namespace qlap {

FundamentalSolution::FundamentalSolution(double p, AnisotropyMatrix A)
    : p_(p), matrix_(std::move(A)) {
    if (!(p > 1)) throw std::invalid_argument("p must exceed 1");
    const int d = matrix_.dim();
    const double surface = std::sqrt(matrix_.det()) * unit_sphere_area(d);
    logarithmic_ = p == double(d);
    if (logarithmic_) {
        exponent_ = 0.0;
        constant_ = std::pow(surface, -1.0 / (d - 1.0));
    } else {
        exponent_ = (p - d) / (p - 1.0);
        constant_ = (p - 1.0) / (d - p) * std::pow(surface, -1.0 / (p - 1.0));
    }
}

double FundamentalSolution::radial_value(double r) const {
    if (!(r > 0)) throw std::domain_error("kernel radius must be positive");
    return logarithmic_ ? -constant_ * std::log(r) : constant_ * std::pow(r, exponent_);
}

double FundamentalSolution::radial_derivative(double r) const {
    if (!(r > 0)) throw std::domain_error("kernel radius must be positive");
    return logarithmic_ ? -constant_ / r : constant_ * exponent_ * std::pow(r, exponent_ - 1.0);
}

double FundamentalSolution::radial_second_derivative(double r) const {
    if (!(r > 0)) throw std::domain_error("kernel radius must be positive");
    return logarithmic_ ? constant_ / (r * r)
                        : constant_ * exponent_ * (exponent_ - 1.0) * std::pow(r, exponent_ - 2.0);
}

double FundamentalSolution::value(const Vec& x) const {
    return radial_value(matrix_.anorm_inv(x));
}

Vec FundamentalSolution::gradient(const Vec& x) const {
    // grad mu = mu'(s) * A^{-1}x / s with s = |x|_{A^{-1}}.
    const double s = matrix_.anorm_inv(x);
    if (!(s > 0)) throw std::domain_error("gradient undefined at the origin");
    return (radial_derivative(s) / s) * (matrix_.inverse() * x);
}

Vec FundamentalSolution::gradient_flux(const Vec& x) const {
    const double s = matrix_.anorm_inv(x);
    if (!(s > 0)) throw std::domain_error("flux undefined at the origin");
    // |grad mu|_A = |mu'(s)|, and A grad mu = mu'(s) x / s, so the flux field
    // is |mu'(s)|^{p-2} mu'(s) s^{-1} x.
    const double der = radial_derivative(s);
    const double scal = std::pow(std::abs(der), p_ - 2.0) * der / s;
    return scal * x;
}

double flux_integral(const FundamentalSolution& fs, double r, double rel_tol) {
    Ellipsoid shell(fs.matrix(), r);
    const Mat& Ainv = fs.matrix().inverse();
    SurfaceQuadratureOptions opt;
    opt.rel_tol = rel_tol;
    return surface_integral(
        shell,
        [&](const Vec& x) {
            const Vec n = (Ainv * x) / fs.matrix().anorm_inv(x);
            return fs.gradient_flux(x).dot(n);
        },
        opt);
}

namespace {

double capacity_kappa(double p, int d, double beta) {
    return (p - double(d) - beta) / (p - 1.0);
}

} // namespace

double weighted_capacity(double p, int d, double beta, double r, double R,
                         CapacityNormalization normalization) {
    if (!(p > 1)) throw std::invalid_argument("p must exceed 1");
    if (!(r > 0) || !(R > r)) throw std::invalid_argument("radii must satisfy 0 < r < R");
    const double kappa = capacity_kappa(p, d, beta);
    const double area = unit_sphere_area(d);
    double value;
    if (kappa == 0.0) {
        value = area * std::pow(std::log(R / r), 1.0 - p);
    } else {
        value = area * std::pow(std::abs(kappa), p - 1.0) *
                std::pow(std::abs(std::pow(r, kappa) - std::pow(R, kappa)), 1.0 - p);
    }
    return normalization == CapacityNormalization::full ? value : value / area;
}

double weighted_capacity_quadrature(double p, int d, double beta, double r, double R,
                                    CapacityNormalization normalization) {
    if (!(p > 1)) throw std::invalid_argument("p must exceed 1");
    if (!(r > 0) || !(R > r)) throw std::invalid_argument("radii must satisfy 0 < r < R");
    const double kappa = capacity_kappa(p, d, beta);
    // Extremal profile: psi = (t^kappa - R^kappa)/(r^kappa - R^kappa), or the
    // log form when kappa = 0.  Energy integrand: t^{beta+d-1} |psi'(t)|^p.
    std::function<double(double)> dpsi;
    if (kappa == 0.0) {
        const double denom = std::log(R / r);
        dpsi = [denom](double t) { return -1.0 / (t * denom); };
    } else {
        const double denom = std::pow(r, kappa) - std::pow(R, kappa);
        dpsi = [kappa, denom](double t) { return kappa * std::pow(t, kappa - 1.0) / denom; };
    }
    Quad1DOptions opt;
    opt.rel_tol = 1e-11;
    // Integrate in log t: smooth and well-scaled across many decades.
    const double value = integrate_1d(
        [&](double lt) {
            const double t = std::exp(lt);
            return std::pow(t, beta + d) * std::pow(std::abs(dpsi(t)), p);
        },
        std::log(r), std::log(R), opt);
    const double full = unit_sphere_area(d) * value;
    return normalization == CapacityNormalization::full ? full : full / unit_sphere_area(d);
}

double hardy_constant(double p, int d) {
    if (!(p > 1)) throw std::invalid_argument("p must exceed 1");
    return std::pow(std::abs((p - double(d)) / p), p);
}

namespace {

// h(gamma) = -|gamma|^{p-2} gamma ((p-1) gamma + d - p); the indicial
// exponents of -Delta_p u - lambda |x|^{-p} u^{p-1} = 0 solve h(gamma) =
// lambda.
double indicial_map(double p, int d, double gamma) {
    if (gamma == 0.0) return 0.0;
    return -std::pow(std::abs(gamma), p - 2.0) * gamma * ((p - 1.0) * gamma + d - p);
}

// Bisection on a bracket where h is monotone and h(a), h(b) straddle lambda.
double bisect_indicial(double p, int d, double lambda, double a, double b, double tol) {
    double fa = indicial_map(p, d, a) - lambda;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (a + b);
        const double fm = indicial_map(p, d, mid) - lambda;
        if ((fm < 0) == (fa < 0)) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
        if (b - a <= tol) break;
    }
    return 0.5 * (a + b);
}

} // namespace

IndicialData indicial_roots(double p, int d, double lambda, double tol) {
    if (!(p > 1)) throw std::invalid_argument("p must exceed 1");
    IndicialData out;
    out.p = p;
    out.d = d;
    out.lambda = lambda;
    out.hardy_bound = hardy_constant(p, d);

    const double gcrit = (p - double(d)) / p;        // critical point of h
    const double gmu = p == double(d) ? 0.0 : (p - double(d)) / (p - 1.0);

    if (p == double(d)) {
        // h(gamma) = -(p-1)|gamma|^p: nonpositive, symmetric.
        if (lambda > 0) return out;
        if (lambda == 0) {
            out.roots = {0.0};
            out.double_root = true;
            return out;
        }
        const double mag = std::pow(-lambda / (p - 1.0), 1.0 / p);
        out.roots = {-mag, mag};
        return out;
    }

    if (lambda > out.hardy_bound * (1.0 + 1e-14)) return out; // no power solutions
    if (std::abs(lambda - out.hardy_bound) <= tol) {
        out.roots = {gcrit};
        out.double_root = true;
        return out;
    }

    // h is monotone on each side of gcrit; it vanishes at 0 and gmu and tends
    // to -inf in both tails.  Two branches hold a root each.
    auto expand_bracket = [&](double from, double step) {
        // Walk outward until h drops below lambda (both tails go to -inf).
        double t = from + step;
        for (int it = 0; it < 400; ++it) {
            if (indicial_map(p, d, t) - lambda < 0) return t;
            step *= 2.0;
            t += step;
        }
        throw no_solution_error("indicial bracket expansion failed");
    };

    double inner, outer;
    if (lambda >= 0) {
        if (lambda == 0.0) {
            inner = 0.0;
            outer = gmu;
        } else {
            // One root on each monotone branch between the zeros {0, gmu} and
            // the critical point where h peaks at the Hardy bound.
            inner = p < d ? bisect_indicial(p, d, lambda, gcrit, 0.0, tol)
                          : bisect_indicial(p, d, lambda, 0.0, gcrit, tol);
            outer = p < d ? bisect_indicial(p, d, lambda, gmu, gcrit, tol)
                          : bisect_indicial(p, d, lambda, gcrit, gmu, tol);
        }
    } else {
        // One root beyond gmu, one on the far side of 0.
        if (p < d) {
            const double far_neg = expand_bracket(gmu, -std::max(1.0, std::abs(gmu)));
            outer = bisect_indicial(p, d, lambda, far_neg, gmu, tol);
            const double far_pos = expand_bracket(0.0, 1.0);
            inner = bisect_indicial(p, d, lambda, 0.0, far_pos, tol);
        } else {
            const double far_pos = expand_bracket(gmu, std::max(1.0, std::abs(gmu)));
            outer = bisect_indicial(p, d, lambda, gmu, far_pos, tol);
            const double far_neg = expand_bracket(0.0, -1.0);
            inner = bisect_indicial(p, d, lambda, far_neg, 0.0, tol);
        }
    }
    out.roots = {inner, outer};
    std::sort(out.roots.begin(), out.roots.end());
    return out;
}

std::pair<double, double> hardy_inequality_check(double p, int d, const RadialBump& u) {
    if (!(p > 1)) throw std::invalid_argument("p must exceed 1");
    const double area = unit_sphere_area(d);
    Quad1DOptions opt;
    opt.rel_tol = 1e-11;
    const double lhs = area * integrate_1d(
                                  [&](double r) {
                                      return std::pow(std::abs(u.derivative(r)), p) *
                                             std::pow(r, d - 1);
                                  },
                                  u.a, u.b, opt);
    const double rhs =
        hardy_constant(p, d) * area *
        integrate_1d(
            [&](double r) {
                return std::pow(u.value(r), p) / (1.0 + std::pow(r, p)) * std::pow(r, d - 1);
            },
            u.a, u.b, opt);
    return {lhs, rhs};
}

} // namespace qlap
