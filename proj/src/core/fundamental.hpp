#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "core/bump.hpp"
#include "core/geometry.hpp"

namespace qlap {

// Radially symmetric kernel of the homogeneous operator, normalized so the
// flux of |grad mu|_A^{p-2} A grad mu through every level set {|x|_{A^{-1}} = r}
// equals -1:
//   p != d:  mu(x) = C |x|_{A^{-1}}^{(p-d)/(p-1)}
//   p  = d:  mu(x) = -C log |x|_{A^{-1}}
// C is positive for p <= d and negative for p > d (power branch).
class FundamentalSolution {
public:
    FundamentalSolution(double p, AnisotropyMatrix A);

    double p() const { return p_; }
    int d() const { return matrix_.dim(); }
    const AnisotropyMatrix& matrix() const { return matrix_; }
    double constant() const { return constant_; }
    // Exponent (p-d)/(p-1); 0 in the logarithmic branch.
    double exponent() const { return exponent_; }
    bool logarithmic() const { return logarithmic_; }

    double value(const Vec& x) const;
    double radial_value(double r) const;
    double radial_derivative(double r) const;
    double radial_second_derivative(double r) const;
    Vec gradient(const Vec& x) const;
    // The flux density |grad mu|_A^{p-2} A grad mu; divergence-free away
    // from the origin and proportional to |x|_{A^{-1}}^{-d} x.
    Vec gradient_flux(const Vec& x) const;

private:
    double p_;
    AnisotropyMatrix matrix_;
    double constant_;
    double exponent_;
    bool logarithmic_;
};

// Quadrature of gradient_flux . n over {|x|_{A^{-1}} = r} with the normal
// n = A^{-1}x / |x|_{A^{-1}}; equals -1 for every r.
double flux_integral(const FundamentalSolution& fs, double r, double rel_tol = 1e-9);

enum class CapacityNormalization {
    full,            // energy of the extremal profile, includes the omega_d factor
    per_unit_sphere, // divided by omega_d
};

// Weighted capacity of {|x| <= r} inside {|x| < R} for the weight |x|^beta:
//   kappa != 0:  omega_d |kappa|^{p-1} |r^kappa - R^kappa|^{1-p},
//                kappa = (p - d - beta)/(p - 1)
//   kappa  = 0:  omega_d log(R/r)^{1-p}
// computed from the exact energy of the extremal radial profile.
double weighted_capacity(double p, int d, double beta, double r, double R,
                         CapacityNormalization normalization = CapacityNormalization::full);

// Direct 1D quadrature of the extremal profile energy; independent path used
// to cross-check the closed form.
double weighted_capacity_quadrature(double p, int d, double beta, double r, double R,
                                    CapacityNormalization normalization = CapacityNormalization::full);

// |(p-d)/p|^p: the largest lambda for which the model equation
// -Delta_p u - lambda |x|^{-p} u^{p-1} = 0 still has power solutions.
double hardy_constant(double p, int d);

struct IndicialData {
    double p = 2;
    int d = 2;
    double lambda = 0;
    // Real exponents gamma with |gamma|^{p-2} gamma ((p-1) gamma + d - p)
    // = -lambda, sorted ascending; empty when none exist (lambda above the
    // coupling threshold), a double root listed once with the flag set.
    std::vector<double> roots;
    bool double_root = false;
    double hardy_bound = 0;
};

IndicialData indicial_roots(double p, int d, double lambda, double tol = 1e-12);

// Left- and right-hand side of
//   int |grad u|^p dx >= |(d-p)/p|^p int |u|^p / (1 + |x|^p) dx
// for a radial test function (1D quadrature).  Meaningful for p < d.
std::pair<double, double> hardy_inequality_check(double p, int d, const RadialBump& u);

} // namespace qlap
