#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "core/fundamental.hpp"
#include "core/geometry.hpp"
#include "core/morrey.hpp"
#include "core/potential.hpp"

namespace qlap {

struct RadialContext {
    double p = 2;
    int d = 2;
};

// Radial profile with two derivatives, for operator evaluation.
struct C2Radial {
    std::function<double(double)> f, df, d2f;
};

struct RadialOperatorValue {
    double value = 0;
    // p < 2 with f'(r) = 0: the pointwise form is singular; the value is then
    // a centered difference of the conserved flux r^{d-1}|f'|^{p-2}f'.
    bool degenerate = false;
};

// |f'|^{p-2} ((p-1) f'' + (d-1) f'/r): the operator on profiles depending on
// |x|_{A^{-1}} alone (the coefficient matrix drops out of the reduced form).
RadialOperatorValue radial_operator_apply(const RadialContext& ctx, const C2Radial& f, double r);

struct RadialProblem {
    RadialContext ctx;
    Potential V = Potential::zero();
    double inner = 1, outer = 2;      // 0 < inner < outer
    double bc_inner = 0, bc_outer = 0;
    std::optional<AnisotropyMatrix> matrix; // geometry metadata only
};

struct RadialSolverSpec {
    int cells = 2048;
    double bc_tol = 1e-10;       // |u(outer) - bc_outer|
    double bracket_tol = 1e-12;  // relative width of the flux bracket
    int max_expand = 120;
};

// Solution samples on a uniform grid in t = log r, with the conserved flux
// g = r^{d-1} |u'|^{p-2} u' carried as a state variable and cell midpoints
// recorded for the conservation diagnostics.
struct RadialSolution {
    double p = 2;
    int d = 2;
    std::vector<double> r, u, flux;
    std::vector<double> r_mid, u_mid, flux_mid;
    // Simpson defect of g(r_{i+1}) - g(r_i) = int r^{d-1} V |u|^{p-2} u dr
    // per cell; the solver keeps max |.| at the integrator's accuracy.
    std::vector<double> conservation_residual;

    double derivative_from_flux(double radius, double g) const;
    double value_at(double radius) const;      // cubic Hermite in log r
    double derivative_at(double radius) const;
    double max_conservation_residual() const;
};

// Two-point Dirichlet solve by shooting on the inner flux: bisection with
// secant refinement on g(inner), integrating the first-order system in
// (u, g).  Sign-changing potentials fall back to a damped continuation from
// V = 0 when the direct bracket fails.
RadialSolution solve_radial_dirichlet(const RadialProblem& prob, const RadialSolverSpec& spec = {});

// Initial-value integration outward from r0 with data u(r0) = u0,
// u'(r0) = du0; used to launch solutions along a prescribed local profile.
RadialSolution solve_radial_ivp(const RadialContext& ctx, const Potential& V, double r0,
                                double r1, double u0, double du0, int cells = 2048);

// Exact solution of the homogeneous (V = 0) Dirichlet problem:
// a + b r^{(p-d)/(p-1)}, or a + b log r when p = d.
std::function<double(double)> radial_homogeneous_solution(const RadialContext& ctx, double inner,
                                                          double outer, double bc_inner,
                                                          double bc_outer);

enum class LimitClass { finite, infinite, zero };

struct FittedLimit {
    LimitClass cls = LimitClass::finite;
    double value = 0; // meaningful when finite
};

// Extrapolates a sequence sampled along a geometric radius ladder toward the
// singular point: log-log slope decides divergence/vanishing, Aitken handles
// the finite case.
FittedLimit fit_limit(const std::vector<double>& radii, const std::vector<double>& values,
                      Zeta zeta);

struct RatioDiagnostics {
    std::vector<double> radii;
    std::vector<double> lower, upper; // inf and sup of u/v per rung
    FittedLimit limit_lower, limit_upper;
    // Equal limits in the wide sense: both infinite, both zero, or both
    // finite and within rtol of each other.
    bool regular = false;
};

RatioDiagnostics ratio_limit(const std::function<double(double)>& u,
                             const std::function<double(double)>& v,
                             const std::vector<double>& radii, Zeta zeta, double rtol = 1e-3);

// Variant for band-valued data (e.g. planar fields): caller supplies per-rung
// inf and sup of the ratio directly.
RatioDiagnostics ratio_limit_bands(const std::vector<double>& radii,
                                   const std::vector<double>& lower,
                                   const std::vector<double>& upper, Zeta zeta,
                                   double rtol = 1e-3);

struct MonotonicityReport {
    bool eventually_monotone = false;
    int direction = 0;       // +1 nondecreasing, -1 nonincreasing (after burn-in)
    int first_violation = -1;
};

// Checks whether the sequence is monotone after discarding an initial
// burn-in fraction of the rungs.
MonotonicityReport monotonicity_check(const std::vector<double>& seq, double burn_in_frac = 0.25,
                                      double tol = 1e-12);

struct CriticalityReport {
    std::vector<double> k;
    std::vector<double> w_probe;      // solved value at the probe radius
    std::vector<double> closed_form;  // exact value of the same problem
    double probe_radius = 2;
    double limit = 1; // r^alpha for p < d, else 1
};

// Equilibrium-potential probe: solves the V = 0 problem on [1, k] with data
// (1, 0) for each k and tracks the value at a fixed probe radius.  The limit
// distinguishes p >= d (tends to 1) from p < d (tends to mu(r)/mu(1)).
CriticalityReport criticality_probe(const RadialContext& ctx, const std::vector<double>& ks,
                                    double probe_radius = 2.0, int cells = 2048);

struct AsymptoticsReport {
    std::vector<double> radii;
    std::vector<double> ratio;  // u / mu (origin) or u / (-mu) (infinity)
    FittedLimit limit;
    bool removable = false;     // ratio tends to 0
};

AsymptoticsReport asymptotics_probe(const std::function<double(double)>& u,
                                    const FundamentalSolution& fs,
                                    const std::vector<double>& radii, Zeta zeta);

struct ComparisonReport {
    bool ordered = false;
    double max_violation = 0; // max over nodes of (u1 - u2)+
};

// Solves two problems that differ only in boundary data (data1 <= data2) and
// checks the solutions stay ordered on the grid.
ComparisonReport weak_comparison_probe(const RadialProblem& prob1, const RadialProblem& prob2,
                                       const RadialSolverSpec& spec = {});

} // namespace qlap
