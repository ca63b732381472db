// Acceptance harness: end-to-end checks of the shipped guarantees, one line
// of output per criterion.  Each check pins its own tolerance and runtime
// budget; the process exits nonzero when any line fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "core/dilation.hpp"
#include "core/fundamental.hpp"
#include "core/geometry.hpp"
#include "core/morrey.hpp"
#include "core/planar.hpp"
#include "core/potential.hpp"
#include "core/radial.hpp"

namespace {

using namespace qlap;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string text(const char* fmt, ...) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, args);
    va_end(args);
    return buf;
}

// (p, A) configurations shared by the shell-flux, kernel, and homogeneous
// solver checks; every regime (p < d, p = d, p > d) and both dimensions with
// non-trivial anisotropy appear.
std::vector<std::pair<double, AnisotropyMatrix>> shell_configs() {
    Eigen::MatrixXd full(2, 2);
    full << 2, 1, 1, 2;
    std::vector<std::pair<double, AnisotropyMatrix>> out;
    out.emplace_back(2.0, AnisotropyMatrix::identity(3));
    out.emplace_back(3.0, AnisotropyMatrix::identity(2));
    out.emplace_back(2.0, AnisotropyMatrix::diagonal({4, 1}));
    out.emplace_back(4.0, AnisotropyMatrix(full));
    out.emplace_back(3.0, AnisotropyMatrix::diagonal({1, 2, 4}));
    return out;
}

// 1. The flux of the kernel's gradient field through every level-set shell
// equals -1, independent of radius, exponent, and anisotropy.
Outcome flux_normalization() {
    double worst = 0;
    for (const auto& [p, A] : shell_configs()) {
        const FundamentalSolution fs(p, A);
        for (double r : {0.25, 1.0, 4.0})
            worst = std::max(worst, std::abs(flux_integral(fs, r) + 1.0));
    }
    return {worst <= 1e-6, text("max |flux + 1| = %.2e (tol 1e-06)", worst)};
}

// 2. The radial operator annihilates the kernel profile across two decades.
Outcome kernel_annihilation() {
    double worst = 0;
    for (const auto& [p, A] : shell_configs()) {
        const FundamentalSolution fs(p, A);
        const RadialContext ctx{p, A.dim()};
        const C2Radial mu{[&fs](double r) { return fs.radial_value(r); },
                          [&fs](double r) { return fs.radial_derivative(r); },
                          [&fs](double r) { return fs.radial_second_derivative(r); }};
        for (int i = 0; i < 50; ++i) {
            const double r = 0.1 * std::pow(100.0, i / 49.0);
            worst = std::max(worst, std::abs(radial_operator_apply(ctx, mu, r).value));
        }
    }
    return {worst <= 1e-8, text("max operator residual = %.2e (tol 1e-08)", worst)};
}

// 3. The potential-free Dirichlet solver reproduces the closed-form
// power/log profiles at the production resolution.  That integrator carries
// the conserved flux exactly, so the refinement order of the underlying
// scheme is measured on a problem with a nontrivial potential and known
// solution u(r) = r.
Outcome homogeneous_exactness_and_order() {
    double worst = 0;
    for (const auto& [p, A] : shell_configs()) {
        RadialProblem prob;
        prob.ctx = {p, A.dim()};
        prob.bc_inner = 1;
        prob.bc_outer = 0;
        const RadialSolution sol = solve_radial_dirichlet(prob);
        const auto exact = radial_homogeneous_solution(prob.ctx, prob.inner, prob.outer,
                                                       prob.bc_inner, prob.bc_outer);
        for (std::size_t i = 0; i < sol.r.size(); ++i)
            worst = std::max(worst, std::abs(sol.u[i] - exact(sol.r[i])));
    }

    RadialProblem man;
    man.ctx = {2.0, 3};
    man.V = Potential::power_law(2.0, -2.0);
    man.bc_inner = 1;
    man.bc_outer = 2;
    const auto sup_err = [&man](int cells) {
        RadialSolverSpec spec;
        spec.cells = cells;
        const RadialSolution sol = solve_radial_dirichlet(man, spec);
        double e = 0;
        for (std::size_t i = 0; i < sol.r.size(); ++i)
            e = std::max(e, std::abs(sol.u[i] - sol.r[i]));
        return e;
    };
    const double order = std::log2(sup_err(32) / sup_err(64));

    return {worst <= 1e-6 && order >= 1.9,
            text("sup error = %.2e (tol 1e-06), refinement order = %.2f (min 1.9)", worst, order)};
}

// 4. The weighted singular norm of a critically scaling potential is the same
// on every dyadic annulus: the search family is window-relative, so the value
// must be scale-free in all three regimes.
Outcome singular_norm_scale_invariance() {
    MorreyGridSpec light;
    light.centers_level = 2;
    struct Case {
        double p, q;
        int d;
    };
    double worst = 1.0;
    for (const Case c : {Case{2, 3, 3}, Case{3, 2, 2}, Case{2, 3, 2}, Case{3, 4, 3}}) {
        const MorreyContext ctx = MorreyContext::make(c.p, c.q, c.d);
        const Potential V = Potential::hardy(0.1, c.p);
        double lo = std::numeric_limits<double>::infinity(), hi = 0;
        for (double R : {1.0, 0.125, 1.0 / 64}) {
            const double n = weighted_fuchsian_norm(ctx, V, AnnulusSpec(c.d, R), light);
            lo = std::min(lo, n);
            hi = std::max(hi, n);
        }
        worst = std::max(worst, hi / lo);
    }
    return {worst <= 1.02, text("max across-scale ratio = %.8f (tol 1.02)", worst)};
}

// 5. Equilibrium ladder: the solved probe values agree with the closed form
// at every ladder height, and their distance to the dichotomy limit (1 for
// p >= d, the kernel ratio for p < d) shrinks monotonically.
Outcome equilibrium_dichotomy() {
    const std::vector<double> ks = {4, 16, 256, 4096};
    struct Case {
        double p;
        int d;
        double limit;
    };
    double worst = 0;
    bool approach = true;
    for (const Case c : {Case{2, 2, 1.0}, Case{4, 2, 1.0}, Case{3, 3, 1.0}, Case{2, 3, 0.5}}) {
        const CriticalityReport rep = criticality_probe({c.p, c.d}, ks);
        if (std::abs(rep.limit - c.limit) > 1e-12) approach = false;
        for (std::size_t i = 0; i < ks.size(); ++i)
            worst = std::max(worst, std::abs(rep.w_probe[i] - rep.closed_form[i]));
        for (std::size_t i = 1; i < ks.size(); ++i)
            if (std::abs(rep.w_probe[i] - rep.limit) >= std::abs(rep.w_probe[i - 1] - rep.limit))
                approach = false;
    }
    return {worst <= 1e-4 && approach,
            text("max |solved - closed form| = %.2e (tol 1e-04), limit approach %s", worst,
                 approach ? "monotone" : "broken")};
}

// 6. Launching the solver along each indicial profile of the borderline
// coupling 3/16 (p = 2, d = 3) keeps the prescribed slope; the steep/shallow
// ratio diverges at the origin with both one-sided limits agreeing, and at
// zero coupling the ratio of mu + 1 to mu settles at 1.
Outcome indicial_launches() {
    const RadialContext ctx{2.0, 3};
    const Potential V = Potential::hardy(3.0 / 16, 2.0);
    const IndicialData ind = indicial_roots(2.0, 3, 3.0 / 16);
    if (ind.roots.size() != 2) return {false, "expected two indicial exponents"};

    const double r0 = 1e-4, r1 = 1e-1;
    std::vector<RadialSolution> sols;
    double worst_slope = 0;
    for (double g : ind.roots) {
        RadialSolution sol =
            solve_radial_ivp(ctx, V, r0, r1, std::pow(r0, g), g * std::pow(r0, g - 1.0));
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = static_cast<double>(sol.r.size());
        for (std::size_t i = 0; i < sol.r.size(); ++i) {
            const double x = std::log(sol.r[i]), y = std::log(sol.u[i]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        worst_slope = std::max(worst_slope, std::abs(slope - g));
        sols.push_back(std::move(sol));
    }

    std::vector<double> radii;
    for (int j = 0; j <= 9; ++j) radii.push_back(0.1 * std::pow(0.5, j));
    const RatioDiagnostics steep =
        ratio_limit([&](double r) { return sols[0].value_at(r); },
                    [&](double r) { return sols[1].value_at(r); }, radii, Zeta::origin);
    const bool diverge = steep.regular && steep.limit_lower.cls == LimitClass::infinite &&
                         steep.limit_upper.cls == LimitClass::infinite;

    const FundamentalSolution fs(2.0, AnisotropyMatrix::identity(3));
    std::vector<double> fine;
    for (int j = 0; j <= 12; ++j) fine.push_back(0.1 * std::pow(0.5, j));
    const RatioDiagnostics unit =
        ratio_limit([&](double r) { return 1.0 + fs.radial_value(r); },
                    [&](double r) { return fs.radial_value(r); }, fine, Zeta::origin);
    const bool settle = unit.regular && unit.limit_lower.cls == LimitClass::finite &&
                        std::abs(unit.limit_lower.value - 1.0) <= 1e-3;

    return {worst_slope <= 0.02 && diverge && settle,
            text("max slope error = %.2e (tol 0.02), divergent ratio %s, unit ratio = %.6f",
                 worst_slope, diverge ? "regular" : "broken",
                 unit.limit_lower.cls == LimitClass::finite ? unit.limit_lower.value
                                                           : std::nan(""))};
}

// 7. Inverted exact solutions satisfy the image equation: the discrete
// residual of the inversion decays with order >= 0.9 under two mesh halvings,
// for the plain case (p = 2, anisotropic log kernel) and the weighted one
// (p = 3 on the kernel profile).
Outcome inversion_residual_decay() {
    const AnisotropyMatrix D = AnisotropyMatrix::diagonal({4, 1});
    const AnisotropyMatrix I2 = AnisotropyMatrix::identity(2);
    const FundamentalSolution fs(3.0, I2);
    double min_order = std::numeric_limits<double>::infinity();
    double finest = 0;
    for (int k = 0; k < 2; ++k) {
        const double p = k == 0 ? 2.0 : 3.0;
        const AnisotropyMatrix& A = k == 0 ? D : I2;
        std::vector<double> res;
        for (double h : {1.0 / 128, 1.0 / 256, 1.0 / 512}) {
            const auto grid = AnnularGrid2D::build(A, 0.5, 2.0, h, 8);
            DiscreteField2D u(grid);
            if (k == 0)
                u.fill([&A](const Eigen::Vector2d& x) { return -std::log(A.anorm_inv(x)); });
            else
                u.fill([&fs](const Eigen::Vector2d& x) { return fs.value(x); });
            res.push_back(kelvin_residual(u, p));
        }
        min_order = std::min({min_order, std::log2(res[0] / res[1]), std::log2(res[1] / res[2])});
        finest = std::max(finest, res[2]);
    }
    return {min_order >= 0.9,
            text("min residual decay order = %.2f (min 0.9), finest residual = %.2e", min_order,
                 finest)};
}

// 8. Twenty seeded planar problems with nonnegative potential and ordered
// boundary data: the minimizers stay nodewise ordered and every energy trace
// is nonincreasing up to the line search's roundoff band.
Outcome ordered_boundary_comparison() {
    std::mt19937_64 rng(20240817ULL);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const auto grid = AnnularGrid2D::build(AnisotropyMatrix::identity(2), 0.55, 1.95, 1.0 / 32);
    double worst = 0;
    bool descent = true;
    for (int trial = 0; trial < 20; ++trial) {
        const double c0 = unif(rng), c1 = unif(rng);
        const double kx = 1.0 + 3.0 * unif(rng), ph = 6.28 * unif(rng);
        PlanarEnergySpec spec;
        spec.potential = [c0, c1, kx, ph](const Eigen::Vector2d& x) {
            const double s = std::sin(kx * x[0] + ph);
            return c0 + c1 * s * s;
        };
        const double a0 = 2.0 * unif(rng) - 1.0, a1 = unif(rng), b1 = unif(rng);
        const double gap = 0.2 + unif(rng);
        const auto lo = [a0, a1, b1](const Eigen::Vector2d& x, bool) {
            const double th = std::atan2(x[1], x[0]);
            return a0 + a1 * std::sin(th) + b1 * std::cos(2.0 * th);
        };
        const auto hi = [lo, gap](const Eigen::Vector2d& x, bool inner) {
            return lo(x, inner) + gap;
        };
        const MinimizeResult rlo = minimize_dirichlet(grid, spec, lo);
        const MinimizeResult rhi = minimize_dirichlet(grid, spec, hi);
        if (!rlo.converged || !rhi.converged) descent = false;
        for (int idx : grid->interior_nodes())
            worst = std::max(worst, rlo.field.values[static_cast<std::size_t>(idx)] -
                                        rhi.field.values[static_cast<std::size_t>(idx)]);
        for (const MinimizeResult* res : {&rlo, &rhi})
            for (std::size_t i = 1; i < res->energies.size(); ++i) {
                const double prev = res->energies[i - 1];
                const double band = 64.0 * std::numeric_limits<double>::epsilon() *
                                    (1.0 + std::abs(prev));
                if (res->energies[i] > prev + band) descent = false;
            }
    }
    return {worst <= 1e-8 && descent,
            text("max ordering violation = %.2e (tol 1e-08), energy traces %s", worst,
                 descent ? "nonincreasing" : "broken")};
}

// 9. Positive minimized solutions with an attractive borderline potential at
// half the coupling threshold: per-rung sup/inf ratios over three dyadic
// shells stay within a factor 2 of each other.
Outcome shell_oscillation_bound() {
    const auto grid = AnnularGrid2D::build(AnisotropyMatrix::identity(2), 0.25, 4.0, 1.0 / 32);
    PlanarEnergySpec spec;
    spec.p = 3.0;
    const double lambda = 1.0 / 54;  // half the coupling threshold for p = 3, d = 2
    spec.potential = [lambda](const Eigen::Vector2d& x) {
        return -lambda * std::pow(x.norm(), -3.0);
    };
    const MinimizeResult res = minimize_dirichlet(
        grid, spec, [](const Eigen::Vector2d&, bool) { return 1.0; });

    double vmin = std::numeric_limits<double>::infinity();
    for (int idx : grid->interior_nodes())
        vmin = std::min(vmin, res.field.values[static_cast<std::size_t>(idx)]);

    const std::vector<double> ratios = harnack_ratio(res.field, {0.5, 1.0, 2.0}, 0.75, 1.25);
    const double spread = *std::max_element(ratios.begin(), ratios.end()) /
                          *std::min_element(ratios.begin(), ratios.end());
    return {res.converged && vmin > 0 && spread <= 2.0,
            text("rung ratios = %.3f/%.3f/%.3f, spread = %.4f (tol 2), min value = %.3f",
                 ratios[0], ratios[1], ratios[2], spread, vmin)};
}

// 10. Rescaling structure: dilation is a semigroup on the built-in potential
// kinds, the weighted singular norm transforms covariantly, and the staged
// probe separates a subcritically scaling potential (norms vanish along the
// ladder) from a critically scaling one (fixed point).
Outcome dilation_structure() {
    const double p = 2;
    const int d = 3;
    const double q = 3;
    const MorreyContext ctx = MorreyContext::make(p, q, d);
    MorreyGridSpec light;
    light.centers_level = 2;
    const std::vector<Potential> kinds = {Potential::power_law(1.7, -1.0),
                                          Potential::annulus_bump(0.25, 3.0, 1.3)};

    double semi = 0;
    for (const Potential& V : kinds) {
        OperatorData data;
        data.p = p;
        data.d = d;
        data.matrix = AnisotropyMatrix::identity(d);
        data.potential = V;
        const OperatorData twice = dilate_operator(dilate_operator(data, 2.0), 3.0);
        const OperatorData once = dilate_operator(data, 6.0);
        for (int i = 0; i <= 40; ++i) {
            const double r = 0.05 * std::pow(400.0, i / 40.0);
            semi = std::max(semi, std::abs(twice.potential.radial(r) - once.potential.radial(r)));
        }
    }

    double covar = 0;
    for (const Potential& V : kinds)
        for (double R : {2.0, 0.5}) {
            const double lhs =
                special_morrey_norm(ctx, V.dilate(R, p), AnnulusSpec(d, 1.0).window(), light);
            const double rhs = std::pow(R, p - d / q) *
                               special_morrey_norm(ctx, V, AnnulusSpec(d, R).window(), light);
            covar = std::max(covar, std::abs(lhs - rhs) / std::abs(rhs));
        }

    OperatorData fam;
    fam.p = p;
    fam.d = d;
    fam.matrix = AnisotropyMatrix::identity(d);
    fam.potential = Potential::power_law(1.0, -1.0);
    DilationLadder ladder;
    for (int j = 0; j <= 12; ++j) ladder.rungs.push_back(std::pow(2.0, -j));
    const WeakFuchsianReport fam_rep =
        weak_fuchsian_probe(fam, {ladder}, AnnulusSpec(d, 1.0), ctx, light);

    OperatorData fix = fam;
    fix.potential = Potential::hardy(0.1, p);
    DilationLadder five;
    for (int j = 0; j <= 4; ++j) five.rungs.push_back(std::pow(2.0, -j));
    const WeakFuchsianReport fix_rep =
        weak_fuchsian_probe(fix, {five}, AnnulusSpec(d, 1.0), ctx, light);

    const bool classes = fam_rep.weak_fuchsian &&
                         fam_rep.stages.front().limit_classification == DilationClass::vanishing &&
                         !fix_rep.weak_fuchsian &&
                         fix_rep.stages.front().limit_classification == DilationClass::fixed_point;
    return {semi <= 1e-12 && covar <= 1e-5 && classes,
            text("semigroup gap = %.2e (tol 1e-12), covariance gap = %.2e (tol 1e-05), split %s",
                 semi, covar, classes ? "clean" : "broken")};
}

// 11. Closed-form weighted condenser capacity against direct quadrature of
// the extremal profile energy.
Outcome capacity_cross_check() {
    double worst = 0;
    const std::vector<std::pair<double, double>> pairs = {{0.1, 1.0}, {0.01, 1.0}, {0.1, 10.0}};
    for (const auto& [r, R] : pairs) {
        const double closed = weighted_capacity(3, 2, 2, r, R);
        const double quad = weighted_capacity_quadrature(3, 2, 2, r, R);
        worst = std::max(worst, std::abs(closed - quad) / std::abs(closed));
    }
    return {worst <= 1e-4, text("max relative difference = %.2e (tol 1e-04)", worst)};
}

// 12. The weighted integral bound for gradients holds with margin on twenty
// seeded radial test bumps.
Outcome weighted_gradient_bound() {
    std::mt19937_64 rng(7ULL);
    double min_margin = std::numeric_limits<double>::infinity();
    bool ok = true;
    for (int i = 0; i < 20; ++i) {
        const RadialBump u = RadialBump::random(rng);
        const auto [lhs, rhs] = hardy_inequality_check(2, 3, u);
        if (!(lhs >= rhs)) ok = false;
        min_margin = std::min(min_margin, lhs / rhs);
    }
    return {ok, text("min lhs/rhs = %.3f (needs >= 1)", min_margin)};
}

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    Outcome (*run)();
};

} // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "kernel flux normalization", 10, flux_normalization},
        {2, "radial kernel annihilation", 1, kernel_annihilation},
        {3, "homogeneous Dirichlet exactness and order", 5, homogeneous_exactness_and_order},
        {4, "weighted singular norm scale invariance", 60, singular_norm_scale_invariance},
        {5, "equilibrium ladder dichotomy", 10, equilibrium_dichotomy},
        {6, "indicial launch asymptotics", 10, indicial_launches},
        {7, "inversion residual decay", 120, inversion_residual_decay},
        {8, "ordered boundary comparison and descent", 300, ordered_boundary_comparison},
        {9, "dyadic shell oscillation bound", 300, shell_oscillation_bound},
        {10, "dilation semigroup, covariance, and split", 60, dilation_structure},
        {11, "weighted capacity cross-check", 5, capacity_cross_check},
        {12, "weighted gradient bound", 10, weighted_gradient_bound},
    };

    int failed = 0;
    for (const Criterion& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, text("exception: %s", e.what())};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool pass = out.pass && secs < c.budget_s;
        std::printf("[%s] criterion-%02d %s: %s [%.1f s, budget %g s]\n", pass ? "PASS" : "FAIL",
                    c.id, c.name, out.detail.c_str(), secs, c.budget_s);
        std::fflush(stdout);
        if (!pass) ++failed;
    }
    if (failed == 0)
        std::printf("acceptance: all %zu criteria passed\n", criteria.size());
    else
        std::printf("acceptance: %d of %zu criteria failed\n", failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
