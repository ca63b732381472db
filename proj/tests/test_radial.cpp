#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "core/errors.hpp"
#include "core/fundamental.hpp"
#include "core/radial.hpp"

using namespace qlap;

namespace {

C2Radial profile_of(const FundamentalSolution& fs) {
    return {[&fs](double r) { return fs.radial_value(r); },
            [&fs](double r) { return fs.radial_derivative(r); },
            [&fs](double r) { return fs.radial_second_derivative(r); }};
}

std::vector<double> log_ladder(double from, double to, int n) {
    std::vector<double> r(n);
    const double step = std::log(to / from) / (n - 1);
    for (int i = 0; i < n; ++i) r[i] = from * std::exp(i * step);
    return r;
}

double sup_node_error(const RadialSolution& sol, const std::function<double(double)>& exact) {
    double m = 0;
    for (size_t i = 0; i < sol.r.size(); ++i)
        m = std::max(m, std::abs(sol.u[i] - exact(sol.r[i])));
    return m;
}

} // namespace

TEST_CASE("kernel profiles annihilate the radial operator") {
    struct Case {
        double p;
        int d;
    };
    for (const Case& c : {Case{2, 3}, Case{3, 2}, Case{2, 2}, Case{4, 2}, Case{3, 3}}) {
        FundamentalSolution fs(c.p, AnisotropyMatrix::identity(c.d));
        const auto f = profile_of(fs);
        const RadialContext ctx{c.p, c.d};
        for (double r : log_ladder(0.1, 10.0, 50)) {
            const auto res = radial_operator_apply(ctx, f, r);
            CHECK(!res.degenerate);
            CHECK(std::abs(res.value) < 1e-8);
        }
    }
}

TEST_CASE("the radial operator reproduces hand values on polynomials") {
    const C2Radial quad = {[](double r) { return r * r; }, [](double r) { return 2 * r; },
                           [](double) { return 2.0; }};
    // p = 2, d = 3: f'' + 2 f'/r = 2 + 4 = 6
    CHECK(radial_operator_apply({2, 3}, quad, 1.7).value == doctest::Approx(6.0).epsilon(1e-12));
    // p = 3, d = 2: |f'| (2 f'' + f'/r) = 2r (4 + 2) = 12 r
    CHECK(radial_operator_apply({3, 2}, quad, 0.8).value ==
          doctest::Approx(12.0 * 0.8).epsilon(1e-12));

    // p < 2 at a flat point: the pointwise form is singular
    const C2Radial flat = {[](double) { return 1.0; }, [](double) { return 0.0; },
                           [](double) { return 0.0; }};
    const auto res = radial_operator_apply({1.5, 2}, flat, 1.0);
    CHECK(res.degenerate);
    CHECK(res.value == doctest::Approx(0.0));
}

TEST_CASE("homogeneous Dirichlet solves match the closed form") {
    // p = 2, d = 3 on [1, 2] with data (1, 0): u = -1 + 2/r
    RadialProblem prob;
    prob.ctx = {2, 3};
    prob.inner = 1;
    prob.outer = 2;
    prob.bc_inner = 1;
    prob.bc_outer = 0;
    const auto sol = solve_radial_dirichlet(prob);
    CHECK(sup_node_error(sol, [](double r) { return -1.0 + 2.0 / r; }) < 1e-6);
    CHECK(sol.max_conservation_residual() < 1e-12);

    // the closed-form helper agrees with the hand solution
    const auto hom = radial_homogeneous_solution(prob.ctx, 1, 2, 1, 0);
    for (double r : {1.0, 1.3, 1.7, 2.0})
        CHECK(hom(r) == doctest::Approx(-1.0 + 2.0 / r).epsilon(1e-12));

    // p = d = 2: log branch
    const auto log_hom = radial_homogeneous_solution({2, 2}, 1, 2, 1, 0);
    for (double r : {1.0, 1.5, 2.0})
        CHECK(log_hom(r) == doctest::Approx(1.0 - std::log(r) / std::log(2.0)).epsilon(1e-12));

    // p = 3, d = 2: r^{1/2} branch, solved and exact
    RadialProblem sup;
    sup.ctx = {3, 2};
    sup.bc_inner = 0;
    sup.bc_outer = 1;
    const auto sup_sol = solve_radial_dirichlet(sup);
    const auto sup_hom = radial_homogeneous_solution(sup.ctx, 1, 2, 0, 1);
    CHECK(sup_node_error(sup_sol, sup_hom) < 1e-6);
}

TEST_CASE("node error contracts at the integrator's order") {
    // V = 2/r^2 turns u = r into an exact solution for p = 2, d = 3, so the
    // stepper does real work (the V = 0 path is exact by construction).
    RadialProblem prob;
    prob.ctx = {2, 3};
    prob.V = Potential::power_law(2.0, -2.0);
    prob.bc_inner = 1;
    prob.bc_outer = 2;
    const auto exact = [](double r) { return r; };
    RadialSolverSpec coarse;
    coarse.cells = 32;
    RadialSolverSpec fine;
    fine.cells = 64;
    const double e1 = sup_node_error(solve_radial_dirichlet(prob, coarse), exact);
    const double e2 = sup_node_error(solve_radial_dirichlet(prob, fine), exact);
    CHECK(e1 < 1e-9);
    CHECK(e2 < 1e-11);
    const double order = std::log2(e1 / e2);
    CHECK(order > 3.5);

    // with V = 0 the flux is a state invariant and nodes come out exact
    RadialProblem hom;
    hom.ctx = {2, 3};
    hom.bc_inner = 1;
    hom.bc_outer = 0;
    RadialSolverSpec tiny;
    tiny.cells = 128;
    const double e0 = sup_node_error(solve_radial_dirichlet(hom, tiny),
                                     [](double r) { return -1.0 + 2.0 / r; });
    CHECK(e0 < 1e-12);
}

TEST_CASE("flux stays conserved against the potential term") {
    RadialProblem prob;
    prob.ctx = {2, 3};
    prob.V = Potential::power_law(1.0, 0.0);
    prob.bc_inner = 1;
    prob.bc_outer = 2;
    const auto sol = solve_radial_dirichlet(prob);
    CHECK(sol.max_conservation_residual() < 1e-8);
    CHECK(std::abs(sol.u.front() - 1.0) < 1e-12);
    CHECK(std::abs(sol.u.back() - 2.0) < 1e-10);
    // interpolants agree with the stored samples
    CHECK(sol.value_at(sol.r[100]) == doctest::Approx(sol.u[100]).epsilon(1e-12));

    // nonlinear branch with a sign-definite potential
    RadialProblem pl;
    pl.ctx = {3, 2};
    pl.V = Potential::power_law(0.5, -1.0);
    pl.bc_inner = 0.5;
    pl.bc_outer = 1.5;
    const auto sol3 = solve_radial_dirichlet(pl);
    CHECK(sol3.max_conservation_residual() < 1e-8);
    CHECK(std::abs(sol3.u.back() - 1.5) < 1e-10);
}

TEST_CASE("outward integration retraces the two-point solution") {
    RadialProblem prob;
    prob.ctx = {2, 3};
    prob.V = Potential::power_law(1.0, 0.0);
    prob.bc_inner = 1;
    prob.bc_outer = 2;
    const auto sol = solve_radial_dirichlet(prob);
    const auto ivp =
        solve_radial_ivp(prob.ctx, prob.V, 1.0, 2.0, 1.0, sol.derivative_at(1.0));
    CHECK(std::abs(ivp.u.back() - 2.0) < 1e-8);
    for (double r : {1.1, 1.4, 1.9})
        CHECK(ivp.value_at(r) == doctest::Approx(sol.value_at(r)).epsilon(1e-8));

    CHECK_THROWS_AS(solve_radial_ivp(prob.ctx, prob.V, 2.0, 1.0, 0, 0), std::invalid_argument);
}

TEST_CASE("equilibrium ladder values match the exact window solutions") {
    const std::vector<double> ks = {4, 8, 16, 64, 4096};
    struct Case {
        double p;
        int d;
        double limit;
    };
    for (const Case& c : {Case{2, 2, 1.0}, Case{4, 2, 1.0}, Case{3, 3, 1.0}, Case{2, 3, 0.5}}) {
        const auto rep = criticality_probe({c.p, c.d}, ks);
        REQUIRE(rep.w_probe.size() == ks.size());
        for (size_t i = 0; i < ks.size(); ++i)
            CHECK(rep.w_probe[i] == doctest::Approx(rep.closed_form[i]).epsilon(1e-8));
        CHECK(rep.limit == doctest::Approx(c.limit).epsilon(1e-12));
        // the ladder trend approaches the limit
        CHECK(std::abs(rep.w_probe.back() - rep.limit) <
              std::abs(rep.w_probe.front() - rep.limit));
    }
    CHECK_THROWS_AS(criticality_probe({2, 3}, {2.0, 4.0}), std::invalid_argument);
}

TEST_CASE("ladder extrapolation classifies decay, growth, and plateaus") {
    std::vector<double> radii, decay, growth, settle, flat;
    for (int j = 1; j <= 10; ++j) {
        const double r = std::pow(2.0, -j);
        radii.push_back(r);
        decay.push_back(std::sqrt(r));
        growth.push_back(std::pow(r, -0.3));
        settle.push_back(3.0 + 2.0 * r);
        flat.push_back(5.0);
    }
    CHECK(fit_limit(radii, decay, Zeta::origin).cls == LimitClass::zero);
    CHECK(fit_limit(radii, growth, Zeta::origin).cls == LimitClass::infinite);
    const auto fin = fit_limit(radii, settle, Zeta::origin);
    CHECK(fin.cls == LimitClass::finite);
    CHECK(fin.value == doctest::Approx(3.0).epsilon(1e-9));
    const auto cst = fit_limit(radii, flat, Zeta::origin);
    CHECK(cst.cls == LimitClass::finite);
    CHECK(cst.value == doctest::Approx(5.0));

    // toward infinity the slope sign flips meaning
    std::vector<double> big, vals;
    for (int j = 1; j <= 10; ++j) {
        big.push_back(std::pow(2.0, j));
        vals.push_back(std::pow(big.back(), -0.5));
    }
    CHECK(fit_limit(big, vals, Zeta::infinity).cls == LimitClass::zero);
}

TEST_CASE("ratios of singular solutions settle at the coefficient ratio") {
    FundamentalSolution fs(2, AnisotropyMatrix::identity(3));
    const auto mu = [&](double r) { return fs.radial_value(r); };
    std::vector<double> radii;
    for (int j = 4; j <= 20; ++j) radii.push_back(std::pow(2.0, -j));

    const auto diag = ratio_limit([&](double r) { return 2 * mu(r) + 1; },
                                  [&](double r) { return mu(r) + 3; }, radii, Zeta::origin);
    CHECK(diag.regular);
    CHECK(diag.limit_lower.cls == LimitClass::finite);
    CHECK(diag.limit_lower.value == doctest::Approx(2.0).epsilon(1e-6));

    CHECK_THROWS_AS(ratio_limit([](double) { return 1.0; }, [](double) { return 0.0; }, radii,
                                Zeta::origin),
                    std::domain_error);
}

TEST_CASE("band-valued ratios are regular exactly when the bands pinch") {
    std::vector<double> radii, lo, hi, wide_lo, wide_hi;
    for (int j = 1; j <= 12; ++j) {
        const double r = std::pow(2.0, -j);
        radii.push_back(r);
        lo.push_back(2.0 - r);
        hi.push_back(2.0 + r);
        wide_lo.push_back(1.0 + r);
        wide_hi.push_back(3.0 - r);
    }
    const auto pinch = ratio_limit_bands(radii, lo, hi, Zeta::origin);
    CHECK(pinch.regular);
    CHECK(pinch.limit_lower.value == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(pinch.limit_upper.value == doctest::Approx(2.0).epsilon(1e-6));

    const auto gap = ratio_limit_bands(radii, wide_lo, wide_hi, Zeta::origin);
    CHECK(!gap.regular);

    CHECK_THROWS_AS(ratio_limit_bands(radii, lo, {1.0}, Zeta::origin), std::invalid_argument);
}

TEST_CASE("monotonicity verdicts respect the burn-in window") {
    // rough start, clean climb afterwards
    const std::vector<double> climb = {10, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    const auto up = monotonicity_check(climb);
    CHECK(up.eventually_monotone);
    CHECK(up.direction == +1);

    const std::vector<double> fall = {1, 7, 6, 5, 4, 3, 2, 1.5, 1.2, 1.1};
    const auto down = monotonicity_check(fall);
    CHECK(down.eventually_monotone);
    CHECK(down.direction == -1);

    // violation after the burn-in is reported with its index
    const std::vector<double> wobble = {5, 4, 3, 2, 1, 2};
    const auto bad = monotonicity_check(wobble, 0.0);
    CHECK(!bad.eventually_monotone);
    CHECK(bad.first_violation == 1);

    // wiggles below the tolerance do not break monotonicity
    const std::vector<double> noisy = {1, 2, 3, 3.0 - 1e-13, 4};
    CHECK(monotonicity_check(noisy, 0.0).eventually_monotone);

    CHECK_THROWS_AS(monotonicity_check({1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("ordered boundary data produces ordered solutions") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> level(0.0, 1.0);
    std::uniform_real_distribution<double> gap(0.0, 1.0);
    std::uniform_real_distribution<double> coeff(0.0, 2.0);
    std::uniform_real_distribution<double> expo(-1.0, 1.0);
    for (int k = 0; k < 10; ++k) {
        RadialProblem lo, hi;
        lo.ctx = hi.ctx = {2, 3};
        lo.V = hi.V = Potential::power_law(coeff(rng), expo(rng));
        lo.bc_inner = level(rng);
        lo.bc_outer = level(rng);
        hi.bc_inner = lo.bc_inner + gap(rng);
        hi.bc_outer = lo.bc_outer + gap(rng);
        const auto rep = weak_comparison_probe(lo, hi);
        CHECK(rep.ordered);
        CHECK(rep.max_violation <= 1e-8);
    }

    RadialProblem a, b;
    a.ctx = {2, 3};
    b.ctx = {3, 3};
    CHECK_THROWS_AS(weak_comparison_probe(a, b), std::invalid_argument);
    b.ctx = a.ctx;
    a.bc_inner = 1.0;
    b.bc_inner = 0.0;
    CHECK_THROWS_AS(weak_comparison_probe(a, b), std::invalid_argument);
}

TEST_CASE("asymptotic ratios flag removable singularities") {
    FundamentalSolution fs(2, AnisotropyMatrix::identity(3));
    std::vector<double> radii;
    for (int j = 4; j <= 17; ++j) radii.push_back(std::pow(2.0, -j));

    const auto shifted =
        asymptotics_probe([&](double r) { return fs.radial_value(r) + 5.0; }, fs, radii,
                          Zeta::origin);
    CHECK(shifted.limit.cls == LimitClass::finite);
    CHECK(shifted.limit.value == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(!shifted.removable);

    const auto mild = asymptotics_probe([](double r) { return std::pow(r, -0.5); }, fs, radii,
                                        Zeta::origin);
    CHECK(mild.removable);
    CHECK(mild.limit.cls == LimitClass::zero);

    const auto strong = asymptotics_probe(
        [&](double r) { return fs.radial_value(r) * std::log(1.0 / r); }, fs, radii,
        Zeta::origin);
    CHECK(strong.limit.cls == LimitClass::infinite);
    CHECK(!strong.removable);
}
