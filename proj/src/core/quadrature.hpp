#pragma once

#include <functional>
#include <vector>

namespace qlap {

struct GaussRule {
    std::vector<double> nodes;   // on [-1, 1]
    std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [-1, 1]; rules are computed once and cached.
const GaussRule& gauss_legendre_rule(int n);

// Fixed n-point Gauss-Legendre estimate of the integral of f over [a, b].
double gauss_legendre(const std::function<double(double)>& f, double a, double b, int n);

struct Quad1DOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-15;
    int max_depth = 40;
    // Endpoint where the integrand may have an integrable singularity.  The
    // interval is pre-split into geometrically shrinking panels toward that
    // endpoint before the adaptive rule runs.
    bool graded_at_a = false;
    bool graded_at_b = false;
    int graded_panels = 30;
};

// Adaptive 1D integral of f on [a, b] (globally adaptive Simpson with
// Richardson acceptance).  Deterministic; returns the best estimate once the
// local error criteria hold or the depth cap is reached.
double integrate_1d(const std::function<double(double)>& f, double a, double b,
                    const Quad1DOptions& opt = {});

} // namespace qlap
