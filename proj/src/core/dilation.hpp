#pragma once

#include <functional>
#include <string>
#include <vector>

#include "core/geometry.hpp"
#include "core/morrey.hpp"
#include "core/potential.hpp"
#include "core/radial.hpp"

namespace qlap {

// Data of the operator u -> -div(|grad u|_A^{p-2} A grad u) + V |u|^{p-2} u
// with one isolated singular point (origin or infinity).  The matrix is
// constant; a pointwise-varying matrix map may ride along and is rescaled by
// dilation, but no computation other than dilation touches it.
struct OperatorData {
    double p = 2.0;
    int d = 2;
    AnisotropyMatrix matrix = AnisotropyMatrix::identity(2);
    std::function<Mat(const Vec&)> varying_matrix; // optional; x -> A(x)
    Potential potential = Potential::zero();
    Zeta singular_point = Zeta::origin;
};

// Rescaled data A_R(x) = A(Rx), V_R(x) = R^p V(Rx).  A constant matrix is a
// fixed point; so is any potential homogeneous of degree -p.
OperatorData dilate_operator(const OperatorData& data, double R);

// Solves the radial problem, then solves the R-dilated problem (scaled domain,
// dilated potential, transported boundary values) and returns the sup of
// |v(s) - u(Rs)| over a log-spaced sample.  u(Rx) solves the dilated equation
// exactly, so the discrepancy is pure solver error.
double solution_dilation_check(const RadialProblem& problem, double R,
                               const RadialSolverSpec& spec = {});

struct DilationLadder {
    Zeta zeta = Zeta::origin;      // rungs must run monotonically toward it
    std::vector<double> rungs;
};

enum class DilationClass { vanishing, fixed_point, bounded_nonvanishing, unbounded };

std::string to_string(DilationClass c);

// Norm trace of one ladder stage on the fixed test annulus, plus the
// thresholds the classification used.
struct DilationTrace {
    std::vector<double> R_seq;
    std::vector<double> dilated_norms;
    DilationClass limit_classification = DilationClass::bounded_nonvanishing;
    double vanish_tol = 1e-3;      // tail entries below vanish_tol * first
    double fixed_point_tol = 1e-2; // max spread relative to the largest entry
    bool diverged = false;         // some rung's norm integral diverged
};

struct WeakFuchsianReport {
    std::vector<DilationTrace> stages;
    bool weak_fuchsian = false; // last stage classified vanishing
};

// Applies the ladders in order.  Each stage dilates the current data along its
// rungs and records the weighted potential norm on test_annulus.  A vanishing
// stage hands the next stage a zero potential; a fixed-point stage hands it on
// unchanged.  Norm traces only: weak-topology limits are never identified, so
// an oscillatory stage is reported bounded_nonvanishing and passed through
// unchanged.
WeakFuchsianReport weak_fuchsian_probe(const OperatorData& data,
                                       const std::vector<DilationLadder>& ladders,
                                       const AnnulusSpec& test_annulus, const MorreyContext& ctx,
                                       const MorreyGridSpec& grid = {}, double vanish_tol = 1e-3,
                                       double fixed_point_tol = 1e-2);

} // namespace qlap
