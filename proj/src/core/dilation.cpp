#include "core/dilation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "core/errors.hpp"

namespace qlap {

OperatorData dilate_operator(const OperatorData& data, double R) {
    if (!(R > 0)) throw std::invalid_argument("dilation scale must be positive");
    OperatorData out = data;
    out.potential = data.potential.dilate(R, data.p);
    if (data.varying_matrix) {
        auto fn = data.varying_matrix;
        out.varying_matrix = [fn, R](const Vec& x) { return fn(Vec(R * x)); };
    }
    return out;
}

double solution_dilation_check(const RadialProblem& problem, double R,
                               const RadialSolverSpec& spec) {
    if (!(R > 0)) throw std::invalid_argument("dilation scale must be positive");
    const RadialSolution u = solve_radial_dirichlet(problem, spec);

    RadialProblem scaled = problem;
    scaled.V = problem.V.dilate(R, problem.ctx.p);
    scaled.inner = problem.inner / R;
    scaled.outer = problem.outer / R;
    const RadialSolution v = solve_radial_dirichlet(scaled, spec);

    double sup = 0;
    const int samples = 257;
    for (int i = 0; i <= samples; ++i) {
        const double t = static_cast<double>(i) / samples;
        const double s = scaled.inner * std::pow(scaled.outer / scaled.inner, t);
        const double rs = std::clamp(R * s, problem.inner, problem.outer);
        sup = std::max(sup, std::abs(v.value_at(s) - u.value_at(rs)));
    }
    return sup;
}

std::string to_string(DilationClass c) {
    switch (c) {
        case DilationClass::vanishing: return "vanishing";
        case DilationClass::fixed_point: return "fixed_point";
        case DilationClass::bounded_nonvanishing: return "bounded_nonvanishing";
        case DilationClass::unbounded: return "unbounded";
    }
    return "unknown";
}

namespace {

DilationClass classify(const DilationTrace& trace) {
    const auto& s = trace.dilated_norms;
    if (trace.diverged) return DilationClass::unbounded;
    if (s.empty()) return DilationClass::bounded_nonvanishing;
    const double first = s.front();
    const size_t tail = std::min<size_t>(3, s.size());
    bool gone = true;
    for (size_t i = s.size() - tail; i < s.size(); ++i)
        if (s[i] > trace.vanish_tol * first) gone = false;
    if (gone) return DilationClass::vanishing;
    const auto [mn, mx] = std::minmax_element(s.begin(), s.end());
    if (*mx > 0 && (*mx - *mn) <= trace.fixed_point_tol * *mx)
        return DilationClass::fixed_point;
    // A tail that has blown far past the first entry and keeps growing is as
    // good as divergence for this probe.
    if (s.size() >= 3 && s.back() > 1e3 * std::max(first, 1e-300) &&
        s[s.size() - 1] > s[s.size() - 2] && s[s.size() - 2] > s[s.size() - 3])
        return DilationClass::unbounded;
    return DilationClass::bounded_nonvanishing;
}

void validate_ladder(const DilationLadder& ladder) {
    if (ladder.rungs.size() < 2) throw std::invalid_argument("ladder needs at least two rungs");
    for (double r : ladder.rungs)
        if (!(r > 0)) throw std::invalid_argument("ladder rungs must be positive");
    for (size_t i = 1; i < ladder.rungs.size(); ++i) {
        const bool ok = ladder.zeta == Zeta::origin ? ladder.rungs[i] < ladder.rungs[i - 1]
                                                   : ladder.rungs[i] > ladder.rungs[i - 1];
        if (!ok) throw std::invalid_argument("ladder rungs must run monotonically toward zeta");
    }
}

} // namespace

WeakFuchsianReport weak_fuchsian_probe(const OperatorData& data,
                                       const std::vector<DilationLadder>& ladders,
                                       const AnnulusSpec& test_annulus, const MorreyContext& ctx,
                                       const MorreyGridSpec& grid, double vanish_tol,
                                       double fixed_point_tol) {
    if (ladders.empty()) throw std::invalid_argument("probe needs at least one ladder");
    if (ctx.p != data.p || ctx.d != data.d)
        throw std::invalid_argument("norm context disagrees with the operator data");

    WeakFuchsianReport report;
    OperatorData current = data;
    for (const auto& ladder : ladders) {
        validate_ladder(ladder);
        DilationTrace trace;
        trace.vanish_tol = vanish_tol;
        trace.fixed_point_tol = fixed_point_tol;
        for (double R : ladder.rungs) {
            trace.R_seq.push_back(R);
            try {
                const OperatorData at_R = dilate_operator(current, R);
                trace.dilated_norms.push_back(
                    weighted_fuchsian_norm(ctx, at_R.potential, test_annulus, grid));
            } catch (const diverged_error&) {
                trace.dilated_norms.push_back(std::numeric_limits<double>::infinity());
                trace.diverged = true;
                break;
            }
        }
        trace.limit_classification = classify(trace);
        const DilationClass cls = trace.limit_classification;
        report.stages.push_back(std::move(trace));
        if (cls == DilationClass::vanishing) current.potential = Potential::zero();
        // fixed_point and bounded_nonvanishing pass the data on unchanged.
    }
    report.weak_fuchsian =
        report.stages.back().limit_classification == DilationClass::vanishing;
    return report;
}

} // namespace qlap
