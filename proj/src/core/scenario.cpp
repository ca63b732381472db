#include "core/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "core/dilation.hpp"
#include "core/errors.hpp"
#include "core/fundamental.hpp"
#include "core/planar.hpp"
#include "core/radial.hpp"

namespace qlap {

using json = nlohmann::ordered_json;

namespace {

const std::set<std::string>& known_subcommands() {
    static const std::set<std::string> s = {
        "fundamental",   "morrey-norm", "fuchsian-check", "dilation-probe",
        "radial-solve",  "ratio-limit", "criticality-probe", "solve2d",
        "harnack",       "kelvin-check", "capacity",       "hardy-check"};
    return s;
}

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

template <class T>
void opt_get(const json& j, const char* key, T& out) {
    if (j.contains(key)) j.at(key).get_to(out);
}

const char* regime_name(MorreyRegime r) {
    switch (r) {
        case MorreyRegime::subdim: return "subdim";
        case MorreyRegime::critical: return "critical";
        case MorreyRegime::superdim: return "superdim";
    }
    return "unknown";
}

const char* limit_class_name(LimitClass c) {
    switch (c) {
        case LimitClass::finite: return "finite";
        case LimitClass::infinite: return "infinite";
        case LimitClass::zero: return "zero";
    }
    return "unknown";
}

json limit_json(const FittedLimit& l) {
    json j;
    j["class"] = limit_class_name(l.cls);
    j["value"] = l.cls == LimitClass::finite ? l.value : 0.0;
    return j;
}

// q left at 0 picks the smallest convenient admissible exponent.
MorreyContext context_for(const ScenarioConfig& c) {
    double q = c.q;
    if (q == 0.0) {
        if (c.p < c.d) q = c.d;
        else if (c.p == double(c.d)) q = c.d + 1;
        else q = 2;
    }
    return MorreyContext::make(c.p, q, c.d);
}

double tol_or(const ScenarioConfig& c, double dflt) {
    return (c.tolerance > 0 ? c.tolerance : dflt) * c.tol_scale;
}

double loglog_slope(const std::vector<double>& r, const std::vector<double>& v) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const size_t n = r.size();
    for (size_t i = 0; i < n; ++i) {
        const double x = std::log(r[i]), y = std::log(std::abs(v[i]));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace

AnisotropyMatrix MatrixSpec::build(int d) const {
    if (kind == "identity") return AnisotropyMatrix::identity(d);
    if (kind == "diagonal") {
        if (static_cast<int>(values.size()) != d)
            throw config_error("diagonal matrix needs exactly d entries");
        return AnisotropyMatrix::diagonal(values);
    }
    if (kind == "full") {
        if (static_cast<int>(values.size()) != d * d)
            throw config_error("full matrix needs d*d row-major entries");
        Mat m(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) m(i, j) = values[static_cast<size_t>(i * d + j)];
        return AnisotropyMatrix(m);
    }
    throw config_error("unknown matrix kind: " + kind);
}

Potential PotentialSpec::build(double p) const {
    if (kind == "zero") return Potential::zero();
    if (kind == "power_law") return Potential::power_law(coefficient, exponent);
    if (kind == "hardy") return Potential::hardy(lambda, p);
    if (kind == "annulus_bump") return Potential::annulus_bump(inner, outer, coefficient);
    if (kind == "table") return Potential::radial_table(radii, values);
    throw config_error("unknown potential kind: " + kind);
}

Window DomainSpec::build(const AnisotropyMatrix& A) const {
    if (kind == "annulus") return Window::annulus(A, inner, outer);
    if (kind == "ball") {
        Vec c = Vec::Zero(A.dim());
        if (!center.empty()) {
            if (static_cast<int>(center.size()) != A.dim())
                throw config_error("ball center dimension mismatch");
            for (int i = 0; i < A.dim(); ++i) c[i] = center[static_cast<size_t>(i)];
        }
        return Window::ball(c, radius);
    }
    throw config_error("unknown domain kind: " + kind);
}

std::vector<double> LadderSpec::rungs() const {
    std::vector<double> out;
    double v = start;
    for (int i = 0; i < count; ++i) {
        out.push_back(v);
        v *= factor;
    }
    return out;
}

Zeta LadderSpec::zeta_point() const {
    if (zeta == "origin") return Zeta::origin;
    if (zeta == "infinity") return Zeta::infinity;
    throw config_error("ladder zeta must be origin or infinity");
}

json scenario_defaults(const std::string& subcommand) {
    json d = json::object();
    if (subcommand == "fundamental") {
        d["p"] = 2.0;
        d["d"] = 3;
        d["radii"] = {0.25, 1.0, 4.0};
    } else if (subcommand == "fuchsian-check") {
        d["p"] = 2.0;
        d["d"] = 3;
        d["potential"] = {{"kind", "hardy"}, {"lambda", 0.1}};
        d["ladder"] = {{"start", 1.0}, {"factor", 0.5}, {"count", 6}, {"zeta", "origin"}};
    } else if (subcommand == "dilation-probe") {
        d["p"] = 2.0;
        d["d"] = 3;
        d["potential"] = {{"kind", "hardy"}, {"lambda", 0.1}};
        d["ladder"] = {{"start", 1.0}, {"factor", 0.5}, {"count", 8}, {"zeta", "origin"}};
        d["domain"] = {{"kind", "annulus"}, {"inner", 0.5}, {"outer", 1.5}};
    } else if (subcommand == "radial-solve") {
        d["d"] = 3;
        d["domain"] = {{"kind", "annulus"}, {"inner", 1.0}, {"outer", 2.0}};
    } else if (subcommand == "ratio-limit") {
        d["p"] = 2.0;
        d["d"] = 3;
        d["potential"] = {{"kind", "hardy"}, {"lambda", 0.1875}};
        d["domain"] = {{"kind", "annulus"}, {"inner", 1e-5}, {"outer", 1.0}};
        d["ladder"] = {{"start", 0.1}, {"factor", 0.5}, {"count", 10}, {"zeta", "origin"}};
    } else if (subcommand == "criticality-probe") {
        d["p"] = 2.0;
        d["d"] = 3;
        d["ladder"] = {{"start", 4.0}, {"factor", 2.0}, {"count", 11}, {"zeta", "infinity"}};
    } else if (subcommand == "solve2d") {
        d["domain"] = {{"kind", "annulus"}, {"inner", 0.5}, {"outer", 2.0}};
    } else if (subcommand == "harnack") {
        d["p"] = 3.0;
        d["potential"] = {{"kind", "hardy"}, {"lambda", 1.0 / 54}};
        d["domain"] = {{"kind", "annulus"}, {"inner", 0.25}, {"outer", 4.0}};
        d["ladder"] = {{"start", 0.5}, {"factor", 2.0}, {"count", 3}, {"zeta", "infinity"}};
        d["bc"] = {{"inner", 1.0}, {"outer", 1.0}};
        d["mesh"] = 1.0 / 32;
    } else if (subcommand == "kelvin-check") {
        d["matrix"] = {{"kind", "diagonal"}, {"values", {4.0, 1.0}}};
        d["domain"] = {{"kind", "annulus"}, {"inner", 0.5}, {"outer", 2.0}};
        d["mesh"] = 1.0 / 32;
        d["count"] = 2;
    } else if (subcommand == "capacity") {
        d["p"] = 3.0;
        d["beta"] = 2.0;
    } else if (subcommand == "hardy-check") {
        d["p"] = 2.0;
        d["d"] = 3;
        d["count"] = 20;
    }
    return d;
}

ScenarioConfig ScenarioConfig::from_json(const json& j) {
    ScenarioConfig c;
    try {
        opt_get(j, "version", c.version);
        opt_get(j, "subcommand", c.subcommand);
        opt_get(j, "p", c.p);
        opt_get(j, "d", c.d);
        opt_get(j, "q", c.q);
        if (j.contains("matrix")) {
            const json& m = j.at("matrix");
            opt_get(m, "kind", c.matrix.kind);
            opt_get(m, "values", c.matrix.values);
        }
        if (j.contains("potential")) {
            const json& m = j.at("potential");
            opt_get(m, "kind", c.potential.kind);
            opt_get(m, "coefficient", c.potential.coefficient);
            opt_get(m, "exponent", c.potential.exponent);
            opt_get(m, "lambda", c.potential.lambda);
            opt_get(m, "inner", c.potential.inner);
            opt_get(m, "outer", c.potential.outer);
            opt_get(m, "radii", c.potential.radii);
            opt_get(m, "values", c.potential.values);
        }
        if (j.contains("domain")) {
            const json& m = j.at("domain");
            opt_get(m, "kind", c.domain.kind);
            opt_get(m, "inner", c.domain.inner);
            opt_get(m, "outer", c.domain.outer);
            opt_get(m, "radius", c.domain.radius);
            opt_get(m, "center", c.domain.center);
        }
        if (j.contains("ladder")) {
            const json& m = j.at("ladder");
            opt_get(m, "start", c.ladder.start);
            opt_get(m, "factor", c.ladder.factor);
            opt_get(m, "count", c.ladder.count);
            opt_get(m, "zeta", c.ladder.zeta);
        }
        if (j.contains("bc")) {
            const json& m = j.at("bc");
            opt_get(m, "inner", c.bc.inner);
            opt_get(m, "outer", c.bc.outer);
        }
        if (j.contains("capacity")) {
            const json& m = j.at("capacity");
            opt_get(m, "r", c.capacity.r);
            opt_get(m, "R", c.capacity.R);
            opt_get(m, "normalization", c.capacity.normalization);
        }
        opt_get(j, "radii", c.radii);
        opt_get(j, "tolerance", c.tolerance);
        opt_get(j, "tol_scale", c.tol_scale);
        opt_get(j, "cells", c.cells);
        opt_get(j, "mesh", c.mesh);
        opt_get(j, "beta", c.beta);
        opt_get(j, "scale", c.scale);
        opt_get(j, "probe_radius", c.probe_radius);
        opt_get(j, "count", c.count);
        opt_get(j, "seed", c.seed);
    } catch (const json::exception& e) {
        throw config_error(std::string("malformed config field: ") + e.what());
    }
    c.validate();
    return c;
}

ScenarioConfig ScenarioConfig::parse(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw config_error(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw config_error("config must be a JSON object");
    if (!doc.contains("subcommand") || !doc.at("subcommand").is_string())
        throw config_error("config needs a subcommand field");
    const std::string sub = doc.at("subcommand").get<std::string>();
    json merged = scenario_defaults(sub);
    merged.merge_patch(doc);
    return from_json(merged);
}

void ScenarioConfig::validate() const {
    if (!known_subcommands().count(subcommand))
        throw config_error("unknown subcommand: " + (subcommand.empty() ? "(none)" : subcommand));
    if (!(p > 1)) throw config_error("p must exceed 1");
    if (d < 2) throw config_error("d must be at least 2");
    if (q < 0) throw config_error("q must be nonnegative");
    if (tolerance < 0) throw config_error("tolerance must be nonnegative");
    if (!(tol_scale > 0)) throw config_error("tol_scale must be positive");
    if (cells < 8) throw config_error("cells must be at least 8");
    if (!(mesh > 0)) throw config_error("mesh must be positive");
    if (!(ladder.start > 0) || !(ladder.factor > 0) || ladder.count < 1)
        throw config_error("ladder needs positive start and factor and count >= 1");
    if (ladder.zeta != "origin" && ladder.zeta != "infinity")
        throw config_error("ladder zeta must be origin or infinity");
    if (domain.kind == "annulus" && !(domain.inner > 0 && domain.outer > domain.inner))
        throw config_error("annulus domain needs 0 < inner < outer");
    if (domain.kind == "ball" && !(domain.radius > 0))
        throw config_error("ball domain needs a positive radius");
    if (!(capacity.r > 0 && capacity.R > capacity.r))
        throw config_error("capacity needs 0 < r < R");
    if (capacity.normalization != "full" && capacity.normalization != "per_unit_sphere")
        throw config_error("capacity normalization must be full or per_unit_sphere");
    if (count < 1) throw config_error("count must be at least 1");
    for (double r : radii)
        if (!(r > 0)) throw config_error("evaluation radii must be positive");
}

json ScenarioConfig::to_json() const {
    json j;
    j["version"] = version;
    j["subcommand"] = subcommand;
    j["p"] = p;
    j["d"] = d;
    j["q"] = q;
    j["matrix"] = {{"kind", matrix.kind}, {"values", matrix.values}};
    j["potential"] = {{"kind", potential.kind},
                      {"coefficient", potential.coefficient},
                      {"exponent", potential.exponent},
                      {"lambda", potential.lambda},
                      {"inner", potential.inner},
                      {"outer", potential.outer},
                      {"radii", potential.radii},
                      {"values", potential.values}};
    j["domain"] = {{"kind", domain.kind},
                   {"inner", domain.inner},
                   {"outer", domain.outer},
                   {"radius", domain.radius},
                   {"center", domain.center}};
    j["ladder"] = {{"start", ladder.start},
                   {"factor", ladder.factor},
                   {"count", ladder.count},
                   {"zeta", ladder.zeta}};
    j["bc"] = {{"inner", bc.inner}, {"outer", bc.outer}};
    j["capacity"] = {{"r", capacity.r},
                     {"R", capacity.R},
                     {"normalization", capacity.normalization}};
    j["radii"] = radii;
    j["tolerance"] = tolerance;
    j["tol_scale"] = tol_scale;
    j["cells"] = cells;
    j["mesh"] = mesh;
    j["beta"] = beta;
    j["scale"] = scale;
    j["probe_radius"] = probe_radius;
    j["count"] = count;
    j["seed"] = seed;
    return j;
}

std::string ScenarioConfig::emit() const { return to_json().dump(2); }

bool ScenarioReport::all_passed() const {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return true;
}

json ScenarioReport::to_json() const {
    json j;
    j["inputs"] = inputs.to_json();
    j["results"] = results;
    j["checks"] = json::array();
    for (const auto& c : checks) {
        json cj;
        cj["name"] = c.name;
        cj["passed"] = c.passed;
        cj["value"] = std::isfinite(c.value) ? json(c.value) : json(nullptr);
        cj["reference"] = c.reference;
        cj["tolerance"] = c.tolerance;
        j["checks"].push_back(cj);
    }
    j["provenance"] = json::array();
    for (const auto& t : provenance)
        j["provenance"].push_back({{"name", t.name}, {"source", t.source}});
    j["series"] = json::array();
    for (const auto& s : series) j["series"].push_back(s.name);
    return j;
}

std::string ScenarioReport::emit_json() const { return to_json().dump(2); }

std::string series_csv(const Series& s) {
    std::string out;
    for (size_t i = 0; i < s.columns.size(); ++i) {
        if (i) out += ',';
        out += s.columns[i];
    }
    out += '\n';
    char buf[48];
    for (const auto& row : s.rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            std::snprintf(buf, sizeof buf, "%.17g", row[i]);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

namespace {

void run_fundamental(const ScenarioConfig& c, ScenarioReport& rep) {
    const AnisotropyMatrix A = c.matrix.build(c.d);
    const FundamentalSolution fs(c.p, A);
    const double tol = tol_or(c, 1e-6);
    std::vector<double> shells = c.radii.empty() ? std::vector<double>{0.25, 1.0, 4.0} : c.radii;

    rep.results["constant"] = fs.constant();
    rep.results["exponent"] = fs.exponent();
    rep.results["logarithmic"] = fs.logarithmic();
    json fluxes = json::array();
    for (double r : shells) {
        const double flux = flux_integral(fs, r);
        fluxes.push_back({{"r", r}, {"flux", flux}});
        rep.checks.push_back({"flux_r=" + fmt_g(r), std::abs(flux + 1.0) <= tol, flux, -1.0, tol});
    }
    rep.results["flux"] = fluxes;
    rep.provenance.push_back({"constant", "closed-form"});
    rep.provenance.push_back({"flux", "divergence-identity"});

    Series prof{"profile", {"r", "mu", "dmu"}, {}};
    for (int i = 0; i <= 32; ++i) {
        const double r = 0.1 * std::pow(100.0, i / 32.0);
        prof.rows.push_back({r, fs.radial_value(r), fs.radial_derivative(r)});
    }
    rep.series.push_back(std::move(prof));
}

void run_morrey_norm(const ScenarioConfig& c, ScenarioReport& rep) {
    const MorreyContext ctx = context_for(c);
    const AnisotropyMatrix A = c.matrix.build(c.d);
    const Window w = c.domain.build(A);
    const Potential V = c.potential.build(c.p);

    double norm = std::numeric_limits<double>::infinity();
    bool diverged = false;
    try {
        norm = special_morrey_norm(ctx, V, w);
    } catch (const diverged_error&) {
        diverged = true;
    }
    rep.results["norm"] = diverged ? json(nullptr) : json(norm);
    rep.results["diverged"] = diverged;
    rep.results["regime"] = regime_name(ctx.regime);
    rep.results["q_eff"] = ctx.q_eff;
    rep.results["window_diameter"] = w.diameter();
    rep.checks.push_back({"norm_finite", !diverged, norm, 0.0, 0.0});
    rep.provenance.push_back({"norm", "finite-family-supremum"});
}

void run_fuchsian_check(const ScenarioConfig& c, ScenarioReport& rep) {
    const MorreyContext ctx = context_for(c);
    const AnisotropyMatrix A = c.matrix.build(c.d);
    const Potential V = c.potential.build(c.p);
    const double factor = c.tolerance > 0 ? c.tolerance * c.tol_scale : 10.0 * c.tol_scale;
    const auto scales = c.ladder.rungs();

    const FuchsianReport fr =
        fuchsian_check(ctx, V, c.ladder.zeta_point(), scales, factor, &A);
    rep.results["scales"] = fr.scales;
    json norms = json::array();
    for (size_t i = 0; i < fr.norms.size(); ++i)
        norms.push_back(fr.diverged[i] ? json(nullptr) : json(fr.norms[i]));
    rep.results["norms"] = norms;
    rep.results["bound"] = fr.bound;
    rep.results["stability_ratio"] =
        std::isfinite(fr.stability_ratio) ? json(fr.stability_ratio) : json(nullptr);
    rep.results["is_fuchsian"] = fr.is_fuchsian;
    rep.checks.push_back(
        {"uniformly_bounded", fr.is_fuchsian, fr.stability_ratio, factor, 0.0});
    rep.provenance.push_back({"uniformly_bounded", "ladder-supremum"});

    Series s{"norms", {"scale", "norm"}, {}};
    for (size_t i = 0; i < fr.scales.size(); ++i)
        s.rows.push_back({fr.scales[i],
                          fr.diverged[i] ? std::numeric_limits<double>::infinity() : fr.norms[i]});
    rep.series.push_back(std::move(s));
}

void run_dilation_probe(const ScenarioConfig& c, ScenarioReport& rep) {
    const MorreyContext ctx = context_for(c);
    const AnisotropyMatrix A = c.matrix.build(c.d);
    const Potential V = c.potential.build(c.p);

    OperatorData data;
    data.p = c.p;
    data.d = c.d;
    data.matrix = A;
    data.potential = V;
    data.singular_point = c.ladder.zeta_point();

    if (!(c.domain.kind == "annulus"))
        throw config_error("dilation-probe needs an annulus test region");
    AnnulusSpec annulus(A, 1.0);
    annulus.inner_factor = c.domain.inner;
    annulus.outer_factor = c.domain.outer;

    DilationLadder ladder{data.singular_point, c.ladder.rungs()};
    const WeakFuchsianReport wf = weak_fuchsian_probe(data, {ladder}, annulus, ctx);

    json stages = json::array();
    Series trace{"trace", {"stage", "R", "norm"}, {}};
    for (size_t si = 0; si < wf.stages.size(); ++si) {
        const auto& st = wf.stages[si];
        json sj;
        sj["R_seq"] = st.R_seq;
        json norms = json::array();
        for (double n : st.dilated_norms) norms.push_back(std::isfinite(n) ? json(n) : json(nullptr));
        sj["norms"] = norms;
        sj["classification"] = to_string(st.limit_classification);
        sj["vanish_tol"] = st.vanish_tol;
        sj["fixed_point_tol"] = st.fixed_point_tol;
        stages.push_back(sj);
        for (size_t i = 0; i < st.R_seq.size(); ++i)
            trace.rows.push_back({double(si), st.R_seq[i], st.dilated_norms[i]});
    }
    rep.results["stages"] = stages;
    rep.results["weak_fuchsian"] = wf.weak_fuchsian;
    rep.series.push_back(std::move(trace));

    // Composition law R1 then R2 versus R1*R2 directly, sampled pointwise.
    const double R1 = 0.5, R2 = c.scale;
    const Potential lhs = V.dilate(R1, c.p).dilate(R2, c.p);
    const Potential rhs = V.dilate(R1 * R2, c.p);
    double err = 0;
    for (double r : {0.3, 0.7, 1.3, 2.1}) {
        const double a = lhs.radial(r), b = rhs.radial(r);
        err = std::max(err, std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0}));
    }
    const double stol = 1e-12 * c.tol_scale;
    rep.checks.push_back({"semigroup_identity", err <= stol, err, 0.0, stol});
    rep.provenance.push_back({"semigroup_identity", "algebraic-identity"});
    rep.provenance.push_back({"classification", "norm-trace"});
}

void run_radial_solve(const ScenarioConfig& c, ScenarioReport& rep) {
    if (c.domain.kind != "annulus") throw config_error("radial-solve needs an annulus domain");
    RadialProblem prob;
    prob.ctx = {c.p, c.d};
    prob.V = c.potential.build(c.p);
    prob.inner = c.domain.inner;
    prob.outer = c.domain.outer;
    prob.bc_inner = c.bc.inner;
    prob.bc_outer = c.bc.outer;
    if (c.matrix.kind != "identity") prob.matrix = c.matrix.build(c.d);
    RadialSolverSpec spec;
    spec.cells = c.cells;
    const RadialSolution sol = solve_radial_dirichlet(prob, spec);

    const double btol = tol_or(c, 1e-8);
    const double ctol = 1e-6 * c.tol_scale;
    const double bdiff = std::abs(sol.u.back() - c.bc.outer);
    const double cons = sol.max_conservation_residual();
    rep.results["u_inner"] = sol.u.front();
    rep.results["u_outer"] = sol.u.back();
    rep.results["flux_inner"] = sol.flux.front();
    rep.results["flux_outer"] = sol.flux.back();
    rep.results["conservation_residual"] = cons;
    rep.checks.push_back({"boundary_match", bdiff <= btol, bdiff, 0.0, btol});
    rep.checks.push_back({"flux_conservation", cons <= ctol, cons, 0.0, ctol});
    rep.provenance.push_back({"flux_conservation", "divergence-identity"});

    Series s{"solution", {"r", "u", "flux"}, {}};
    for (size_t i = 0; i < sol.r.size(); ++i) s.rows.push_back({sol.r[i], sol.u[i], sol.flux[i]});
    rep.series.push_back(std::move(s));
}

void run_ratio_limit(const ScenarioConfig& c, ScenarioReport& rep) {
    if (c.domain.kind != "annulus") throw config_error("ratio-limit needs an annulus domain");
    const auto ladder = c.ladder.rungs();
    const Zeta zeta = c.ladder.zeta_point();
    for (double r : ladder)
        if (!(r > c.domain.inner && r < c.domain.outer))
            throw config_error("ratio ladder must stay inside the domain");

    RadialSolverSpec spec;
    spec.cells = c.cells;
    RadialProblem base;
    base.ctx = {c.p, c.d};
    base.inner = c.domain.inner;
    base.outer = c.domain.outer;

    RadialSolution u1, u2;
    const bool hardy_pair = c.potential.kind == "hardy" && c.potential.lambda != 0.0;
    if (hardy_pair) {
        const IndicialData idx = indicial_roots(c.p, c.d, c.potential.lambda);
        if (idx.roots.size() < 2 || idx.double_root)
            throw config_error("ratio-limit needs two distinct local exponents");
        const double glo = idx.roots[0], ghi = idx.roots[1];
        base.V = c.potential.build(c.p);
        RadialProblem p1 = base, p2 = base;
        p1.bc_inner = std::pow(base.inner, glo);
        p1.bc_outer = std::pow(base.outer, glo);
        p2.bc_inner = std::pow(base.inner, ghi);
        p2.bc_outer = std::pow(base.outer, ghi);
        u1 = solve_radial_dirichlet(p1, spec);
        u2 = solve_radial_dirichlet(p2, spec);

        std::vector<double> s1, s2;
        for (double r : ladder) {
            s1.push_back(u1.value_at(r));
            s2.push_back(u2.value_at(r));
        }
        const double slope1 = loglog_slope(ladder, s1);
        const double slope2 = loglog_slope(ladder, s2);
        const double stol = 0.02 * c.tol_scale;
        rep.results["roots"] = idx.roots;
        rep.results["slope_low"] = slope1;
        rep.results["slope_high"] = slope2;
        rep.checks.push_back(
            {"slope_branch_low", std::abs(slope1 - glo) <= stol, slope1, glo, stol});
        rep.checks.push_back(
            {"slope_branch_high", std::abs(slope2 - ghi) <= stol, slope2, ghi, stol});
        rep.provenance.push_back({"roots", "closed-form"});
    } else if (c.potential.kind == "zero" ||
               (c.potential.kind == "hardy" && c.potential.lambda == 0.0)) {
        const FundamentalSolution fs(c.p, AnisotropyMatrix::identity(c.d));
        base.V = Potential::zero();
        RadialProblem p1 = base, p2 = base;
        p1.bc_inner = 1.0 + fs.radial_value(base.inner);
        p1.bc_outer = 1.0 + fs.radial_value(base.outer);
        p2.bc_inner = fs.radial_value(base.inner);
        p2.bc_outer = fs.radial_value(base.outer);
        u1 = solve_radial_dirichlet(p1, spec);
        u2 = solve_radial_dirichlet(p2, spec);
        rep.provenance.push_back({"kernel", "closed-form"});
    } else {
        throw config_error("ratio-limit supports hardy or zero potentials");
    }

    const RatioDiagnostics diag = ratio_limit([&](double r) { return u1.value_at(r); },
                                              [&](double r) { return u2.value_at(r); }, ladder,
                                              zeta, 1e-3 * c.tol_scale);
    rep.results["radii"] = diag.radii;
    rep.results["lower"] = diag.lower;
    rep.results["upper"] = diag.upper;
    rep.results["limit_lower"] = limit_json(diag.limit_lower);
    rep.results["limit_upper"] = limit_json(diag.limit_upper);
    rep.results["regular"] = diag.regular;
    rep.checks.push_back(
        {"regular_wide_sense", diag.regular, diag.regular ? 1.0 : 0.0, 1.0, 0.0});
    if (!hardy_pair) {
        // (1 + kernel) / kernel tends to 1 when the kernel blows up.
        const bool one = diag.regular && diag.limit_upper.cls == LimitClass::finite &&
                         std::abs(diag.limit_upper.value - 1.0) <= 1e-3 * c.tol_scale;
        rep.checks.push_back({"ratio_limit_one", one, diag.limit_upper.value, 1.0,
                              1e-3 * c.tol_scale});
    }
    rep.provenance.push_back({"ratio", "solver"});

    Series s{"ratio", {"R", "m_r", "M_r"}, {}};
    for (size_t i = 0; i < diag.radii.size(); ++i)
        s.rows.push_back({diag.radii[i], diag.lower[i], diag.upper[i]});
    rep.series.push_back(std::move(s));
}

void run_criticality_probe(const ScenarioConfig& c, ScenarioReport& rep) {
    const RadialContext ctx{c.p, c.d};
    const auto ks = c.ladder.rungs();
    const CriticalityReport cr = criticality_probe(ctx, ks, c.probe_radius, c.cells);

    const double tol = tol_or(c, 1e-4);
    double worst = 0;
    for (size_t i = 0; i < cr.k.size(); ++i)
        worst = std::max(worst, std::abs(cr.w_probe[i] - cr.closed_form[i]));
    const MonotonicityReport mono = monotonicity_check(cr.w_probe);
    const double gap_first = std::abs(cr.w_probe.front() - cr.limit);
    const double gap_last = std::abs(cr.w_probe.back() - cr.limit);

    rep.results["k"] = cr.k;
    rep.results["w_probe"] = cr.w_probe;
    rep.results["closed_form"] = cr.closed_form;
    rep.results["limit"] = cr.limit;
    rep.results["probe_radius"] = cr.probe_radius;
    rep.checks.push_back({"closed_form_match", worst <= tol, worst, 0.0, tol});
    rep.checks.push_back({"monotone_trend",
                          mono.eventually_monotone && gap_last <= gap_first,
                          double(mono.direction), 0.0, 0.0});
    rep.provenance.push_back({"closed_form", "closed-form"});
    rep.provenance.push_back({"limit", "closed-form"});

    Series s{"criticality", {"k", "w", "closed_form"}, {}};
    for (size_t i = 0; i < cr.k.size(); ++i)
        s.rows.push_back({cr.k[i], cr.w_probe[i], cr.closed_form[i]});
    rep.series.push_back(std::move(s));
}

void run_solve2d(const ScenarioConfig& c, ScenarioReport& rep) {
    if (c.d != 2) throw config_error("solve2d is a planar scenario (d = 2)");
    if (c.domain.kind != "annulus") throw config_error("solve2d needs an annulus domain");
    const AnisotropyMatrix A = c.matrix.build(2);
    const auto grid = AnnularGrid2D::build(A, c.domain.inner, c.domain.outer, c.mesh);

    PlanarEnergySpec spec;
    spec.p = c.p;
    spec.A = A;
    if (c.potential.kind != "zero") {
        const Potential V = c.potential.build(c.p);
        spec.potential = [V](const Eigen::Vector2d& x) { return V.radial(x.norm()); };
    }
    MinimizeOptions opt;
    opt.residual_tol = tol_or(c, 1e-8);
    const double bi = c.bc.inner, bo = c.bc.outer;
    const MinimizeResult res = minimize_dirichlet(
        grid, spec, [bi, bo](const Eigen::Vector2d&, bool inner) { return inner ? bi : bo; },
        opt);

    bool monotone = true;
    for (size_t i = 1; i < res.energies.size(); ++i)
        if (res.energies[i] > res.energies[i - 1]) monotone = false;

    rep.results["interior_nodes"] = grid->num_interior();
    rep.results["energy_first"] = res.energies.front();
    rep.results["energy_final"] = res.energies.back();
    rep.results["iterations"] = res.iterations;
    rep.results["residual"] = res.residual;
    rep.results["converged"] = res.converged;
    rep.checks.push_back(
        {"stationarity", res.converged, res.residual, 0.0, opt.residual_tol});
    rep.checks.push_back({"energy_monotone", monotone, monotone ? 1.0 : 0.0, 1.0, 0.0});
    rep.provenance.push_back({"stationarity", "euler-lagrange-residual"});

    Series field{"field", {"x", "y", "u"}, {}};
    for (int j = 0; j < grid->ny(); ++j)
        for (int i = 0; i < grid->nx(); ++i)
            if (grid->active(i, j)) {
                const auto pos = grid->position(i, j);
                field.rows.push_back({pos[0], pos[1], res.field.at(i, j)});
            }
    rep.series.push_back(std::move(field));
    Series energy{"energy", {"step", "E"}, {}};
    for (size_t i = 0; i < res.energies.size(); ++i)
        energy.rows.push_back({double(i), res.energies[i]});
    rep.series.push_back(std::move(energy));
}

void run_harnack(const ScenarioConfig& c, ScenarioReport& rep) {
    if (c.d != 2) throw config_error("harnack is a planar scenario (d = 2)");
    if (c.domain.kind != "annulus") throw config_error("harnack needs an annulus domain");
    if (!(c.bc.inner > 0) || !(c.bc.outer > 0))
        throw config_error("harnack needs positive boundary data");
    const AnisotropyMatrix A = c.matrix.build(2);
    const auto rungs = c.ladder.rungs();
    const double flo = 0.75, fhi = 1.25;
    for (double R : rungs)
        if (!(flo * R > c.domain.inner && fhi * R < c.domain.outer))
            throw config_error("harnack rung bands must sit strictly inside the annulus");

    const auto grid = AnnularGrid2D::build(A, c.domain.inner, c.domain.outer, c.mesh);
    PlanarEnergySpec spec;
    spec.p = c.p;
    spec.A = A;
    if (c.potential.kind == "hardy") {
        // Singular strength measured in the operator's own geometry.
        const double lam = c.potential.lambda, pp = c.p;
        spec.potential = [A, lam, pp](const Eigen::Vector2d& x) {
            return -lam * std::pow(A.anorm_inv(Vec(x)), -pp);
        };
    } else if (c.potential.kind != "zero") {
        const Potential V = c.potential.build(c.p);
        spec.potential = [V](const Eigen::Vector2d& x) { return V.radial(x.norm()); };
    }
    MinimizeOptions opt;
    opt.residual_tol = tol_or(c, 1e-8);
    const double bi = c.bc.inner, bo = c.bc.outer;
    const MinimizeResult res = minimize_dirichlet(
        grid, spec, [bi, bo](const Eigen::Vector2d&, bool inner) { return inner ? bi : bo; },
        opt);

    double vmin = std::numeric_limits<double>::infinity();
    for (int idx : grid->interior_nodes())
        vmin = std::min(vmin, res.field.values[static_cast<size_t>(idx)]);
    const bool positive = vmin > 0;

    std::vector<double> ratios;
    double spread = std::numeric_limits<double>::infinity();
    if (positive) {
        ratios = harnack_ratio(res.field, rungs, flo, fhi);
        const auto [mn, mx] = std::minmax_element(ratios.begin(), ratios.end());
        spread = *mx / *mn;
    }
    const double bound = (c.tolerance > 0 ? c.tolerance : 2.0) * c.tol_scale;

    rep.results["rungs"] = rungs;
    rep.results["ratios"] = ratios;
    rep.results["spread"] = positive ? json(spread) : json(nullptr);
    rep.results["min_interior"] = vmin;
    rep.results["residual"] = res.residual;
    rep.checks.push_back({"positive", positive, vmin, 0.0, 0.0});
    rep.checks.push_back({"ratio_spread", positive && spread <= bound, spread, bound, 0.0});
    rep.provenance.push_back({"ratio_spread", "annulus-band-extrema"});

    Series s{"ratios", {"R", "ratio"}, {}};
    for (size_t i = 0; i < ratios.size(); ++i) s.rows.push_back({rungs[i], ratios[i]});
    rep.series.push_back(std::move(s));
}

void run_kelvin_check(const ScenarioConfig& c, ScenarioReport& rep) {
    if (c.d != 2) throw config_error("kelvin-check is a planar scenario (d = 2)");
    if (!(c.p >= 2)) throw config_error("kelvin-check covers p >= 2");
    if (c.domain.kind != "annulus") throw config_error("kelvin-check needs an annulus domain");
    const AnisotropyMatrix A = c.matrix.build(2);
    const int halvings = std::max(1, c.count);

    const FundamentalSolution fs(c.p, A);
    std::vector<double> meshes, residuals;
    for (int level = 0; level <= halvings; ++level) {
        const double h = c.mesh / double(1 << level);
        // Band deep enough that the inverse image of every image-lattice
        // stencil stays inside the cubic-interpolation coverage.
        const auto grid = AnnularGrid2D::build(A, c.domain.inner, c.domain.outer, h, 8);
        DiscreteField2D u(grid);
        if (c.p == 2.0) {
            u.fill([&A](const Eigen::Vector2d& x) { return -std::log(A.anorm_inv(Vec(x))); });
        } else {
            u.fill([&fs](const Eigen::Vector2d& x) { return fs.value(Vec(x)); });
        }
        meshes.push_back(h);
        residuals.push_back(kelvin_residual(u, c.p));
    }
    std::vector<double> orders;
    double min_order = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i + 1 < residuals.size(); ++i) {
        const double ord = std::log2(residuals[i] / residuals[i + 1]);
        orders.push_back(ord);
        min_order = std::min(min_order, ord);
    }
    rep.results["mesh"] = meshes;
    rep.results["residual"] = residuals;
    rep.results["orders"] = orders;
    rep.checks.push_back({"refinement_order", min_order >= 0.9, min_order, 0.9, 0.0});
    rep.provenance.push_back({"refinement_order", "mesh-refinement"});

    Series s{"orders", {"h", "residual"}, {}};
    for (size_t i = 0; i < meshes.size(); ++i) s.rows.push_back({meshes[i], residuals[i]});
    rep.series.push_back(std::move(s));
}

void run_capacity(const ScenarioConfig& c, ScenarioReport& rep) {
    const CapacityNormalization norm = c.capacity.normalization == "full"
                                           ? CapacityNormalization::full
                                           : CapacityNormalization::per_unit_sphere;
    const double closed = weighted_capacity(c.p, c.d, c.beta, c.capacity.r, c.capacity.R, norm);
    const double quad =
        weighted_capacity_quadrature(c.p, c.d, c.beta, c.capacity.r, c.capacity.R, norm);
    const double rel = std::abs(closed - quad) / std::max(std::abs(closed), 1e-300);
    const double tol = tol_or(c, 1e-6);

    rep.results["closed_form"] = closed;
    rep.results["quadrature"] = quad;
    rep.results["kappa"] = (c.p - c.d - c.beta) / (c.p - 1.0);
    rep.results["relative_error"] = rel;
    rep.checks.push_back({"cross_check", rel <= tol, rel, 0.0, tol});
    rep.provenance.push_back({"closed_form", "closed-form"});
    rep.provenance.push_back({"quadrature", "oracle:quadrature"});
}

void run_hardy_check(const ScenarioConfig& c, ScenarioReport& rep) {
    std::mt19937_64 rng(c.seed);
    double min_margin = std::numeric_limits<double>::infinity();
    bool all_hold = true;
    Series s{"bumps", {"a", "b", "amplitude", "lhs", "rhs"}, {}};
    for (int i = 0; i < c.count; ++i) {
        const RadialBump bump = RadialBump::random(rng);
        const auto [lhs, rhs] = hardy_inequality_check(c.p, c.d, bump);
        const double slack = 1e-10 * c.tol_scale * std::max(1.0, std::abs(rhs));
        if (!(lhs >= rhs - slack)) all_hold = false;
        min_margin = std::min(min_margin, lhs - rhs);
        s.rows.push_back({bump.a, bump.b, bump.amplitude, lhs, rhs});
    }
    rep.results["constant"] = hardy_constant(c.p, c.d);
    rep.results["min_margin"] = min_margin;
    rep.results["count"] = c.count;
    rep.checks.push_back({"inequality", all_hold, min_margin, 0.0, 0.0});
    rep.provenance.push_back({"inequality", "quadrature"});
    rep.series.push_back(std::move(s));
}

} // namespace

ScenarioReport run_scenario(const ScenarioConfig& config) {
    config.validate();
    ScenarioReport rep;
    rep.inputs = config;
    const std::string& sub = config.subcommand;
    if (sub == "fundamental") run_fundamental(config, rep);
    else if (sub == "morrey-norm") run_morrey_norm(config, rep);
    else if (sub == "fuchsian-check") run_fuchsian_check(config, rep);
    else if (sub == "dilation-probe") run_dilation_probe(config, rep);
    else if (sub == "radial-solve") run_radial_solve(config, rep);
    else if (sub == "ratio-limit") run_ratio_limit(config, rep);
    else if (sub == "criticality-probe") run_criticality_probe(config, rep);
    else if (sub == "solve2d") run_solve2d(config, rep);
    else if (sub == "harnack") run_harnack(config, rep);
    else if (sub == "kelvin-check") run_kelvin_check(config, rep);
    else if (sub == "capacity") run_capacity(config, rep);
    else if (sub == "hardy-check") run_hardy_check(config, rep);
    else throw config_error("unknown subcommand: " + sub);
    return rep;
}

void write_report_files(const ScenarioReport& rep, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + out_dir);
    auto write = [&](const std::string& name, const std::string& text) {
        const fs::path path = fs::path(out_dir) / name;
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open " + path.string());
        f << text;
        if (!f) throw std::runtime_error("write failed for " + path.string());
    };
    write("report.json", rep.emit_json() + "\n");
    // Timestamps live here, away from the deterministic report.
    json meta;
    meta["generator"] = "qlap";
    meta["timestamp"] = []() {
        char buf[32];
        const std::time_t now = std::time(nullptr);
        std::tm tm{};
        gmtime_r(&now, &tm);
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
        return std::string(buf);
    }();
    write("metadata.json", meta.dump(2) + "\n");
    for (const auto& s : rep.series) write(s.name + ".csv", series_csv(s));
}

int run_and_write(const ScenarioConfig& config, const std::string& out_dir) {
    const ScenarioReport rep = run_scenario(config);
    if (!out_dir.empty()) write_report_files(rep, out_dir);
    return rep.all_passed() ? 0 : 1;
}

} // namespace qlap
