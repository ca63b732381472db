// Scenario runner over the shared-library C interface.  Subcommand flags are
// assembled into a JSON config; --config merges a file on top of them (file
// values win), so saved configs reproduce runs exactly.
//
// Exit codes: 0 all checks passed, 1 numeric failure or failed check,
// 2 configuration / I/O problems.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qlap/qlap.h"

namespace {

using json = nlohmann::ordered_json;

void set_path(json& doc, const std::string& path, json value) {
    const auto pos = path.find('.');
    if (pos == std::string::npos) {
        doc[path] = std::move(value);
        return;
    }
    set_path(doc[path.substr(0, pos)], path.substr(pos + 1), std::move(value));
}

// One subcommand's flag set; values are only copied into the JSON document
// when the user actually passed the flag, so scenario defaults still apply.
struct SubOptions {
    CLI::App* cmd = nullptr;
    json doc;
    std::vector<std::function<void()>> emitters;

    // Keep addresses stable for CLI11.
    std::vector<std::unique_ptr<double>> doubles;
    std::vector<std::unique_ptr<int>> ints;
    std::vector<std::unique_ptr<std::uint64_t>> uints;
    std::vector<std::unique_ptr<std::string>> strings;
    std::vector<std::unique_ptr<std::vector<double>>> dlists;

    void add_double(const std::string& flag, const std::string& path, const std::string& desc) {
        doubles.push_back(std::make_unique<double>(0));
        double* slot = doubles.back().get();
        cmd->add_option(flag, *slot, desc);
        emitters.push_back([this, flag, path, slot] {
            if (cmd->count(flag)) set_path(doc, path, *slot);
        });
    }
    void add_int(const std::string& flag, const std::string& path, const std::string& desc) {
        ints.push_back(std::make_unique<int>(0));
        int* slot = ints.back().get();
        cmd->add_option(flag, *slot, desc);
        emitters.push_back([this, flag, path, slot] {
            if (cmd->count(flag)) set_path(doc, path, *slot);
        });
    }
    void add_uint(const std::string& flag, const std::string& path, const std::string& desc) {
        uints.push_back(std::make_unique<std::uint64_t>(0));
        std::uint64_t* slot = uints.back().get();
        cmd->add_option(flag, *slot, desc);
        emitters.push_back([this, flag, path, slot] {
            if (cmd->count(flag)) set_path(doc, path, *slot);
        });
    }
    void add_string(const std::string& flag, const std::string& path, const std::string& desc) {
        strings.push_back(std::make_unique<std::string>());
        std::string* slot = strings.back().get();
        cmd->add_option(flag, *slot, desc);
        emitters.push_back([this, flag, path, slot] {
            if (cmd->count(flag)) set_path(doc, path, *slot);
        });
    }
    void add_dlist(const std::string& flag, const std::string& path, const std::string& desc) {
        dlists.push_back(std::make_unique<std::vector<double>>());
        std::vector<double>* slot = dlists.back().get();
        cmd->add_option(flag, *slot, desc);
        emitters.push_back([this, flag, path, slot] {
            if (cmd->count(flag)) set_path(doc, path, *slot);
        });
    }

    json build(const std::string& subcommand) {
        doc = json::object();
        doc["subcommand"] = subcommand;
        for (auto& e : emitters) e();
        return doc;
    }
};

void add_common_options(SubOptions& o) {
    o.add_double("--p", "p", "exponent p of the operator");
    o.add_int("--d", "d", "space dimension");
    o.add_double("--q", "q", "Morrey exponent (0 = automatic)");
    o.add_string("--matrix", "matrix.kind", "coefficient matrix kind: identity|diagonal|full");
    o.add_dlist("--matrix-values", "matrix.values", "diagonal entries or row-major values");
    o.add_string("--potential", "potential.kind",
                 "potential kind: zero|power_law|hardy|annulus_bump|table");
    o.add_double("--lambda", "potential.lambda", "Hardy coupling strength");
    o.add_double("--coefficient", "potential.coefficient", "power-law / bump coefficient");
    o.add_double("--exponent", "potential.exponent", "power-law exponent");
    o.add_double("--support-inner", "potential.inner", "bump support inner radius");
    o.add_double("--support-outer", "potential.outer", "bump support outer radius");
    o.add_string("--domain", "domain.kind", "domain kind: annulus|ball");
    o.add_double("--inner", "domain.inner", "domain inner radius");
    o.add_double("--outer", "domain.outer", "domain outer radius");
    o.add_double("--radius", "domain.radius", "ball radius");
    o.add_double("--bc-inner", "bc.inner", "Dirichlet value on the inner rim");
    o.add_double("--bc-outer", "bc.outer", "Dirichlet value on the outer rim");
    o.add_double("--ladder-start", "ladder.start", "first ladder value");
    o.add_double("--ladder-factor", "ladder.factor", "ladder ratio");
    o.add_int("--ladder-count", "ladder.count", "number of ladder rungs");
    o.add_string("--zeta", "ladder.zeta", "singular point: origin|infinity");
    o.add_dlist("--radii", "radii", "evaluation radii");
    o.add_double("--tolerance", "tolerance", "check tolerance (0 = default)");
    o.add_int("--cells", "cells", "radial solver cells");
    o.add_double("--mesh", "mesh", "planar lattice width");
    o.add_double("--beta", "beta", "capacity weight exponent");
    o.add_double("--scale", "scale", "dilation factor for identity checks");
    o.add_double("--probe-radius", "probe_radius", "criticality probe radius");
    o.add_double("--capacity-r", "capacity.r", "capacity inner radius");
    o.add_double("--capacity-R", "capacity.R", "capacity outer radius");
    o.add_string("--normalization", "capacity.normalization",
                 "capacity normalization: full|per_unit_sphere");
    o.add_int("--count", "count", "randomized-suite size / refinement count");
}

int fail_config(const std::string& message) {
    std::cerr << "error: " << message << "\n";
    return 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quasilinear operator scenario runner"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    double tol_scale = 1.0;
    app.add_option("--config", config_path, "JSON config file; overrides flags")
        ->envname("QLAP_CONFIG");
    app.add_option("--out", out_dir, "directory for report.json and CSV series");
    auto* seed_opt = app.add_option("--seed", seed, "seed for randomized suites");
    auto* tol_opt = app.add_option("--tol-scale", tol_scale, "multiplies every tolerance");

    const std::vector<std::string> names = {
        "fundamental",   "morrey-norm", "fuchsian-check",    "dilation-probe",
        "radial-solve",  "ratio-limit", "criticality-probe", "solve2d",
        "harnack",       "kelvin-check", "capacity",         "hardy-check"};
    const std::vector<std::string> descriptions = {
        "radial kernel constant and flux normalization",
        "Morrey norm of a potential over a window",
        "uniform boundedness of weighted norms along a scale ladder",
        "iterated-dilation classification of a potential",
        "radial two-point Dirichlet solve",
        "ratio of two local solutions near the singular point",
        "equilibrium-potential dichotomy probe",
        "planar energy minimization on an annulus",
        "per-annulus oscillation ratios of a positive planar solution",
        "inversion invariance under mesh refinement",
        "weighted capacity closed form vs quadrature",
        "Hardy inequality on random test bumps"};

    std::vector<std::unique_ptr<SubOptions>> subs;
    for (size_t i = 0; i < names.size(); ++i) {
        auto sub = std::make_unique<SubOptions>();
        sub->cmd = app.add_subcommand(names[i], descriptions[i]);
        add_common_options(*sub);
        subs.push_back(std::move(sub));
    }

    CLI11_PARSE(app, argc, argv);

    SubOptions* chosen = nullptr;
    std::string chosen_name;
    for (size_t i = 0; i < subs.size(); ++i)
        if (subs[i]->cmd->parsed()) {
            chosen = subs[i].get();
            chosen_name = names[i];
        }
    if (!chosen) return fail_config("no subcommand selected");

    json doc = chosen->build(chosen_name);
    if (seed_opt->count()) doc["seed"] = seed;
    if (tol_opt->count()) doc["tol_scale"] = tol_scale;

    if (!config_path.empty()) {
        std::ifstream f(config_path);
        if (!f) return fail_config("cannot read config file " + config_path);
        std::stringstream buf;
        buf << f.rdbuf();
        json file_doc;
        try {
            file_doc = json::parse(buf.str());
        } catch (const json::exception& e) {
            return fail_config(std::string("config file is not valid JSON: ") + e.what());
        }
        if (!file_doc.is_object()) return fail_config("config file must hold a JSON object");
        doc.merge_patch(file_doc);
    }

    qlap_scenario* scenario = nullptr;
    qlap_status st = qlap_scenario_create(doc.dump().c_str(), &scenario);
    if (st != QLAP_OK) return fail_config(qlap_last_error());
    std::unique_ptr<qlap_scenario, void (*)(qlap_scenario*)> guard(scenario,
                                                                   qlap_scenario_destroy);

    st = qlap_scenario_run(scenario);
    if (st == QLAP_ERR_NUMERIC) {
        std::cerr << "numeric failure: " << qlap_last_error() << "\n";
        return 1;
    }
    if (st != QLAP_OK) return fail_config(qlap_last_error());

    const char* report_text = nullptr;
    if (qlap_scenario_report_json(scenario, &report_text) != QLAP_OK)
        return fail_config(qlap_last_error());
    std::cout << report_text << "\n";

    if (!out_dir.empty()) {
        st = qlap_scenario_write(scenario, out_dir.c_str());
        if (st != QLAP_OK) return fail_config(qlap_last_error());
    }

    int passed = 0;
    if (qlap_scenario_checks_passed(scenario, &passed) != QLAP_OK)
        return fail_config(qlap_last_error());
    if (!passed) {
        // Name the failing checks on stderr so scripts can tell what broke.
        try {
            const json rep = json::parse(report_text);
            for (const auto& c : rep.at("checks"))
                if (!c.at("passed").get<bool>())
                    std::cerr << "check failed: " << c.at("name").get<std::string>() << "\n";
        } catch (const json::exception&) {
            std::cerr << "check failed (report unreadable)\n";
        }
        return 1;
    }
    return 0;
}
