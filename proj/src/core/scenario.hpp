#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/geometry.hpp"
#include "core/morrey.hpp"
#include "core/potential.hpp"

namespace qlap {

// Configuration problems (unknown subcommand, bad JSON, invalid field values)
// as opposed to numeric failures during a run.
struct config_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct MatrixSpec {
    std::string kind = "identity"; // identity | diagonal | full
    std::vector<double> values;    // diagonal entries, or row-major d*d

    AnisotropyMatrix build(int d) const;
};

struct PotentialSpec {
    std::string kind = "zero"; // zero | power_law | hardy | annulus_bump | table
    double coefficient = 1.0;  // power_law / annulus_bump strength
    double exponent = 0.0;     // power_law degree
    double lambda = 0.0;       // hardy strength (enters as -lambda |x|^{-p})
    double inner = 0.5;        // annulus_bump support
    double outer = 1.5;
    std::vector<double> radii, values; // table samples

    Potential build(double p) const;
};

struct DomainSpec {
    std::string kind = "annulus"; // annulus | ball
    double inner = 0.5;
    double outer = 2.0;
    double radius = 1.0;          // ball radius
    std::vector<double> center;   // ball center (defaults to the origin)

    Window build(const AnisotropyMatrix& A) const;
};

struct LadderSpec {
    double start = 1.0;
    double factor = 0.5;
    int count = 6;
    std::string zeta = "origin"; // origin | infinity

    std::vector<double> rungs() const;
    Zeta zeta_point() const;
};

struct BoundarySpec {
    double inner = 1.0;
    double outer = 0.0;
};

struct CapacitySpec {
    double r = 0.1;
    double R = 1.0;
    std::string normalization = "full"; // full | per_unit_sphere
};

// One scenario invocation: every field is serialized, so emit() -> parse() is
// the identity and reports echo the exact inputs.  Unset q (0) and tolerance
// (0) pick per-subcommand defaults at run time.
struct ScenarioConfig {
    std::string version = "1";
    std::string subcommand;
    double p = 2.0;
    int d = 2;
    double q = 0.0;
    MatrixSpec matrix;
    PotentialSpec potential;
    DomainSpec domain;
    LadderSpec ladder;
    BoundarySpec bc;
    CapacitySpec capacity;
    std::vector<double> radii;   // evaluation radii (flux shells etc.)
    double tolerance = 0.0;
    double tol_scale = 1.0;
    int cells = 2048;            // radial solver resolution
    double mesh = 1.0 / 64;      // planar lattice width
    double beta = 0.0;           // capacity weight exponent
    double scale = 2.0;          // dilation factor for identity checks
    double probe_radius = 2.0;
    int count = 20;              // randomized-suite size
    std::uint64_t seed = 0;

    // Parses a JSON document; unknown subcommands and malformed fields throw
    // config_error.  Missing fields take subcommand-specific defaults.
    static ScenarioConfig parse(const std::string& text);
    static ScenarioConfig from_json(const nlohmann::ordered_json& j);
    nlohmann::ordered_json to_json() const;
    std::string emit() const;
    void validate() const;
};

// Per-subcommand defaults as a JSON overlay (applied under the user's
// document, so explicit fields always win).
nlohmann::ordered_json scenario_defaults(const std::string& subcommand);

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0;     // measured quantity
    double reference = 0; // target it is compared against
    double tolerance = 0; // 0 for exact / boolean checks
};

struct ProvenanceTag {
    std::string name;   // value or check the tag describes
    std::string source; // e.g. closed-form, oracle:quadrature, solver
};

struct Series {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct ScenarioReport {
    ScenarioConfig inputs;
    nlohmann::ordered_json results = nlohmann::ordered_json::object();
    std::vector<CheckResult> checks;
    std::vector<ProvenanceTag> provenance;
    std::vector<Series> series;

    bool all_passed() const;
    // Deterministic: same config, same bytes.  Timestamps never appear here;
    // run_and_write keeps them in a separate metadata file.
    nlohmann::ordered_json to_json() const;
    std::string emit_json() const;
};

ScenarioReport run_scenario(const ScenarioConfig& config);

// Header row plus %.17g data rows, deterministic column order.
std::string series_csv(const Series& s);

// Writes report.json, metadata.json and one <series>.csv per series under
// out_dir (created if missing).  I/O failures throw runtime_error naming the
// path.
void write_report_files(const ScenarioReport& rep, const std::string& out_dir);

// run_scenario + write_report_files; returns 0 when every check passed, 1
// otherwise.
int run_and_write(const ScenarioConfig& config, const std::string& out_dir);

} // namespace qlap
