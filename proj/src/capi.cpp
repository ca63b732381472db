#include "qlap/qlap.h"

#include <exception>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "core/errors.hpp"
#include "core/fundamental.hpp"
#include "core/geometry.hpp"
#include "core/scenario.hpp"

namespace {

thread_local std::string g_last_error;

qlap_status fail(qlap_status code, const std::string& message) {
    g_last_error = message;
    return code;
}

// Exception-to-status boundary shared by every entry point.
template <class Fn>
qlap_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const qlap::config_error& e) {
        return fail(QLAP_ERR_PARSE, e.what());
    } catch (const qlap::unsupported_error& e) {
        return fail(QLAP_ERR_UNSUPPORTED, e.what());
    } catch (const qlap::numeric_error& e) {
        return fail(QLAP_ERR_NUMERIC, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(QLAP_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::bad_alloc&) {
        return fail(QLAP_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(QLAP_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(QLAP_ERR_INTERNAL, "unknown failure");
    }
}

} // namespace

struct qlap_scenario {
    qlap::ScenarioConfig config;
    qlap::ScenarioReport report;
    bool has_report = false;
    // String storage handed out through the const char* accessors.
    std::string config_json, report_json;
    std::vector<std::string> csv;
};

extern "C" {

const char* qlap_version(void) { return "1.0.0"; }

const char* qlap_last_error(void) { return g_last_error.c_str(); }

qlap_status qlap_scenario_create(const char* config_json, qlap_scenario** out) {
    if (!config_json || !out) return fail(QLAP_ERR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        auto s = std::make_unique<qlap_scenario>();
        s->config = qlap::ScenarioConfig::parse(config_json);
        *out = s.release();
        return QLAP_OK;
    });
}

qlap_status qlap_scenario_config_json(qlap_scenario* s, const char** out) {
    if (!s || !out) return fail(QLAP_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        s->config_json = s->config.emit();
        *out = s->config_json.c_str();
        return QLAP_OK;
    });
}

qlap_status qlap_scenario_run(qlap_scenario* s) {
    if (!s) return fail(QLAP_ERR_INVALID_ARGUMENT, "null scenario");
    return guarded([&] {
        s->report = qlap::run_scenario(s->config);
        s->report_json = s->report.emit_json();
        s->csv.clear();
        for (const auto& series : s->report.series) s->csv.push_back(qlap::series_csv(series));
        s->has_report = true;
        return QLAP_OK;
    });
}

qlap_status qlap_scenario_report_json(const qlap_scenario* s, const char** out) {
    if (!s || !out) return fail(QLAP_ERR_INVALID_ARGUMENT, "null argument");
    if (!s->has_report) return fail(QLAP_ERR_INVALID_ARGUMENT, "scenario has not been run");
    *out = s->report_json.c_str();
    return QLAP_OK;
}

qlap_status qlap_scenario_checks_passed(const qlap_scenario* s, int* out) {
    if (!s || !out) return fail(QLAP_ERR_INVALID_ARGUMENT, "null argument");
    if (!s->has_report) return fail(QLAP_ERR_INVALID_ARGUMENT, "scenario has not been run");
    *out = s->report.all_passed() ? 1 : 0;
    return QLAP_OK;
}

qlap_status qlap_scenario_series_count(const qlap_scenario* s, size_t* out) {
    if (!s || !out) return fail(QLAP_ERR_INVALID_ARGUMENT, "null argument");
    if (!s->has_report) return fail(QLAP_ERR_INVALID_ARGUMENT, "scenario has not been run");
    *out = s->report.series.size();
    return QLAP_OK;
}

qlap_status qlap_scenario_series_name(const qlap_scenario* s, size_t index, const char** out) {
    if (!s || !out) return fail(QLAP_ERR_INVALID_ARGUMENT, "null argument");
    if (!s->has_report) return fail(QLAP_ERR_INVALID_ARGUMENT, "scenario has not been run");
    if (index >= s->report.series.size())
        return fail(QLAP_ERR_INVALID_ARGUMENT, "series index out of range");
    *out = s->report.series[index].name.c_str();
    return QLAP_OK;
}

qlap_status qlap_scenario_series_csv(const qlap_scenario* s, size_t index, const char** out) {
    if (!s || !out) return fail(QLAP_ERR_INVALID_ARGUMENT, "null argument");
    if (!s->has_report) return fail(QLAP_ERR_INVALID_ARGUMENT, "scenario has not been run");
    if (index >= s->csv.size()) return fail(QLAP_ERR_INVALID_ARGUMENT, "series index out of range");
    *out = s->csv[index].c_str();
    return QLAP_OK;
}

qlap_status qlap_scenario_write(const qlap_scenario* s, const char* out_dir) {
    if (!s || !out_dir) return fail(QLAP_ERR_INVALID_ARGUMENT, "null argument");
    if (!s->has_report) return fail(QLAP_ERR_INVALID_ARGUMENT, "scenario has not been run");
    return guarded([&]() -> qlap_status {
        try {
            qlap::write_report_files(s->report, out_dir);
        } catch (const std::runtime_error& e) {
            return fail(QLAP_ERR_IO, e.what());
        }
        return QLAP_OK;
    });
}

void qlap_scenario_destroy(qlap_scenario* s) { delete s; }

qlap_status qlap_fundamental_constant(double p, int d, const double* matrix_row_major,
                                      double* out) {
    if (!out) return fail(QLAP_ERR_INVALID_ARGUMENT, "null out pointer");
    return guarded([&] {
        qlap::AnisotropyMatrix A = qlap::AnisotropyMatrix::identity(d);
        if (matrix_row_major) {
            qlap::Mat m(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) m(i, j) = matrix_row_major[i * d + j];
            A = qlap::AnisotropyMatrix(m);
        }
        *out = qlap::FundamentalSolution(p, A).constant();
        return QLAP_OK;
    });
}

qlap_status qlap_hardy_constant(double p, int d, double* out) {
    if (!out) return fail(QLAP_ERR_INVALID_ARGUMENT, "null out pointer");
    return guarded([&] {
        *out = qlap::hardy_constant(p, d);
        return QLAP_OK;
    });
}

qlap_status qlap_weighted_capacity(double p, int d, double beta, double r, double R,
                                   int per_unit_sphere, double* out) {
    if (!out) return fail(QLAP_ERR_INVALID_ARGUMENT, "null out pointer");
    return guarded([&] {
        *out = qlap::weighted_capacity(p, d, beta, r, R,
                                       per_unit_sphere
                                           ? qlap::CapacityNormalization::per_unit_sphere
                                           : qlap::CapacityNormalization::full);
        return QLAP_OK;
    });
}

qlap_status qlap_indicial_roots(double p, int d, double lambda, double* roots, size_t capacity,
                                size_t* count) {
    if (!count || (capacity > 0 && !roots))
        return fail(QLAP_ERR_INVALID_ARGUMENT, "null out pointer");
    return guarded([&] {
        const qlap::IndicialData data = qlap::indicial_roots(p, d, lambda);
        std::vector<double> expanded = data.roots;
        // The C contract reports multiplicity by repetition; the C++ report
        // carries a flag instead.
        if (data.double_root && expanded.size() == 1) expanded.push_back(expanded[0]);
        *count = expanded.size();
        for (size_t i = 0; i < expanded.size() && i < capacity; ++i) roots[i] = expanded[i];
        return QLAP_OK;
    });
}

} // extern "C"
