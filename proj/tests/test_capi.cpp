#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstring>
#include <filesystem>
#include <string>

#include <unistd.h>

#include "qlap/qlap.h"

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("qlap_capi_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

struct ScenarioHandle {
    qlap_scenario* s = nullptr;
    ~ScenarioHandle() { qlap_scenario_destroy(s); }
};

} // namespace

TEST_CASE("library identifies itself") {
    REQUIRE(qlap_version() != nullptr);
    CHECK(std::strlen(qlap_version()) > 0);
    REQUIRE(qlap_last_error() != nullptr);
}

TEST_CASE("creation rejects null and malformed input with messages") {
    qlap_scenario* s = nullptr;
    CHECK(qlap_scenario_create(nullptr, &s) == QLAP_ERR_INVALID_ARGUMENT);
    CHECK(qlap_scenario_create("{\"subcommand\":\"capacity\"}", nullptr) ==
          QLAP_ERR_INVALID_ARGUMENT);

    CHECK(qlap_scenario_create("not json at all", &s) == QLAP_ERR_PARSE);
    CHECK(s == nullptr);
    CHECK(std::strlen(qlap_last_error()) > 0);

    CHECK(qlap_scenario_create("{\"subcommand\":\"frobnicate\"}", &s) == QLAP_ERR_PARSE);
    CHECK(std::string(qlap_last_error()).find("frobnicate") != std::string::npos);

    qlap_scenario_destroy(nullptr); // harmless on null
}

TEST_CASE("a scenario walks the full lifecycle") {
    ScenarioHandle h;
    REQUIRE(qlap_scenario_create("{\"subcommand\":\"fundamental\"}", &h.s) == QLAP_OK);
    REQUIRE(h.s != nullptr);

    const char* cfg = nullptr;
    REQUIRE(qlap_scenario_config_json(h.s, &cfg) == QLAP_OK);
    CHECK(std::string(cfg).find("\"fundamental\"") != std::string::npos);

    // report accessors gate on run()
    const char* early = nullptr;
    CHECK(qlap_scenario_report_json(h.s, &early) == QLAP_ERR_INVALID_ARGUMENT);

    REQUIRE(qlap_scenario_run(h.s) == QLAP_OK);

    const char* report = nullptr;
    REQUIRE(qlap_scenario_report_json(h.s, &report) == QLAP_OK);
    CHECK(std::string(report).find("\"checks\"") != std::string::npos);

    int passed = -1;
    REQUIRE(qlap_scenario_checks_passed(h.s, &passed) == QLAP_OK);
    CHECK(passed == 1);

    size_t count = 0;
    REQUIRE(qlap_scenario_series_count(h.s, &count) == QLAP_OK);
    REQUIRE(count >= 1);

    const char* name = nullptr;
    REQUIRE(qlap_scenario_series_name(h.s, 0, &name) == QLAP_OK);
    CHECK(std::strlen(name) > 0);

    const char* csv = nullptr;
    REQUIRE(qlap_scenario_series_csv(h.s, 0, &csv) == QLAP_OK);
    CHECK(std::string(csv).find(',') != std::string::npos);
    CHECK(std::string(csv).find('\n') != std::string::npos);

    CHECK(qlap_scenario_series_name(h.s, count, &name) == QLAP_ERR_INVALID_ARGUMENT);
    CHECK(qlap_scenario_series_csv(h.s, count, &csv) == QLAP_ERR_INVALID_ARGUMENT);

    TempDir tmp;
    REQUIRE(qlap_scenario_write(h.s, tmp.path.c_str()) == QLAP_OK);
    CHECK(std::filesystem::exists(tmp.path / "report.json"));
    CHECK(std::filesystem::exists(tmp.path / "metadata.json"));
    CHECK(std::filesystem::exists(tmp.path / (std::string(name) + ".csv")));

    // a plain file is not a writable directory
    CHECK(qlap_scenario_write(h.s, (tmp.path / "report.json").c_str()) == QLAP_ERR_IO);
}

TEST_CASE("numeric breakdowns surface as numeric status") {
    ScenarioHandle h;
    REQUIRE(qlap_scenario_create(
                R"({"subcommand":"radial-solve","potential":{"kind":"hardy","lambda":50.0}})",
                &h.s) == QLAP_OK);
    CHECK(qlap_scenario_run(h.s) == QLAP_ERR_NUMERIC);
    CHECK(std::string(qlap_last_error()).find("bracket") != std::string::npos);
}

TEST_CASE("closed-form helpers return the library values") {
    double v = 0;
    REQUIRE(qlap_fundamental_constant(2, 3, nullptr, &v) == QLAP_OK);
    CHECK(v == doctest::Approx(0.079577471545947673).epsilon(1e-14));

    const double offdiag[4] = {2, 1, 1, 2};
    REQUIRE(qlap_fundamental_constant(4, 2, offdiag, &v) == QLAP_OK);
    CHECK(v == doctest::Approx(-0.67687908320699564).epsilon(1e-14));

    CHECK(qlap_fundamental_constant(2, 3, nullptr, nullptr) == QLAP_ERR_INVALID_ARGUMENT);
    CHECK(qlap_fundamental_constant(0.5, 3, nullptr, &v) == QLAP_ERR_INVALID_ARGUMENT);

    REQUIRE(qlap_hardy_constant(2, 3, &v) == QLAP_OK);
    CHECK(v == doctest::Approx(0.25).epsilon(1e-15));

    REQUIRE(qlap_weighted_capacity(3, 2, 2, 0.1, 1, 0, &v) == QLAP_OK);
    CHECK(v == doctest::Approx(0.33596725753753048).epsilon(1e-14));
    double per = 0;
    REQUIRE(qlap_weighted_capacity(3, 2, 2, 0.1, 1, 1, &per) == QLAP_OK);
    CHECK(v == doctest::Approx(per * 2 * 3.14159265358979323846).epsilon(1e-13));
}

TEST_CASE("indicial roots cross the C boundary with multiplicity") {
    double roots[4] = {0, 0, 0, 0};
    size_t count = 0;

    REQUIRE(qlap_indicial_roots(2, 3, 3.0 / 16, roots, 4, &count) == QLAP_OK);
    REQUIRE(count == 2);
    CHECK(roots[0] == doctest::Approx(-0.75).epsilon(1e-9));
    CHECK(roots[1] == doctest::Approx(-0.25).epsilon(1e-9));

    // the collapsed pair at the threshold is repeated
    REQUIRE(qlap_indicial_roots(2, 3, 0.25, roots, 4, &count) == QLAP_OK);
    REQUIRE(count == 2);
    CHECK(roots[0] == doctest::Approx(-0.5).epsilon(1e-6));
    CHECK(roots[1] == doctest::Approx(roots[0]));

    // beyond the threshold nothing is real
    REQUIRE(qlap_indicial_roots(2, 3, 0.3, roots, 4, &count) == QLAP_OK);
    CHECK(count == 0);

    // capacity 0 only reports the count
    REQUIRE(qlap_indicial_roots(2, 3, 0.0, nullptr, 0, &count) == QLAP_OK);
    CHECK(count == 2);

    // a short buffer is filled as far as it goes
    roots[1] = 99;
    REQUIRE(qlap_indicial_roots(2, 3, 3.0 / 16, roots, 1, &count) == QLAP_OK);
    CHECK(count == 2);
    CHECK(roots[0] == doctest::Approx(-0.75).epsilon(1e-9));
    CHECK(roots[1] == doctest::Approx(99.0));

    CHECK(qlap_indicial_roots(2, 3, 0.0, nullptr, 4, &count) == QLAP_ERR_INVALID_ARGUMENT);
    CHECK(qlap_indicial_roots(2, 3, 0.0, roots, 4, nullptr) == QLAP_ERR_INVALID_ARGUMENT);
}
