#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "qsdp/errors.hpp"
#include "qsdp/rng.hpp"
#include "qsdp/substochastic_matrix.hpp"
#include "support.hpp"

using qsdp::ConfigError;
using qsdp::SubstochasticMatrix;
using qsdp_test::ScriptedRng;

TEST_CASE("entries, row sums and absorption of the running example") {
    const auto m = qsdp_test::running_example();
    CHECK(m.size() == 2);
    CHECK(m.entry(0, 0) == 0.5);
    CHECK(m.entry(0, 1) == 0.3);
    CHECK(m.entry(1, 0) == 0.4);
    CHECK(m.entry(1, 1) == 0.4);
    CHECK(m.row_sum(0) == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(m.absorption_probability(0) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(m.absorption_probability(1) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(m.validate().ok());
}

TEST_CASE("row sums just above 1 are clamped, not rejected") {
    const auto m = SubstochasticMatrix::from_rows({{0.6, 0.4 + 5e-13}, {0.3, 0.3}});
    CHECK(m.validate().ok());
    CHECK(m.row_sum(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.absorption_probability(0) <= 1e-12);
    CHECK(m.row_sum(1) == 0.6);
}

TEST_CASE("shape violations throw at construction") {
    CHECK_THROWS_AS(SubstochasticMatrix::from_rows({}), std::invalid_argument);
    CHECK_THROWS_AS(SubstochasticMatrix::from_rows({{0.5, 0.3}, {0.4}}),
                    std::invalid_argument);
}

TEST_CASE("content violations are reported, not thrown") {
    const auto negative = SubstochasticMatrix::from_rows({{-0.1, 0.5}, {0.4, 0.4}});
    auto report = negative.validate();
    REQUIRE(!report.ok());
    CHECK(report.violations.front().find("(0,0)") != std::string::npos);

    const auto dead_row = SubstochasticMatrix::from_rows({{0.0, 0.0}, {0.4, 0.4}});
    report = dead_row.validate();
    REQUIRE(!report.ok());
    CHECK(report.violations.front().find("zero survival") != std::string::npos);

    const auto heavy = SubstochasticMatrix::from_rows({{0.8, 0.4}, {0.4, 0.4}});
    report = heavy.validate();
    REQUIRE(!report.ok());
    CHECK(report.violations.front().find("> 1") != std::string::npos);

    const auto nan_entry =
        SubstochasticMatrix::from_rows({{std::nan(""), 0.5}, {0.4, 0.4}});
    CHECK(!nan_entry.validate().ok());
}

TEST_CASE("sample_step maps the unit interval onto the row plus absorption") {
    const auto m = qsdp_test::running_example();
    ScriptedRng rng;
    rng.uniforms = {0.2, 0.5, 0.85};

    auto out = m.sample_step(0, rng);
    REQUIRE(out.is_alive());
    CHECK(out.state() == 0);

    out = m.sample_step(0, rng);
    REQUIRE(out.is_alive());
    CHECK(out.state() == 1);

    // 0.85 is past the total row mass 0.8: the trailing interval absorbs.
    out = m.sample_step(0, rng);
    CHECK(!out.is_alive());
}

TEST_CASE("sample_step frequencies match the row") {
    const auto m = qsdp_test::running_example();
    qsdp::Rng rng(11);
    const int n = 100000;
    long hits0 = 0, hits1 = 0, absorbed = 0;
    for (int i = 0; i < n; ++i) {
        const auto out = m.sample_step(0, rng);
        if (!out.is_alive())
            ++absorbed;
        else if (out.state() == 0)
            ++hits0;
        else
            ++hits1;
    }
    CHECK(static_cast<double>(hits0) / n == doctest::Approx(0.5).epsilon(0.02));
    CHECK(static_cast<double>(hits1) / n == doctest::Approx(0.3).epsilon(0.03));
    CHECK(static_cast<double>(absorbed) / n == doctest::Approx(0.2).epsilon(0.03));
}

TEST_CASE("kernel json round trip and schema rejection") {
    const std::string good = R"({"size": 2, "rows": [[0.5, 0.3], [0.4, 0.4]]})";
    const auto m = SubstochasticMatrix::from_json_text(good);
    CHECK(m.size() == 2);
    CHECK(m.entry(0, 1) == 0.3);

    CHECK_THROWS_AS(SubstochasticMatrix::from_json_text("{nope"), ConfigError);
    CHECK_THROWS_AS(SubstochasticMatrix::from_json_text(R"([1, 2])"), ConfigError);
    CHECK_THROWS_AS(SubstochasticMatrix::from_json_text(R"({"rows": [[1.0]]})"),
                    ConfigError);
    CHECK_THROWS_AS(SubstochasticMatrix::from_json_text(R"({"size": 1})"), ConfigError);
    CHECK_THROWS_AS(
        SubstochasticMatrix::from_json_text(R"({"size": 0, "rows": []})"), ConfigError);
    CHECK_THROWS_AS(SubstochasticMatrix::from_json_text(
                        R"({"size": 1, "rows": [[0.9]], "extra": 1})"),
                    ConfigError);
    CHECK_THROWS_AS(
        SubstochasticMatrix::from_json_text(R"({"size": 2, "rows": [[0.5, 0.3]]})"),
        ConfigError);
    CHECK_THROWS_AS(SubstochasticMatrix::from_json_text(
                        R"({"size": 1, "rows": [["x"]]})"),
                    ConfigError);
    // Structurally fine but invalid as a kernel: rejected at load time.
    CHECK_THROWS_AS(
        SubstochasticMatrix::from_json_text(R"({"size": 1, "rows": [[1.5]]})"),
        ConfigError);

    try {
        SubstochasticMatrix::from_json_text(R"({"size": 1, "rows": [[0.9]], "extra": 1})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("extra") != std::string::npos);
    }
}

TEST_CASE("kernel json file loading") {
    const std::string path = "/tmp/qsdp_test_kernel.json";
    {
        std::ofstream out(path);
        out << R"({"size": 2, "rows": [[0.5, 0.3], [0.4, 0.4]]})";
    }
    const auto m = SubstochasticMatrix::load_json_file(path);
    CHECK(m.entry(1, 0) == 0.4);
    std::remove(path.c_str());

    CHECK_THROWS_AS(SubstochasticMatrix::load_json_file("/tmp/qsdp_no_such_file.json"),
                    ConfigError);
}
