#include <doctest.h>

#include <filesystem>

#include "nlrd/config.hpp"
#include "nlrd/run.hpp"
#include "nlrd/scenarios.hpp"

using namespace nlrd;

namespace {

std::string issues_text(const ConfigError& e) {
    std::string out;
    for (const auto& i : e.issues()) out += i.key + ": " + i.reason + "\n";
    return out;
}

}  // namespace

TEST_CASE("default configs round-trip through text") {
    for (const auto& s : scenarios()) {
        const RunConfig c = default_config(s.name);
        CHECK_NOTHROW(validate(c));
        const std::string text = emit_config(c);
        const RunConfig back = parse_config(text);
        CHECK_MESSAGE(back == c, s.name);
        CHECK(emit_config(back) == text);
    }
}

TEST_CASE("missing keys take scenario defaults") {
    const RunConfig c = parse_config("# minimal\n[family]\nscenario = linear_decay\n[time]\ndt = 0.002\n");
    RunConfig expected = default_config("linear_decay");
    expected.time.dt = 0.002;
    CHECK(c == expected);

    const RunConfig fixed = parse_config("[family]\nscenario = linear_decay\nmu = 3.5\n");
    REQUIRE(fixed.family.mu.has_value());
    CHECK(*fixed.family.mu == 3.5);
    CHECK(build_family(fixed).mu_at(0.5) == 3.5);
}

TEST_CASE("parse errors name the line and key") {
    CHECK_THROWS_AS(parse_config("[family]\nscenario = linear_decay\nbogus = 1\n"), ParseError);
    CHECK_THROWS_AS(parse_config("[nowhere]\nx = 1\n"), ParseError);
    CHECK_THROWS_AS(parse_config("scenario = linear_decay\n"), ParseError);
    CHECK_THROWS_AS(parse_config("[family]\nscenario = linear_decay\nscenario = heat_benchmark\n"), ParseError);
    CHECK_THROWS_AS(parse_config("[family]\nscenario = linear_decay\n[time]\ndt = fast\n"), ParseError);
    try {
        parse_config("[family]\nscenario = linear_decay\nbogus = 1\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        REQUIRE(e.issues().size() == 1);
        CHECK(e.issues()[0].line == 3);
        CHECK(e.issues()[0].key == "family.bogus");
    }
}

TEST_CASE("validation rejects out-of-range values") {
    CHECK_THROWS_AS(parse_config("[grid]\nnodes = 100\n"), ValidationError);  // no scenario
    CHECK_THROWS_AS(parse_config("[family]\nscenario = nope\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("[family]\nscenario = linear_decay\neta_schedule = 0.5, 0.5\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("[family]\nscenario = linear_decay\n[time]\ndt = -1\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("[family]\nscenario = linear_decay\nmu = 1\nmu_fraction = 0.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[family]\nscenario = linear_decay\n[experiment]\nkind = refinement\n"),
                    ValidationError);
    CHECK_THROWS_AS(parse_config("[family]\nscenario = linear_decay\n[experiment]\nkind = dance\n"), ConfigError);
    for (const char* bad : {"mu_fraction = 2", "mu_fraction = 0", "mu = 1000", "mu = -1"}) {
        try {
            parse_config(std::string("[family]\nscenario = linear_decay\n") + bad + "\n");
            FAIL("accepted " << bad);
        } catch (const ValidationError& e) {
            CHECK_MESSAGE(issues_text(e).find("open interval") != std::string::npos, bad);
        }
    }
}

TEST_CASE("experiment kinds have stable names") {
    for (auto k : {ExperimentKind::energy_audit, ExperimentKind::gronwall, ExperimentKind::absorbing,
                   ExperimentKind::conditions, ExperimentKind::attractor, ExperimentKind::robustness,
                   ExperimentKind::finite_time, ExperimentKind::noncommutation, ExperimentKind::refinement})
        CHECK(parse_experiment_kind(to_string(k)) == k);
    CHECK_FALSE(parse_experiment_kind("energy_audit").has_value());
}

TEST_CASE("output directory resolution") {
    RunConfig c = default_config("linear_decay");
    c.experiment.output_dir = "runs/a";
    ::unsetenv(output_root_env);
    CHECK(resolve_output_dir(c) == std::filesystem::path("runs/a"));
    ::setenv(output_root_env, "/tmp/root", 1);
    CHECK(resolve_output_dir(c) == std::filesystem::path("/tmp/root/runs/a"));
    c.experiment.output_dir = "/abs/dir";
    CHECK(resolve_output_dir(c) == std::filesystem::path("/abs/dir"));
    ::unsetenv(output_root_env);
}
