// nlrd: run | list-scenarios | emit-default-config
//
// Exit codes: 0 every gate passed, 1 some gate failed, 2 configuration or usage
// error, 3 runtime failure.

#include <CLI11.hpp>

#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "nlrd/config.hpp"
#include "nlrd/run.hpp"
#include "nlrd/scenarios.hpp"

namespace {

constexpr int exit_config = 2;
constexpr int exit_runtime = 3;

void print_issues(const nlrd::ConfigError& e) {
    std::cerr << "nlrd: " << e.what() << '\n';
    for (const auto& issue : e.issues()) {
        std::cerr << "  ";
        if (issue.line > 0) std::cerr << "line " << issue.line << ": ";
        if (!issue.key.empty()) std::cerr << issue.key << ": ";
        std::cerr << issue.reason << '\n';
    }
}

int cmd_run(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "nlrd: cannot read config file '" << path << "'\n";
        return exit_config;
    }
    std::ostringstream text;
    text << in.rdbuf();
    nlrd::RunConfig config;
    try {
        config = nlrd::parse_config(text.str());
    } catch (const nlrd::ConfigError& e) {
        print_issues(e);
        return exit_config;
    }
    const nlrd::RunOutcome outcome = nlrd::run_scenario(config, std::cout);
    std::cout << (outcome.exit_code == 0 ? "result: pass" : "result: FAIL") << '\n';
    return outcome.exit_code;
}

int cmd_list() {
    for (const auto& s : nlrd::scenarios())
        std::cout << s.name << "  [" << nlrd::to_string(s.defaults().experiment.kind) << "]  " << s.description << '\n';
    return 0;
}

int cmd_emit(const std::string& name) {
    try {
        std::cout << nlrd::emit_config(nlrd::default_config(name));
    } catch (const std::out_of_range& e) {
        std::cerr << "nlrd: " << e.what() << '\n';
        return exit_config;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pullback attractor experiments for nonlocal reaction-diffusion families"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "run the experiment described by a config file");
    run->add_option("config", config_path, "config file")->required();

    app.add_subcommand("list-scenarios", "list built-in scenarios");

    std::string scenario;
    auto* emit = app.add_subcommand("emit-default-config", "print the default config of a scenario");
    emit->add_option("scenario", scenario, "scenario name")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    try {
        if (run->parsed()) return cmd_run(config_path);
        if (emit->parsed()) return cmd_emit(scenario);
        return cmd_list();
    } catch (const nlrd::ConfigError& e) {
        print_issues(e);
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "nlrd: runtime error: " << e.what() << '\n';
        return exit_runtime;
    }
}
