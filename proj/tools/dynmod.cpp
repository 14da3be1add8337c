// dynmod: reproduce the modulated-qubit figures as CSV files
//
//   dynmod <experiment> [--out DIR] [--config FILE] [--<param> value ...]
//   dynmod validate <experiment> [...]
//
// Exit status: 0 on success, 1 on invalid input or failed output, 2 for an
// unknown experiment id.

#include <cstdio>
#include <exception>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dynmod/experiments.hpp"

namespace ex = dynmod::experiments;

namespace {

int fail(const std::string& message, int code = 1) {
    std::fprintf(stderr, "dynmod: error: %s\n", message.c_str());
    return code;
}

std::string experiment_list() {
    std::string s;
    for (const auto& e : ex::registry()) s += "  " + e.id + std::string(8 - std::min<std::size_t>(7, e.id.size()), ' ') + e.description + "\n";
    return s;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Modulated-qubit parameter estimation experiments.\n\nExperiments:\n" + experiment_list()};
    app.set_help_flag("--help", "print this help and exit"); // -h is the step size
    app.set_version_flag("--version", "dynmod 1.0.0");

    std::vector<std::string> command;
    std::string out_dir = ".";
    std::string config;
    app.add_option("command", command, "experiment id, or: validate <experiment id>")->required()->expected(1, 2);
    app.add_option("--out", out_dir, "output directory (created if missing)");
    app.add_option("--config", config, "key = value parameter file; flags take precedence");

    std::map<std::string, std::string> flag_values;
    std::map<std::string, CLI::Option*> flag_options;
    for (const auto& key : ex::known_keys()) {
        flag_options[key.name] = app.add_option(std::string("--") + key.name, flag_values[key.name], key.help);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(e.what());
    }

    const bool validate_only = command.front() == "validate";
    if (validate_only && command.size() != 2) return fail("validate expects exactly one experiment id");
    if (!validate_only && command.size() != 1) return fail("expected a single experiment id");
    const std::string id = validate_only ? command[1] : command[0];

    const ex::Experiment* exp = ex::find_experiment(id);
    if (!exp) return fail("unknown experiment '" + id + "' (run with --help for the list)", 2);

    ex::ParamMap cli;
    for (const auto& [key, opt] : flag_options)
        if (opt->count() > 0) cli[key] = flag_values[key];

    try {
        const ex::ParamMap file = config.empty() ? ex::ParamMap{} : ex::read_config_file(config);
        if (validate_only) {
            ex::Params p;
            try {
                p = ex::resolve(*exp, file, cli);
            } catch (const std::exception& e) {
                std::printf("experiment = %s\ninvalid = %s\n", exp->id.c_str(), e.what());
                return 1;
            }
            std::printf("%s", ex::describe(*exp, p).c_str());
            std::printf("estimated_runtime_s = %s\n", ex::format_number(exp->estimate_seconds(p)).c_str());
            return 0;
        }
        const ex::Params p = ex::resolve(*exp, file, cli);
        const ex::Output output = exp->run(p);
        ex::write_output(output, out_dir);
    } catch (const std::exception& e) {
        return fail(e.what());
    }
    return 0;
}
