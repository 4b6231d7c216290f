#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dra/scenario.hpp"

namespace {

struct CommonArgs {
    std::string scenario_path;
    std::string rule;
    std::string attack;
    std::string b;  // integer or "auto"
    double tau = -1.0;
    int iters = -1;
    std::int64_t seed = -1;
    std::string out_dir;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--scenario", args.scenario_path, "Scenario JSON file")->required();
    cmd->add_option("--rule", args.rule, "Override aggregation rule (mean|ctm|ios|scc)");
    cmd->add_option("--attack", args.attack, "Override attack preset for every Byzantine agent");
    cmd->add_option("--b", args.b, "Override trim count (integer or 'auto')");
    cmd->add_option("--tau", args.tau, "Override clipping radius");
    cmd->add_option("--iters", args.iters, "Override iteration count");
    cmd->add_option("--seed", args.seed, "Override run seed");
    cmd->add_option("--out", args.out_dir, "Output directory");
}

dra::Scenario load_with_overrides(const CommonArgs& args) {
    dra::Scenario sc = dra::load_scenario(args.scenario_path);
    if (!args.rule.empty()) sc.aggregator.rule = dra::agg_rule_from_string(args.rule);
    if (!args.attack.empty()) {
        sc.attack = args.attack;
        sc.attack_by_id.clear();
    }
    if (!args.b.empty()) {
        if (args.b == "auto") {
            sc.aggregator.auto_b = true;
        } else {
            sc.aggregator.auto_b = false;
            sc.aggregator.b = std::stoi(args.b);
        }
    }
    if (args.tau >= 0.0) sc.aggregator.tau = args.tau;
    if (args.iters > 0) sc.iterations = args.iters;
    if (args.seed >= 0) sc.seed = static_cast<std::uint64_t>(args.seed);
    return sc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic simulator for decentralized resource allocation under Byzantine attacks"};
    app.require_subcommand(1);

    CommonArgs run_args, sweep_args, oracle_args, bounds_args, estimate_args;
    bool dump_state = false;
    std::string sweep_param;
    std::string sweep_values;
    double rho = -1.0;
    int trials = 1000;
    int byz_per_node = 1;

    CLI::App* cmd_run = app.add_subcommand("run", "Execute one scenario and write its trace CSV");
    add_common(cmd_run, run_args);
    cmd_run->add_flag("--dump-state", dump_state, "Also write the per-iteration state dump JSON");

    CLI::App* cmd_sweep = app.add_subcommand("sweep", "Run the scenario across a parameter list");
    add_common(cmd_sweep, sweep_args);
    cmd_sweep->add_option("--param", sweep_param, "Swept parameter (B|b|tau|seed|iterations)")->required();
    cmd_sweep->add_option("--values", sweep_values, "Comma-separated values")->required();

    CLI::App* cmd_oracle = app.add_subcommand("oracle", "Write the reference primal-dual solution JSON");
    add_common(cmd_oracle, oracle_args);

    CLI::App* cmd_bounds = app.add_subcommand("bounds", "Write the convergence-bound report JSON");
    add_common(cmd_bounds, bounds_args);
    cmd_bounds->add_option("--rho", rho, "Contraction constant to plug into the bounds");

    CLI::App* cmd_estimate = app.add_subcommand("estimate", "Empirically estimate the contraction constant");
    add_common(cmd_estimate, estimate_args);
    cmd_estimate->add_option("--trials", trials, "Number of randomized trials");
    cmd_estimate->add_option("--byz-per-node", byz_per_node, "Injected Byzantine messages per trial");

    CLI11_PARSE(app, argc, argv);

    try {
        std::string subcommand;
        const CommonArgs* args = nullptr;
        if (cmd_run->parsed()) {
            subcommand = "run";
            args = &run_args;
        } else if (cmd_sweep->parsed()) {
            subcommand = "sweep";
            args = &sweep_args;
        } else if (cmd_oracle->parsed()) {
            subcommand = "oracle";
            args = &oracle_args;
        } else if (cmd_bounds->parsed()) {
            subcommand = "bounds";
            args = &bounds_args;
        } else {
            subcommand = "estimate";
            args = &estimate_args;
        }

        const dra::Scenario scenario = load_with_overrides(*args);
        dra::CommandOptions options;
        options.out_dir = args->out_dir;
        options.dump_state = dump_state;
        options.sweep_param = sweep_param;
        if (!sweep_values.empty()) {
            std::size_t pos = 0;
            while (pos <= sweep_values.size()) {
                const std::size_t comma = sweep_values.find(',', pos);
                const std::string tok = sweep_values.substr(pos, comma - pos);
                if (!tok.empty()) options.sweep_values.push_back(std::stod(tok));
                if (comma == std::string::npos) break;
                pos = comma + 1;
            }
        }
        if (rho >= 0.0) options.rho = rho;
        options.trials = trials;
        options.byz_per_node = byz_per_node;

        const std::vector<std::string> written = dra::run_command(scenario, subcommand, options);
        for (const std::string& path : written) std::cout << path << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
