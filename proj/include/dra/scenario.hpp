#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dra/engine.hpp"

namespace dra {

// One generator row of the dispatch dataset: cost eta*t^2 + zeta*t + xi over
// capacity [theta_min, theta_max] (MW).
struct GeneratorRecord {
    int id = 0;
    double eta = 0.0;
    double zeta = 0.0;
    double xi = 0.0;
    double theta_min = 0.0;
    double theta_max = 0.0;
};

// CSV with header id,eta,zeta,xi,theta_min,theta_max. With strict ranges the
// coefficients must fall inside the documented dataset bounds.
std::vector<GeneratorRecord> load_generators(const std::string& path, bool strict_paper_ranges = false);
std::vector<GeneratorRecord> read_generators(std::istream& in, bool strict_paper_ranges, const std::string& origin);

struct ProblemSource {
    std::string type;  // synthetic | inline | generator_csv
    // synthetic
    int agents = 0;
    std::pair<double, double> a_range{1.0, 2.0};
    double b_mean = 2.0;
    double b_std = 0.6;
    std::pair<double, double> box{0.0, 100.0};
    std::uint64_t seed = 0;
    // inline
    std::vector<AgentSpec> inline_agents;
    // generator_csv
    std::string path;
    double total_resource = 0.0;
    bool strict_paper_ranges = false;
    // shared
    Vec s;
};

struct TopologySource {
    std::string type;  // random_regular | edge_list | complete
    int degree = 0;
    std::uint64_t seed = 0;
    std::string path;
};

struct ByzantineSource {
    std::vector<int> ids;  // explicit, or drawn when count > 0
    int count = 0;
    std::uint64_t seed = 0;
    int max_byzantine_neighbors = -1;  // -1: unconstrained
};

struct Scenario {
    int schema_version = 1;
    std::string name;
    ProblemSource problem;
    TopologySource topology;
    std::string weight_rule = "equal";          // equal | metropolis
    std::string algorithm = "attack_free";      // attack_free | resilient
    AggregatorConfig aggregator;
    ByzantineSource byzantine;
    std::map<int, std::string> attack_by_id;    // empty -> `attack` applies to every Byzantine agent
    std::string attack;                          // preset name
    StepSchedule schedule;
    int iterations = 2000;
    Vec lambda0;
    bool nonneg_dual = false;
    std::uint64_t seed = 0;
    std::string virtual_weight_rule = "metropolis";  // E construction for diagnostics
    std::string output_dir = "out";
    std::string base_dir;  // directory of the scenario file, for relative paths
};

Scenario load_scenario(const std::string& path);
Scenario scenario_from_json(const nlohmann::json& j, const std::string& base_dir, const std::string& fallback_name);
nlohmann::json scenario_to_json(const Scenario& scenario);

// Materializes the scenario: generates/loads the problem, topology, weights,
// Byzantine set, and attack specs.
RunConfig build_run_config(const Scenario& scenario);

Trace run_scenario(const Scenario& scenario);

struct CommandOptions {
    std::string out_dir;  // overrides scenario.output_dir when set
    bool dump_state = false;
    // sweep
    std::string sweep_param;            // B | b | tau | seed | iterations
    std::vector<double> sweep_values;
    // bounds / estimate
    std::optional<double> rho;
    int trials = 1000;
    int byz_per_node = 1;
};

// run | sweep | oracle | bounds | estimate. Writes artifacts under the output
// directory and returns the paths written.
std::vector<std::string> run_command(const Scenario& scenario, const std::string& subcommand,
                                     const CommandOptions& options);

}  // namespace dra
