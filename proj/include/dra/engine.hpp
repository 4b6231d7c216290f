#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "dra/aggregation.hpp"
#include "dra/attacks.hpp"
#include "dra/graph.hpp"
#include "dra/oracle.hpp"
#include "dra/problem.hpp"

namespace dra {

enum class ScheduleKind { power, theorem };

// power:   gamma^k = (k+1)^(-exponent)
// theorem: gamma^k = scale / (offset + k)
struct StepSchedule {
    ScheduleKind kind = ScheduleKind::power;
    double exponent = 0.1;
    double scale = 1.0;
    int offset = 2;

    static StepSchedule power(double exponent);
    static StepSchedule theorem(double scale, int offset);
    void validate() const;
};

double step_size(const StepSchedule& schedule, int k);

struct RunConfig {
    ProblemInstance problem;
    Topology topology;
    WeightMatrix weights;
    AggregatorConfig aggregator;
    std::map<int, AttackSpec> attacks;  // Byzantine id -> message generator
    StepSchedule schedule;
    int iterations = 1;
    Vec lambda0;
    bool nonneg_dual = false;  // project duals onto [0, inf) after aggregation
    std::uint64_t seed = 0;

    void validate() const;
};

struct IterationRecord {
    int k = 0;
    double gamma = 0.0;
    std::vector<Vec> theta;   // honest agents, ascending id order
    std::vector<Vec> lambda;
    double primal_opt = 0.0;           // ||Theta^k - Theta*||
    double dual_opt = 0.0;             // sum_i ||lambda_i^k - lambda*||
    double cost_opt = 0.0;             // |f(Theta^k) - f(Theta*)|
    double constraint_violation = 0.0; // ||mean theta^k - s||
    double dual_consensus = 0.0;       // sum_i ||lambda_i^k - mean lambda^k||^2
};

struct Trace {
    std::string config_digest;
    ReferenceSolution reference;
    std::vector<int> honest_ids;
    std::vector<IterationRecord> records;  // exactly iterations+1 entries, k = 0..K
};

// Synchronous rounds of the unfiltered protocol (weighted-average mixing).
// Requires a doubly stochastic weight matrix and no Byzantine agents; metrics
// are measured against the full-population reference solution.
Trace run_attack_free(const RunConfig& config);

// Synchronous rounds with Byzantine senders' messages substituted per
// recipient and honest agents applying the configured robust aggregation.
// Metrics are measured against the honest-population reference solution.
Trace run_resilient(const RunConfig& config);

std::string config_digest(const RunConfig& config);

// CSV columns: k,gamma,primal_opt,dual_opt,cost_opt,constraint_violation,dual_consensus.
// Numbers use the shortest round-trip decimal form, so files are byte-stable.
void write_trace_csv(const Trace& trace, std::ostream& out);

// Optional full state dump (per-iteration honest theta and lambda).
void write_trace_states_json(const Trace& trace, std::ostream& out);

}  // namespace dra
