#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dra/graph.hpp"
#include "dra/vecmath.hpp"

namespace dra {

enum class AggRule { mean, ctm, ios, scc };

AggRule agg_rule_from_string(const std::string& name);
std::string to_string(AggRule rule);

struct AggregatorConfig {
    AggRule rule = AggRule::mean;
    int b = 0;          // trim/discard count for ctm and ios
    double tau = 0.0;   // clipping radius for scc
    bool auto_b = false;  // per-recipient b = its Byzantine neighbor count

    void validate() const;
};

// One aggregation call as seen by a recipient: its own half-step dual vector
// plus the received (sender id, message) pairs. Honest and Byzantine messages
// are indistinguishable here.
struct AggregationInput {
    Vec own;
    std::vector<std::pair<int, Vec>> received;
};

// Mixing weights local to one recipient, aligned with AggregationInput::received.
struct LocalWeights {
    double self = 1.0;
    std::vector<double> received;

    static LocalWeights uniform(std::size_t n_received);
};

Vec aggregate_mean(const AggregationInput& input, const LocalWeights& weights);

// Per dimension: drop the b smallest and b largest received values, then
// average the survivors together with the own value, unweighted.
// Requires |received| > 2b.
Vec aggregate_ctm(const AggregationInput& input, int b);

// Iteratively removes the received message farthest from the weight-
// renormalized average of the remaining candidate set (own is never removed;
// ties break toward the lowest sender id). Requires |received| > b.
Vec aggregate_ios(const AggregationInput& input, int b, const LocalWeights& weights);

// Clips every received message into the radius-tau ball around the own value,
// then takes the weighted average over self and received.
Vec aggregate_scc(const AggregationInput& input, double tau, const LocalWeights& weights);

// Dispatch on config.rule; b_override >= 0 replaces config.b (per-agent trim
// counts under auto_b).
Vec aggregate(const AggregatorConfig& config, const AggregationInput& input, const LocalWeights& weights,
              int b_override = -1);

struct ContractionTrialOptions {
    int dim = 1;
    double spread = 1.0;  // scale of the honest message dispersion
};

// Randomized empirical estimate of the contraction constant: the largest
// observed ||AGG_i - weighted honest average|| over the largest honest
// deviation, with Byzantine messages placed adversarially (worst of a far
// outlier, a cluster-edge mimic, and a reflected mean). Trials whose
// denominator vanishes are skipped; a lower bound on the true constant.
double estimate_contraction(const AggregatorConfig& rule, const WeightMatrix& E, const Topology& honest_topology,
                            int byz_count_per_node, int trials, std::uint64_t seed,
                            const ContractionTrialOptions& options = {});

}  // namespace dra
