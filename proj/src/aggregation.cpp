#include "dra/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dra/rng.hpp"

namespace dra {

AggRule agg_rule_from_string(const std::string& name) {
    if (name == "mean") return AggRule::mean;
    if (name == "ctm") return AggRule::ctm;
    if (name == "ios") return AggRule::ios;
    if (name == "scc") return AggRule::scc;
    throw std::invalid_argument("unknown aggregation rule: " + name);
}

std::string to_string(AggRule rule) {
    switch (rule) {
        case AggRule::mean: return "mean";
        case AggRule::ctm: return "ctm";
        case AggRule::ios: return "ios";
        case AggRule::scc: return "scc";
    }
    return "?";
}

void AggregatorConfig::validate() const {
    if (b < 0) throw std::invalid_argument("AggregatorConfig: b must be >= 0");
    if (tau < 0.0) throw std::invalid_argument("AggregatorConfig: tau must be >= 0");
}

LocalWeights LocalWeights::uniform(std::size_t n_received) {
    LocalWeights w;
    const double share = 1.0 / static_cast<double>(n_received + 1);
    w.self = share;
    w.received.assign(n_received, share);
    return w;
}

namespace {

void check_input(const AggregationInput& input) {
    const std::size_t D = input.own.size();
    if (D == 0) throw std::invalid_argument("aggregation: empty own vector");
    for (const auto& [id, msg] : input.received) {
        if (msg.size() != D)
            throw std::invalid_argument("aggregation: message from sender " + std::to_string(id) +
                                        " has wrong dimension");
    }
}

void check_weights(const AggregationInput& input, const LocalWeights& weights) {
    if (weights.received.size() != input.received.size())
        throw std::invalid_argument("aggregation: weights cover " + std::to_string(weights.received.size()) +
                                    " senders, input has " + std::to_string(input.received.size()));
}

}  // namespace

Vec aggregate_mean(const AggregationInput& input, const LocalWeights& weights) {
    check_input(input);
    check_weights(input, weights);
    Vec out(input.own.size(), 0.0);
    axpy(weights.self, input.own, out);
    for (std::size_t r = 0; r < input.received.size(); ++r) {
        axpy(weights.received[r], input.received[r].second, out);
    }
    return out;
}

Vec aggregate_ctm(const AggregationInput& input, int b) {
    check_input(input);
    if (b < 0) throw std::invalid_argument("aggregate_ctm: b must be >= 0");
    const int R = static_cast<int>(input.received.size());
    if (R <= 2 * b)
        throw std::invalid_argument("aggregate_ctm: needs more than 2b=" + std::to_string(2 * b) +
                                    " received messages, got " + std::to_string(R));
    const std::size_t D = input.own.size();
    Vec out(D);
    std::vector<double> column(R);
    for (std::size_t d = 0; d < D; ++d) {
        for (int r = 0; r < R; ++r) column[r] = input.received[r].second[d];
        std::sort(column.begin(), column.end());
        double acc = 0.0;
        for (int r = b; r < R - b; ++r) acc += column[r];
        acc += input.own[d];
        out[d] = acc / static_cast<double>(R - 2 * b + 1);
    }
    return out;
}

Vec aggregate_ios(const AggregationInput& input, int b, const LocalWeights& weights) {
    check_input(input);
    check_weights(input, weights);
    if (b < 0) throw std::invalid_argument("aggregate_ios: b must be >= 0");
    const int R = static_cast<int>(input.received.size());
    if (R <= b)
        throw std::invalid_argument("aggregate_ios: needs more than b=" + std::to_string(b) +
                                    " received messages, got " + std::to_string(R));
    if (b == 0) return aggregate_mean(input, weights);  // nothing to discard
    const std::size_t D = input.own.size();
    std::vector<char> alive(R, 1);

    auto renormalized_average = [&]() {
        Vec avg(D, 0.0);
        double total = weights.self;
        axpy(weights.self, input.own, avg);
        for (int r = 0; r < R; ++r) {
            if (!alive[r]) continue;
            axpy(weights.received[r], input.received[r].second, avg);
            total += weights.received[r];
        }
        if (total <= 0.0) throw std::invalid_argument("aggregate_ios: surviving weights sum to zero");
        for (double& x : avg) x /= total;
        return avg;
    };

    for (int round = 0; round < b; ++round) {
        const Vec avg = renormalized_average();
        int worst = -1;
        double worst_dist = -1.0;
        for (int r = 0; r < R; ++r) {
            if (!alive[r]) continue;
            const double dr = dist(input.received[r].second, avg);
            if (dr > worst_dist ||
                (dr == worst_dist && worst >= 0 && input.received[r].first < input.received[worst].first)) {
                worst = r;
                worst_dist = dr;
            }
        }
        alive[worst] = 0;
    }
    return renormalized_average();
}

Vec aggregate_scc(const AggregationInput& input, double tau, const LocalWeights& weights) {
    check_input(input);
    check_weights(input, weights);
    if (tau < 0.0) throw std::invalid_argument("aggregate_scc: tau must be >= 0");
    const std::size_t D = input.own.size();
    Vec out(D, 0.0);
    axpy(weights.self, input.own, out);
    Vec clipped(D);
    for (std::size_t r = 0; r < input.received.size(); ++r) {
        const Vec& msg = input.received[r].second;
        const double d = dist(msg, input.own);
        if (d <= tau || d == 0.0) {  // inside the ball (or coincident): passes through untouched
            axpy(weights.received[r], msg, out);
            continue;
        }
        const double factor = tau / d;
        for (std::size_t k = 0; k < D; ++k) clipped[k] = input.own[k] + factor * (msg[k] - input.own[k]);
        axpy(weights.received[r], clipped, out);
    }
    return out;
}

Vec aggregate(const AggregatorConfig& config, const AggregationInput& input, const LocalWeights& weights,
              int b_override) {
    const int b = b_override >= 0 ? b_override : config.b;
    switch (config.rule) {
        case AggRule::mean: return aggregate_mean(input, weights);
        case AggRule::ctm: return aggregate_ctm(input, b);
        case AggRule::ios: return aggregate_ios(input, b, weights);
        case AggRule::scc: return aggregate_scc(input, config.tau, weights);
    }
    throw std::logic_error("aggregate: unreachable");
}

double estimate_contraction(const AggregatorConfig& rule, const WeightMatrix& E, const Topology& honest_topology,
                            int byz_count_per_node, int trials, std::uint64_t seed,
                            const ContractionTrialOptions& options) {
    rule.validate();
    if (trials < 1) throw std::invalid_argument("estimate_contraction: trials must be >= 1");
    if (byz_count_per_node < 0) throw std::invalid_argument("estimate_contraction: negative Byzantine count");
    if (E.n != honest_topology.nodes)
        throw std::invalid_argument("estimate_contraction: weight matrix / topology size mismatch");
    const int H = honest_topology.nodes;
    const int D = options.dim;
    const auto adj = honest_topology.adjacency();

    double best = -1.0;
    for (int trial = 0; trial < trials; ++trial) {
        SplitMix64 rng = keyed_stream(seed, 0x4554u /* "ET" */, static_cast<std::uint64_t>(trial));
        const int i = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(H)));
        const auto& nbrs = adj[i];

        // Honest messages over (N_i cap H) u {i}, spread around a random center.
        const double scale = options.spread * std::exp(rng.uniform(-1.0, 1.0));
        Vec center(D);
        for (int d = 0; d < D; ++d) center[d] = rng.uniform(-10.0, 10.0) * options.spread;
        Vec own(D);
        for (int d = 0; d < D; ++d) own[d] = center[d] + scale * rng.gaussian();
        std::vector<std::pair<int, Vec>> honest_msgs;
        honest_msgs.reserve(nbrs.size());
        for (int j : nbrs) {
            Vec m(D);
            for (int d = 0; d < D; ++d) m[d] = center[d] + scale * rng.gaussian();
            honest_msgs.emplace_back(j, std::move(m));
        }

        // Reference point: the E-weighted average over self and honest senders.
        Vec lambda_bar(D, 0.0);
        axpy(E(i, i), own, lambda_bar);
        for (const auto& [j, m] : honest_msgs) axpy(E(i, j), m, lambda_bar);

        double denom = dist(own, lambda_bar);
        const Vec* farthest = &own;
        for (const auto& [j, m] : honest_msgs) {
            const double dj = dist(m, lambda_bar);
            if (dj > denom) {
                denom = dj;
                farthest = &m;
            }
        }
        if (denom <= 1e-30) continue;  // degenerate trial

        // Byzantine placements: try each heuristic for all injected messages
        // and keep the worst resulting ratio.
        std::vector<Vec> candidates;
        {
            Vec outlier(D);
            for (int d = 0; d < D; ++d) outlier[d] = lambda_bar[d] + 1e3 * scale * (rng.uniform() < 0.5 ? -1.0 : 1.0);
            candidates.push_back(std::move(outlier));
            Vec mimic(D);
            for (int d = 0; d < D; ++d) mimic[d] = lambda_bar[d] + 1.001 * ((*farthest)[d] - lambda_bar[d]);
            candidates.push_back(std::move(mimic));
            Vec reflected(D);
            for (int d = 0; d < D; ++d) reflected[d] = 2.0 * lambda_bar[d] - (*farthest)[d];
            candidates.push_back(std::move(reflected));
        }

        const double honest_weight_mean =
            honest_msgs.empty() ? 1.0
                                : [&] {
                                      double acc = 0.0;
                                      for (const auto& [j, m] : honest_msgs) acc += E(i, j);
                                      return acc / static_cast<double>(honest_msgs.size());
                                  }();

        const int variants = byz_count_per_node > 0 ? static_cast<int>(candidates.size()) : 1;
        for (int variant = 0; variant < variants; ++variant) {
            AggregationInput input;
            input.own = own;
            input.received = honest_msgs;
            LocalWeights weights;
            weights.self = E(i, i);
            for (const auto& [j, m] : honest_msgs) weights.received.push_back(E(i, j));
            for (int bmsg = 0; bmsg < byz_count_per_node; ++bmsg) {
                input.received.emplace_back(H + bmsg, candidates[variant]);
                weights.received.push_back(honest_weight_mean);
            }
            double total = weights.self;
            for (double wv : weights.received) total += wv;
            weights.self /= total;
            for (double& wv : weights.received) wv /= total;

            const Vec out = aggregate(rule, input, weights);
            best = std::max(best, dist(out, lambda_bar) / denom);
        }
    }
    if (best < 0.0) throw std::runtime_error("estimate_contraction: all trials skipped (degenerate inputs)");
    return best;
}

}  // namespace dra
