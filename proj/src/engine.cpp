#include "dra/engine.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iostream>
#include <ostream>
#include <stdexcept>

namespace dra {

StepSchedule StepSchedule::power(double exponent) {
    StepSchedule s;
    s.kind = ScheduleKind::power;
    s.exponent = exponent;
    s.validate();
    return s;
}

StepSchedule StepSchedule::theorem(double scale, int offset) {
    StepSchedule s;
    s.kind = ScheduleKind::theorem;
    s.scale = scale;
    s.offset = offset;
    s.validate();
    return s;
}

void StepSchedule::validate() const {
    if (kind == ScheduleKind::power) {
        if (!(exponent > 0.0)) throw std::invalid_argument("StepSchedule: power exponent must be > 0");
    } else {
        if (!(scale > 0.0)) throw std::invalid_argument("StepSchedule: theorem scale must be > 0");
        if (offset < 2) throw std::invalid_argument("StepSchedule: theorem offset must be >= 2");
    }
}

double step_size(const StepSchedule& schedule, int k) {
    if (k < 0) throw std::invalid_argument("step_size: k must be >= 0");
    if (schedule.kind == ScheduleKind::power) return std::pow(static_cast<double>(k + 1), -schedule.exponent);
    return schedule.scale / static_cast<double>(schedule.offset + k);
}

void RunConfig::validate() const {
    problem.validate();
    topology.validate();
    schedule.validate();
    aggregator.validate();
    if (topology.nodes != problem.total_agents())
        throw std::invalid_argument("RunConfig: topology has " + std::to_string(topology.nodes) +
                                    " nodes, problem has " + std::to_string(problem.total_agents()) + " agents");
    if (weights.n != topology.nodes) throw std::invalid_argument("RunConfig: weight matrix size mismatch");
    if (iterations < 0) throw std::invalid_argument("RunConfig: iterations must be >= 0");
    if (lambda0.size() != problem.dim()) throw std::invalid_argument("RunConfig: lambda0 dimension mismatch");
    for (int id : problem.byzantine) {
        auto it = attacks.find(id);
        if (it == attacks.end())
            throw std::invalid_argument("RunConfig: Byzantine agent " + std::to_string(id) + " has no attack spec");
        it->second.validate(problem.dim());
    }
    for (const auto& [id, spec] : attacks) {
        if (!problem.is_byzantine(id))
            throw std::invalid_argument("RunConfig: attack spec for honest agent " + std::to_string(id));
    }
}

namespace {

struct SubsetView {
    std::vector<int> ids;
    double inv_count = 0.0;
};

double subset_cost(const ProblemInstance& problem, const std::vector<int>& ids, const std::vector<Vec>& theta) {
    double acc = 0.0;
    for (std::size_t k = 0; k < ids.size(); ++k) acc += eval_cost(problem.agents[ids[k]], theta[k]);
    return acc / static_cast<double>(ids.size());
}

IterationRecord make_record(int k, double gamma, const ProblemInstance& problem, const std::vector<int>& ids,
                            std::vector<Vec> theta, std::vector<Vec> lambda, const ReferenceSolution& ref,
                            double ref_cost) {
    IterationRecord rec;
    rec.k = k;
    rec.gamma = gamma;
    const std::size_t D = problem.dim();
    const double n = static_cast<double>(ids.size());

    double primal_sq = 0.0;
    Vec mean_theta(D, 0.0);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        for (std::size_t d = 0; d < D; ++d) {
            const double diff = theta[i][d] - ref.theta_star[i][d];
            primal_sq += diff * diff;
            mean_theta[d] += theta[i][d];
        }
    }
    rec.primal_opt = std::sqrt(primal_sq);

    double cv = 0.0;
    for (std::size_t d = 0; d < D; ++d) {
        const double diff = mean_theta[d] / n - problem.s[d];
        cv += diff * diff;
    }
    rec.constraint_violation = std::sqrt(cv);

    rec.cost_opt = std::abs(subset_cost(problem, ids, theta) - ref_cost);

    Vec mean_lambda(D, 0.0);
    for (const Vec& l : lambda)
        for (std::size_t d = 0; d < D; ++d) mean_lambda[d] += l[d];
    for (double& x : mean_lambda) x /= n;

    double dual_opt = 0.0, consensus = 0.0;
    for (const Vec& l : lambda) {
        dual_opt += dist(l, ref.lambda_star);
        const double dv = dist(l, mean_lambda);
        consensus += dv * dv;
    }
    rec.dual_opt = dual_opt;
    rec.dual_consensus = consensus;

    rec.theta = std::move(theta);
    rec.lambda = std::move(lambda);
    return rec;
}

Trace run_impl(const RunConfig& config, bool resilient) {
    config.validate();
    const ProblemInstance& problem = config.problem;
    const int J = problem.total_agents();
    const std::size_t D = problem.dim();
    const auto adj = config.topology.adjacency();
    const std::vector<int> honest = problem.honest_ids();

    if (!resilient) {
        if (problem.byzantine_count() > 0)
            throw std::invalid_argument("run_attack_free: Byzantine agents present");
        if (!config.weights.doubly_stochastic)
            throw std::invalid_argument("run_attack_free: weight matrix must be doubly stochastic");
    } else {
        // Robust rules must be applicable at every honest agent.
        for (int i : honest) {
            const int deg = static_cast<int>(adj[i].size());
            int b_i = config.aggregator.b;
            if (config.aggregator.auto_b) {
                b_i = 0;
                for (int j : adj[i]) b_i += problem.is_byzantine(j) ? 1 : 0;
            }
            if (config.aggregator.rule == AggRule::ctm && deg <= 2 * b_i)
                throw std::invalid_argument("run_resilient: ctm undefined for agent " + std::to_string(i) +
                                            " (degree " + std::to_string(deg) + " <= 2b=" + std::to_string(2 * b_i) +
                                            ")");
            if (config.aggregator.rule == AggRule::ios && deg <= b_i)
                throw std::invalid_argument("run_resilient: ios undefined for agent " + std::to_string(i) +
                                            " (degree " + std::to_string(deg) + " <= b=" + std::to_string(b_i) + ")");
        }
        const HonestSubgraph sub = honest_subgraph(config.topology, problem.byzantine);
        if (!is_connected(sub.topology))
            std::cerr << "warning: honest subgraph is disconnected; proceeding anyway\n";
    }

    Trace trace;
    trace.config_digest = config_digest(config);
    trace.honest_ids = honest;
    trace.reference = solve_reference(problem, resilient ? Subset::honest_only : Subset::all, 1e-10);
    const double ref_cost = subset_cost(problem, honest, trace.reference.theta_star);

    // Per-agent trim counts for the robust rules (auto_b: exact count of
    // Byzantine neighbors, the omniscient parameter choice).
    std::vector<int> b_for(J, config.aggregator.b);
    if (config.aggregator.auto_b) {
        for (int i = 0; i < J; ++i) {
            int c = 0;
            for (int j : adj[i]) c += problem.is_byzantine(j) ? 1 : 0;
            b_for[i] = c;
        }
    }

    std::vector<Vec> lambda(J, config.lambda0);
    std::vector<Vec> theta(J);
    std::vector<Vec> half(J);
    std::vector<Vec> next(J);
    trace.records.reserve(config.iterations + 1);

    for (int k = 0;; ++k) {
        const double gamma = step_size(config.schedule, k);
        for (int i = 0; i < J; ++i) theta[i] = primal_argmin(problem.agents[i], lambda[i]);

        std::vector<Vec> honest_theta, honest_lambda;
        honest_theta.reserve(honest.size());
        honest_lambda.reserve(honest.size());
        for (int i : honest) {
            honest_theta.push_back(theta[i]);
            honest_lambda.push_back(lambda[i]);
        }
        trace.records.push_back(make_record(k, gamma, problem, honest, std::move(honest_theta),
                                            std::move(honest_lambda), trace.reference, ref_cost));
        if (k == config.iterations) break;

        // Half-step: lambda_i - gamma * ((1/J) s - (1/J) theta_i). Every agent
        // computes one; for Byzantine agents it is only the value they would
        // have sent, exposed to attack callbacks.
        const double invJ = 1.0 / static_cast<double>(J);
        for (int i = 0; i < J; ++i) {
            half[i] = lambda[i];
            for (std::size_t d = 0; d < D; ++d) half[i][d] -= gamma * invJ * (problem.s[d] - theta[i][d]);
        }

        for (int i = 0; i < J; ++i) {
            AggregationInput input;
            input.own = half[i];
            input.received.reserve(adj[i].size());
            LocalWeights weights;
            weights.self = config.weights(i, i);
            weights.received.reserve(adj[i].size());
            for (int j : adj[i]) {
                if (resilient && problem.is_byzantine(j)) {
                    AttackContext ctx;
                    ctx.iteration = k;
                    ctx.recipient = i;
                    ctx.sender = j;
                    ctx.half_steps = &half;
                    ctx.honest_ids = &honest;
                    ctx.sender_half_step = &half[j];
                    input.received.emplace_back(j, byzantine_message(config.attacks.at(j), ctx, D));
                } else {
                    input.received.emplace_back(j, half[j]);
                }
            }
            for (int j : adj[i]) weights.received.push_back(config.weights(i, j));

            if (resilient && !problem.is_byzantine(i)) {
                next[i] = aggregate(config.aggregator, input, weights, b_for[i]);
            } else {
                // Attack-free rounds, and the internal state of Byzantine
                // agents, follow plain weighted-average mixing.
                next[i] = aggregate_mean(input, weights);
            }
            if (config.nonneg_dual) {
                for (double& x : next[i]) x = std::max(x, 0.0);
            }
        }
        lambda.swap(next);
    }
    return trace;
}

void append_double(std::string& out, double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

}  // namespace

Trace run_attack_free(const RunConfig& config) { return run_impl(config, false); }

Trace run_resilient(const RunConfig& config) { return run_impl(config, true); }

std::string config_digest(const RunConfig& config) {
    // FNV-1a over a canonical rendering of everything that affects the run.
    std::string repr;
    repr.reserve(4096);
    auto num = [&repr](double v) {
        append_double(repr, v);
        repr.push_back(',');
    };
    auto integer = [&repr](long long v) {
        repr += std::to_string(v);
        repr.push_back(',');
    };
    integer(config.problem.total_agents());
    for (const AgentSpec& ag : config.problem.agents) {
        for (double v : ag.cost.a) num(v);
        for (double v : ag.cost.b_shift) num(v);
        num(ag.cost.c0);
        for (double v : ag.box.lo) num(v);
        for (double v : ag.box.hi) num(v);
    }
    for (double v : config.problem.s) num(v);
    for (int id : config.problem.byzantine) integer(id);
    for (const auto& [i, j] : config.topology.edges) {
        integer(i);
        integer(j);
    }
    for (double v : config.weights.w) num(v);
    integer(static_cast<int>(config.aggregator.rule));
    integer(config.aggregator.b);
    integer(config.aggregator.auto_b ? 1 : 0);
    num(config.aggregator.tau);
    for (const auto& [id, spec] : config.attacks) {
        integer(id);
        integer(static_cast<int>(spec.kind));
        for (double v : spec.value) num(v);
        num(spec.mean);
        num(spec.stddev);
        integer(static_cast<long long>(spec.seed));
    }
    integer(static_cast<int>(config.schedule.kind));
    num(config.schedule.exponent);
    num(config.schedule.scale);
    integer(config.schedule.offset);
    integer(config.iterations);
    for (double v : config.lambda0) num(v);
    integer(config.nonneg_dual ? 1 : 0);
    integer(static_cast<long long>(config.seed));

    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : repr) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    char buf[17];
    static const char* hex = "0123456789abcdef";
    for (int i = 0; i < 16; ++i) buf[i] = hex[(h >> (60 - 4 * i)) & 0xF];
    buf[16] = '\0';
    return std::string(buf);
}

void write_trace_csv(const Trace& trace, std::ostream& out) {
    std::string line;
    out << "k,gamma,primal_opt,dual_opt,cost_opt,constraint_violation,dual_consensus\n";
    for (const IterationRecord& rec : trace.records) {
        line.clear();
        line += std::to_string(rec.k);
        line.push_back(',');
        append_double(line, rec.gamma);
        line.push_back(',');
        append_double(line, rec.primal_opt);
        line.push_back(',');
        append_double(line, rec.dual_opt);
        line.push_back(',');
        append_double(line, rec.cost_opt);
        line.push_back(',');
        append_double(line, rec.constraint_violation);
        line.push_back(',');
        append_double(line, rec.dual_consensus);
        line.push_back('\n');
        out << line;
    }
}

void write_trace_states_json(const Trace& trace, std::ostream& out) {
    auto write_vec = [&out](const Vec& v) {
        out << "[";
        std::string s;
        for (std::size_t d = 0; d < v.size(); ++d) {
            s.clear();
            append_double(s, v[d]);
            out << (d ? "," : "") << s;
        }
        out << "]";
    };
    out << "{\"config_digest\":\"" << trace.config_digest << "\",\"honest_ids\":[";
    for (std::size_t i = 0; i < trace.honest_ids.size(); ++i) out << (i ? "," : "") << trace.honest_ids[i];
    out << "],\"lambda_star\":";
    write_vec(trace.reference.lambda_star);
    out << ",\"records\":[";
    for (std::size_t r = 0; r < trace.records.size(); ++r) {
        const IterationRecord& rec = trace.records[r];
        out << (r ? "," : "") << "{\"k\":" << rec.k << ",\"theta\":[";
        for (std::size_t i = 0; i < rec.theta.size(); ++i) {
            if (i) out << ",";
            write_vec(rec.theta[i]);
        }
        out << "],\"lambda\":[";
        for (std::size_t i = 0; i < rec.lambda.size(); ++i) {
            if (i) out << ",";
            write_vec(rec.lambda[i]);
        }
        out << "]}";
    }
    out << "]}\n";
}

}  // namespace dra
