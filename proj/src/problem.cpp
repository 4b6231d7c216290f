#include "dra/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dra {

QuadraticCost QuadraticCost::from_poly(double eta, double zeta, double xi) {
    if (!(eta > 0.0)) throw std::invalid_argument("QuadraticCost: eta must be > 0");
    QuadraticCost c;
    c.a = {eta};
    c.b_shift = {-zeta / (2.0 * eta)};
    c.c0 = xi - zeta * zeta / (4.0 * eta);
    return c;
}

double QuadraticCost::value(const Vec& point) const {
    double v = c0;
    for (std::size_t d = 0; d < point.size(); ++d) {
        const double t = point[d] - b_shift[d];
        v += a[d] * t * t;
    }
    return v;
}

Vec QuadraticCost::tilted_argmin(const Vec& lambda, const BoxConstraint& box) const {
    Vec theta(lambda.size());
    for (std::size_t d = 0; d < lambda.size(); ++d) {
        theta[d] = std::clamp(b_shift[d] - lambda[d] / (2.0 * a[d]), box.lo[d], box.hi[d]);
    }
    return theta;
}

void QuadraticCost::validate() const {
    if (a.empty()) throw std::invalid_argument("QuadraticCost: empty coefficient vector");
    if (a.size() != b_shift.size()) throw std::invalid_argument("QuadraticCost: a/b_shift dimension mismatch");
    for (double ad : a) {
        if (!(ad > 0.0) || !std::isfinite(ad)) throw std::invalid_argument("QuadraticCost: every a[d] must be finite and > 0");
    }
    for (double bd : b_shift) {
        if (!std::isfinite(bd)) throw std::invalid_argument("QuadraticCost: b_shift must be finite");
    }
    if (!std::isfinite(c0)) throw std::invalid_argument("QuadraticCost: c0 must be finite");
}

bool BoxConstraint::contains(const Vec& x, double slack) const {
    if (x.size() != lo.size()) return false;
    for (std::size_t d = 0; d < x.size(); ++d) {
        if (x[d] < lo[d] - slack || x[d] > hi[d] + slack) return false;
    }
    return true;
}

void BoxConstraint::validate() const {
    if (lo.empty()) throw std::invalid_argument("BoxConstraint: empty bounds");
    if (lo.size() != hi.size()) throw std::invalid_argument("BoxConstraint: lo/hi dimension mismatch");
    for (std::size_t d = 0; d < lo.size(); ++d) {
        if (!std::isfinite(lo[d]) || !std::isfinite(hi[d]))
            throw std::invalid_argument("BoxConstraint: bounds must be finite");
        if (lo[d] > hi[d])
            throw std::invalid_argument("BoxConstraint: lo > hi at dimension " + std::to_string(d));
    }
}

void AgentSpec::validate() const {
    cost.validate();
    box.validate();
    if (cost.dim() != box.dim())
        throw std::invalid_argument("AgentSpec " + std::to_string(id) + ": cost/box dimension mismatch");
}

ProblemInstance::ProblemInstance(std::vector<AgentSpec> agents_in, Vec s_in, std::set<int> byzantine_in)
    : agents(std::move(agents_in)), s(std::move(s_in)), byzantine(std::move(byzantine_in)) {
    validate();
}

std::vector<int> ProblemInstance::honest_ids() const {
    std::vector<int> ids;
    ids.reserve(agents.size());
    for (const AgentSpec& ag : agents) {
        if (!is_byzantine(ag.id)) ids.push_back(ag.id);
    }
    return ids;
}

void ProblemInstance::validate() const {
    if (agents.empty()) throw std::invalid_argument("ProblemInstance: no agents");
    if (s.empty()) throw std::invalid_argument("ProblemInstance: empty resource target");
    const std::size_t D = s.size();
    for (std::size_t i = 0; i < agents.size(); ++i) {
        if (agents[i].id != static_cast<int>(i))
            throw std::invalid_argument("ProblemInstance: agent ids must be 0..J-1 in order");
        agents[i].validate();
        if (agents[i].dim() != D)
            throw std::invalid_argument("ProblemInstance: agent " + std::to_string(i) + " dimension mismatch");
    }
    for (int id : byzantine) {
        if (id < 0 || id >= total_agents())
            throw std::invalid_argument("ProblemInstance: Byzantine id " + std::to_string(id) + " out of range");
    }
    if (honest_count() < 1) throw std::invalid_argument("ProblemInstance: at least one honest agent required");

    // Feasibility of the honest average constraint: mean lo <= s <= mean hi.
    const std::vector<int> honest = honest_ids();
    for (std::size_t d = 0; d < D; ++d) {
        double mean_lo = 0.0, mean_hi = 0.0;
        for (int id : honest) {
            mean_lo += agents[id].box.lo[d];
            mean_hi += agents[id].box.hi[d];
        }
        mean_lo /= static_cast<double>(honest.size());
        mean_hi /= static_cast<double>(honest.size());
        if (s[d] < mean_lo - 1e-12 || s[d] > mean_hi + 1e-12) {
            throw std::invalid_argument("ProblemInstance: target s[" + std::to_string(d) +
                                        "]=" + std::to_string(s[d]) + " unattainable by honest boxes (mean range [" +
                                        std::to_string(mean_lo) + ", " + std::to_string(mean_hi) + "])");
        }
    }
}

double eval_cost(const AgentSpec& agent, const Vec& theta) {
    check_dim(theta, agent.dim(), "eval_cost: theta");
    return agent.cost.value(theta);
}

Vec primal_argmin(const AgentSpec& agent, const Vec& lambda) {
    check_dim(lambda, agent.dim(), "primal_argmin: lambda");
    return agent.cost.tilted_argmin(lambda, agent.box);
}

Vec dual_gradient(const AgentSpec& agent, const Vec& lambda, const Vec& s, int divisor) {
    check_dim(s, agent.dim(), "dual_gradient: s");
    if (divisor < 1) throw std::invalid_argument("dual_gradient: divisor must be >= 1");
    Vec g = primal_argmin(agent, lambda);
    const double inv = 1.0 / static_cast<double>(divisor);
    for (std::size_t d = 0; d < g.size(); ++d) g[d] = inv * (s[d] - g[d]);
    return g;
}

std::pair<double, double> convexity_constants(const ProblemInstance& instance) {
    double amin = std::numeric_limits<double>::infinity();
    double amax = 0.0;
    for (const AgentSpec& ag : instance.agents) {
        for (double ad : ag.cost.a) {
            amin = std::min(amin, ad);
            amax = std::max(amax, ad);
        }
    }
    return {2.0 * amin, 2.0 * amax};
}

}  // namespace dra
