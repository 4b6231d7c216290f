#pragma once

#include <concepts>
#include <set>
#include <utility>
#include <vector>

#include "dra/vecmath.hpp"

namespace dra {

// Per-dimension box [lo, hi], both finite.
struct BoxConstraint {
    Vec lo;
    Vec hi;

    std::size_t dim() const { return lo.size(); }
    bool contains(const Vec& x, double slack = 0.0) const;
    void validate() const;
};

// Strongly convex local cost interface: evaluation plus the tilted argmin
// min_theta { theta'lambda + f(theta) } over a box. Only the separable
// quadratic family ships; it keeps the argmin closed-form and the reference
// solver exact.
template <typename T>
concept StronglyConvexCost = requires(const T& cost, const Vec& point, const Vec& lambda, const BoxConstraint& box) {
    { cost.dim() } -> std::convertible_to<std::size_t>;
    { cost.value(point) } -> std::convertible_to<double>;
    { cost.tilted_argmin(lambda, box) } -> std::convertible_to<Vec>;
};

// Separable quadratic cost f(theta) = sum_d a[d]*(theta[d] - b_shift[d])^2 + c0.
// The polynomial form eta*t^2 + zeta*t + xi is normalized at ingestion by
// completing the square. Every a[d] must be strictly positive.
struct QuadraticCost {
    Vec a;
    Vec b_shift;
    double c0 = 0.0;

    static QuadraticCost from_poly(double eta, double zeta, double xi);

    std::size_t dim() const { return a.size(); }
    double value(const Vec& point) const;
    Vec tilted_argmin(const Vec& lambda, const BoxConstraint& box) const;
    void validate() const;
};

struct AgentSpec {
    int id = 0;
    QuadraticCost cost;
    BoxConstraint box;

    std::size_t dim() const { return cost.dim(); }
    void validate() const;
};

static_assert(StronglyConvexCost<QuadraticCost>);

// Agents, the shared per-agent resource target s, and the honest/Byzantine
// partition. Construction checks that the honest agents' boxes can attain s
// on average (per dimension, mean lo <= s <= mean hi).
struct ProblemInstance {
    std::vector<AgentSpec> agents;
    Vec s;
    std::set<int> byzantine;

    ProblemInstance() = default;
    ProblemInstance(std::vector<AgentSpec> agents_in, Vec s_in, std::set<int> byzantine_in = {});

    std::size_t dim() const { return s.size(); }
    int total_agents() const { return static_cast<int>(agents.size()); }
    int byzantine_count() const { return static_cast<int>(byzantine.size()); }
    int honest_count() const { return total_agents() - byzantine_count(); }
    bool is_byzantine(int id) const { return byzantine.count(id) > 0; }
    std::vector<int> honest_ids() const;

    void validate() const;
};

double eval_cost(const AgentSpec& agent, const Vec& theta);

// Unique minimizer of theta'lambda + f(theta) over the box; closed form per
// dimension: clip(b_shift[d] - lambda[d]/(2 a[d])) to [lo[d], hi[d]].
Vec primal_argmin(const AgentSpec& agent, const Vec& lambda);

// (1/divisor) * (s - primal_argmin(agent, lambda)). Divisor J gives the
// full-population dual gradient, divisor H the honest-population one.
Vec dual_gradient(const AgentSpec& agent, const Vec& lambda, const Vec& s, int divisor);

// (u_f, L_f): 2*min and 2*max of the curvature coefficients over all agents
// and dimensions.
std::pair<double, double> convexity_constants(const ProblemInstance& instance);

}  // namespace dra
