#include "dra/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dra/rng.hpp"

namespace dra {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double delta_bound(const ProblemInstance& instance, DeltaMode mode, int samples, std::uint64_t seed) {
    const std::vector<int> honest = instance.honest_ids();
    const std::size_t D = instance.dim();
    const double H = static_cast<double>(honest.size());

    if (mode == DeltaMode::analytic) {
        // Largest distance between two boxes: per dimension the extreme corner
        // gap max(hi_i - lo_j, hi_j - lo_i), combined across dimensions.
        double worst = 0.0;
        for (std::size_t p = 0; p < honest.size(); ++p) {
            for (std::size_t q = p; q < honest.size(); ++q) {
                const BoxConstraint& bi = instance.agents[honest[p]].box;
                const BoxConstraint& bj = instance.agents[honest[q]].box;
                double acc = 0.0;
                for (std::size_t d = 0; d < D; ++d) {
                    const double gap = std::max(bi.hi[d] - bj.lo[d], bj.hi[d] - bi.lo[d]);
                    acc += gap * gap;
                }
                worst = std::max(worst, acc);
            }
        }
        return std::sqrt(worst) / H;
    }

    if (samples < 1) throw std::invalid_argument("delta_bound: samples must be >= 1");
    // Dual sampling range wide enough to drive every agent across its box.
    double lambda_range = 1.0;
    for (int id : honest) {
        const AgentSpec& ag = instance.agents[id];
        for (std::size_t d = 0; d < D; ++d) {
            lambda_range = std::max(lambda_range, 2.0 * ag.cost.a[d] *
                                                      (std::abs(ag.cost.b_shift[d]) + std::abs(ag.box.lo[d]) +
                                                       std::abs(ag.box.hi[d]) + std::abs(instance.s[d])));
        }
    }
    SplitMix64 rng = keyed_stream(seed, 0x444Cu /* "DL" */);
    const int Hn = static_cast<int>(honest.size());
    double worst = 0.0;
    Vec lambda(D);
    std::vector<Vec> grads(Hn);
    for (int s_i = 0; s_i < samples; ++s_i) {
        for (std::size_t d = 0; d < D; ++d) lambda[d] = rng.uniform(-lambda_range, lambda_range);
        Vec mean(D, 0.0);
        for (int i = 0; i < Hn; ++i) {
            grads[i] = dual_gradient(instance.agents[honest[i]], lambda, instance.s, Hn);
            for (std::size_t d = 0; d < D; ++d) mean[d] += grads[i][d];
        }
        for (double& m : mean) m /= H;
        for (int i = 0; i < Hn; ++i) worst = std::max(worst, dist(grads[i], mean));
    }
    return worst;
}

double TheoryConstants::alpha() const { return honest_agents * u_f * L_f / (u_f + L_f); }
double TheoryConstants::beta() const { return 1.0 / (honest_agents * (u_f + L_f)); }
double TheoryConstants::alpha_tilde() const { return total_agents * u_f * L_f / (u_f + L_f); }
double TheoryConstants::beta_tilde() const { return 1.0 / (total_agents * (u_f + L_f)); }
double TheoryConstants::epsilon() const { return 1.0 - kappa - 8.0 * rho * std::sqrt(static_cast<double>(honest_agents)); }

double theorem2_dual_radius(double delta, int honest_agents, double beta, double epsilon, double rho,
                            double chi_sq) {
    if (epsilon <= 0.0) return kInf;
    const double H = static_cast<double>(honest_agents);
    return std::sqrt(192.0 * delta * delta * H * H / (beta * beta)) *
           std::sqrt(1.0 + 9.0 / (epsilon * epsilon * epsilon)) * std::sqrt(4.0 * rho * rho * H + chi_sq);
}

double theorem2_primal_radius(double delta, double u_f, int honest_agents, double beta, double epsilon, double rho,
                              double chi_sq) {
    if (epsilon <= 0.0) return kInf;
    const double H = static_cast<double>(honest_agents);
    return (1.0 / u_f) * std::sqrt(192.0 * delta * delta / (beta * beta)) *
           std::sqrt(1.0 + 9.0 / (epsilon * epsilon * epsilon)) * std::sqrt(4.0 * rho * rho * H + chi_sq);
}

double theorem2_primal_radius_derivation(double delta, double u_f, int honest_agents, double beta, double epsilon,
                                         double rho, double chi_sq) {
    if (epsilon <= 0.0) return kInf;
    const double H = static_cast<double>(honest_agents);
    return (1.0 / u_f) * std::sqrt(192.0 * delta * delta / beta * (1.0 + 3.0 / (epsilon * epsilon * epsilon)) *
                                   (4.0 * rho * rho * H + chi_sq));
}

namespace {

void eval_condition(StepSizeVerdicts& out, const std::string& name, const std::function<double(int)>& gamma,
                    int horizon, const std::function<bool(double /*g_k*/, double /*g_next*/)>& holds) {
    ConditionVerdict v;
    v.name = name;
    for (int k = 0; k <= horizon; ++k) {
        if (!holds(gamma(k), gamma(k + 1))) {
            v.pass = false;
            v.first_violation_k = k;
            break;
        }
    }
    out.conditions.push_back(std::move(v));
    out.all_pass = out.all_pass && out.conditions.back().pass;
}

}  // namespace

StepSizeVerdicts stepsize_admissible_fn(const std::function<double(int)>& gamma, int k0_or_negative,
                                        const TheoryConstants& c, TheoremId which, int horizon) {
    if (horizon < 0) throw std::invalid_argument("stepsize_admissible: horizon must be >= 0");
    StepSizeVerdicts out;
    const double J = static_cast<double>(c.total_agents);
    const double H = static_cast<double>(c.honest_agents);
    const double uf = c.u_f;

    if (which == TheoremId::theorem2) {
        const double eps = c.epsilon();
        const double alpha = c.alpha();
        const double beta = c.beta();
        eval_condition(out, "quadratic_vs_linear", gamma, horizon,
                       [&](double g, double) { return g * g * (H / J) - 2.0 * g * alpha <= 1e-15; });
        eval_condition(out, "consensus_contraction", gamma, horizon, [&](double g, double) {
            if (eps <= 0.0) return false;
            return 18.0 * g * g / (eps * uf * uf * J * J) <=
                   (2.0 - eps) * eps * eps / (3.0 * (3.0 - eps)) + 1e-15;
        });
        eval_condition(out, "decay_ratio_lower", gamma, horizon, [&](double g, double gn) {
            return gn > 0.0 && (g * g) / (gn * gn) >= 1.0 - 1e-12;
        });
        eval_condition(out, "decay_ratio_upper", gamma, horizon, [&](double g, double gn) {
            if (eps <= 0.0 || gn <= 0.0) return false;
            return (g * g) / (gn * gn) <= 2.0 / (1.0 + (1.0 - eps * eps)) + 1e-12;
        });
        eval_condition(out, "half_step_bound", gamma, horizon,
                       [&](double g, double) { return g <= uf * J / (2.0 * std::sqrt(3.0)) + 1e-15; });

        double floor = 0.0;
        if (eps > 0.0 && eps < 2.0) {
            floor = std::max(floor, 2.0 / (alpha * beta));
            floor = std::max(floor, std::sqrt(216.0 * (3.0 - eps) / ((2.0 - eps) * eps * uf * uf * H * H * beta * beta)));
            const double ratio_cap = std::sqrt(2.0 / (1.0 + (1.0 - eps * eps)));
            if (ratio_cap > 1.0) floor = std::max(floor, 1.0 / (ratio_cap - 1.0));
            floor = std::max(floor, 8.0 * std::sqrt(3.0) / (uf * H * beta));
        } else {
            floor = kInf;
        }
        out.k0_floor = floor;
        if (k0_or_negative >= 0) {
            ConditionVerdict v;
            v.name = "k0_floor";
            v.pass = static_cast<double>(k0_or_negative) >= floor;
            if (!v.pass) v.first_violation_k = 0;
            out.conditions.push_back(v);
            out.all_pass = out.all_pass && v.pass;
        }
        return out;
    }

    const double sg = c.sigma();
    const double alpha_t = c.alpha_tilde();
    const double beta_t = c.beta_tilde();
    eval_condition(out, "quadratic_vs_linear", gamma, horizon,
                   [&](double g, double) { return g * g - 2.0 * g * alpha_t <= 1e-15; });
    eval_condition(out, "consensus_contraction", gamma, horizon, [&](double g, double) {
        if (sg <= 0.0) return false;
        return 6.0 * g * g / (uf * uf * J * J) <= (2.0 - sg) * sg * sg / (3.0 * (3.0 - sg)) + 1e-15;
    });
    eval_condition(out, "decay_ratio_lower", gamma, horizon, [&](double g, double gn) {
        return gn > 0.0 && (g * g) / (gn * gn) >= 1.0 - 1e-12;
    });
    eval_condition(out, "decay_ratio_upper", gamma, horizon, [&](double g, double gn) {
        if (sg <= 0.0 || gn <= 0.0) return false;
        return (g * g) / (gn * gn) <= 2.0 / (1.0 + (1.0 - sg * sg)) + 1e-12;
    });

    double floor = 0.0;
    if (sg > 0.0 && sg < 2.0) {
        floor = std::max(floor, 1.0 / (alpha_t * beta_t));
        floor = std::max(floor, std::sqrt(72.0 * (3.0 - sg) / ((2.0 - sg) * sg * sg * uf * uf * J * J * beta_t * beta_t)));
        const double ratio_cap = std::sqrt(2.0 / (1.0 + (1.0 - sg * sg)));
        if (ratio_cap > 1.0) floor = std::max(floor, 1.0 / (ratio_cap - 1.0));
    } else {
        floor = kInf;
    }
    out.k0_floor = floor;
    if (k0_or_negative >= 0) {
        ConditionVerdict v;
        v.name = "k0_floor";
        v.pass = static_cast<double>(k0_or_negative) >= floor;
        if (!v.pass) v.first_violation_k = 0;
        out.conditions.push_back(v);
        out.all_pass = out.all_pass && v.pass;
    }
    return out;
}

StepSizeVerdicts stepsize_admissible(const StepSchedule& schedule, const TheoryConstants& constants, TheoremId which,
                                     int horizon) {
    schedule.validate();
    const int k0 = schedule.kind == ScheduleKind::theorem ? schedule.offset : -1;
    return stepsize_admissible_fn([&schedule](int k) { return step_size(schedule, k); }, k0, constants, which,
                                  horizon);
}

TheoryReport make_theory_report(const TheoryConstants& c, const StepSchedule& schedule, int horizon) {
    TheoryReport r;
    r.u_f = c.u_f;
    r.L_f = c.L_f;
    r.alpha = c.alpha();
    r.beta = c.beta();
    r.kappa = c.kappa;
    r.kappa_tilde = c.kappa_tilde;
    r.chi_sq = c.chi_sq;
    r.rho = c.rho;
    r.epsilon = c.epsilon();
    r.delta = c.delta;
    r.rho_condition_ok = c.rho_condition_ok();
    r.dual_radius = theorem2_dual_radius(c.delta, c.honest_agents, c.beta(), r.epsilon, c.rho, c.chi_sq);
    r.primal_radius = theorem2_primal_radius(c.delta, c.u_f, c.honest_agents, c.beta(), r.epsilon, c.rho, c.chi_sq);
    r.primal_radius_derivation =
        theorem2_primal_radius_derivation(c.delta, c.u_f, c.honest_agents, c.beta(), r.epsilon, c.rho, c.chi_sq);
    r.stepsize = stepsize_admissible(schedule, c, TheoremId::theorem2, horizon);
    return r;
}

}  // namespace dra
