#pragma once

#include <span>
#include <vector>

#include "nblearn/types.hpp"

namespace nblearn {

// KL divergence sum_s p(s) log(p(s)/q(s)) in nats, with 0 log(0/q) = 0.
// Throws std::invalid_argument when p puts mass where q has none.
double kl_divergence(std::span<const double> p, std::span<const double> q);

// Group confidence of a subset W of agents: value[theta] =
// -sum_{i in W} q_i * KL(f_i || l_i(.|theta)). Higher is better.
struct ConfidenceProfile {
    std::vector<int> members;    // agent indices, ascending
    std::vector<double> value;   // one entry per hypothesis

    double max() const;
};

// Divergence objective of a single hypothesis over all agents (unweighted by
// observation rates): sum_i KL(f_i || l_i(.|theta)).
double objective(int hypothesis, std::span<const AgentSpec> agents);

ConfidenceProfile group_confidence(std::span<const int> members, std::span<const AgentSpec> agents);

// Hypotheses whose full-network confidence is within `tol` of the maximum;
// tol = 0 gives the optimal set exactly. Indices ascending.
std::vector<int> optimal_set(std::span<const AgentSpec> agents, double tol = 0.0);

// Relative-tolerance variant used wherever ties must survive floating-point
// noise: the band is rel_tol * max(1, |best confidence|).
std::vector<int> optimal_set_relative(std::span<const AgentSpec> agents, double rel_tol = 1e-12);

// True when hypotheses a and b have equal confidence for the subset W,
// within tol.
bool observationally_equivalent(std::span<const int> members, int hypothesis_a, int hypothesis_b,
                                std::span<const AgentSpec> agents, double tol);

// Which certificate produced a set of rate constants.
enum class CertificateKind { TimeVarying, MomentumStatic };

// Concentration-rate certificate: belief on any suboptimal hypothesis is
// eventually bounded by exp(-k/2 * gamma2 + gamma1[i]) with probability at
// least 1 - rho from step threshold_step on.
struct RateConstants {
    CertificateKind kind = CertificateKind::TimeVarying;
    double alpha = 0.0;          // support floor used (min over agents)
    double lambda = 0.0;         // mixing rate
    std::vector<double> gamma1;  // per-agent transient offset
    double gamma2 = 0.0;         // asymptotic rate
    long threshold_step = 0;     // N(rho)
    double rho = 0.0;

    double log_bound(long k, int agent) const { return -0.5 * static_cast<double>(k) * gamma2 + gamma1[agent]; }
};

// Certificate for the geometric pool on a B-connected (possibly time-varying)
// schedule. eta is the positive-entry floor of the schedule and window_b its
// connectivity window. Requires at least one suboptimal hypothesis and a
// positive support floor on every agent; priors enter through the worst
// initial log ratio between suboptimal hypotheses and everywhere-positive
// optimal ones.
RateConstants time_varying_constants(std::span<const AgentSpec> agents, double rho, double eta,
                                     int window_b);

// Certificate for the momentum rule on a static connected graph; requires
// uniform priors and a network-size upper bound U >= n.
RateConstants momentum_constants(std::span<const AgentSpec> agents, double rho, int size_upper_bound);

// exp(log_bound); can overflow to +inf early on, which is fine for
// comparisons. The clamped variant saturates at one for display.
double bound_curve(const RateConstants& c, long k, int agent);
double bound_curve_clamped(const RateConstants& c, long k, int agent);

// Per-agent log(mu(theta_v)/mu(theta_w)) across a belief profile; throws
// std::invalid_argument when some agent has zero mass on theta_w.
std::vector<double> log_belief_ratio(std::span<const BeliefState> beliefs, int theta_v, int theta_w);

}  // namespace nblearn
