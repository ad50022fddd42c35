#include "nblearn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nblearn/graphs.hpp"

namespace nblearn {

namespace {

std::vector<int> all_members(std::size_t n) {
    std::vector<int> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<int>(i);
    return v;
}

void require_agents(std::span<const AgentSpec> agents) {
    if (agents.empty()) throw std::invalid_argument("agent list is empty");
    const int m = agents.front().model.hypothesis_count();
    for (const auto& a : agents)
        if (a.model.hypothesis_count() != m)
            throw std::invalid_argument("agents disagree on the hypothesis count");
}

}  // namespace

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw std::invalid_argument("KL divergence dimension mismatch");
    double d = 0.0;
    for (std::size_t s = 0; s < p.size(); ++s) {
        if (p[s] == 0.0) continue;
        if (p[s] < 0.0 || q[s] < 0.0) throw std::invalid_argument("KL divergence needs non-negative masses");
        if (q[s] == 0.0)
            throw std::invalid_argument("KL divergence undefined: p has mass outside the support of q");
        d += p[s] * std::log(p[s] / q[s]);
    }
    return d;
}

double ConfidenceProfile::max() const {
    if (value.empty()) throw std::invalid_argument("empty confidence profile");
    return *std::max_element(value.begin(), value.end());
}

double objective(int hypothesis, std::span<const AgentSpec> agents) {
    require_agents(agents);
    if (hypothesis < 0 || hypothesis >= agents.front().model.hypothesis_count())
        throw std::invalid_argument("hypothesis index out of range");
    double total = 0.0;
    for (const auto& a : agents)
        total += kl_divergence(a.model.truth, a.model.conditionals[hypothesis]);
    return total;
}

ConfidenceProfile group_confidence(std::span<const int> members, std::span<const AgentSpec> agents) {
    require_agents(agents);
    const int m = agents.front().model.hypothesis_count();
    ConfidenceProfile profile;
    profile.members.assign(members.begin(), members.end());
    std::sort(profile.members.begin(), profile.members.end());
    for (std::size_t idx = 0; idx + 1 < profile.members.size(); ++idx)
        if (profile.members[idx] == profile.members[idx + 1])
            throw std::invalid_argument("duplicate agent in group");
    profile.value.assign(m, 0.0);
    for (int i : profile.members) {
        if (i < 0 || i >= static_cast<int>(agents.size()))
            throw std::invalid_argument("group member index out of range");
        const auto& a = agents[i];
        if (a.observation_rate == 0.0) continue;  // contributes zero regardless of theta
        for (int t = 0; t < m; ++t)
            profile.value[t] -= a.observation_rate * kl_divergence(a.model.truth, a.model.conditionals[t]);
    }
    return profile;
}

std::vector<int> optimal_set(std::span<const AgentSpec> agents, double tol) {
    if (tol < 0.0) throw std::invalid_argument("optimal set tolerance must be non-negative");
    const auto members = all_members(agents.size());
    const ConfidenceProfile c = group_confidence(members, agents);
    const double best = c.max();
    std::vector<int> out;
    for (int t = 0; t < static_cast<int>(c.value.size()); ++t)
        if (c.value[t] >= best - tol) out.push_back(t);
    return out;
}

std::vector<int> optimal_set_relative(std::span<const AgentSpec> agents, double rel_tol) {
    const auto members = all_members(agents.size());
    const ConfidenceProfile c = group_confidence(members, agents);
    const double scale = std::max(1.0, std::abs(c.max()));
    return optimal_set(agents, rel_tol * scale);
}

bool observationally_equivalent(std::span<const int> members, int hypothesis_a, int hypothesis_b,
                                std::span<const AgentSpec> agents, double tol) {
    const ConfidenceProfile c = group_confidence(members, agents);
    if (hypothesis_a < 0 || hypothesis_b < 0 || hypothesis_a >= static_cast<int>(c.value.size()) ||
        hypothesis_b >= static_cast<int>(c.value.size()))
        throw std::invalid_argument("hypothesis index out of range");
    return std::abs(c.value[hypothesis_a] - c.value[hypothesis_b]) <= tol;
}

namespace {

// Shared tail of the two rate-constant builders: alpha, gamma2, N(rho).
// transient_coeff scales log(n)/(1-lambda)*log(1/alpha); threshold_coeff is
// the multiplier on (log alpha)^2 log(1/rho) / gamma2^2.
RateConstants finish_constants(std::span<const AgentSpec> agents, double rho, double lambda,
                               double transient_coeff, double threshold_coeff, double prior_term,
                               CertificateKind kind) {
    if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in (0,1)");
    const int n = static_cast<int>(agents.size());
    const int m = agents.front().model.hypothesis_count();

    double alpha = std::numeric_limits<double>::infinity();
    for (const auto& a : agents) {
        if (!(a.model.support_floor > 0.0))
            throw std::invalid_argument("rate constants need a positive support floor on every agent");
        alpha = std::min(alpha, a.model.support_floor);
    }

    const auto optimal = optimal_set(agents, 0.0);
    if (static_cast<int>(optimal.size()) == m)
        throw std::invalid_argument("rate constants undefined: every hypothesis is optimal");

    const ConfidenceProfile c = group_confidence(all_members(agents.size()), agents);
    const double best = c.max();
    double min_gap = std::numeric_limits<double>::infinity();
    std::vector<char> is_opt(m, 0);
    for (int t : optimal) is_opt[t] = 1;
    for (int t = 0; t < m; ++t)
        if (!is_opt[t]) min_gap = std::min(min_gap, best - c.value[t]);

    RateConstants out;
    out.kind = kind;
    out.alpha = alpha;
    out.lambda = lambda;
    out.rho = rho;
    out.gamma2 = min_gap / static_cast<double>(n);
    const double log_alpha = std::log(alpha);
    const double transient =
        transient_coeff * std::log(static_cast<double>(n)) / (1.0 - lambda) * (-log_alpha);
    out.gamma1.assign(n, prior_term + transient);
    out.threshold_step = static_cast<long>(
        std::ceil(threshold_coeff * log_alpha * log_alpha * std::log(1.0 / rho) / (out.gamma2 * out.gamma2)));
    return out;
}

// Worst initial log ratio mu_0(theta_v)/mu_0(theta_w) over suboptimal
// theta_v, optimal theta_w with everywhere-positive prior mass, and agents i.
double prior_log_ratio_term(std::span<const AgentSpec> agents) {
    const int m = agents.front().model.hypothesis_count();
    const auto optimal = optimal_set(agents, 0.0);
    std::vector<char> is_opt(m, 0);
    for (int t : optimal) is_opt[t] = 1;

    std::vector<int> positive_optimal;
    for (int t : optimal) {
        bool positive_everywhere = true;
        for (const auto& a : agents)
            if (a.prior.log_prob(t) == kNegInf) positive_everywhere = false;
        if (positive_everywhere) positive_optimal.push_back(t);
    }
    if (positive_optimal.empty())
        throw std::invalid_argument("no optimal hypothesis has positive prior mass for every agent");

    double term = -std::numeric_limits<double>::infinity();
    for (int v = 0; v < m; ++v) {
        if (is_opt[v]) continue;
        for (int w : positive_optimal)
            for (const auto& a : agents)
                term = std::max(term, a.prior.log_prob(v) - a.prior.log_prob(w));
    }
    return term;
}

}  // namespace

RateConstants time_varying_constants(std::span<const AgentSpec> agents, double rho, double eta,
                                     int window_b) {
    require_agents(agents);
    const int n = static_cast<int>(agents.size());
    const double lambda = mixing_bound_lambda(n, eta, window_b);
    const double prior_term = prior_log_ratio_term(agents);
    return finish_constants(agents, rho, lambda, 12.0, 8.0, prior_term, CertificateKind::TimeVarying);
}

RateConstants momentum_constants(std::span<const AgentSpec> agents, double rho, int size_upper_bound) {
    require_agents(agents);
    const int n = static_cast<int>(agents.size());
    if (size_upper_bound < n)
        throw std::invalid_argument("size upper bound must be at least the agent count");
    for (const auto& a : agents) {
        const BeliefState u = BeliefState::uniform(a.prior.size());
        if (a.prior.max_abs_diff(u) > 1e-9)
            throw std::invalid_argument("accelerated rate constants require uniform priors");
    }
    const double lambda = 1.0 - 1.0 / (18.0 * static_cast<double>(size_upper_bound));
    return finish_constants(agents, rho, lambda, 4.0, 48.0, 0.0, CertificateKind::MomentumStatic);
}

double bound_curve(const RateConstants& c, long k, int agent) {
    if (agent < 0 || agent >= static_cast<int>(c.gamma1.size()))
        throw std::invalid_argument("agent index out of range");
    return std::exp(c.log_bound(k, agent));
}

double bound_curve_clamped(const RateConstants& c, long k, int agent) {
    return std::min(1.0, bound_curve(c, k, agent));
}

std::vector<double> log_belief_ratio(std::span<const BeliefState> beliefs, int theta_v, int theta_w) {
    if (beliefs.empty()) throw std::invalid_argument("belief profile is empty");
    std::vector<double> out;
    out.reserve(beliefs.size());
    for (const auto& b : beliefs) {
        if (theta_v < 0 || theta_w < 0 || theta_v >= b.size() || theta_w >= b.size())
            throw std::invalid_argument("hypothesis index out of range");
        const double lw = b.log_prob(theta_w);
        if (lw == kNegInf)
            throw std::invalid_argument("log belief ratio undefined: zero mass on the reference hypothesis");
        out.push_back(b.log_prob(theta_v) - lw);
    }
    return out;
}

}  // namespace nblearn
