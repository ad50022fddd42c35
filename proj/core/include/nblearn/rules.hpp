#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nblearn/types.hpp"

namespace nblearn {

// Belief-update laws the simulator can run. GeometricPool is the weighted
// log-pool with Bayesian likelihood factors on a (possibly time-varying)
// doubly stochastic matrix; AcceleratedGeometric adds one step of memory with
// momentum weight sigma on a static graph. The remaining kinds are the
// comparison rules: pool-then-update and update-then-pool with the arithmetic
// pool, raw likelihood gossip, and the centralized full-information baseline.
enum class UpdateRuleKind {
    GeometricPool,
    AcceleratedGeometric,
    LinearPoolThenBayes,
    BayesThenLinearPool,
    LikelihoodSharing,
    CentralizedBayes,
};

const char* to_string(UpdateRuleKind kind);
std::optional<UpdateRuleKind> parse_rule_kind(const std::string& name);

// Pool shapes for opinion aggregation: Linear averages probabilities,
// Logarithmic averages log probabilities (weighted geometric mean).
enum class PoolKind { Linear, Logarithmic };

// Per-agent state carried between steps. `previous` and `prev_log_likelihood`
// are populated only by the accelerated rule: prev_log_likelihood(theta) is
// beta_{k-1} * log l(s_k | theta), i.e. all zeros on steps without a signal.
struct AgentMemory {
    BeliefState current;
    BeliefState previous;
    std::vector<double> prev_log_likelihood;
};

// Bayes update of a single belief with signal `symbol`; the degenerate case
// (prior orthogonal to the likelihood row) throws DegeneratePosteriorError.
BeliefState bayes_update(const BeliefState& prior, const LikelihoodModel& model, int symbol);

// Weighted pool of beliefs; weights must be non-negative and sum to one.
BeliefState qlop_pool(PoolKind kind, std::span<const double> weights,
                      std::span<const BeliefState> beliefs);

// Log-pool of the neighborhood plus an optional own-signal likelihood factor
// (absent signal means the observation flag was zero). weights[j] = 0 means
// j is not a neighbor; such beliefs are ignored entirely.
BeliefState geometric_pool_update(std::span<const double> weights, std::span<const BeliefState> beliefs,
                                  const LikelihoodModel& model, std::optional<int> symbol);

// One-step-memory accelerated update for agent `self`. Reads every agent's
// current and previous belief plus the previous likelihood term from
// `memories`; weights are the agent's row of the static lazy Metropolis
// matrix. A hypothesis with zero mass in the pooled numerator stays at zero;
// a zero appearing only in the subtracted history term makes the update
// degenerate and throws.
BeliefState accelerated_update(std::span<const double> weights, std::span<const AgentMemory> memories,
                               double sigma, const LikelihoodModel& model, std::optional<int> symbol);

// Arithmetic pool of the neighborhood followed by a Bayes update with the
// agent's own signal (skipped when absent).
BeliefState linear_pool_then_bayes(std::span<const double> weights, std::span<const BeliefState> beliefs,
                                   const LikelihoodModel& model, std::optional<int> symbol);

// Each neighbor applies Bayes with its own signal (identity when absent),
// then the results are arithmetically pooled. models[j] and symbols[j]
// describe neighbor j; models for zero-weight entries may be null.
BeliefState bayes_then_linear_pool(std::span<const double> weights, std::span<const BeliefState> beliefs,
                                   std::span<const LikelihoodModel* const> models,
                                   std::span<const std::optional<int>> symbols);

// Likelihood gossip: own belief times the weighted geometric mean of the
// neighbors' likelihood columns. log_likelihood_columns[j] is log l^j(s_j|.)
// for neighbors that observed, nullptr for those that did not.
BeliefState likelihood_sharing_update(const BeliefState& own, std::span<const double> weights,
                                      std::span<const std::vector<double>* const> log_likelihood_columns);

// Full-information baseline: multiply the belief by every observed agent's
// likelihood column.
BeliefState centralized_bayes_update(const BeliefState& belief,
                                     std::span<const std::vector<double>* const> log_likelihood_columns);

// Max absolute probability difference between pool-then-update and
// update-then-pool for the logarithmic pool; the two commute exactly, so the
// result is numerical noise only.
double externally_bayesian_check(std::span<const double> weights, std::span<const BeliefState> beliefs,
                                 const LikelihoodModel& model, int symbol);

}  // namespace nblearn
