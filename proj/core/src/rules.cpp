#include "nblearn/rules.hpp"

#include <cmath>

#include "nblearn/logspace.hpp"

namespace nblearn {

namespace {

void require_weights(std::span<const double> weights, std::size_t expected) {
    if (weights.size() != expected) throw std::invalid_argument("weight row length mismatch");
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("pool weights must be non-negative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("pool weights must sum to one");
}

int belief_dim(std::span<const BeliefState> beliefs) {
    if (beliefs.empty()) throw std::invalid_argument("pool over zero beliefs");
    const int m = beliefs.front().size();
    for (const auto& b : beliefs)
        if (b.size() != m) throw std::invalid_argument("belief dimension mismatch");
    return m;
}

void require_symbol(const LikelihoodModel& model, int symbol) {
    if (symbol < 0 || symbol >= model.symbol_count())
        throw std::invalid_argument("signal symbol outside the alphabet");
}

}  // namespace

const char* to_string(UpdateRuleKind kind) {
    switch (kind) {
        case UpdateRuleKind::GeometricPool: return "geometric";
        case UpdateRuleKind::AcceleratedGeometric: return "accelerated";
        case UpdateRuleKind::LinearPoolThenBayes: return "linear_pool_then_bayes";
        case UpdateRuleKind::BayesThenLinearPool: return "bayes_then_linear_pool";
        case UpdateRuleKind::LikelihoodSharing: return "likelihood_sharing";
        case UpdateRuleKind::CentralizedBayes: return "centralized_bayes";
    }
    return "unknown";
}

std::optional<UpdateRuleKind> parse_rule_kind(const std::string& name) {
    for (UpdateRuleKind k :
         {UpdateRuleKind::GeometricPool, UpdateRuleKind::AcceleratedGeometric,
          UpdateRuleKind::LinearPoolThenBayes, UpdateRuleKind::BayesThenLinearPool,
          UpdateRuleKind::LikelihoodSharing, UpdateRuleKind::CentralizedBayes}) {
        if (name == to_string(k)) return k;
    }
    return std::nullopt;
}

BeliefState bayes_update(const BeliefState& prior, const LikelihoodModel& model, int symbol) {
    require_symbol(model, symbol);
    if (prior.size() != model.hypothesis_count())
        throw std::invalid_argument("prior dimension does not match the model");
    std::vector<double> lw(prior.size());
    for (int t = 0; t < prior.size(); ++t) {
        const double l = model.likelihood(t, symbol);
        lw[t] = l > 0.0 ? prior.log_prob(t) + std::log(l) : kNegInf;
    }
    const double lse = log_sum_exp(lw);
    if (lse == kNegInf)
        throw DegeneratePosteriorError("bayes update: prior orthogonal to the likelihood row");
    return BeliefState::from_log_weights(std::move(lw));
}

BeliefState qlop_pool(PoolKind kind, std::span<const double> weights,
                      std::span<const BeliefState> beliefs) {
    const int m = belief_dim(beliefs);
    require_weights(weights, beliefs.size());
    std::vector<double> lw(m, 0.0);
    if (kind == PoolKind::Logarithmic) {
        for (int t = 0; t < m; ++t) {
            double acc = 0.0;
            for (std::size_t j = 0; j < beliefs.size(); ++j) {
                if (weights[j] == 0.0) continue;
                const double lp = beliefs[j].log_prob(t);
                if (lp == kNegInf) {
                    acc = kNegInf;
                    break;
                }
                acc += weights[j] * lp;
            }
            lw[t] = acc;
        }
    } else {
        for (int t = 0; t < m; ++t) {
            double p = 0.0;
            for (std::size_t j = 0; j < beliefs.size(); ++j)
                if (weights[j] > 0.0) p += weights[j] * beliefs[j].prob(t);
            lw[t] = p > 0.0 ? std::log(p) : kNegInf;
        }
    }
    const double lse = log_sum_exp(lw);
    if (lse == kNegInf) throw DegeneratePosteriorError("pooled belief has zero total mass");
    return BeliefState::from_log_weights(std::move(lw));
}

BeliefState geometric_pool_update(std::span<const double> weights, std::span<const BeliefState> beliefs,
                                  const LikelihoodModel& model, std::optional<int> symbol) {
    const int m = belief_dim(beliefs);
    require_weights(weights, beliefs.size());
    if (model.hypothesis_count() != m)
        throw std::invalid_argument("model dimension does not match the beliefs");
    if (symbol) require_symbol(model, *symbol);
    std::vector<double> lw(m);
    for (int t = 0; t < m; ++t) {
        double acc = 0.0;
        for (std::size_t j = 0; j < beliefs.size(); ++j) {
            if (weights[j] == 0.0) continue;
            const double lp = beliefs[j].log_prob(t);
            if (lp == kNegInf) {
                acc = kNegInf;
                break;
            }
            acc += weights[j] * lp;
        }
        if (symbol && acc != kNegInf) {
            const double l = model.likelihood(t, *symbol);
            acc = l > 0.0 ? acc + std::log(l) : kNegInf;
        }
        lw[t] = acc;
    }
    if (log_sum_exp(lw) == kNegInf)
        throw DegeneratePosteriorError("geometric pool update produced zero total mass");
    return BeliefState::from_log_weights(std::move(lw));
}

BeliefState accelerated_update(std::span<const double> weights, std::span<const AgentMemory> memories,
                               double sigma, const LikelihoodModel& model, std::optional<int> symbol) {
    if (memories.empty()) throw std::invalid_argument("accelerated update over zero agents");
    require_weights(weights, memories.size());
    if (!(sigma >= 0.0 && sigma < 1.0)) throw std::invalid_argument("sigma must lie in [0,1)");
    const int m = memories.front().current.size();
    if (model.hypothesis_count() != m)
        throw std::invalid_argument("model dimension does not match the beliefs");
    if (symbol) require_symbol(model, *symbol);
    for (const auto& mem : memories) {
        if (mem.current.size() != m || mem.previous.size() != m ||
            static_cast<int>(mem.prev_log_likelihood.size()) != m)
            throw std::invalid_argument("agent memory dimension mismatch");
    }
    std::vector<double> lw(m);
    for (int t = 0; t < m; ++t) {
        // positive part: (1+sigma) * sum_j w_j log mu_k^j + own likelihood
        // negative part: sigma * sum_j w_j (log mu_{k-1}^j + prev term)
        double pos = 0.0;
        double neg = 0.0;
        for (std::size_t j = 0; j < memories.size(); ++j) {
            const double w = weights[j];
            if (w == 0.0) continue;
            const double cur = memories[j].current.log_prob(t);
            if (cur == kNegInf)
                pos = kNegInf;
            else if (pos != kNegInf)
                pos += (1.0 + sigma) * w * cur;
            const double prev = memories[j].previous.log_prob(t) + memories[j].prev_log_likelihood[t];
            if (prev == kNegInf)
                neg = kNegInf;
            else if (neg != kNegInf)
                neg += w * prev;
        }
        if (symbol && pos != kNegInf) {
            const double l = model.likelihood(t, *symbol);
            pos = l > 0.0 ? pos + std::log(l) : kNegInf;
        }
        if (pos == kNegInf) {
            lw[t] = kNegInf;  // zero numerator wins over any history term
        } else if (neg == kNegInf) {
            throw DegeneratePosteriorError(
                "accelerated update: zero mass in the subtracted history term only");
        } else {
            lw[t] = pos - sigma * neg;
        }
    }
    if (log_sum_exp(lw) == kNegInf)
        throw DegeneratePosteriorError("accelerated update produced zero total mass");
    return BeliefState::from_log_weights(std::move(lw));
}

BeliefState linear_pool_then_bayes(std::span<const double> weights, std::span<const BeliefState> beliefs,
                                   const LikelihoodModel& model, std::optional<int> symbol) {
    BeliefState pooled = qlop_pool(PoolKind::Linear, weights, beliefs);
    if (!symbol) return pooled;
    return bayes_update(pooled, model, *symbol);
}

BeliefState bayes_then_linear_pool(std::span<const double> weights, std::span<const BeliefState> beliefs,
                                   std::span<const LikelihoodModel* const> models,
                                   std::span<const std::optional<int>> symbols) {
    const int m = belief_dim(beliefs);
    require_weights(weights, beliefs.size());
    if (models.size() != beliefs.size() || symbols.size() != beliefs.size())
        throw std::invalid_argument("per-neighbor model/symbol list length mismatch");
    std::vector<double> pooled(m, 0.0);
    for (std::size_t j = 0; j < beliefs.size(); ++j) {
        if (weights[j] == 0.0) continue;
        if (symbols[j]) {
            if (models[j] == nullptr)
                throw std::invalid_argument("neighbor with a signal needs its likelihood model");
            const BeliefState post = bayes_update(beliefs[j], *models[j], *symbols[j]);
            for (int t = 0; t < m; ++t) pooled[t] += weights[j] * post.prob(t);
        } else {
            for (int t = 0; t < m; ++t) pooled[t] += weights[j] * beliefs[j].prob(t);
        }
    }
    return BeliefState::from_probabilities(pooled);
}

BeliefState likelihood_sharing_update(const BeliefState& own, std::span<const double> weights,
                                      std::span<const std::vector<double>* const> log_likelihood_columns) {
    require_weights(weights, log_likelihood_columns.size());
    const int m = own.size();
    std::vector<double> lw(own.log_probs());
    for (std::size_t j = 0; j < log_likelihood_columns.size(); ++j) {
        const auto* col = log_likelihood_columns[j];
        if (col == nullptr || weights[j] == 0.0) continue;  // no observation from j this step
        if (static_cast<int>(col->size()) != m)
            throw std::invalid_argument("likelihood column dimension mismatch");
        for (int t = 0; t < m; ++t) {
            if (lw[t] == kNegInf) continue;
            const double l = (*col)[t];
            lw[t] = l == kNegInf ? kNegInf : lw[t] + weights[j] * l;
        }
    }
    if (log_sum_exp(lw) == kNegInf)
        throw DegeneratePosteriorError("likelihood sharing update produced zero total mass");
    return BeliefState::from_log_weights(std::move(lw));
}

BeliefState centralized_bayes_update(const BeliefState& belief,
                                     std::span<const std::vector<double>* const> log_likelihood_columns) {
    const int m = belief.size();
    std::vector<double> lw(belief.log_probs());
    for (const auto* col : log_likelihood_columns) {
        if (col == nullptr) continue;
        if (static_cast<int>(col->size()) != m)
            throw std::invalid_argument("likelihood column dimension mismatch");
        for (int t = 0; t < m; ++t) {
            if (lw[t] == kNegInf) continue;
            lw[t] = (*col)[t] == kNegInf ? kNegInf : lw[t] + (*col)[t];
        }
    }
    if (log_sum_exp(lw) == kNegInf)
        throw DegeneratePosteriorError("centralized update produced zero total mass");
    return BeliefState::from_log_weights(std::move(lw));
}

double externally_bayesian_check(std::span<const double> weights, std::span<const BeliefState> beliefs,
                                 const LikelihoodModel& model, int symbol) {
    const BeliefState pool_first = geometric_pool_update(weights, beliefs, model, symbol);
    std::vector<BeliefState> updated;
    updated.reserve(beliefs.size());
    for (std::size_t j = 0; j < beliefs.size(); ++j) {
        // Zero-weight entries are ignored by the pool; update them anyway so
        // the comparison exercises the full roster.
        updated.push_back(weights[j] > 0.0 ? bayes_update(beliefs[j], model, symbol) : beliefs[j]);
    }
    const BeliefState update_first = qlop_pool(PoolKind::Logarithmic, weights, updated);
    return pool_first.max_abs_diff(update_first);
}

}  // namespace nblearn
