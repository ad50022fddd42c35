#include "nblearn/types.hpp"

#include <cmath>
#include <limits>

namespace nblearn {

namespace {

constexpr double kSumTol = 1e-12;

}  // namespace

HypothesisSet HypothesisSet::numbered(int m, const std::string& prefix) {
    if (m < 1) throw std::invalid_argument("hypothesis set must be non-empty");
    HypothesisSet h;
    h.labels.reserve(m);
    for (int t = 0; t < m; ++t) h.labels.push_back(prefix + std::to_string(t + 1));
    return h;
}

SignalAlphabet SignalAlphabet::indexed(int count) {
    if (count < 1) throw std::invalid_argument("signal alphabet must be non-empty");
    SignalAlphabet a;
    a.values.reserve(count);
    for (int s = 0; s < count; ++s) a.values.push_back(static_cast<double>(s));
    return a;
}

std::vector<double> LikelihoodModel::log_likelihood_column(int symbol) const {
    std::vector<double> col(conditionals.size());
    for (std::size_t t = 0; t < conditionals.size(); ++t) {
        const double v = conditionals[t][symbol];
        col[t] = v > 0.0 ? std::log(v) : kNegInf;
    }
    return col;
}

double LikelihoodModel::realized_support_floor() const {
    double floor = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < truth.size(); ++s) {
        if (truth[s] <= 0.0) continue;
        for (const auto& row : conditionals) floor = std::min(floor, row[s]);
    }
    return floor;
}

BeliefState BeliefState::from_log_weights(std::vector<double> log_weights) {
    if (log_weights.empty()) throw std::invalid_argument("belief over empty hypothesis set");
    for (double x : log_weights) {
        if (std::isnan(x) || x == std::numeric_limits<double>::infinity())
            throw std::invalid_argument("log belief weights must be finite or -inf");
    }
    const double lse = log_sum_exp(log_weights);
    if (lse == kNegInf)
        throw DegeneratePosteriorError("belief normalization over zero total mass");
    BeliefState b;
    b.log_p_ = std::move(log_weights);
    for (double& x : b.log_p_) {
        if (x != kNegInf) x -= lse;
    }
    return b;
}

BeliefState BeliefState::from_probabilities(std::span<const double> probs) {
    std::vector<double> lw(probs.size());
    for (std::size_t t = 0; t < probs.size(); ++t) {
        const double p = probs[t];
        if (std::isnan(p) || p < 0.0 || p == std::numeric_limits<double>::infinity())
            throw std::invalid_argument("belief probabilities must be finite and non-negative");
        lw[t] = p > 0.0 ? std::log(p) : kNegInf;
    }
    return from_log_weights(std::move(lw));
}

BeliefState BeliefState::uniform(int m) {
    if (m < 1) throw std::invalid_argument("belief over empty hypothesis set");
    BeliefState b;
    b.log_p_.assign(m, -std::log(static_cast<double>(m)));
    return b;
}

std::vector<double> BeliefState::probabilities() const {
    std::vector<double> p(log_p_.size());
    for (std::size_t t = 0; t < log_p_.size(); ++t) p[t] = std::exp(log_p_[t]);
    return p;
}

double BeliefState::max_abs_diff(const BeliefState& other) const {
    if (size() != other.size()) throw std::invalid_argument("belief dimension mismatch");
    double d = 0.0;
    for (int t = 0; t < size(); ++t) d = std::max(d, std::abs(prob(t) - other.prob(t)));
    return d;
}

BeliefState uniform_prior(int m) { return BeliefState::uniform(m); }

std::vector<std::string> validate_model(const LikelihoodModel& model) {
    std::vector<std::string> out;
    const int m = model.hypothesis_count();
    const int ns = model.symbol_count();
    if (m < 1) out.push_back("model has no hypotheses");
    if (ns < 1) out.push_back("model has an empty signal alphabet");
    if (static_cast<int>(model.truth.size()) != ns)
        out.push_back("truth distribution length " + std::to_string(model.truth.size()) +
                      " does not match alphabet size " + std::to_string(ns));
    if (!out.empty()) return out;  // dimension errors make the rest meaningless

    double truth_sum = 0.0;
    for (int s = 0; s < ns; ++s) {
        const double p = model.truth[s];
        if (!(p >= 0.0 && p <= 1.0 + kSumTol) || std::isnan(p))
            out.push_back("truth[" + std::to_string(s) + "] = " + std::to_string(p) + " outside [0,1]");
        else
            truth_sum += p;
    }
    if (std::abs(truth_sum - 1.0) > kSumTol)
        out.push_back("truth distribution sums to " + std::to_string(truth_sum) + ", expected 1");

    for (int t = 0; t < m; ++t) {
        const auto& row = model.conditionals[t];
        if (static_cast<int>(row.size()) != ns) {
            out.push_back("conditional row " + std::to_string(t) + " has length " +
                          std::to_string(row.size()) + ", expected " + std::to_string(ns));
            continue;
        }
        double row_sum = 0.0;
        bool entries_ok = true;
        for (int s = 0; s < ns; ++s) {
            const double p = row[s];
            if (!(p >= 0.0 && p <= 1.0 + kSumTol) || std::isnan(p)) {
                out.push_back("conditional[" + std::to_string(t) + "][" + std::to_string(s) + "] = " +
                              std::to_string(p) + " outside [0,1]");
                entries_ok = false;
            } else {
                row_sum += p;
            }
        }
        if (entries_ok && std::abs(row_sum - 1.0) > kSumTol)
            out.push_back("conditional row " + std::to_string(t) + " sums to " + std::to_string(row_sum) +
                          ", expected 1");
    }
    if (!out.empty()) return out;

    if (!(model.support_floor > 0.0)) {
        out.push_back("support floor must be positive, got " + std::to_string(model.support_floor));
    } else {
        const double realized = model.realized_support_floor();
        if (model.support_floor > realized)
            out.push_back("declared support floor " + std::to_string(model.support_floor) +
                          " exceeds realized minimum conditional " + std::to_string(realized) +
                          " over the support of the truth distribution");
    }
    return out;
}

void require_valid_model(const LikelihoodModel& model) {
    const auto violations = validate_model(model);
    if (violations.empty()) return;
    std::string msg = "invalid likelihood model:";
    for (const auto& v : violations) msg += "\n  - " + v;
    throw std::invalid_argument(msg);
}

}  // namespace nblearn
