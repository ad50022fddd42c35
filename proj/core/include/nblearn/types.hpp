#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nblearn/errors.hpp"
#include "nblearn/logspace.hpp"

namespace nblearn {

// Finite hypothesis set; hypotheses are referred to by index everywhere, the
// labels only surface in CSV output and diagnostics.
struct HypothesisSet {
    std::vector<std::string> labels;

    int size() const noexcept { return static_cast<int>(labels.size()); }
    static HypothesisSet numbered(int m, const std::string& prefix = "theta_");
};

// Finite signal alphabet. For discretized real-valued observations the value
// of a symbol is its bin midpoint; for abstract alphabets it is the symbol
// index cast to double.
struct SignalAlphabet {
    std::vector<double> values;

    int size() const noexcept { return static_cast<int>(values.size()); }
    static SignalAlphabet indexed(int count);
};

// Private-signal model of one agent: true marginal f over the alphabet plus
// one conditional row per hypothesis. support_floor is the declared lower
// bound on l(s|theta) over the support of f; it must be positive and no
// larger than the realized minimum.
struct LikelihoodModel {
    SignalAlphabet alphabet;
    std::vector<double> truth;                      // f, one entry per symbol
    std::vector<std::vector<double>> conditionals;  // [hypothesis][symbol]
    double support_floor = 0.0;                     // alpha

    int hypothesis_count() const noexcept { return static_cast<int>(conditionals.size()); }
    int symbol_count() const noexcept { return alphabet.size(); }

    double likelihood(int hypothesis, int symbol) const { return conditionals[hypothesis][symbol]; }

    // log l(s|theta) for every theta at a fixed symbol; zeros map to -inf.
    std::vector<double> log_likelihood_column(int symbol) const;

    // Smallest conditional probability over the support of f; this is the
    // tightest valid support_floor.
    double realized_support_floor() const;
};

// Belief over the hypothesis set, stored as normalized log probabilities.
// Entries are finite or -inf (a hypothesis ruled out exactly); the exponential
// of the entries sums to one.
class BeliefState {
public:
    BeliefState() = default;

    // Normalizes the given log weights. Throws DegeneratePosteriorError if
    // everything is -inf and std::invalid_argument on +inf or NaN entries.
    static BeliefState from_log_weights(std::vector<double> log_weights);
    static BeliefState from_probabilities(std::span<const double> probs);
    static BeliefState uniform(int m);

    int size() const noexcept { return static_cast<int>(log_p_.size()); }
    double log_prob(int hypothesis) const { return log_p_[hypothesis]; }
    double prob(int hypothesis) const { return std::exp(log_p_[hypothesis]); }
    const std::vector<double>& log_probs() const noexcept { return log_p_; }
    std::vector<double> probabilities() const;

    // Max |exp(log p) - exp(log q)| over hypotheses.
    double max_abs_diff(const BeliefState& other) const;

    bool operator==(const BeliefState&) const = default;

private:
    std::vector<double> log_p_;
};

// One network participant: signal model, observation rate q, and prior.
struct AgentSpec {
    LikelihoodModel model;
    double observation_rate = 1.0;  // q, probability a step comes with a signal
    BeliefState prior;
};

// Uniform prior over m hypotheses; m >= 1.
BeliefState uniform_prior(int m);

// Structural validation of a LikelihoodModel. Returns one message per
// violation (empty means valid): row/truth normalization within 1e-12,
// entries in [0,1], declared support floor positive and attained.
std::vector<std::string> validate_model(const LikelihoodModel& model);

// Convenience: validate and throw std::invalid_argument listing every
// violation if there is any.
void require_valid_model(const LikelihoodModel& model);

}  // namespace nblearn
