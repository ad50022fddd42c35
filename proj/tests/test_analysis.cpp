#include <doctest.h>

#include <cmath>
#include <vector>

#include "nblearn/analysis.hpp"
#include "nblearn/types.hpp"

using namespace nblearn;

namespace {

LikelihoodModel two_symbol_model(std::vector<double> truth, std::vector<std::vector<double>> rows) {
    LikelihoodModel m;
    m.alphabet = SignalAlphabet::indexed(2);
    m.truth = std::move(truth);
    m.conditionals = std::move(rows);
    m.support_floor = m.realized_support_floor();
    return m;
}

// Two identical agents; theta_0 is the truth, theta_1 is off by
// KL((0.8,0.2)||(0.5,0.5)) = 0.19274475702175753 nats.
std::vector<AgentSpec> gap_instance(double rate = 1.0) {
    AgentSpec a;
    a.model = two_symbol_model({0.8, 0.2}, {{0.8, 0.2}, {0.5, 0.5}});
    a.observation_rate = rate;
    a.prior = uniform_prior(2);
    return {a, a};
}

constexpr double kGap = 0.19274475702175753;

}  // namespace

TEST_CASE("kl divergence matches hand values and handles zeros") {
    const std::vector<double> p = {0.3, 0.7};
    const std::vector<double> q = {0.5, 0.5};
    CHECK(kl_divergence(p, q) == doctest::Approx(0.08228287850505178).epsilon(1e-15));
    CHECK(kl_divergence(p, p) == 0.0);

    // 0 log(0/q) contributes nothing.
    const std::vector<double> p0 = {0.0, 1.0};
    CHECK(kl_divergence(p0, q) == doctest::Approx(std::log(2.0)).epsilon(1e-15));

    // Mass where q vanishes is infinite divergence: rejected.
    const std::vector<double> q0 = {1.0, 0.0};
    CHECK_THROWS_AS(kl_divergence(p, q0), std::invalid_argument);
    const std::vector<double> shorter = {1.0};
    CHECK_THROWS_AS(kl_divergence(p, shorter), std::invalid_argument);
}

TEST_CASE("group confidence aggregates rate-weighted divergences") {
    const auto agents = gap_instance();
    const std::vector<int> all = {0, 1};
    const ConfidenceProfile c = group_confidence(all, agents);
    CHECK(c.value[0] == doctest::Approx(0.0));
    CHECK(c.value[1] == doctest::Approx(-2.0 * kGap).epsilon(1e-14));
    CHECK(c.max() == doctest::Approx(0.0));

    const std::vector<int> solo = {1};
    CHECK(group_confidence(solo, agents).value[1] == doctest::Approx(-kGap).epsilon(1e-14));

    // Observation rates scale the confidence linearly.
    const auto lazy = gap_instance(0.5);
    CHECK(group_confidence(all, lazy).value[1] == doctest::Approx(-kGap).epsilon(1e-14));

    // The unweighted objective ignores rates.
    CHECK(objective(1, lazy) == doctest::Approx(2.0 * kGap).epsilon(1e-14));
    CHECK(objective(0, lazy) == doctest::Approx(0.0));
}

TEST_CASE("optimal sets honor absolute and relative tolerance bands") {
    const auto agents = gap_instance();
    CHECK(optimal_set(agents) == std::vector<int>{0});
    CHECK(optimal_set(agents, 2.0 * kGap + 1e-9) == std::vector<int>{0, 1});
    CHECK(optimal_set_relative(agents) == std::vector<int>{0});

    // Exact tie: both hypotheses explain the data equally well.
    AgentSpec tied;
    tied.model = two_symbol_model({0.5, 0.5}, {{0.6, 0.4}, {0.4, 0.6}});
    tied.observation_rate = 1.0;
    tied.prior = uniform_prior(2);
    const std::vector<AgentSpec> sym = {tied, tied};
    CHECK(optimal_set_relative(sym) == std::vector<int>{0, 1});
}

TEST_CASE("observational equivalence is relative to the observer subset") {
    // Agent 0 cannot tell the hypotheses apart; agent 1 can.
    AgentSpec blind;
    blind.model = two_symbol_model({0.6, 0.4}, {{0.6, 0.4}, {0.6, 0.4}});
    blind.observation_rate = 1.0;
    blind.prior = uniform_prior(2);
    AgentSpec sharp;
    sharp.model = two_symbol_model({0.8, 0.2}, {{0.8, 0.2}, {0.5, 0.5}});
    sharp.observation_rate = 1.0;
    sharp.prior = uniform_prior(2);
    const std::vector<AgentSpec> agents = {blind, sharp};

    const std::vector<int> only_blind = {0};
    const std::vector<int> both = {0, 1};
    CHECK(observationally_equivalent(only_blind, 0, 1, agents, 1e-12));
    CHECK_FALSE(observationally_equivalent(both, 0, 1, agents, 1e-12));
}

TEST_CASE("time-varying-schedule constants match the frozen hand computation") {
    const auto agents = gap_instance();
    const RateConstants c = time_varying_constants(agents, 0.05, 0.25, 1);
    CHECK(c.kind == CertificateKind::TimeVarying);
    CHECK(c.alpha == doctest::Approx(0.2));
    CHECK(c.lambda == doctest::Approx(0.984375).epsilon(1e-15));
    CHECK(c.gamma2 == doctest::Approx(kGap).epsilon(1e-14));
    REQUIRE(c.gamma1.size() == 2);
    CHECK(c.gamma1[0] == doctest::Approx(856.7634057907052).epsilon(1e-12));
    CHECK(c.threshold_step == 1671);
    CHECK(c.rho == 0.05);
    CHECK(c.log_bound(100, 0) == doctest::Approx(847.1261679396173).epsilon(1e-12));

    // The displayed curve saturates at one until the rate takes over.
    CHECK(bound_curve_clamped(c, 100, 0) == 1.0);
    CHECK(bound_curve_clamped(c, 10000, 1) < 1.0);
    CHECK_THROWS_AS(bound_curve(c, 10, 2), std::invalid_argument);

    // Slower observations widen the threshold through a smaller gamma2.
    const RateConstants half = time_varying_constants(gap_instance(0.5), 0.05, 0.25, 1);
    CHECK(half.gamma2 == doctest::Approx(0.5 * kGap).epsilon(1e-14));
    CHECK(half.threshold_step > c.threshold_step);
}

TEST_CASE("non-uniform priors enter the transient offset only") {
    auto agents = gap_instance();
    const std::vector<double> skew = {0.3, 0.7};
    agents[0].prior = BeliefState::from_probabilities(skew);
    const RateConstants c = time_varying_constants(agents, 0.05, 0.25, 1);
    CHECK(c.gamma1[0] == doctest::Approx(0.8472978603872037 + 856.7634057907052).epsilon(1e-12));
    CHECK(c.gamma2 == doctest::Approx(kGap).epsilon(1e-14));
}

TEST_CASE("accelerated-rule constants match the frozen hand computation") {
    const auto agents = gap_instance();
    const RateConstants c = momentum_constants(agents, 0.05, 3);
    CHECK(c.kind == CertificateKind::MomentumStatic);
    CHECK(c.lambda == doctest::Approx(0.9814814814814815).epsilon(1e-15));  // 1 - 1/54
    CHECK(c.gamma2 == doctest::Approx(kGap).epsilon(1e-14));
    CHECK(c.gamma1[1] == doctest::Approx(240.9647078786362).epsilon(1e-12));
    CHECK(c.threshold_step == 10026);

    CHECK_THROWS_AS(momentum_constants(agents, 0.05, 1), std::invalid_argument);  // U < n

    auto skewed = gap_instance();
    const std::vector<double> skew = {0.3, 0.7};
    skewed[0].prior = BeliefState::from_probabilities(skew);
    CHECK_THROWS_AS(momentum_constants(skewed, 0.05, 2), std::invalid_argument);
}

TEST_CASE("rate constants reject degenerate inputs") {
    auto agents = gap_instance();
    CHECK_THROWS_AS(time_varying_constants(agents, 0.0, 0.25, 1), std::invalid_argument);
    CHECK_THROWS_AS(time_varying_constants(agents, 1.0, 0.25, 1), std::invalid_argument);

    auto floorless = gap_instance();
    floorless[0].model.support_floor = 0.0;
    CHECK_THROWS_AS(time_varying_constants(floorless, 0.05, 0.25, 1), std::invalid_argument);

    // When every hypothesis is optimal no rate statement exists.
    AgentSpec flat;
    flat.model = two_symbol_model({0.5, 0.5}, {{0.5, 0.5}, {0.5, 0.5}});
    flat.observation_rate = 1.0;
    flat.prior = uniform_prior(2);
    const std::vector<AgentSpec> all_optimal = {flat, flat};
    CHECK_THROWS_AS(time_varying_constants(all_optimal, 0.05, 0.25, 1), std::invalid_argument);
}

TEST_CASE("log belief ratios are per-agent and guard the reference mass") {
    const std::vector<BeliefState> beliefs = {
        BeliefState::from_probabilities(std::vector<double>{0.2, 0.8}),
        BeliefState::from_probabilities(std::vector<double>{0.5, 0.5}),
    };
    const std::vector<double> r = log_belief_ratio(beliefs, 0, 1);
    CHECK(r[0] == doctest::Approx(std::log(0.25)).epsilon(1e-14));
    CHECK(r[1] == doctest::Approx(0.0));

    const std::vector<BeliefState> zeroed = {
        BeliefState::from_probabilities(std::vector<double>{1.0, 0.0}),
    };
    CHECK_THROWS_AS(log_belief_ratio(zeroed, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(log_belief_ratio(beliefs, 0, 5), std::invalid_argument);
}
