#include <doctest.h>

#include <cmath>
#include <optional>
#include <vector>

#include "nblearn/errors.hpp"
#include "nblearn/rng.hpp"
#include "nblearn/rules.hpp"
#include "nblearn/types.hpp"

using namespace nblearn;

namespace {

// Random normalized vector in direct probability space; entries >= floor/2.
std::vector<double> random_simplex(const CounterRng& rng, std::uint64_t step, std::uint64_t agent,
                                   int m) {
    std::vector<double> v(m);
    double sum = 0.0;
    for (int t = 0; t < m; ++t) {
        v[t] = 0.05 + rng.uniform(step, agent, 10 + t);
        sum += v[t];
    }
    for (double& x : v) x /= sum;
    return v;
}

LikelihoodModel random_model(const CounterRng& rng, std::uint64_t step, int m, int symbols) {
    LikelihoodModel model;
    model.alphabet = SignalAlphabet::indexed(symbols);
    model.truth = random_simplex(rng, step, 1000, symbols);
    for (int t = 0; t < m; ++t) model.conditionals.push_back(random_simplex(rng, step, 2000 + t, symbols));
    model.support_floor = model.realized_support_floor();
    return model;
}

}  // namespace

TEST_CASE("bayes update matches the direct probability-space posterior") {
    const CounterRng rng(0xbadcafeULL);
    for (std::uint64_t i = 0; i < 300; ++i) {
        const int m = 2 + static_cast<int>(rng.bits(i, 0, 0) % 5);
        const int symbols = 2 + static_cast<int>(rng.bits(i, 1, 0) % 4);
        const LikelihoodModel model = random_model(rng, i, m, symbols);
        const std::vector<double> prior = random_simplex(rng, i, 3000, m);
        const int s = static_cast<int>(rng.bits(i, 2, 0) % symbols);

        const BeliefState post = bayes_update(BeliefState::from_probabilities(prior), model, s);

        double z = 0.0;
        for (int t = 0; t < m; ++t) z += prior[t] * model.likelihood(t, s);
        for (int t = 0; t < m; ++t)
            CHECK(std::abs(post.prob(t) - prior[t] * model.likelihood(t, s) / z) < 1e-14);
    }
}

TEST_CASE("bayes update rejects bad input and orthogonal priors") {
    LikelihoodModel model;
    model.alphabet = SignalAlphabet::indexed(2);
    model.truth = {0.5, 0.5};
    model.conditionals = {{1.0, 0.0}, {0.0, 1.0}};
    model.support_floor = 1.0;
    const BeliefState sure = BeliefState::from_probabilities(std::vector<double>{1.0, 0.0});
    CHECK_THROWS_AS(bayes_update(sure, model, 1), DegeneratePosteriorError);
    CHECK_THROWS_AS(bayes_update(sure, model, 2), std::invalid_argument);
    CHECK_THROWS_AS(bayes_update(BeliefState::uniform(3), model, 0), std::invalid_argument);
}

TEST_CASE("geometric pool update reproduces the hand-computed instance") {
    // Equal-weight geometric mean of mirrored beliefs is uniform; the
    // likelihood factor (0.6, 0.2) then tilts it to (0.75, 0.25).
    LikelihoodModel model;
    model.alphabet = SignalAlphabet::indexed(1);
    model.truth = {1.0};
    model.conditionals = {{0.6}, {0.2}};
    model.support_floor = 0.2;
    const std::vector<BeliefState> beliefs = {
        BeliefState::from_probabilities(std::vector<double>{0.9, 0.1}),
        BeliefState::from_probabilities(std::vector<double>{0.1, 0.9}),
    };
    const std::vector<double> w = {0.5, 0.5};
    const BeliefState out = geometric_pool_update(w, beliefs, model, 0);
    CHECK(out.prob(0) == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(out.prob(1) == doctest::Approx(0.25).epsilon(1e-14));

    // Without a signal the update is the bare pool: uniform here.
    const BeliefState bare = geometric_pool_update(w, beliefs, model, std::nullopt);
    CHECK(bare.prob(0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("single agent with unit self-weight reduces the pool to bayes") {
    const CounterRng rng(0x5e1fULL);
    for (std::uint64_t i = 0; i < 100; ++i) {
        const LikelihoodModel model = random_model(rng, i, 4, 3);
        const BeliefState prior = BeliefState::from_probabilities(random_simplex(rng, i, 1, 4));
        const int s = static_cast<int>(rng.bits(i, 0, 0) % 3);
        const std::vector<double> w = {1.0};
        const std::vector<BeliefState> b = {prior};
        const BeliefState pooled = geometric_pool_update(w, b, model, s);
        const BeliefState direct = bayes_update(prior, model, s);
        CHECK(pooled.max_abs_diff(direct) < 1e-14);
    }
}

TEST_CASE("pool weight rows are validated") {
    const std::vector<BeliefState> b = {BeliefState::uniform(2), BeliefState::uniform(2)};
    LikelihoodModel model;
    model.alphabet = SignalAlphabet::indexed(1);
    model.truth = {1.0};
    model.conditionals = {{0.5}, {0.5}};
    model.support_floor = 0.5;
    const std::vector<double> short_row = {1.0};
    const std::vector<double> unnormalized = {0.6, 0.6};
    const std::vector<double> negative = {1.5, -0.5};
    CHECK_THROWS_AS(geometric_pool_update(short_row, b, model, 0), std::invalid_argument);
    CHECK_THROWS_AS(geometric_pool_update(unnormalized, b, model, 0), std::invalid_argument);
    CHECK_THROWS_AS(geometric_pool_update(negative, b, model, 0), std::invalid_argument);
    CHECK_THROWS_AS(qlop_pool(PoolKind::Linear, unnormalized, b), std::invalid_argument);
}

TEST_CASE("linear and logarithmic pools take the stated means") {
    const std::vector<BeliefState> b = {
        BeliefState::from_probabilities(std::vector<double>{0.8, 0.2}),
        BeliefState::from_probabilities(std::vector<double>{0.4, 0.6}),
    };
    const std::vector<double> w = {0.25, 0.75};
    const BeliefState lin = qlop_pool(PoolKind::Linear, w, b);
    CHECK(lin.prob(0) == doctest::Approx(0.25 * 0.8 + 0.75 * 0.4).epsilon(1e-14));

    const BeliefState log = qlop_pool(PoolKind::Logarithmic, w, b);
    const double g0 = std::pow(0.8, 0.25) * std::pow(0.4, 0.75);
    const double g1 = std::pow(0.2, 0.25) * std::pow(0.6, 0.75);
    CHECK(log.prob(0) == doctest::Approx(g0 / (g0 + g1)).epsilon(1e-14));
}

TEST_CASE("the log pool commutes with bayes updating, the linear pool does not") {
    const CounterRng rng(0xc0ffeeULL);
    for (std::uint64_t i = 0; i < 500; ++i) {
        const int n = 2 + static_cast<int>(rng.bits(i, 0, 1) % 7);
        const int m = 2 + static_cast<int>(rng.bits(i, 1, 1) % 5);
        const int symbols = 2 + static_cast<int>(rng.bits(i, 2, 1) % 3);
        const LikelihoodModel model = random_model(rng, i, m, symbols);
        std::vector<BeliefState> beliefs;
        std::vector<double> w(n);
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
            beliefs.push_back(BeliefState::from_probabilities(random_simplex(rng, i, 100 + j, m)));
            w[j] = 0.05 + rng.uniform(i, 200 + j, 1);
            sum += w[j];
        }
        for (double& x : w) x /= sum;
        const int s = static_cast<int>(rng.bits(i, 3, 1) % symbols);
        CHECK(externally_bayesian_check(w, beliefs, model, s) < 1e-12);
    }

    // Explicit counterexample for the arithmetic pool on mirrored beliefs.
    LikelihoodModel model;
    model.alphabet = SignalAlphabet::indexed(1);
    model.truth = {1.0};
    model.conditionals = {{0.6}, {0.2}};
    model.support_floor = 0.2;
    const std::vector<BeliefState> beliefs = {
        BeliefState::from_probabilities(std::vector<double>{0.9, 0.1}),
        BeliefState::from_probabilities(std::vector<double>{0.1, 0.9}),
    };
    const std::vector<double> w = {0.5, 0.5};
    const BeliefState pool_first = linear_pool_then_bayes(w, beliefs, model, 0);
    const std::vector<const LikelihoodModel*> models = {&model, &model};
    const std::vector<std::optional<int>> symbols = {0, 0};
    const BeliefState update_first = bayes_then_linear_pool(w, beliefs, models, symbols);
    CHECK(pool_first.prob(0) == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(update_first.prob(0) == doctest::Approx(0.54 / 0.56 * 0.5 + 0.25 * 0.5).epsilon(1e-14));
    CHECK(pool_first.max_abs_diff(update_first) > 0.1);
}

TEST_CASE("geometric pool is equivariant under hypothesis relabeling") {
    const CounterRng rng(0x9e37ULL);
    const int m = 5;
    const std::vector<int> perm = {3, 0, 4, 1, 2};
    for (std::uint64_t i = 0; i < 50; ++i) {
        const LikelihoodModel model = random_model(rng, i, m, 3);
        LikelihoodModel permuted = model;
        for (int t = 0; t < m; ++t) permuted.conditionals[t] = model.conditionals[perm[t]];

        std::vector<BeliefState> beliefs, beliefs_p;
        for (int j = 0; j < 3; ++j) {
            const std::vector<double> p = random_simplex(rng, i, 50 + j, m);
            std::vector<double> pp(m);
            for (int t = 0; t < m; ++t) pp[t] = p[perm[t]];
            beliefs.push_back(BeliefState::from_probabilities(p));
            beliefs_p.push_back(BeliefState::from_probabilities(pp));
        }
        const std::vector<double> w = {0.2, 0.5, 0.3};
        const BeliefState out = geometric_pool_update(w, beliefs, model, 1);
        const BeliefState out_p = geometric_pool_update(w, beliefs_p, permuted, 1);
        for (int t = 0; t < m; ++t) CHECK(out_p.prob(t) == doctest::Approx(out.prob(perm[t])).epsilon(1e-13));
    }
}

TEST_CASE("an exact zero in any pooled belief stays zero") {
    const std::vector<BeliefState> b = {
        BeliefState::from_probabilities(std::vector<double>{0.0, 0.5, 0.5}),
        BeliefState::from_probabilities(std::vector<double>{0.6, 0.2, 0.2}),
    };
    LikelihoodModel model;
    model.alphabet = SignalAlphabet::indexed(1);
    model.truth = {1.0};
    model.conditionals = {{0.9}, {0.9}, {0.9}};
    model.support_floor = 0.9;
    const std::vector<double> w = {0.5, 0.5};
    const BeliefState out = geometric_pool_update(w, b, model, 0);
    CHECK(out.log_prob(0) == kNegInf);
    CHECK(out.prob(0) == 0.0);
    CHECK(out.prob(1) == doctest::Approx(0.5).epsilon(1e-14));

    // With zero pool weight the ruled-out belief is ignored instead.
    const std::vector<double> w2 = {0.0, 1.0};
    CHECK(geometric_pool_update(w2, b, model, 0).prob(0) == doctest::Approx(0.6).epsilon(1e-14));
}

TEST_CASE("momentum update matches an independently evaluated instance") {
    LikelihoodModel model;
    model.alphabet = SignalAlphabet::indexed(1);
    model.truth = {1.0};
    model.conditionals = {{0.2}, {0.5}, {0.3}};
    model.support_floor = 0.2;
    std::vector<AgentMemory> mem(2);
    mem[0].current = BeliefState::from_probabilities(std::vector<double>{0.5, 0.3, 0.2});
    mem[1].current = BeliefState::from_probabilities(std::vector<double>{0.2, 0.5, 0.3});
    mem[0].previous = BeliefState::from_probabilities(std::vector<double>{0.4, 0.4, 0.2});
    mem[1].previous = BeliefState::from_probabilities(std::vector<double>{0.3, 0.3, 0.4});
    mem[0].prev_log_likelihood = {std::log(0.6), std::log(0.3), std::log(0.1)};
    mem[1].prev_log_likelihood = {0.0, 0.0, 0.0};  // silent last step
    const std::vector<double> w = {0.7, 0.3};

    const BeliefState out = accelerated_update(w, mem, 0.4, model, 0);
    CHECK(out.prob(0) == doctest::Approx(0.19579947070080148).epsilon(1e-14));
    CHECK(out.prob(1) == doctest::Approx(0.5293744176609826).epsilon(1e-14));
    CHECK(out.prob(2) == doctest::Approx(0.2748261116382158).epsilon(1e-14));
}

TEST_CASE("momentum update degenerates to the geometric pool when history is flat") {
    const CounterRng rng(0xabcdULL);
    for (std::uint64_t i = 0; i < 60; ++i) {
        const int m = 2 + static_cast<int>(rng.bits(i, 0, 3) % 4);
        const LikelihoodModel model = random_model(rng, i, m, 3);
        std::vector<AgentMemory> mem(3);
        std::vector<BeliefState> flat;
        for (int j = 0; j < 3; ++j) {
            const BeliefState b = BeliefState::from_probabilities(random_simplex(rng, i, 70 + j, m));
            mem[j].current = b;
            mem[j].previous = b;  // same state twice, no signal last step
            mem[j].prev_log_likelihood.assign(m, 0.0);
            flat.push_back(b);
        }
        const std::vector<double> w = {0.5, 0.25, 0.25};
        const int s = static_cast<int>(rng.bits(i, 1, 3) % 3);

        const BeliefState with_momentum = accelerated_update(w, mem, 0.9, model, s);
        const BeliefState without = accelerated_update(w, mem, 0.0, model, s);
        const BeliefState plain = geometric_pool_update(w, flat, model, s);
        CHECK(with_momentum.max_abs_diff(plain) < 1e-12);
        CHECK(without.max_abs_diff(plain) < 1e-13);
    }
}

TEST_CASE("momentum update zero handling distinguishes numerator and denominator") {
    LikelihoodModel model;
    model.alphabet = SignalAlphabet::indexed(1);
    model.truth = {1.0};
    model.conditionals = {{0.5}, {0.5}};
    model.support_floor = 0.5;
    const std::vector<double> w = {1.0};

    std::vector<AgentMemory> mem(1);
    mem[0].current = BeliefState::from_probabilities(std::vector<double>{0.0, 1.0});
    mem[0].previous = BeliefState::from_probabilities(std::vector<double>{0.0, 1.0});
    mem[0].prev_log_likelihood = {0.0, 0.0};
    // Zero numerator and zero history together: hypothesis stays ruled out.
    const BeliefState out = accelerated_update(w, mem, 0.5, model, 0);
    CHECK(out.log_prob(0) == kNegInf);
    CHECK(out.prob(1) == doctest::Approx(1.0));

    // Zero only in the subtracted history term: 0^(-sigma) has no value.
    mem[0].current = BeliefState::from_probabilities(std::vector<double>{0.5, 0.5});
    CHECK_THROWS_AS(accelerated_update(w, mem, 0.5, model, 0), DegeneratePosteriorError);

    CHECK_THROWS_AS(accelerated_update(w, mem, 1.0, model, 0), std::invalid_argument);
    CHECK_THROWS_AS(accelerated_update(w, mem, -0.1, model, 0), std::invalid_argument);
}

TEST_CASE("update-then-pool requires models only where signals exist") {
    const std::vector<BeliefState> b = {
        BeliefState::from_probabilities(std::vector<double>{0.9, 0.1}),
        BeliefState::from_probabilities(std::vector<double>{0.1, 0.9}),
    };
    LikelihoodModel model;
    model.alphabet = SignalAlphabet::indexed(1);
    model.truth = {1.0};
    model.conditionals = {{0.6}, {0.2}};
    model.support_floor = 0.2;
    const std::vector<double> w = {0.5, 0.5};

    // Neighbor 1 silent: its belief passes through the pool untouched.
    const std::vector<const LikelihoodModel*> models = {&model, nullptr};
    const std::vector<std::optional<int>> symbols = {0, std::nullopt};
    const BeliefState out = bayes_then_linear_pool(w, b, models, symbols);
    CHECK(out.prob(0) == doctest::Approx(0.5 * (0.54 / 0.56) + 0.5 * 0.1).epsilon(1e-14));

    // A signal without a model is a usage error.
    const std::vector<std::optional<int>> bad = {0, 0};
    CHECK_THROWS_AS(bayes_then_linear_pool(w, b, models, bad), std::invalid_argument);
}

TEST_CASE("likelihood gossip multiplies in weighted likelihood columns") {
    const BeliefState own = BeliefState::from_probabilities(std::vector<double>{0.5, 0.5});
    const std::vector<double> col0 = {std::log(0.6), std::log(0.2)};
    const std::vector<double> w = {0.5, 0.5};
    const std::vector<const std::vector<double>*> cols = {&col0, nullptr};
    const BeliefState out = likelihood_sharing_update(own, w, cols);
    const double g0 = 0.5 * std::pow(0.6, 0.5);
    const double g1 = 0.5 * std::pow(0.2, 0.5);
    CHECK(out.prob(0) == doctest::Approx(g0 / (g0 + g1)).epsilon(1e-14));

    // A -inf column entry rules the hypothesis out; all ruled out degenerates.
    const std::vector<double> kill0 = {kNegInf, std::log(0.5)};
    const std::vector<const std::vector<double>*> killing = {&kill0, nullptr};
    CHECK(likelihood_sharing_update(own, w, killing).prob(0) == 0.0);
    const std::vector<double> kill_all = {kNegInf, kNegInf};
    const std::vector<const std::vector<double>*> fatal = {&kill_all, nullptr};
    CHECK_THROWS_AS(likelihood_sharing_update(own, w, fatal), DegeneratePosteriorError);
}

TEST_CASE("centralized baseline multiplies every observed likelihood column") {
    const BeliefState prior = BeliefState::from_probabilities(std::vector<double>{0.25, 0.75});
    const std::vector<double> c0 = {std::log(0.6), std::log(0.2)};
    const std::vector<double> c1 = {std::log(0.3), std::log(0.9)};
    const std::vector<const std::vector<double>*> cols = {&c0, nullptr, &c1};
    const BeliefState out = centralized_bayes_update(prior, cols);
    const double p0 = 0.25 * 0.6 * 0.3;
    const double p1 = 0.75 * 0.2 * 0.9;
    CHECK(out.prob(0) == doctest::Approx(p0 / (p0 + p1)).epsilon(1e-14));
    CHECK(out.prob(1) == doctest::Approx(p1 / (p0 + p1)).epsilon(1e-14));
}

TEST_CASE("rule names round-trip through the parser") {
    for (UpdateRuleKind k :
         {UpdateRuleKind::GeometricPool, UpdateRuleKind::AcceleratedGeometric,
          UpdateRuleKind::LinearPoolThenBayes, UpdateRuleKind::BayesThenLinearPool,
          UpdateRuleKind::LikelihoodSharing, UpdateRuleKind::CentralizedBayes}) {
        CHECK(parse_rule_kind(to_string(k)) == k);
    }
    CHECK_FALSE(parse_rule_kind("majority_vote").has_value());
}
