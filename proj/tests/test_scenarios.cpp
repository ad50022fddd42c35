#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "nblearn/analysis.hpp"
#include "nblearn/errors.hpp"
#include "nblearn/scenarios.hpp"

using namespace nblearn;

namespace {

void check_built(const BuiltScenario& s) {
    REQUIRE_FALSE(s.agents.empty());
    for (const auto& a : s.agents) {
        const auto violations = validate_model(a.model);
        CHECK(violations.empty());
        CHECK(a.prior.size() == s.hypotheses.size());
        CHECK(a.model.hypothesis_count() == s.hypotheses.size());
    }
    // The shipped optimal set is exactly the recomputed one.
    CHECK(s.optimal == optimal_set_relative(s.agents));
}

}  // namespace

TEST_CASE("density discretization is normalized and rejects mass loss") {
    const DiscretizationSpec spec{-5.0, 7.5, 64};
    const auto mids = spec.midpoints();
    REQUIRE(mids.size() == 64);
    CHECK(mids.front() == doctest::Approx(-5.0 + spec.bin_width() / 2));
    CHECK(mids.back() == doctest::Approx(7.5 - spec.bin_width() / 2));

    const double covered = normal_cdf(7.5, 0.0, 1.0) - normal_cdf(-5.0, 0.0, 1.0);
    const auto probs =
        discretize_density(spec, [](double x) { return normal_pdf(x, 0.0, 1.0); }, covered);
    CHECK(std::accumulate(probs.begin(), probs.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));

    // A mean far outside the window loses essentially all mass.
    const double lost = normal_cdf(7.5, 100.0, 1.0) - normal_cdf(-5.0, 100.0, 1.0);
    CHECK_THROWS_AS(
        discretize_density(spec, [](double x) { return normal_pdf(x, 100.0, 1.0); }, lost),
        InvalidDiscretizationError);
}

TEST_CASE("normal distribution helpers match reference values") {
    CHECK(normal_pdf(0.0, 0.0, 1.0) == doctest::Approx(0.3989422804014327).epsilon(1e-15));
    CHECK(normal_cdf(0.0, 0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(normal_cdf(1.96, 0.0, 1.0) == doctest::Approx(0.9750021048517795).epsilon(1e-12));
    CHECK(normal_cdf(3.0, 1.0, 2.0) == doctest::Approx(0.8413447460685429).epsilon(1e-12));
}

TEST_CASE("two-agent example separates the optimum only jointly") {
    const BuiltScenario s = build_two_agent_example();
    check_built(s);
    REQUIRE(s.agents.size() == 2);
    REQUIRE(s.hypotheses.size() == 3);
    CHECK(s.graph.n == 2);
    CHECK(s.graph.has_edge(0, 1));

    // Brute-force divergence objective per hypothesis, known analytically
    // for the underlying Gaussians: 2.125, 0.25, 0.625 up to discretization.
    CHECK(objective(0, s.agents) == doctest::Approx(2.125).epsilon(2e-3));
    CHECK(objective(1, s.agents) == doctest::Approx(0.25).epsilon(2e-3));
    CHECK(objective(2, s.agents) == doctest::Approx(0.625).epsilon(2e-3));
    CHECK(s.optimal == std::vector<int>{1});

    // Alone, each agent cannot separate the optimum from one distractor:
    // agent 0 confuses it with theta_1, agent 1 with theta_3.
    const std::vector<int> first = {0};
    const std::vector<int> second = {1};
    CHECK(observationally_equivalent(first, 1, 0, s.agents, 1e-5));
    CHECK(observationally_equivalent(second, 1, 2, s.agents, 1e-5));
    CHECK_FALSE(observationally_equivalent(first, 1, 2, s.agents, 1e-5));
    CHECK_FALSE(observationally_equivalent(second, 1, 0, s.agents, 1e-5));
}

TEST_CASE("bernoulli contrast puts every agent behind one strict optimum") {
    const BuiltScenario s = build_bernoulli_contrast(6, 1.0);
    check_built(s);
    CHECK(static_cast<int>(s.agents.size()) == 6);
    CHECK(s.optimal == std::vector<int>{0});
    for (const auto& a : s.agents) {
        CHECK(a.observation_rate == 1.0);
        CHECK(a.model.support_floor > 0.0);
    }
    // The gap certifies a positive asymptotic rate.
    const RateConstants c = time_varying_constants(s.agents, 0.1, 1.0 / 6.0, 1);
    CHECK(c.gamma2 > 0.0);

    const BuiltScenario lazy = build_bernoulli_contrast(4, 0.5);
    check_built(lazy);
    for (const auto& a : lazy.agents) CHECK(a.observation_rate == 0.5);
}

TEST_CASE("one informative agent decides for the whole network") {
    const BuiltScenario s = build_one_informative(8, 0.9);
    check_built(s);
    REQUIRE(s.agents.size() == 8);
    CHECK(s.optimal == std::vector<int>{0});

    // Only node 0 separates the hypotheses.
    const std::vector<int> head = {0};
    CHECK_FALSE(observationally_equivalent(head, 0, 1, s.agents, 1e-9));
    for (int i = 1; i < 8; ++i) {
        const std::vector<int> tail = {i};
        CHECK(observationally_equivalent(tail, 0, 1, s.agents, 1e-12));
    }

    // Without the informative node every hypothesis is optimal.
    const std::vector<AgentSpec> rest(s.agents.begin() + 1, s.agents.end());
    CHECK(optimal_set_relative(rest) == std::vector<int>{0, 1});
}

TEST_CASE("clique merge flips the per-clique optima into one joint winner") {
    // Three agents see data favoring theta_1, two see data favoring theta_2;
    // the majority clique carries the joint optimum.
    auto clique_model = [](std::vector<double> truth) {
        LikelihoodModel m;
        m.alphabet = SignalAlphabet::indexed(2);
        m.truth = std::move(truth);
        m.conditionals = {{0.8, 0.2}, {0.2, 0.8}};
        m.support_floor = m.realized_support_floor();
        return m;
    };
    const std::vector<CliqueSpec> specs = {
        {3, clique_model({0.8, 0.2}), 1.0},
        {2, clique_model({0.35, 0.65}), 1.0},
    };
    const CliqueMergeScenario s = build_clique_merge(specs);
    REQUIRE(s.agents.size() == 5);
    REQUIRE(s.clique_of == std::vector<int>{0, 0, 0, 1, 1});

    // Isolated: each clique is complete and disconnected from the other.
    CHECK_FALSE(s.isolated.connected());
    CHECK(s.isolated.has_edge(0, 1));
    CHECK(s.isolated.has_edge(3, 4));
    CHECK_FALSE(s.isolated.has_edge(0, 3));
    // Merged: one bridge between the clique heads.
    CHECK(s.merged.connected());
    CHECK(s.merged.has_edge(0, 3));
    CHECK(s.merged.edges.size() == s.isolated.edges.size() + 1);

    // Per-clique brute force: the cliques disagree.
    REQUIRE(s.clique_optimal.size() == 2);
    CHECK(s.clique_optimal[0] == std::vector<int>{0});
    CHECK(s.clique_optimal[1] == std::vector<int>{1});

    // Jointly the larger clique's evidence wins.
    CHECK(s.merged_optimal == std::vector<int>{0});
    CHECK(s.merged_optimal == optimal_set_relative(s.agents));

    for (const auto& a : s.agents) CHECK(validate_model(a.model).empty());
}

TEST_CASE("localization truth lies on a lattice point when the source does") {
    LocalizationScenario p;
    p.grid_side = 5;
    p.area_half_extent = 10.0;
    p.source = {0.0, 0.0};  // exactly the center lattice point of a 5x5 grid
    p.regular = 3;
    p.no_measurement = 1;
    p.conflicting = 0;
    p.bins = 48;
    p.comm_radius = 30.0;
    const BuiltLocalization b = build_localization(p);
    check_built(b.scenario);
    REQUIRE(b.scenario.hypotheses.size() == 25);
    REQUIRE(b.scenario.agents.size() == 4);
    REQUIRE(b.hypothesis_positions.size() == 25);

    // Corners included: the lattice spans the full square.
    CHECK(b.hypothesis_positions.front().first == doctest::Approx(-10.0));
    CHECK(b.hypothesis_positions.back().second == doctest::Approx(10.0));

    // The optimum is the hypothesis sitting on the source.
    REQUIRE(b.scenario.optimal.size() == 1);
    const auto star = b.hypothesis_positions[static_cast<std::size_t>(b.scenario.optimal[0])];
    CHECK(star.first == doctest::Approx(0.0));
    CHECK(star.second == doctest::Approx(0.0));

    // Roles map to observation rates.
    REQUIRE(b.roles.size() == 4);
    for (std::size_t i = 0; i < b.roles.size(); ++i) {
        const double q = b.scenario.agents[i].observation_rate;
        if (b.roles[i] == AgentRole::NoMeasurement)
            CHECK(q == 0.0);
        else
            CHECK(q == p.observation_rate);
    }
}

TEST_CASE("localization with no measuring agent cannot rank hypotheses") {
    LocalizationScenario p;
    p.grid_side = 3;
    p.regular = 0;
    p.no_measurement = 3;
    p.conflicting = 0;
    p.bins = 32;
    p.comm_radius = 30.0;
    const BuiltLocalization b = build_localization(p);
    CHECK(b.scenario.optimal.size() == 9);  // every hypothesis ties
}

TEST_CASE("conflicting agents drag the optimum toward their target") {
    LocalizationScenario honest;
    honest.grid_side = 5;
    honest.source = {5.0, 5.0};
    honest.conflict_target = {-5.0, -5.0};
    honest.regular = 4;
    honest.no_measurement = 0;
    honest.conflicting = 0;
    honest.bins = 48;
    honest.comm_radius = 40.0;

    LocalizationScenario skewed = honest;
    skewed.regular = 0;
    skewed.conflicting = 4;

    const BuiltLocalization h = build_localization(honest);
    const BuiltLocalization s = build_localization(skewed);
    REQUIRE(h.scenario.optimal.size() == 1);
    REQUIRE(s.scenario.optimal.size() == 1);
    const auto h_star = h.hypothesis_positions[static_cast<std::size_t>(h.scenario.optimal[0])];
    const auto s_star = s.hypothesis_positions[static_cast<std::size_t>(s.scenario.optimal[0])];
    CHECK(h_star.first == doctest::Approx(5.0));
    CHECK(h_star.second == doctest::Approx(5.0));
    CHECK(s_star.first == doctest::Approx(-5.0));
    CHECK(s_star.second == doctest::Approx(-5.0));
}

TEST_CASE("localization parameter validation") {
    LocalizationScenario p;
    p.regular = 0;
    p.no_measurement = 0;
    p.conflicting = 0;
    CHECK_THROWS_AS(build_localization(p), std::invalid_argument);

    LocalizationScenario off;
    off.source = {50.0, 0.0};  // outside the area
    CHECK_THROWS_AS(build_localization(off), std::invalid_argument);

    LocalizationScenario tiny;
    tiny.grid_side = 0;
    CHECK_THROWS_AS(build_localization(tiny), std::invalid_argument);
}
