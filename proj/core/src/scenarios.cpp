#include "nblearn/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "nblearn/analysis.hpp"
#include "nblearn/errors.hpp"
#include "nblearn/rng.hpp"

namespace nblearn {

namespace {

constexpr double kCoverageTol = 1e-6;

LikelihoodModel make_model(SignalAlphabet alphabet, std::vector<double> truth,
                           std::vector<std::vector<double>> conditionals) {
    LikelihoodModel model;
    model.alphabet = std::move(alphabet);
    model.truth = std::move(truth);
    model.conditionals = std::move(conditionals);
    model.support_floor = model.realized_support_floor();
    require_valid_model(model);
    return model;
}

}  // namespace

std::vector<double> DiscretizationSpec::midpoints() const {
    if (bins < 2) throw InvalidDiscretizationError("discretization needs at least two bins");
    if (!(hi > lo)) throw InvalidDiscretizationError("discretization range is empty");
    std::vector<double> mid(bins);
    const double h = bin_width();
    for (int b = 0; b < bins; ++b) mid[b] = lo + (static_cast<double>(b) + 0.5) * h;
    return mid;
}

std::vector<double> discretize_density(const DiscretizationSpec& spec,
                                       const std::function<double(double)>& pdf, double covered_mass) {
    if (covered_mass < 1.0 - kCoverageTol)
        throw InvalidDiscretizationError(
            "discretization range too narrow: it captures only " + std::to_string(covered_mass) +
            " of the probability mass");
    const auto mid = spec.midpoints();
    std::vector<double> mass(mid.size());
    double total = 0.0;
    for (std::size_t b = 0; b < mid.size(); ++b) {
        const double v = pdf(mid[b]);
        if (!(v >= 0.0)) throw InvalidDiscretizationError("density evaluated to a negative value");
        mass[b] = v;
        total += v;
    }
    if (!(total > 0.0))
        throw InvalidDiscretizationError("discretization bins are too coarse: no midpoint carries mass");
    for (double& v : mass) v /= total;
    return mass;
}

double normal_pdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

double normal_cdf(double x, double mean, double sd) {
    return 0.5 * std::erfc(-(x - mean) / (sd * std::numbers::sqrt2));
}

DiscretizationSpec default_two_agent_discretization() {
    // Hypothesis and truth means span [0, 2.5]; five standard deviations of
    // padding keeps every tail's clipped mass under the coverage tolerance.
    return DiscretizationSpec{-5.0, 7.5, 64};
}

BuiltScenario build_two_agent_example(const DiscretizationSpec& disc) {
    const auto mid = disc.midpoints();
    SignalAlphabet alphabet{mid};
    const double sd = 1.0;

    auto gaussian_bins = [&](double mean) {
        const double covered = normal_cdf(disc.hi, mean, sd) - normal_cdf(disc.lo, mean, sd);
        return discretize_density(disc, [&](double x) { return normal_pdf(x, mean, sd); }, covered);
    };

    // Conditional signal means per hypothesis; agent 1 cannot tell the first
    // two apart, agent 2 cannot tell the last two apart.
    const double truth_means[2] = {1.0, 2.0};
    const double hyp_means[2][3] = {{0.5, 1.5, 0.0}, {0.0, 2.5, 1.5}};

    BuiltScenario out;
    out.hypotheses = HypothesisSet::numbered(3);
    for (int i = 0; i < 2; ++i) {
        std::vector<std::vector<double>> rows;
        rows.reserve(3);
        for (int t = 0; t < 3; ++t) rows.push_back(gaussian_bins(hyp_means[i][t]));
        AgentSpec agent;
        agent.model = make_model(alphabet, gaussian_bins(truth_means[i]), std::move(rows));
        agent.observation_rate = 1.0;
        agent.prior = uniform_prior(3);
        out.agents.push_back(std::move(agent));
    }
    out.optimal = optimal_set_relative(out.agents);
    out.graph = Graph::complete(2);
    return out;
}

BuiltScenario build_bernoulli_contrast(int n, double observation_rate) {
    if (n < 1) throw std::invalid_argument("scenario needs at least one agent");
    SignalAlphabet alphabet = SignalAlphabet::indexed(2);
    // Truth matches the first row; the other rows sit at a healthy KL
    // distance so the confidence gap (and hence the rate constant) is large.
    const std::vector<double> truth{0.9, 0.1};
    const std::vector<std::vector<double>> rows{{0.9, 0.1}, {0.1, 0.9}, {0.15, 0.85}};

    BuiltScenario out;
    out.hypotheses = HypothesisSet::numbered(3);
    for (int i = 0; i < n; ++i) {
        AgentSpec agent;
        agent.model = make_model(alphabet, truth, rows);
        agent.observation_rate = observation_rate;
        agent.prior = uniform_prior(3);
        out.agents.push_back(std::move(agent));
    }
    out.optimal = optimal_set_relative(out.agents);
    out.graph = Graph::cycle(n);
    return out;
}

BuiltScenario build_one_informative(int n, double informative_accuracy) {
    if (n < 1) throw std::invalid_argument("scenario needs at least one agent");
    const double a = informative_accuracy;
    if (!(a > 0.5 && a < 1.0))
        throw std::invalid_argument("informative accuracy must lie in (0.5, 1)");
    SignalAlphabet alphabet = SignalAlphabet::indexed(2);

    BuiltScenario out;
    out.hypotheses.labels = {"theta_star", "theta_alt"};
    for (int i = 0; i < n; ++i) {
        AgentSpec agent;
        if (i == 0) {
            agent.model = make_model(alphabet, {a, 1.0 - a}, {{a, 1.0 - a}, {1.0 - a, a}});
        } else {
            // Identical rows: every hypothesis observationally equivalent.
            agent.model =
                make_model(alphabet, {0.5, 0.5}, {{0.5, 0.5}, {0.5, 0.5}});
        }
        agent.observation_rate = 1.0;
        agent.prior = uniform_prior(2);
        out.agents.push_back(std::move(agent));
    }
    out.optimal = optimal_set_relative(out.agents);
    out.graph = Graph::path(n);
    return out;
}

CliqueMergeScenario build_clique_merge(const std::vector<CliqueSpec>& cliques) {
    if (cliques.size() < 2) throw std::invalid_argument("clique merge needs at least two cliques");
    const int m = cliques.front().model.hypothesis_count();

    CliqueMergeScenario out;
    out.hypotheses = HypothesisSet::numbered(m);
    std::vector<std::pair<int, int>> isolated_edges;
    std::vector<int> clique_heads;
    int base = 0;
    for (std::size_t c = 0; c < cliques.size(); ++c) {
        const auto& spec = cliques[c];
        if (spec.size < 1) throw std::invalid_argument("clique sizes must be positive");
        if (spec.model.hypothesis_count() != m)
            throw std::invalid_argument("cliques disagree on the hypothesis count");
        require_valid_model(spec.model);
        clique_heads.push_back(base);
        for (int v = 0; v < spec.size; ++v) {
            AgentSpec agent;
            agent.model = spec.model;
            agent.observation_rate = spec.observation_rate;
            agent.prior = uniform_prior(m);
            out.agents.push_back(std::move(agent));
            out.clique_of.push_back(static_cast<int>(c));
            for (int u = 0; u < v; ++u) isolated_edges.emplace_back(base + u, base + v);
        }
        base += spec.size;
    }
    const int n = base;
    out.isolated = Graph::from_edges(n, isolated_edges);
    // Bridge consecutive cliques through their first members.
    std::vector<std::pair<int, int>> merged_edges = isolated_edges;
    for (std::size_t c = 0; c + 1 < clique_heads.size(); ++c)
        merged_edges.emplace_back(clique_heads[c], clique_heads[c + 1]);
    out.merged = Graph::from_edges(n, merged_edges);

    for (std::size_t c = 0; c < cliques.size(); ++c) {
        std::vector<int> members;
        for (int i = 0; i < n; ++i)
            if (out.clique_of[i] == static_cast<int>(c)) members.push_back(i);
        const ConfidenceProfile profile = group_confidence(members, out.agents);
        const double best = profile.max();
        const double tol = 1e-12 * std::max(1.0, std::abs(best));
        std::vector<int> opt;
        for (int t = 0; t < m; ++t)
            if (profile.value[t] >= best - tol) opt.push_back(t);
        out.clique_optimal.push_back(std::move(opt));
    }
    out.merged_optimal = optimal_set_relative(out.agents);
    return out;
}

BuiltLocalization build_localization(const LocalizationScenario& params) {
    if (params.grid_side < 2) throw std::invalid_argument("hypothesis grid needs at least 2x2 points");
    if (!(params.area_half_extent > 0.0)) throw std::invalid_argument("area extent must be positive");
    if (!(params.noise_scale > 0.0)) throw std::invalid_argument("noise scale must be positive");
    if (!(params.truncation_sigmas > 0.0))
        throw std::invalid_argument("noise truncation must be positive");
    const int n = params.regular + params.no_measurement + params.conflicting;
    if (n < 1) throw std::invalid_argument("scenario needs at least one agent");

    const double L = params.area_half_extent;
    const int g = params.grid_side;
    const double c = params.noise_scale;
    const double w = params.truncation_sigmas;

    BuiltLocalization out;

    // Hypothesis lattice over [-L, L]^2, corners included.
    for (int iy = 0; iy < g; ++iy) {
        for (int ix = 0; ix < g; ++ix) {
            const double x = -L + 2.0 * L * static_cast<double>(ix) / static_cast<double>(g - 1);
            const double y = -L + 2.0 * L * static_cast<double>(iy) / static_cast<double>(g - 1);
            out.hypothesis_positions.emplace_back(x, y);
            out.scenario.hypotheses.labels.push_back("h" + std::to_string(ix) + "_" + std::to_string(iy));
        }
    }
    const int m = static_cast<int>(out.hypothesis_positions.size());

    // Seeded agent placement; roles in blocks: regular, no-measurement,
    // conflicting.
    const CounterRng rng(params.placement_seed);
    for (int i = 0; i < n; ++i) {
        const double x = -L + 2.0 * L * rng.uniform(0, i, 0);
        const double y = -L + 2.0 * L * rng.uniform(0, i, 1);
        out.agent_positions.emplace_back(x, y);
        if (i < params.regular)
            out.roles.push_back(AgentRole::Regular);
        else if (i < params.regular + params.no_measurement)
            out.roles.push_back(AgentRole::NoMeasurement);
        else
            out.roles.push_back(AgentRole::Conflicting);
    }

    auto distance = [](std::pair<double, double> a, std::pair<double, double> b) {
        const double dx = a.first - b.first;
        const double dy = a.second - b.second;
        return std::sqrt(dx * dx + dy * dy);
    };

    // One shared signal range wide enough for every conditional's tails: the
    // truncated truth densities need c*w, the untruncated conditionals a bit
    // more to stay within the coverage tolerance.
    double d_min = std::numeric_limits<double>::infinity();
    double d_max = 0.0;
    for (int i = 0; i < n; ++i) {
        for (const auto& hp : out.hypothesis_positions) {
            const double d = distance(out.agent_positions[i], hp);
            d_min = std::min(d_min, d);
            d_max = std::max(d_max, d);
        }
        const auto target = out.roles[i] == AgentRole::Conflicting ? params.conflict_target : params.source;
        const double d = distance(out.agent_positions[i], target);
        d_min = std::min(d_min, d);
        d_max = std::max(d_max, d);
    }
    const double pad = std::max(w, 5.0) * c;
    DiscretizationSpec disc{d_min - pad, d_max + pad, params.bins};
    out.signal_bins = disc;
    SignalAlphabet alphabet{disc.midpoints()};

    auto truncated_truth_bins = [&](double center) {
        if (center - w * c < disc.lo || center + w * c > disc.hi)
            throw InvalidDiscretizationError("truncated noise support exceeds the signal range");
        return discretize_density(
            disc,
            [&](double x) { return std::abs(x - center) <= w * c ? normal_pdf(x, center, c) : 0.0; },
            1.0);
    };
    auto conditional_bins = [&](double center) {
        const double covered = normal_cdf(disc.hi, center, c) - normal_cdf(disc.lo, center, c);
        return discretize_density(disc, [&](double x) { return normal_pdf(x, center, c); }, covered);
    };

    for (int i = 0; i < n; ++i) {
        const auto pos = out.agent_positions[i];
        std::vector<std::vector<double>> rows;
        rows.reserve(m);
        for (const auto& hp : out.hypothesis_positions) rows.push_back(conditional_bins(distance(pos, hp)));
        const auto target = out.roles[i] == AgentRole::Conflicting ? params.conflict_target : params.source;
        AgentSpec agent;
        agent.model = make_model(alphabet, truncated_truth_bins(distance(pos, target)), std::move(rows));
        agent.observation_rate = out.roles[i] == AgentRole::NoMeasurement ? 0.0 : params.observation_rate;
        agent.prior = uniform_prior(m);
        out.scenario.agents.push_back(std::move(agent));
    }
    out.scenario.optimal = optimal_set_relative(out.scenario.agents);
    out.scenario.graph = geometric_graph(out.agent_positions, params.comm_radius);
    return out;
}

}  // namespace nblearn
