#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "nblearn/graphs.hpp"
#include "nblearn/types.hpp"

namespace nblearn {

// Uniform binning of a real signal range; symbols are bin midpoints.
struct DiscretizationSpec {
    double lo = 0.0;
    double hi = 1.0;
    int bins = 64;

    double bin_width() const { return (hi - lo) / static_cast<double>(bins); }
    std::vector<double> midpoints() const;
};

// Midpoint-rule discretization of a density, renormalized over the bins.
// covered_mass is the analytic probability the density puts inside [lo, hi];
// a coverage deficit beyond 1e-6 throws InvalidDiscretizationError.
std::vector<double> discretize_density(const DiscretizationSpec& spec,
                                       const std::function<double(double)>& pdf, double covered_mass);

double normal_pdf(double x, double mean, double sd);
double normal_cdf(double x, double mean, double sd);

// Agents plus everything needed to simulate them: shared hypothesis labels,
// the brute-force optimal hypothesis set, and a default communication graph.
struct BuiltScenario {
    HypothesisSet hypotheses;
    std::vector<AgentSpec> agents;
    std::vector<int> optimal;
    Graph graph;
};

// Two agents on one edge, three hypotheses over a discretized Gaussian
// signal. Each agent alone cannot separate the optimum from one distractor;
// together they single it out.
DiscretizationSpec default_two_agent_discretization();
BuiltScenario build_two_agent_example(const DiscretizationSpec& disc = default_two_agent_discretization());

// n identical agents with a strict confidence gap: binary alphabet, three
// hypotheses whose conditional rows are well separated from the truth row of
// everyone. Graph not included (pick any); used for coverage experiments.
BuiltScenario build_bernoulli_contrast(int n, double observation_rate = 1.0);

// One informative agent (node 0) and n-1 agents whose hypotheses are
// observationally equivalent; two hypotheses, binary alphabet.
BuiltScenario build_one_informative(int n, double informative_accuracy = 0.9);

// Complete cliques with per-clique signal models. The isolated graph keeps
// the cliques disjoint, the merged graph bridges node 0 of consecutive
// cliques. Optima are evaluated by brute force per clique and for the union.
struct CliqueSpec {
    int size = 0;
    LikelihoodModel model;
    double observation_rate = 1.0;
};

struct CliqueMergeScenario {
    HypothesisSet hypotheses;
    std::vector<AgentSpec> agents;
    std::vector<int> clique_of;  // agent index -> clique index
    Graph isolated;
    Graph merged;
    std::vector<std::vector<int>> clique_optimal;
    std::vector<int> merged_optimal;
};

CliqueMergeScenario build_clique_merge(const std::vector<CliqueSpec>& cliques);

// Source localization on a square area: hypotheses form a grid_side x
// grid_side lattice over [-L, L]^2 (corners included), agents observe a
// noisy distance to the source. Regular agents measure the true source,
// no-measurement agents never observe (q = 0), conflicting agents measure
// the distance to a substituted target instead.
enum class AgentRole { Regular, NoMeasurement, Conflicting };

struct LocalizationScenario {
    int grid_side = 10;
    double area_half_extent = 10.0;  // L
    std::pair<double, double> source{1.3, -2.1};
    std::pair<double, double> conflict_target{0.0, 0.0};
    int regular = 4;
    int no_measurement = 3;
    int conflicting = 3;
    double noise_scale = 1.0;        // c: signal = distance + c * (truncated std normal)
    double truncation_sigmas = 4.0;  // noise support half-width, in sd units
    int bins = 64;
    double comm_radius = 8.0;
    std::uint64_t placement_seed = 1;
    double observation_rate = 1.0;   // q of regular and conflicting agents
};

struct BuiltLocalization {
    BuiltScenario scenario;
    std::vector<AgentRole> roles;
    std::vector<std::pair<double, double>> agent_positions;
    std::vector<std::pair<double, double>> hypothesis_positions;
    DiscretizationSpec signal_bins;
};

BuiltLocalization build_localization(const LocalizationScenario& params);

}  // namespace nblearn
