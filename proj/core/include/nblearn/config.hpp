#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nblearn/scenarios.hpp"
#include "nblearn/simulator.hpp"
#include "nblearn/verify.hpp"

namespace nblearn {

// Parse or cross-field validation failure; the message names the offending
// field path (e.g. "schedule.matrix").
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// How the communication structure is generated per step.
struct ScheduleSpec {
    std::string topology = "from_scenario";  // path|cycle|grid|complete|custom|from_scenario
    std::vector<std::pair<int, int>> edges;  // topology = custom
    std::string weights = "lazy_metropolis";  // lazy_metropolis|metropolis|custom
    std::optional<WeightMatrix> matrix;      // weights = custom (not vetted at parse time)
    bool time_varying = false;
    int window = 1;       // B
    int templates = 3;    // window templates in the seeded pool
    std::uint64_t pool_seed = 0;  // defaults to a value derived from run.seed
};

struct RunSpec {
    std::uint64_t seed = 0;  // mandatory in the file; no wall-clock fallback
    long horizon = 1000;
    double epsilon = 0.01;
    long stride = 1;
    long runs = 1;
    double rho = 0.1;
    bool stop_at_epsilon = false;
};

struct SweepSpec {
    std::string family = "path";  // path|cycle|grid
    std::vector<int> sizes;
    std::vector<UpdateRuleKind> rules;
    long runs = 50;
    double informative_accuracy = 0.9;
};

struct VerifySpec {
    // Empty = defaults for the configured schedule/rule. Known names:
    // stochasticity, chain_deviation, cumulative_mixing, effective_operator,
    // consensus_contraction, coverage, chain_deviation_family,
    // cumulative_mixing_family.
    std::vector<std::string> checks;
    long k_max = 200;
    long stochasticity_horizon = 64;
    long coverage_runs = 200;
    ScheduleFamily family;
};

struct OutputSpec {
    std::string directory = ".";
    std::vector<std::string> artifacts;  // empty = command defaults
};

// A fully parsed experiment file: scenario and schedule are already built,
// except that custom weight matrices are passed through unvetted so the
// verification command can exercise deliberately broken inputs.
struct ExperimentConfig {
    int version = 1;
    std::string scenario_builder;
    BuiltScenario scenario;
    std::optional<BuiltLocalization> localization;  // extra detail when builder = localization
    UpdateRuleKind rule = UpdateRuleKind::GeometricPool;
    int size_upper_bound = 0;  // accelerated: U; 0 means "number of agents"
    ScheduleSpec schedule_spec;
    RunSpec run;
    std::optional<SweepSpec> sweep;
    VerifySpec verify;
    OutputSpec output;

    std::optional<GraphSchedule> schedule;          // built for every non-accelerated rule
    std::optional<AcceleratedOperator> accelerated; // built when rule = accelerated

    int agent_count() const noexcept { return static_cast<int>(scenario.agents.size()); }
};

// Parses and structurally validates experiment JSON. Unknown keys anywhere
// are errors, `version` and `run.seed` are required. Cross-field rules
// enforced here: accelerated rule needs a static schedule, default weights,
// and uniform priors.
ExperimentConfig parse_experiment(const std::string& text);
ExperimentConfig load_experiment_file(const std::filesystem::path& path);

// Numeric validation a simulation needs but the verification command must
// skip (a broken custom matrix has to reach the stochasticity check): custom
// weight matrices are vetted against the graph here.
void validate_for_simulation(const ExperimentConfig& config);

// Assembles the simulator input for one run of the experiment.
SimulationConfig to_simulation(const ExperimentConfig& config);

}  // namespace nblearn
