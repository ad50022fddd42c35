#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "nblearn/analysis.hpp"
#include "nblearn/graphs.hpp"
#include "nblearn/rules.hpp"
#include "nblearn/types.hpp"

namespace nblearn {

// Full description of one simulation: who the agents are, how they are
// wired, which update law runs, and how observations are drawn. The
// accelerated rule reads `accelerated`; every other rule reads `schedule`.
struct SimulationConfig {
    HypothesisSet hypotheses;
    std::vector<AgentSpec> agents;
    UpdateRuleKind rule = UpdateRuleKind::GeometricPool;
    std::optional<GraphSchedule> schedule;
    std::optional<AcceleratedOperator> accelerated;
    long horizon = 0;
    std::uint64_t seed = 0;
    double epsilon = 0.01;      // convergence threshold on off-optimal mass
    long record_stride = 1;
    std::vector<int> optimal;   // expected optimal hypotheses, ascending; may be empty
    bool stop_at_epsilon = false;

    int agent_count() const noexcept { return static_cast<int>(agents.size()); }
    int hypothesis_count() const noexcept { return hypotheses.size(); }
};

// Throws std::invalid_argument describing the first problem found; called by
// run() so hand-built configs cannot bypass it.
void validate_config(const SimulationConfig& config);

// Structural fingerprint of everything except the seed.
std::uint64_t config_fingerprint(const SimulationConfig& config);

// Network state between steps. beta[i] and signals[i] are the observation
// flag and symbol drawn in the step that produced the current beliefs
// (signals[i] = -1 when unobserved); both are zeroed at k = 0.
struct NetworkState {
    long k = 0;
    std::vector<AgentMemory> memories;
    std::vector<std::uint8_t> beta;
    std::vector<int> signals;

    // Largest belief any agent places outside `optimal`.
    double max_off_optimal(std::span<const int> optimal) const;
};

NetworkState initial_state(const SimulationConfig& config);

// Advances the state by one synchronous round under the given seed: draws
// beta_k and the signals for step k+1, then applies the update rule to every
// agent against the frozen step-k state. Throws DegeneratePosteriorError
// annotated with the agent and step on failure.
void step(NetworkState& state, const SimulationConfig& config, std::uint64_t seed);

struct TrajectoryRecord {
    long k = 0;
    std::vector<BeliefState> beliefs;
    std::vector<std::uint8_t> beta;
    std::vector<int> signals;
};

struct Trajectory {
    std::uint64_t seed = 0;
    std::uint64_t fingerprint = 0;
    std::vector<TrajectoryRecord> records;  // k = 0, every stride steps, and the final step

    const TrajectoryRecord& final_record() const;
};

// Runs the configured simulation. Records the initial state, every
// record_stride-th step, and the final step; stops early once the off-optimal
// mass drops below epsilon when stop_at_epsilon is set. The observer, when
// given, sees the state after every step regardless of the stride.
using StepObserver = std::function<void(const NetworkState&)>;
Trajectory run(const SimulationConfig& config);
Trajectory run_with_seed(const SimulationConfig& config, std::uint64_t seed,
                         const StepObserver& observer = {});

// First recorded step whose off-optimal mass is below epsilon for every
// agent; nullopt when the trajectory never gets there.
std::optional<long> convergence_time(const Trajectory& trajectory, std::span<const int> optimal,
                                     double epsilon);

struct RunOutcome {
    std::uint64_t seed = 0;
    std::optional<long> convergence_time;
    bool degenerate = false;
    int degenerate_agent = -1;
    long degenerate_step = -1;
    bool bound_checked = false;
    bool bound_violated = false;
    std::vector<double> max_off_optimal;  // per recorded step
};

struct MonteCarloSummary {
    long runs = 0;
    std::optional<RateConstants> constants;  // absent when no certificate applies
    std::vector<RunOutcome> outcomes;        // indexed by run
    std::vector<long> record_steps;
    // Across-run aggregates of max off-optimal mass per recorded step; only
    // populated when every run records the same steps (no early stopping).
    std::vector<double> q_min, q_median, q_max, q_mean;

    long violation_count() const;
    long degenerate_count() const;
    std::vector<long> convergence_times_sorted() const;  // converged runs only
};

// Runs an ensemble with per-run seeds derived from config.seed. When the rule
// has a concentration certificate (geometric: schedule mixing certificate,
// accelerated: static momentum certificate) and a strict optimum exists, every step from
// N(rho) on is checked against the bound online. Results are identical for
// any worker count.
MonteCarloSummary monte_carlo(const SimulationConfig& config, long runs, double rho, int workers = 1);

}  // namespace nblearn
