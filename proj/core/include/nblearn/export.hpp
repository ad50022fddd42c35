#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "nblearn/simulator.hpp"

namespace nblearn {

// 17 significant digits; round-trips any double exactly.
std::string format_float(double v);

// One row per (recorded step, agent, hypothesis):
// k,agent,theta,belief,beta  with beta the flag of the step that produced
// the row's belief. LF line endings.
std::string trajectory_csv(const Trajectory& trajectory, const HypothesisSet& hypotheses);

// Convergence time (empty value when never reached) plus final beliefs.
std::string summary_csv(const Trajectory& trajectory, const SimulationConfig& config);

// k,bound,empirical per recorded step: the clamped certificate curve of the
// worst agent against the realized max off-optimal belief.
std::string bound_curve_csv(const Trajectory& trajectory, const RateConstants& constants,
                            std::span<const int> optimal);

struct SweepRow {
    std::string family;
    int size = 0;
    UpdateRuleKind rule = UpdateRuleKind::GeometricPool;
    long runs = 0;
    long converged = 0;
    std::optional<double> median_time;  // over converged runs; empty when none converged
    std::optional<double> mean_time;
};

std::string sweep_csv(std::span<const SweepRow> rows);

// Writes bytes as-is (no newline translation).
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace nblearn
