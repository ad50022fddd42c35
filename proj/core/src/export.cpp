#include "nblearn/export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nblearn {

std::string format_float(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", v);
    return buffer;
}

std::string trajectory_csv(const Trajectory& trajectory, const HypothesisSet& hypotheses) {
    std::ostringstream out;
    out << "k,agent,theta,belief,beta\n";
    const std::size_t m = hypotheses.labels.size();
    for (const auto& record : trajectory.records) {
        for (std::size_t i = 0; i < record.beliefs.size(); ++i) {
            const auto probs = record.beliefs[i].probabilities();
            for (std::size_t t = 0; t < m; ++t) {
                out << record.k << ',' << i << ',' << hypotheses.labels[t] << ','
                    << format_float(probs[t]) << ',' << (record.beta[i] ? 1 : 0) << '\n';
            }
        }
    }
    return out.str();
}

namespace {

double record_max_off_optimal(const TrajectoryRecord& record, std::span<const int> optimal) {
    const int m = record.beliefs.front().size();
    std::vector<char> is_opt(m, 0);
    for (int t : optimal) is_opt[t] = 1;
    double worst = 0.0;
    for (const auto& b : record.beliefs)
        for (int t = 0; t < m; ++t)
            if (!is_opt[t]) worst = std::max(worst, b.prob(t));
    return worst;
}

}  // namespace

std::string summary_csv(const Trajectory& trajectory, const SimulationConfig& config) {
    std::ostringstream out;
    out << "seed,horizon,epsilon,convergence_time\n";
    out << trajectory.seed << ',' << config.horizon << ',' << format_float(config.epsilon) << ',';
    if (auto k = convergence_time(trajectory, config.optimal, config.epsilon)) out << *k;
    out << '\n';
    out << "agent,theta,final_belief\n";
    const auto& last = trajectory.final_record();
    for (std::size_t i = 0; i < last.beliefs.size(); ++i) {
        const auto probs = last.beliefs[i].probabilities();
        for (std::size_t t = 0; t < probs.size(); ++t) {
            out << i << ',' << config.hypotheses.labels[t] << ',' << format_float(probs[t]) << '\n';
        }
    }
    return out.str();
}

std::string bound_curve_csv(const Trajectory& trajectory, const RateConstants& constants,
                            std::span<const int> optimal) {
    std::ostringstream out;
    out << "k,bound,empirical\n";
    for (const auto& record : trajectory.records) {
        // Worst certificate over agents, clamped at 1 (probabilities cannot exceed it).
        double bound = 0.0;
        for (std::size_t i = 0; i < record.beliefs.size(); ++i) {
            bound = std::max(bound, bound_curve_clamped(constants, record.k, static_cast<int>(i)));
        }
        out << record.k << ',' << format_float(bound) << ','
            << format_float(record_max_off_optimal(record, optimal)) << '\n';
    }
    return out.str();
}

std::string sweep_csv(std::span<const SweepRow> rows) {
    std::ostringstream out;
    out << "family,size,rule,runs,converged,median_time,mean_time\n";
    for (const auto& row : rows) {
        out << row.family << ',' << row.size << ',' << to_string(row.rule) << ',' << row.runs << ','
            << row.converged << ',';
        if (row.median_time) out << format_float(*row.median_time);
        out << ',';
        if (row.mean_time) out << format_float(*row.mean_time);
        out << '\n';
    }
    return out.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace nblearn
