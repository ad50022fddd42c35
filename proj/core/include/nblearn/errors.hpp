#pragma once

#include <stdexcept>
#include <string>

namespace nblearn {

// Thrown when an update rule produces an all-zero (or infinite) unnormalized
// posterior. Carries enough provenance to report which agent died and when;
// agent/step stay at -1 when the failure happens outside a simulation loop.
class DegeneratePosteriorError : public std::runtime_error {
public:
    explicit DegeneratePosteriorError(const std::string& what, int agent = -1, long step = -1)
        : std::runtime_error(what), agent_(agent), step_(step) {}

    int agent() const noexcept { return agent_; }
    long step() const noexcept { return step_; }

    DegeneratePosteriorError with_context(int agent, long step) const {
        return DegeneratePosteriorError(
            std::string(what()) + " (agent " + std::to_string(agent) + ", step " + std::to_string(step) + ")",
            agent, step);
    }

private:
    int agent_;
    long step_;
};

// Thrown by scenario builders when a signal-space discretization fails to
// capture the required probability mass.
class InvalidDiscretizationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace nblearn
