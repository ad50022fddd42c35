#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nblearn/graphs.hpp"
#include "nblearn/simulator.hpp"

namespace nblearn {

// Outcome of one executable bound check. margin is the worst (smallest)
// slack bound - value seen; negative margin means a violation. detail pins
// down where the worst case happened.
struct BoundCheckResult {
    std::string name;
    bool passed = false;
    long cases = 0;
    double margin = 0.0;
    std::string detail;

    std::string line() const;  // "[PASS] name: ..." / "[FAIL] name: ..."
};

// |[A_{k:t}]_ij - 1/n| <= sqrt(2) lambda^{k-t} for all 0 <= t <= k <= k_max,
// with lambda from the schedule's realized entry floor and window.
BoundCheckResult check_chain_deviation_bound(const GraphSchedule& schedule, long k_max);

// sum_{t=1..k} sum_j |[A_{k:t}]_ij - 1/n| <= 4 log n / (1 - lambda) for all
// rows i and k <= k_max.
BoundCheckResult check_cumulative_mixing_bound(const GraphSchedule& schedule, long k_max);

// |[[I 0] B^k [I I]']_ij - 1/n| <= sqrt(2) (1 - 1/(18U))^k for 2 <= k <= k_max,
// plus row sums staying at one.
BoundCheckResult check_effective_operator_bound(const AcceleratedOperator& op, long k_max);

// ||y_k - xbar 1||^2 <= 2 (1 - 1/(9U))^{k-1} ||y_1 - xbar 1||^2 checked at
// every step of the momentum iteration started from x0.
BoundCheckResult check_consensus_contraction(const AcceleratedOperator& op,
                                             const Eigen::VectorXd& x0, long k_max);

// Double stochasticity, non-negativity, positive diagonal, and pattern
// conformity of every matrix the schedule emits over [0, horizon).
BoundCheckResult check_schedule_stochasticity(const GraphSchedule& schedule, long horizon);

// Monte Carlo coverage of the concentration certificate: the fraction of
// runs violating the bound anywhere at k >= N(rho) must be at most rho.
BoundCheckResult check_coverage(const SimulationConfig& config, long runs, double rho, int workers = 1);

// Family sweep parameters for the chain bounds: `schedules` random
// B-strongly-connected schedules with n in [2, n_max], window in [1, b_max].
struct ScheduleFamily {
    int schedules = 100;
    int n_max = 20;
    int b_max = 4;
    long k_max = 200;
    std::uint64_t seed = 2024;
};

GraphSchedule family_schedule(const ScheduleFamily& family, int index);

BoundCheckResult check_chain_deviation_family(const ScheduleFamily& family);
BoundCheckResult check_cumulative_mixing_family(const ScheduleFamily& family);

}  // namespace nblearn
