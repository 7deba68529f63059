#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "scar/gaussian.hpp"
#include "scar/scenario.hpp"
#include "scar/schedule.hpp"

namespace scar {

struct UserBelief {
    Gaussian level;          // U_i as of t_serviced
    Gaussian t_serviced;     // T_m: last service finished (absolute)
    Gaussian t_empty;        // T_e: depletion time (absolute)
    double expected_empty = 0.0;
};

/// Distributional state of the schedule between tasks.
struct BeliefState {
    std::vector<UserBelief> users;
    Gaussian agent_level;    // U_a
    Gaussian t_ready;        // T_f: agent packed up and free to travel
    Task location = Task::refill();
    double expected_empty_total = 0.0;
};

/// One intermediate distribution, recorded for diffing against Monte Carlo.
struct BeliefRecord {
    std::size_t task_index = 0;  // == schedule size for end-of-schedule terms
    std::string task;            // "0", "r", or "end"
    std::string quantity;
    Gaussian value;
};

using BeliefTrace = std::vector<BeliefRecord>;

BeliefState initial_belief(const Scenario& scenario);

/// Serve user i: travel, set up, refill (limited by the agent's supply),
/// pack up. Adds the expected empty time accrued before service began.
BeliefState process_user_task(BeliefState state, std::size_t i, const Scenario& scenario,
                              BeliefTrace* trace = nullptr, std::size_t task_index = 0);

/// Travel to the replenishment point and refill the agent to capacity.
BeliefState process_point_task(BeliefState state, const Scenario& scenario,
                               BeliefTrace* trace = nullptr, std::size_t task_index = 0);

/// Sum over users of E[max(0, T_max - T_e,i)], with T_max = state.t_ready.
double expected_tail_cost(const BeliefState& state, const Scenario& scenario);

struct AnalyticResult {
    double expected_cost = 0.0;
    Gaussian t_max;
    double expected_empty_total = 0.0;
    BeliefTrace trace;
};

/// Expected soft-deadline cost by Gaussian propagation through the schedule.
///
/// Throws ValidationError for an invalid schedule and EstimationError (with
/// the task index) when an approximation is used outside its validity region.
AnalyticResult analytic_expected_cost(const Scenario& scenario, const Schedule& schedule);

/// Same value as analytic_expected_cost().expected_cost, without the trace.
double analytic_cost(const Scenario& scenario, const Schedule& schedule);

void write_belief_trace_csv(const BeliefTrace& trace, std::ostream& out);

}  // namespace scar
