#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "scar/scenario.hpp"
#include "scar/schedule.hpp"

namespace scar {

/// Point values for the parameters drawn at one schedule position.
///
/// For a user task `fill_rate` is the agent's rate into the user and
/// `usage_rate` the user's rate from the start of this service until its
/// next one. For a point task `setup`/`packup`/`fill_rate` belong to the
/// replenishment point and `usage_rate` is unused.
struct TaskDraw {
    double speed = 0.0;
    double setup = 0.0;
    double packup = 0.0;
    double fill_rate = 0.0;
    double usage_rate = 0.0;
};

/// One point-valued realisation of every stochastic quantity of a run.
struct ScalarParams {
    std::vector<double> user_level;   // u_i at t = 0
    double agent_level = 0.0;         // u_a at t = 0
    std::vector<double> usage_rate;   // r_i in effect from t = 0 until first service
    std::vector<TaskDraw> tasks;      // one per schedule position
};

/// Parameters at their means, initial levels from the scenario.
ScalarParams mean_params(const Scenario& scenario, const Schedule& schedule);

struct SimEvent {
    std::size_t index = 0;
    Task task;
    double t_begin = 0.0;         // service (or refill) starts
    double t_service = 0.0;       // service / refill duration
    double t_finish = 0.0;        // packed up and ready to travel
    double user_level_before = 0.0;
    double user_level_after = 0.0;
    double usage_during_service = 0.0;
    double agent_level_before = 0.0;
    double agent_level_after = 0.0;
    double empty_segment = 0.0;
    double accumulated_empty = 0.0;
};

struct SimTrace {
    std::vector<SimEvent> events;
    std::vector<double> tail_empty;   // per user, after the last task
};

struct SimResult {
    double cost = 0.0;
    double t_max = 0.0;
    SimTrace trace;
};

/// Executes the schedule with point-valued parameters and returns the
/// soft-deadline cost: total user empty time over n * t_max.
///
/// Throws ValidationError for an invalid schedule, mismatched parameter
/// sizes, nonpositive rates/times, or a draw with fill rate <= usage rate.
/// The empty schedule costs 0.
SimResult simulate(const Scenario& scenario, const Schedule& schedule, const ScalarParams& params);

/// Same cost as simulate() without building a trace. Skips schedule
/// validation; callers on the hot path validate once up front.
double cost_only(const Scenario& scenario, const Schedule& schedule, const ScalarParams& params);

void write_trace_csv(const SimTrace& trace, std::ostream& out);

}  // namespace scar
