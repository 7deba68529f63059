#include "scar/det_sim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "scar/csv.hpp"
#include "scar/errors.hpp"

namespace scar {

namespace {

struct UserState {
    double level;        // at t_serviced
    double t_serviced;   // t_m: last service finished
    double rate;         // usage since t_serviced
    double t_empty;      // absolute depletion time
};

struct NoTrace {
    void event(const SimEvent&) {}
    void tail(double) {}
};

struct Recorder {
    SimTrace* trace;
    void event(const SimEvent& e) { trace->events.push_back(e); }
    void tail(double t) { trace->tail_empty.push_back(t); }
};

void check_params(const Scenario& scenario, const Schedule& schedule, const ScalarParams& p) {
    const std::size_t n = scenario.user_count();
    if (p.user_level.size() != n || p.usage_rate.size() != n)
        throw ValidationError("scalar params: per-user vectors must have one entry per user");
    if (p.tasks.size() != schedule.size())
        throw ValidationError("scalar params: need one task draw per schedule position");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(p.usage_rate[i] > 0.0))
            throw ValidationError("scalar params: usage rate of user " + std::to_string(i) +
                                  " must be > 0");
        if (!(p.user_level[i] >= 0.0 && p.user_level[i] <= scenario.users[i].capacity))
            throw ValidationError("scalar params: level of user " + std::to_string(i) +
                                  " outside [0, capacity]");
    }
    if (!(p.agent_level >= 0.0 && p.agent_level <= scenario.agent.capacity))
        throw ValidationError("scalar params: agent level outside [0, capacity]");
    for (std::size_t k = 0; k < p.tasks.size(); ++k) {
        const TaskDraw& d = p.tasks[k];
        const bool user_task = !schedule.tasks[k].is_point();
        if (!(d.speed > 0.0 && d.setup > 0.0 && d.packup > 0.0 && d.fill_rate > 0.0) ||
            (user_task && !(d.usage_rate > 0.0)))
            throw ValidationError("scalar params: task " + std::to_string(k) +
                                  " has a nonpositive rate or time");
    }
}

template <class Sink>
double run(const Scenario& scenario, const Schedule& schedule, const ScalarParams& p,
           Sink&& sink, double* t_max_out = nullptr) {
    const std::size_t n = scenario.user_count();
    if (schedule.empty()) {
        if (t_max_out)
            *t_max_out = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            sink.tail(0.0);
        return 0.0;
    }

    // Small fixed-size scratch; scenarios have tens of users at most.
    std::vector<UserState> users(n);
    for (std::size_t i = 0; i < n; ++i)
        users[i] = {p.user_level[i], 0.0, p.usage_rate[i], p.user_level[i] / p.usage_rate[i]};

    double clock = 0.0;   // t_f of the previous task
    double agent = p.agent_level;
    Task at = Task::refill();
    double empty_total = 0.0;

    for (std::size_t k = 0; k < schedule.tasks.size(); ++k) {
        const Task& task = schedule.tasks[k];
        const TaskDraw& d = p.tasks[k];
        const double travel = scenario.distance(at, task) / d.speed;
        at = task;

        if (task.is_point()) {
            const double t_begin = clock + travel + d.setup;
            const double refill = (scenario.agent.capacity - agent) / d.fill_rate;
            const double t_finish = t_begin + refill + d.packup;
            sink.event({k, task, t_begin, refill, t_finish, 0.0, 0.0, 0.0, agent,
                        scenario.agent.capacity, 0.0, empty_total});
            agent = scenario.agent.capacity;
            clock = t_finish;
            continue;
        }

        UserState& u = users[task.user];
        const double capacity = scenario.users[task.user].capacity;
        const double t_begin = clock + travel + d.setup;
        const double segment = std::max(0.0, t_begin - u.t_empty);
        empty_total += segment;

        const double level = std::max(0.0, u.level - u.rate * (t_begin - u.t_serviced));
        const double net = d.fill_rate - d.usage_rate;
        if (!(net > 0.0))
            throw ValidationError("task " + std::to_string(k) +
                                  ": agent fill rate does not exceed user usage rate");
        const double t_service = std::min(agent / d.fill_rate, (capacity - level) / net);
        const double level_after = std::min(capacity, level + t_service * net);
        const double agent_after = std::max(0.0, agent - t_service * d.fill_rate);

        const double t_serviced = t_begin + t_service;
        const double t_finish = t_serviced + d.packup;
        sink.event({k, task, t_begin, t_service, t_finish, level, level_after,
                    t_service * d.usage_rate, agent, agent_after, segment, empty_total});

        u = {level_after, t_serviced, d.usage_rate, t_serviced + level_after / d.usage_rate};
        agent = agent_after;
        clock = t_finish;
    }

    const double t_max = clock;
    for (const UserState& u : users) {
        const double tail = std::max(0.0, t_max - u.t_empty);
        sink.tail(tail);
        empty_total += tail;
    }
    if (t_max_out)
        *t_max_out = t_max;
    if (!(t_max > 0.0))
        return 0.0;
    return empty_total / (static_cast<double>(n) * t_max);
}

}  // namespace

ScalarParams mean_params(const Scenario& scenario, const Schedule& schedule) {
    ScalarParams p;
    p.agent_level = scenario.initial_agent_level();
    for (std::size_t i = 0; i < scenario.user_count(); ++i) {
        p.user_level.push_back(scenario.initial_user_level(i));
        p.usage_rate.push_back(scenario.users[i].usage_rate.mu);
    }
    for (const Task& t : schedule.tasks) {
        TaskDraw d;
        d.speed = scenario.agent.speed.mu;
        if (t.is_point()) {
            d.setup = scenario.point.setup_time.mu;
            d.packup = scenario.point.packup_time.mu;
            d.fill_rate = scenario.point.fill_rate.mu;
        } else {
            d.setup = scenario.agent.setup_time.mu;
            d.packup = scenario.agent.packup_time.mu;
            d.fill_rate = scenario.agent.fill_rate.mu;
            d.usage_rate = scenario.users.at(t.user).usage_rate.mu;
        }
        p.tasks.push_back(d);
    }
    return p;
}

SimResult simulate(const Scenario& scenario, const Schedule& schedule,
                   const ScalarParams& params) {
    require_valid_schedule(scenario, schedule);
    check_params(scenario, schedule, params);
    SimResult result;
    result.cost = run(scenario, schedule, params, Recorder{&result.trace}, &result.t_max);
    return result;
}

double cost_only(const Scenario& scenario, const Schedule& schedule, const ScalarParams& params) {
    return run(scenario, schedule, params, NoTrace{});
}

void write_trace_csv(const SimTrace& trace, std::ostream& out) {
    CsvWriter csv(out);
    csv.row("index", "task", "t_begin", "t_service", "t_finish", "user_level_before",
            "user_level_after", "usage_during_service", "agent_level_before",
            "agent_level_after", "empty_segment", "accumulated_empty");
    for (const SimEvent& e : trace.events)
        csv.row(e.index, to_string(e.task), e.t_begin, e.t_service, e.t_finish,
                e.user_level_before, e.user_level_after, e.usage_during_service,
                e.agent_level_before, e.agent_level_after, e.empty_segment,
                e.accumulated_empty);
}

}  // namespace scar
