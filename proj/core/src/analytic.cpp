#include "scar/analytic.hpp"

#include <ostream>

#include "scar/csv.hpp"
#include "scar/errors.hpp"

namespace scar {

namespace {

class Tracer {
public:
    Tracer(BeliefTrace* trace, std::size_t index, std::string task)
        : trace_(trace), index_(index), task_(std::move(task)) {}

    void operator()(const char* quantity, const Gaussian& value) const {
        if (trace_)
            trace_->push_back({index_, task_, quantity, value});
    }
    void operator()(const char* quantity, double value) const {
        (*this)(quantity, Gaussian::constant(value));
    }

private:
    BeliefTrace* trace_;
    std::size_t index_;
    std::string task_;
};

Gaussian travel_time(const Scenario& s, const Task& from, const Task& to) {
    return inverse_approx(s.distance(from, to), s.agent.speed);
}

void apply_user_task(BeliefState& st, std::size_t i, const Scenario& s, const Tracer& note) {
    const UserAgentSpec& spec = s.users.at(i);
    const Gaussian& usage = spec.usage_rate;
    const Gaussian& fill = s.agent.fill_rate;
    const double capacity = spec.capacity;
    UserBelief& u = st.users[i];

    const Task here = Task::serve(i);
    const Gaussian t_begin = st.t_ready + travel_time(s, st.location, here) + s.agent.setup_time;
    const double empty = expected_positive(t_begin - u.t_empty);
    note("T_b", t_begin);
    note("E[T_segment]", empty);

    // Level when service begins, clipped to [0, capacity].
    const Gaussian used = product_approx(usage, t_begin - u.t_serviced);
    const Gaussian level = adjust_both(u.level - used, capacity);
    note("U_before", level);

    // Duration to fill completely, then the quantity that requires.
    const Gaussian deficit = Gaussian::constant(capacity) - level;
    const Gaussian full_time = ratio_approx(deficit, fill - usage);
    const Gaussian wanted = deficit + product_approx(full_time, usage);
    note("T_r_full", full_time);
    note("Q", wanted);

    // Limited by what the agent carries; its distribution is capped at its mean.
    const Gaussian delivered = adjust_floor(adjust_ceiling(wanted, st.agent_level.mu));
    const Gaussian service_time = ratio_approx(delivered, fill);
    note("Q_adj", delivered);
    note("T_r", service_time);

    const Gaussian level_after =
        adjust_both(level + st.agent_level - product_approx(service_time, usage), capacity);
    const Gaussian agent_after = adjust_floor(st.agent_level - delivered);

    const Gaussian t_serviced = t_begin + service_time;
    const Gaussian t_ready = t_serviced + s.agent.packup_time;
    const Gaussian t_empty = t_serviced + ratio_approx(level_after, usage);
    note("U_after", level_after);
    note("U_a", agent_after);
    note("T_m", t_serviced);
    note("T_f", t_ready);
    note("T_e", t_empty);

    u.level = level_after;
    u.t_serviced = t_serviced;
    u.t_empty = t_empty;
    u.expected_empty += empty;
    st.expected_empty_total += empty;
    st.agent_level = agent_after;
    st.t_ready = t_ready;
    st.location = here;
}

void apply_point_task(BeliefState& st, const Scenario& s, const Tracer& note) {
    const Task here = Task::refill();
    const Gaussian t_begin = st.t_ready + travel_time(s, st.location, here) + s.point.setup_time;
    const Gaussian refill =
        ratio_approx(Gaussian::constant(s.agent.capacity) - st.agent_level, s.point.fill_rate);
    const Gaussian t_ready = t_begin + refill + s.point.packup_time;
    note("T_b", t_begin);
    note("T_refill", refill);
    note("T_f", t_ready);

    st.t_ready = t_ready;
    st.agent_level = Gaussian::constant(s.agent.capacity);
    st.location = here;
    note("U_a", st.agent_level);
}

template <class Apply>
void guarded(std::size_t task_index, Apply&& apply) {
    try {
        apply();
    } catch (const EstimationError&) {
        throw;
    } catch (const ApproximationError& e) {
        throw EstimationError(task_index, e.what());
    }
}

AnalyticResult evaluate(const Scenario& s, const Schedule& schedule, BeliefTrace* trace) {
    require_valid_schedule(s, schedule);
    BeliefState st = initial_belief(s);
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        const Task& task = schedule.tasks[k];
        const Tracer note(trace, k, trace ? to_string(task) : std::string());
        guarded(k, [&] {
            if (task.is_point())
                apply_point_task(st, s, note);
            else
                apply_user_task(st, task.user, s, note);
        });
    }

    AnalyticResult result;
    if (schedule.empty())
        return result;

    const Tracer note(trace, schedule.size(), "end");
    const double tail = expected_tail_cost(st, s);
    if (trace) {
        for (const UserBelief& u : st.users)
            note("E[T_end]", expected_positive(st.t_ready - u.t_empty));
        note("T_max", st.t_ready);
    }
    result.t_max = st.t_ready;
    result.expected_empty_total = st.expected_empty_total + tail;
    const double denom = static_cast<double>(s.user_count()) * st.t_ready.mu;
    result.expected_cost = denom > 0.0 ? result.expected_empty_total / denom : 0.0;
    return result;
}

}  // namespace

BeliefState initial_belief(const Scenario& s) {
    BeliefState st;
    st.users.reserve(s.user_count());
    for (std::size_t i = 0; i < s.user_count(); ++i) {
        const Gaussian level = Gaussian::constant(s.initial_user_level(i));
        UserBelief u;
        u.level = level;
        u.t_serviced = Gaussian::constant(0.0);
        u.t_empty = ratio_approx(level, s.users[i].usage_rate);
        st.users.push_back(u);
    }
    st.agent_level = Gaussian::constant(s.initial_agent_level());
    st.t_ready = Gaussian::constant(0.0);
    st.location = Task::refill();
    return st;
}

BeliefState process_user_task(BeliefState state, std::size_t i, const Scenario& scenario,
                              BeliefTrace* trace, std::size_t task_index) {
    if (i >= scenario.user_count())
        throw ValidationError("process_user_task: user " + std::to_string(i) + " out of range");
    guarded(task_index, [&] {
        apply_user_task(state, i, scenario,
                        Tracer(trace, task_index, trace ? std::to_string(i) : std::string()));
    });
    return state;
}

BeliefState process_point_task(BeliefState state, const Scenario& scenario, BeliefTrace* trace,
                               std::size_t task_index) {
    guarded(task_index,
            [&] { apply_point_task(state, scenario, Tracer(trace, task_index, "r")); });
    return state;
}

double expected_tail_cost(const BeliefState& state, const Scenario& scenario) {
    double total = 0.0;
    for (std::size_t i = 0; i < scenario.user_count(); ++i)
        total += expected_positive(state.t_ready - state.users.at(i).t_empty);
    return total;
}

AnalyticResult analytic_expected_cost(const Scenario& scenario, const Schedule& schedule) {
    BeliefTrace trace;
    AnalyticResult result = evaluate(scenario, schedule, &trace);
    result.trace = std::move(trace);
    return result;
}

double analytic_cost(const Scenario& scenario, const Schedule& schedule) {
    return evaluate(scenario, schedule, nullptr).expected_cost;
}

void write_belief_trace_csv(const BeliefTrace& trace, std::ostream& out) {
    CsvWriter csv(out);
    csv.row("task_index", "task", "quantity", "mean", "std");
    for (const BeliefRecord& r : trace)
        csv.row(r.task_index, r.task, r.quantity, r.value.mu, r.value.sigma);
}

}  // namespace scar
