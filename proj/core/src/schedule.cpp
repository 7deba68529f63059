#include "scar/schedule.hpp"

#include <charconv>

#include "scar/errors.hpp"
#include "scar/scenario.hpp"

namespace scar {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

Task parse_task(std::string_view token, std::size_t position) {
    token = trim(token);
    if (token == "r" || token == "R")
        return Task::refill();
    std::size_t index = 0;
    const auto* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, index);
    if (token.empty() || ec != std::errc{} || ptr != end)
        throw ParseError("schedule token " + std::to_string(position) + " '" +
                         std::string(token) + "' is neither a user index nor 'r'");
    return Task::serve(index);
}

}  // namespace

Schedule parse_schedule(std::string_view text) {
    Schedule schedule;
    text = trim(text);
    if (text.empty())
        return schedule;
    std::size_t start = 0;
    while (true) {
        const auto comma = text.find(',', start);
        const auto token = text.substr(start, comma == std::string_view::npos
                                                  ? std::string_view::npos
                                                  : comma - start);
        schedule.tasks.push_back(parse_task(token, schedule.tasks.size()));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return schedule;
}

std::string to_string(const Task& task) {
    return task.is_point() ? std::string("r") : std::to_string(task.user);
}

std::string to_string(const Schedule& schedule) {
    std::string out;
    for (std::size_t k = 0; k < schedule.tasks.size(); ++k) {
        if (k > 0)
            out += ',';
        out += to_string(schedule.tasks[k]);
    }
    return out;
}

std::optional<ScheduleIssue> validate_schedule(const Scenario& scenario,
                                               const Schedule& schedule) {
    for (std::size_t k = 0; k < schedule.tasks.size(); ++k) {
        const Task& task = schedule.tasks[k];
        if (!task.is_point() && task.user >= scenario.user_count())
            return ScheduleIssue{k, "user index " + std::to_string(task.user) +
                                        " out of range (" +
                                        std::to_string(scenario.user_count()) + " users)"};
        if (k > 0 && task == schedule.tasks[k - 1])
            return ScheduleIssue{k, "task '" + to_string(task) + "' repeats the previous task"};
    }
    return std::nullopt;
}

void require_valid_schedule(const Scenario& scenario, const Schedule& schedule) {
    if (auto issue = validate_schedule(scenario, schedule))
        throw ValidationError("invalid schedule at position " + std::to_string(issue->position) +
                              ": " + issue->message);
}

}  // namespace scar
