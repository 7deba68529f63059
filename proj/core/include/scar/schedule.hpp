#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scar {

/// "Replenish user i" or "visit the replenishment point".
///
/// A Task doubles as a location id: the place where the task is carried out.
struct Task {
    enum class Kind : std::uint8_t { user, point };

    Kind kind = Kind::point;
    std::size_t user = 0;

    static constexpr Task serve(std::size_t i) noexcept { return {Kind::user, i}; }
    static constexpr Task refill() noexcept { return {Kind::point, 0}; }

    constexpr bool is_point() const noexcept { return kind == Kind::point; }

    friend constexpr bool operator==(const Task& a, const Task& b) noexcept {
        return a.kind == b.kind && (a.kind == Kind::point || a.user == b.user);
    }
};

struct Schedule {
    std::vector<Task> tasks;

    std::size_t size() const noexcept { return tasks.size(); }
    bool empty() const noexcept { return tasks.empty(); }

    friend bool operator==(const Schedule&, const Schedule&) = default;
};

/// Parses a literal such as "0,2,r,3,1". Whitespace around tokens is ignored;
/// an empty string is the empty schedule. Throws ParseError.
Schedule parse_schedule(std::string_view text);

std::string to_string(const Task& task);
std::string to_string(const Schedule& schedule);

struct ScheduleIssue {
    std::size_t position = 0;
    std::string message;
};

struct Scenario;

/// First violation of: user indices in range, no two consecutive equal tasks.
std::optional<ScheduleIssue> validate_schedule(const Scenario& scenario, const Schedule& schedule);

/// Throws ValidationError if validate_schedule reports an issue.
void require_valid_schedule(const Scenario& scenario, const Schedule& schedule);

}  // namespace scar
