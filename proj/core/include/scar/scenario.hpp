#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "scar/gaussian.hpp"
#include "scar/schedule.hpp"

namespace scar {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

struct UserAgentSpec {
    double capacity = 0.0;    // units, deterministic
    Gaussian usage_rate;      // units/s
    Point2 position;          // m
    std::optional<double> initial_fill;  // overrides Scenario::initial_fill.users

    friend bool operator==(const UserAgentSpec&, const UserAgentSpec&) = default;
};

struct ReplenishmentAgentSpec {
    double capacity = 0.0;    // units
    Gaussian fill_rate;       // units/s into a user agent
    Gaussian setup_time;      // s
    Gaussian packup_time;     // s
    Gaussian speed;           // m/s

    friend bool operator==(const ReplenishmentAgentSpec&, const ReplenishmentAgentSpec&) = default;
};

struct ReplenishmentPointSpec {
    Gaussian setup_time;      // s
    Gaussian packup_time;     // s
    Gaussian fill_rate;       // units/s into the replenishment agent
    Point2 position;

    friend bool operator==(const ReplenishmentPointSpec&, const ReplenishmentPointSpec&) = default;
};

/// Fractions of capacity at t = 0.
struct InitialFill {
    double users = 1.0;
    double agent = 1.0;

    friend bool operator==(const InitialFill&, const InitialFill&) = default;
};

/// Square matrix over locations 0..n-1 (users) and n (replenishment point).
using DistanceMatrix = std::vector<std::vector<double>>;

/// One replenishment agent, its replenishment point and n user agents.
///
/// The agent starts at the replenishment point. Distances are Euclidean
/// between stored positions unless `distance_matrix` is given.
struct Scenario {
    std::vector<UserAgentSpec> users;
    ReplenishmentAgentSpec agent;
    ReplenishmentPointSpec point;
    InitialFill initial_fill;
    std::optional<DistanceMatrix> distance_matrix;

    std::size_t user_count() const noexcept { return users.size(); }

    /// Distance between the locations of two tasks.
    double distance(const Task& from, const Task& to) const;

    double initial_user_level(std::size_t i) const;
    double initial_agent_level() const noexcept { return initial_fill.agent * agent.capacity; }

    /// Copy with every user (and no per-user override) starting at `fraction`.
    Scenario with_user_fill(double fraction) const;

    /// Copy with every standard deviation set to zero.
    Scenario deterministic() const;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Checks every scenario invariant; throws ValidationError naming the field.
void validate_scenario(const Scenario& scenario);

/// Parses (and validates) the scenario JSON document.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::filesystem::path& path);

std::string scenario_to_json(const Scenario& scenario);
void write_scenario(const Scenario& scenario, const std::filesystem::path& path);

}  // namespace scar
