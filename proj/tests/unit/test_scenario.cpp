#include <cmath>
#include <random>
#include <string>

#include "doctest.h"
#include "scar/errors.hpp"
#include "scar/scenario.hpp"
#include "scar/schedule.hpp"
#include "test_support.hpp"

using doctest::Approx;
using scar::Gaussian;
using scar::Task;

namespace {

std::string one_user_json(const std::string& usage) {
    return R"({
      "users": [{"capacity": 100, "usage_rate": )" + usage + R"(, "position": [300, 400]}],
      "agent": {"capacity": 1000, "fill_rate": 10, "setup_time": 5, "packup_time": 5, "speed": 15},
      "point": {"setup_time": 5, "packup_time": 5, "fill_rate": 10, "position": [0, 0]},
      "initial_fill": {"users": 0, "agent": 1}
    })";
}

}  // namespace

TEST_CASE("six-user scenario loads with its tabulated parameters") {
    const scar::Scenario s = scar::test::six_user_scenario();
    REQUIRE(s.user_count() == 6);
    CHECK(s.agent.fill_rate == Gaussian{10, 0.5});
    CHECK(s.agent.capacity == 5000);
    CHECK(s.agent.setup_time == Gaussian{60, 20});
    CHECK(s.agent.packup_time == Gaussian{20, 5});
    CHECK(s.agent.speed == Gaussian{15, 0.5});
    CHECK(s.point.fill_rate == Gaussian{20, 1});
    CHECK(s.point.setup_time == Gaussian{30, 10});
    CHECK(s.point.packup_time == Gaussian{10, 1});
    for (const auto& u : s.users) {
        CHECK(u.usage_rate == Gaussian{0.5, 0.05});
        CHECK(u.capacity == 1000);
    }
}

TEST_CASE("bundled layout distances") {
    const scar::Scenario s = scar::test::six_user_scenario();
    const double expected[] = {1500.0, 750.0, 1290.3487900563, 600.0, 300.0, 1281.6005617976};
    for (std::size_t i = 0; i < 6; ++i)
        CHECK(s.distance(Task::serve(i), Task::refill()) == Approx(expected[i]).epsilon(1e-10));
    CHECK(s.distance(Task::serve(0), Task::refill()) == 1500.0);
}

TEST_CASE("usage rate too uncertain for its mean is rejected") {
    CHECK_THROWS_AS(scar::parse_scenario(one_user_json(R"({"mean": 0.5, "std": 0.2})")),
                    scar::ValidationError);
    try {
        scar::parse_scenario(one_user_json(R"({"mean": 0.5, "std": 0.2})"));
    } catch (const scar::ValidationError& e) {
        CHECK(std::string(e.what()).find("usage_rate") != std::string::npos);
    }
}

TEST_CASE("one user with every std zero is a valid degenerate scenario") {
    const scar::Scenario s = scar::parse_scenario(one_user_json("0.5"));
    CHECK(s.user_count() == 1);
    CHECK(s.users[0].usage_rate == Gaussian{0.5, 0});
    CHECK(s.distance(Task::serve(0), Task::refill()) == 500.0);
    CHECK(s.distance(Task::serve(0), Task::serve(0)) == 0.0);
    CHECK(s.deterministic() == s);
}

TEST_CASE("scenario validation names the failing field") {
    scar::Scenario s = scar::test::six_user_scenario();
    s.agent.fill_rate = {0.4, 0.01};
    CHECK_THROWS_WITH_AS(scar::validate_scenario(s), doctest::Contains("fill_rate"),
                         scar::ValidationError);

    s = scar::test::six_user_scenario();
    s.initial_fill.agent = 1.5;
    CHECK_THROWS_AS(scar::validate_scenario(s), scar::ValidationError);

    s = scar::test::six_user_scenario();
    s.distance_matrix = scar::DistanceMatrix(3, std::vector<double>(3, 1.0));
    CHECK_THROWS_WITH_AS(scar::validate_scenario(s), doctest::Contains("distance_matrix"),
                         scar::ValidationError);

    s = scar::test::six_user_scenario();
    s.users.clear();
    CHECK_THROWS_AS(scar::validate_scenario(s), scar::ValidationError);
}

TEST_CASE("malformed scenario documents are parse errors") {
    CHECK_THROWS_AS(scar::parse_scenario("{"), scar::ParseError);
    CHECK_THROWS_AS(scar::parse_scenario("{}"), scar::ParseError);
    CHECK_THROWS_AS(scar::load_scenario("/nonexistent/scenario.json"), scar::IoError);
}

TEST_CASE("distance matrix overrides positions") {
    scar::Scenario s = scar::parse_scenario(one_user_json("0.5"));
    s.distance_matrix = scar::DistanceMatrix{{0, 42}, {42, 0}};
    scar::validate_scenario(s);
    CHECK(s.distance(Task::serve(0), Task::refill()) == 42.0);
}

TEST_CASE("distance is a metric on random layouts") {
    std::mt19937_64 rng(31);
    for (int k = 0; k < 200; ++k) {
        const scar::Scenario s = scar::test::random_scenario(rng);
        std::vector<Task> locs{Task::refill()};
        for (std::size_t i = 0; i < s.user_count(); ++i)
            locs.push_back(Task::serve(i));
        for (const Task& a : locs) {
            CHECK(s.distance(a, a) == 0.0);
            for (const Task& b : locs) {
                CHECK(s.distance(a, b) == s.distance(b, a));
                CHECK(s.distance(a, b) >= 0.0);
                for (const Task& c : locs)
                    CHECK(s.distance(a, c) <= s.distance(a, b) + s.distance(b, c) + 1e-9);
            }
        }
    }
}

TEST_CASE("scenario JSON round-trips") {
    std::mt19937_64 rng(37);
    for (int k = 0; k < 200; ++k) {
        scar::Scenario s = scar::test::random_scenario(rng);
        if (k % 3 == 0)
            s.users[0].initial_fill = 0.25;
        scar::validate_scenario(s);
        CHECK(scar::parse_scenario(scar::scenario_to_json(s)) == s);
    }
    const scar::Scenario base = scar::test::six_user_scenario();
    CHECK(scar::parse_scenario(scar::scenario_to_json(base)) == base);
}

TEST_CASE("initial levels follow the fill fractions") {
    scar::Scenario s = scar::test::six_user_scenario();
    CHECK(s.initial_user_level(0) == 0.0);
    CHECK(s.initial_agent_level() == 5000.0);
    const scar::Scenario half = s.with_user_fill(0.5);
    for (std::size_t i = 0; i < 6; ++i)
        CHECK(half.initial_user_level(i) == 500.0);
    s.users[2].initial_fill = 0.75;
    CHECK(s.initial_user_level(2) == 750.0);
    CHECK(s.with_user_fill(1.0).initial_user_level(2) == 1000.0);
}

TEST_CASE("schedule literals") {
    const scar::Schedule s = scar::parse_schedule("0, 2,r ,3,1");
    REQUIRE(s.size() == 5);
    CHECK(s.tasks[0] == Task::serve(0));
    CHECK(s.tasks[2] == Task::refill());
    CHECK(scar::to_string(s) == "0,2,r,3,1");
    CHECK(scar::parse_schedule("").empty());
    CHECK(scar::parse_schedule("  ").empty());
    CHECK_THROWS_AS(scar::parse_schedule("0,,1"), scar::ParseError);
    CHECK_THROWS_AS(scar::parse_schedule("0,x"), scar::ParseError);
    CHECK_THROWS_AS(scar::parse_schedule("-1"), scar::ParseError);
}

TEST_CASE("schedule validity") {
    const scar::Scenario s = scar::test::six_user_scenario();
    CHECK_FALSE(scar::validate_schedule(s, scar::parse_schedule("0,1,0,1,r")));
    const auto issue = scar::validate_schedule(s, scar::parse_schedule("0,0,1"));
    REQUIRE(issue);
    CHECK(issue->position == 1);
    CHECK_FALSE(scar::validate_schedule(s, scar::Schedule{}));
    CHECK(scar::validate_schedule(s, scar::parse_schedule("r,r")));
    const auto range = scar::validate_schedule(s, scar::parse_schedule("0,6"));
    REQUIRE(range);
    CHECK(range->position == 1);
    CHECK_THROWS_AS(scar::require_valid_schedule(s, scar::parse_schedule("1,1")),
                    scar::ValidationError);
}
