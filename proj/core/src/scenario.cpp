#include "scar/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "scar/errors.hpp"

namespace scar {

using nlohmann::json;

namespace {

std::size_t location_index(const Scenario& s, const Task& t) {
    if (t.is_point())
        return s.user_count();
    if (t.user >= s.user_count())
        throw ValidationError("unknown location: user " + std::to_string(t.user));
    return t.user;
}

const Point2& location_position(const Scenario& s, std::size_t index) {
    return index == s.user_count() ? s.point.position : s.users[index].position;
}

void require(bool condition, const std::string& field, const std::string& message) {
    if (!condition)
        throw ValidationError(field + ": " + message);
}

void check_gaussian(const Gaussian& g, const std::string& field, bool positive_mean) {
    require(std::isfinite(g.mu) && std::isfinite(g.sigma), field, "mean and std must be finite");
    require(g.sigma >= 0.0, field, "std must be >= 0");
    if (positive_mean)
        require(g.mu > 0.0, field, "mean must be > 0");
}

void check_fraction(double f, const std::string& field) {
    require(std::isfinite(f) && f >= 0.0 && f <= 1.0, field, "fraction must lie in [0, 1]");
}

// --- JSON ------------------------------------------------------------------

Gaussian gaussian_from(const json& j, const std::string& field) {
    if (j.is_number())
        return Gaussian::constant(j.get<double>());
    if (!j.is_object() || !j.contains("mean"))
        throw ParseError(field + ": expected {\"mean\": .., \"std\": ..} or a number");
    return {j.at("mean").get<double>(), j.value("std", 0.0)};
}

json gaussian_to(const Gaussian& g) {
    return {{"mean", g.mu}, {"std", g.sigma}};
}

double capacity_from(const json& j, const std::string& field) {
    const Gaussian g = gaussian_from(j, field);
    if (!g.degenerate())
        throw ValidationError(field + ": capacity must be deterministic (std 0)");
    return g.mu;
}

Point2 point_from(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 2)
        throw ParseError(field + ": expected [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

const json& member(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key))
        throw ParseError(where + ": missing key '" + key + "'");
    return j.at(key);
}

Scenario scenario_from(const json& root) {
    Scenario s;
    const json& users = member(root, "users", "scenario");
    if (!users.is_array())
        throw ParseError("users: expected an array");
    for (std::size_t i = 0; i < users.size(); ++i) {
        const std::string where = "users[" + std::to_string(i) + "]";
        const json& u = users[i];
        UserAgentSpec spec;
        spec.capacity = capacity_from(member(u, "capacity", where), where + ".capacity");
        spec.usage_rate = gaussian_from(member(u, "usage_rate", where), where + ".usage_rate");
        spec.position = point_from(member(u, "position", where), where + ".position");
        if (u.contains("initial_fill"))
            spec.initial_fill = u.at("initial_fill").get<double>();
        s.users.push_back(spec);
    }

    const json& a = member(root, "agent", "scenario");
    s.agent.capacity = capacity_from(member(a, "capacity", "agent"), "agent.capacity");
    s.agent.fill_rate = gaussian_from(member(a, "fill_rate", "agent"), "agent.fill_rate");
    s.agent.setup_time = gaussian_from(member(a, "setup_time", "agent"), "agent.setup_time");
    s.agent.packup_time = gaussian_from(member(a, "packup_time", "agent"), "agent.packup_time");
    s.agent.speed = gaussian_from(member(a, "speed", "agent"), "agent.speed");

    const json& p = member(root, "point", "scenario");
    s.point.setup_time = gaussian_from(member(p, "setup_time", "point"), "point.setup_time");
    s.point.packup_time = gaussian_from(member(p, "packup_time", "point"), "point.packup_time");
    s.point.fill_rate = gaussian_from(member(p, "fill_rate", "point"), "point.fill_rate");
    s.point.position = p.contains("position") ? point_from(p.at("position"), "point.position")
                                              : Point2{};

    if (root.contains("initial_fill")) {
        const json& f = root.at("initial_fill");
        if (f.is_number()) {
            s.initial_fill.users = f.get<double>();
        } else {
            s.initial_fill.users = f.value("users", 1.0);
            s.initial_fill.agent = f.value("agent", 1.0);
        }
    }
    if (root.contains("distance_matrix") && !root.at("distance_matrix").is_null())
        s.distance_matrix = root.at("distance_matrix").get<DistanceMatrix>();
    return s;
}

json scenario_to(const Scenario& s) {
    json users = json::array();
    for (const auto& u : s.users) {
        json ju = {{"capacity", u.capacity},
                   {"usage_rate", gaussian_to(u.usage_rate)},
                   {"position", {u.position.x, u.position.y}}};
        if (u.initial_fill)
            ju["initial_fill"] = *u.initial_fill;
        users.push_back(std::move(ju));
    }
    json root = {
        {"users", std::move(users)},
        {"agent",
         {{"capacity", s.agent.capacity},
          {"fill_rate", gaussian_to(s.agent.fill_rate)},
          {"setup_time", gaussian_to(s.agent.setup_time)},
          {"packup_time", gaussian_to(s.agent.packup_time)},
          {"speed", gaussian_to(s.agent.speed)}}},
        {"point",
         {{"setup_time", gaussian_to(s.point.setup_time)},
          {"packup_time", gaussian_to(s.point.packup_time)},
          {"fill_rate", gaussian_to(s.point.fill_rate)},
          {"position", {s.point.position.x, s.point.position.y}}}},
        {"initial_fill", {{"users", s.initial_fill.users}, {"agent", s.initial_fill.agent}}},
    };
    if (s.distance_matrix)
        root["distance_matrix"] = *s.distance_matrix;
    return root;
}

}  // namespace

double Scenario::distance(const Task& from, const Task& to) const {
    const std::size_t a = location_index(*this, from);
    const std::size_t b = location_index(*this, to);
    if (a == b)
        return 0.0;
    if (distance_matrix)
        return (*distance_matrix)[a][b];
    const Point2& p = location_position(*this, a);
    const Point2& q = location_position(*this, b);
    return std::hypot(p.x - q.x, p.y - q.y);
}

double Scenario::initial_user_level(std::size_t i) const {
    const UserAgentSpec& u = users.at(i);
    return u.initial_fill.value_or(initial_fill.users) * u.capacity;
}

Scenario Scenario::with_user_fill(double fraction) const {
    Scenario copy = *this;
    copy.initial_fill.users = fraction;
    for (auto& u : copy.users)
        u.initial_fill.reset();
    return copy;
}

Scenario Scenario::deterministic() const {
    Scenario copy = *this;
    for (auto& u : copy.users)
        u.usage_rate.sigma = 0.0;
    for (Gaussian* g : {&copy.agent.fill_rate, &copy.agent.setup_time, &copy.agent.packup_time,
                        &copy.agent.speed, &copy.point.setup_time, &copy.point.packup_time,
                        &copy.point.fill_rate})
        g->sigma = 0.0;
    return copy;
}

void validate_scenario(const Scenario& s) {
    require(!s.users.empty(), "users", "at least one user agent is required");

    double max_usage = 0.0;
    for (std::size_t i = 0; i < s.users.size(); ++i) {
        const std::string where = "users[" + std::to_string(i) + "]";
        const UserAgentSpec& u = s.users[i];
        require(std::isfinite(u.capacity) && u.capacity > 0.0, where + ".capacity",
                "must be > 0");
        check_gaussian(u.usage_rate, where + ".usage_rate", true);
        require(u.usage_rate.mu - kBoundSigmas * u.usage_rate.sigma > 0.0,
                where + ".usage_rate", "mean - 3*std must be > 0");
        require(std::isfinite(u.position.x) && std::isfinite(u.position.y),
                where + ".position", "must be finite");
        if (u.initial_fill)
            check_fraction(*u.initial_fill, where + ".initial_fill");
        max_usage = std::max(max_usage, u.usage_rate.mu);
    }

    require(std::isfinite(s.agent.capacity) && s.agent.capacity > 0.0, "agent.capacity",
            "must be > 0");
    check_gaussian(s.agent.fill_rate, "agent.fill_rate", true);
    check_gaussian(s.agent.setup_time, "agent.setup_time", true);
    check_gaussian(s.agent.packup_time, "agent.packup_time", true);
    check_gaussian(s.agent.speed, "agent.speed", true);
    require(s.agent.fill_rate.mu > max_usage, "agent.fill_rate",
            "mean must exceed every user's mean usage rate");

    check_gaussian(s.point.setup_time, "point.setup_time", true);
    check_gaussian(s.point.packup_time, "point.packup_time", true);
    check_gaussian(s.point.fill_rate, "point.fill_rate", true);
    require(std::isfinite(s.point.position.x) && std::isfinite(s.point.position.y),
            "point.position", "must be finite");

    check_fraction(s.initial_fill.users, "initial_fill.users");
    check_fraction(s.initial_fill.agent, "initial_fill.agent");

    if (s.distance_matrix) {
        const auto& m = *s.distance_matrix;
        const std::size_t n = s.users.size() + 1;
        require(m.size() == n, "distance_matrix", "must be (users + 1) x (users + 1)");
        for (std::size_t a = 0; a < n; ++a) {
            require(m[a].size() == n, "distance_matrix", "must be (users + 1) x (users + 1)");
            for (std::size_t b = 0; b < n; ++b) {
                const std::string where =
                    "distance_matrix[" + std::to_string(a) + "][" + std::to_string(b) + "]";
                require(std::isfinite(m[a][b]) && m[a][b] >= 0.0, where,
                        "must be finite and >= 0");
            }
        }
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < a; ++b)
                require(m[a][b] == m[b][a], "distance_matrix", "must be symmetric");
    }
}

Scenario parse_scenario(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("scenario: malformed JSON: ") + e.what());
    }
    Scenario s;
    try {
        s = scenario_from(root);
    } catch (const json::exception& e) {
        throw ParseError(std::string("scenario: ") + e.what());
    }
    validate_scenario(s);
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open scenario file '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_scenario(buffer.str());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

std::string scenario_to_json(const Scenario& scenario) {
    return scenario_to(scenario).dump(2) + "\n";
}

void write_scenario(const Scenario& scenario, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write scenario file '" + path.string() + "'");
    out << scenario_to_json(scenario);
    if (!out)
        throw IoError("error writing scenario file '" + path.string() + "'");
}

}  // namespace scar
