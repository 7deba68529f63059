#include "scar/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "scar/errors.hpp"

namespace scar {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void run_chunk(const Scenario& scenario, const Schedule& schedule, const McConfig& cfg,
               std::size_t chunk, std::span<double> out) {
    std::mt19937_64 rng(chunk_seed(cfg.seed, chunk));
    ScalarParams params = mean_params(scenario, schedule);
    for (double& cost : out) {
        draw_params(scenario, schedule, cfg.mode, rng, params);
        cost = cost_only(scenario, schedule, params);
    }
}

}  // namespace

std::string_view to_string(SamplingMode mode) {
    return mode == SamplingMode::per_run ? "per-run" : "per-event";
}

SamplingMode parse_sampling_mode(std::string_view text) {
    if (text == "per-run" || text == "per_run")
        return SamplingMode::per_run;
    if (text == "per-event" || text == "per_event")
        return SamplingMode::per_event;
    throw ParseError("unknown sampling mode '" + std::string(text) +
                     "' (expected per-run or per-event)");
}

std::uint64_t chunk_seed(std::uint64_t seed, std::uint64_t chunk) noexcept {
    return splitmix64(splitmix64(seed) ^ splitmix64(chunk + 0x632be59bd9b4e019ULL));
}

double draw_positive(const Gaussian& g, std::mt19937_64& rng) {
    if (g.degenerate())
        return g.mu;
    std::normal_distribution<double> normal(g.mu, g.sigma);
    for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
        const double x = normal(rng);
        if (x > 0.0)
            return x;
    }
    throw ValidationError("rejection sampling exhausted for N(" + std::to_string(g.mu) + ", " +
                          std::to_string(g.sigma) + ")");
}

void draw_params(const Scenario& s, const Schedule& schedule, SamplingMode mode,
                 std::mt19937_64& rng, ScalarParams& p) {
    const std::size_t n = s.user_count();
    p.user_level.resize(n);
    p.usage_rate.resize(n);
    p.tasks.resize(schedule.size());
    p.agent_level = s.initial_agent_level();
    for (std::size_t i = 0; i < n; ++i) {
        p.user_level[i] = s.initial_user_level(i);
        p.usage_rate[i] = draw_positive(s.users[i].usage_rate, rng);
    }

    if (mode == SamplingMode::per_event) {
        for (std::size_t k = 0; k < schedule.size(); ++k) {
            const Task& t = schedule.tasks[k];
            TaskDraw& d = p.tasks[k];
            d.speed = draw_positive(s.agent.speed, rng);
            if (t.is_point()) {
                d.setup = draw_positive(s.point.setup_time, rng);
                d.fill_rate = draw_positive(s.point.fill_rate, rng);
                d.packup = draw_positive(s.point.packup_time, rng);
                d.usage_rate = 0.0;
            } else {
                d.setup = draw_positive(s.agent.setup_time, rng);
                d.fill_rate = draw_positive(s.agent.fill_rate, rng);
                d.usage_rate = draw_positive(s.users[t.user].usage_rate, rng);
                d.packup = draw_positive(s.agent.packup_time, rng);
            }
        }
        return;
    }

    const double speed = draw_positive(s.agent.speed, rng);
    const double agent_setup = draw_positive(s.agent.setup_time, rng);
    const double agent_fill = draw_positive(s.agent.fill_rate, rng);
    const double agent_packup = draw_positive(s.agent.packup_time, rng);
    const double point_setup = draw_positive(s.point.setup_time, rng);
    const double point_fill = draw_positive(s.point.fill_rate, rng);
    const double point_packup = draw_positive(s.point.packup_time, rng);
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        const Task& t = schedule.tasks[k];
        if (t.is_point())
            p.tasks[k] = {speed, point_setup, point_packup, point_fill, 0.0};
        else
            p.tasks[k] = {speed, agent_setup, agent_packup, agent_fill, p.usage_rate[t.user]};
    }
}

std::vector<double> mc_cost_samples(const Scenario& scenario, const Schedule& schedule,
                                    const McConfig& cfg) {
    if (cfg.samples < 1)
        throw ValidationError("Monte Carlo: samples must be >= 1");
    require_valid_schedule(scenario, schedule);
    // One mean-valued run up front surfaces parameter errors with a trace-free message.
    simulate(scenario, schedule, mean_params(scenario, schedule));

    std::vector<double> costs(cfg.samples);
    const std::size_t chunks = (cfg.samples + kMcChunkSize - 1) / kMcChunkSize;
    auto chunk_span = [&](std::size_t c) {
        const std::size_t begin = c * kMcChunkSize;
        const std::size_t len = std::min(kMcChunkSize, cfg.samples - begin);
        return std::span<double>(costs).subspan(begin, len);
    };

    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(std::max(1u, cfg.threads), chunks));
    if (workers == 1) {
        for (std::size_t c = 0; c < chunks; ++c)
            run_chunk(scenario, schedule, cfg, c, chunk_span(c));
        return costs;
    }

    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t c = w; c < chunks; c += workers)
                        run_chunk(scenario, schedule, cfg, c, chunk_span(c));
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    return costs;
}

McEstimate summarize_samples(std::span<const double> costs) {
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t k = 0;
    for (double x : costs) {
        ++k;
        const double delta = x - mean;
        mean += delta / static_cast<double>(k);
        m2 += delta * (x - mean);
    }
    if (k < 2)
        return {mean, 0.0};
    const double var = m2 / static_cast<double>(k - 1);
    return {mean, std::sqrt(var / static_cast<double>(k))};
}

McEstimate mc_expected_cost(const Scenario& scenario, const Schedule& schedule,
                            const McConfig& cfg) {
    const auto costs = mc_cost_samples(scenario, schedule, cfg);
    return summarize_samples(costs);
}

}  // namespace scar
