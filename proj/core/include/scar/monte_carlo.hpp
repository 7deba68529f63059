#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scar/det_sim.hpp"
#include "scar/scenario.hpp"
#include "scar/schedule.hpp"

namespace scar {

enum class SamplingMode {
    per_run,    // one draw per parameter per sample
    per_event,  // an independent draw at every use of a parameter
};

std::string_view to_string(SamplingMode mode);
/// Accepts "per-run" / "per-event" (underscores also accepted). Throws ParseError.
SamplingMode parse_sampling_mode(std::string_view text);

struct McConfig {
    std::size_t samples = 1000;
    std::uint64_t seed = 0;
    SamplingMode mode = SamplingMode::per_event;
    unsigned threads = 1;  // output does not depend on this
};

struct McEstimate {
    double mean_cost = 0.0;
    double std_error = 0.0;
};

/// Samples per independently seeded chunk.
inline constexpr std::size_t kMcChunkSize = 64;
/// Rejection-sampling budget for one positive draw.
inline constexpr int kMaxRejections = 100;

/// Counter-based seed for chunk `chunk` of a run seeded with `seed`.
std::uint64_t chunk_seed(std::uint64_t seed, std::uint64_t chunk) noexcept;

/// Draws a value from g conditioned on being positive, by rejection.
/// sigma == 0 returns g.mu without consuming randomness. Throws
/// ValidationError when no positive value appears within the budget.
double draw_positive(const Gaussian& g, std::mt19937_64& rng);

/// Fills `params` with one realisation of the scenario's parameters.
void draw_params(const Scenario& scenario, const Schedule& schedule, SamplingMode mode,
                 std::mt19937_64& rng, ScalarParams& params);

/// Per-sample costs; a deterministic function of (inputs, seed, mode, samples).
std::vector<double> mc_cost_samples(const Scenario& scenario, const Schedule& schedule,
                                    const McConfig& cfg);

/// Mean of mc_cost_samples and its standard error s / sqrt(N).
McEstimate mc_expected_cost(const Scenario& scenario, const Schedule& schedule,
                            const McConfig& cfg);

/// Running (Welford) mean and standard error. Exact for constant input.
McEstimate summarize_samples(std::span<const double> costs);

}  // namespace scar
