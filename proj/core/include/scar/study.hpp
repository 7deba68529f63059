#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scar/kl_divergence.hpp"
#include "scar/monte_carlo.hpp"
#include "scar/scenario.hpp"
#include "scar/schedule.hpp"

namespace scar {

enum class InitialCondition { empty, half, full };

inline constexpr std::array kAllConditions{InitialCondition::empty, InitialCondition::half,
                                           InitialCondition::full};

std::string_view to_string(InitialCondition c);
InitialCondition parse_initial_condition(std::string_view text);
double fill_fraction(InitialCondition c) noexcept;

struct LengthRange {
    std::size_t min = 5;
    std::size_t max = 10;
};

/// Average |MC(N) - MC(reference)| over random schedules (error vs samples).
struct ConvergenceConfig {
    bool enabled = true;
    std::size_t schedules = 50;
    std::size_t reference_samples = 100000;
    std::vector<std::size_t> sample_counts{10, 100, 1000, 10000};
    InitialCondition condition = InitialCondition::empty;
};

struct StudyConfig {
    std::filesystem::path scenario_path;
    std::size_t schedules_per_condition = 3000;
    LengthRange lengths;
    std::vector<InitialCondition> conditions{kAllConditions.begin(), kAllConditions.end()};
    McConfig mc;
    std::uint64_t seed = 1;
    std::filesystem::path output_dir = "study_out";
    unsigned threads = 0;         // 0: hardware concurrency
    bool authoritative = true;    // false for synthetic scenarios
    std::string notes;
    ConvergenceConfig convergence;
};

/// Checks count >= 2, 1 <= min <= max, at least one condition, samples >= 1.
void validate_study_config(const StudyConfig& cfg);

/// Reads a study JSON file. A relative scenario path resolves against the
/// config file's directory.
StudyConfig load_study_config(const std::filesystem::path& path);

struct StudyRecord {
    std::size_t schedule_index = 0;
    Schedule schedule;
    InitialCondition condition = InitialCondition::empty;
    double mc_cost = 0.0;
    double mc_std_error = 0.0;
    double analytic_cost = 0.0;
    double mc_time = 0.0;        // s
    double analytic_time = 0.0;  // s
    std::string error;           // non-empty if either estimator failed

    bool ok() const noexcept { return error.empty(); }
};

/// Random schedules with lengths uniform in [min, max]; each task uniform
/// over users and the point, excluding the previous task.
std::vector<Schedule> generate_schedules(const Scenario& scenario, std::size_t count,
                                         LengthRange lengths, std::uint64_t seed);

/// Evaluates one (schedule, condition) cell with both estimators.
StudyRecord evaluate_cell(const Scenario& scenario, const Schedule& schedule,
                          std::size_t schedule_index, InitialCondition condition,
                          const McConfig& mc);

/// Every schedule under every configured condition, ordered by
/// (condition, schedule). Failures are recorded per row.
std::vector<StudyRecord> run_study(const Scenario& scenario, const StudyConfig& cfg);
std::vector<StudyRecord> run_study(const StudyConfig& cfg);

/// Pairwise agreement between the two estimators on which schedule is better.
struct PairStats {
    std::size_t n_records = 0;
    std::size_t n_comparisons = 0;
    std::size_t n_skipped_both_zero = 0;
    std::size_t n_mc_ties = 0;
    std::size_t n_mc_ties_correct = 0;
    std::size_t n_correct = 0;
    double accuracy = 0.0;
    double mean_diff_all_mc = 0.0;
    double mean_diff_all_analytic = 0.0;
    double mean_diff_incorrect_mc = 0.0;
    double mean_diff_incorrect_analytic = 0.0;
};

/// An exact MC tie (not both 0) is correct when the analytic costs differ by at most this.
inline constexpr double kAnalyticTieTolerance = 1e-6;

PairStats comparison_accuracy(std::span<const StudyRecord> records);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Ordinary least squares of analytic cost on MC cost.
LineFit fit_line(std::span<const StudyRecord> records);

/// Mean and (sample) standard deviation of analytic - MC.
struct DiffStats {
    std::size_t n = 0;
    double mean = 0.0;
    double std = 0.0;
};

DiffStats difference_stats(std::span<const StudyRecord> records);

struct GroupSummary {
    std::string group;  // condition name or "all"
    PairStats pairs;
    std::optional<LineFit> fit;
    DiffStats diff;
};

/// Per condition and pooled ("all") statistics.
std::vector<GroupSummary> summarize(std::span<const StudyRecord> records);

struct BenchResult {
    double mc_time_per_eval = 0.0;        // s
    double analytic_time_per_eval = 0.0;  // s
    double speedup = 0.0;
};

/// Median wall time per evaluation over `repetitions` (>= 10) after a warmup.
BenchResult bench(const Scenario& scenario, const Schedule& schedule, const McConfig& mc,
                  std::size_t repetitions);

struct ConvergencePoint {
    std::size_t samples = 0;
    double mean_abs_error = 0.0;
    double time_per_eval = 0.0;  // s
};

std::vector<ConvergencePoint> error_vs_samples(const Scenario& scenario,
                                               std::span<const Schedule> schedules,
                                               const ConvergenceConfig& cfg, const McConfig& mc);

struct StudyOutput {
    std::vector<StudyRecord> records;
    std::vector<GroupSummary> summary;
    std::vector<ConvergencePoint> convergence;
};

/// run_study, summarize and (optionally) error_vs_samples.
StudyOutput run_full_study(const StudyConfig& cfg);

/// Writes records.csv, pairs_summary.csv, fit.csv, error_vs_samples.csv,
/// scatter.csv, diff_vs_cost.csv and metadata.json into `out_dir`.
void emit_outputs(const StudyOutput& output, const StudyConfig& cfg,
                  const std::filesystem::path& out_dir);

void write_kl_sweep_csv(const std::vector<KlSweepPoint>& sweep, const std::filesystem::path& path);

std::string_view library_version() noexcept;

}  // namespace scar
