#include "scar/study.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "scar/analytic.hpp"
#include "scar/csv.hpp"
#include "scar/errors.hpp"

#ifndef SCAR_VERSION
#define SCAR_VERSION "0.0.0"
#endif

namespace scar {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

unsigned worker_count(unsigned requested) {
    if (requested > 0)
        return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

// Runs body(i) for i in [0, n) on a pool of workers. Slots are owned by index,
// so results never depend on the worker count.
template <class Body>
void parallel_for(std::size_t n, unsigned workers, Body&& body) {
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++)
                body(i);
        });
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write '" + path.string() + "'");
    return out;
}

void finish_output(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out)
        throw IoError("error writing '" + path.string() + "'");
}

int sign(double x) { return (x > 0.0) - (x < 0.0); }

json config_to_json(const StudyConfig& cfg) {
    json conditions = json::array();
    for (auto c : cfg.conditions)
        conditions.push_back(to_string(c));
    json counts = cfg.convergence.sample_counts;
    return {
        {"scenario", cfg.scenario_path.string()},
        {"schedules_per_condition", cfg.schedules_per_condition},
        {"length", {cfg.lengths.min, cfg.lengths.max}},
        {"conditions", conditions},
        {"mc",
         {{"samples", cfg.mc.samples},
          {"seed", cfg.mc.seed},
          {"mode", std::string(to_string(cfg.mc.mode))}}},
        {"seed", cfg.seed},
        {"authoritative", cfg.authoritative},
        {"notes", cfg.notes},
        {"convergence",
         {{"enabled", cfg.convergence.enabled},
          {"schedules", cfg.convergence.schedules},
          {"reference_samples", cfg.convergence.reference_samples},
          {"sample_counts", counts},
          {"condition", to_string(cfg.convergence.condition)}}},
    };
}

}  // namespace

std::string_view library_version() noexcept { return SCAR_VERSION; }

std::string_view to_string(InitialCondition c) {
    switch (c) {
    case InitialCondition::empty: return "empty";
    case InitialCondition::half: return "half";
    case InitialCondition::full: return "full";
    }
    return "?";
}

InitialCondition parse_initial_condition(std::string_view text) {
    for (auto c : kAllConditions)
        if (text == to_string(c))
            return c;
    throw ParseError("unknown initial condition '" + std::string(text) +
                     "' (expected empty, half or full)");
}

double fill_fraction(InitialCondition c) noexcept {
    switch (c) {
    case InitialCondition::empty: return 0.0;
    case InitialCondition::half: return 0.5;
    case InitialCondition::full: return 1.0;
    }
    return 1.0;
}

void validate_study_config(const StudyConfig& cfg) {
    if (cfg.schedules_per_condition < 2)
        throw ValidationError("study: schedules_per_condition must be >= 2");
    if (cfg.lengths.min < 1 || cfg.lengths.min > cfg.lengths.max)
        throw ValidationError("study: length range must satisfy 1 <= min <= max");
    if (cfg.conditions.empty())
        throw ValidationError("study: at least one initial condition is required");
    if (cfg.mc.samples < 1)
        throw ValidationError("study: mc.samples must be >= 1");
    if (cfg.convergence.enabled &&
        (cfg.convergence.schedules < 1 || cfg.convergence.reference_samples < 1 ||
         cfg.convergence.sample_counts.empty()))
        throw ValidationError("study: convergence needs schedules, reference_samples and "
                              "sample_counts");
}

StudyConfig load_study_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open study config '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();

    StudyConfig cfg;
    try {
        const json j = json::parse(buffer.str());
        std::filesystem::path scenario = j.at("scenario").get<std::string>();
        if (scenario.is_relative())
            scenario = path.parent_path() / scenario;
        cfg.scenario_path = scenario;
        cfg.schedules_per_condition = j.value("schedules_per_condition", cfg.schedules_per_condition);
        if (j.contains("length")) {
            const auto range = j.at("length").get<std::vector<std::size_t>>();
            if (range.size() != 2)
                throw ParseError("study: length must be [min, max]");
            cfg.lengths = {range[0], range[1]};
        }
        if (j.contains("conditions")) {
            cfg.conditions.clear();
            for (const auto& c : j.at("conditions"))
                cfg.conditions.push_back(parse_initial_condition(c.get<std::string>()));
        }
        if (j.contains("mc")) {
            const json& m = j.at("mc");
            cfg.mc.samples = m.value("samples", cfg.mc.samples);
            cfg.mc.seed = m.value("seed", cfg.mc.seed);
            if (m.contains("mode"))
                cfg.mc.mode = parse_sampling_mode(m.at("mode").get<std::string>());
        }
        cfg.seed = j.value("seed", cfg.seed);
        if (j.contains("output_dir")) {
            std::filesystem::path out = j.at("output_dir").get<std::string>();
            cfg.output_dir = out.is_relative() ? path.parent_path() / out : out;
        }
        cfg.threads = j.value("threads", cfg.threads);
        cfg.authoritative = j.value("authoritative", cfg.authoritative);
        cfg.notes = j.value("notes", cfg.notes);
        if (j.contains("convergence")) {
            const json& c = j.at("convergence");
            ConvergenceConfig& conv = cfg.convergence;
            conv.enabled = c.value("enabled", conv.enabled);
            conv.schedules = c.value("schedules", conv.schedules);
            conv.reference_samples = c.value("reference_samples", conv.reference_samples);
            if (c.contains("sample_counts"))
                conv.sample_counts = c.at("sample_counts").get<std::vector<std::size_t>>();
            if (c.contains("condition"))
                conv.condition = parse_initial_condition(c.at("condition").get<std::string>());
        }
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    validate_study_config(cfg);
    return cfg;
}

std::vector<Schedule> generate_schedules(const Scenario& scenario, std::size_t count,
                                         LengthRange lengths, std::uint64_t seed) {
    const std::size_t n = scenario.user_count();
    if (n == 0)
        throw ValidationError("generate_schedules: scenario has no users");
    if (lengths.min < 1 || lengths.min > lengths.max)
        throw ValidationError("generate_schedules: length range must satisfy 1 <= min <= max");

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> length_dist(lengths.min, lengths.max);
    // Locations 0..n-1 are users, n is the point. Drawing from n values and
    // skipping over the previous task keeps the choice uniform over the rest.
    std::uniform_int_distribution<std::size_t> first_dist(0, n);
    std::uniform_int_distribution<std::size_t> next_dist(0, n - 1);

    std::vector<Schedule> out;
    out.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        Schedule schedule;
        const std::size_t len = length_dist(rng);
        std::size_t prev = first_dist(rng);
        for (std::size_t k = 0; k < len; ++k) {
            if (k > 0) {
                std::size_t pick = next_dist(rng);
                if (pick >= prev)
                    ++pick;
                prev = pick;
            }
            schedule.tasks.push_back(prev == n ? Task::refill() : Task::serve(prev));
        }
        out.push_back(std::move(schedule));
    }
    return out;
}

StudyRecord evaluate_cell(const Scenario& scenario, const Schedule& schedule,
                          std::size_t schedule_index, InitialCondition condition,
                          const McConfig& mc) {
    StudyRecord rec;
    rec.schedule_index = schedule_index;
    rec.schedule = schedule;
    rec.condition = condition;
    try {
        const Scenario cell = scenario.with_user_fill(fill_fraction(condition));
        auto start = Clock::now();
        const McEstimate est = mc_expected_cost(cell, schedule, mc);
        rec.mc_time = seconds_since(start);
        rec.mc_cost = est.mean_cost;
        rec.mc_std_error = est.std_error;

        start = Clock::now();
        rec.analytic_cost = analytic_cost(cell, schedule);
        rec.analytic_time = seconds_since(start);
    } catch (const std::exception& e) {
        rec.error = e.what();
        rec.mc_cost = rec.analytic_cost = std::nan("");
    }
    return rec;
}

std::vector<StudyRecord> run_study(const Scenario& scenario, const StudyConfig& cfg) {
    validate_study_config(cfg);
    const auto schedules =
        generate_schedules(scenario, cfg.schedules_per_condition, cfg.lengths, cfg.seed);

    const std::size_t per = schedules.size();
    std::vector<StudyRecord> records(per * cfg.conditions.size());
    parallel_for(records.size(), worker_count(cfg.threads), [&](std::size_t row) {
        const std::size_t s = row % per;
        McConfig mc = cfg.mc;
        mc.threads = 1;
        mc.seed = chunk_seed(cfg.mc.seed, row);
        records[row] = evaluate_cell(scenario, schedules[s], s, cfg.conditions[row / per], mc);
    });
    return records;
}

std::vector<StudyRecord> run_study(const StudyConfig& cfg) {
    return run_study(load_scenario(cfg.scenario_path), cfg);
}

PairStats comparison_accuracy(std::span<const StudyRecord> records) {
    std::vector<const StudyRecord*> usable;
    for (const auto& r : records)
        if (r.ok())
            usable.push_back(&r);
    if (usable.size() < 2)
        throw ValidationError("comparison_accuracy: need at least 2 usable records");

    PairStats st;
    st.n_records = usable.size();
    double sum_mc = 0.0, sum_an = 0.0, sum_bad_mc = 0.0, sum_bad_an = 0.0;
    for (std::size_t a = 0; a < usable.size(); ++a) {
        const StudyRecord& A = *usable[a];
        for (std::size_t b = a + 1; b < usable.size(); ++b) {
            const StudyRecord& B = *usable[b];
            if (A.mc_cost == 0.0 && B.mc_cost == 0.0) {
                ++st.n_skipped_both_zero;
                continue;
            }
            const double d_mc = A.mc_cost - B.mc_cost;
            const double d_an = A.analytic_cost - B.analytic_cost;
            bool correct;
            if (d_mc == 0.0) {
                ++st.n_mc_ties;
                correct = std::abs(d_an) <= kAnalyticTieTolerance;
                st.n_mc_ties_correct += correct;
            } else {
                correct = sign(d_mc) == sign(d_an);
            }
            ++st.n_comparisons;
            sum_mc += std::abs(d_mc);
            sum_an += std::abs(d_an);
            if (correct) {
                ++st.n_correct;
            } else {
                sum_bad_mc += std::abs(d_mc);
                sum_bad_an += std::abs(d_an);
            }
        }
    }
    if (st.n_comparisons == 0)
        return st;
    const auto n = static_cast<double>(st.n_comparisons);
    const auto bad = static_cast<double>(st.n_comparisons - st.n_correct);
    st.accuracy = static_cast<double>(st.n_correct) / n;
    st.mean_diff_all_mc = sum_mc / n;
    st.mean_diff_all_analytic = sum_an / n;
    if (bad > 0) {
        st.mean_diff_incorrect_mc = sum_bad_mc / bad;
        st.mean_diff_incorrect_analytic = sum_bad_an / bad;
    }
    return st;
}

LineFit fit_line(std::span<const StudyRecord> records) {
    double sx = 0.0, sy = 0.0;
    std::size_t n = 0;
    for (const auto& r : records) {
        if (!r.ok())
            continue;
        sx += r.mc_cost;
        sy += r.analytic_cost;
        ++n;
    }
    if (n < 2)
        throw ValidationError("fit_line: need at least 2 usable records");
    const double mx = sx / static_cast<double>(n);
    const double my = sy / static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& r : records) {
        if (!r.ok())
            continue;
        const double dx = r.mc_cost - mx;
        const double dy = r.analytic_cost - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0))
        throw ValidationError("fit_line: all MC costs are equal");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

DiffStats difference_stats(std::span<const StudyRecord> records) {
    std::vector<double> diffs;
    for (const auto& r : records)
        if (r.ok())
            diffs.push_back(r.analytic_cost - r.mc_cost);
    DiffStats st;
    st.n = diffs.size();
    if (diffs.empty())
        return st;
    const McEstimate m = summarize_samples(diffs);
    st.mean = m.mean_cost;
    st.std = m.std_error * std::sqrt(static_cast<double>(diffs.size()));
    return st;
}

std::vector<GroupSummary> summarize(std::span<const StudyRecord> records) {
    std::vector<GroupSummary> out;
    auto add_group = [&](std::string name, std::span<const StudyRecord> group) {
        GroupSummary g;
        g.group = std::move(name);
        std::size_t usable = 0;
        for (const auto& r : group)
            usable += r.ok();
        if (usable >= 2) {
            g.pairs = comparison_accuracy(group);
            try {
                g.fit = fit_line(group);
            } catch (const ValidationError&) {
                g.fit.reset();
            }
        }
        g.diff = difference_stats(group);
        out.push_back(std::move(g));
    };
    for (auto c : kAllConditions) {
        std::vector<StudyRecord> group;
        for (const auto& r : records)
            if (r.condition == c)
                group.push_back(r);
        if (!group.empty())
            add_group(std::string(to_string(c)), group);
    }
    add_group("all", records);
    return out;
}

BenchResult bench(const Scenario& scenario, const Schedule& schedule, const McConfig& mc,
                  std::size_t repetitions) {
    if (repetitions < 10)
        throw ValidationError("bench: repetitions must be >= 10");

    // Warmup, and size the analytic batch so one timing spans ~1 ms.
    volatile double sink = mc_expected_cost(scenario, schedule, mc).mean_cost;
    std::size_t batch = 1;
    for (;;) {
        const auto start = Clock::now();
        for (std::size_t k = 0; k < batch; ++k)
            sink = analytic_cost(scenario, schedule);
        if (seconds_since(start) > 1e-3 || batch >= (1u << 20))
            break;
        batch *= 2;
    }

    std::vector<double> mc_times, an_times;
    for (std::size_t r = 0; r < repetitions; ++r) {
        auto start = Clock::now();
        sink = mc_expected_cost(scenario, schedule, mc).mean_cost;
        mc_times.push_back(seconds_since(start));

        start = Clock::now();
        for (std::size_t k = 0; k < batch; ++k)
            sink = analytic_cost(scenario, schedule);
        an_times.push_back(seconds_since(start) / static_cast<double>(batch));
    }
    (void)sink;

    BenchResult res;
    res.mc_time_per_eval = median(mc_times);
    res.analytic_time_per_eval = median(an_times);
    res.speedup = res.mc_time_per_eval / res.analytic_time_per_eval;
    return res;
}

std::vector<ConvergencePoint> error_vs_samples(const Scenario& scenario,
                                               std::span<const Schedule> schedules,
                                               const ConvergenceConfig& cfg,
                                               const McConfig& mc) {
    if (schedules.empty())
        throw ValidationError("error_vs_samples: no schedules");
    const Scenario cell = scenario.with_user_fill(fill_fraction(cfg.condition));

    std::vector<double> reference(schedules.size());
    for (std::size_t s = 0; s < schedules.size(); ++s) {
        McConfig ref = mc;
        ref.samples = cfg.reference_samples;
        ref.seed = chunk_seed(mc.seed ^ 0x5eedf00dULL, s);
        reference[s] = mc_expected_cost(cell, schedules[s], ref).mean_cost;
    }

    std::vector<ConvergencePoint> out;
    for (std::size_t n : cfg.sample_counts) {
        double abs_err = 0.0;
        double elapsed = 0.0;
        for (std::size_t s = 0; s < schedules.size(); ++s) {
            McConfig run = mc;
            run.samples = n;
            run.seed = chunk_seed(mc.seed + n, s);
            const auto start = Clock::now();
            const double est = mc_expected_cost(cell, schedules[s], run).mean_cost;
            elapsed += seconds_since(start);
            abs_err += std::abs(est - reference[s]);
        }
        const auto count = static_cast<double>(schedules.size());
        out.push_back({n, abs_err / count, elapsed / count});
    }
    return out;
}

StudyOutput run_full_study(const StudyConfig& cfg) {
    const Scenario scenario = load_scenario(cfg.scenario_path);
    StudyOutput out;
    out.records = run_study(scenario, cfg);
    out.summary = summarize(out.records);
    if (cfg.convergence.enabled) {
        const auto schedules = generate_schedules(scenario, cfg.convergence.schedules,
                                                  cfg.lengths, cfg.seed ^ 0xc0417e5ULL);
        out.convergence = error_vs_samples(scenario, schedules, cfg.convergence, cfg.mc);
    }
    return out;
}

void emit_outputs(const StudyOutput& output, const StudyConfig& cfg,
                  const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw IoError("cannot create output directory '" + out_dir.string() +
                      "': " + ec.message());

    {
        const auto path = out_dir / "records.csv";
        auto out = open_output(path);
        CsvWriter csv(out);
        csv.row("schedule_index", "condition", "schedule", "mc_cost", "mc_std_error",
                "analytic_cost", "mc_time", "analytic_time", "error");
        for (const auto& r : output.records)
            csv.row(r.schedule_index, to_string(r.condition), to_string(r.schedule), r.mc_cost,
                    r.mc_std_error, r.analytic_cost, r.mc_time, r.analytic_time, r.error);
        finish_output(out, path);
    }
    {
        const auto path = out_dir / "pairs_summary.csv";
        auto out = open_output(path);
        CsvWriter csv(out);
        csv.row("group", "n_records", "n_comparisons", "n_skipped_both_zero", "n_mc_ties",
                "n_mc_ties_correct", "n_correct", "accuracy", "mean_diff_all_mc",
                "mean_diff_all_analytic", "mean_diff_incorrect_mc",
                "mean_diff_incorrect_analytic");
        for (const auto& g : output.summary) {
            const PairStats& p = g.pairs;
            csv.row(g.group, p.n_records, p.n_comparisons, p.n_skipped_both_zero, p.n_mc_ties,
                    p.n_mc_ties_correct, p.n_correct, p.accuracy, p.mean_diff_all_mc,
                    p.mean_diff_all_analytic, p.mean_diff_incorrect_mc,
                    p.mean_diff_incorrect_analytic);
        }
        finish_output(out, path);
    }
    {
        const auto path = out_dir / "fit.csv";
        auto out = open_output(path);
        CsvWriter csv(out);
        csv.row("group", "slope", "intercept", "r_squared", "n", "mean_diff", "std_diff");
        const double nan = std::nan("");
        for (const auto& g : output.summary)
            csv.row(g.group, g.fit ? g.fit->slope : nan, g.fit ? g.fit->intercept : nan,
                    g.fit ? g.fit->r_squared : nan, g.diff.n, g.diff.mean, g.diff.std);
        finish_output(out, path);
    }
    {
        const auto path = out_dir / "error_vs_samples.csv";
        auto out = open_output(path);
        CsvWriter csv(out);
        csv.row("samples", "mean_abs_error", "time_per_eval");
        for (const auto& p : output.convergence)
            csv.row(p.samples, p.mean_abs_error, p.time_per_eval);
        finish_output(out, path);
    }
    {
        const auto path = out_dir / "scatter.csv";
        auto out = open_output(path);
        CsvWriter csv(out);
        csv.row("condition", "mc_cost", "analytic_cost");
        for (const auto& r : output.records)
            if (r.ok())
                csv.row(to_string(r.condition), r.mc_cost, r.analytic_cost);
        finish_output(out, path);
    }
    {
        const auto path = out_dir / "diff_vs_cost.csv";
        auto out = open_output(path);
        CsvWriter csv(out);
        csv.row("condition", "mc_cost", "analytic_minus_mc");
        for (const auto& r : output.records)
            if (r.ok())
                csv.row(to_string(r.condition), r.mc_cost, r.analytic_cost - r.mc_cost);
        finish_output(out, path);
    }
    {
        const auto path = out_dir / "metadata.json";
        auto out = open_output(path);
        std::size_t failures = 0;
        for (const auto& r : output.records)
            failures += !r.ok();
        json meta = {
            {"software", "scar"},
            {"version", std::string(library_version())},
            {"config", config_to_json(cfg)},
            {"sampling_mode", std::string(to_string(cfg.mc.mode))},
            {"negative_draws", "rejection resampling"},
            {"agent_initial_fill_assumed", true},
            {"agent_initial_fill_note",
             "replenishment agent starts at the replenishment point with the scenario's "
             "initial_fill.agent fraction (default full); the reference study does not state it"},
            {"authoritative", cfg.authoritative},
            {"records", output.records.size()},
            {"failed_records", failures},
        };
        out << meta.dump(2) << "\n";
        finish_output(out, path);
    }
}

void write_kl_sweep_csv(const std::vector<KlSweepPoint>& sweep,
                        const std::filesystem::path& path) {
    auto out = open_output(path);
    CsvWriter csv(out);
    csv.row("ratio", "approx_mean", "approx_std", "kl_divergence");
    for (const auto& p : sweep)
        csv.row(p.ratio, p.approx.mu, p.approx.sigma, p.kl);
    finish_output(out, path);
}

}  // namespace scar
