#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "scar/errors.hpp"
#include "scar/schedule.hpp"
#include "scar/study.hpp"
#include "test_support.hpp"

using doctest::Approx;
namespace fs = std::filesystem;

namespace {

scar::StudyRecord record(double mc, double analytic) {
    scar::StudyRecord r;
    r.mc_cost = mc;
    r.analytic_cost = analytic;
    return r;
}

scar::StudyConfig small_config(std::size_t count) {
    scar::StudyConfig cfg;
    cfg.scenario_path = scar::test::data_path("six_user_scenario.json");
    cfg.schedules_per_condition = count;
    cfg.mc.samples = 200;
    cfg.mc.seed = 5;
    cfg.seed = 9;
    cfg.threads = 2;
    cfg.convergence.schedules = 3;
    cfg.convergence.reference_samples = 2000;
    cfg.convergence.sample_counts = {10, 100};
    return cfg;
}

/// File contents with the listed zero-based CSV columns removed.
std::string without_columns(const fs::path& path, std::vector<std::size_t> drop) {
    std::ifstream in(path);
    std::string line, out;
    while (std::getline(in, line)) {
        std::size_t col = 0;
        bool quoted = false;
        for (char ch : line) {
            if (ch == '"')
                quoted = !quoted;
            if (ch == ',' && !quoted) {
                ++col;
                if (std::find(drop.begin(), drop.end(), col - 1) == drop.end())
                    out += ',';
                continue;
            }
            if (std::find(drop.begin(), drop.end(), col) == drop.end())
                out += ch;
        }
        out += '\n';
    }
    return out;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::size_t line_count(const fs::path& path) {
    const std::string text = slurp(path);
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_CASE("generated schedules are valid and reproducible") {
    const scar::Scenario s = scar::test::six_user_scenario();
    const auto a = scar::generate_schedules(s, 1000, {5, 10}, 44);
    const auto b = scar::generate_schedules(s, 1000, {5, 10}, 44);
    CHECK(a == b);
    CHECK(a != scar::generate_schedules(s, 1000, {5, 10}, 45));
    std::size_t min_len = 99, max_len = 0, points = 0;
    for (const auto& sched : a) {
        CHECK_FALSE(scar::validate_schedule(s, sched));
        min_len = std::min(min_len, sched.size());
        max_len = std::max(max_len, sched.size());
        points += static_cast<std::size_t>(
            std::count(sched.tasks.begin(), sched.tasks.end(), scar::Task::refill()));
    }
    CHECK(min_len == 5);
    CHECK(max_len == 10);
    CHECK(points > 0);

    for (const auto& sched : scar::generate_schedules(s, 20, {5, 5}, 1))
        CHECK(sched.size() == 5);
}

TEST_CASE("one user forces alternation") {
    const scar::Scenario s = scar::test::hand_scenario(0.0, 1.0);
    for (const auto& sched : scar::generate_schedules(s, 50, {2, 9}, 3)) {
        for (std::size_t k = 1; k < sched.size(); ++k)
            CHECK(sched.tasks[k].is_point() != sched.tasks[k - 1].is_point());
    }
    scar::Scenario none = s;
    none.users.clear();
    CHECK_THROWS_AS(scar::generate_schedules(none, 5, {2, 3}, 1), scar::ValidationError);
}

TEST_CASE("run_study covers every cell") {
    const scar::StudyConfig cfg = small_config(30);
    const auto records = scar::run_study(cfg);
    REQUIRE(records.size() == 90);
    std::size_t full_zeros = 0;
    for (std::size_t k = 0; k < records.size(); ++k) {
        const scar::StudyRecord& r = records[k];
        CHECK(r.ok());
        CHECK(r.condition == scar::kAllConditions[k / 30]);
        CHECK(r.schedule_index == k % 30);
        CHECK(r.schedule == records[k % 30].schedule);
        CHECK(r.mc_cost >= 0.0);
        CHECK(r.mc_cost <= 1.0);
        CHECK(r.analytic_cost > 0.0);
        CHECK(r.analytic_cost <= 1.0);
        CHECK(r.mc_time > 0.0);
        CHECK(r.analytic_time > 0.0);
        if (r.condition == scar::InitialCondition::empty)
            CHECK(r.mc_cost > 0.0);
        if (r.condition == scar::InitialCondition::full && r.mc_cost == 0.0)
            ++full_zeros;
    }
    CHECK(full_zeros >= 5);
}

TEST_CASE("comparison accuracy examples") {
    const std::vector<scar::StudyRecord> agree{record(0.1, 0.11), record(0.2, 0.19)};
    const scar::PairStats a = scar::comparison_accuracy(agree);
    CHECK(a.n_comparisons == 1);
    CHECK(a.accuracy == 1.0);
    CHECK(a.mean_diff_all_mc == Approx(0.1));

    const std::vector<scar::StudyRecord> disagree{record(0.1, 0.2), record(0.2, 0.1)};
    const scar::PairStats d = scar::comparison_accuracy(disagree);
    CHECK(d.n_comparisons == 1);
    CHECK(d.accuracy == 0.0);
    CHECK(d.mean_diff_incorrect_mc == Approx(0.1));
}

TEST_CASE("both-zero pairs are skipped and ties follow the tolerance rule") {
    const std::vector<scar::StudyRecord> rs{record(0, 1e-4), record(0, 2e-4), record(0.3, 0.3),
                                            record(0.3, 0.3 + 5e-7), record(0.5, 0.4)};
    const scar::PairStats st = scar::comparison_accuracy(rs);
    CHECK(st.n_skipped_both_zero == 1);
    CHECK(st.n_comparisons == 9);
    CHECK(st.n_mc_ties == 1);
    CHECK(st.n_mc_ties_correct == 1);
    CHECK(st.n_correct == 9);

    const std::vector<scar::StudyRecord> wide{record(0.3, 0.3), record(0.3, 0.31)};
    const scar::PairStats w = scar::comparison_accuracy(wide);
    CHECK(w.n_mc_ties == 1);
    CHECK(w.accuracy == 0.0);
}

TEST_CASE("comparison accuracy ignores record order") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<scar::StudyRecord> rs;
    for (int k = 0; k < 60; ++k) {
        const double mc = k % 7 == 0 ? 0.0 : u(rng);
        rs.push_back(record(mc, mc + 0.05 * (u(rng) - 0.5)));
    }
    const scar::PairStats base = scar::comparison_accuracy(rs);
    CHECK(base.accuracy >= 0.0);
    CHECK(base.accuracy <= 1.0);
    CHECK(base.n_comparisons <= 60 * 59 / 2);
    for (int rep = 0; rep < 5; ++rep) {
        std::shuffle(rs.begin(), rs.end(), rng);
        const scar::PairStats st = scar::comparison_accuracy(rs);
        CHECK(st.n_comparisons == base.n_comparisons);
        CHECK(st.n_correct == base.n_correct);
        CHECK(st.mean_diff_all_mc == Approx(base.mean_diff_all_mc).epsilon(1e-12));
    }
}

TEST_CASE("failed records are left out of the statistics") {
    std::vector<scar::StudyRecord> rs{record(0.1, 0.11), record(0.2, 0.19), record(0.5, 0.1)};
    rs[2].error = "boom";
    CHECK(scar::comparison_accuracy(rs).n_comparisons == 1);
    CHECK(scar::fit_line(rs).slope == Approx(0.8));
}

TEST_CASE("fit_line") {
    std::vector<scar::StudyRecord> same, doubled;
    for (double x : {0.1, 0.2, 0.35, 0.5, 0.9}) {
        same.push_back(record(x, x));
        doubled.push_back(record(x, 2 * x));
    }
    const scar::LineFit s = scar::fit_line(same);
    CHECK(std::abs(s.slope - 1.0) <= 1e-12);
    CHECK(std::abs(s.intercept) <= 1e-12);
    CHECK(s.r_squared == Approx(1.0).epsilon(1e-12));
    const scar::LineFit d = scar::fit_line(doubled);
    CHECK(d.slope == Approx(2.0));
    CHECK(std::abs(d.intercept) <= 1e-12);
    CHECK(d.r_squared == Approx(1.0));

    const std::vector<scar::StudyRecord> flat{record(0.2, 0.1), record(0.2, 0.3)};
    CHECK_THROWS_AS(scar::fit_line(flat), scar::ValidationError);
}

TEST_CASE("difference statistics") {
    const std::vector<scar::StudyRecord> rs{record(0.1, 0.12), record(0.2, 0.2), record(0.3, 0.28)};
    const scar::DiffStats d = scar::difference_stats(rs);
    CHECK(d.n == 3);
    CHECK(d.mean == Approx(0.0).scale(1e-12));
    CHECK(d.std == Approx(0.02));
}

TEST_CASE("study configuration") {
    scar::StudyConfig cfg = small_config(1);
    CHECK_THROWS_AS(scar::validate_study_config(cfg), scar::ValidationError);
    cfg = small_config(10);
    cfg.lengths = {6, 5};
    CHECK_THROWS_AS(scar::validate_study_config(cfg), scar::ValidationError);
    cfg.lengths = {0, 5};
    CHECK_THROWS_AS(scar::validate_study_config(cfg), scar::ValidationError);

    const scar::StudyConfig base = scar::load_study_config(scar::test::data_path("study_six_user.json"));
    CHECK(base.schedules_per_condition == 3000);
    CHECK(base.lengths.min == 5);
    CHECK(base.lengths.max == 10);
    CHECK(base.mc.samples == 1000);
    CHECK(base.conditions.size() == 3);
    CHECK(fs::exists(base.scenario_path));

    const scar::StudyConfig hetero =
        scar::load_study_config(scar::test::data_path("study_hetero20.json"));
    CHECK_FALSE(hetero.authoritative);
    CHECK(hetero.lengths.min == 16);
    CHECK(scar::load_scenario(hetero.scenario_path).user_count() == 20);

    CHECK(scar::parse_initial_condition("half") == scar::InitialCondition::half);
    CHECK(scar::fill_fraction(scar::InitialCondition::half) == 0.5);
    CHECK_THROWS_AS(scar::parse_initial_condition("brimming"), scar::ParseError);
}

TEST_CASE("emitted outputs are reproducible apart from timings") {
    const fs::path root = fs::temp_directory_path() / "scar_study_outputs_test";
    fs::remove_all(root);
    scar::StudyConfig cfg = small_config(12);
    cfg.threads = 1;
    const scar::StudyOutput first = scar::run_full_study(cfg);
    scar::emit_outputs(first, cfg, root / "a");
    cfg.threads = 3;
    const scar::StudyOutput second = scar::run_full_study(cfg);
    scar::emit_outputs(second, cfg, root / "b");

    for (const char* name : {"pairs_summary.csv", "fit.csv", "scatter.csv", "diff_vs_cost.csv"})
        CHECK_MESSAGE(slurp(root / "a" / name) == slurp(root / "b" / name), name);
    CHECK(without_columns(root / "a" / "records.csv", {6, 7}) ==
          without_columns(root / "b" / "records.csv", {6, 7}));
    CHECK(without_columns(root / "a" / "error_vs_samples.csv", {2}) ==
          without_columns(root / "b" / "error_vs_samples.csv", {2}));

    CHECK(line_count(root / "a" / "records.csv") == 1 + 36);
    CHECK(line_count(root / "a" / "scatter.csv") == 1 + 36);
    CHECK(line_count(root / "a" / "pairs_summary.csv") == 1 + 4);
    CHECK(line_count(root / "a" / "error_vs_samples.csv") == 1 + 2);
    const std::string meta = slurp(root / "a" / "metadata.json");
    CHECK(meta.find("\"sampling_mode\"") != std::string::npos);
    CHECK(meta.find("per-event") != std::string::npos);
    CHECK(slurp(root / "a" / "records.csv").find('\r') == std::string::npos);
    fs::remove_all(root);
}

TEST_CASE("error against the reference shrinks with more samples") {
    const scar::Scenario s = scar::test::six_user_scenario();
    const auto schedules = scar::generate_schedules(s, 5, {5, 10}, 12);
    scar::ConvergenceConfig cc;
    cc.reference_samples = 20000;
    cc.sample_counts = {10, 1000};
    scar::McConfig mc;
    mc.seed = 4;
    const auto points = scar::error_vs_samples(s, schedules, cc, mc);
    REQUIRE(points.size() == 2);
    CHECK(points[1].mean_abs_error < points[0].mean_abs_error);
    CHECK(points[0].samples == 10);
}

TEST_CASE("MC time scales linearly with samples") {
    const scar::Scenario s = scar::test::six_user_scenario();
    const scar::Schedule sched = scar::parse_schedule("5,4,3,r,2,1,0,r,0,1");
    scar::McConfig mc;
    mc.samples = 1000;
    const scar::BenchResult one = scar::bench(s, sched, mc, 10);
    mc.samples = 2000;
    const scar::BenchResult two = scar::bench(s, sched, mc, 10);
    CHECK(two.mc_time_per_eval / one.mc_time_per_eval == Approx(2.0).epsilon(0.3));
    CHECK(one.speedup > 1.0);
    CHECK_THROWS_AS(scar::bench(s, sched, mc, 9), scar::ValidationError);
}
