// Command-line front end: single-schedule estimates, the comparison study,
// timing, and the inverse-approximation KL sweep.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "scar/analytic.hpp"
#include "scar/csv.hpp"
#include "scar/det_sim.hpp"
#include "scar/errors.hpp"
#include "scar/kl_divergence.hpp"
#include "scar/monte_carlo.hpp"
#include "scar/scenario.hpp"
#include "scar/study.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

struct ScheduleArgs {
    std::string scenario;
    std::string schedule;
    std::string fill;  // "", empty|half|full, or a fraction

    void add_to(CLI::App* cmd) {
        cmd->add_option("--scenario", scenario, "Scenario JSON file")->required();
        cmd->add_option("--schedule", schedule, "Schedule literal, e.g. 0,2,r,3,1")->required();
        cmd->add_option("--fill", fill,
                        "Override every user's initial fill: empty, half, full or a fraction");
    }

    scar::Scenario load_scenario() const {
        scar::Scenario s = scar::load_scenario(scenario);
        if (fill.empty())
            return s;
        double fraction;
        try {
            fraction = scar::fill_fraction(scar::parse_initial_condition(fill));
        } catch (const scar::ParseError&) {
            try {
                fraction = std::stod(fill);
            } catch (const std::exception&) {
                throw scar::ParseError("--fill: expected empty, half, full or a number");
            }
        }
        s = s.with_user_fill(fraction);
        scar::validate_scenario(s);
        return s;
    }

    scar::Schedule load_schedule(const scar::Scenario& s) const {
        scar::Schedule parsed = scar::parse_schedule(schedule);
        scar::require_valid_schedule(s, parsed);
        return parsed;
    }
};

std::ofstream open_file(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw scar::IoError("cannot write '" + path + "'");
    return out;
}

void print_kv(const char* key, double value) {
    std::cout << key << " " << scar::format_double(value) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Expected-cost engine for stochastic collection and replenishment schedules"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(scar::library_version()));

    // simulate
    ScheduleArgs sim_args;
    std::string sim_trace;
    auto* sim = app.add_subcommand("simulate", "Deterministic run with every parameter at its mean");
    sim_args.add_to(sim);
    sim->add_option("--trace", sim_trace, "Write the event trace as CSV");

    // estimate-mc
    ScheduleArgs mc_args;
    scar::McConfig mc_cfg;
    std::string mc_mode = "per-event";
    std::string mc_emit;
    auto* mc = app.add_subcommand("estimate-mc", "Monte Carlo expected cost");
    mc_args.add_to(mc);
    mc->add_option("--samples", mc_cfg.samples, "Number of samples")->capture_default_str();
    mc->add_option("--seed", mc_cfg.seed, "RNG seed")->capture_default_str();
    mc->add_option("--mode", mc_mode, "per-event or per-run")->capture_default_str();
    mc->add_option("--threads", mc_cfg.threads, "Worker threads (result is unaffected)");
    mc->add_option("--emit-samples", mc_emit, "Write the per-sample costs as CSV");

    // estimate-analytic
    ScheduleArgs an_args;
    std::string an_trace;
    auto* an = app.add_subcommand("estimate-analytic", "Analytical expected cost");
    an_args.add_to(an);
    an->add_option("--trace", an_trace, "Write every intermediate distribution as CSV");

    // study
    std::string study_config;
    std::string study_output;
    unsigned study_threads = 0;
    auto* study = app.add_subcommand("study", "Run the MC-vs-analytic comparison study");
    study->add_option("--config", study_config, "Study JSON file")->required();
    study->add_option("--output", study_output, "Override the output directory");
    study->add_option("--threads", study_threads, "Worker threads (0 = all cores)");

    // bench
    ScheduleArgs bench_args;
    scar::McConfig bench_mc;
    std::size_t bench_reps = 10;
    auto* bench = app.add_subcommand("bench", "Time both estimators on one schedule");
    bench_args.add_to(bench);
    bench->add_option("--samples", bench_mc.samples, "MC samples")->capture_default_str();
    bench->add_option("--reps", bench_reps, "Repetitions (>= 10)")->capture_default_str();
    bench->add_option("--seed", bench_mc.seed, "RNG seed")->capture_default_str();

    // validate-approx
    std::string kl_output = "kl_vs_ratio.csv";
    std::vector<double> kl_ratios{2, 3, 4, 5, 6, 8, 10, 15, 20, 30, 40, 60, 80, 100};
    auto* kl = app.add_subcommand("validate-approx",
                                  "KL divergence of the inverse approximation vs mu/sigma");
    kl->add_option("--output", kl_output, "CSV output path")->capture_default_str();
    kl->add_option("--ratios", kl_ratios, "mu/sigma ratios to sweep");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim) {
            const auto s = sim_args.load_scenario();
            const auto schedule = sim_args.load_schedule(s);
            const auto res = scar::simulate(s, schedule, scar::mean_params(s, schedule));
            print_kv("cost", res.cost);
            print_kv("t_max", res.t_max);
            if (!sim_trace.empty()) {
                auto out = open_file(sim_trace);
                scar::write_trace_csv(res.trace, out);
            }
        } else if (*mc) {
            const auto s = mc_args.load_scenario();
            const auto schedule = mc_args.load_schedule(s);
            mc_cfg.mode = scar::parse_sampling_mode(mc_mode);
            const auto costs = scar::mc_cost_samples(s, schedule, mc_cfg);
            const auto est = scar::summarize_samples(costs);
            print_kv("mean", est.mean_cost);
            print_kv("std_error", est.std_error);
            if (!mc_emit.empty()) {
                auto out = open_file(mc_emit);
                scar::CsvWriter csv(out);
                csv.row("sample", "cost");
                for (std::size_t k = 0; k < costs.size(); ++k)
                    csv.row(k, costs[k]);
            }
        } else if (*an) {
            const auto s = an_args.load_scenario();
            const auto schedule = an_args.load_schedule(s);
            const auto res = scar::analytic_expected_cost(s, schedule);
            print_kv("expected_cost", res.expected_cost);
            print_kv("t_max_mean", res.t_max.mu);
            print_kv("t_max_std", res.t_max.sigma);
            if (!an_trace.empty()) {
                auto out = open_file(an_trace);
                scar::write_belief_trace_csv(res.trace, out);
            }
        } else if (*study) {
            auto cfg = scar::load_study_config(study_config);
            if (!study_output.empty())
                cfg.output_dir = study_output;
            if (study_threads > 0)
                cfg.threads = study_threads;
            const auto output = scar::run_full_study(cfg);
            scar::emit_outputs(output, cfg, cfg.output_dir);
            for (const auto& g : output.summary) {
                std::printf("%-6s comparisons=%zu accuracy=%.4f%% mean_diff=%.3e std_diff=%.3e",
                            g.group.c_str(), g.pairs.n_comparisons, 100.0 * g.pairs.accuracy,
                            g.diff.mean, g.diff.std);
                if (g.fit)
                    std::printf(" slope=%.4f intercept=%.4f r2=%.5f", g.fit->slope,
                                g.fit->intercept, g.fit->r_squared);
                std::printf("\n");
            }
            for (const auto& p : output.convergence)
                std::printf("samples=%zu mean_abs_error=%.3e\n", p.samples, p.mean_abs_error);
            std::cout << "outputs written to " << cfg.output_dir.string() << "\n";
        } else if (*bench) {
            const auto s = bench_args.load_scenario();
            const auto schedule = bench_args.load_schedule(s);
            const auto res = scar::bench(s, schedule, bench_mc, bench_reps);
            print_kv("mc_time_per_eval", res.mc_time_per_eval);
            print_kv("analytic_time_per_eval", res.analytic_time_per_eval);
            print_kv("speedup", res.speedup);
        } else if (*kl) {
            const auto sweep = scar::inverse_kl_sweep(kl_ratios);
            scar::write_kl_sweep_csv(sweep, kl_output);
            bool decreasing = true;
            for (std::size_t k = 0; k < sweep.size(); ++k) {
                std::printf("ratio=%g kl=%.6e\n", sweep[k].ratio, sweep[k].kl);
                if (k > 0 && sweep[k].ratio > sweep[k - 1].ratio && !(sweep[k].kl < sweep[k - 1].kl))
                    decreasing = false;
            }
            if (!decreasing) {
                std::cerr << "KL divergence is not strictly decreasing in mu/sigma\n";
                return kExitValidation;
            }
        }
    } catch (const scar::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return 0;
}
