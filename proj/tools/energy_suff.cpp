#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "escbf/io.hpp"
#include "escbf/sim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBudgetViolated = 2;
constexpr int kExitQpInfeasible = 3;
constexpr int kExitUsage = 64;
constexpr int kExitEmptyTrace = 65;
constexpr int kExitIo = 74;

struct RunOptions {
    std::string scenario_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    std::string controller = "escbf";
    std::string model;  // empty keeps the scenario's variant
    double tau = 0.5;
    double dt = 0.0;  // 0 keeps the scenario's dt
    bool quiet = false;
};

escbf::Scenario load_and_override(const RunOptions& opt) {
    escbf::Scenario scenario = escbf::load_scenario(opt.scenario_path);
    if (opt.dt > 0.0) scenario.dt = opt.dt;
    if (opt.model == "integrator") scenario.unicycle.reset();
    if (opt.model == "unicycle" && !scenario.unicycle)
        throw escbf::ConfigInvalid("--model unicycle needs a unicycle block in the scenario");
    return scenario;
}

escbf::RunResult execute(const escbf::Scenario& scenario, const RunOptions& opt,
                         std::uint64_t seed) {
    if (opt.controller == "baseline")
        return escbf::run_baseline(scenario, seed, {opt.tau});
    return escbf::run(scenario, seed);
}

int result_code(const escbf::RunResult& result) {
    if (result.qp_infeasible) return kExitQpInfeasible;
    if (result.metrics.budget_violated) return kExitBudgetViolated;
    return kExitOk;
}

int run_command(const RunOptions& opt) {
    const escbf::Scenario scenario = load_and_override(opt);
    const escbf::RunResult result = execute(scenario, opt, opt.seed);
    if (result.trace.empty()) {
        std::fprintf(stderr, "run produced no trace records\n");
        return kExitEmptyTrace;
    }

    escbf::write_file_atomic(opt.out_dir + "/trace.jsonl", escbf::trace_to_jsonl(result.trace));
    escbf::write_file_atomic(opt.out_dir + "/trace.csv", escbf::trace_to_csv(result.trace));
    escbf::write_file_atomic(opt.out_dir + "/metrics.json",
                             escbf::metrics_to_json_text(result.metrics, scenario.budget));
    if (result.final_path.size() >= 2)
        escbf::write_file_atomic(opt.out_dir + "/path.txt",
                                 escbf::path_to_text(escbf::build_path(result.final_path)));

    if (!opt.quiet) {
        const escbf::Metrics& m = result.metrics;
        std::printf("eoa=%.6g J (%.3f%% of budget) violated=%d arrival=%s distance=%.6g m\n",
                    m.eoa, 100.0 * m.eoa / scenario.budget, m.budget_violated ? 1 : 0,
                    m.arrival_time ? std::to_string(*m.arrival_time).c_str() : "none",
                    m.distance_traveled);
        if (result.qp_infeasible)
            std::fprintf(stderr, "run ended early: %s\n", result.error.c_str());
    }
    return result_code(result);
}

struct CompareJob {
    std::string label;
    std::string controller;
    double tau = 0.5;
    std::uint64_t seed = 0;
    escbf::Metrics metrics;
    bool infeasible = false;
};

int thread_budget() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("ENERGY_SUFF_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) n = static_cast<unsigned>(v);
    }
    return static_cast<int>(n);
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int compare_command(const RunOptions& opt, int seeds, const std::vector<double>& taus) {
    const escbf::Scenario scenario = load_and_override(opt);

    std::vector<CompareJob> jobs;
    for (int k = 0; k < seeds; ++k) {
        CompareJob job;
        job.label = "escbf";
        job.controller = "escbf";
        job.seed = static_cast<std::uint64_t>(k);
        jobs.push_back(job);
    }
    for (double tau : taus)
        for (int k = 0; k < seeds; ++k) {
            char label[32];
            std::snprintf(label, sizeof label, "baseline tau=%.3g", tau);
            CompareJob job;
            job.label = label;
            job.controller = "baseline";
            job.tau = tau;
            job.seed = static_cast<std::uint64_t>(k);
            jobs.push_back(job);
        }

    std::atomic<std::size_t> next{0};
    std::mutex io_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            CompareJob& job = jobs[i];
            RunOptions job_opt = opt;
            job_opt.controller = job.controller;
            job_opt.tau = job.tau;
            const escbf::RunResult result = execute(scenario, job_opt, job.seed);
            job.infeasible = result.qp_infeasible;
            if (!result.trace.empty()) job.metrics = result.metrics;
            std::string stem = "escbf";
            if (job.controller != "escbf") {
                char tau_text[32];
                std::snprintf(tau_text, sizeof tau_text, "baseline_tau%.3g", job.tau);
                stem = tau_text;
            }
            const std::string path = opt.out_dir + "/runs/" + stem + "_seed" +
                                     std::to_string(job.seed) + ".json";
            const std::string text = escbf::metrics_to_json_text(job.metrics, scenario.budget);
            std::lock_guard<std::mutex> lock(io_mutex);
            escbf::write_file_atomic(path, text);
        }
    };
    std::vector<std::thread> pool;
    const int threads = std::min<int>(thread_budget(), static_cast<int>(jobs.size()));
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();

    // Aggregate per label, preserving first-seen order.
    std::vector<std::string> labels;
    for (const CompareJob& job : jobs)
        if (std::find(labels.begin(), labels.end(), job.label) == labels.end())
            labels.push_back(job.label);

    nlohmann::json summary = nlohmann::json::array();
    std::string table = "controller            eoa_min      eoa_median   eoa_max      "
                        "violations  infeasible  distance_mean\n";
    int escbf_code = kExitOk;
    for (const std::string& label : labels) {
        std::vector<double> eoa;
        double distance = 0.0;
        int violations = 0, infeasible = 0, count = 0;
        for (const CompareJob& job : jobs)
            if (job.label == label) {
                ++count;
                eoa.push_back(job.metrics.eoa);
                distance += job.metrics.distance_traveled;
                if (job.metrics.budget_violated) ++violations;
                if (job.infeasible) ++infeasible;
            }
        const double eoa_min = *std::min_element(eoa.begin(), eoa.end());
        const double eoa_max = *std::max_element(eoa.begin(), eoa.end());
        summary.push_back({{"controller", label},
                           {"runs", count},
                           {"eoa_min", eoa_min},
                           {"eoa_median", median(eoa)},
                           {"eoa_max", eoa_max},
                           {"violations", violations},
                           {"infeasible", infeasible},
                           {"distance_mean", distance / count}});
        char line[256];
        std::snprintf(line, sizeof line, "%-20s  %-11.5g  %-11.5g  %-11.5g  %-10d  %-10d  %-13.5g\n",
                      label.c_str(), eoa_min, median(eoa), eoa_max, violations, infeasible,
                      distance / count);
        table += line;
        if (label == "escbf") {
            if (infeasible > 0) escbf_code = kExitQpInfeasible;
            else if (violations > 0) escbf_code = kExitBudgetViolated;
        }
    }
    escbf::write_file_atomic(opt.out_dir + "/summary.json", summary.dump(2) + "\n");
    escbf::write_file_atomic(opt.out_dir + "/summary.txt", table);
    if (!opt.quiet) std::fputs(table.c_str(), stdout);
    return escbf_code;
}

int plot_command(const std::string& trace_path, const std::string& panel,
                 const std::string& out_path, const std::string& path_file) {
    const std::vector<escbf::TraceRecord> trace =
        escbf::trace_from_jsonl(escbf::read_file(trace_path));
    std::vector<escbf::Vec2> waypoints;
    if (!path_file.empty())
        waypoints = escbf::path_from_text(escbf::read_file(path_file)).waypoints;
    escbf::write_file_atomic(out_path, escbf::render_panel(trace, panel, waypoints));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Energy-sufficiency safety filter: scenario runner and tooling"};
    app.require_subcommand(1);

    RunOptions opt;
    int seeds = 20;
    std::vector<double> taus{0.3, 0.5};
    std::string trace_path, panel = "he", plot_out = "panel.svg", path_file;

    CLI::App* run_cmd = app.add_subcommand("run", "Run one scenario and write trace + metrics");
    run_cmd->add_option("--scenario", opt.scenario_path, "Scenario JSON file")->required();
    run_cmd->add_option("--seed", opt.seed, "Random seed");
    run_cmd->add_option("--out", opt.out_dir, "Output directory");
    run_cmd->add_option("--controller", opt.controller, "escbf or baseline")
        ->check(CLI::IsMember({"escbf", "baseline"}));
    run_cmd->add_option("--model", opt.model, "integrator or unicycle")
        ->check(CLI::IsMember({"integrator", "unicycle"}));
    run_cmd->add_option("--tau", opt.tau, "Baseline return threshold");
    run_cmd->add_option("--dt", opt.dt, "Override the scenario time step");
    run_cmd->add_flag("--quiet", opt.quiet, "Suppress the summary line");

    CLI::App* compare_cmd =
        app.add_subcommand("compare", "Batch-run the safety filter against the baseline");
    compare_cmd->add_option("--scenario", opt.scenario_path, "Scenario JSON file")->required();
    compare_cmd->add_option("--seeds", seeds, "Number of seeds per controller")
        ->check(CLI::PositiveNumber);
    compare_cmd->add_option("--tau", taus, "Baseline thresholds (repeatable)");
    compare_cmd->add_option("--out", opt.out_dir, "Output directory");
    compare_cmd->add_option("--model", opt.model, "integrator or unicycle")
        ->check(CLI::IsMember({"integrator", "unicycle"}));
    compare_cmd->add_option("--dt", opt.dt, "Override the scenario time step");
    compare_cmd->add_flag("--quiet", opt.quiet, "Suppress the summary table");

    CLI::App* plot_cmd = app.add_subcommand("plot", "Render one trace panel as SVG");
    plot_cmd->add_option("--trace", trace_path, "Trace JSONL file")->required();
    plot_cmd->add_option("--panel", panel, "he, energy, s, length, or traj");
    plot_cmd->add_option("--out", plot_out, "Output SVG file");
    plot_cmd->add_option("--path", path_file, "Waypoint text file for the traj overlay");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (run_cmd->parsed()) return run_command(opt);
        if (compare_cmd->parsed()) return compare_command(opt, seeds, taus);
        return plot_command(trace_path, panel, plot_out, path_file);
    } catch (const escbf::UnknownPanel& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitUsage;
    } catch (const escbf::EmptyTrace& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitEmptyTrace;
    } catch (const escbf::IoError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 1;
    }
}
