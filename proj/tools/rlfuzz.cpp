// Command-line front end: run fuzzing campaigns against the built-in parser
// or an external command, and reproduce the evaluation protocol (baseline
// comparison, sweeps, reward correlation, generalization).

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rlfuzz/rlfuzz.hpp"

namespace {

using namespace rlfuzz;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitEnvironment = 2;
constexpr int kExitAborted = 3;

struct CommonFlags {
    std::string config_path;
    std::string target_spec;
    std::vector<std::string> seeds;
    std::int64_t generations = -1;
    std::int64_t state_width = -1;
    std::string reward;
    std::string policy;
    std::int64_t rng_seed = -1;
    double gamma = -1.0;
    double timeout = -1.0;
    std::string out_dir;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON config file; flags override its values");
    cmd->add_option("--target", f.target_spec,
                    "builtin | builtin-virtual | null | command template containing {input}");
    cmd->add_option("--seed", f.seeds, "seed input file (repeatable)");
    cmd->add_option("--generations", f.generations, "loop iterations per run");
    cmd->add_option("--state-width", f.state_width, "observed window width in bytes");
    cmd->add_option("--reward", f.reward, "r1 (coverage) | r2 (time) | r3 (combined)");
    cmd->add_option("--policy", f.policy, "learned | baseline | frozen:<weights>");
    cmd->add_option("--rng-seed", f.rng_seed, "master random seed");
    cmd->add_option("--gamma", f.gamma, "discount factor");
    cmd->add_option("--timeout", f.timeout, "per-execution timeout in seconds");
    cmd->add_option("--out", f.out_dir, "directory for reports, weights and findings");
}

LoopConfig resolve_config(const CommonFlags& f) {
    LoopConfig cfg;
    if (!f.config_path.empty()) cfg = load_config_file(f.config_path);
    if (!f.target_spec.empty()) {
        if (f.target_spec == "builtin" || f.target_spec == "builtin-virtual" ||
            f.target_spec == "null") {
            cfg.target.kind = f.target_spec;
            cfg.target.command.clear();
        } else if (f.target_spec.find("{input}") != std::string::npos) {
            cfg.target.kind = "command";
            cfg.target.command = f.target_spec;
        } else {
            throw ContractViolation("--target must be builtin|builtin-virtual|null or a command "
                                    "template containing {input}");
        }
    }
    if (!f.seeds.empty()) cfg.seed_paths = f.seeds;
    if (f.generations >= 0) cfg.generations = static_cast<std::size_t>(f.generations);
    if (f.state_width >= 0) cfg.state_width = static_cast<std::size_t>(f.state_width);
    if (!f.reward.empty()) cfg.reward.mode = reward_mode_from_name(f.reward);
    if (!f.policy.empty()) {
        if (f.policy == "learned") {
            cfg.policy = PolicyKind::learned;
        } else if (f.policy == "baseline") {
            cfg.policy = PolicyKind::baseline_random;
        } else if (f.policy.rfind("frozen:", 0) == 0) {
            cfg.policy = PolicyKind::frozen;
            cfg.frozen_weights = f.policy.substr(7);
        } else {
            throw ContractViolation("--policy must be learned, baseline or frozen:<weights>");
        }
    }
    if (f.rng_seed >= 0) cfg.rng_seed = static_cast<std::uint64_t>(f.rng_seed);
    if (f.gamma >= 0.0) cfg.gamma = f.gamma;
    if (f.timeout >= 0.0) cfg.target.timeout = f.timeout;
    if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
    if (cfg.seed_paths.empty())
        throw ContractViolation("no seed inputs: pass --seed <file> or list seeds in the config");
    return cfg.resolved();
}

void ensure_out_dir(const std::string& dir) {
    if (!dir.empty()) std::filesystem::create_directories(dir);
}

int exit_code_for(const RunReport& report) {
    if (!report.aborted) return kExitOk;
    return report.abort_kind == AbortKind::environment ? kExitEnvironment : kExitAborted;
}

void print_run_summary(const RunReport& report) {
    std::size_t completed = 0, rejected = 0, crashed = 0, timed_out = 0;
    for (const auto& r : report.records) {
        switch (r.outcome) {
            case Outcome::completed: ++completed; break;
            case Outcome::rejected_early: ++rejected; break;
            case Outcome::crashed: ++crashed; break;
            case Outcome::timed_out: ++timed_out; break;
        }
    }
    std::printf("generations      %zu\n", report.records.size());
    std::printf("total reward     %.6g\n", report.total_reward());
    std::printf("last-half reward %.6g\n", report.last_half_reward_sum());
    std::printf("outcomes         completed=%zu rejected_early=%zu crashed=%zu timed_out=%zu\n",
                completed, rejected, crashed, timed_out);
    if (!report.findings.empty()) std::printf("crash findings   %zu\n", report.findings.size());
    if (!report.weights_path.empty()) std::printf("weights          %s\n", report.weights_path.c_str());
    if (report.aborted) std::printf("ABORTED          %s\n", report.abort_reason.c_str());
}

void print_improvement(const ImprovementReport& rep, const char* label) {
    std::printf("%-12s mode=%s generations=%zu window=%zu\n", label, reward_mode_name(rep.mode),
                rep.generations, rep.window);
    for (const TrialResult& t : rep.trials) {
        if (t.valid)
            std::printf("  trial %zu: rl=%.6g baseline=%.6g quotient=%.4f\n", t.trial, t.rl_sum,
                        t.baseline_sum, t.quotient);
        else
            std::printf("  trial %zu: invalid (%s)\n", t.trial, t.note.c_str());
    }
    std::printf("  mean quotient %.4f (min %.4f, max %.4f, %zu/%zu trials)\n", rep.mean_quotient,
                rep.min_quotient, rep.max_quotient, rep.valid_trials, rep.trials.size());
}

int cmd_fuzz(const CommonFlags& flags) {
    LoopConfig cfg = resolve_config(flags);
    ensure_out_dir(cfg.out_dir);
    auto target = make_target(cfg.target);
    RunReport report = run(cfg, *target);
    if (!cfg.out_dir.empty()) {
        std::string path = (std::filesystem::path(cfg.out_dir) / "report.csv").string();
        write_run_report(report, path);
        std::printf("report           %s\n", path.c_str());
    }
    print_run_summary(report);
    return exit_code_for(report);
}

int cmd_bench(const CommonFlags& flags, std::size_t trials) {
    LoopConfig cfg = resolve_config(flags);
    ensure_out_dir(cfg.out_dir);
    auto target = make_target(cfg.target);
    ImprovementReport rep = compare_baseline(cfg, *target, trials);
    print_improvement(rep, "bench");
    if (!cfg.out_dir.empty()) {
        std::string path = (std::filesystem::path(cfg.out_dir) / "bench.csv").string();
        write_improvement_report(rep, path);
        std::printf("table            %s\n", path.c_str());
    }
    return kExitOk;
}

int cmd_generalize(const CommonFlags& flags, std::size_t trials) {
    LoopConfig cfg = resolve_config(flags);
    ensure_out_dir(cfg.out_dir);
    auto target = make_target(cfg.target);
    ImprovementReport rep = generalization_run(cfg, *target, trials);
    print_improvement(rep, "generalize");
    if (!cfg.out_dir.empty()) {
        std::string path = (std::filesystem::path(cfg.out_dir) / "generalize.csv").string();
        write_improvement_report(rep, path, "generalize");
        std::printf("table            %s\n", path.c_str());
    }
    return kExitOk;
}

int cmd_correlate(const CommonFlags& flags, std::size_t samples) {
    LoopConfig cfg = resolve_config(flags);
    ensure_out_dir(cfg.out_dir);
    auto target = make_target(cfg.target);
    CorrelationReport rep = reward_correlation(cfg, *target, samples);
    std::printf("samples          %zu\n", rep.samples.size());
    std::printf("pearson          %.4f\n", rep.coefficient);
    if (!cfg.out_dir.empty()) {
        std::string path = (std::filesystem::path(cfg.out_dir) / "correlate.csv").string();
        write_correlation_report(rep, path);
        std::printf("table            %s\n", path.c_str());
    }
    return kExitOk;
}

int cmd_sweep(const CommonFlags& flags, const std::string& dimension,
              const std::string& values_csv, std::size_t trials) {
    LoopConfig cfg = resolve_config(flags);
    ensure_out_dir(cfg.out_dir);
    std::vector<std::string> values;
    std::string cur;
    for (char c : values_csv) {
        if (c == ',') {
            if (!cur.empty()) values.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) values.push_back(cur);
    auto target = make_target(cfg.target);
    SweepReport rep = sweep(dimension, values, cfg, *target, trials);
    std::printf("sweep over %s\n", rep.dimension.c_str());
    for (const SweepCell& c : rep.cells) {
        if (c.ok)
            std::printf("  %-10s mean=%.4f min=%.4f max=%.4f (%zu trials)\n", c.value.c_str(),
                        c.result.mean_quotient, c.result.min_quotient, c.result.max_quotient,
                        c.result.valid_trials);
        else
            std::printf("  %-10s FAILED: %s\n", c.value.c_str(), c.note.c_str());
    }
    if (!cfg.out_dir.empty()) {
        std::string path = (std::filesystem::path(cfg.out_dir) / "sweep.csv").string();
        write_sweep_report(rep, path);
        std::printf("table            %s\n", path.c_str());
    }
    return kExitOk;
}

int cmd_replay(const std::string& report_path, const std::string& out_dir) {
    RunReport original = parse_run_report(report_path);
    LoopConfig cfg = config_from_json(original.config_echo);
    cfg.out_dir = out_dir;
    ensure_out_dir(out_dir);
    auto target = make_target(cfg.target);
    RunReport replayed = run(cfg, *target);
    if (!out_dir.empty()) {
        std::string path = (std::filesystem::path(out_dir) / "report.csv").string();
        write_run_report(replayed, path);
        std::printf("report           %s\n", path.c_str());
    }
    print_run_summary(replayed);
    bool records_match = replayed.records == original.records;
    std::printf("records match original: %s\n", records_match ? "yes" : "no");
    if (!records_match && cfg.reward.mode != RewardMode::coverage_r1 &&
        cfg.target.kind != "builtin-virtual")
        std::printf("  (time-based rewards read the physical clock; replay a coverage run or use\n"
                    "   the builtin-virtual target for bit-exact record matches)\n");
    return exit_code_for(replayed);
}

int cmd_make_seed(const std::string& out_file, std::size_t objects, std::uint64_t doc_seed) {
    SampleDocSpec spec;
    spec.objects = objects;
    spec.rng_seed = doc_seed;
    Input(make_sample_document(spec)).write_file(out_file);
    std::printf("wrote %s (%zu objects)\n", out_file.c_str(), objects);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reinforcement-learning fuzzer"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::size_t trials = 5;
    std::size_t samples = 500;
    std::string dimension, values_csv;
    std::string report_path, replay_out;
    std::string seed_out = "sample.pdf";
    std::size_t seed_objects = 101;
    std::uint64_t doc_seed = 7;

    CLI::App* fuzz = app.add_subcommand("fuzz", "run one fuzzing campaign");
    add_common_flags(fuzz, flags);

    CLI::App* bench = app.add_subcommand("bench", "learned policy vs uniform baseline");
    add_common_flags(bench, flags);
    bench->add_option("--trials", trials, "matched-seed trials");

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "baseline comparison across a dimension");
    add_common_flags(sweep_cmd, flags);
    sweep_cmd->add_option("--dimension", dimension, "state_width | activation")->required();
    sweep_cmd->add_option("--values", values_csv, "comma-separated values")->required();
    sweep_cmd->add_option("--trials", trials, "matched-seed trials per cell");

    CLI::App* correlate = app.add_subcommand("correlate", "coverage/time reward correlation");
    add_common_flags(correlate, flags);
    correlate->add_option("--samples", samples, "random mutations to measure");

    CLI::App* generalize = app.add_subcommand("generalize",
                                              "train on the first half, evaluate frozen on the second");
    add_common_flags(generalize, flags);
    generalize->add_option("--trials", trials, "matched-seed trials");

    CLI::App* replay = app.add_subcommand("replay", "re-run the configuration stored in a report");
    replay->add_option("--report", report_path, "report.csv produced by fuzz")->required();
    replay->add_option("--out", replay_out, "directory for the replayed report");

    CLI::App* make_seed = app.add_subcommand("make-seed", "write the bundled synthetic seed document");
    make_seed->add_option("--out-file", seed_out, "output path");
    make_seed->add_option("--objects", seed_objects, "object count");
    make_seed->add_option("--doc-seed", doc_seed, "generator rng seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (fuzz->parsed()) return cmd_fuzz(flags);
        if (bench->parsed()) return cmd_bench(flags, trials);
        if (sweep_cmd->parsed()) return cmd_sweep(flags, dimension, values_csv, trials);
        if (correlate->parsed()) return cmd_correlate(flags, samples);
        if (generalize->parsed()) return cmd_generalize(flags, trials);
        if (replay->parsed()) return cmd_replay(report_path, replay_out);
        if (make_seed->parsed()) return cmd_make_seed(seed_out, seed_objects, doc_seed);
    } catch (const ContractViolation& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const FormatError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const EnvironmentError& e) {
        std::fprintf(stderr, "environment error: %s\n", e.what());
        return kExitEnvironment;
    } catch (const StateError& e) {
        std::fprintf(stderr, "aborted: %s\n", e.what());
        return kExitAborted;
    } catch (const Error& e) {
        std::fprintf(stderr, "aborted: %s\n", e.what());
        return kExitAborted;
    }
    return kExitUsage;
}
