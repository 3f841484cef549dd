#pragma once

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "rlfuzz/loop.hpp"
#include "rlfuzz/report.hpp"

namespace rlfuzz {

inline std::unique_ptr<Target> make_target(const TargetConfig& t) {
    if (t.kind == "builtin") return std::make_unique<BuiltinParserTarget>(false);
    if (t.kind == "builtin-virtual") return std::make_unique<BuiltinParserTarget>(true);
    if (t.kind == "null") return std::make_unique<NullTarget>();
    if (t.kind == "command") return std::make_unique<ExternalCommandTarget>(t.command);
    throw ContractViolation("unknown target kind \"" + t.kind +
                            "\" (expected builtin|builtin-virtual|null|command)");
}

struct TrialResult {
    std::size_t trial = 0;
    std::uint64_t rng_seed = 0;
    double rl_sum = 0.0;
    double baseline_sum = 0.0;
    double quotient = 0.0;
    bool valid = false;
    std::string note;
};

// Relative improvement over the uniform-random policy: the quotient of the
// two arms' most recent half of accumulated rewards, per matched-seed trial.
struct ImprovementReport {
    Json config_echo;
    RewardMode mode = RewardMode::time_r2;
    std::size_t generations = 0;
    std::size_t window = 0;  // number of scored generations (the last half)
    std::vector<TrialResult> trials;
    std::size_t valid_trials = 0;
    double mean_quotient = 0.0;
    double min_quotient = 0.0;
    double max_quotient = 0.0;

    void finalize() {
        valid_trials = 0;
        double sum = 0.0;
        min_quotient = 0.0;
        max_quotient = 0.0;
        for (const TrialResult& t : trials) {
            if (!t.valid) continue;
            if (valid_trials == 0) {
                min_quotient = max_quotient = t.quotient;
            } else {
                min_quotient = std::min(min_quotient, t.quotient);
                max_quotient = std::max(max_quotient, t.quotient);
            }
            sum += t.quotient;
            ++valid_trials;
        }
        mean_quotient = valid_trials ? sum / static_cast<double>(valid_trials) : 0.0;
    }
};

namespace detail {

// The combined-reward experiment is scored in execution time, matching the
// protocol the headline numbers use; r1 and r2 score their own reward sums.
inline double score_arm(const RunReport& report, RewardMode mode) {
    return mode == RewardMode::combined_r3 ? report.last_half_time_sum()
                                           : report.last_half_reward_sum();
}

inline std::uint64_t trial_seed(const LoopConfig& cfg, std::size_t k) {
    return Rng(cfg.rng_seed).fork(1000 + k).seed();
}

}  // namespace detail

// Runs the configured policy and the uniform baseline with matched rng
// seeds per trial: both arms observe the identical offset sequence, so the
// policy is the only varying factor.
inline ImprovementReport compare_baseline(const LoopConfig& raw_config, Target& target,
                                          std::size_t trials, std::vector<Input> seeds = {},
                                          const Network* frozen_net = nullptr) {
    if (trials < 1) throw ContractViolation("compare_baseline: trials must be >= 1");
    LoopConfig cfg = raw_config.resolved();
    if (seeds.empty())
        for (const std::string& path : cfg.seed_paths) seeds.push_back(Input::from_file(path));

    ImprovementReport report;
    report.config_echo = config_to_json(cfg);
    report.mode = cfg.reward.mode;
    report.generations = cfg.generations;
    report.window = cfg.generations - cfg.generations / 2;

    for (std::size_t k = 0; k < trials; ++k) {
        TrialResult tr;
        tr.trial = k;
        tr.rng_seed = detail::trial_seed(cfg, k);

        LoopConfig rl_cfg = cfg;
        rl_cfg.rng_seed = tr.rng_seed;
        rl_cfg.out_dir.clear();
        LoopConfig bl_cfg = rl_cfg;
        bl_cfg.policy = PolicyKind::baseline_random;
        bl_cfg.frozen_weights.clear();

        RunReport rl = run(rl_cfg, target, seeds, frozen_net);
        RunReport bl = run(bl_cfg, target, seeds);
        if (rl.aborted || bl.aborted) {
            tr.note = rl.aborted ? "rl arm aborted: " + rl.abort_reason
                                 : "baseline arm aborted: " + bl.abort_reason;
        } else {
            tr.rl_sum = detail::score_arm(rl, cfg.reward.mode);
            tr.baseline_sum = detail::score_arm(bl, cfg.reward.mode);
            if (tr.baseline_sum > 0.0) {
                tr.quotient = tr.rl_sum / tr.baseline_sum;
                tr.valid = true;
            } else {
                tr.note = "baseline sum is not positive";
            }
        }
        report.trials.push_back(std::move(tr));
    }
    report.finalize();
    if (report.valid_trials == 0) throw StateError("compare_baseline: no trial produced a quotient");
    return report;
}

struct CorrelationSample {
    std::size_t sample = 0;
    std::size_t offset = 0;
    std::size_t action = 0;
    double coverage = 0.0;
    double time = 0.0;
};

struct CorrelationReport {
    Json config_echo;
    std::vector<CorrelationSample> samples;
    double coefficient = 0.0;
};

inline double pearson_correlation(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw ContractViolation("pearson_correlation: need two equally-sized series");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(ys.size());
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0)
        throw UndefinedCorrelationError("pearson correlation undefined: zero-variance series");
    return sxy / std::sqrt(sxx * syy);
}

// Applies `samples` uniformly random (offset, action) mutations to the seed
// and correlates memoryless coverage with execution time across them.
inline CorrelationReport reward_correlation(const LoopConfig& raw_config, Target& target,
                                            std::size_t samples, std::vector<Input> seeds = {}) {
    if (samples < 30) throw ContractViolation("reward_correlation: need at least 30 samples");
    LoopConfig cfg = raw_config.resolved();
    if (seeds.empty())
        for (const std::string& path : cfg.seed_paths) seeds.push_back(Input::from_file(path));
    if (seeds.empty()) throw ContractViolation("reward_correlation: no seed inputs configured");

    TokenDictionary dict = build_dictionary(seeds);
    ActionSet actions{cfg.resolved_actions()};
    Rng base(cfg.rng_seed);
    Rng offset_rng = base.fork(50), action_rng = base.fork(51), mutation_rng = base.fork(52);

    CorrelationReport report;
    report.config_echo = config_to_json(cfg);
    std::vector<double> coverage, time;
    for (std::size_t i = 0; i < samples; ++i) {
        const Input& seed = seeds[i % seeds.size()];
        std::size_t offset = random_offset(offset_rng, seed.size(), cfg.state_width);
        StateWindow w = extract_state(seed, offset, cfg.state_width);
        std::size_t action = baseline_select(actions.size(), action_rng);
        MutationResult m = apply_action(seed, w, actions.at(action), dict, mutation_rng);
        ExecutionTrace trace = target.execute(m.output, cfg.target.timeout);
        CorrelationSample s;
        s.sample = i;
        s.offset = offset;
        s.action = action;
        s.coverage = static_cast<double>(trace.blocks.size());
        s.time = trace.wall_time;
        coverage.push_back(s.coverage);
        time.push_back(s.time);
        report.samples.push_back(s);
    }
    report.coefficient = pearson_correlation(coverage, time);
    return report;
}

// Trains on first-half offsets, freezes the weights, and scores the greedy
// policy on the unseen second half against a matched baseline.
inline ImprovementReport generalization_run(const LoopConfig& raw_config, Target& target,
                                            std::size_t trials, std::vector<Input> seeds = {}) {
    LoopConfig cfg = raw_config.resolved();
    if (seeds.empty())
        for (const std::string& path : cfg.seed_paths) seeds.push_back(Input::from_file(path));
    for (const Input& s : seeds)
        if (s.size() < 2 * cfg.state_width)
            throw ContractViolation("generalization_run: seed shorter than twice the state width");

    ImprovementReport report;
    report.config_echo = config_to_json(cfg);
    report.mode = cfg.reward.mode;
    report.generations = cfg.generations;
    report.window = cfg.generations - cfg.generations / 2;

    std::optional<Network> pretrained;
    if (cfg.policy == PolicyKind::frozen) pretrained = load_weights(cfg.frozen_weights);

    for (std::size_t k = 0; k < trials; ++k) {
        TrialResult tr;
        tr.trial = k;
        tr.rng_seed = detail::trial_seed(cfg, k);

        std::optional<Network> net = pretrained;
        if (!net) {
            LoopConfig train_cfg = cfg;
            train_cfg.policy = PolicyKind::learned;
            train_cfg.rng_seed = tr.rng_seed;
            train_cfg.offset_range = OffsetRange{0.0, 0.5};
            train_cfg.out_dir.clear();
            RunReport train = run(train_cfg, target, seeds);
            if (train.aborted) {
                tr.note = "training arm aborted: " + train.abort_reason;
                report.trials.push_back(std::move(tr));
                continue;
            }
            net = std::move(train.final_network);
        }

        LoopConfig eval_cfg = cfg;
        eval_cfg.policy = PolicyKind::frozen;
        eval_cfg.frozen_weights = "<in-memory>";
        eval_cfg.rng_seed = tr.rng_seed;
        eval_cfg.offset_range = OffsetRange{0.5, 1.0};
        eval_cfg.out_dir.clear();
        LoopConfig bl_cfg = eval_cfg;
        bl_cfg.policy = PolicyKind::baseline_random;
        bl_cfg.frozen_weights.clear();

        RunReport frozen = run(eval_cfg, target, seeds, &*net);
        RunReport bl = run(bl_cfg, target, seeds);
        if (frozen.aborted || bl.aborted) {
            tr.note = frozen.aborted ? "frozen arm aborted: " + frozen.abort_reason
                                     : "baseline arm aborted: " + bl.abort_reason;
        } else {
            tr.rl_sum = detail::score_arm(frozen, cfg.reward.mode);
            tr.baseline_sum = detail::score_arm(bl, cfg.reward.mode);
            if (tr.baseline_sum > 0.0) {
                tr.quotient = tr.rl_sum / tr.baseline_sum;
                tr.valid = true;
            } else {
                tr.note = "baseline sum is not positive";
            }
        }
        report.trials.push_back(std::move(tr));
    }
    report.finalize();
    if (report.valid_trials == 0) throw StateError("generalization_run: no trial produced a quotient");
    return report;
}

struct SweepCell {
    std::string value;
    bool ok = false;
    std::string note;
    ImprovementReport result;
};

struct SweepReport {
    Json config_echo;
    std::string dimension;
    std::vector<SweepCell> cells;
};

// One compare_baseline per value, with shared trial seeds across cells.
// A failing cell is marked and the sweep continues.
inline SweepReport sweep(const std::string& dimension, const std::vector<std::string>& values,
                         const LoopConfig& raw_config, Target& target, std::size_t trials,
                         std::vector<Input> seeds = {}) {
    if (values.empty()) throw ContractViolation("sweep: values must be non-empty");
    if (dimension != "state_width" && dimension != "activation")
        throw ContractViolation("sweep: dimension must be state_width or activation");
    LoopConfig cfg = raw_config.resolved();
    if (seeds.empty())
        for (const std::string& path : cfg.seed_paths) seeds.push_back(Input::from_file(path));

    SweepReport report;
    report.config_echo = config_to_json(cfg);
    report.dimension = dimension;
    for (const std::string& v : values) {
        SweepCell cell;
        cell.value = v;
        try {
            LoopConfig cell_cfg = cfg;
            if (dimension == "state_width") {
                cell_cfg.state_width = static_cast<std::size_t>(std::stoul(v));
                cell_cfg.hidden_dims = {0, 0};  // re-derive for the new width
            } else {
                cell_cfg.activation = activation_from_name(v);
            }
            cell.result = compare_baseline(cell_cfg, target, trials, seeds);
            cell.ok = true;
        } catch (const std::exception& e) {
            cell.note = e.what();
        }
        report.cells.push_back(std::move(cell));
    }
    return report;
}

struct TimingCalibration {
    double mean = 0.0;
    double variance = 0.0;
    double ratio = 0.0;  // variance / mean^2
    bool stable = false;
    std::size_t runs = 0;
};

// Repeated executions of the pristine seed. The execution-time reward is
// only trusted when the variance sits two orders of magnitude below the
// squared mean; otherwise callers should warn and treat time-based results
// as unreliable on this machine.
inline TimingCalibration calibrate_timing(Target& target, const Input& seed, std::size_t runs = 200,
                                          double timeout = 2.0) {
    if (runs < 2) throw ContractViolation("calibrate_timing: need at least 2 runs");
    target.execute(seed, timeout);  // warm-up
    std::vector<double> times;
    times.reserve(runs);
    for (std::size_t i = 0; i < runs; ++i) times.push_back(target.execute(seed, timeout).wall_time);
    TimingCalibration cal;
    cal.runs = runs;
    for (double t : times) cal.mean += t;
    cal.mean /= static_cast<double>(runs);
    for (double t : times) cal.variance += (t - cal.mean) * (t - cal.mean);
    cal.variance /= static_cast<double>(runs);
    cal.ratio = cal.mean > 0.0 ? cal.variance / (cal.mean * cal.mean) : 0.0;
    cal.stable = cal.ratio <= 1e-2;
    return cal;
}

// --- table serialization -------------------------------------------------

namespace detail {

inline std::string sanitize_note(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n') c = ';';
    return s;
}

}  // namespace detail

inline void write_improvement_report(const ImprovementReport& r, std::ostream& out,
                                     const std::string& kind = "bench") {
    out << "# rlfuzz-report v1 " << kind << "\n";
    out << "# config " << r.config_echo.dump() << "\n";
    out << "trial,rng_seed,rl_sum,baseline_sum,quotient,valid,note\n";
    for (const TrialResult& t : r.trials) {
        out << t.trial << ',' << t.rng_seed << ',' << detail::format_double(t.rl_sum) << ','
            << detail::format_double(t.baseline_sum) << ',' << detail::format_double(t.quotient)
            << ',' << (t.valid ? 1 : 0) << ',' << detail::sanitize_note(t.note) << "\n";
    }
    Json summary;
    summary["mode"] = reward_mode_name(r.mode);
    summary["generations"] = r.generations;
    summary["window"] = r.window;
    summary["valid_trials"] = r.valid_trials;
    summary["mean_quotient"] = r.mean_quotient;
    summary["min_quotient"] = r.min_quotient;
    summary["max_quotient"] = r.max_quotient;
    out << "# summary " << summary.dump() << "\n";
}

inline void write_improvement_report(const ImprovementReport& r, const std::string& path,
                                     const std::string& kind = "bench") {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw EnvironmentError("cannot write report file: " + path);
    write_improvement_report(r, out, kind);
}

inline ImprovementReport parse_improvement_report(std::istream& in) {
    ImprovementReport r;
    std::string line;
    if (!std::getline(in, line) || line.rfind("# rlfuzz-report v1 ", 0) != 0)
        throw FormatError("improvement report: missing magic line");
    if (!std::getline(in, line) || line.rfind("# config ", 0) != 0)
        throw FormatError("improvement report: missing config line");
    r.config_echo = Json::parse(line.substr(9));
    if (!std::getline(in, line) || line != "trial,rng_seed,rl_sum,baseline_sum,quotient,valid,note")
        throw FormatError("improvement report: missing column header");
    Json summary;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("# summary ", 0) == 0) {
            summary = Json::parse(line.substr(10));
            break;
        }
        auto f = detail::split_csv(line);
        if (f.size() != 7) throw FormatError("improvement report: bad row: " + line);
        TrialResult t;
        t.trial = static_cast<std::size_t>(std::stoull(f[0]));
        t.rng_seed = std::stoull(f[1]);
        t.rl_sum = detail::parse_double(f[2], "rl_sum");
        t.baseline_sum = detail::parse_double(f[3], "baseline_sum");
        t.quotient = detail::parse_double(f[4], "quotient");
        t.valid = f[5] == "1";
        t.note = f[6];
        r.trials.push_back(std::move(t));
    }
    if (summary.is_null()) throw FormatError("improvement report: missing summary block");
    r.mode = reward_mode_from_name(summary["mode"].get<std::string>());
    r.generations = summary["generations"].get<std::size_t>();
    r.window = summary["window"].get<std::size_t>();
    r.finalize();
    if (r.valid_trials != summary["valid_trials"].get<std::size_t>())
        throw FormatError("improvement report: summary disagrees with rows");
    return r;
}

inline ImprovementReport parse_improvement_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw EnvironmentError("cannot open report file: " + path);
    return parse_improvement_report(in);
}

inline void write_correlation_report(const CorrelationReport& r, std::ostream& out) {
    out << "# rlfuzz-report v1 correlate\n";
    out << "# config " << r.config_echo.dump() << "\n";
    out << "sample,offset,action,coverage,time\n";
    for (const CorrelationSample& s : r.samples) {
        out << s.sample << ',' << s.offset << ',' << s.action << ','
            << detail::format_double(s.coverage) << ',' << detail::format_double(s.time) << "\n";
    }
    Json summary;
    summary["samples"] = r.samples.size();
    summary["pearson"] = r.coefficient;
    out << "# summary " << summary.dump() << "\n";
}

inline void write_correlation_report(const CorrelationReport& r, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw EnvironmentError("cannot write report file: " + path);
    write_correlation_report(r, out);
}

inline CorrelationReport parse_correlation_report(std::istream& in) {
    CorrelationReport r;
    std::string line;
    if (!std::getline(in, line) || line != "# rlfuzz-report v1 correlate")
        throw FormatError("correlation report: missing magic line");
    if (!std::getline(in, line) || line.rfind("# config ", 0) != 0)
        throw FormatError("correlation report: missing config line");
    r.config_echo = Json::parse(line.substr(9));
    if (!std::getline(in, line) || line != "sample,offset,action,coverage,time")
        throw FormatError("correlation report: missing column header");
    Json summary;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("# summary ", 0) == 0) {
            summary = Json::parse(line.substr(10));
            break;
        }
        auto f = detail::split_csv(line);
        if (f.size() != 5) throw FormatError("correlation report: bad row: " + line);
        CorrelationSample s;
        s.sample = static_cast<std::size_t>(std::stoull(f[0]));
        s.offset = static_cast<std::size_t>(std::stoull(f[1]));
        s.action = static_cast<std::size_t>(std::stoull(f[2]));
        s.coverage = detail::parse_double(f[3], "coverage");
        s.time = detail::parse_double(f[4], "time");
        r.samples.push_back(s);
    }
    if (summary.is_null()) throw FormatError("correlation report: missing summary block");
    r.coefficient = summary["pearson"].get<double>();
    if (summary["samples"].get<std::size_t>() != r.samples.size())
        throw FormatError("correlation report: summary disagrees with rows");
    return r;
}

inline void write_sweep_report(const SweepReport& r, std::ostream& out) {
    out << "# rlfuzz-report v1 sweep\n";
    out << "# config " << r.config_echo.dump() << "\n";
    out << "value,ok,mean_quotient,min_quotient,max_quotient,valid_trials,note\n";
    for (const SweepCell& c : r.cells) {
        out << c.value << ',' << (c.ok ? 1 : 0) << ','
            << detail::format_double(c.result.mean_quotient) << ','
            << detail::format_double(c.result.min_quotient) << ','
            << detail::format_double(c.result.max_quotient) << ',' << c.result.valid_trials << ','
            << detail::sanitize_note(c.note) << "\n";
    }
    Json summary;
    summary["dimension"] = r.dimension;
    summary["cells"] = r.cells.size();
    out << "# summary " << summary.dump() << "\n";
}

inline void write_sweep_report(const SweepReport& r, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw EnvironmentError("cannot write report file: " + path);
    write_sweep_report(r, out);
}

// Row-level parse of a sweep table. Cells come back with their aggregate
// quotients; the per-trial details live in the per-cell bench reports and
// are not duplicated here.
inline SweepReport parse_sweep_report(std::istream& in) {
    SweepReport r;
    std::string line;
    if (!std::getline(in, line) || line != "# rlfuzz-report v1 sweep")
        throw FormatError("sweep report: missing magic line");
    if (!std::getline(in, line) || line.rfind("# config ", 0) != 0)
        throw FormatError("sweep report: missing config line");
    r.config_echo = Json::parse(line.substr(9));
    if (!std::getline(in, line) ||
        line != "value,ok,mean_quotient,min_quotient,max_quotient,valid_trials,note")
        throw FormatError("sweep report: missing column header");
    Json summary;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("# summary ", 0) == 0) {
            summary = Json::parse(line.substr(10));
            break;
        }
        auto f = detail::split_csv(line);
        if (f.size() != 7) throw FormatError("sweep report: bad row: " + line);
        SweepCell c;
        c.value = f[0];
        c.ok = f[1] == "1";
        c.result.mean_quotient = detail::parse_double(f[2], "mean_quotient");
        c.result.min_quotient = detail::parse_double(f[3], "min_quotient");
        c.result.max_quotient = detail::parse_double(f[4], "max_quotient");
        c.result.valid_trials = static_cast<std::size_t>(std::stoull(f[5]));
        c.note = f[6];
        r.cells.push_back(std::move(c));
    }
    if (summary.is_null()) throw FormatError("sweep report: missing summary block");
    r.dimension = summary["dimension"].get<std::string>();
    if (summary["cells"].get<std::size_t>() != r.cells.size())
        throw FormatError("sweep report: summary disagrees with rows");
    return r;
}

inline SweepReport parse_sweep_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw EnvironmentError("cannot open report file: " + path);
    return parse_sweep_report(in);
}

}  // namespace rlfuzz
