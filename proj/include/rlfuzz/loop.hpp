#pragma once

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rlfuzz/agent.hpp"
#include "rlfuzz/config.hpp"
#include "rlfuzz/dictionary.hpp"
#include "rlfuzz/mutation.hpp"
#include "rlfuzz/qnet.hpp"
#include "rlfuzz/target.hpp"
#include "rlfuzz/trace.hpp"

namespace rlfuzz {

struct GenerationRecord {
    std::size_t generation = 0;
    std::size_t offset = 0;
    std::size_t action = 0;
    double reward = 0.0;
    double epsilon = 0.0;
    std::optional<double> loss;
    Outcome outcome = Outcome::completed;

    bool operator==(const GenerationRecord&) const = default;
};

struct CrashFinding {
    std::size_t generation = 0;
    Outcome outcome = Outcome::crashed;
    std::string path;  // empty when no out directory was configured
};

enum class AbortKind { none, environment, numeric };

struct RunReport {
    Json config_echo;
    std::vector<GenerationRecord> records;
    std::vector<double> cumulative_rewards;
    std::vector<double> wall_times;     // per generation, for cross-mode scoring
    std::vector<double> block_counts;   // per generation, memoryless coverage
    std::vector<CrashFinding> findings;
    bool aborted = false;
    AbortKind abort_kind = AbortKind::none;
    std::string abort_reason;
    std::string weights_path;
    std::optional<Network> final_network;  // learned runs only; not serialized

    double total_reward() const { return cumulative_rewards.empty() ? 0.0 : cumulative_rewards.back(); }

    // Sum of the most recent half of the per-generation series; the unit the
    // baseline comparison is scored in.
    static double last_half_sum(const std::vector<double>& series) {
        std::size_t from = series.size() / 2;
        double s = 0.0;
        for (std::size_t i = from; i < series.size(); ++i) s += series[i];
        return s;
    }

    double last_half_reward_sum() const {
        std::size_t from = records.size() / 2;
        double s = 0.0;
        for (std::size_t i = from; i < records.size(); ++i) s += records[i].reward;
        return s;
    }
    double last_half_time_sum() const { return last_half_sum(wall_times); }
    double last_half_block_sum() const { return last_half_sum(block_counts); }
};

// Restores the pristine seed and applies the history policy. Mutations act
// on copies, so the seed itself is returned unchanged.
inline std::pair<Input, BlockHistory> reset(const Input& pristine_seed, BlockHistory history,
                                            HistoryPolicy policy) {
    if (policy == HistoryPolicy::reset_each_step) history.reset();
    return {pristine_seed, std::move(history)};
}

namespace detail {

struct OffsetBounds {
    std::size_t lo = 0;
    std::size_t hi = 0;
};

inline OffsetBounds offset_bounds(const LoopConfig& cfg, std::size_t seed_len) {
    std::size_t max_offset = seed_len - cfg.state_width;
    OffsetBounds b{0, max_offset};
    if (cfg.offset_range) {
        b.lo = static_cast<std::size_t>(cfg.offset_range->lo * static_cast<double>(max_offset));
        b.hi = static_cast<std::size_t>(cfg.offset_range->hi * static_cast<double>(max_offset));
        if (b.lo > b.hi) b.hi = b.lo;
    }
    return b;
}

}  // namespace detail

// One full campaign: Initialize, then per generation extract a state,
// select an action, mutate a fresh copy of the seed, execute the target,
// evaluate the reward, update Q (learned policy), and reset.
//
// The Q-target for step t bootstraps on the window observed at step t+1,
// so each learned update happens at the start of the following iteration;
// the final generation has no successor and reports no loss.
inline RunReport run(const LoopConfig& raw_config, Target& target, std::vector<Input> seeds = {},
                     const Network* frozen_net = nullptr) {
    LoopConfig cfg = raw_config.resolved();
    cfg.validate();

    RunReport report;
    report.config_echo = config_to_json(cfg);

    if (seeds.empty()) {
        for (const std::string& path : cfg.seed_paths) seeds.push_back(Input::from_file(path));
    }
    if (seeds.empty()) throw ContractViolation("run: no seed inputs configured");
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (seeds[i].size() < cfg.state_width)
            throw ContractViolation("run: seed #" + std::to_string(i) + " is " +
                                    std::to_string(seeds[i].size()) +
                                    " bytes, shorter than the state width " +
                                    std::to_string(cfg.state_width));
    }

    // health probe: one execution must succeed before the campaign starts
    try {
        target.execute(seeds[0], cfg.target.timeout);
    } catch (const EnvironmentError& e) {
        report.aborted = true;
        report.abort_kind = AbortKind::environment;
        report.abort_reason = std::string("health probe failed: ") + e.what();
        return report;
    }

    TokenDictionary dict = build_dictionary(seeds);
    ActionSet actions{cfg.resolved_actions()};
    if (dict.empty()) {
        for (const ActionSpec& a : cfg.resolved_actions())
            if (a.enabled && a.kind == ActionKind::insert_token) {
                std::fprintf(stderr,
                             "warning: seeds yielded no dictionary tokens; "
                             "insert_token will be a no-op\n");
                break;
            }
    }

    Rng base(cfg.rng_seed);
    Rng offset_rng = base.fork(0);
    Rng policy_rng = base.fork(1);
    Rng mutation_rng = base.fork(2);
    Rng net_rng = base.fork(3);
    Rng replay_rng = base.fork(4);

    std::optional<Network> net;
    if (cfg.policy == PolicyKind::learned) {
        net.emplace(cfg.network_config(), net_rng);
    } else if (cfg.policy == PolicyKind::frozen) {
        net = frozen_net ? *frozen_net : load_weights(cfg.frozen_weights);
        if (net->input_dim() != cfg.state_width || net->output_dim() != actions.size())
            throw ShapeError("run: frozen network is " + std::to_string(net->input_dim()) + "->" +
                             std::to_string(net->output_dim()) + ", config needs " +
                             std::to_string(cfg.state_width) + "->" + std::to_string(actions.size()));
    }

    ReplayMemory replay(cfg.replay_capacity, cfg.replay_enabled);
    BlockHistory history;
    double ratio_scale = 1.0;
    std::optional<std::size_t> pending_offset;  // set by shift actions

    bool have_prev = false;
    StateVector prev_state;
    std::size_t prev_action = 0;
    double prev_training_reward = 0.0;

    std::string findings_dir;
    if (!cfg.out_dir.empty()) {
        findings_dir = (std::filesystem::path(cfg.out_dir) / "findings").string();
        std::filesystem::create_directories(findings_dir);
    }

    double running_total = 0.0;
    for (std::size_t t = 0; t < cfg.generations; ++t) {
        const Input& seed = seeds[t % seeds.size()];
        try {
            detail::OffsetBounds ob = detail::offset_bounds(cfg, seed.size());
            std::size_t offset;
            if (pending_offset) {
                offset = std::min(*pending_offset, seed.size() - cfg.state_width);
                pending_offset.reset();
            } else {
                offset = ob.lo + offset_rng.index(ob.hi - ob.lo + 1);
            }
            StateWindow window = extract_state(seed, offset, cfg.state_width);
            StateVector state = encode_state(window, cfg.encoding);

            double eps = 0.0;
            std::size_t action_index;
            if (cfg.policy == PolicyKind::learned) {
                if (have_prev) {
                    double target_value =
                        q_target(prev_training_reward, cfg.gamma, net->forward(state));
                    double loss = net->train_step(prev_state, prev_action, target_value);
                    report.records[t - 1].loss = loss;
                    if (replay.enabled()) {
                        replay.store({prev_state, prev_action, prev_training_reward, state});
                        const Experience& e = replay.sample(replay_rng);
                        net->train_step(e.state, e.action,
                                        q_target(e.reward, cfg.gamma, net->forward(e.next_state)));
                    }
                }
                eps = epsilon_at(cfg.epsilon, t);
                action_index = select_action(net->forward(state), eps, policy_rng,
                                             cfg.explore_includes_greedy);
            } else if (cfg.policy == PolicyKind::frozen) {
                action_index = argmax_index(net->forward(state));
            } else {
                action_index = baseline_select(actions.size(), policy_rng);
            }

            ActionSpec spec = actions.at(action_index);
            if (spec.kind == ActionKind::bit_flip)
                spec.ratio = std::min(1.0, spec.ratio * ratio_scale);
            MutationResult mutation = apply_action(seed, window, spec, dict, mutation_rng);
            ratio_scale = std::clamp(ratio_scale * mutation.next_ratio_scale, 1.0 / 256.0, 256.0);
            if (mutation.next_offset != window.offset) pending_offset = mutation.next_offset;

            ExecutionTrace trace = target.execute(mutation.output, cfg.target.timeout);

            double base_reward = 0.0;
            switch (cfg.reward.mode) {
                case RewardMode::coverage_r1: base_reward = reward_coverage(trace, history); break;
                case RewardMode::time_r2: base_reward = reward_time(trace); break;
                case RewardMode::combined_r3: base_reward = reward_combined(trace, cfg.reward); break;
            }
            double bonus = cfg.reward.bonus(action_index);
            double recorded_reward = base_reward + bonus;
            // Raw seconds are numerically invisible to the net next to its
            // init scale, so r2 trains on the rescaled time. Records and
            // quotients keep the raw value.
            double training_reward = cfg.reward.mode == RewardMode::time_r2
                                         ? base_reward * cfg.reward.time_scale + bonus
                                         : recorded_reward;

            if (cfg.history == HistoryPolicy::merge) history.merge(trace);

            if (trace.outcome == Outcome::crashed) {
                CrashFinding finding;
                finding.generation = t;
                finding.outcome = trace.outcome;
                if (!findings_dir.empty()) {
                    finding.path = (std::filesystem::path(findings_dir) /
                                    (std::to_string(t) + "_" + outcome_name(trace.outcome) + ".bin"))
                                       .string();
                    mutation.output.write_file(finding.path);
                }
                report.findings.push_back(std::move(finding));
            }

            GenerationRecord rec;
            rec.generation = t;
            rec.offset = offset;
            rec.action = action_index;
            rec.reward = recorded_reward;
            rec.epsilon = eps;
            rec.outcome = trace.outcome;
            report.records.push_back(rec);
            running_total += recorded_reward;
            report.cumulative_rewards.push_back(running_total);
            report.wall_times.push_back(trace.wall_time);
            report.block_counts.push_back(static_cast<double>(trace.blocks.size()));

            if (cfg.policy == PolicyKind::learned) {
                prev_state = std::move(state);
                prev_action = action_index;
                prev_training_reward = training_reward;
                have_prev = true;
            }

            // Reset(): mutations ran on a copy, so restoring the seed is
            // implicit; the history is cleared per policy.
            auto [restored, new_history] = reset(seed, std::move(history), cfg.history);
            history = std::move(new_history);
        } catch (const EnvironmentError& e) {
            report.aborted = true;
            report.abort_kind = AbortKind::environment;
            report.abort_reason = e.what();
            break;
        } catch (const NumericFault& e) {
            report.aborted = true;
            report.abort_kind = AbortKind::numeric;
            report.abort_reason = e.what();
            break;
        }
    }

    if (net && cfg.policy == PolicyKind::learned && !cfg.out_dir.empty() && !report.aborted) {
        report.weights_path = (std::filesystem::path(cfg.out_dir) / "weights.net").string();
        save_weights(*net, report.weights_path);
    }
    if (net && cfg.policy == PolicyKind::learned) report.final_network = std::move(net);
    return report;
}

}  // namespace rlfuzz
