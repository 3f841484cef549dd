#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "rlfuzz/errors.hpp"

namespace rlfuzz {

enum class Outcome { completed, rejected_early, crashed, timed_out };

inline const char* outcome_name(Outcome o) {
    switch (o) {
        case Outcome::completed: return "completed";
        case Outcome::rejected_early: return "rejected_early";
        case Outcome::crashed: return "crashed";
        case Outcome::timed_out: return "timed_out";
    }
    return "?";
}

inline Outcome outcome_from_name(const std::string& s) {
    if (s == "completed") return Outcome::completed;
    if (s == "rejected_early") return Outcome::rejected_early;
    if (s == "crashed") return Outcome::crashed;
    if (s == "timed_out") return Outcome::timed_out;
    throw FormatError("unknown outcome: " + s);
}

using BlockSet = std::set<std::uint32_t>;

// What one target execution produced: the distinct basic blocks hit and the
// wall-clock seconds spent in the run itself.
struct ExecutionTrace {
    BlockSet blocks;
    double wall_time = 0.0;
    Outcome outcome = Outcome::completed;
};

// Blocks seen by prior executions. The loop decides when to merge or reset.
struct BlockHistory {
    BlockSet seen;

    void merge(const ExecutionTrace& trace) { seen.insert(trace.blocks.begin(), trace.blocks.end()); }
    void reset() { seen.clear(); }
    bool empty() const { return seen.empty(); }
};

enum class RewardMode { coverage_r1, time_r2, combined_r3 };

inline const char* reward_mode_name(RewardMode m) {
    switch (m) {
        case RewardMode::coverage_r1: return "r1";
        case RewardMode::time_r2: return "r2";
        case RewardMode::combined_r3: return "r3";
    }
    return "?";
}

inline RewardMode reward_mode_from_name(const std::string& s) {
    if (s == "r1") return RewardMode::coverage_r1;
    if (s == "r2") return RewardMode::time_r2;
    if (s == "r3") return RewardMode::combined_r3;
    throw FormatError("unknown reward mode: " + s + " (expected r1|r2|r3)");
}

struct RewardConfig {
    RewardMode mode = RewardMode::time_r2;
    double time_scale = 1e6;            // seconds -> combined-reward units
    std::vector<double> action_bonus;   // G(a); empty means 0 for every action

    void validate() const {
        if (time_scale <= 0.0) throw ContractViolation("RewardConfig: time_scale must be > 0");
    }

    double bonus(std::size_t action_index) const {
        if (action_bonus.empty()) return 0.0;
        return action_bonus.at(action_index);
    }
};

// Count of blocks in this trace that the history has not seen. Does not
// mutate the history.
inline double reward_coverage(const ExecutionTrace& trace, const BlockHistory& history) {
    std::size_t fresh = 0;
    for (std::uint32_t b : trace.blocks)
        if (!history.seen.count(b)) ++fresh;
    return static_cast<double>(fresh);
}

inline double reward_time(const ExecutionTrace& trace) { return trace.wall_time; }

// Memoryless coverage plus rescaled execution time.
inline double reward_combined(const ExecutionTrace& trace, const RewardConfig& cfg) {
    return static_cast<double>(trace.blocks.size()) + cfg.time_scale * trace.wall_time;
}

// r(x, a) = E(x) + G(a) for the configured mode.
inline double compute_reward(const ExecutionTrace& trace, const BlockHistory& history,
                             std::size_t action_index, const RewardConfig& cfg) {
    double base = 0.0;
    switch (cfg.mode) {
        case RewardMode::coverage_r1: base = reward_coverage(trace, history); break;
        case RewardMode::time_r2: base = reward_time(trace); break;
        case RewardMode::combined_r3: base = reward_combined(trace, cfg); break;
    }
    return base + cfg.bonus(action_index);
}

}  // namespace rlfuzz
