#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <vector>

#include "rlfuzz/errors.hpp"
#include "rlfuzz/input.hpp"
#include "rlfuzz/rng.hpp"

namespace rlfuzz {

// Linear decay from eps_start to eps_final over decay_steps, constant after.
struct EpsilonSchedule {
    double eps_start = 1.0;
    double eps_final = 0.1;
    std::size_t decay_steps = 500;

    void validate() const {
        if (!(eps_start >= eps_final && eps_start <= 1.0 && eps_final >= 0.0))
            throw ContractViolation("EpsilonSchedule: need 1 >= eps_start >= eps_final >= 0");
        if (decay_steps < 1) throw ContractViolation("EpsilonSchedule: decay_steps must be >= 1");
    }
};

inline double epsilon_at(const EpsilonSchedule& s, std::size_t step) {
    double t = std::min<double>(static_cast<double>(step), static_cast<double>(s.decay_steps)) /
               static_cast<double>(s.decay_steps);
    return s.eps_start + (s.eps_final - s.eps_start) * t;
}

inline std::size_t argmax_index(const std::vector<double>& values) {
    // lowest index wins ties, for reproducibility
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

// Exploration draws uniformly from the non-greedy actions; a config switch
// restores the textbook variant that may re-pick the greedy one.
inline std::size_t select_action(const std::vector<double>& q_values, double epsilon, Rng& rng,
                                 bool explore_includes_greedy = false) {
    if (q_values.empty()) throw ContractViolation("select_action: empty q_values");
    for (double q : q_values)
        if (!std::isfinite(q)) throw ContractViolation("select_action: non-finite Q value");

    std::size_t greedy = argmax_index(q_values);
    if (q_values.size() == 1) return 0;
    if (!rng.chance(epsilon)) return greedy;
    if (explore_includes_greedy) return rng.index(q_values.size());
    std::size_t pick = rng.index(q_values.size() - 1);
    return pick >= greedy ? pick + 1 : pick;
}

inline double q_target(double reward, double gamma, const std::vector<double>& next_q) {
    if (next_q.empty()) throw ContractViolation("q_target: empty next_q");
    return reward + gamma * *std::max_element(next_q.begin(), next_q.end());
}

// The comparison policy: uniform over the action space, state-independent.
inline std::size_t baseline_select(std::size_t action_count, Rng& rng) {
    if (action_count < 1) throw ContractViolation("baseline_select: need at least one action");
    return rng.index(action_count);
}

struct Experience {
    StateVector state;
    std::size_t action = 0;
    double reward = 0.0;
    StateVector next_state;
};

// FIFO ring of past transitions. Ships disabled: replaying samples did not
// beat the memoryless setup, but the mechanism stays available.
class ReplayMemory {
public:
    explicit ReplayMemory(std::size_t capacity = 10000, bool enabled = false)
        : capacity_(capacity), enabled_(enabled) {
        if (capacity_ < 1) throw ContractViolation("ReplayMemory: capacity must be >= 1");
    }

    bool enabled() const { return enabled_; }
    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return buffer_.size(); }
    bool empty() const { return buffer_.empty(); }

    void store(Experience e) {
        if (!std::isfinite(e.reward)) throw ContractViolation("ReplayMemory: non-finite reward");
        buffer_.push_back(std::move(e));
        if (buffer_.size() > capacity_) buffer_.pop_front();
    }

    const Experience& sample(Rng& rng) const {
        if (buffer_.empty()) throw StateError("ReplayMemory: sample from empty memory");
        return buffer_[rng.index(buffer_.size())];
    }

    const Experience& at(std::size_t i) const { return buffer_.at(i); }

private:
    std::size_t capacity_;
    bool enabled_;
    std::deque<Experience> buffer_;
};

}  // namespace rlfuzz
