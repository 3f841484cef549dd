#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rlfuzz/agent.hpp"
#include "rlfuzz/errors.hpp"
#include "rlfuzz/input.hpp"
#include "rlfuzz/mutation.hpp"
#include "rlfuzz/qnet.hpp"
#include "rlfuzz/trace.hpp"

namespace rlfuzz {

using Json = nlohmann::ordered_json;

enum class PolicyKind { learned, baseline_random, frozen };

inline const char* policy_kind_name(PolicyKind p) {
    switch (p) {
        case PolicyKind::learned: return "learned";
        case PolicyKind::baseline_random: return "baseline";
        case PolicyKind::frozen: return "frozen";
    }
    return "?";
}

enum class HistoryPolicy { reset_each_step, merge };

inline const char* history_policy_name(HistoryPolicy h) {
    return h == HistoryPolicy::reset_each_step ? "reset_each_step" : "merge";
}

struct TargetConfig {
    std::string kind = "builtin";  // builtin | builtin-virtual | null | command
    std::string command;           // for kind == command, with {input} placeholder
    double timeout = 2.0;
};

// Fraction of the valid offset range, inclusive on both ends. {0, 0.5} is
// the first half of a seed's placements, {0.5, 1} the second.
struct OffsetRange {
    double lo = 0.0;
    double hi = 1.0;
};

struct LoopConfig {
    std::size_t generations = 1000;
    std::size_t state_width = 32;
    std::uint64_t rng_seed = 1;
    double gamma = 0.95;
    PolicyKind policy = PolicyKind::learned;
    std::string frozen_weights;

    RewardConfig reward;
    EpsilonSchedule epsilon{1.0, 0.1, 0};  // decay_steps 0 resolves to generations/2
    HistoryPolicy history = HistoryPolicy::reset_each_step;
    StateEncoding encoding = StateEncoding::normalized01;

    Activation activation = Activation::tanh_fn;
    std::array<std::size_t, 2> hidden_dims = {0, 0};  // 0 resolves from state_width
    double learning_rate = 0.0025;
    double weight_init_max = 0.1;

    std::vector<ActionSpec> actions;  // empty resolves to the default set
    bool explore_includes_greedy = false;
    bool replay_enabled = false;
    std::size_t replay_capacity = 10000;

    TargetConfig target;
    std::vector<std::string> seed_paths;
    std::optional<OffsetRange> offset_range;
    std::string out_dir;

    NetworkConfig network_config() const {
        NetworkConfig n;
        n.input_dim = state_width;
        n.hidden_dims = hidden_dims;
        n.output_dim = ActionSet(resolved_actions()).size();
        n.activation = activation;
        n.learning_rate = learning_rate;
        n.weight_init_max = weight_init_max;
        return n.resolved();
    }

    std::vector<ActionSpec> resolved_actions() const {
        return actions.empty() ? ActionSet::default_set().specs() : actions;
    }

    LoopConfig resolved() const {
        LoopConfig c = *this;
        if (c.epsilon.decay_steps == 0) c.epsilon.decay_steps = std::max<std::size_t>(1, c.generations / 2);
        c.actions = c.resolved_actions();
        c.hidden_dims = c.network_config().hidden_dims;
        return c;
    }

    void validate() const {
        if (generations < 1) throw ContractViolation("config: generations must be >= 1");
        if (state_width < 1) throw ContractViolation("config: state_width must be >= 1");
        if (gamma < 0.0 || gamma >= 1.0) throw ContractViolation("config: gamma must be in [0, 1)");
        epsilon.validate();
        reward.validate();
        NetworkConfig n = network_config();
        n.validate_structure();
        n.validate_hidden_range();
        if (policy == PolicyKind::frozen && frozen_weights.empty())
            throw ContractViolation("config: frozen policy needs a weights path");
        if (offset_range) {
            if (!(offset_range->lo >= 0.0 && offset_range->lo <= offset_range->hi &&
                  offset_range->hi <= 1.0))
                throw ContractViolation("config: offset_range must satisfy 0 <= lo <= hi <= 1");
        }
        if (policy == PolicyKind::learned) {
            for (const ActionSpec& a : resolved_actions()) {
                if (a.enabled && (a.kind == ActionKind::grow_width || a.kind == ActionKind::shrink_width))
                    throw ContractViolation(
                        "config: width-changing actions are incompatible with a learned policy "
                        "(the Q-net input width is fixed); use the baseline policy or disable them");
            }
        }
    }
};

// --- action spec strings: "bit_flip:0.05" or plain "delete_window" ---

inline std::string action_to_string(const ActionSpec& a) {
    std::string s = action_kind_name(a.kind);
    if (a.kind == ActionKind::bit_flip) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", a.ratio);
        s += std::string(":") + buf;
    }
    if (!a.enabled) s += "!off";
    return s;
}

inline ActionSpec action_from_string(std::string s) {
    ActionSpec a;
    a.enabled = true;
    if (s.size() > 4 && s.substr(s.size() - 4) == "!off") {
        a.enabled = false;
        s = s.substr(0, s.size() - 4);
    }
    std::string kind = s;
    auto colon = s.find(':');
    if (colon != std::string::npos) {
        kind = s.substr(0, colon);
        a.ratio = std::stod(s.substr(colon + 1));
    }
    static const std::pair<const char*, ActionKind> kKinds[] = {
        {"bit_flip", ActionKind::bit_flip},
        {"insert_token", ActionKind::insert_token},
        {"shuffle_window", ActionKind::shuffle_window},
        {"shuffle_object_segments", ActionKind::shuffle_object_segments},
        {"copy_window_insert", ActionKind::copy_window_insert},
        {"copy_window_overwrite", ActionKind::copy_window_overwrite},
        {"delete_window", ActionKind::delete_window},
        {"shift_offset_left", ActionKind::shift_offset_left},
        {"shift_offset_right", ActionKind::shift_offset_right},
        {"grow_width", ActionKind::grow_width},
        {"shrink_width", ActionKind::shrink_width},
        {"adjust_ratio_up", ActionKind::adjust_ratio_up},
        {"adjust_ratio_down", ActionKind::adjust_ratio_down},
    };
    for (const auto& [name, k] : kKinds) {
        if (kind == name) {
            a.kind = k;
            return a;
        }
    }
    throw FormatError("config: unknown action \"" + kind + "\"");
}

inline Json config_to_json(const LoopConfig& cfg) {
    Json j;
    j["generations"] = cfg.generations;
    j["state_width"] = cfg.state_width;
    j["rng_seed"] = cfg.rng_seed;
    j["gamma"] = cfg.gamma;
    j["policy"] = policy_kind_name(cfg.policy);
    j["frozen_weights"] = cfg.frozen_weights;
    j["reward"] = Json{{"mode", reward_mode_name(cfg.reward.mode)},
                       {"time_scale", cfg.reward.time_scale},
                       {"action_bonus", cfg.reward.action_bonus}};
    j["epsilon"] = Json{{"start", cfg.epsilon.eps_start},
                        {"final", cfg.epsilon.eps_final},
                        {"decay_steps", cfg.epsilon.decay_steps}};
    j["history"] = history_policy_name(cfg.history);
    j["encoding"] = cfg.encoding == StateEncoding::normalized01 ? "normalized01" : "raw_byte";
    j["network"] = Json{{"activation", activation_name(cfg.activation)},
                        {"hidden", cfg.hidden_dims},
                        {"learning_rate", cfg.learning_rate},
                        {"weight_init_max", cfg.weight_init_max}};
    Json acts = Json::array();
    for (const ActionSpec& a : cfg.actions) acts.push_back(action_to_string(a));
    j["actions"] = acts;
    j["explore_includes_greedy"] = cfg.explore_includes_greedy;
    j["replay"] = Json{{"enabled", cfg.replay_enabled}, {"capacity", cfg.replay_capacity}};
    j["target"] = Json{{"kind", cfg.target.kind},
                       {"command", cfg.target.command},
                       {"timeout", cfg.target.timeout}};
    j["seeds"] = cfg.seed_paths;
    if (cfg.offset_range)
        j["offset_range"] = Json{{"lo", cfg.offset_range->lo}, {"hi", cfg.offset_range->hi}};
    else
        j["offset_range"] = nullptr;
    j["out"] = cfg.out_dir;
    return j;
}

inline LoopConfig config_from_json(const Json& j) {
    LoopConfig cfg;
    try {
        if (j.contains("generations")) cfg.generations = j["generations"].get<std::size_t>();
        if (j.contains("state_width")) cfg.state_width = j["state_width"].get<std::size_t>();
        if (j.contains("rng_seed")) cfg.rng_seed = j["rng_seed"].get<std::uint64_t>();
        if (j.contains("gamma")) cfg.gamma = j["gamma"].get<double>();
        if (j.contains("policy")) {
            std::string p = j["policy"].get<std::string>();
            if (p == "learned")
                cfg.policy = PolicyKind::learned;
            else if (p == "baseline")
                cfg.policy = PolicyKind::baseline_random;
            else if (p == "frozen")
                cfg.policy = PolicyKind::frozen;
            else
                throw FormatError("config: unknown policy \"" + p + "\"");
        }
        if (j.contains("frozen_weights")) cfg.frozen_weights = j["frozen_weights"].get<std::string>();
        if (j.contains("reward")) {
            const Json& r = j["reward"];
            if (r.contains("mode")) cfg.reward.mode = reward_mode_from_name(r["mode"].get<std::string>());
            if (r.contains("time_scale")) cfg.reward.time_scale = r["time_scale"].get<double>();
            if (r.contains("action_bonus"))
                cfg.reward.action_bonus = r["action_bonus"].get<std::vector<double>>();
        }
        if (j.contains("epsilon")) {
            const Json& e = j["epsilon"];
            if (e.contains("start")) cfg.epsilon.eps_start = e["start"].get<double>();
            if (e.contains("final")) cfg.epsilon.eps_final = e["final"].get<double>();
            if (e.contains("decay_steps")) cfg.epsilon.decay_steps = e["decay_steps"].get<std::size_t>();
        }
        if (j.contains("history")) {
            std::string h = j["history"].get<std::string>();
            if (h == "reset_each_step")
                cfg.history = HistoryPolicy::reset_each_step;
            else if (h == "merge")
                cfg.history = HistoryPolicy::merge;
            else
                throw FormatError("config: unknown history policy \"" + h + "\"");
        }
        if (j.contains("encoding")) {
            std::string e = j["encoding"].get<std::string>();
            if (e == "normalized01")
                cfg.encoding = StateEncoding::normalized01;
            else if (e == "raw_byte")
                cfg.encoding = StateEncoding::raw_byte;
            else
                throw FormatError("config: unknown encoding \"" + e + "\"");
        }
        if (j.contains("network")) {
            const Json& n = j["network"];
            if (n.contains("activation"))
                cfg.activation = activation_from_name(n["activation"].get<std::string>());
            if (n.contains("hidden")) {
                auto h = n["hidden"].get<std::vector<std::size_t>>();
                if (h.size() != 2) throw FormatError("config: network.hidden needs two sizes");
                cfg.hidden_dims = {h[0], h[1]};
            }
            if (n.contains("learning_rate")) cfg.learning_rate = n["learning_rate"].get<double>();
            if (n.contains("weight_init_max"))
                cfg.weight_init_max = n["weight_init_max"].get<double>();
        }
        if (j.contains("actions")) {
            cfg.actions.clear();
            for (const Json& a : j["actions"]) cfg.actions.push_back(action_from_string(a.get<std::string>()));
        }
        if (j.contains("explore_includes_greedy"))
            cfg.explore_includes_greedy = j["explore_includes_greedy"].get<bool>();
        if (j.contains("replay")) {
            const Json& r = j["replay"];
            if (r.contains("enabled")) cfg.replay_enabled = r["enabled"].get<bool>();
            if (r.contains("capacity")) cfg.replay_capacity = r["capacity"].get<std::size_t>();
        }
        if (j.contains("target")) {
            const Json& t = j["target"];
            if (t.contains("kind")) cfg.target.kind = t["kind"].get<std::string>();
            if (t.contains("command")) cfg.target.command = t["command"].get<std::string>();
            if (t.contains("timeout")) cfg.target.timeout = t["timeout"].get<double>();
        }
        if (j.contains("seeds")) cfg.seed_paths = j["seeds"].get<std::vector<std::string>>();
        if (j.contains("offset_range") && !j["offset_range"].is_null()) {
            OffsetRange r;
            r.lo = j["offset_range"]["lo"].get<double>();
            r.hi = j["offset_range"]["hi"].get<double>();
            cfg.offset_range = r;
        }
        if (j.contains("out")) cfg.out_dir = j["out"].get<std::string>();
    } catch (const Json::exception& e) {
        throw FormatError(std::string("config: ") + e.what());
    }
    return cfg;
}

inline LoopConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw EnvironmentError("cannot open config file: " + path);
    Json j;
    try {
        in >> j;
    } catch (const Json::exception& e) {
        throw FormatError("config file " + path + ": " + e.what());
    }
    return config_from_json(j);
}

}  // namespace rlfuzz
