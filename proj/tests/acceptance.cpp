// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails. Criterion 7 calibrates timing stability first; when the
// machine is too noisy the r2 arm of criterion 4 is waived with a warning
// instead of producing a meaningless verdict.
//
// Usage: acceptance [seed-file]
// Without an argument (or with a missing file) the bundled document is
// regenerated in memory with the same generator and parameters.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "rlfuzz/rlfuzz.hpp"

using namespace rlfuzz;

namespace {

struct Criterion {
    int number;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

std::vector<Criterion> g_results;

template <typename F>
void run_criterion(int number, const std::string& name, F&& body) {
    Criterion c;
    c.number = number;
    c.name = name;
    auto t0 = std::chrono::steady_clock::now();
    try {
        c.pass = body(c.detail);
    } catch (const std::exception& e) {
        c.pass = false;
        c.detail = std::string("exception: ") + e.what();
    }
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %d. %s (%.2fs) %s\n", c.pass ? "PASS" : "FAIL", c.number, c.name.c_str(),
                c.seconds, c.detail.c_str());
    std::fflush(stdout);
    g_results.push_back(std::move(c));
}

constexpr Activation kAllActivations[] = {Activation::tanh_fn, Activation::sigmoid,
                                          Activation::elu,     Activation::softplus,
                                          Activation::softsign, Activation::relu};

StateVector random_state(Rng& rng, std::size_t n) {
    StateVector s(n);
    for (double& x : s) x = rng.real01();
    return s;
}

double fd_loss_gradient(Network& net, std::size_t layer, bool bias_param, std::size_t index,
                        const StateVector& state, std::size_t action, double target) {
    const double eps = 1e-5;
    auto& param = bias_param ? net.layers()[layer].bias : net.layers()[layer].weights;
    double saved = param[index];
    param[index] = saved + eps;
    double q_up = net.forward(state)[action];
    param[index] = saved - eps;
    double q_down = net.forward(state)[action];
    param[index] = saved;
    double up = (target - q_up) * (target - q_up);
    double down = (target - q_down) * (target - q_down);
    return (up - down) / (2.0 * eps);
}

// --- criterion bodies ----------------------------------------------------

bool criterion_gradients(std::string& detail) {
    Rng rng(20240817);
    double worst = 0.0;
    int nets = 0;
    for (int rep = 0; rep < 20; ++rep) {
        Activation act = kAllActivations[rep % 6];
        NetworkConfig cfg;
        cfg.input_dim = 2 + rng.index(7);                          // <= 8
        cfg.hidden_dims = {2 + rng.index(15), 2 + rng.index(15)};  // <= 16
        cfg.output_dim = 1 + rng.index(4);                         // <= 4
        cfg.activation = act;
        Network net(cfg, rng);
        StateVector state = random_state(rng, cfg.input_dim);
        std::size_t action = rng.index(cfg.output_dim);
        double target = rng.real01() * 2.0 - 0.5;
        Gradients g = net.compute_gradients(state, action, target);
        for (std::size_t l = 0; l < 3; ++l) {
            for (std::size_t k = 0; k < g.weights[l].size(); ++k) {
                double fd = fd_loss_gradient(net, l, false, k, state, action, target);
                double denom = std::max({std::abs(fd), std::abs(g.weights[l][k]), 1e-8});
                worst = std::max(worst, std::abs(fd - g.weights[l][k]) / denom);
            }
            for (std::size_t k = 0; k < g.bias[l].size(); ++k) {
                double fd = fd_loss_gradient(net, l, true, k, state, action, target);
                double denom = std::max({std::abs(fd), std::abs(g.bias[l][k]), 1e-8});
                worst = std::max(worst, std::abs(fd - g.bias[l][k]) / denom);
            }
        }
        ++nets;
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "%d nets, all activations, worst rel err %.3g (limit 1e-4)",
                  nets, worst);
    detail = buf;
    return worst < 1e-4;
}

bool criterion_masked_loss(std::string& detail) {
    Rng rng(99);
    std::size_t checked = 0;
    for (Activation act : kAllActivations) {
        NetworkConfig cfg;
        cfg.input_dim = 6;
        cfg.hidden_dims = {12, 12};
        cfg.output_dim = 5;
        cfg.activation = act;
        Network net(cfg, rng);
        StateVector state = random_state(rng, 6);
        for (std::size_t action = 0; action < 5; ++action) {
            Gradients g = net.compute_gradients(state, action, 1.25);
            const Layer& out = net.layers()[2];
            for (std::size_t i = 0; i < out.fan_in; ++i)
                for (std::size_t j = 0; j < out.fan_out; ++j)
                    if (j != action && g.weights[2][i * out.fan_out + j] != 0.0) {
                        detail = "nonzero gradient on a non-selected output weight";
                        return false;
                    }
            for (std::size_t j = 0; j < out.fan_out; ++j)
                if (j != action && g.bias[2][j] != 0.0) {
                    detail = "nonzero gradient on a non-selected output bias";
                    return false;
                }
            ++checked;
        }
    }
    detail = std::to_string(checked) + " (activation, action) cases, all exactly zero";
    return true;
}

bool criterion_bandit(const std::vector<Input>& seeds, std::string& detail) {
    NullTarget target;
    LoopConfig cfg;
    cfg.generations = 1000;
    cfg.rng_seed = 20240101;
    cfg.reward.mode = RewardMode::coverage_r1;  // null target pays 0 coverage
    cfg.reward.action_bonus = {0, 0, 0, 0, 0, 1.0, 0, 0};
    cfg.target.kind = "null";

    RunReport report = run(cfg, target, seeds);
    if (report.aborted) {
        detail = "learned run aborted: " + report.abort_reason;
        return false;
    }
    const Input& seed = seeds[0];
    Rng probe_rng(4242);
    int paying = 0;
    for (int i = 0; i < 100; ++i) {
        std::size_t off = random_offset(probe_rng, seed.size(), cfg.state_width);
        StateVector s = encode_state(extract_state(seed, off, cfg.state_width));
        if (argmax_index(report.final_network->forward(s)) == 5) ++paying;
    }

    ImprovementReport cmp = compare_baseline(cfg, target, 3, seeds);
    char buf[128];
    std::snprintf(buf, sizeof buf, "greedy=%d/100 (need >=95), quotient %.2f (need >=2)", paying,
                  cmp.mean_quotient);
    detail = buf;
    return paying >= 95 && cmp.mean_quotient >= 2.0;
}

bool criterion_direction(const std::vector<Input>& seeds, bool r2_waived, std::string& detail) {
    BuiltinParserTarget target;
    LoopConfig cfg;
    cfg.generations = 1000;
    cfg.rng_seed = 7;
    cfg.target.kind = "builtin";

    bool ok = true;
    std::string parts;
    for (RewardMode mode : {RewardMode::coverage_r1, RewardMode::time_r2, RewardMode::combined_r3}) {
        if (mode == RewardMode::time_r2 && r2_waived) {
            parts += "r2 waived (unstable timing); ";
            continue;
        }
        cfg.reward.mode = mode;
        ImprovementReport rep = compare_baseline(cfg, target, 5, seeds);
        char buf[96];
        std::snprintf(buf, sizeof buf, "%s mean=%.4f [%.4f, %.4f]; ", reward_mode_name(mode),
                      rep.mean_quotient, rep.min_quotient, rep.max_quotient);
        parts += buf;
        if (!(rep.valid_trials == 5 && rep.mean_quotient > 1.0)) ok = false;
    }
    detail = parts + "(each mean must exceed 1.0)";
    return ok;
}

bool criterion_generalization(const std::vector<Input>& seeds, std::string& detail) {
    BuiltinParserTarget target;
    LoopConfig cfg;
    cfg.generations = 1000;
    cfg.rng_seed = 13;
    cfg.reward.mode = RewardMode::time_r2;
    cfg.target.kind = "builtin";
    ImprovementReport rep = generalization_run(cfg, target, 5, seeds);
    int above = 0;
    for (const TrialResult& t : rep.trials)
        if (t.valid && t.quotient > 1.0) ++above;
    char buf[128];
    std::snprintf(buf, sizeof buf, "frozen second-half quotient > 1 in %d/5 trials (need >=3), mean %.4f",
                  above, rep.mean_quotient);
    detail = buf;
    return above >= 3;
}

bool criterion_correlation(const std::vector<Input>& seeds, std::string& detail) {
    BuiltinParserTarget target;
    LoopConfig cfg;
    cfg.rng_seed = 29;
    cfg.target.kind = "builtin";
    CorrelationReport rep = reward_correlation(cfg, target, 500, seeds);
    char buf[96];
    std::snprintf(buf, sizeof buf, "pearson(coverage, time) = %.4f over 500 mutations (need > 0)",
                  rep.coefficient);
    detail = buf;
    return rep.coefficient > 0.0;
}

bool criterion_timing(const std::vector<Input>& seeds, TimingCalibration& cal, std::string& detail) {
    BuiltinParserTarget target;
    cal = calibrate_timing(target, seeds[0], 200);
    char buf[160];
    std::snprintf(buf, sizeof buf, "mean %.3gs, var/mean^2 = %.3g (stable needs <= 1e-2)%s", cal.mean,
                  cal.ratio, cal.stable ? "" : " -- WARNING: unstable timing, r2 acceptance waived");
    detail = buf;
    return true;  // the criterion mandates the calibration and the waiver, not stability itself
}

bool property_mutation_laws(const std::vector<Input>& seeds, std::string& err) {
    Rng rng(404);
    TokenDictionary dict = build_dictionary(seeds);
    for (int trial = 0; trial < 150; ++trial) {
        const Input& base = seeds[trial % seeds.size()];
        std::size_t width = 1 + rng.index(32);
        std::size_t offset = rng.index(base.size() - width + 1);
        StateWindow w = extract_state(base, offset, width);
        for (ActionKind kind :
             {ActionKind::bit_flip, ActionKind::shuffle_window, ActionKind::shuffle_object_segments,
              ActionKind::copy_window_insert, ActionKind::copy_window_overwrite,
              ActionKind::delete_window, ActionKind::insert_token}) {
            ActionSpec spec{kind, 0.02, true};
            Rng m1(trial * 31 + static_cast<int>(kind)), m2(trial * 31 + static_cast<int>(kind));
            MutationResult a = apply_action(base, w, spec, dict, m1);
            MutationResult b = apply_action(base, w, spec, dict, m2);
            if (!(a.output == b.output)) {
                err = "determinism violated for " + spec.name();
                return false;
            }
            std::size_t n = base.size();
            std::size_t got = a.output.size();
            bool len_ok = true;
            switch (kind) {
                case ActionKind::delete_window: len_ok = got == n - width; break;
                case ActionKind::copy_window_insert: len_ok = got == n + width; break;
                case ActionKind::insert_token: len_ok = got >= n; break;
                default: len_ok = got == n;
            }
            if (!len_ok) {
                err = "length law violated for " + spec.name();
                return false;
            }
            if (kind == ActionKind::bit_flip || kind == ActionKind::shuffle_window) {
                for (std::size_t i = 0; i < offset; ++i)
                    if (a.output.at(i) != base.at(i)) {
                        err = "locality violated before the window for " + spec.name();
                        return false;
                    }
                for (std::size_t i = offset + width; i < n; ++i)
                    if (a.output.at(i) != base.at(i)) {
                        err = "locality violated after the window for " + spec.name();
                        return false;
                    }
            }
            if (kind == ActionKind::delete_window) {
                for (std::size_t i = 0; i < offset; ++i)
                    if (a.output.at(i) != base.at(i)) {
                        err = "delete_window touched the prefix";
                        return false;
                    }
                for (std::size_t i = offset + width; i < n; ++i)
                    if (a.output.at(i - width) != base.at(i)) {
                        err = "delete_window touched the suffix";
                        return false;
                    }
            }
        }
    }
    return true;
}

bool property_coverage_laws(const std::vector<Input>& seeds, std::string& err) {
    BuiltinParserTarget target;
    TokenDictionary dict = build_dictionary(seeds);
    ActionSet actions = ActionSet::default_set();
    Rng rng(505);
    for (int i = 0; i < 50; ++i) {
        const Input& base = seeds[i % seeds.size()];
        std::size_t offset = random_offset(rng, base.size(), 32);
        StateWindow w = extract_state(base, offset, 32);
        MutationResult m = apply_action(base, w, actions.at(rng.index(actions.size())), dict, rng);
        ExecutionTrace t = target.execute(m.output, 2.0);
        if (reward_coverage(t, BlockHistory{}) != static_cast<double>(t.blocks.size())) {
            err = "memoryless law E1(t, {}) = |blocks| violated";
            return false;
        }
        BlockHistory small, big;
        for (int k = 0; k < 8; ++k) small.seen.insert(static_cast<std::uint32_t>(rng.index(80)));
        big.seen = small.seen;
        for (int k = 0; k < 8; ++k) big.seen.insert(static_cast<std::uint32_t>(rng.index(80)));
        if (reward_coverage(t, small) < reward_coverage(t, big)) {
            err = "antitone history law violated";
            return false;
        }
    }
    return true;
}

bool property_agent_laws(std::string& err) {
    EpsilonSchedule s{1.0, 0.1, 500};
    if (epsilon_at(s, 0) != 1.0 || std::abs(epsilon_at(s, 250) - 0.55) > 1e-12 ||
        std::abs(epsilon_at(s, 500) - 0.1) > 1e-12 || std::abs(epsilon_at(s, 10000) - 0.1) > 1e-12) {
        err = "epsilon schedule endpoints wrong";
        return false;
    }
    Rng rng(606);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> q(2 + rng.index(8));
        for (double& v : q) v = rng.real01() * 8.0 - 4.0;
        double a = 0.05 + rng.real01() * 5.0;
        double b = rng.real01() * 10.0 - 5.0;
        std::vector<double> tq(q.size());
        for (std::size_t i = 0; i < q.size(); ++i) tq[i] = a * q[i] + b;
        Rng r1(trial), r2(trial);
        if (select_action(q, 0.0, r1) != select_action(tq, 0.0, r2)) {
            err = "argmax not affine invariant";
            return false;
        }
    }
    return true;
}

bool property_replay(const std::vector<Input>& seeds, std::string& err) {
    LoopConfig cfg;
    cfg.generations = 150;
    cfg.rng_seed = 1234;
    cfg.target.kind = "builtin";
    cfg.reward.mode = RewardMode::coverage_r1;
    BuiltinParserTarget target;
    RunReport a = run(cfg, target, seeds);
    RunReport b = run(cfg, target, seeds);
    if (!(a.records == b.records && a.cumulative_rewards == b.cumulative_rewards &&
          a.block_counts == b.block_counts)) {
        err = "real-clock coverage replay differs";
        return false;
    }
    cfg.target.kind = "builtin-virtual";
    cfg.reward.mode = RewardMode::time_r2;
    BuiltinParserTarget vtarget(true);
    RunReport va = run(cfg, vtarget, seeds);
    RunReport vb = run(cfg, vtarget, seeds);
    if (!reports_equal(va, vb)) {
        err = "virtual-clock replay not bit-exact";
        return false;
    }
    return true;
}

bool criterion_properties(const std::vector<Input>& seeds, std::string& detail) {
    std::string err;
    if (!property_mutation_laws(seeds, err) || !property_coverage_laws(seeds, err) ||
        !property_agent_laws(err) || !property_replay(seeds, err)) {
        detail = err;
        return false;
    }
    detail = "mutation laws, coverage laws, agent laws, replay determinism";
    return true;
}

bool criterion_persistence(std::string& detail) {
    Rng rng(777);
    NetworkConfig cfg;
    cfg.input_dim = 32;
    cfg.output_dim = 8;
    Network net(cfg, rng);
    StateVector s = random_state(rng, 32);
    for (int i = 0; i < 40; ++i) net.train_step(s, i % 8, 0.21 * i);

    std::string path = "acceptance_weights.net";
    save_weights(net, path);
    Network back = load_weights(path);
    std::remove(path.c_str());

    Rng probe(888);
    for (int i = 0; i < 100; ++i) {
        StateVector x = random_state(probe, 32);
        auto qa = net.forward(x);
        auto qb = back.forward(x);
        for (std::size_t k = 0; k < qa.size(); ++k)
            if (qa[k] != qb[k]) {
                detail = "forward outputs differ after the round trip";
                return false;
            }
    }
    detail = "bit-exact forward outputs on 100 random states";
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<Input> seeds;
    std::string seed_note;
    if (argc > 1 && std::filesystem::exists(argv[1])) {
        seeds.push_back(Input::from_file(argv[1]));
        seed_note = argv[1];
    } else {
        seeds.push_back(Input(make_sample_document()));
        seed_note = "regenerated in memory (default generator parameters)";
    }
    std::printf("acceptance suite -- seed: %s (%zu bytes)\n", seed_note.c_str(), seeds[0].size());
    std::fflush(stdout);

    TimingCalibration cal;
    run_criterion(1, "gradient correctness vs central finite differences",
                  [&](std::string& d) { return criterion_gradients(d); });
    run_criterion(2, "masked loss: zero gradient for non-selected actions",
                  [&](std::string& d) { return criterion_masked_loss(d); });
    run_criterion(3, "contextual-bandit convergence on the rigged target",
                  [&](std::string& d) { return criterion_bandit(seeds, d); });
    run_criterion(7, "timing stability calibration",
                  [&](std::string& d) { return criterion_timing(seeds, cal, d); });
    run_criterion(4, "direction of effect: r1/r2/r3 beat the baseline",
                  [&](std::string& d) { return criterion_direction(seeds, !cal.stable, d); });
    run_criterion(5, "state generalization to unseen offsets",
                  [&](std::string& d) { return criterion_generalization(seeds, d); });
    run_criterion(6, "coverage/time reward correlation sign",
                  [&](std::string& d) { return criterion_correlation(seeds, d); });
    run_criterion(8, "property suites",
                  [&](std::string& d) { return criterion_properties(seeds, d); });
    run_criterion(9, "weight persistence round trip",
                  [&](std::string& d) { return criterion_persistence(d); });

    int failed = 0;
    for (const Criterion& c : g_results)
        if (!c.pass) ++failed;
    std::printf("%zu criteria, %d failed\n", g_results.size(), failed);
    return failed == 0 ? 0 : 1;
}
