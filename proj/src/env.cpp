#include "got/env.hpp"

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

namespace got {

int64_t action_count(const ScenarioConfig& cfg) {
    const int64_t limit = std::numeric_limits<int32_t>::max();
    int64_t count = 1;
    for (int i = 0; i < cfg.n_loops; ++i) {
        count *= cfg.power_levels + 1;
        if (count > limit) throw std::overflow_error("action space too large");
    }
    for (int i = 0; i < cfg.n_loops; ++i) {
        count *= cfg.n_actuations;
        if (count > limit) throw std::overflow_error("action space too large");
    }
    return count;
}

int64_t encode_action(const Action& a, const ScenarioConfig& cfg) {
    if (static_cast<int>(a.power_levels.size()) != cfg.n_loops ||
        static_cast<int>(a.actuations.size()) != cfg.n_loops)
        throw std::invalid_argument("action has wrong arity");
    int64_t idx = 0;
    for (int i = 0; i < cfg.n_loops; ++i) {
        if (a.power_levels[i] < 0 || a.power_levels[i] > cfg.power_levels)
            throw std::out_of_range("power level out of range");
        idx = idx * (cfg.power_levels + 1) + a.power_levels[i];
    }
    for (int i = 0; i < cfg.n_loops; ++i) {
        if (a.actuations[i] < 0 || a.actuations[i] >= cfg.n_actuations)
            throw std::out_of_range("actuation out of range");
        idx = idx * cfg.n_actuations + a.actuations[i];
    }
    return idx;
}

Action decode_action(int64_t index, const ScenarioConfig& cfg) {
    if (index < 0 || index >= action_count(cfg))
        throw std::out_of_range("action index out of range");
    Action a;
    a.power_levels.assign(cfg.n_loops, 0);
    a.actuations.assign(cfg.n_loops, 0);
    for (int i = cfg.n_loops - 1; i >= 0; --i) {
        a.actuations[i] = static_cast<int>(index % cfg.n_actuations);
        index /= cfg.n_actuations;
    }
    for (int i = cfg.n_loops - 1; i >= 0; --i) {
        a.power_levels[i] = static_cast<int>(index % (cfg.power_levels + 1));
        index /= cfg.power_levels + 1;
    }
    return a;
}

double got_cost(int state, int context, double power, int actuation, const ScenarioConfig& cfg) {
    return cfg.c1(state, context) + cfg.alpha * power + cfg.beta * cfg.c3(actuation);
}

Environment::Environment(const ScenarioConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {
    forced_error_.assign(cfg_.n_loops, std::numeric_limits<double>::quiet_NaN());
    reset();
}

Observation Environment::reset(uint64_t seed) {
    rng_ = Rng(seed);
    return reset();
}

Observation Environment::reset() {
    const int n = cfg_.n_loops;
    state_.x.resize(n);
    state_.x_hat.resize(n);
    state_.aoi.assign(n, 1);
    state_.action_log.assign(n, {});
    for (int i = 0; i < n; ++i) {
        state_.x[i] = static_cast<int>(rng_.uniform_int(cfg_.n_states));
        state_.x_hat[i] = state_.x[i];
        // seed the log with actuation 0 so a length-1 history exists at t = 0
        state_.action_log[i].push_back(0);
    }
    state_.context = static_cast<int>(rng_.uniform_int(cfg_.n_contexts));
    state_.t = 0;
    return observe();
}

Observation Environment::observe() const {
    return Observation{state_.x_hat, state_.aoi, state_.context};
}

StepResult Environment::step(const Action& a) {
    const int n = cfg_.n_loops;
    if (static_cast<int>(a.power_levels.size()) != n ||
        static_cast<int>(a.actuations.size()) != n)
        throw std::invalid_argument("action has wrong arity");
    if (state_.t >= cfg_.episode_len) throw std::logic_error("episode already finished");
    if (cfg_.access_mode == AccessMode::kOma) {
        int transmitters = 0;
        for (int p : a.power_levels) transmitters += p > 0;
        if (transmitters > 1) throw std::invalid_argument("OMA allows at most one transmitter");
    }

    StepResult res;

    // (a) reward from the pre-transition state; C2 consumes the power fraction
    res.per_loop_got.resize(n);
    for (int i = 0; i < n; ++i) {
        const double frac = static_cast<double>(a.power_levels[i]) / cfg_.power_levels;
        res.per_loop_got[i] = got_cost(state_.x[i], state_.context, frac, a.actuations[i], cfg_);
    }
    res.reward = 0.0;
    for (double g : res.per_loop_got) res.reward -= g;

    // (b) uplink: the packet carries the current X
    std::vector<double> watts(n);
    for (int i = 0; i < n; ++i) watts[i] = power_of_level(a.power_levels[i], cfg_);
    const ChannelDraw draw = sample_fading(rng_, cfg_);
    res.decode = slot_decode(watts, draw, cfg_, rng_, &forced_error_);
    for (int i = 0; i < n; ++i) {
        if (res.decode.success_mask[i]) {
            state_.x_hat[i] = state_.x[i];
            state_.aoi[i] = 1;
        } else {
            state_.aoi[i] = std::min(state_.aoi[i] + 1, cfg_.aoi_cap);
        }
    }

    // (c) source and context transitions
    for (int i = 0; i < n; ++i) {
        const auto& m = cfg_.source_transitions[i][a.actuations[i]];
        state_.x[i] = rng_.sample_discrete(
            std::span<const double>(m.data() + state_.x[i] * cfg_.n_states, cfg_.n_states));
    }
    state_.context = rng_.sample_discrete(std::span<const double>(
        cfg_.context_transitions.data() + state_.context * cfg_.n_contexts, cfg_.n_contexts));

    // (d) bookkeeping
    for (int i = 0; i < n; ++i) {
        state_.action_log[i].push_back(a.actuations[i]);
        while (static_cast<int>(state_.action_log[i].size()) > cfg_.aoi_cap)
            state_.action_log[i].pop_front();
    }
    state_.t += 1;
    res.done = state_.t >= cfg_.episode_len;
    res.observation = observe();
    return res;
}

}  // namespace got
