#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "got/phy.hpp"
#include "got/rng.hpp"
#include "got/scenario.hpp"

namespace got {

// Hidden global state of the network. action_log keeps the last aoi_cap
// actuations per loop (newest at the back) so beliefs can be rebuilt from the
// observation alone.
struct EnvState {
    std::vector<int> x;      // true source states
    std::vector<int> x_hat;  // last received states
    std::vector<int> aoi;    // age of the received states, in [1, aoi_cap]
    int context = 0;
    int t = 0;
    std::vector<std::deque<int>> action_log;
};

// The controller-visible slice of EnvState.
struct Observation {
    std::vector<int> x_hat;
    std::vector<int> aoi;
    int context = 0;
};

struct Action {
    std::vector<int> power_levels;  // 0..M per loop
    std::vector<int> actuations;    // 0..|C|-1 per loop
};

struct StepResult {
    Observation observation;
    double reward = 0.0;
    std::vector<double> per_loop_got;
    DecodeOutcome decode;
    bool done = false;
};

// Flat action index space: (M+1)^N * |C|^N. Digits are loop-major with the
// power digits first (most significant), then the actuation digits, so index 0
// is "all silent, all first actuation".
int64_t action_count(const ScenarioConfig& cfg);
int64_t encode_action(const Action& a, const ScenarioConfig& cfg);
Action decode_action(int64_t index, const ScenarioConfig& cfg);

// Per-loop goal cost: C1(x, phi) + alpha*power + beta*C3(actuation).
// `power` is whatever the transmission cost C2 consumes; the environment feeds
// it the power fraction level/M of the acting loop.
double got_cost(int state, int context, double power, int actuation, const ScenarioConfig& cfg);

// Slot semantics, in order: reward from the pre-transition state; uplink decode
// (success refreshes x_hat and resets AoI, failure ages it, capped); source and
// context transitions; actuation logged. The packet sent in slot t carries X_t
// and is usable from t+1.
class Environment {
public:
    explicit Environment(const ScenarioConfig& cfg);

    Observation reset(uint64_t seed);  // reseed the stream, then reset
    Observation reset();               // reset continuing the current stream
    StepResult step(const Action& a);

    Observation observe() const;
    const EnvState& state() const { return state_; }
    EnvState& mutable_state() { return state_; }  // test hook
    const ScenarioConfig& config() const { return cfg_; }

    // test hook: per-loop decode-error override; NaN leaves a loop alone
    std::vector<double>& forced_error() { return forced_error_; }

private:
    ScenarioConfig cfg_;
    Rng rng_;
    EnvState state_;
    std::vector<double> forced_error_;
};

}  // namespace got
