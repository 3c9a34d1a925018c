#pragma once

#include <cstdint>
#include <vector>

#include "got/env.hpp"
#include "got/phy.hpp"
#include "got/scenario.hpp"

namespace got {

// Exact finite reduction of the single-loop control problem. A state is the last
// received source state, the actuations applied since (newest last, at most
// delta_cap of them), and the context. The fading is marginalized into an
// expected-error table per power level, which is exact because the channel is
// drawn fresh every slot.
struct BeliefMdp {
    struct State {
        int x_hat;
        std::vector<int> history;  // oldest first, length in [1, delta_cap]
        int context;
    };

    std::vector<State> states;
    std::vector<std::vector<double>> beliefs;  // per state, over the hidden source
    int n_actions = 0;                         // (M+1) * |C|, env flat-index order
    std::vector<std::vector<double>> stage_cost;  // [state][action]
    // [state][action] -> sparse rows of (next_state, probability)
    std::vector<std::vector<std::vector<std::pair<int, double>>>> transitions;
    int delta_cap = 0;
    int n_states_src = 0, n_actuations = 0, n_contexts = 0;

    int state_index(int x_hat, const std::vector<int>& history, int context) const;
};

// Expected decode error per power level 0..M for one loop transmitting alone.
std::vector<ErrorEstimate> expected_error_table(const ScenarioConfig& cfg, int loop,
                                                int64_t n_samples, uint64_t seed);

// Throws std::invalid_argument unless cfg.n_loops == 1 and 1 <= delta_cap <= 8.
BeliefMdp build_belief_mdp(const ScenarioConfig& cfg, int delta_cap,
                           const std::vector<ErrorEstimate>& eps_table);

struct ViResult {
    std::vector<double> values;
    std::vector<int> policy;  // greedy action per state, ties to the lowest index
    int iterations = 0;
    double residual = 0.0;
};

// Discounted cost minimization by synchronous Bellman backups until the sup-norm
// residual falls below tol. Throws std::runtime_error if max_iter is exhausted.
ViResult value_iteration(const BeliefMdp& mdp, double rho, double tol, int max_iter = 200000);

// Fully observable ablation: the MDP over (X, context) under the complete joint
// action space. Transmission cannot influence anything the cost depends on, so
// for alpha > 0 the optimal power levels are identically zero.
struct GenieMdp {
    std::vector<std::vector<int>> states_x;  // per state, the per-loop source states
    std::vector<int> states_ctx;
    int64_t n_actions = 0;
    std::vector<std::vector<double>> stage_cost;
    std::vector<std::vector<std::vector<std::pair<int, double>>>> transitions;
};

GenieMdp build_genie_mdp(const ScenarioConfig& cfg);

struct GenieResult {
    GenieMdp mdp;
    std::vector<double> values;
    std::vector<int> policy;  // flat action index per state
};

GenieResult genie_mdp_solve(const ScenarioConfig& cfg, double rho = 0.95, double tol = 1e-10);

// Runs the belief-MDP greedy policy in the real environment (n_loops == 1),
// carrying the same truncated history; when the history overflows delta_cap the
// dropped actuation is absorbed by sampling a fresh pinned state, which keeps
// the simulated process identical in law to the reduced MDP.
class BeliefMdpPolicySim {
public:
    BeliefMdpPolicySim(const BeliefMdp& mdp, const ViResult& vi, const ScenarioConfig& cfg,
                       uint64_t seed);

    // action for the current mdp-state; advance() then folds in the realized
    // slot outcome
    Action decide() const;
    void advance(const Action& a, bool success, int received_state, int new_context);
    void begin_episode(const Observation& first_obs);
    int current_state() const { return state_; }

private:
    const BeliefMdp* mdp_;
    const ViResult* vi_;
    const ScenarioConfig* cfg_;
    Rng rng_;
    int pin_ = 0;               // pinned source state the history is measured from
    std::vector<int> history_;  // oldest first
    int context_ = 0;
    int state_ = 0;

    void relocate();
};

}  // namespace got
