#pragma once

#include <string>
#include <vector>

#include "got/mlp.hpp"
#include "got/replay.hpp"
#include "got/rng.hpp"
#include "got/scenario.hpp"

namespace got {

// Exploration rate for an episode index: linear from epsilon_start down to
// epsilon_end across the first epsilon_decay_frac of the episodes, constant
// afterwards; epsilon_end is reached exactly at floor(episodes * frac).
double epsilon_schedule(const AgentConfig& cfg, int episode);

// Double-dueling DQN agent: online/target nets, Adam, uniform replay, and an
// optional action mask honored by both action selection and target computation.
// Single-threaded by contract; all randomness flows through the owned Rng.
class Agent {
public:
    Agent(const AgentConfig& cfg, int feature_dim, int n_actions, uint64_t seed,
          std::vector<uint8_t> action_mask = {});

    int act(const Eigen::VectorXd& feature, double epsilon);
    void record(Transition t) { buffer_.push(std::move(t)); }
    bool ready() const { return buffer_.size() >= cfg_.batch_size; }

    // one sampled gradient step; syncs the target every cfg.sync_every steps
    double train_step();
    void sync_target() { target_ = online_; }

    const MLPParams& online() const { return online_; }
    const MLPParams& target() const { return target_; }
    MLPParams& online_mutable() { return online_; }
    MLPParams& target_mutable() { return target_; }
    const AdamState& opt_state() const { return opt_; }
    const ReplayBuffer& buffer() const { return buffer_; }
    ReplayBuffer& buffer_mutable() { return buffer_; }
    const std::vector<uint8_t>& action_mask() const { return mask_; }
    int64_t grad_steps() const { return grad_steps_; }
    const AgentConfig& config() const { return cfg_; }
    Rng& rng() { return rng_; }

    // Versioned binary container, byte layout documented in agent.cpp next to
    // the writer. Round-trips parameters, optimizer state, replay contents,
    // RNG state and step counters bit-exactly.
    void save_checkpoint(const std::string& path) const;
    static Agent load_checkpoint(const std::string& path, const AgentConfig& cfg,
                                 int expect_feature_dim, int expect_n_actions,
                                 std::vector<uint8_t> action_mask = {});

private:
    AgentConfig cfg_;
    MLPParams online_, target_;
    AdamState opt_;
    ReplayBuffer buffer_;
    Rng rng_;
    std::vector<uint8_t> mask_;
    int64_t grad_steps_ = 0;

    Agent(const AgentConfig& cfg, MLPParams params, std::vector<uint8_t> mask);
};

}  // namespace got
