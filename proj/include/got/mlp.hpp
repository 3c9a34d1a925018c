#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "got/rng.hpp"

namespace got {

struct Dense {
    Eigen::MatrixXd w;  // out x in
    Eigen::VectorXd b;
};

// Dueling Q-network: two rectified-linear trunk layers feeding a scalar value
// head and an |A|-wide advantage head, aggregated mean-centered:
// Q(s,a) = V(s) + A(s,a) - mean_a A(s,a).
struct MLPParams {
    Dense l1, l2, value, advantage;

    static MLPParams init(int in_dim, int hidden, int n_actions, Rng& rng);

    Eigen::VectorXd forward(const Eigen::VectorXd& feature) const;  // full Q vector

    int in_dim() const { return static_cast<int>(l1.w.cols()); }
    int hidden() const { return static_cast<int>(l2.w.rows()); }
    int n_actions() const { return static_cast<int>(advantage.w.rows()); }
    bool all_finite() const;

    // fixed parameter order used by gradients, the optimizer and checkpoints
    std::vector<Dense*> layers() { return {&l1, &l2, &value, &advantage}; }
    std::vector<const Dense*> layers() const { return {&l1, &l2, &value, &advantage}; }
};

struct AdamState {
    std::vector<Eigen::MatrixXd> mw, vw;
    std::vector<Eigen::VectorXd> mb, vb;
    int64_t t = 0;

    static AdamState zeros_like(const MLPParams& p);
};

struct Batch {
    Eigen::MatrixXd features;       // B x in
    Eigen::MatrixXd next_features;  // B x in
    std::vector<int> actions;
    Eigen::VectorXd rewards;
    std::vector<uint8_t> done;
    int size() const { return static_cast<int>(actions.size()); }
};

// Mean-squared error between Q(s, a_taken) and targets plus its exact gradient,
// computed in one fused reverse pass (the mean-centering and the single-action
// selection make every head gradient low-rank, which keeps the backward cost at
// one trunk-sized GEMM instead of three advantage-sized ones).
MLPParams mse_gradients(const MLPParams& params, const Batch& batch,
                        const Eigen::VectorXd& targets, double* loss_out);

// forward-only loss, the reference route for gradient checks
double mse_loss(const MLPParams& params, const Batch& batch, const Eigen::VectorXd& targets);

// Adam with bias correction; grad_clip > 0 rescales the global gradient L2 norm
// down to the cap first. Throws std::runtime_error on a non-finite loss, after
// dumping layer norms to stderr.
double backward_and_step(MLPParams& params, AdamState& opt, const Batch& batch,
                         const Eigen::VectorXd& targets, double learning_rate,
                         double grad_clip = 0.0);

// Double-DQN targets: y = r (terminal) or r + rho * Q_target(s', a*) with
// a* = argmax_valid Q_online(s', .). Empty mask means every action is valid.
Eigen::VectorXd td_targets(const MLPParams& online, const MLPParams& target, const Batch& batch,
                           double rho, const std::vector<uint8_t>& action_mask);

// Epsilon-greedy over valid actions; greedy ties resolve to the lowest index.
// Always consumes one uniform draw for the explore test, plus one more when
// exploring. Throws std::logic_error when the mask admits no action.
int act(const MLPParams& params, const Eigen::VectorXd& feature, double epsilon, Rng& rng,
        const std::vector<uint8_t>& action_mask);

}  // namespace got
