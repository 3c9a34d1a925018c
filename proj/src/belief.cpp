#include "got/belief.hpp"

#include <stdexcept>

namespace got {

namespace {

// row-vector times the loop's transition matrix for one actuation
std::vector<double> push_through(const std::vector<double>& row, int actuation,
                                 const ScenarioConfig& cfg, int loop) {
    const int n = cfg.n_states;
    const auto& m = cfg.source_transitions[loop][actuation];
    std::vector<double> out(n, 0.0);
    for (int from = 0; from < n; ++from) {
        const double w = row[from];
        if (w == 0.0) continue;
        for (int to = 0; to < n; ++to) out[to] += w * m[from * n + to];
    }
    return out;
}

}  // namespace

std::vector<double> belief_from_history(int x_hat, int aoi,
                                        std::span<const int> actuation_history,
                                        const ScenarioConfig& cfg, int loop) {
    if (static_cast<int>(actuation_history.size()) != aoi)
        throw std::invalid_argument("actuation history must hold exactly aoi entries");
    if (aoi < 1 || aoi > cfg.aoi_cap) throw std::invalid_argument("aoi out of range");

    std::vector<double> belief(cfg.n_states, 0.0);
    belief[x_hat] = 1.0;
    for (int c : actuation_history) belief = push_through(belief, c, cfg, loop);
    if (cfg.belief_extra_step) belief = push_through(belief, actuation_history.back(), cfg, loop);
    return belief;
}

std::vector<double> belief_update(const std::vector<double>& prev_belief, int actuation,
                                  bool success, int received_state_if_success,
                                  const ScenarioConfig& cfg, int loop) {
    if (success) {
        std::vector<double> pinned(cfg.n_states, 0.0);
        pinned[received_state_if_success] = 1.0;
        return push_through(pinned, actuation, cfg, loop);
    }
    return push_through(prev_belief, actuation, cfg, loop);
}

int feature_dim(const ScenarioConfig& cfg) {
    return cfg.n_loops * cfg.n_states + cfg.n_loops + (cfg.context_observable ? cfg.n_contexts : 0);
}

std::vector<double> featurize(const Observation& obs,
                              const std::vector<std::vector<double>>& beliefs,
                              const ScenarioConfig& cfg) {
    std::vector<double> f;
    f.reserve(feature_dim(cfg));
    for (int i = 0; i < cfg.n_loops; ++i)
        f.insert(f.end(), beliefs[i].begin(), beliefs[i].end());
    for (int i = 0; i < cfg.n_loops; ++i)
        f.push_back(static_cast<double>(obs.aoi[i]) / cfg.aoi_cap);
    if (cfg.context_observable) {
        for (int v = 0; v < cfg.n_contexts; ++v) f.push_back(v == obs.context ? 1.0 : 0.0);
    }
    return f;
}

BeliefTracker::BeliefTracker(const ScenarioConfig& cfg) : cfg_(&cfg) {}

void BeliefTracker::reset(const Observation& obs) {
    beliefs_.assign(cfg_->n_loops, {});
    // success-pinned update with actuation 0, matching the environment's seeded
    // action log; independent of the belief_extra_step comparison flag
    for (int i = 0; i < cfg_->n_loops; ++i)
        beliefs_[i] = belief_update({}, 0, true, obs.x_hat[i], *cfg_, i);
}

void BeliefTracker::update(const Action& a, const DecodeOutcome& decode,
                           const Observation& next_obs) {
    for (int i = 0; i < cfg_->n_loops; ++i)
        beliefs_[i] = belief_update(beliefs_[i], a.actuations[i], decode.success_mask[i] != 0,
                                    next_obs.x_hat[i], *cfg_, i);
}

std::vector<std::vector<double>> BeliefTracker::effective_beliefs(
    const std::vector<int>* true_x) const {
    if (!cfg_->genie_obs) return beliefs_;
    if (!true_x) throw std::logic_error("genie mode needs the true source state");
    std::vector<std::vector<double>> onehots(cfg_->n_loops,
                                             std::vector<double>(cfg_->n_states, 0.0));
    for (int i = 0; i < cfg_->n_loops; ++i) onehots[i][(*true_x)[i]] = 1.0;
    return onehots;
}

std::vector<double> BeliefTracker::features(const Observation& obs,
                                            const std::vector<int>* true_x) const {
    return featurize(obs, effective_beliefs(true_x), *cfg_);
}

}  // namespace got
