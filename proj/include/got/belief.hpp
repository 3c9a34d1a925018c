#pragma once

#include <span>
#include <vector>

#include "got/env.hpp"
#include "got/scenario.hpp"

namespace got {

// Posterior over a loop's hidden source state from the last received state, its
// age, and the actuations applied since: row x_hat of the ordered product of the
// aoi actuation-indexed transition matrices (oldest actuation first). With
// cfg.belief_extra_step the newest actuation is applied one extra time, matching
// the (aoi+1)-factor product written out in some derivations; comparison only.
std::vector<double> belief_from_history(int x_hat, int aoi,
                                        std::span<const int> actuation_history,
                                        const ScenarioConfig& cfg, int loop);

// Incremental form: pin the belief on a successful decode, then push it through
// the applied actuation's transition matrix.
std::vector<double> belief_update(const std::vector<double>& prev_belief, int actuation,
                                  bool success, int received_state_if_success,
                                  const ScenarioConfig& cfg, int loop);

// Agent input: per-loop beliefs, per-loop aoi/aoi_cap, then a context one-hot
// when the context is observable.
int feature_dim(const ScenarioConfig& cfg);
std::vector<double> featurize(const Observation& obs,
                              const std::vector<std::vector<double>>& beliefs,
                              const ScenarioConfig& cfg);

// Per-episode belief bookkeeping shared by the trainer, evaluator and policies.
// In genie mode the "beliefs" handed out are one-hots of the true source states.
class BeliefTracker {
public:
    explicit BeliefTracker(const ScenarioConfig& cfg);

    void reset(const Observation& obs);
    void update(const Action& a, const DecodeOutcome& decode, const Observation& next_obs);

    const std::vector<std::vector<double>>& beliefs() const { return beliefs_; }

    // true_x required when cfg.genie_obs is set
    std::vector<double> features(const Observation& obs,
                                 const std::vector<int>* true_x = nullptr) const;
    std::vector<std::vector<double>> effective_beliefs(const std::vector<int>* true_x) const;

private:
    const ScenarioConfig* cfg_;
    std::vector<std::vector<double>> beliefs_;
};

}  // namespace got
