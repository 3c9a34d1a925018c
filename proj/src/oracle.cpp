#include "got/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "got/belief.hpp"

namespace got {

namespace {

// shared synchronous value iteration over sparse transition rows
ViResult run_value_iteration(const std::vector<std::vector<double>>& cost,
                             const std::vector<std::vector<std::vector<std::pair<int, double>>>>& trans,
                             double rho, double tol, int max_iter) {
    if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("discount must be in [0,1)");
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    const size_t n_states = cost.size();
    ViResult res;
    res.values.assign(n_states, 0.0);
    std::vector<double> next(n_states, 0.0);
    for (res.iterations = 1; res.iterations <= max_iter; ++res.iterations) {
        double residual = 0.0;
        for (size_t s = 0; s < n_states; ++s) {
            double best = std::numeric_limits<double>::infinity();
            for (size_t a = 0; a < cost[s].size(); ++a) {
                double q = cost[s][a];
                if (rho > 0.0) {
                    double tail = 0.0;
                    for (const auto& [ns, p] : trans[s][a]) tail += p * res.values[ns];
                    q += rho * tail;
                }
                best = std::min(best, q);
            }
            next[s] = best;
            residual = std::max(residual, std::abs(best - res.values[s]));
        }
        res.values.swap(next);
        res.residual = residual;
        if (residual <= tol) break;
        if (res.iterations == max_iter)
            throw std::runtime_error("value iteration did not converge, residual " +
                                     std::to_string(residual));
    }
    res.policy.assign(n_states, 0);
    for (size_t s = 0; s < n_states; ++s) {
        double best = std::numeric_limits<double>::infinity();
        for (size_t a = 0; a < cost[s].size(); ++a) {
            double q = cost[s][a];
            double tail = 0.0;
            for (const auto& [ns, p] : trans[s][a]) tail += p * res.values[ns];
            q += rho * tail;
            if (q < best) {  // strict improvement keeps the lowest index on ties
                best = q;
                res.policy[s] = static_cast<int>(a);
            }
        }
    }
    return res;
}

int histories_up_to(int n_actuations, int cap) {
    int total = 0, layer = 1;
    for (int d = 1; d <= cap; ++d) {
        layer *= n_actuations;
        total += layer;
    }
    return total;
}

// arithmetic index of a history (oldest entry most significant) among all
// histories of length 1..cap
int history_index(const std::vector<int>& hist, int n_actuations, int cap) {
    int offset = 0, layer = 1;
    for (int d = 1; d < static_cast<int>(hist.size()); ++d) {
        layer *= n_actuations;
        offset += layer;
    }
    int digits = 0;
    for (int c : hist) digits = digits * n_actuations + c;
    return offset + digits;
}

}  // namespace

int BeliefMdp::state_index(int x_hat, const std::vector<int>& history, int context) const {
    if (history.empty() || static_cast<int>(history.size()) > delta_cap) return -1;
    const int n_hist = histories_up_to(n_actuations, delta_cap);
    return (x_hat * n_hist + history_index(history, n_actuations, delta_cap)) * n_contexts +
           context;
}

std::vector<ErrorEstimate> expected_error_table(const ScenarioConfig& cfg, int loop,
                                                int64_t n_samples, uint64_t seed) {
    std::vector<ErrorEstimate> table(cfg.power_levels + 1);
    for (int level = 0; level <= cfg.power_levels; ++level)
        table[level] =
            expected_error(power_of_level(level, cfg), loop, cfg, n_samples, derive_seed(seed, level));
    return table;
}

BeliefMdp build_belief_mdp(const ScenarioConfig& cfg, int delta_cap,
                           const std::vector<ErrorEstimate>& eps_table) {
    if (cfg.n_loops != 1) throw std::invalid_argument("belief MDP supports a single loop only");
    if (delta_cap < 1 || delta_cap > 8) throw std::invalid_argument("delta_cap must be in [1,8]");
    if (delta_cap > cfg.aoi_cap) throw std::invalid_argument("delta_cap exceeds aoi_cap");
    if (static_cast<int>(eps_table.size()) != cfg.power_levels + 1)
        throw std::invalid_argument("error table must hold one entry per power level");

    ScenarioConfig plain = cfg;
    plain.belief_extra_step = false;  // the reduction uses the standard product

    BeliefMdp mdp;
    mdp.delta_cap = delta_cap;
    mdp.n_actions = (cfg.power_levels + 1) * cfg.n_actuations;
    mdp.n_states_src = cfg.n_states;
    mdp.n_actuations = cfg.n_actuations;
    mdp.n_contexts = cfg.n_contexts;

    const int n_hist = histories_up_to(cfg.n_actuations, delta_cap);
    const int n_states = cfg.n_states * n_hist * cfg.n_contexts;
    mdp.states.reserve(n_states);
    mdp.beliefs.reserve(n_states);

    // enumeration: x_hat major, then history (length-major, digits oldest-first),
    // then context; index arithmetic below must match this order
    std::vector<std::vector<int>> hists;
    hists.reserve(n_hist);
    for (int len = 1; len <= delta_cap; ++len) {
        std::vector<int> h(len, 0);
        while (true) {
            hists.push_back(h);
            int pos = len - 1;
            while (pos >= 0 && ++h[pos] == cfg.n_actuations) h[pos--] = 0;
            if (pos < 0) break;
        }
    }

    auto index_of = [&](int x_hat, const std::vector<int>& hist, int ctx) {
        return (x_hat * n_hist + history_index(hist, cfg.n_actuations, delta_cap)) *
                   cfg.n_contexts +
               ctx;
    };

    for (int x_hat = 0; x_hat < cfg.n_states; ++x_hat)
        for (const auto& h : hists)
            for (int ctx = 0; ctx < cfg.n_contexts; ++ctx) {
                mdp.states.push_back({x_hat, h, ctx});
                mdp.beliefs.push_back(belief_from_history(
                    x_hat, static_cast<int>(h.size()), h, plain, 0));
            }

    mdp.stage_cost.assign(mdp.states.size(), std::vector<double>(mdp.n_actions, 0.0));
    mdp.transitions.assign(mdp.states.size(), {});

    for (size_t s = 0; s < mdp.states.size(); ++s) {
        const auto& st = mdp.states[s];
        const auto& belief = mdp.beliefs[s];
        mdp.transitions[s].assign(mdp.n_actions, {});
        for (int level = 0; level <= cfg.power_levels; ++level) {
            const double eps = level == 0 ? 1.0 : eps_table[level].mean;
            for (int act = 0; act < cfg.n_actuations; ++act) {
                const int a = level * cfg.n_actuations + act;  // env flat order for one loop

                double exp_c1 = 0.0;
                for (int x = 0; x < cfg.n_states; ++x) exp_c1 += belief[x] * cfg.c1(x, st.context);
                mdp.stage_cost[s][a] = exp_c1 +
                                       cfg.alpha * (static_cast<double>(level) / cfg.power_levels) +
                                       cfg.beta * cfg.c3(act);

                auto& rows = mdp.transitions[s][a];
                for (int ctx2 = 0; ctx2 < cfg.n_contexts; ++ctx2) {
                    const double pc = cfg.context_prob(st.context, ctx2);
                    if (pc == 0.0) continue;
                    if (eps < 1.0) {
                        // success: the decoded packet pins the current source state
                        for (int x = 0; x < cfg.n_states; ++x) {
                            if (belief[x] == 0.0) continue;
                            rows.emplace_back(index_of(x, {act}, ctx2),
                                              (1.0 - eps) * belief[x] * pc);
                        }
                    }
                    if (eps > 0.0) {
                        std::vector<int> grown(st.history);
                        grown.push_back(act);
                        if (static_cast<int>(grown.size()) <= delta_cap) {
                            rows.emplace_back(index_of(st.x_hat, grown, ctx2), eps * pc);
                        } else {
                            // absorb the dropped actuation into the pinned state
                            const int dropped = grown.front();
                            std::vector<int> kept(grown.begin() + 1, grown.end());
                            for (int x = 0; x < cfg.n_states; ++x) {
                                const double mu = cfg.source_prob(0, dropped, st.x_hat, x);
                                if (mu == 0.0) continue;
                                rows.emplace_back(index_of(x, kept, ctx2), eps * mu * pc);
                            }
                        }
                    }
                }
            }
        }
    }
    return mdp;
}

ViResult value_iteration(const BeliefMdp& mdp, double rho, double tol, int max_iter) {
    return run_value_iteration(mdp.stage_cost, mdp.transitions, rho, tol, max_iter);
}

GenieMdp build_genie_mdp(const ScenarioConfig& cfg) {
    GenieMdp mdp;
    mdp.n_actions = action_count(cfg);

    int n_x = 1;
    for (int i = 0; i < cfg.n_loops; ++i) n_x *= cfg.n_states;
    const int n_states = n_x * cfg.n_contexts;

    for (int xi = 0; xi < n_x; ++xi) {
        std::vector<int> xs(cfg.n_loops);
        int rem = xi;
        for (int i = cfg.n_loops - 1; i >= 0; --i) {
            xs[i] = rem % cfg.n_states;
            rem /= cfg.n_states;
        }
        for (int ctx = 0; ctx < cfg.n_contexts; ++ctx) {
            mdp.states_x.push_back(xs);
            mdp.states_ctx.push_back(ctx);
        }
    }

    auto index_of = [&](const std::vector<int>& xs, int ctx) {
        int xi = 0;
        for (int i = 0; i < cfg.n_loops; ++i) xi = xi * cfg.n_states + xs[i];
        return xi * cfg.n_contexts + ctx;
    };

    mdp.stage_cost.assign(n_states, std::vector<double>(mdp.n_actions, 0.0));
    mdp.transitions.assign(n_states, {});

    for (int s = 0; s < n_states; ++s) {
        const auto& xs = mdp.states_x[s];
        const int ctx = mdp.states_ctx[s];
        mdp.transitions[s].assign(mdp.n_actions, {});
        for (int64_t a = 0; a < mdp.n_actions; ++a) {
            const Action act = decode_action(a, cfg);
            double cost = 0.0;
            for (int i = 0; i < cfg.n_loops; ++i)
                cost += got_cost(xs[i], ctx,
                                 static_cast<double>(act.power_levels[i]) / cfg.power_levels,
                                 act.actuations[i], cfg);
            mdp.stage_cost[s][a] = cost;

            // enumerate joint successors; power plays no role in the dynamics
            std::vector<int> nxt(cfg.n_loops, 0);
            auto& rows = mdp.transitions[s][a];
            while (true) {
                double p = 1.0;
                for (int i = 0; i < cfg.n_loops; ++i)
                    p *= cfg.source_prob(i, act.actuations[i], xs[i], nxt[i]);
                if (p > 0.0) {
                    for (int ctx2 = 0; ctx2 < cfg.n_contexts; ++ctx2) {
                        const double pc = cfg.context_prob(ctx, ctx2);
                        if (pc > 0.0) rows.emplace_back(index_of(nxt, ctx2), p * pc);
                    }
                }
                int pos = cfg.n_loops - 1;
                while (pos >= 0 && ++nxt[pos] == cfg.n_states) nxt[pos--] = 0;
                if (pos < 0) break;
            }
        }
    }
    return mdp;
}

GenieResult genie_mdp_solve(const ScenarioConfig& cfg, double rho, double tol) {
    GenieResult res;
    res.mdp = build_genie_mdp(cfg);
    ViResult vi = run_value_iteration(res.mdp.stage_cost, res.mdp.transitions, rho, tol, 200000);
    res.values = std::move(vi.values);
    res.policy = std::move(vi.policy);
    return res;
}

BeliefMdpPolicySim::BeliefMdpPolicySim(const BeliefMdp& mdp, const ViResult& vi,
                                       const ScenarioConfig& cfg, uint64_t seed)
    : mdp_(&mdp), vi_(&vi), cfg_(&cfg), rng_(seed) {}

void BeliefMdpPolicySim::begin_episode(const Observation& first_obs) {
    pin_ = first_obs.x_hat[0];
    history_ = {0};  // the environment's seeded actuation log
    context_ = first_obs.context;
    relocate();
}

Action BeliefMdpPolicySim::decide() const {
    const int a = vi_->policy[state_];
    return decode_action(a, *cfg_);
}

void BeliefMdpPolicySim::advance(const Action& a, bool success, int received_state,
                                 int new_context) {
    const int c = a.actuations[0];
    if (success) {
        pin_ = received_state;
        history_ = {c};
    } else {
        history_.push_back(c);
        if (static_cast<int>(history_.size()) > mdp_->delta_cap) {
            const int dropped = history_.front();
            history_.erase(history_.begin());
            const auto& m = cfg_->source_transitions[0][dropped];
            pin_ = rng_.sample_discrete(
                std::span<const double>(m.data() + pin_ * cfg_->n_states, cfg_->n_states));
        }
    }
    context_ = new_context;
    relocate();
}

void BeliefMdpPolicySim::relocate() { state_ = mdp_->state_index(pin_, history_, context_); }

}  // namespace got
