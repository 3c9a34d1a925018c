#include "got/mlp.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace got {

namespace {

void init_dense(Dense& d, int out, int in, Rng& rng) {
    d.w.resize(out, in);
    d.b = Eigen::VectorXd::Zero(out);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    // row-major draw order pins the byte-exact init for a given seed
    for (int r = 0; r < out; ++r)
        for (int c = 0; c < in; ++c) d.w(r, c) = rng.uniform(-bound, bound);
}

// trunk activations for a batch laid out as one row per sample
void trunk_forward(const MLPParams& p, const Eigen::MatrixXd& x, Eigen::MatrixXd& h1,
                   Eigen::MatrixXd& h2) {
    h1.noalias() = x * p.l1.w.transpose();
    h1.rowwise() += p.l1.b.transpose();
    h1 = h1.cwiseMax(0.0);
    h2.noalias() = h1 * p.l2.w.transpose();
    h2.rowwise() += p.l2.b.transpose();
    h2 = h2.cwiseMax(0.0);
}

}  // namespace

MLPParams MLPParams::init(int in_dim, int hidden, int n_actions, Rng& rng) {
    MLPParams p;
    init_dense(p.l1, hidden, in_dim, rng);
    init_dense(p.l2, hidden, hidden, rng);
    init_dense(p.value, 1, hidden, rng);
    init_dense(p.advantage, n_actions, hidden, rng);
    return p;
}

Eigen::VectorXd MLPParams::forward(const Eigen::VectorXd& feature) const {
    if (feature.size() != l1.w.cols()) throw std::invalid_argument("feature dimension mismatch");
    Eigen::VectorXd h1 = (l1.w * feature + l1.b).cwiseMax(0.0);
    Eigen::VectorXd h2 = (l2.w * h1 + l2.b).cwiseMax(0.0);
    const double v = value.w.row(0).dot(h2) + value.b(0);
    Eigen::VectorXd a = advantage.w * h2 + advantage.b;
    return Eigen::VectorXd::Constant(a.size(), v - a.mean()) + a;
}

bool MLPParams::all_finite() const {
    for (const Dense* d : layers())
        if (!d->w.allFinite() || !d->b.allFinite()) return false;
    return true;
}

AdamState AdamState::zeros_like(const MLPParams& p) {
    AdamState s;
    for (const Dense* d : p.layers()) {
        s.mw.push_back(Eigen::MatrixXd::Zero(d->w.rows(), d->w.cols()));
        s.vw.push_back(Eigen::MatrixXd::Zero(d->w.rows(), d->w.cols()));
        s.mb.push_back(Eigen::VectorXd::Zero(d->b.size()));
        s.vb.push_back(Eigen::VectorXd::Zero(d->b.size()));
    }
    return s;
}

double mse_loss(const MLPParams& params, const Batch& batch, const Eigen::VectorXd& targets) {
    double loss = 0.0;
    for (int k = 0; k < batch.size(); ++k) {
        const Eigen::VectorXd q = params.forward(batch.features.row(k).transpose());
        const double e = q(batch.actions[k]) - targets(k);
        loss += e * e;
    }
    return loss / batch.size();
}

MLPParams mse_gradients(const MLPParams& params, const Batch& batch,
                        const Eigen::VectorXd& targets, double* loss_out) {
    const int b = batch.size();
    const int h = params.hidden();
    const int n_act = params.n_actions();

    Eigen::MatrixXd h1, h2;
    trunk_forward(params, batch.features, h1, h2);

    // column means of the advantage weights realize mean_a A without the big GEMM
    const Eigen::RowVectorXd adv_mean_w = params.advantage.w.colwise().mean();
    const double adv_mean_b = params.advantage.b.mean();

    Eigen::VectorXd g(b);  // dL/dq of the taken action, per sample
    double loss = 0.0;
    for (int k = 0; k < b; ++k) {
        const int a = batch.actions[k];
        const double value_k = params.value.w.row(0).dot(h2.row(k)) + params.value.b(0);
        const double adv_sel = params.advantage.w.row(a).dot(h2.row(k)) + params.advantage.b(a);
        const double adv_bar = adv_mean_w.dot(h2.row(k)) + adv_mean_b;
        const double err = value_k + adv_sel - adv_bar - targets(k);
        loss += err * err;
        g(k) = 2.0 * err / b;
    }
    loss /= b;
    if (loss_out) *loss_out = loss;

    MLPParams grads;
    const Eigen::VectorXd u = h2.transpose() * g;  // sum_k g_k h2_k
    const double g_sum = g.sum();

    grads.value.w = u.transpose();
    grads.value.b = Eigen::VectorXd::Constant(1, g_sum);

    // dQ/dA_j = [j = a_k] - 1/|A|: a rank-one sheet plus per-sample row scatter
    grads.advantage.w.resize(n_act, h);
    grads.advantage.w.rowwise() = (-1.0 / n_act) * u.transpose();
    grads.advantage.b = Eigen::VectorXd::Constant(n_act, -g_sum / n_act);
    for (int k = 0; k < b; ++k) {
        grads.advantage.w.row(batch.actions[k]) += g(k) * h2.row(k);
        grads.advantage.b(batch.actions[k]) += g(k);
    }

    // back into the trunk
    Eigen::MatrixXd dh2(b, h);
    for (int k = 0; k < b; ++k)
        dh2.row(k) = g(k) * (params.value.w.row(0) +
                             params.advantage.w.row(batch.actions[k]) - adv_mean_w);
    dh2 = dh2.cwiseProduct((h2.array() > 0.0).cast<double>().matrix());
    grads.l2.w = dh2.transpose() * h1;
    grads.l2.b = dh2.colwise().sum();

    Eigen::MatrixXd dh1 = dh2 * params.l2.w;
    dh1 = dh1.cwiseProduct((h1.array() > 0.0).cast<double>().matrix());
    grads.l1.w = dh1.transpose() * batch.features;
    grads.l1.b = dh1.colwise().sum();

    return grads;
}

double backward_and_step(MLPParams& params, AdamState& opt, const Batch& batch,
                         const Eigen::VectorXd& targets, double learning_rate, double grad_clip) {
    double loss = 0.0;
    MLPParams grads = mse_gradients(params, batch, targets, &loss);

    if (!std::isfinite(loss)) {
        std::fprintf(stderr, "non-finite loss %.17g; layer norms:", loss);
        for (const Dense* d : params.layers())
            std::fprintf(stderr, " w=%.3e b=%.3e", d->w.norm(), d->b.norm());
        std::fprintf(stderr, "\n");
        throw std::runtime_error("non-finite loss in backward_and_step");
    }

    if (grad_clip > 0.0) {
        double sq = 0.0;
        for (const Dense* d : grads.layers()) sq += d->w.squaredNorm() + d->b.squaredNorm();
        const double norm = std::sqrt(sq);
        if (norm > grad_clip) {
            const double scale = grad_clip / norm;
            for (Dense* d : grads.layers()) {
                d->w *= scale;
                d->b *= scale;
            }
        }
    }

    opt.t += 1;
    const double beta1 = 0.9, beta2 = 0.999, eps_num = 1e-8;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(opt.t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(opt.t));

    auto layer_ptrs = params.layers();
    auto grad_ptrs = grads.layers();
    for (size_t i = 0; i < layer_ptrs.size(); ++i) {
        // one fused pass per array; no Eigen temporaries on the hot path
        auto update = [&](double* p, double* m, double* v, const double* grad, int64_t n) {
            for (int64_t j = 0; j < n; ++j) {
                const double gj = grad[j];
                m[j] = beta1 * m[j] + (1.0 - beta1) * gj;
                v[j] = beta2 * v[j] + (1.0 - beta2) * gj * gj;
                p[j] -= learning_rate * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + eps_num);
            }
        };
        update(layer_ptrs[i]->w.data(), opt.mw[i].data(), opt.vw[i].data(), grad_ptrs[i]->w.data(),
               layer_ptrs[i]->w.size());
        update(layer_ptrs[i]->b.data(), opt.mb[i].data(), opt.vb[i].data(), grad_ptrs[i]->b.data(),
               layer_ptrs[i]->b.size());
    }
    return loss;
}

Eigen::VectorXd td_targets(const MLPParams& online, const MLPParams& target, const Batch& batch,
                           double rho, const std::vector<uint8_t>& action_mask) {
    const int b = batch.size();
    Eigen::VectorXd y = batch.rewards;

    bool any_alive = false;
    for (int k = 0; k < b; ++k) any_alive |= !batch.done[k];
    if (!any_alive || rho == 0.0) return y;

    // action selection by the online net: V and mean(A) are per-sample constants,
    // so the argmax reduces to the advantage head, the only full-width GEMM here
    Eigen::MatrixXd h1, h2;
    trunk_forward(online, batch.next_features, h1, h2);
    Eigen::MatrixXd adv = h2 * online.advantage.w.transpose();
    adv.rowwise() += online.advantage.b.transpose();

    Eigen::MatrixXd th1, th2;
    trunk_forward(target, batch.next_features, th1, th2);
    const Eigen::RowVectorXd tmean_w = target.advantage.w.colwise().mean();
    const double tmean_b = target.advantage.b.mean();

    const int n_act = online.n_actions();
    for (int k = 0; k < b; ++k) {
        if (batch.done[k]) continue;
        int best = -1;
        double best_q = 0.0;
        for (int a = 0; a < n_act; ++a) {
            if (!action_mask.empty() && !action_mask[a]) continue;
            if (best < 0 || adv(k, a) > best_q) {
                best = a;
                best_q = adv(k, a);
            }
        }
        if (best < 0) throw std::logic_error("action mask admits no action");
        const double tv = target.value.w.row(0).dot(th2.row(k)) + target.value.b(0);
        const double tsel =
            target.advantage.w.row(best).dot(th2.row(k)) + target.advantage.b(best);
        const double tbar = tmean_w.dot(th2.row(k)) + tmean_b;
        y(k) += rho * (tv + tsel - tbar);
    }
    return y;
}

int act(const MLPParams& params, const Eigen::VectorXd& feature, double epsilon, Rng& rng,
        const std::vector<uint8_t>& action_mask) {
    const int n_act = params.n_actions();
    int n_valid = n_act;
    if (!action_mask.empty()) {
        n_valid = 0;
        for (uint8_t m : action_mask) n_valid += m != 0;
    }
    if (n_valid == 0) throw std::logic_error("action mask admits no action");

    const bool explore = rng.uniform01() < epsilon;
    if (explore) {
        int64_t pick = static_cast<int64_t>(rng.uniform_int(n_valid));
        if (action_mask.empty()) return static_cast<int>(pick);
        for (int a = 0; a < n_act; ++a)
            if (action_mask[a] && pick-- == 0) return a;
        throw std::logic_error("corrupt action mask");
    }

    const Eigen::VectorXd q = params.forward(feature);
    int best = -1;
    for (int a = 0; a < n_act; ++a) {
        if (!action_mask.empty() && !action_mask[a]) continue;
        if (best < 0 || q(a) > q(best)) best = a;
    }
    return best;
}

}  // namespace got
