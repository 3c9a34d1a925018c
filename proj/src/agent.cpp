#include "got/agent.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace got {

double epsilon_schedule(const AgentConfig& cfg, int episode) {
    if (cfg.epsilon_constant) return cfg.epsilon_start;
    const int decay_until = static_cast<int>(cfg.episodes * cfg.epsilon_decay_frac);
    if (decay_until <= 0 || episode >= decay_until) return cfg.epsilon_end;
    return cfg.epsilon_start +
           (cfg.epsilon_end - cfg.epsilon_start) * static_cast<double>(episode) / decay_until;
}

Agent::Agent(const AgentConfig& cfg, int feature_dim, int n_actions, uint64_t seed,
             std::vector<uint8_t> action_mask)
    : cfg_(cfg),
      online_(MLPParams{}),
      target_(MLPParams{}),
      buffer_(cfg.replay_capacity),
      rng_(seed),
      mask_(std::move(action_mask)) {
    online_ = MLPParams::init(feature_dim, cfg.hidden, n_actions, rng_);
    target_ = online_;
    opt_ = AdamState::zeros_like(online_);
    if (!mask_.empty() && static_cast<int>(mask_.size()) != n_actions)
        throw std::invalid_argument("action mask size mismatch");
}

Agent::Agent(const AgentConfig& cfg, MLPParams params, std::vector<uint8_t> mask)
    : cfg_(cfg), online_(std::move(params)), buffer_(cfg.replay_capacity), mask_(std::move(mask)) {
    target_ = online_;
    opt_ = AdamState::zeros_like(online_);
}

int Agent::act(const Eigen::VectorXd& feature, double epsilon) {
    return got::act(online_, feature, epsilon, rng_, mask_);
}

double Agent::train_step() {
    const std::vector<int> idx = buffer_.sample_indices(cfg_.batch_size, rng_);
    const int b = cfg_.batch_size;
    Batch batch;
    batch.features.resize(b, online_.in_dim());
    batch.next_features.resize(b, online_.in_dim());
    batch.actions.resize(b);
    batch.rewards.resize(b);
    batch.done.resize(b);
    for (int k = 0; k < b; ++k) {
        const Transition& t = buffer_.at(idx[k]);
        batch.features.row(k) = t.feature.transpose();
        batch.next_features.row(k) = t.next_feature.transpose();
        batch.actions[k] = t.action;
        batch.rewards(k) = t.reward;
        batch.done[k] = t.done;
    }
    const Eigen::VectorXd targets = td_targets(online_, target_, batch, cfg_.discount, mask_);
    const double loss =
        backward_and_step(online_, opt_, batch, targets, cfg_.learning_rate, cfg_.grad_clip);
    ++grad_steps_;
    if (grad_steps_ % cfg_.sync_every == 0) sync_target();
    return loss;
}

// ---------------------------------------------------------------------------
// checkpoint container, little-endian, version 1:
//   bytes 0..7   magic "GOTCKPT\0"
//   u32 version (= 1)
//   u32 feature_dim, u32 hidden, u32 n_actions
//   u32 n_arrays (= 32), then per array { u32 rows, u32 cols } — the shape
//     table, in order: online {l1.w,l1.b,l2.w,l2.b,value.w,value.b,adv.w,adv.b},
//     the same eight for the target net, then Adam first moments (m) and second
//     moments (v), each in the same eight-slot order (vectors store cols = 1)
//   u64 grad_steps, u64 adam_t
//   u32 rng_len, rng_len bytes — the mt19937_64 text state
//   u32 capacity, u32 size, u32 head, then `size` transitions, each
//     { feature_dim f64 feature, feature_dim f64 next, i32 action, f64 reward,
//       u8 done } in storage order
//   the arrays as f64, row-major, in shape-table order
// ---------------------------------------------------------------------------

namespace {

void put_u32(std::ostream& os, uint32_t v) { os.write(reinterpret_cast<char*>(&v), 4); }
void put_u64(std::ostream& os, uint64_t v) { os.write(reinterpret_cast<char*>(&v), 8); }
void put_f64(std::ostream& os, double v) { os.write(reinterpret_cast<char*>(&v), 8); }

uint32_t get_u32(std::istream& is) {
    uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 4);
    return v;
}
uint64_t get_u64(std::istream& is) {
    uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 8);
    return v;
}
double get_f64(std::istream& is) {
    double v = 0;
    is.read(reinterpret_cast<char*>(&v), 8);
    return v;
}

void put_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(os, m(r, c));
}
void put_vector(std::ostream& os, const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) put_f64(os, v(i));
}
void get_matrix(std::istream& is, Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = get_f64(is);
}
void get_vector(std::istream& is, Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = get_f64(is);
}

constexpr char kMagic[8] = {'G', 'O', 'T', 'C', 'K', 'P', 'T', '\0'};
constexpr uint32_t kVersion = 1;

}  // namespace

void Agent::save_checkpoint(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write checkpoint " + path);

    os.write(kMagic, 8);
    put_u32(os, kVersion);
    put_u32(os, static_cast<uint32_t>(online_.in_dim()));
    put_u32(os, static_cast<uint32_t>(online_.hidden()));
    put_u32(os, static_cast<uint32_t>(online_.n_actions()));

    auto online_layers = online_.layers();
    auto target_layers = target_.layers();
    put_u32(os, 32);
    auto put_shape_of = [&os](const Eigen::MatrixXd& w, const Eigen::VectorXd& b) {
        put_u32(os, static_cast<uint32_t>(w.rows()));
        put_u32(os, static_cast<uint32_t>(w.cols()));
        put_u32(os, static_cast<uint32_t>(b.size()));
        put_u32(os, 1);
    };
    for (const Dense* d : online_layers) put_shape_of(d->w, d->b);
    for (const Dense* d : target_layers) put_shape_of(d->w, d->b);
    for (size_t i = 0; i < opt_.mw.size(); ++i) put_shape_of(opt_.mw[i], opt_.mb[i]);
    for (size_t i = 0; i < opt_.vw.size(); ++i) put_shape_of(opt_.vw[i], opt_.vb[i]);

    put_u64(os, static_cast<uint64_t>(grad_steps_));
    put_u64(os, static_cast<uint64_t>(opt_.t));

    const std::string rng_state = rng_.state();
    put_u32(os, static_cast<uint32_t>(rng_state.size()));
    os.write(rng_state.data(), static_cast<std::streamsize>(rng_state.size()));

    put_u32(os, static_cast<uint32_t>(buffer_.capacity()));
    put_u32(os, static_cast<uint32_t>(buffer_.size()));
    put_u32(os, static_cast<uint32_t>(buffer_.head()));
    for (int i = 0; i < buffer_.size(); ++i) {
        const Transition& t = buffer_.at(i);
        put_vector(os, t.feature);
        put_vector(os, t.next_feature);
        const int32_t a = t.action;
        os.write(reinterpret_cast<const char*>(&a), 4);
        put_f64(os, t.reward);
        const uint8_t d = t.done ? 1 : 0;
        os.write(reinterpret_cast<const char*>(&d), 1);
    }

    for (const Dense* d : online_layers) {
        put_matrix(os, d->w);
        put_vector(os, d->b);
    }
    for (const Dense* d : target_layers) {
        put_matrix(os, d->w);
        put_vector(os, d->b);
    }
    for (size_t i = 0; i < opt_.mw.size(); ++i) {
        put_matrix(os, opt_.mw[i]);
        put_vector(os, opt_.mb[i]);
    }
    for (size_t i = 0; i < opt_.vw.size(); ++i) {
        put_matrix(os, opt_.vw[i]);
        put_vector(os, opt_.vb[i]);
    }
    if (!os) throw std::runtime_error("short write on checkpoint " + path);
}

Agent Agent::load_checkpoint(const std::string& path, const AgentConfig& cfg,
                             int expect_feature_dim, int expect_n_actions,
                             std::vector<uint8_t> action_mask) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint " + path);

    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("not a checkpoint file: " + path);
    if (const uint32_t version = get_u32(is); version != kVersion)
        throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));

    const int in_dim = static_cast<int>(get_u32(is));
    const int hidden = static_cast<int>(get_u32(is));
    const int n_actions = static_cast<int>(get_u32(is));
    if (in_dim != expect_feature_dim || n_actions != expect_n_actions || hidden != cfg.hidden)
        throw std::runtime_error(
            "checkpoint shape mismatch: file has in=" + std::to_string(in_dim) + " hidden=" +
            std::to_string(hidden) + " actions=" + std::to_string(n_actions) + ", expected in=" +
            std::to_string(expect_feature_dim) + " hidden=" + std::to_string(cfg.hidden) +
            " actions=" + std::to_string(expect_n_actions));
    if (!action_mask.empty() && static_cast<int>(action_mask.size()) != n_actions)
        throw std::runtime_error("action mask size mismatch");

    const uint32_t n_arrays = get_u32(is);
    if (n_arrays != 32) throw std::runtime_error("unexpected checkpoint array count");

    MLPParams shape;
    shape.l1.w.resize(hidden, in_dim);
    shape.l1.b.resize(hidden);
    shape.l2.w.resize(hidden, hidden);
    shape.l2.b.resize(hidden);
    shape.value.w.resize(1, hidden);
    shape.value.b.resize(1);
    shape.advantage.w.resize(n_actions, hidden);
    shape.advantage.b.resize(n_actions);

    auto expect_shape = [&is, &path](const Eigen::MatrixXd& w, const Eigen::VectorXd& b) {
        const uint32_t wr = get_u32(is), wc = get_u32(is), br = get_u32(is), bc = get_u32(is);
        if (wr != w.rows() || wc != w.cols() || br != b.size() || bc != 1)
            throw std::runtime_error("checkpoint shape table mismatch in " + path);
    };
    for (int rep = 0; rep < 4; ++rep)
        for (const Dense* d : shape.layers()) expect_shape(d->w, d->b);

    Agent agent(cfg, shape, std::move(action_mask));
    agent.grad_steps_ = static_cast<int64_t>(get_u64(is));
    agent.opt_.t = static_cast<int64_t>(get_u64(is));

    const uint32_t rng_len = get_u32(is);
    std::string rng_state(rng_len, '\0');
    is.read(rng_state.data(), rng_len);
    agent.rng_.restore(rng_state);

    const int capacity = static_cast<int>(get_u32(is));
    if (capacity != cfg.replay_capacity)
        throw std::runtime_error("checkpoint replay capacity mismatch");
    const int size = static_cast<int>(get_u32(is));
    const int head = static_cast<int>(get_u32(is));
    for (int i = 0; i < size; ++i) {
        Transition t;
        t.feature.resize(in_dim);
        t.next_feature.resize(in_dim);
        get_vector(is, t.feature);
        get_vector(is, t.next_feature);
        int32_t a = 0;
        is.read(reinterpret_cast<char*>(&a), 4);
        t.action = a;
        t.reward = get_f64(is);
        uint8_t d = 0;
        is.read(reinterpret_cast<char*>(&d), 1);
        t.done = d != 0;
        agent.buffer_.restore_slot(i, std::move(t), size, head);
    }

    for (Dense* d : agent.online_.layers()) {
        get_matrix(is, d->w);
        get_vector(is, d->b);
    }
    for (Dense* d : agent.target_.layers()) {
        get_matrix(is, d->w);
        get_vector(is, d->b);
    }
    for (size_t i = 0; i < agent.opt_.mw.size(); ++i) {
        get_matrix(is, agent.opt_.mw[i]);
        get_vector(is, agent.opt_.mb[i]);
    }
    for (size_t i = 0; i < agent.opt_.vw.size(); ++i) {
        get_matrix(is, agent.opt_.vw[i]);
        get_vector(is, agent.opt_.vb[i]);
    }
    if (!is) throw std::runtime_error("truncated checkpoint " + path);
    return agent;
}

}  // namespace got
