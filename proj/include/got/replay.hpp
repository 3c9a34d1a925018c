#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "got/rng.hpp"

namespace got {

struct Transition {
    Eigen::VectorXd feature;
    int action = 0;
    double reward = 0.0;
    Eigen::VectorXd next_feature;
    bool done = false;
};

// Fixed-capacity ring; the oldest record is evicted first. Sampling is uniform
// with replacement over the occupied slots.
class ReplayBuffer {
public:
    explicit ReplayBuffer(int capacity);

    void push(Transition t);
    int size() const { return size_; }
    int capacity() const { return static_cast<int>(store_.size()); }
    int head() const { return head_; }
    const Transition& at(int i) const { return store_[i]; }

    std::vector<int> sample_indices(int batch, Rng& rng) const;

    // checkpoint support: raw slot access in storage order
    void restore_slot(int i, Transition t, int size, int head);

private:
    std::vector<Transition> store_;
    int size_ = 0;
    int head_ = 0;  // next slot to overwrite
};

}  // namespace got
