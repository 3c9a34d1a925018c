#include "got/replay.hpp"

#include <stdexcept>

namespace got {

ReplayBuffer::ReplayBuffer(int capacity) {
    if (capacity < 1) throw std::invalid_argument("replay capacity must be >= 1");
    store_.resize(capacity);
}

void ReplayBuffer::push(Transition t) {
    store_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity();
    if (size_ < capacity()) ++size_;
}

std::vector<int> ReplayBuffer::sample_indices(int batch, Rng& rng) const {
    if (size_ == 0) throw std::logic_error("sampling from an empty replay buffer");
    std::vector<int> idx(batch);
    for (int k = 0; k < batch; ++k) idx[k] = static_cast<int>(rng.uniform_int(size_));
    return idx;
}

void ReplayBuffer::restore_slot(int i, Transition t, int size, int head) {
    store_[i] = std::move(t);
    size_ = size;
    head_ = head;
}

}  // namespace got
