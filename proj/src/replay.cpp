#include "voltvar/replay.hpp"

namespace voltvar {

ReplayBuffer::ReplayBuffer(size_t capacity) {
    if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
    data_.resize(capacity);
}

void ReplayBuffer::push(Transition t) {
    data_[next_] = std::move(t);
    next_ = (next_ + 1) % data_.size();
    if (next_ == 0) full_ = true;
}

Batch ReplayBuffer::sample(size_t batch_size, std::mt19937_64& rng) const {
    const size_t n = size();
    if (n < batch_size)
        throw UnderfilledError("replay holds " + std::to_string(n) + " < batch " + std::to_string(batch_size));

    // Partial Fisher-Yates: first batch_size entries are a uniform draw
    // without replacement.
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    for (size_t i = 0; i < batch_size; ++i) {
        std::uniform_int_distribution<size_t> pick(i, n - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }

    const auto sdim = data_[idx[0]].s.size();
    const auto adim = data_[idx[0]].a.size();
    Batch b;
    b.s.resize(batch_size, sdim);
    b.a.resize(batch_size, adim);
    b.s_next.resize(batch_size, sdim);
    b.reward.resize(batch_size);
    b.cost.resize(batch_size);
    b.not_done.resize(batch_size);
    for (size_t i = 0; i < batch_size; ++i) {
        const Transition& t = data_[idx[i]];
        b.s.row(i) = t.s.transpose();
        b.a.row(i) = t.a.transpose();
        b.s_next.row(i) = t.s_next.transpose();
        b.reward[i] = t.reward;
        b.cost[i] = t.cost;
        b.not_done[i] = t.done ? 0.0 : 1.0;
    }
    return b;
}

} // namespace voltvar
