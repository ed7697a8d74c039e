#pragma once

#include <random>
#include <stdexcept>
#include <vector>

#include "voltvar/mlp.hpp"

namespace voltvar {

/// One environment interaction record {s, a, R, R^c, s', done}.
struct Transition {
    Vec s;
    Vec a;
    double reward = 0.0;
    double cost = 0.0;
    Vec s_next;
    bool done = false;
};

class UnderfilledError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Sampled mini-batch in matrix form, one transition per row.
struct Batch {
    Mat s, a, s_next;
    Vec reward, cost, not_done;
    Eigen::Index size() const { return s.rows(); }
};

/// Fixed-capacity ring with FIFO eviction and uniform sampling without
/// replacement within a batch.
class ReplayBuffer {
public:
    explicit ReplayBuffer(size_t capacity);

    void push(Transition t);
    size_t size() const { return full_ ? data_.size() : next_; }
    size_t capacity() const { return data_.size(); }
    const Transition& at(size_t i) const { return data_[i]; }

    /// Throws UnderfilledError when fewer than batch_size transitions are
    /// stored. Deterministic given the RNG state.
    Batch sample(size_t batch_size, std::mt19937_64& rng) const;

private:
    std::vector<Transition> data_;
    size_t next_ = 0;
    bool full_ = false;
};

} // namespace voltvar
