#include <doctest.h>

#include <algorithm>
#include <set>

#include "helpers.hpp"
#include "voltvar/replay.hpp"

using namespace voltvar;

namespace {

Transition make_tr(double tag) {
    Transition t;
    t.s = Vec::Constant(3, tag);
    t.a = Vec::Constant(2, tag);
    t.reward = tag;
    t.cost = 0.0;
    t.s_next = Vec::Constant(3, tag + 0.5);
    t.done = false;
    return t;
}

} // namespace

TEST_CASE("push: FIFO eviction at capacity") {
    ReplayBuffer buf(256);
    for (int i = 0; i < 300; ++i) buf.push(make_tr(i));
    CHECK(buf.size() == 256);

    // the oldest 44 entries (tags 0..43) are gone
    std::set<int> tags;
    for (size_t i = 0; i < buf.size(); ++i) tags.insert(static_cast<int>(buf.at(i).reward));
    CHECK(tags.count(43) == 0);
    CHECK(tags.count(44) == 1);
    CHECK(tags.count(299) == 1);
    CHECK(tags.size() == 256);
}

TEST_CASE("sample: full-buffer batch is a permutation of the contents") {
    ReplayBuffer buf(256);
    for (int i = 0; i < 256; ++i) buf.push(make_tr(i));
    std::mt19937_64 rng(1);
    Batch b = buf.sample(256, rng);
    REQUIRE(b.size() == 256);
    std::set<int> tags;
    for (int i = 0; i < 256; ++i) tags.insert(static_cast<int>(b.reward[i]));
    CHECK(tags.size() == 256); // without replacement
    CHECK(*tags.begin() == 0);
    CHECK(*tags.rbegin() == 255);
}

TEST_CASE("sample: underfilled buffer refuses") {
    ReplayBuffer buf(256);
    for (int i = 0; i < 100; ++i) buf.push(make_tr(i));
    std::mt19937_64 rng(2);
    CHECK_THROWS_AS(buf.sample(256, rng), UnderfilledError);
}

TEST_CASE("sample is deterministic under a seeded generator") {
    ReplayBuffer buf(128);
    for (int i = 0; i < 128; ++i) buf.push(make_tr(i));
    std::mt19937_64 r1(7), r2(7);
    Batch a = buf.sample(32, r1);
    Batch b = buf.sample(32, r2);
    CHECK(a.reward == b.reward);
    CHECK(a.s == b.s);
    CHECK(a.not_done == b.not_done);
}

TEST_CASE("batch layout carries transitions faithfully") {
    ReplayBuffer buf(8);
    Transition t = make_tr(3.0);
    t.cost = 0.25;
    t.done = true;
    buf.push(t);
    std::mt19937_64 rng(3);
    Batch b = buf.sample(1, rng);
    CHECK(b.s.row(0).transpose() == t.s);
    CHECK(b.a.row(0).transpose() == t.a);
    CHECK(b.s_next.row(0).transpose() == t.s_next);
    CHECK(b.cost[0] == 0.25);
    CHECK(b.not_done[0] == 0.0);
}
