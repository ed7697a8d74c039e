#include <doctest.h>

#include <algorithm>
#include <random>

#include "helpers.hpp"
#include "oracles/newton_pf.hpp"

using namespace voltvar;
using voltvar::testing::load_feeder;
using voltvar::testing::newton_solve;
using voltvar::testing::two_bus;

namespace {

Injection nominal_injection(const NetworkCase& c) {
    Injection inj = Injection::zeros(c.n_bus());
    for (int b = 0; b < c.n_bus(); ++b) {
        inj.p_mw[b] = -c.buses[b].load_p_mw;
        inj.q_mvar[b] = -c.buses[b].load_q_mvar;
    }
    return inj;
}

// Random radial case: random tree over n buses, moderate impedances, loads
// well below loadability.
NetworkCase random_radial(std::mt19937_64& rng, int n) {
    NetworkCase c;
    c.base_mva = 100.0;
    c.slack_bus = 1;
    std::uniform_real_distribution<double> imp(0.002, 0.05);
    std::uniform_real_distribution<double> load(0.0, 2.0);
    for (int i = 1; i <= n; ++i) {
        Bus b;
        b.id = i;
        if (i > 1) {
            b.load_p_mw = load(rng);
            b.load_q_mvar = 0.6 * load(rng);
        }
        c.buses.push_back(b);
    }
    for (int i = 2; i <= n; ++i) {
        std::uniform_int_distribution<int> pick(1, i - 1);
        c.branches.push_back({pick(rng), i, imp(rng), imp(rng)});
    }
    validate_case(c);
    return c;
}

} // namespace

TEST_CASE("solve: no load means flat voltage, zero loss, one iteration") {
    NetworkCase c = load_feeder("case33.txt");
    PowerFlowSolution sol = solve(c, Injection::zeros(33));
    REQUIRE(sol.converged);
    CHECK(sol.iterations == 1);
    CHECK(sol.total_loss_mw == doctest::Approx(0.0));
    for (const auto& v : sol.v) CHECK(std::abs(v) == doctest::Approx(1.0));
}

TEST_CASE("solve: two-bus fixed point matches the independent oracle") {
    NetworkCase c = two_bus(0.01, 0.01, 10.0, 0.0); // 0.1 p.u. load
    PowerFlowSolution sol = solve(c, nominal_injection(c));
    REQUIRE(sol.converged);
    CHECK(std::abs(sol.v[1]) == doctest::Approx(0.998999).epsilon(1e-5));

    auto nr = newton_solve(c, nominal_injection(c));
    REQUIRE(nr.converged);
    CHECK(std::abs(sol.v[1] - nr.v[1]) < 1e-8);

    // loss ~ |I|^2 r * base with I ~ 0.1001 p.u.
    CHECK(total_loss(sol) == doctest::Approx(0.01002).epsilon(2e-3));
    CHECK(total_loss(sol) == doctest::Approx(nr.total_loss_mw).epsilon(1e-6));
}

TEST_CASE("solve: loading beyond maximum power transfer diverges") {
    NetworkCase c = two_bus(0.01, 0.0, 6000.0, 0.0); // 60 p.u. >> V^2/4r = 25 p.u.
    CHECK_THROWS_AS(solve(c, nominal_injection(c)), DivergedError);
}

TEST_CASE("solve: slack voltage pinned, loss formula non-negative") {
    NetworkCase c = load_feeder("case33.txt");
    PowerFlowSolution sol = solve(c, nominal_injection(c));
    REQUIRE(sol.converged);
    CHECK(sol.v[0] == std::complex<double>(1.0, 0.0));
    CHECK(sol.total_loss_mw > 0.0);
    CHECK(sol.iterations < 20);
}

TEST_CASE("total_loss equals injected-minus-consumed power") {
    NetworkCase c = load_feeder("case33.txt");
    Injection inj = nominal_injection(c);
    PowerFlowSolution sol = solve(c, inj);
    REQUIRE(sol.converged);

    // Slack active power from the root branch flows.
    TraversalOrder t = radial_order(c);
    std::complex<double> s_slack(0.0, 0.0);
    for (int i = 0; i < c.n_bus(); ++i)
        if (t.parent[i] == c.slack_index())
            s_slack += sol.v[c.slack_index()] * std::conj(sol.branch_current[t.parent_branch[i]]);
    double injected = s_slack.real() * c.base_mva;
    double consumed = 0.0;
    for (int b = 0; b < c.n_bus(); ++b) consumed += -inj.p_mw[b];
    CHECK(std::abs(sol.total_loss_mw - (injected - consumed)) < 1e-6);
}

TEST_CASE("violation_metric cases") {
    std::vector<Bus> buses(2);
    buses[0] = {1, 0, 0, 0.95, 1.05};
    buses[1] = {2, 0, 0, 0.95, 1.05};
    PowerFlowSolution sol;
    sol.converged = true;

    sol.v = {{1.00, 0.0}, {1.02, 0.0}};
    CHECK(violation_metric(sol, buses) == doctest::Approx(0.0));

    sol.v = {{1.00, 0.0}, {0.94, 0.0}};
    CHECK(violation_metric(sol, buses) == doctest::Approx(0.01));

    sol.v = {{1.06, 0.0}, {0.93, 0.0}};
    CHECK(violation_metric(sol, buses) == doctest::Approx(0.03));
}

TEST_CASE("oracle equivalence on randomized radial cases") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 25; ++trial) {
        std::uniform_int_distribution<int> size(3, 20);
        NetworkCase c = random_radial(rng, size(rng));
        Injection inj = nominal_injection(c);
        PowerFlowSolution sweep = solve(c, inj);
        auto nr = newton_solve(c, inj);
        REQUIRE(sweep.converged);
        REQUIRE(nr.converged);
        for (int b = 0; b < c.n_bus(); ++b)
            CHECK(std::abs(std::abs(sweep.v[b]) - std::abs(nr.v[b])) < 1e-6);
    }
}

TEST_CASE("monotone sensitivity: adding Q at a leaf never lowers its voltage") {
    NetworkCase c = load_feeder("case33.txt");
    int leaf = c.bus_index(18);
    Injection inj = nominal_injection(c);
    double prev = 0.0;
    for (int k = 0; k <= 10; ++k) {
        Injection step = inj;
        step.q_mvar[leaf] += 0.2 * k;
        PowerFlowSolution sol = solve(c, step);
        REQUIRE(sol.converged);
        double vm = std::abs(sol.v[leaf]);
        if (k > 0) CHECK(vm >= prev - 1e-12);
        prev = vm;
    }
}

TEST_CASE("loss is invariant to bus relabeling") {
    NetworkCase c = load_feeder("case33.txt");
    PowerFlowSolution base = solve(c, nominal_injection(c));

    // Relabel bus ids by a fixed permutation (slack stays bus 1 for clarity
    // of the check; ordering of the bus list is also shuffled).
    std::mt19937_64 rng(99);
    std::vector<int> new_id(c.n_bus() + 1);
    std::vector<int> ids(c.n_bus());
    for (int i = 0; i < c.n_bus(); ++i) ids[i] = i + 1;
    std::shuffle(ids.begin() + 1, ids.end(), rng); // keep id 1 = slack
    for (int i = 0; i < c.n_bus(); ++i) new_id[i + 1] = ids[i];

    NetworkCase p = c;
    for (auto& b : p.buses) b.id = new_id[b.id];
    for (auto& br : p.branches) {
        br.from = new_id[br.from];
        br.to = new_id[br.to];
    }
    p.slack_bus = new_id[c.slack_bus];
    std::shuffle(p.buses.begin(), p.buses.end(), rng);
    validate_case(p);

    Injection inj = Injection::zeros(p.n_bus());
    for (int b = 0; b < p.n_bus(); ++b) {
        inj.p_mw[b] = -p.buses[b].load_p_mw;
        inj.q_mvar[b] = -p.buses[b].load_q_mvar;
    }
    PowerFlowSolution perm = solve(p, inj);
    REQUIRE(perm.converged);
    CHECK(perm.total_loss_mw == doctest::Approx(base.total_loss_mw).epsilon(1e-10));
}

TEST_CASE("33-bus nominal solution matches the published figures") {
    NetworkCase c = load_feeder("case33.txt");
    PowerFlowSolution sol = solve(c, nominal_injection(c));
    REQUIRE(sol.converged);
    CHECK(sol.total_loss_mw == doctest::Approx(0.2027).epsilon(2e-3));
    double vmin = 2.0;
    for (const auto& v : sol.v) vmin = std::min(vmin, std::abs(v));
    CHECK(vmin == doctest::Approx(0.9131).epsilon(2e-3));
}
