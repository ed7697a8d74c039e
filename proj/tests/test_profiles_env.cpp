#include <doctest.h>

#include <filesystem>

#include "helpers.hpp"
#include "voltvar/cmdp_env.hpp"

using namespace voltvar;
using voltvar::testing::load_feeder;
using voltvar::testing::toy4;

namespace {

DayProfile flat_profile(const NetworkCase& c, double mult = 1.0) {
    DayProfile p;
    p.load_mult = Eigen::MatrixXd::Constant(kStepsPerDay, c.n_bus(), mult);
    p.gen_p_mw = Eigen::MatrixXd::Zero(kStepsPerDay, c.n_iber());
    return p;
}

} // namespace

TEST_CASE("synthetic profiles: deterministic, shaped, bounded") {
    NetworkCase c = load_feeder("case33.txt", "devices33.txt");
    auto a = generate_synthetic_profiles(42, 3, c);
    auto b = generate_synthetic_profiles(42, 3, c);
    REQUIRE(a.size() == 3);
    for (size_t d = 0; d < a.size(); ++d) {
        CHECK(a[d].load_mult == b[d].load_mult);
        CHECK(a[d].gen_p_mw == b[d].gen_p_mw);
        CHECK(a[d].load_mult.rows() == 96);
        CHECK(a[d].load_mult.minCoeff() >= 0.4);
        CHECK(a[d].load_mult.maxCoeff() <= 1.3);
        CHECK(a[d].gen_p_mw.minCoeff() >= 0.0);
        CHECK(a[d].gen_p_mw.maxCoeff() <= 1.5 + 1e-12);
        // solar is zero overnight
        CHECK(a[d].gen_p_mw.row(0).maxCoeff() == doctest::Approx(0.0));
        CHECK(a[d].gen_p_mw.row(95).maxCoeff() == doctest::Approx(0.0));
    }
    auto other = generate_synthetic_profiles(43, 1, c);
    CHECK(other[0].load_mult != a[0].load_mult);

    // 200-day request yields 200 profiles of 96 rows
    auto many = generate_synthetic_profiles(1, 200, c);
    CHECK(many.size() == 200);
}

TEST_CASE("profile csv round-trip") {
    NetworkCase c = load_feeder("case33.txt", "devices33.txt");
    auto days = generate_synthetic_profiles(7, 1, c);
    auto dir = std::filesystem::temp_directory_path() / "voltvar_profile_rt";
    std::filesystem::remove_all(dir);
    write_profile_csv(dir.string(), 0, days[0], c);
    DayProfile back = read_profile_csv(dir.string(), 0, c);
    CHECK(back.load_mult == days[0].load_mult); // format_double round-trips exactly
    CHECK(back.gen_p_mw == days[0].gen_p_mw);

    std::string header = read_text_file(dir.string() + "/loads_0.csv");
    CHECK(header.rfind("step,bus_1,bus_2,", 0) == 0);
    std::string gen_header = read_text_file(dir.string() + "/gen_0.csv");
    CHECK(gen_header.rfind("step,der_1,der_2,der_3\n", 0) == 0); // 3 IB-ERs on the 33-bus feeder
    std::filesystem::remove_all(dir);
}

TEST_CASE("profile validation rejects bad shapes and over-generation") {
    NetworkCase c = load_feeder("case33.txt", "devices33.txt");
    DayProfile p = flat_profile(c);
    DayProfile short_p = p;
    short_p.load_mult = p.load_mult.topRows(95);
    CHECK_THROWS_AS(validate_profile(short_p, c), std::invalid_argument);

    DayProfile hot = p;
    hot.gen_p_mw(10, 0) = 2.0; // above the 1.5 MW p_max
    CHECK_THROWS_AS(validate_profile(hot, c), std::invalid_argument);
}

TEST_CASE("scale_action: affine map endpoints and midpoint") {
    NetworkCase c = load_feeder("case33.txt", "devices33.txt");
    Environment env(c);
    REQUIRE(env.action_dim() == 4);

    Eigen::VectorXd mid = env.scale_action(Eigen::VectorXd::Zero(4));
    for (int i = 0; i < 4; ++i) CHECK(mid[i] == doctest::Approx(0.0)); // all bounds symmetric

    Eigen::VectorXd hi = env.scale_action(Eigen::VectorXd::Ones(4));
    CHECK(hi[0] == doctest::Approx(2.0)); // IBER sqrt(2.5^2-1.5^2)
    CHECK(hi[3] == doctest::Approx(2.0)); // SVC q_max

    Eigen::VectorXd lo = env.scale_action(-Eigen::VectorXd::Ones(4));
    CHECK(lo[0] == doctest::Approx(-2.0));

    // out-of-range input is clamped
    Eigen::VectorXd big = env.scale_action(Eigen::VectorXd::Constant(4, 7.0));
    CHECK(big[1] == doctest::Approx(2.0));
}

TEST_CASE("reset: zero-load profile gives flat observation") {
    NetworkCase c = load_feeder("case33.txt", "devices33.txt");
    Environment env(c);
    DayProfile p = flat_profile(c, 0.0);
    GridState s = env.reset(p);
    REQUIRE(s.obs.size() == 99); // 3 * 33
    int n = c.n_bus();
    for (int b = 0; b < n; ++b) {
        CHECK(s.obs[b] == doctest::Approx(0.0));         // P
        CHECK(s.obs[n + b] == doctest::Approx(0.0));     // Q
        CHECK(s.obs[2 * n + b] == doctest::Approx(1.0)); // V
    }
    CHECK(s.t == 0);
}

TEST_CASE("step: reward is negative loss, cost matches violation") {
    NetworkCase c = load_feeder("case33.txt", "devices33.txt");
    Environment env(c);
    env.reset(flat_profile(c, 1.0));
    StepOutcome out = env.step({Eigen::VectorXd::Zero(4)});
    CHECK(out.reward < 0.0);
    CHECK(out.reward == doctest::Approx(-0.2027).epsilon(5e-3)); // nominal 33-bus loss
    CHECK(out.cost > 0.0);                                       // nominal case has undervoltage
    CHECK_FALSE(out.done);

    // lossless fictitious case: houses only reactive branches? r=0 forbidden
    // jointly with x=0, so use x-only impedances.
    NetworkCase lossless = c;
    for (auto& br : lossless.branches) br.r = 0.0;
    Environment env0(lossless);
    env0.reset(flat_profile(lossless, 0.5));
    StepOutcome o0 = env0.step({Eigen::VectorXd::Zero(4)});
    CHECK(o0.reward == doctest::Approx(0.0));
}

TEST_CASE("episode runs exactly 96 transitions") {
    NetworkCase c = load_feeder("case33.txt", "devices33.txt");
    Environment env(c);
    auto days = generate_synthetic_profiles(1, 1, c);
    env.reset(days[0]);
    int steps = 0;
    while (!env.done()) {
        StepOutcome out = env.step({Eigen::VectorXd::Zero(4)});
        ++steps;
        CHECK(out.done == (steps == 96));
        CHECK(out.cost >= 0.0);
        CHECK(out.reward <= 0.0);
    }
    CHECK(steps == 96);
    CHECK_THROWS_AS(env.step({Eigen::VectorXd::Zero(4)}), std::logic_error);
}

TEST_CASE("step is deterministic given the same profile row and action") {
    NetworkCase c = load_feeder("case33.txt", "devices33.txt");
    auto days = generate_synthetic_profiles(5, 1, c);
    Eigen::VectorXd a = Eigen::VectorXd::Constant(4, 0.3);

    Environment e1(c), e2(c);
    e1.reset(days[0]);
    e2.reset(days[0]);
    for (int t = 0; t < 96; ++t) {
        StepOutcome o1 = e1.step({a}), o2 = e2.step({a});
        CHECK(o1.reward == o2.reward);
        CHECK(o1.cost == o2.cost);
        CHECK(o1.next.obs == o2.next.obs);
    }
}

TEST_CASE("cost is zero iff every voltage is within limits") {
    NetworkCase c = toy4();
    Environment env(c);
    DayProfile p = flat_profile(c, 1.0);

    env.reset(p);
    StepOutcome uncontrolled = env.step({Eigen::VectorXd::Zero(1)});
    CHECK(uncontrolled.cost > 0.0); // reverse flow drives bus 4 above 1.05

    // absorbing enough reactive power restores feasibility
    env.reset(p);
    StepOutcome controlled = env.step({Eigen::VectorXd::Constant(1, -0.9)});
    CHECK(controlled.cost == doctest::Approx(0.0));

    // exactness: recompute limits from the observation
    int n = c.n_bus();
    for (int b = 0; b < n; ++b) {
        double vm = controlled.next.obs[2 * n + b];
        CHECK(vm <= c.buses[b].v_max + 1e-12);
        CHECK(vm >= c.buses[b].v_min - 1e-12);
    }
}

TEST_CASE("divergence terminates the episode with capped penalties") {
    NetworkCase c = voltvar::testing::two_bus(0.01, 0.0, 6000.0, 0.0);
    Environment env(c);
    DayProfile p;
    p.load_mult = Eigen::MatrixXd::Constant(kStepsPerDay, 2, 0.001); // feasible at reset
    p.gen_p_mw.resize(kStepsPerDay, 0);
    env.reset(p);
    // Crank the load up by swapping in a profile row we cannot serve: use a
    // fresh env whose profile goes infeasible at t=1.
    DayProfile bad = p;
    for (int b = 0; b < 2; ++b) bad.load_mult(1, b) = 1.0;
    Environment env2(c);
    env2.reset(bad);
    StepOutcome ok = env2.step({Eigen::VectorXd(0)});
    (void)ok;
    StepOutcome boom = env2.step({Eigen::VectorXd(0)});
    CHECK(boom.done);
    CHECK(boom.reward == doctest::Approx(-Environment::kLossPenaltyCapMw));
    CHECK(boom.cost == doctest::Approx(Environment::kCostCapPu));
    CHECK(env2.done());
}
