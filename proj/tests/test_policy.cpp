#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "voltvar/policy.hpp"

using namespace voltvar;

namespace {

// Density of the squashed Gaussian at action a, matching the sampler's
// epsilon convention. Independent of the sampler's code path.
double squashed_density(double a, double mu, double sigma) {
    double u = std::atanh(a);
    double z = (u - mu) / sigma;
    double normal = std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * M_PI));
    return normal / (1.0 - a * a + kTanhEps);
}

PolicyHead tiny_head(int obs_dim, int act_dim, unsigned seed, double final_gain = 0.01) {
    std::mt19937_64 rng(seed);
    PolicyHead h;
    h.action_dim = act_dim;
    h.trunk = MlpParams::make({obs_dim, 16, 16, 2 * act_dim}, rng, final_gain);
    return h;
}

} // namespace

TEST_CASE("sample_squashed: closed form at mu=0, sigma=1, xi=0") {
    // One action dim; trunk rigged to output exactly [0, 0].
    PolicyHead h;
    h.action_dim = 1;
    h.trunk.w.push_back(Mat::Zero(2, 3));
    h.trunk.b.push_back(Vec::Zero(2)); // mean 0, log-std 0 => sigma 1

    Mat s = Mat::Random(1, 3);
    Mat xi = Mat::Zero(1, 1);
    PolicySample ps = sample_squashed(h, s, xi);
    CHECK(ps.a(0, 0) == doctest::Approx(0.0));
    // -0.5 log(2 pi) - log(1 + eps)
    CHECK(ps.log_prob[0] == doctest::Approx(-0.9189385).epsilon(1e-5));
}

TEST_CASE("sample_squashed: actions stay strictly inside (-1, 1)") {
    PolicyHead h = tiny_head(4, 3, 11, 1.0); // big head, saturating outputs
    std::mt19937_64 rng(12);
    Mat s = 3.0 * Mat::Random(64, 4);
    Mat xi = draw_normal(rng, 64, 3);
    PolicySample ps = sample_squashed(h, s, xi);
    CHECK(ps.a.maxCoeff() < 1.0);
    CHECK(ps.a.minCoeff() > -1.0);
    CHECK(ps.log_prob.allFinite());
}

TEST_CASE("sample_squashed is deterministic in (params, s, xi)") {
    PolicyHead h = tiny_head(5, 2, 13);
    std::mt19937_64 rng(14);
    Mat s = Mat::Random(8, 5);
    Mat xi = draw_normal(rng, 8, 2);
    PolicySample a = sample_squashed(h, s, xi);
    PolicySample b = sample_squashed(h, s, xi);
    CHECK(a.a == b.a);
    CHECK(a.log_prob == b.log_prob);
}

TEST_CASE("monte-carlo histogram matches exp(log pi) on interior bins") {
    // Rig a 1-D head with known mu, sigma.
    const double mu = 0.3, log_sigma = std::log(0.6);
    PolicyHead h;
    h.action_dim = 1;
    h.trunk.w.push_back(Mat::Zero(2, 1));
    h.trunk.b.push_back((Vec(2) << mu, log_sigma).finished());

    const int n_draw = 1000000;
    const int n_bins = 40;
    const double lo = -0.9, hi = 0.9;
    std::vector<long> counts(n_bins, 0);
    std::mt19937_64 rng(15);
    const int chunk = 50000;
    Mat s = Mat::Zero(chunk, 1);
    for (int done = 0; done < n_draw; done += chunk) {
        Mat xi = draw_normal(rng, chunk, 1);
        PolicySample ps = sample_squashed(h, s, xi);
        for (int i = 0; i < chunk; ++i) {
            double a = ps.a(i, 0);
            if (a < lo || a >= hi) continue;
            int bin = static_cast<int>((a - lo) / (hi - lo) * n_bins);
            counts[bin]++;
        }
    }

    const double width = (hi - lo) / n_bins;
    int checked = 0;
    for (int b = 0; b < n_bins; ++b) {
        double center = lo + (b + 0.5) * width;
        // 5-point quadrature of the analytic density over the bin
        double prob = 0.0;
        for (int k = 0; k < 5; ++k) {
            double a = lo + b * width + (k + 0.5) * width / 5.0;
            prob += squashed_density(a, mu, 0.6) * width / 5.0;
        }
        double expect = prob * n_draw;
        if (expect < 5000) continue; // skip bins where MC noise dominates
        ++checked;
        double rel = std::abs(counts[b] - expect) / expect;
        INFO("bin center ", center, " count ", counts[b], " expect ", expect);
        CHECK(rel < 0.02);
    }
    CHECK(checked >= 10);
}

TEST_CASE("log pi decreases as sigma grows at fixed a = tanh(mu)") {
    const double mu = 0.4;
    double prev = std::numeric_limits<double>::infinity();
    for (double sigma : {0.05, 0.1, 0.2, 0.5, 1.0, 2.0}) {
        PolicyHead h;
        h.action_dim = 1;
        h.trunk.w.push_back(Mat::Zero(2, 1));
        h.trunk.b.push_back((Vec(2) << mu, std::log(sigma)).finished());
        PolicySample ps = sample_squashed(h, Mat::Zero(1, 1), Mat::Zero(1, 1)); // xi = 0 => a = tanh(mu)
        CHECK(ps.log_prob[0] < prev);
        prev = ps.log_prob[0];
    }
}

TEST_CASE("policy_backward matches finite differences through a and log pi") {
    PolicyHead h = tiny_head(5, 2, 16, 0.05);
    std::mt19937_64 rng(17);
    const int B = 4;
    Mat s = 0.7 * Mat::Random(B, 5);
    Mat xi = draw_normal(rng, B, 2);

    // scalar objective: sum(w_a .* a) + sum(w_p .* logp)
    Mat w_a = Mat::Random(B, 2);
    Vec w_p = Vec::Random(B);

    auto value = [&]() {
        PolicySample ps = sample_squashed(h, s, xi);
        return (ps.a.array() * w_a.array()).sum() + ps.log_prob.dot(w_p);
    };

    PolicySample ps = sample_squashed(h, s, xi);
    MlpGrads g = MlpGrads::zeros_like(h.trunk);
    policy_backward(h, ps, w_a, w_p, &g);

    const double step = 1e-6;
    double worst = 0.0;
    for (int l = 0; l < h.trunk.n_layer(); ++l) {
        Eigen::Index nw = h.trunk.w[l].size();
        Eigen::Index stride = std::max<Eigen::Index>(1, nw / 30);
        for (Eigen::Index k = 0; k < nw; k += stride) {
            double keep = h.trunk.w[l].data()[k];
            h.trunk.w[l].data()[k] = keep + step;
            double up = value();
            h.trunk.w[l].data()[k] = keep - step;
            double dn = value();
            h.trunk.w[l].data()[k] = keep;
            double fd = (up - dn) / (2.0 * step);
            double an = g.w[l].data()[k];
            double denom = std::max({std::abs(fd), std::abs(an), 1e-6});
            worst = std::max(worst, std::abs(fd - an) / denom);
        }
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("mean_action is tanh of the mean head") {
    PolicyHead h = tiny_head(3, 2, 18, 1.0);
    Mat s = Mat::Random(6, 3);
    Mat out = mlp_forward(h.trunk, s);
    Mat expect = out.leftCols(2).array().tanh().matrix();
    CHECK((mean_action(h, s) - expect).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}
