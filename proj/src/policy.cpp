#include "voltvar/policy.hpp"

#include <cmath>
#include <stdexcept>

namespace voltvar {

namespace {
constexpr double kHalfLog2Pi = 0.91893853320467274178; // 0.5 * log(2*pi)
}

PolicyHead PolicyHead::make(int obs_dim, int action_dim, std::mt19937_64& rng) {
    PolicyHead h;
    h.action_dim = action_dim;
    // Small final gain keeps the initial policy near mean 0 / log-std 0.
    h.trunk = MlpParams::make({obs_dim, 256, 256, 2 * action_dim}, rng, 0.01);
    return h;
}

PolicySample sample_squashed(const PolicyHead& head, const Mat& s, const Mat& xi) {
    const int m = head.action_dim;
    if (xi.cols() != m || xi.rows() != s.rows())
        throw std::invalid_argument("sample_squashed: xi shape mismatch");

    PolicySample ps;
    Mat out = mlp_forward(head.trunk, s, &ps.trunk_cache);
    ps.mean = out.leftCols(m);
    Mat log_std_raw = out.rightCols(m);
    ps.gate = ((log_std_raw.array() > kLogStdMin).cast<double>() *
               (log_std_raw.array() < kLogStdMax).cast<double>())
                  .matrix();
    Mat log_std = log_std_raw.array().min(kLogStdMax).max(kLogStdMin);
    ps.sigma = log_std.array().exp();
    ps.xi = xi;

    Mat u = ps.mean + ps.sigma.cwiseProduct(xi);
    // Keep actions strictly inside (-1, 1): tanh rounds to +-1 in double
    // once |u| > ~19.
    ps.a = u.array().tanh().min(1.0 - 1e-12).max(-1.0 + 1e-12);

    // log N(u; mu, sigma) = -0.5 log(2 pi) - log sigma - 0.5 xi^2, per dim.
    Eigen::ArrayXXd per_dim = -kHalfLog2Pi - log_std.array() - 0.5 * xi.array().square() -
                              (1.0 - ps.a.array().square() + kTanhEps).log();
    ps.log_prob = per_dim.rowwise().sum();
    return ps;
}

Mat mean_action(const PolicyHead& head, const Mat& s) {
    Mat out = mlp_forward(head.trunk, s);
    return out.leftCols(head.action_dim).array().tanh();
}

void policy_backward(const PolicyHead& head, const PolicySample& ps, const Mat& da, const Vec& dlogp,
                     MlpGrads* grads) {
    const int m = head.action_dim;
    const Eigen::Index batch = ps.a.rows();
    if (da.rows() != batch || da.cols() != m || dlogp.size() != batch)
        throw std::invalid_argument("policy_backward: upstream shape mismatch");

    // tanh'(u) = 1 - a^2 and d logpi / du = 2 a tanh'(u) / (1 - a^2 + eps).
    Eigen::ArrayXXd g = 1.0 - ps.a.array().square();
    Eigen::ArrayXXd dlogp_du = 2.0 * ps.a.array() * g / (g + kTanhEps);

    Eigen::ArrayXXd dlp = dlogp.replicate(1, m).array();
    Eigen::ArrayXXd du = da.array() * g + dlp * dlogp_du;

    Mat gy(batch, 2 * m);
    gy.leftCols(m) = du.matrix(); // du/dmu = 1
    // du/dlogstd = sigma*xi; direct -1 from the density's -log sigma term.
    gy.rightCols(m) =
        (ps.gate.array() * (du * ps.sigma.array() * ps.xi.array() - dlp)).matrix();

    mlp_backward(head.trunk, ps.trunk_cache, gy, grads, false);
}

Mat draw_normal(std::mt19937_64& rng, int rows, int cols) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Mat x(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) x(i, j) = normal(rng);
    return x;
}

} // namespace voltvar
