#include "voltvar/mbo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace voltvar {

// The candidate sequence is a fixed schedule independent of the budget:
// uncontrolled point, kCemGenerations CEM generations, then endless
// coordinate-descent polish passes with shrinking spans. Stopping anywhere
// in that sequence gives prefix semantics, so a larger budget can never
// report a worse best-so-far.
namespace {
constexpr int kCemGenerations = 15;
}

MboResult mbo_solve(const Environment& env, const DayProfile& day, int t, std::mt19937_64& rng,
                    const MboOptions& opts) {
    if (opts.budget < 1) throw std::invalid_argument("mbo budget must be >= 1");
    const auto& bounds = env.device_bounds();
    const int m = static_cast<int>(bounds.size());

    MboResult best;
    best.q_mvar = Eigen::VectorXd::Zero(m);
    long evals = 0;
    double best_score = std::numeric_limits<double>::infinity();

    auto evaluate = [&](const Eigen::VectorXd& q) {
        ++evals;
        double score;
        double loss = 0.0, viol = 0.0;
        try {
            auto [l, v] = env.evaluate_row(day, t, q);
            loss = l;
            viol = v;
            score = l + opts.violation_weight * v;
        } catch (const DivergedError&) {
            score = std::numeric_limits<double>::infinity();
        }
        if (score < best_score) {
            best_score = score;
            best.q_mvar = q;
            best.loss_mw = loss;
            best.violation_pu = viol;
        }
        return score;
    };
    auto budget_left = [&]() { return opts.budget - evals; };

    evaluate(Eigen::VectorXd::Zero(m));
    if (m == 0 || budget_left() <= 0) {
        best.evaluations = evals;
        return best;
    }

    Eigen::VectorXd lo(m), hi(m), mu(m), sigma(m);
    for (int i = 0; i < m; ++i) {
        lo[i] = bounds[i].first;
        hi[i] = bounds[i].second;
        mu[i] = 0.5 * (lo[i] + hi[i]);
        sigma[i] = 0.5 * (hi[i] - lo[i]);
    }

    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Eigen::VectorXd> pop(opts.population, Eigen::VectorXd(m));
    std::vector<double> score(opts.population);
    std::vector<int> rank(opts.population);

    for (int gen = 0; gen < kCemGenerations && budget_left() > 0; ++gen) {
        int produced = 0;
        for (int p = 0; p < opts.population; ++p) {
            for (int i = 0; i < m; ++i)
                pop[p][i] = std::clamp(mu[i] + sigma[i] * normal(rng), lo[i], hi[i]);
            if (budget_left() <= 0) break;
            score[p] = evaluate(pop[p]);
            ++produced;
        }
        if (produced < opts.population) break;

        std::iota(rank.begin(), rank.end(), 0);
        std::sort(rank.begin(), rank.end(), [&](int a, int b) { return score[a] < score[b]; });
        const int n_el = std::min(opts.elites, opts.population);
        Eigen::VectorXd new_mu = Eigen::VectorXd::Zero(m);
        for (int e = 0; e < n_el; ++e) new_mu += pop[rank[e]];
        new_mu /= n_el;
        Eigen::VectorXd var = Eigen::VectorXd::Zero(m);
        for (int e = 0; e < n_el; ++e) var += (pop[rank[e]] - new_mu).cwiseAbs2();
        var /= n_el;
        mu = new_mu;
        for (int i = 0; i < m; ++i)
            sigma[i] = std::max(std::sqrt(var[i]), 1e-4 * (hi[i] - lo[i]));
    }

    // Polish passes around the incumbent, spans halving without end.
    double span = 0.25;
    while (budget_left() > 0) {
        Eigen::VectorXd x = best.q_mvar;
        for (int i = 0; i < m && budget_left() > 0; ++i) {
            double radius = span * (hi[i] - lo[i]);
            double center = x[i];
            for (int k = 0; k < opts.polish_points && budget_left() > 0; ++k) {
                double frac =
                    (opts.polish_points == 1) ? 0.0 : -1.0 + 2.0 * k / (opts.polish_points - 1.0);
                Eigen::VectorXd cand = x;
                cand[i] = std::clamp(center + frac * radius, lo[i], hi[i]);
                evaluate(cand);
            }
            x = best.q_mvar;
        }
        span *= 0.35;
        if (span < 1e-7) break; // below metric resolution
    }

    best.evaluations = evals;
    return best;
}

} // namespace voltvar
