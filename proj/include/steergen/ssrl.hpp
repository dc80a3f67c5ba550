#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace steergen {

struct NonConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Jointly Gaussian two-sensor task: a latent y observed through two
/// independently noisy channels. x_jc = y + e1 feeds the regressor, x_j =
/// y + e2 feeds the pseudo-predictor g(x_j) = x_j + bias_g. Independent
/// channel noises are what make the pseudo-target a usable training signal.
struct GaussianTaskConfig {
    double sigma_y = 1.0;
    double sigma_1 = 0.5;
    double sigma_2 = 0.5;
    double bias_g = 0.0;
    std::size_t n = 100000;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(sigma_y > 0.0) || sigma_1 < 0.0 || sigma_2 < 0.0)
            throw std::invalid_argument("GaussianTaskConfig: sigmas must be positive");
        if (n < 2) throw std::invalid_argument("GaussianTaskConfig: need n >= 2");
    }

    // closed-form optimum of either training mode: weight of E[y | x_jc]
    double optimal_weight() const {
        return sigma_y * sigma_y / (sigma_y * sigma_y + sigma_1 * sigma_1);
    }
    // irreducible error Var(y | x_jc)
    double conditional_variance() const {
        return sigma_y * sigma_y * sigma_1 * sigma_1 / (sigma_y * sigma_y + sigma_1 * sigma_1);
    }
};

struct GaussianDataset {
    std::vector<double> x_jc;  // regressor input channel
    std::vector<double> x_j;   // pseudo-predictor input channel
    std::vector<double> y;     // latent target (never shown to ssil training)
    double pseudo_bias = 0.0;  // systematic error of g

    std::size_t size() const { return x_jc.size(); }
    double pseudo_target(std::size_t i) const { return x_j[i] + pseudo_bias; }
};

inline GaussianDataset make_task(const GaussianTaskConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> dist(0.0, 1.0);

    GaussianDataset data;
    data.pseudo_bias = cfg.bias_g;
    data.x_jc.resize(cfg.n);
    data.x_j.resize(cfg.n);
    data.y.resize(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        const double y = cfg.sigma_y * dist(rng);
        const double e1 = cfg.sigma_1 * dist(rng);
        const double e2 = cfg.sigma_2 * dist(rng);
        data.y[i] = y;
        data.x_jc[i] = y + e1;
        data.x_j[i] = y + e2;
    }
    return data;
}

/// Scalar affine regressor; the optimum of both training modes is linear on
/// this task, so the model class introduces no approximation gap.
struct LinearRegressor {
    double weight = 0.0;
    double intercept = 0.0;

    double predict(double x) const { return weight * x + intercept; }
};

enum class TrainMode { ssil, supervised };

struct TrainConfig {
    double lr = 0.0;  // 0 = auto (scaled to the input second moment)
    std::size_t max_epochs = 200000;
    double loss_tol = 1e-10;        // stop when the epoch-to-epoch loss delta falls below this
    double divergence_tol = 1e-6;   // still improving faster than this at the cap = NonConvergence
};

/// A regression problem is just inputs and targets; the ssil variant is
/// assembled from the two x channels alone, so training code cannot touch y.
struct RegressionProblem {
    std::vector<double> inputs;
    std::vector<double> targets;
};

inline RegressionProblem ssil_problem(const GaussianDataset& data) {
    RegressionProblem p;
    p.inputs = data.x_jc;
    p.targets.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) p.targets[i] = data.pseudo_target(i);
    return p;
}

inline RegressionProblem supervised_problem(const GaussianDataset& data) {
    return RegressionProblem{data.x_jc, data.y};
}

/// Full-batch gradient descent on the mean squared error. The quadratic loss
/// is folded into sufficient statistics once, making each epoch O(1) and the
/// whole run bit-reproducible.
inline LinearRegressor train(const RegressionProblem& problem, const TrainConfig& cfg = {}) {
    const std::size_t n = problem.inputs.size();
    if (n < 2 || problem.targets.size() != n)
        throw std::invalid_argument("train: need >= 2 samples with matching targets");

    double mx = 0.0, mt = 0.0, mxx = 0.0, mxt = 0.0, mtt = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = problem.inputs[i];
        const double t = problem.targets[i];
        mx += x;
        mt += t;
        mxx += x * x;
        mxt += x * t;
        mtt += t * t;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    mx *= inv_n;
    mt *= inv_n;
    mxx *= inv_n;
    mxt *= inv_n;
    mtt *= inv_n;

    const double lr = cfg.lr > 0.0 ? cfg.lr : 0.45 / (mxx + 1.0);

    LinearRegressor f;
    auto loss = [&](const LinearRegressor& m) {
        return m.weight * m.weight * mxx + 2.0 * m.weight * m.intercept * mx -
               2.0 * m.weight * mxt + m.intercept * m.intercept - 2.0 * m.intercept * mt + mtt;
    };

    double prev_loss = loss(f);
    double last_delta = 0.0;
    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        const double gw = 2.0 * (f.weight * mxx + f.intercept * mx - mxt);
        const double gb = 2.0 * (f.weight * mx + f.intercept - mt);
        f.weight -= lr * gw;
        f.intercept -= lr * gb;

        const double cur_loss = loss(f);
        last_delta = prev_loss - cur_loss;
        prev_loss = cur_loss;
        if (!std::isfinite(cur_loss))
            throw NonConvergence("train: loss diverged (check the learning rate)");
        if (std::abs(last_delta) < cfg.loss_tol) return f;
    }
    if (std::abs(last_delta) > cfg.divergence_tol)
        throw NonConvergence("train: epoch cap hit with loss still moving by " +
                             std::to_string(last_delta) + " per epoch");
    return f;
}

inline LinearRegressor train(const GaussianDataset& data, TrainMode mode, const TrainConfig& cfg = {}) {
    return train(mode == TrainMode::ssil ? ssil_problem(data) : supervised_problem(data), cfg);
}

/// Empirical check of the prediction-error split: the test error of the
/// self-supervised model should equal its squared gap to the supervised
/// model plus the irreducible conditional variance.
struct DecompositionReport {
    double lhs = 0.0;            // measured test MSE of the ssil model against y
    double gap_term = 0.0;       // measured mean squared gap between the two models
    double variance_term = 0.0;  // closed-form Var(y | x_jc)
    double lhs_closed_form = 0.0;
    double gap_closed_form = 0.0;

    double relative_mismatch() const {
        return std::abs(lhs - (gap_term + variance_term)) / std::abs(lhs);
    }
};

inline DecompositionReport error_decomposition(const LinearRegressor& f_ssil,
                                               const LinearRegressor& f_sup,
                                               const GaussianTaskConfig& task, std::size_t n_test,
                                               std::uint64_t test_seed) {
    GaussianTaskConfig test_cfg = task;
    test_cfg.n = n_test;
    test_cfg.seed = test_seed;
    const GaussianDataset test = make_task(test_cfg);

    DecompositionReport report;
    double lhs_sum = 0.0, gap_sum = 0.0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const double p = f_ssil.predict(test.x_jc[i]);
        const double e = p - test.y[i];
        lhs_sum += e * e;
        const double g = p - f_sup.predict(test.x_jc[i]);
        gap_sum += g * g;
    }
    report.lhs = lhs_sum / static_cast<double>(test.size());
    report.gap_term = gap_sum / static_cast<double>(test.size());
    report.variance_term = task.conditional_variance();
    report.lhs_closed_form = task.bias_g * task.bias_g + task.conditional_variance();
    report.gap_closed_form = task.bias_g * task.bias_g;
    return report;
}

// ---------------------------------------------------------------------------
// optional nonlinear regressor, to show the same trends without the linear
// model assumption

struct MlpRegressor {
    std::vector<double> w1, b1, w2;  // one tanh hidden layer
    double b2 = 0.0;

    double predict(double x) const {
        double out = b2;
        for (std::size_t h = 0; h < w1.size(); ++h)
            out += w2[h] * std::tanh(w1[h] * x + b1[h]);
        return out;
    }
};

inline MlpRegressor train_mlp(const RegressionProblem& problem, std::size_t hidden,
                              double lr, std::size_t epochs, std::uint64_t seed) {
    const std::size_t n = problem.inputs.size();
    if (n < 2) throw std::invalid_argument("train_mlp: need >= 2 samples");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> init(0.0, 0.5);
    MlpRegressor m;
    m.w1.resize(hidden);
    m.b1.resize(hidden);
    m.w2.resize(hidden);
    for (std::size_t h = 0; h < hidden; ++h) {
        m.w1[h] = init(rng);
        m.b1[h] = init(rng);
        m.w2[h] = init(rng);
    }

    std::vector<double> gw1(hidden), gb1(hidden), gw2(hidden);
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        std::fill(gw1.begin(), gw1.end(), 0.0);
        std::fill(gb1.begin(), gb1.end(), 0.0);
        std::fill(gw2.begin(), gw2.end(), 0.0);
        double gb2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = problem.inputs[i];
            const double err = m.predict(x) - problem.targets[i];
            gb2 += err;
            for (std::size_t h = 0; h < hidden; ++h) {
                const double a = std::tanh(m.w1[h] * x + m.b1[h]);
                gw2[h] += err * a;
                const double da = err * m.w2[h] * (1.0 - a * a);
                gw1[h] += da * x;
                gb1[h] += da;
            }
        }
        const double scale = 2.0 * lr / static_cast<double>(n);
        for (std::size_t h = 0; h < hidden; ++h) {
            m.w1[h] -= scale * gw1[h];
            m.b1[h] -= scale * gb1[h];
            m.w2[h] -= scale * gw2[h];
        }
        m.b2 -= scale * gb2;
    }
    return m;
}

}  // namespace steergen
