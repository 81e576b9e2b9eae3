#pragma once

#include <functional>
#include <vector>

#include "looplab/linenv.hpp"
#include "looplab/spectral.hpp"
#include "looplab/types.hpp"

namespace looplab {

enum class Regime { stable = 0, oscillatory_unstable = 1, real_unstable = 2 };

const char* regime_name(Regime r);

/// Effective linear feedback u = -k1 x1 - k2 x2 extracted from behavior.
struct GainEstimate {
    double k1 = 0.0, k2 = 0.0;
    enum class Method { least_squares, eigenvector_exact } method = Method::least_squares;
    double residual = 0.0;  // RMS fit residual (least-squares mode)
    Regime regime = Regime::real_unstable;
};

struct RiccatiSolution {
    Mat M;  // cost-to-go, symmetric PSD
    Mat K;  // feedback gain
    int iterations = 0;
    double residual = 0.0;
};

struct KalmanSolution {
    Mat L;      // steady-state gain
    Mat Sigma;  // steady-state covariance
    int iterations = 0;
    double residual = 0.0;
};

struct StabilityClassification {
    Regime regime;
    Cplx lambda_plus, lambda_minus;
};

/// Regimes of M_cl = [[1,1],[-k1,1-k2]] via the closed-form quadratic;
/// marginal modes (|l| = 1) count as unstable.
StabilityClassification stability_classify(double k1, double k2);

struct StabilityMap {
    std::vector<double> k1_grid, k2_grid;
    std::vector<Regime> regime;    // row-major, index = i2 * n1 + i1
    std::vector<double> log_loss;  // log10 of mean 50-step rollout loss
    Regime at(int i1, int i2) const { return regime[static_cast<size_t>(i2) * k1_grid.size() + i1]; }
};

StabilityMap stability_map(double k1_min, double k1_max, int n1, double k2_min, double k2_max,
                           int n2, int T = 50, std::uint64_t x0_seed = 0);

/// Ridge least squares for u ~ -k1 x1 - k2 x2 over (x, u) samples.
GainEstimate fit_gain(const std::vector<std::pair<Vec, double>>& samples);

/// All (x_t, u_t) pairs of a rollout batch, truncated per episode at the
/// first step with ||x|| > 50 to keep the regression conditioned.
std::vector<std::pair<Vec, double>> gain_samples(const std::vector<Mat>& X,
                                                 const std::vector<Mat>& U);

/// Exact (k1,k2) from the real/imag environment components of the dominant
/// eigenvector of P_eff; valid under a spectral gap |l3| < |l1|.
GainEstimate recover_gain_exact(const OrderParams& op);

RiccatiSolution solve_lqr(const EnvModel& env, const Mat& Q, const Mat& R, double tol = 1e-12,
                          int max_iter = 200000);

KalmanSolution kalman_gain(const EnvModel& env, const Mat& W_n, const Mat& V, double tol = 1e-12,
                           int max_iter = 200000);

/// State-feedback policy u = -K x for the open-loop teacher slot.
std::function<Vec(const Vec&)> lqr_teacher_policy(const Mat& K);

}  // namespace looplab
