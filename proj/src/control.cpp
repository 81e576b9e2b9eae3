#include "looplab/control.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace looplab {

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::stable: return "stable";
        case Regime::oscillatory_unstable: return "oscillatory_unstable";
        case Regime::real_unstable: return "real_unstable";
    }
    return "?";
}

StabilityClassification stability_classify(double k1, double k2) {
    // chi(l) = l^2 - (2 - k2) l + (1 - k2 + k1)
    double tr = 2.0 - k2;
    double det = 1.0 - k2 + k1;
    double disc = tr * tr - 4.0 * det;
    StabilityClassification out{};
    if (disc < 0.0) {
        double im = std::sqrt(-disc) / 2.0;
        out.lambda_plus = Cplx(tr / 2.0, im);
        out.lambda_minus = Cplx(tr / 2.0, -im);
        double mag = std::abs(out.lambda_plus);
        out.regime = mag < 1.0 ? Regime::stable : Regime::oscillatory_unstable;
    } else {
        double s = std::sqrt(disc);
        out.lambda_plus = Cplx((tr + s) / 2.0, 0.0);
        out.lambda_minus = Cplx((tr - s) / 2.0, 0.0);
        double mag = std::max(std::abs(out.lambda_plus), std::abs(out.lambda_minus));
        out.regime = mag < 1.0 ? Regime::stable : Regime::real_unstable;
    }
    return out;
}

StabilityMap stability_map(double k1_min, double k1_max, int n1, double k2_min, double k2_max,
                           int n2, int T, std::uint64_t x0_seed) {
    require(n1 >= 1 && n2 >= 1, "stability_map: need a nonempty grid");
    StabilityMap map;
    map.k1_grid.resize(n1);
    map.k2_grid.resize(n2);
    for (int i = 0; i < n1; ++i)
        map.k1_grid[i] = n1 == 1 ? k1_min : k1_min + (k1_max - k1_min) * i / (n1 - 1.0);
    for (int i = 0; i < n2; ++i)
        map.k2_grid[i] = n2 == 1 ? k2_min : k2_min + (k2_max - k2_min) * i / (n2 - 1.0);
    map.regime.resize(static_cast<size_t>(n1) * n2);
    map.log_loss.resize(static_cast<size_t>(n1) * n2);

    EnvModel env = make_double_integrator(0.0);
    Rng rng = make_stream(x0_seed, "stability-map-x0");
    Mat x0 = sample_x0_batch(env, 16, rng);
    Mat A = env.A;
    Vec B = env.B.col(0);

    for (int i2 = 0; i2 < n2; ++i2) {
        for (int i1 = 0; i1 < n1; ++i1) {
            double k1 = map.k1_grid[i1], k2 = map.k2_grid[i2];
            size_t idx = static_cast<size_t>(i2) * n1 + i1;
            map.regime[idx] = stability_classify(k1, k2).regime;
            Mat Mcl = A - B * Eigen::RowVector2d(k1, k2);
            double total = 0.0;
            for (int b = 0; b < x0.cols(); ++b) {
                Eigen::Vector2d x = x0.col(b);
                double acc = 0.0;
                for (int t = 0; t < T; ++t) {
                    x = Mcl * x;
                    acc += x.squaredNorm();
                }
                total += acc / T;
            }
            map.log_loss[idx] = std::log10(std::max(total / x0.cols(), 1e-300));
        }
    }
    return map;
}

std::vector<std::pair<Vec, double>> gain_samples(const std::vector<Mat>& X,
                                                 const std::vector<Mat>& U) {
    std::vector<std::pair<Vec, double>> samples;
    if (X.empty() || U.empty()) return samples;
    int batch = static_cast<int>(X[0].cols());
    size_t T = U.size();
    for (int b = 0; b < batch; ++b) {
        for (size_t t = 0; t < T; ++t) {
            Vec x = X[t].col(b);
            if (x.norm() > 50.0) break;
            samples.emplace_back(x, U[t](0, b));
        }
    }
    return samples;
}

GainEstimate fit_gain(const std::vector<std::pair<Vec, double>>& samples) {
    require(samples.size() >= 2, "fit_gain: need at least 2 samples");
    Eigen::Matrix2d XtX = Eigen::Matrix2d::Zero();
    Eigen::Vector2d Xtu = Eigen::Vector2d::Zero();
    for (const auto& [x, u] : samples) {
        require(x.size() == 2, "fit_gain: expected 2D states");
        Eigen::Vector2d xe = x.head<2>();
        XtX += xe * xe.transpose();
        Xtu += xe * (-u);
    }
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(XtX);
    if (svd.singularValues()(1) <= 1e-12 * std::max(svd.singularValues()(0), 1.0))
        throw NumericalError("fit_gain: rank-deficient design matrix");
    constexpr double ridge = 1e-8;
    Eigen::Vector2d k = (XtX + ridge * Eigen::Matrix2d::Identity()).ldlt().solve(Xtu);
    GainEstimate est;
    est.k1 = k(0);
    est.k2 = k(1);
    est.method = GainEstimate::Method::least_squares;
    double ss = 0.0;
    for (const auto& [x, u] : samples) {
        double r = u + k(0) * x(0) + k(1) * x(1);
        ss += r * r;
    }
    est.residual = std::sqrt(ss / samples.size());
    est.regime = stability_classify(est.k1, est.k2).regime;
    return est;
}

GainEstimate recover_gain_exact(const OrderParams& op) {
    Mat P = build_P_eff(op);
    Eigen::EigenSolver<Mat> solver(P);
    if (solver.info() != Eigen::Success)
        throw NumericalError("recover_gain_exact: eigendecomposition failed");
    // Dominant complex pair and largest real mode.
    int dom = -1;
    double dom_mag = -1.0, real_mag = 0.0;
    for (int i = 0; i < 4; ++i) {
        Cplx l = solver.eigenvalues()(i);
        if (std::abs(l.imag()) > 1e-9) {
            if (std::abs(l) > dom_mag && l.imag() > 0.0) {
                dom_mag = std::abs(l);
                dom = i;
            }
        } else {
            real_mag = std::max(real_mag, std::abs(l));
        }
    }
    if (dom < 0)
        throw NumericalError("recover_gain_exact: no complex-conjugate pair in P_eff spectrum");
    if (real_mag >= dom_mag)
        throw NumericalError("recover_gain_exact: spectral gap violated (|l3| >= |l1|)");
    Cplx lambda = solver.eigenvalues()(dom);
    Eigen::Vector4cd q = solver.eigenvectors().col(dom);
    // Velocity row of P_eff q = l q gives the control along the dominant
    // plane; solve for u = -k1 x1 - k2 x2 on that plane.
    Cplx u_q = (lambda - 1.0) * q(1);
    Eigen::Matrix2d Qt;
    Qt << q(0).real(), q(1).real(),
          q(0).imag(), q(1).imag();
    double scale = Qt.cwiseAbs().maxCoeff();
    if (std::abs(Qt.determinant()) < 1e-12 * std::max(1.0, scale * scale))
        throw NumericalError("recover_gain_exact: degenerate eigenvector (singular Q)");
    Eigen::Vector2d rhs(-u_q.real(), -u_q.imag());
    Eigen::Vector2d k = Qt.colPivHouseholderQr().solve(rhs);
    GainEstimate est;
    est.k1 = k(0);
    est.k2 = k(1);
    est.method = GainEstimate::Method::eigenvector_exact;
    est.residual = 0.0;
    est.regime = stability_classify(est.k1, est.k2).regime;
    return est;
}

RiccatiSolution solve_lqr(const EnvModel& env, const Mat& Q, const Mat& R, double tol,
                          int max_iter) {
    const Mat& A = env.A;
    const Mat& B = env.B;
    require(Q.rows() == A.rows() && Q.cols() == A.cols(), "solve_lqr: Q dimension mismatch");
    require(R.rows() == B.cols() && R.cols() == B.cols(), "solve_lqr: R dimension mismatch");
    Mat M = Q;
    double resid = 0.0;
    int it = 0;
    for (; it < max_iter; ++it) {
        Mat BtM = B.transpose() * M;
        Mat gain_inv = R + BtM * B;
        Mat K = gain_inv.ldlt().solve(BtM * A);
        Mat M_next = Q + A.transpose() * M * A - A.transpose() * M * B * K;
        M_next = 0.5 * (M_next + M_next.transpose());
        resid = (M_next - M).norm();
        M = M_next;
        if (!M.allFinite() || M.norm() > 1e14)
            throw NumericalError("solve_lqr: Riccati iteration diverged; (A,B) likely not stabilizable");
        if (resid < tol) break;
    }
    if (resid >= tol)
        throw NumericalError("solve_lqr: max iterations exceeded, last residual " +
                             std::to_string(resid));
    RiccatiSolution sol;
    sol.M = M;
    Mat BtM = B.transpose() * M;
    sol.K = (R + BtM * B).ldlt().solve(BtM * A);
    sol.iterations = it + 1;
    sol.residual = resid;
    Mat Acl = A - B * sol.K;
    double rho = 0.0;
    for (const Cplx& l : eigenvalues(Acl)) rho = std::max(rho, std::abs(l));
    if (rho >= 1.0)
        throw NumericalError("solve_lqr: closed loop not stable (rho = " + std::to_string(rho) +
                             "); (A,B) not stabilizable");
    return sol;
}

KalmanSolution kalman_gain(const EnvModel& env, const Mat& W_n, const Mat& V, double tol,
                           int max_iter) {
    const Mat& A = env.A;
    const Mat& C = env.C;
    require(W_n.rows() == A.rows() && W_n.cols() == A.cols(), "kalman_gain: W dimension mismatch");
    require(V.rows() == C.rows() && V.cols() == C.rows(), "kalman_gain: V dimension mismatch");
    Mat Sigma = Mat::Identity(A.rows(), A.cols());
    Mat L;
    double resid = 0.0;
    int it = 0;
    for (; it < max_iter; ++it) {
        Mat S = C * Sigma * C.transpose() + V;
        L = A * Sigma * C.transpose() * S.ldlt().solve(Mat::Identity(S.rows(), S.cols()));
        Mat Sigma_next = (A - L * C) * Sigma * A.transpose() + W_n;
        Sigma_next = 0.5 * (Sigma_next + Sigma_next.transpose());
        resid = (Sigma_next - Sigma).norm();
        Sigma = Sigma_next;
        if (!Sigma.allFinite() || Sigma.norm() > 1e14)
            throw NumericalError("kalman_gain: covariance iteration diverged");
        if (resid < tol) break;
    }
    if (resid >= tol)
        throw NumericalError("kalman_gain: max iterations exceeded, last residual " +
                             std::to_string(resid));
    KalmanSolution sol;
    sol.Sigma = Sigma;
    Mat S = C * Sigma * C.transpose() + V;
    sol.L = A * Sigma * C.transpose() * S.ldlt().solve(Mat::Identity(S.rows(), S.cols()));
    sol.iterations = it + 1;
    sol.residual = resid;
    return sol;
}

std::function<Vec(const Vec&)> lqr_teacher_policy(const Mat& K) {
    return [K](const Vec& x) -> Vec { return -K * x; };
}

}  // namespace looplab
