#include "looplab/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace looplab {

static void check_linear(const RnnParams& p, const char* who) {
    if (p.activation != Activation::linear)
        throw std::invalid_argument(std::string(who) + ": spectrum defined for linear activation only");
}

Mat build_P(const EnvModel& env, const RnnParams& p) {
    check_linear(p, "build_P");
    require(p.d_in() == env.n_obs() && p.d_out() == env.n_inputs(),
            "build_P: agent/env dimension mismatch");
    int n = env.n(), N = p.N;
    Mat W = p.W();
    Mat P = Mat::Zero(n + N, n + N);
    double a = p.time_mode.leak();
    P.topLeftCorner(n, n) = env.A;
    P.topRightCorner(n, N) = env.B * p.z.transpose();
    P.bottomLeftCorner(N, n) = a * p.m * env.C * env.A;
    // C B = 0 for the partially observed integrators, so the hidden block is
    // exactly W there; the m C B z^T term only appears under full observability.
    Mat Whh = W + p.m * env.C * env.B * p.z.transpose();
    if (p.time_mode.continuous)
        P.bottomRightCorner(N, N) = (1.0 - a) * Mat::Identity(N, N) + a * Whh;
    else
        P.bottomRightCorner(N, N) = Whh;
    return P;
}

Mat build_P(const EnvModel& env, const RnnParams& p, const ReferenceModel& ref) {
    check_linear(p, "build_P");
    require(p.d_in() == env.n_obs() + 2, "build_P: tracking agent must see plant + reference positions");
    require(p.d_out() == env.n_inputs(), "build_P: agent/env dimension mismatch");
    int n = env.n(), N = p.N;
    int nr = static_cast<int>(ref.R_d.rows());
    double a = p.time_mode.leak();
    Mat m_plant = p.m.leftCols(env.n_obs());
    Mat m_ref = p.m.rightCols(2);
    Mat P = Mat::Zero(nr + n + N, nr + n + N);
    P.block(0, 0, nr, nr) = ref.R_d;
    P.block(nr, nr, n, n) = env.A;
    P.block(nr, nr + n, n, N) = env.B * p.z.transpose();
    P.block(nr + n, 0, N, nr) = a * m_ref * ref.C_R;
    P.block(nr + n, nr, N, n) = a * m_plant * env.C * env.A;
    Mat Whh = p.W() + m_plant * env.C * env.B * p.z.transpose();
    if (p.time_mode.continuous)
        P.block(nr + n, nr + n, N, N) = (1.0 - a) * Mat::Identity(N, N) + a * Whh;
    else
        P.block(nr + n, nr + n, N, N) = Whh;
    return P;
}

Mat build_P_eff(const OrderParams& op) {
    Mat P(4, 4);
    P << 1, 1, 0, 0,
         0, 1, op.sigma_zm, op.sigma_zu,
         1, 1, 0, 0,
         0, 0, op.sigma_vm, op.sigma_vu;
    return P;
}

std::array<double, 4> char_poly_rank1(const OrderParams& op) {
    return {1.0,
            -op.sigma_vu - 2.0,
            2.0 * op.sigma_vu - op.sigma_zm + 1.0,
            op.sigma_vu * op.sigma_zm - op.sigma_vu - op.sigma_zu * op.sigma_vm};
}

static Cplx horner(double b, double c, double d, Cplx x) {
    return ((x + b) * x + c) * x + d;
}

static Cplx newton_polish(double b, double c, double d, Cplx x) {
    for (int it = 0; it < 2; ++it) {
        Cplx f = horner(b, c, d, x);
        Cplx df = (3.0 * x + 2.0 * b) * x + c;
        if (std::abs(df) < 1e-300) break;
        x -= f / df;
    }
    return x;
}

std::array<Cplx, 3> solve_cubic(double a, double b, double c, double d) {
    if (a == 0.0) throw std::invalid_argument("solve_cubic: leading coefficient is zero");
    b /= a;
    c /= a;
    d /= a;
    // Depressed form t^3 + p t + q with l = t - b/3.
    double p = c - b * b / 3.0;
    double q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    double shift = -b / 3.0;
    std::array<Cplx, 3> roots;
    double disc = q * q / 4.0 + p * p * p / 27.0;
    if (disc <= 0.0) {
        // Three real roots: trigonometric branch (branch-stable).
        double mp3 = std::sqrt(std::max(0.0, -p / 3.0));
        double arg = (mp3 > 0.0) ? std::clamp(3.0 * q / (2.0 * p * mp3), -1.0, 1.0) : 0.0;
        double theta = std::acos(arg);
        for (int k = 0; k < 3; ++k) {
            double t = 2.0 * mp3 * std::cos(theta / 3.0 - 2.0 * std::numbers::pi * k / 3.0);
            roots[k] = Cplx(t + shift, 0.0);
        }
    } else {
        double s = std::sqrt(disc);
        double u3 = -q / 2.0 + s;
        double v3 = -q / 2.0 - s;
        double u = std::cbrt(u3);
        double v = std::cbrt(v3);
        double t_real = u + v;
        roots[0] = Cplx(t_real + shift, 0.0);
        double re = -t_real / 2.0;
        double im = std::sqrt(3.0) / 2.0 * (u - v);
        roots[1] = Cplx(re + shift, im);
        roots[2] = Cplx(re + shift, -im);
    }
    for (auto& r : roots) r = newton_polish(b, c, d, r);
    // Exact conjugate symmetrization of the complex pair.
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (std::abs(roots[i].imag()) > 0.0 &&
                std::abs(roots[i] - std::conj(roots[j])) <
                    1e-6 * std::max(1.0, std::abs(roots[i]))) {
                Cplx mean = 0.5 * (roots[i] + std::conj(roots[j]));
                roots[i] = mean;
                roots[j] = std::conj(mean);
            }
    std::sort(roots.begin(), roots.end(), [](const Cplx& x, const Cplx& y) {
        double ax = std::abs(x), ay = std::abs(y);
        if (ax != ay) return ax > ay;
        return x.imag() > y.imag();
    });
    for (const Cplx& r : roots) {
        double scale = std::max(1.0, std::abs(r) * std::abs(r) * std::abs(r));
        if (std::abs(horner(b, c, d, r)) > 1e-9 * scale)
            throw NumericalError("solve_cubic: residual exceeds tolerance");
    }
    return roots;
}

std::vector<Cplx> eigenvalues(const Mat& M, bool validate_residuals) {
    require(M.rows() == M.cols(), "eigenvalues: matrix must be square");
    require(M.rows() <= 512, "eigenvalues: size capped at 512");
    if (!M.allFinite()) throw std::invalid_argument("eigenvalues: non-finite entries");
    Eigen::EigenSolver<Mat> solver(M, validate_residuals);
    if (solver.info() != Eigen::Success) {
        double cond_proxy = M.cwiseAbs().maxCoeff();
        throw NumericalError("eigenvalues: QR iteration did not converge (n=" +
                             std::to_string(M.rows()) +
                             ", max|entry|=" + std::to_string(cond_proxy) + ")");
    }
    std::vector<Cplx> eig(solver.eigenvalues().begin(), solver.eigenvalues().end());
    if (validate_residuals) {
        double scale = std::max(1e-300, M.norm());
        for (Eigen::Index k = 0; k < M.rows(); ++k) {
            Eigen::VectorXcd q = solver.eigenvectors().col(k);
            double resid = (M.cast<Cplx>() * q - eig[k] * q).norm() / q.norm();
            if (resid > 1e-8 * scale)
                throw NumericalError("eigenvalues: residual check failed for mode " +
                                     std::to_string(k));
        }
    }
    // Enforce exact conjugate symmetry (real input).
    std::vector<bool> used(eig.size(), false);
    for (size_t i = 0; i < eig.size(); ++i) {
        if (used[i] || eig[i].imag() == 0.0) continue;
        size_t best = i;
        double best_d = std::numeric_limits<double>::infinity();
        for (size_t j = 0; j < eig.size(); ++j) {
            if (j == i || used[j] || eig[j].imag() * eig[i].imag() >= 0.0) continue;
            double dj = std::abs(eig[j] - std::conj(eig[i]));
            if (dj < best_d) { best_d = dj; best = j; }
        }
        if (best != i) {
            Cplx mean = 0.5 * (eig[i] + std::conj(eig[best]));
            eig[i] = mean;
            eig[best] = std::conj(mean);
            used[i] = used[best] = true;
        }
    }
    return eig;
}

Cplx general_W_char_equation(const EnvModel& env, const RnnParams& p, Cplx lambda) {
    check_linear(p, "general_W_char_equation");
    require(!p.rank1(), "general_W_char_equation: full-W mode required");
    require(env.n() == 2 && env.A(0, 1) == 1.0 && env.A(0, 0) == 1.0 && env.A(1, 1) == 1.0 &&
                env.A(1, 0) == 0.0 && env.B(0, 0) == 0.0 && env.B(1, 0) == 1.0,
            "general_W_char_equation: derived for the double-integrator plant");
    Cplx one_m = 1.0 - lambda;
    if (std::abs(one_m) < 1e-12)
        throw std::invalid_argument("general_W_char_equation: lambda=1 makes the Schur pivot singular");
    Cplx factor = lambda / (one_m * one_m);
    Eigen::MatrixXcd S = p.W_full->cast<Cplx>();
    S += factor * (p.m.col(0) * p.z.col(0).transpose()).cast<Cplx>();
    S -= lambda * Eigen::MatrixXcd::Identity(p.N, p.N);
    return one_m * one_m * S.determinant();
}

CoupledSpectrum classify_spectrum(std::vector<Cplx> eig) {
    std::sort(eig.begin(), eig.end(), [](const Cplx& x, const Cplx& y) {
        double ax = std::abs(x), ay = std::abs(y);
        if (ax != ay) return ax > ay;
        return x.imag() > y.imag();
    });
    CoupledSpectrum s;
    s.eigenvalues = std::move(eig);
    s.spectral_radius = s.eigenvalues.empty() ? 0.0 : std::abs(s.eigenvalues.front());
    constexpr double im_tol = 1e-9;
    // Leading conjugate pair (only when the overall-largest mode is complex).
    if (!s.eigenvalues.empty() && std::abs(s.eigenvalues[0].imag()) > im_tol) {
        for (size_t j = 1; j < s.eigenvalues.size(); ++j) {
            if (std::abs(s.eigenvalues[j] - std::conj(s.eigenvalues[0])) <
                1e-9 * std::max(1.0, std::abs(s.eigenvalues[0]))) {
                s.dominant_pair = {0, static_cast<int>(j)};
                break;
            }
        }
    }
    double best = -1.0;
    for (size_t i = 0; i < s.eigenvalues.size(); ++i) {
        if (std::abs(s.eigenvalues[i].imag()) > im_tol) continue;
        if (std::abs(s.eigenvalues[i]) > best) {
            best = std::abs(s.eigenvalues[i]);
            s.lambda3 = static_cast<int>(i);
        }
    }
    return s;
}

CoupledSpectrum coupled_spectrum_rank1(const OrderParams& op) {
    auto coef = char_poly_rank1(op);
    auto roots = solve_cubic(coef[0], coef[1], coef[2], coef[3]);
    // P_eff adds one structural zero mode to the cubic roots.
    return classify_spectrum({roots[0], roots[1], roots[2], Cplx(0.0, 0.0)});
}

static bool is_canonical_double_integrator(const EnvModel& env) {
    return env.n() == 2 && env.n_inputs() == 1 && env.n_obs() == 1 &&
           env.A == Mat{{1.0, 1.0}, {0.0, 1.0}} && env.B == Mat{{0.0}, {1.0}} &&
           env.C == Mat{{1.0, 0.0}};
}

CoupledSpectrum coupled_spectrum(const EnvModel& env, const RnnParams& p) {
    if (p.rank1() && !p.time_mode.continuous && is_canonical_double_integrator(env))
        return coupled_spectrum_rank1(overlaps(p));
    return classify_spectrum(eigenvalues(build_P(env, p)));
}

std::vector<int> track_modes(const CoupledSpectrum& prev, const CoupledSpectrum& next) {
    size_t n = prev.eigenvalues.size();
    require(n == next.eigenvalues.size(), "track_modes: spectra must have equal size");
    std::vector<int> assign(n, -1);
    std::vector<bool> taken(n, false);
    constexpr double im_tol = 1e-9;
    auto conj_partner = [im_tol](const std::vector<Cplx>& eig, size_t i) -> int {
        if (std::abs(eig[i].imag()) <= im_tol) return -1;
        for (size_t j = 0; j < eig.size(); ++j)
            if (j != i && std::abs(eig[j] - std::conj(eig[i])) <=
                              1e-9 * std::max(1.0, std::abs(eig[i])))
                return static_cast<int>(j);
        return -1;
    };
    for (size_t round = 0; round < n; ++round) {
        double best = std::numeric_limits<double>::infinity();
        int bi = -1, bj = -1;
        for (size_t i = 0; i < n; ++i) {
            if (assign[i] >= 0) continue;
            for (size_t j = 0; j < n; ++j) {
                if (taken[j]) continue;
                double d = std::abs(prev.eigenvalues[i] - next.eigenvalues[j]);
                bool better = d < best - 1e-12;
                // Ambiguity within 1e-12 broken by descending real part.
                bool tie = std::abs(d - best) <= 1e-12 && bj >= 0 &&
                           next.eigenvalues[j].real() > next.eigenvalues[bj].real();
                if (better || tie) { best = d; bi = static_cast<int>(i); bj = static_cast<int>(j); }
            }
        }
        if (bi < 0) break;
        assign[bi] = bj;
        taken[bj] = true;
        int pi = conj_partner(prev.eigenvalues, bi);
        int pj = conj_partner(next.eigenvalues, bj);
        if (pi >= 0 && pj >= 0 && assign[pi] < 0 && !taken[pj]) {
            assign[pi] = pj;
            taken[pj] = true;
        }
    }
    return assign;
}

}  // namespace looplab
