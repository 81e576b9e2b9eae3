#include "looplab/linenv.hpp"

#include <cmath>
#include <numbers>

namespace looplab {

EnvModel make_double_integrator(double beta) {
    require(beta >= 0.0, "make_double_integrator: beta must be >= 0");
    EnvModel env;
    env.A = Mat{{1.0, 1.0}, {0.0, 1.0}};
    env.B = Mat{{0.0}, {1.0}};
    env.C = Mat{{1.0, 0.0}};
    env.beta = beta;
    env.x_star = Vec::Zero(2);
    return env;
}

EnvModel make_double_integrator_ct(double beta, double dt) {
    require(beta >= 0.0, "make_double_integrator_ct: beta must be >= 0");
    require(dt > 0.0, "make_double_integrator_ct: dt must be > 0");
    EnvModel env;
    env.A = Mat{{1.0, dt}, {0.0, 1.0}};
    env.B = Mat{{0.0}, {dt}};
    env.C = Mat{{1.0, 0.0}};
    env.beta = beta;
    env.x_star = Vec::Zero(2);
    return env;
}

EnvModel make_k_integrator(int k, int b, int c) {
    require(k >= 1, "make_k_integrator: k must be >= 1");
    require(b >= 1 && b <= k, "make_k_integrator: need 1 <= b <= k");
    require(c >= 1 && c <= k, "make_k_integrator: need 1 <= c <= k");
    EnvModel env;
    env.A = Mat::Identity(k, k);
    for (int i = 0; i + 1 < k; ++i) env.A(i, i + 1) = 1.0;
    env.B = Mat::Zero(k, b);
    for (int j = 0; j < std::min(k, b); ++j) env.B(k - 1 - j, j) = 1.0;
    env.C = Mat::Zero(c, k);
    for (int i = 0; i < c; ++i) env.C(i, i) = 1.0;
    env.beta = 0.0;
    env.x_star = Vec::Zero(k);
    return env;
}

EnvModel make_tracking_plant(double dt) {
    require(dt > 0.0, "make_tracking_plant: dt must be > 0");
    EnvModel env;
    env.A = Mat::Zero(4, 4);
    env.B = Mat::Zero(4, 2);
    for (int axis = 0; axis < 2; ++axis) {
        int i = 2 * axis;
        env.A(i, i) = 1.0;
        env.A(i, i + 1) = dt;
        env.A(i + 1, i + 1) = 1.0;
        env.B(i + 1, axis) = dt;
    }
    env.C = Mat{{1.0, 0.0, 0.0, 0.0}, {0.0, 0.0, 1.0, 0.0}};
    env.beta = 0.0;
    env.state_clamp = 10.0;
    env.x_star = Vec::Zero(4);
    return env;
}

Vec ReferenceModel::initial_state() const {
    Vec r(8);
    for (int j = 0; j < 4; ++j) {
        r[2 * j] = amplitude[j] * std::cos(phase[j]);
        r[2 * j + 1] = -amplitude[j] * omega[j] * std::sin(phase[j]);
    }
    return r;
}

double ReferenceModel::ramp(int t) const {
    if (ramp_duration <= 0.0) return 1.0;
    return std::min(1.0, t * dt / ramp_duration);
}

ReferenceModel make_tracking_reference(double dt, double ramp_duration) {
    require(dt > 0.0, "make_tracking_reference: dt must be > 0");
    ReferenceModel ref;
    ref.dt = dt;
    ref.ramp_duration = ramp_duration;
    const double two_pi = 2.0 * std::numbers::pi;
    // Oscillator bank layout follows the reference generator: x axis carries
    // (w1, w3), y axis carries (w2, w4).
    ref.omega = {two_pi * 0.10, two_pi * 0.30, two_pi * 0.20, two_pi * 0.40};
    ref.amplitude = {2.31, 2.31, 2.31, 2.31};
    ref.phase = {0.0, 0.0, 0.0, 0.0};
    ref.R_d = Mat::Zero(8, 8);
    for (int j = 0; j < 4; ++j) {
        // exp(dt * [[0,1],[-w^2,0]]) in closed form per 2x2 block.
        double w = ref.omega[j];
        double cw = std::cos(w * dt), sw = std::sin(w * dt);
        int i = 2 * j;
        ref.R_d(i, i) = cw;
        ref.R_d(i, i + 1) = sw / w;
        ref.R_d(i + 1, i) = -w * sw;
        ref.R_d(i + 1, i + 1) = cw;
    }
    ref.C_R = Mat::Zero(2, 8);
    ref.C_R(0, 0) = 1.0;
    ref.C_R(0, 2) = 1.0;
    ref.C_R(1, 4) = 1.0;
    ref.C_R(1, 6) = 1.0;
    return ref;
}

void resample_phases(ReferenceModel& ref, Rng& rng) {
    std::uniform_real_distribution<double> uni(-std::numbers::pi, std::numbers::pi);
    for (int j = 0; j < 4; ++j) ref.phase[j] = uni(rng);
}

EnvState env_step(const EnvModel& env, const EnvState& state, const Vec& u) {
    require(state.x.size() == env.n(), "env_step: state dimension mismatch");
    require(u.size() == env.n_inputs(), "env_step: control dimension mismatch");
    if (!u.allFinite())
        throw NumericalError("env_step: non-finite control at step t=" + std::to_string(state.t));
    if (!state.x.allFinite())
        throw NumericalError("env_step: non-finite state at step t=" + std::to_string(state.t));
    EnvState next;
    next.x = env.A * state.x + env.B * u;
    if (env.state_clamp) {
        double c = *env.state_clamp;
        next.x = next.x.cwiseMax(-c).cwiseMin(c);
    }
    if (env.divergence_guard && next.x.cwiseAbs().maxCoeff() > *env.divergence_guard)
        throw NumericalError("env_step: state exceeded divergence guard at step t=" +
                             std::to_string(state.t + 1));
    next.t = state.t + 1;
    return next;
}

Vec observe(const EnvModel& env, const EnvState& state) {
    require(state.x.size() == env.n(), "observe: state dimension mismatch");
    return env.C * state.x;
}

double episode_loss(const std::vector<Vec>& states, const std::vector<Vec>& controls,
                    const EnvModel& env) {
    require(!states.empty(), "episode_loss: empty state sequence");
    require(states.size() == controls.size(), "episode_loss: sequence length mismatch");
    double state_err = 0.0, ctrl = 0.0;
    for (const Vec& x : states) state_err += (x - env.x_star).squaredNorm();
    for (const Vec& u : controls) ctrl += u.squaredNorm();
    return state_err / static_cast<double>(states.size()) + env.beta * ctrl;
}

double episode_loss(const std::vector<Vec>& states, const std::vector<Vec>& controls,
                    const EnvModel& env, const std::vector<Vec>& ref_positions) {
    require(!states.empty(), "episode_loss: empty state sequence");
    require(states.size() == controls.size() && states.size() == ref_positions.size(),
            "episode_loss: sequence length mismatch");
    double err = 0.0, ctrl = 0.0;
    for (size_t i = 0; i < states.size(); ++i)
        err += (env.C * states[i] - ref_positions[i]).squaredNorm();
    for (const Vec& u : controls) ctrl += u.squaredNorm();
    return err / static_cast<double>(states.size()) + env.beta * ctrl;
}

Mat reference_trajectory(const ReferenceModel& ref, int n_samples) {
    require(n_samples >= 1, "reference_trajectory: need n_samples >= 1");
    Mat out(2, n_samples);
    for (int t = 0; t < n_samples; ++t) {
        double time = t * ref.dt;
        double rx = ref.amplitude[0] * std::cos(ref.omega[0] * time + ref.phase[0]) +
                    ref.amplitude[1] * std::cos(ref.omega[1] * time + ref.phase[1]);
        double ry = ref.amplitude[2] * std::cos(ref.omega[2] * time + ref.phase[2]) +
                    ref.amplitude[3] * std::cos(ref.omega[3] * time + ref.phase[3]);
        double a = ref.ramp(t);
        out(0, t) = a * rx;
        out(1, t) = a * ry;
    }
    return out;
}

Mat sample_x0_batch(const EnvModel& env, int batch, Rng& rng) {
    require(batch >= 1, "sample_x0_batch: batch must be >= 1");
    std::uniform_real_distribution<double> uni(-2.0, 2.0);
    Mat x0(env.n(), batch);
    for (int j = 0; j < batch; ++j)
        for (int i = 0; i < env.n(); ++i) x0(i, j) = uni(rng);
    return x0;
}

}  // namespace looplab
