#pragma once

#include <optional>
#include <vector>

#include "looplab/rng.hpp"
#include "looplab/types.hpp"

namespace looplab {

/// Linear plant x' = A x + B u, y = C x with quadratic task cost.
struct EnvModel {
    Mat A;  // n x n state transition
    Mat B;  // n x b input map
    Mat C;  // c x n observation map
    double beta = 0.0;                    // control-effort weight
    std::optional<double> state_clamp;    // symmetric per-entry bound
    std::optional<double> divergence_guard;  // raises if |x_i| exceeds this
    Vec x_star;                           // target state (zero for integrators)

    int n() const { return static_cast<int>(A.rows()); }
    int n_inputs() const { return static_cast<int>(B.cols()); }
    int n_obs() const { return static_cast<int>(C.rows()); }
    bool partially_observable() const { return n_obs() < n(); }
};

struct EnvState {
    Vec x;
    int t = 0;
};

/// Sum-of-two-sinusoids reference generator for the 2D tracking task,
/// kept as a discretized linear oscillator bank so the closed-loop
/// system stays linear. Oscillator order: (w1, w3) on x, (w2, w4) on y.
struct ReferenceModel {
    Mat R_d;                  // 8x8 discretized block-oscillator transition
    Mat C_R;                  // 2x8 output map to (r_x, r_y)
    std::array<double, 4> omega{};      // w1..w4 (rad/s)
    std::array<double, 4> amplitude{};  // per-oscillator amplitudes {a1,a2,a1,a2}
    std::array<double, 4> phase{};      // phi1..phi4 (rad)
    double ramp_duration = 1.0;         // seconds of linear amplitude ramp
    double dt = 0.1;                    // seconds per step

    /// Oscillator state at t=0 for the stored amplitudes/phases.
    Vec initial_state() const;
    /// Amplitude ramp factor at step index t.
    double ramp(int t) const;
};

EnvModel make_double_integrator(double beta);
/// Euler-discretized double integrator used with the continuous-time agent.
EnvModel make_double_integrator_ct(double beta, double dt);
EnvModel make_k_integrator(int k, int b, int c);
/// Per-axis Euler plant (x, xdot, y, ydot) with clamp at +/-10.
EnvModel make_tracking_plant(double dt);

/// Canonical tracking reference: a1=a2=2.31, omega = 2*pi*{0.1,0.2,0.3,0.4}.
ReferenceModel make_tracking_reference(double dt, double ramp_duration);

/// Resample reference phases uniformly from (-pi, pi).
void resample_phases(ReferenceModel& ref, Rng& rng);

EnvState env_step(const EnvModel& env, const EnvState& state, const Vec& u);
Vec observe(const EnvModel& env, const EnvState& state);

/// Eq.-style task cost: mean squared distance to x* plus beta-weighted
/// control energy (the control sum is not averaged over time).
double episode_loss(const std::vector<Vec>& states, const std::vector<Vec>& controls,
                    const EnvModel& env);
/// Tracking variant: squared position error against per-step 2D reference points.
double episode_loss(const std::vector<Vec>& states, const std::vector<Vec>& controls,
                    const EnvModel& env, const std::vector<Vec>& ref_positions);

/// Ramped closed-form reference positions, 2 x n_samples, sampled at dt.
Mat reference_trajectory(const ReferenceModel& ref, int n_samples);

/// Uniform x0 ~ U([-2,2]^n) batch as columns (integrator tasks).
Mat sample_x0_batch(const EnvModel& env, int batch, Rng& rng);

}  // namespace looplab
