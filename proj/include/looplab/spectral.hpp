#pragma once

#include <array>
#include <optional>
#include <vector>

#include "looplab/agent.hpp"
#include "looplab/linenv.hpp"
#include "looplab/types.hpp"

namespace looplab {

/// Eigenvalues of a coupled agent-environment matrix with the modes that the
/// stage analysis tracks: the leading complex-conjugate pair and the real
/// root of the rank-1 reduction.
struct CoupledSpectrum {
    std::vector<Cplx> eigenvalues;          // sorted by (|l| desc, Im desc)
    std::optional<std::pair<int, int>> dominant_pair;  // indices of leading conjugate pair
    std::optional<int> lambda3;             // index of tracked real root
    double spectral_radius = 0.0;

    /// Positive-imaginary representative of the dominant pair (if any).
    std::optional<Cplx> dominant() const {
        if (!dominant_pair) return std::nullopt;
        return eigenvalues[dominant_pair->first];
    }
};

/// Joint transition matrix of plant + agent (+ reference when supplied).
/// Linear activation only; discrete and leaky-Euler continuous block forms.
Mat build_P(const EnvModel& env, const RnnParams& p);
Mat build_P(const EnvModel& env, const RnnParams& p, const ReferenceModel& ref);

/// The exact 4x4 reduction of P under rank-1 connectivity, parameterized by
/// the four overlaps.
Mat build_P_eff(const OrderParams& op);

/// Monic cubic (a,b,c,d) = (1, -svu-2, 2svu-szm+1, svu*szm-svu-szu*svm)
/// whose roots are the nontrivial eigenvalues of P in rank-1 mode.
std::array<double, 4> char_poly_rank1(const OrderParams& op);

/// Closed-form cubic roots (trig branch for three reals, Cardano otherwise),
/// one Newton polish per root, exact conjugate symmetrization, sorted by
/// (|l| desc, Im desc).
std::array<Cplx, 3> solve_cubic(double a, double b, double c, double d);

/// Dense nonsymmetric eigenvalues with enforced conjugate symmetry. When
/// validate_residuals is set, checks ||Mq - lq|| <= 1e-8 ||M|| per pair.
std::vector<Cplx> eigenvalues(const Mat& M, bool validate_residuals = false);

/// Schur-reduced characteristic residual (1-l)^2 det(W + l/(1-l)^2 m z^T - l I)
/// for the double-integrator plant with a general (full) W; zero iff l is a
/// nontrivial eigenvalue of P.
Cplx general_W_char_equation(const EnvModel& env, const RnnParams& p, Cplx lambda);

/// Classify a sorted spectrum into dominant pair / tracked real root.
CoupledSpectrum classify_spectrum(std::vector<Cplx> eigenvalues);

/// Spectrum of the coupled system for rank-1 double-integrator agents via the
/// cubic (exact by spectral identity), dense eigendecomposition otherwise.
CoupledSpectrum coupled_spectrum(const EnvModel& env, const RnnParams& p);
CoupledSpectrum coupled_spectrum_rank1(const OrderParams& op);

/// Greedy nearest-neighbor mode matching between consecutive spectra with
/// conjugate-pair coherence; returns for each prev index the next index.
std::vector<int> track_modes(const CoupledSpectrum& prev, const CoupledSpectrum& next);

}  // namespace looplab
