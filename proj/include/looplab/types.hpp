#pragma once

#include <Eigen/Dense>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace looplab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Cplx = std::complex<double>;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Raised when a run configuration fails validation (CLI exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when a numerical routine fails to converge or produces
/// non-finite values (CLI exit code 3).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The four scalar overlaps among the input, output, and rank-1
/// connectivity vectors that parameterize the reduced coupled system.
struct OrderParams {
    double sigma_zm = 0.0;
    double sigma_zu = 0.0;
    double sigma_vm = 0.0;
    double sigma_vu = 0.0;

    bool finite() const {
        return std::isfinite(sigma_zm) && std::isfinite(sigma_zu) &&
               std::isfinite(sigma_vm) && std::isfinite(sigma_vu);
    }
};

inline bool all_finite(const Mat& m) { return m.allFinite(); }

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace looplab
