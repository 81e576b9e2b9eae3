#pragma once

#include <optional>
#include <string>
#include <utility>

#include "looplab/rng.hpp"
#include "looplab/types.hpp"

namespace looplab {

enum class Activation { linear, tanh_ };

struct TimeMode {
    bool continuous = false;
    double dt = 0.1;
    double tau = 1.0;

    static TimeMode discrete() { return TimeMode{}; }
    static TimeMode ct(double dt, double tau) { return TimeMode{true, dt, tau}; }
    double leak() const { return continuous ? dt / tau : 1.0; }
};

/// RNN controller parameters. Exactly one of W_full / (u,v) is populated;
/// the rank-1 form keeps the hidden state in span{m, u} and exposes the
/// scalar overlaps used by the reduced coupled system.
struct RnnParams {
    int N = 0;
    std::optional<Mat> W_full;  // N x N
    std::optional<Vec> u, v;    // rank-1 factors, W = u v^T
    Mat m;                      // N x d_in input weights
    Mat z;                      // N x d_out output weights
    Activation activation = Activation::linear;
    TimeMode time_mode;
    double g = 0.0;             // initial recurrent strength (metadata)
    std::uint64_t seed = 0;     // init seed (metadata)

    bool rank1() const { return u.has_value(); }
    int d_in() const { return static_cast<int>(m.cols()); }
    int d_out() const { return static_cast<int>(z.cols()); }
    /// Materialized recurrent matrix (outer product in rank-1 mode).
    Mat W() const { return rank1() ? Mat((*u) * v->transpose()) : *W_full; }
    void validate() const;
};

struct AgentState {
    Vec h;
};

struct InitFlags {
    bool rank1 = false;
    Activation activation = Activation::linear;
    TimeMode time_mode;
};

/// m, z entries ~ N(0, 1/N); full W ~ N(0, g^2/N); rank-1 factors u, v each
/// ~ N(0, g/sqrt(N)) so the entrywise product variance matches g^2/N and the
/// nonzero eigenvalue of u v^T has scale g.
RnnParams init_rnn(int N, double g, int d_in, int d_out, const InitFlags& flags, Rng& rng);

/// One controller update: h' = phi(W h + m y), u = z^T h' (discrete) or the
/// leaky Euler variant in continuous mode.
std::pair<AgentState, Vec> rnn_step(const RnnParams& p, const AgentState& s, const Vec& y);

/// Scalar overlaps (z.m, z.u, v.m, v.u); defined for rank-1, d_in=d_out=1.
OrderParams overlaps(const RnnParams& p);

std::string to_json(const RnnParams& p);
RnnParams rnn_from_json(const std::string& text);
void save_checkpoint(const RnnParams& p, const std::string& path);
RnnParams load_checkpoint(const std::string& path);

}  // namespace looplab
