#include "looplab/agent.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace looplab {

void RnnParams::validate() const {
    require(N >= 1, "RnnParams: N must be >= 1");
    require(W_full.has_value() != u.has_value(),
            "RnnParams: exactly one of W_full / (u,v) must be populated");
    if (u) {
        require(v.has_value(), "RnnParams: rank-1 mode needs both u and v");
        require(u->size() == N && v->size() == N, "RnnParams: u/v dimension mismatch");
        require(u->allFinite() && v->allFinite(), "RnnParams: non-finite rank-1 factors");
    } else {
        require(W_full->rows() == N && W_full->cols() == N, "RnnParams: W dimension mismatch");
        require(W_full->allFinite(), "RnnParams: non-finite W");
    }
    require(m.rows() == N && z.rows() == N, "RnnParams: m/z row mismatch");
    require(m.allFinite() && z.allFinite(), "RnnParams: non-finite m/z");
    if (time_mode.continuous)
        require(time_mode.dt > 0.0 && time_mode.dt <= time_mode.tau,
                "RnnParams: continuous mode needs 0 < dt <= tau");
}

static void fill_gaussian(Mat& m, double stddev, Rng& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = stddev * gauss(rng);
}

RnnParams init_rnn(int N, double g, int d_in, int d_out, const InitFlags& flags, Rng& rng) {
    require(N >= 1, "init_rnn: N must be >= 1");
    require(g >= 0.0, "init_rnn: g must be >= 0");
    require(d_in >= 1 && d_out >= 1, "init_rnn: need d_in, d_out >= 1");
    RnnParams p;
    p.N = N;
    p.activation = flags.activation;
    p.time_mode = flags.time_mode;
    p.g = g;
    double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(N));
    p.m = Mat(N, d_in);
    fill_gaussian(p.m, inv_sqrt_n, rng);
    p.z = Mat(N, d_out);
    fill_gaussian(p.z, inv_sqrt_n, rng);
    if (flags.rank1) {
        // var(u_i) = var(v_i) = g/sqrt(N) makes var(u_i v_j) = g^2/N.
        double s = std::sqrt(g * inv_sqrt_n);
        Mat uu(N, 1), vv(N, 1);
        fill_gaussian(uu, s, rng);
        fill_gaussian(vv, s, rng);
        p.u = uu.col(0);
        p.v = vv.col(0);
    } else {
        Mat W(N, N);
        fill_gaussian(W, g * inv_sqrt_n, rng);
        p.W_full = std::move(W);
    }
    p.validate();
    return p;
}

std::pair<AgentState, Vec> rnn_step(const RnnParams& p, const AgentState& s, const Vec& y) {
    require(s.h.size() == p.N, "rnn_step: hidden state size mismatch");
    require(y.size() == p.d_in(), "rnn_step: input size mismatch");
    if (!y.allFinite()) throw NumericalError("rnn_step: non-finite input");
    Vec pre;
    if (p.rank1())
        pre = (*p.u) * p.v->dot(s.h) + p.m * y;
    else
        pre = (*p.W_full) * s.h + p.m * y;
    Vec phi = (p.activation == Activation::tanh_) ? Vec(pre.array().tanh()) : pre;
    AgentState next;
    double a = p.time_mode.leak();
    next.h = p.time_mode.continuous ? Vec((1.0 - a) * s.h + a * phi) : phi;
    return {next, p.z.transpose() * next.h};
}

OrderParams overlaps(const RnnParams& p) {
    if (!p.rank1())
        throw std::invalid_argument(
            "overlaps: undefined for full-W mode (use the spectral module's general path)");
    require(p.d_in() == 1 && p.d_out() == 1, "overlaps: need scalar input and output");
    Vec mv = p.m.col(0), zv = p.z.col(0);
    OrderParams op;
    op.sigma_zm = zv.dot(mv);
    op.sigma_zu = zv.dot(*p.u);
    op.sigma_vm = p.v->dot(mv);
    op.sigma_vu = p.v->dot(*p.u);
    return op;
}

// ---- JSON checkpoint schema -------------------------------------------------
// {"W": [[..]] | "u": [..], "v": [..], "m": [[..]], "z": [[..]],
//  "activation": "linear"|"tanh", "time_mode": "discrete"|{"dt":..,"tau":..},
//  "g": .., "seed": ..}

using nlohmann::json;

static json mat_to_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

static Mat mat_from_json(const json& j) {
    require(j.is_array() && !j.empty(), "checkpoint: matrix field must be a non-empty array");
    size_t rows = j.size(), cols = j[0].size();
    Mat m(rows, cols);
    for (size_t i = 0; i < rows; ++i) {
        require(j[i].size() == cols, "checkpoint: ragged matrix rows");
        for (size_t c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
    }
    return m;
}

std::string to_json(const RnnParams& p) {
    p.validate();
    json j;
    if (p.rank1()) {
        j["u"] = std::vector<double>(p.u->begin(), p.u->end());
        j["v"] = std::vector<double>(p.v->begin(), p.v->end());
    } else {
        j["W"] = mat_to_json(*p.W_full);
    }
    j["m"] = mat_to_json(p.m);
    j["z"] = mat_to_json(p.z);
    j["activation"] = p.activation == Activation::tanh_ ? "tanh" : "linear";
    if (p.time_mode.continuous)
        j["time_mode"] = json{{"dt", p.time_mode.dt}, {"tau", p.time_mode.tau}};
    else
        j["time_mode"] = "discrete";
    j["g"] = p.g;
    j["seed"] = p.seed;
    return j.dump(2);
}

RnnParams rnn_from_json(const std::string& text) {
    json j = json::parse(text);
    RnnParams p;
    p.m = mat_from_json(j.at("m"));
    p.z = mat_from_json(j.at("z"));
    p.N = static_cast<int>(p.m.rows());
    if (j.contains("W")) {
        p.W_full = mat_from_json(j.at("W"));
    } else {
        auto uu = j.at("u").get<std::vector<double>>();
        auto vv = j.at("v").get<std::vector<double>>();
        p.u = Eigen::Map<const Vec>(uu.data(), uu.size());
        p.v = Eigen::Map<const Vec>(vv.data(), vv.size());
    }
    std::string act = j.at("activation").get<std::string>();
    require(act == "linear" || act == "tanh", "checkpoint: unknown activation " + act);
    p.activation = act == "tanh" ? Activation::tanh_ : Activation::linear;
    const json& tm = j.at("time_mode");
    if (tm.is_string()) {
        require(tm.get<std::string>() == "discrete", "checkpoint: unknown time_mode");
        p.time_mode = TimeMode::discrete();
    } else {
        p.time_mode = TimeMode::ct(tm.at("dt").get<double>(), tm.at("tau").get<double>());
    }
    p.g = j.value("g", 0.0);
    p.seed = j.value("seed", 0ull);
    p.validate();
    return p;
}

void save_checkpoint(const RnnParams& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("save_checkpoint: cannot open " + path);
    out << to_json(p) << "\n";
}

RnnParams load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("load_checkpoint: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return rnn_from_json(text);
}

}  // namespace looplab
