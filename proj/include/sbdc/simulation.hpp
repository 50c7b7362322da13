#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sbdc/attack.hpp"
#include "sbdc/coding.hpp"
#include "sbdc/errors.hpp"
#include "sbdc/graph.hpp"

namespace sbdc::sim {

using graph::Edge;
using graph::Graph;
using graph::Matrix;
using graph::Vector;

struct Thresholds {
    double convergence_tol = 1e-6;
    double escape = 1e6;
};

enum class VerdictKind { Converged, Diverged, Undecided };

inline const char* to_string(VerdictKind kind) {
    switch (kind) {
        case VerdictKind::Converged: return "Converged";
        case VerdictKind::Diverged: return "Diverged";
        default: return "Undecided";
    }
}

struct Verdict {
    VerdictKind kind = VerdictKind::Undecided;
    Vector limit;  // per-coordinate agreement value, Converged only
    double escape_time = std::numeric_limits<double>::quiet_NaN();
    double disagreement_final = 0.0;
};

// Sampled run of one dynamics; states are agent-major (agent i holds entries
// [i*d, (i+1)*d)) and never contain non-finite values.
struct Trajectory {
    int n = 0;
    int d = 1;
    std::vector<double> times;
    std::vector<Vector> states;
    std::vector<double> disagreement;
    bool nonfinite = false;
    double escape_time = std::numeric_limits<double>::quiet_NaN();
    Verdict verdict;
};

inline Verdict classify(const Trajectory& traj, const Thresholds& thresholds = {}) {
    Verdict v;
    v.disagreement_final = traj.disagreement.empty() ? 0.0 : traj.disagreement.back();
    if (traj.nonfinite || !std::isnan(traj.escape_time)) {
        v.kind = VerdictKind::Diverged;
        v.escape_time = traj.escape_time;
        return v;
    }
    std::size_t count = traj.times.size();
    for (std::size_t i = 0; i < count; ++i) {
        if (traj.states[i].cwiseAbs().maxCoeff() > thresholds.escape) {
            v.kind = VerdictKind::Diverged;
            v.escape_time = traj.times[i];
            return v;
        }
    }
    if (count < 2) throw ValidationError("classification needs at least two samples");
    std::size_t tail = std::max<std::size_t>(1, count / 20);
    bool settled = true;
    for (std::size_t i = count - tail; i < count; ++i)
        settled = settled && traj.disagreement[i] < thresholds.convergence_tol;
    if (settled) {
        v.kind = VerdictKind::Converged;
        const Vector& last = traj.states.back();
        v.limit = Vector::Zero(traj.d);
        for (int i = 0; i < traj.n; ++i)
            for (int c = 0; c < traj.d; ++c) v.limit(c) += last(i * traj.d + c);
        v.limit /= static_cast<double>(traj.n);
        return v;
    }
    std::size_t window = std::max<std::size_t>(3, count / 5);
    if (window <= count) {
        bool growing = true;
        for (std::size_t i = count - window + 1; i < count; ++i)
            growing = growing && traj.disagreement[i] > traj.disagreement[i - 1];
        if (growing) {
            v.kind = VerdictKind::Diverged;
            return v;
        }
    }
    v.kind = VerdictKind::Undecided;
    return v;
}

namespace detail {

constexpr long long max_stored_samples = 10000;

inline Vector flatten(const Matrix& x) {
    Vector out(x.rows() * x.cols());
    for (int i = 0; i < x.rows(); ++i)
        for (int c = 0; c < x.cols(); ++c) out(i * x.cols() + c) = x(i, c);
    return out;
}

inline Matrix unflatten(const Graph& g, const Vector& x0) {
    if (x0.size() < g.n || x0.size() % g.n != 0)
        throw ValidationError("state length " + std::to_string(x0.size()) +
                              " is not a positive multiple of the node count " +
                              std::to_string(g.n));
    if (!x0.allFinite()) throw NonFiniteState("initial state contains non-finite entries");
    int d = static_cast<int>(x0.size()) / g.n;
    Matrix out(g.n, d);
    for (int i = 0; i < g.n; ++i)
        for (int c = 0; c < d; ++c) out(i, c) = x0(i * d + c);
    return out;
}

inline double disagreement(const Matrix& x) {
    Eigen::RowVectorXd mean = x.colwise().mean();
    double worst = 0.0;
    for (int i = 0; i < x.rows(); ++i) worst = std::max(worst, (x.row(i) - mean).norm());
    return worst;
}

// Decimating sample store with escape and non-finite detection; every step is
// inspected even when it is not stored.
struct Recorder {
    Trajectory traj;
    Thresholds thresholds;
    long long stride = 1;

    Recorder(int n, int d, long long total_steps, const Thresholds& th) : thresholds(th) {
        traj.n = n;
        traj.d = d;
        stride = std::max<long long>(1, (total_steps + max_stored_samples) / max_stored_samples);
    }

    bool record(long long k, long long last, double t, const Matrix& x) {
        if (!x.allFinite()) {
            traj.nonfinite = true;
            traj.escape_time = t;
            return false;
        }
        bool escaped = x.cwiseAbs().maxCoeff() > thresholds.escape;
        if (k % stride == 0 || k == last || escaped) {
            traj.times.push_back(t);
            traj.states.push_back(flatten(x));
            traj.disagreement.push_back(disagreement(x));
        }
        if (escaped) {
            traj.escape_time = t;
            return false;
        }
        return true;
    }
};

// Classical fixed-step 4th-order integration of x' = a x + c.
inline Trajectory integrate_ct(const Matrix& a, const Matrix& c, const Matrix& x0, double horizon,
                               double dt, const Thresholds& thresholds) {
    if (!(dt > 0.0)) throw ValidationError("time step must be positive");
    if (!(horizon >= dt)) throw ValidationError("horizon must cover at least one step");
    long long nsteps = static_cast<long long>(std::ceil(horizon / dt - 1e-9));
    Recorder rec(static_cast<int>(x0.rows()), static_cast<int>(x0.cols()), nsteps, thresholds);
    Matrix x = x0;
    if (rec.record(0, nsteps, 0.0, x)) {
        for (long long k = 1; k <= nsteps; ++k) {
            Matrix k1 = a * x + c;
            Matrix k2 = a * (x + (0.5 * dt) * k1) + c;
            Matrix k3 = a * (x + (0.5 * dt) * k2) + c;
            Matrix k4 = a * (x + dt * k3) + c;
            x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (!rec.record(k, nsteps, static_cast<double>(k) * dt, x)) break;
        }
    }
    rec.traj.verdict = classify(rec.traj, thresholds);
    return rec.traj;
}

// Forward iteration of x+ = x + epsilon (a x + c); time stamps are k*epsilon.
inline Trajectory integrate_dt(const Matrix& a, const Matrix& c, const Matrix& x0,
                               long long steps, double epsilon, const Thresholds& thresholds) {
    if (!(epsilon > 0.0)) throw ValidationError("step size must be positive");
    if (steps < 1) throw ValidationError("step count must be positive");
    Recorder rec(static_cast<int>(x0.rows()), static_cast<int>(x0.cols()), steps, thresholds);
    Matrix x = x0;
    if (rec.record(0, steps, 0.0, x)) {
        for (long long k = 1; k <= steps; ++k) {
            x += epsilon * (a * x + c);
            if (!rec.record(k, steps, static_cast<double>(k) * epsilon, x)) break;
        }
    }
    rec.traj.verdict = classify(rec.traj, thresholds);
    return rec.traj;
}

inline Vector resolved_weights(const Graph& g, const coding::CodingAssignment& coding,
                               const coding::Codeword& theta,
                               const std::optional<attack::AttackSpec>& atk) {
    return atk ? attack::decode_weights(g, coding, theta, *atk)
               : coding::decode_weights(g, coding, theta);
}

}  // namespace detail

inline Trajectory simulate_ct(const Graph& g, const coding::CodingAssignment& coding,
                              const coding::Codeword& theta,
                              const std::optional<attack::AttackSpec>& atk, const Vector& x0,
                              double horizon, double dt = 1e-3, const Thresholds& thresholds = {}) {
    Matrix x = detail::unflatten(g, x0);
    Matrix a = -graph::laplacian(g, detail::resolved_weights(g, coding, theta, atk));
    return detail::integrate_ct(a, Matrix::Zero(g.n, x.cols()), x, horizon, dt, thresholds);
}

inline Trajectory simulate_dt(const Graph& g, const coding::CodingAssignment& coding,
                              const coding::Codeword& theta,
                              const std::optional<attack::AttackSpec>& atk, const Vector& x0,
                              long long steps, double epsilon, const Thresholds& thresholds = {}) {
    Matrix x = detail::unflatten(g, x0);
    Matrix a = -graph::laplacian(g, detail::resolved_weights(g, coding, theta, atk));
    return detail::integrate_dt(a, Matrix::Zero(g.n, x.cols()), x, steps, epsilon, thresholds);
}

// Leader-follower configuration: column l of input_gain feeds leader l's
// constant input row into the network.
struct SanConfig {
    std::vector<int> leaders;  // 1-based labels, ascending
    Matrix input_gain;         // n x |leaders|, nonnegative, leader rows nonzero
    Matrix input;              // |leaders| x d
};

inline SanConfig make_san_config(const Graph& g, const std::vector<int>& leaders,
                                 const Matrix& input_gain, const Matrix& input) {
    if (leaders.empty()) throw ValidationError("leader set is empty");
    SanConfig san;
    san.leaders = leaders;
    std::sort(san.leaders.begin(), san.leaders.end());
    for (std::size_t k = 0; k < san.leaders.size(); ++k) {
        if (san.leaders[k] < 1 || san.leaders[k] > g.n)
            throw ValidationError("leader " + std::to_string(san.leaders[k]) +
                                  " outside the node range");
        if (k > 0 && san.leaders[k] == san.leaders[k - 1])
            throw ValidationError("leader " + std::to_string(san.leaders[k]) + " listed twice");
    }
    if (input_gain.rows() != g.n || input_gain.cols() != static_cast<int>(san.leaders.size()))
        throw ValidationError("input gain matrix must be node count by leader count");
    if ((input_gain.array() < 0.0).any())
        throw ValidationError("input gains must be nonnegative");
    for (int i = 0; i < g.n; ++i) {
        bool is_leader =
            std::binary_search(san.leaders.begin(), san.leaders.end(), i + 1);
        bool fed = (input_gain.row(i).array() != 0.0).any();
        if (fed != is_leader)
            throw ValidationError("input gain row " + std::to_string(i + 1) +
                                  " must be nonzero exactly for leaders");
    }
    if (input.rows() != static_cast<int>(san.leaders.size()) || input.cols() < 1)
        throw ValidationError("input matrix must hold one row per leader");
    san.input_gain = input_gain;
    san.input = input;
    return san;
}

struct CtParams {
    double horizon = 0.0;
    double dt = 1e-3;
};

struct DtParams {
    long long steps = 0;
    double epsilon = 0.0;
};

namespace detail {

// Grounded Laplacian: the leader input gains act as weighted self loops.
inline Matrix san_matrix(const Graph& g, const Vector& weights, const SanConfig& san) {
    Matrix lb = graph::laplacian(g, weights);
    lb += Matrix(Vector(san.input_gain.rowwise().sum()).asDiagonal());
    return lb;
}

inline void check_san_dims(const SanConfig& san, const Matrix& x) {
    if (san.input.cols() != x.cols())
        throw ValidationError("leader input dimension does not match the state dimension");
}

}  // namespace detail

inline Trajectory simulate_san(const Graph& g, const coding::CodingAssignment& coding,
                               const coding::Codeword& theta,
                               const std::optional<attack::AttackSpec>& atk, const SanConfig& san,
                               const Vector& x0, const CtParams& params,
                               const Thresholds& thresholds = {}) {
    Matrix x = detail::unflatten(g, x0);
    detail::check_san_dims(san, x);
    Matrix lb = detail::san_matrix(g, detail::resolved_weights(g, coding, theta, atk), san);
    return detail::integrate_ct(-lb, san.input_gain * san.input, x, params.horizon, params.dt,
                                thresholds);
}

inline Trajectory simulate_san(const Graph& g, const coding::CodingAssignment& coding,
                               const coding::Codeword& theta,
                               const std::optional<attack::AttackSpec>& atk, const SanConfig& san,
                               const Vector& x0, const DtParams& params,
                               const Thresholds& thresholds = {}) {
    Matrix x = detail::unflatten(g, x0);
    detail::check_san_dims(san, x);
    Matrix lb = detail::san_matrix(g, detail::resolved_weights(g, coding, theta, atk), san);
    return detail::integrate_dt(-lb, san.input_gain * san.input, x, params.steps, params.epsilon,
                                thresholds);
}

struct DriftCheck {
    Vector sbdc;       // drift assembled edge by edge from decoded fragments
    Vector laplacian;  // -L(decoded weights) x
    double max_diff = 0.0;
};

// The two assembly routes must agree identically: relative state differences
// weighted by decoded fragments are exactly the weighted Laplacian action.
inline DriftCheck sbdc_drift_oracle(const Graph& g, const coding::CodingAssignment& coding,
                                    const coding::Codeword& theta, const Vector& x) {
    Matrix xm = detail::unflatten(g, x);
    Matrix drift = Matrix::Zero(g.n, xm.cols());
    for (int k = 0; k < g.m(); ++k) {
        const Edge& e = g.edges[k];
        double w = coding.at(e)(theta.at(e));
        Eigen::RowVectorXd diff = xm.row(e.u - 1) - xm.row(e.v - 1);
        drift.row(e.u - 1) -= w * diff;
        drift.row(e.v - 1) += w * diff;
    }
    DriftCheck out;
    out.sbdc = detail::flatten(drift);
    out.laplacian = detail::flatten(
        Matrix(-graph::laplacian(g, coding::decode_weights(g, coding, theta)) * xm));
    out.max_diff = (out.sbdc - out.laplacian).cwiseAbs().maxCoeff();
    return out;
}

}  // namespace sbdc::sim
