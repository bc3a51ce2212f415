#pragma once

// Fixed-step classical RK4 on the stacked prolonged state (x, dx), the
// dissipation-inequality residual along recorded trajectories, the
// displacement finite-difference oracle for the variational system, and
// ensemble contraction/entrainment runs. No adaptive stepping: synchronized
// grids keep the supply quadrature and determinism trivial.

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "diffpass/linalg.hpp"
#include "diffpass/model.hpp"
#include "diffpass/parallel.hpp"
#include "diffpass/prolong.hpp"
#include "diffpass/signal.hpp"
#include "diffpass/storage.hpp"

namespace diffpass {

struct DivergedError : std::runtime_error {
    double time;
    explicit DivergedError(double t)
        : std::runtime_error("trajectory diverged at t = " + std::to_string(t)), time(t) {}
};

constexpr double kDivergenceNorm = 1e8;

struct Trajectory {
    double dt = 0.0;
    std::vector<double> times;
    std::vector<Vec> x, u, y, dx, du, dy;
    std::vector<double> dS;
    bool truncated = false;        // left the declared domain before reaching T
    double truncation_time = 0.0;  // time of the rejected step when truncated

    std::size_t size() const { return times.size(); }
};

namespace detail {

// One RK4 step of zdot = rhs(t, z); returns z(t+dt).
template <typename Rhs>
Vec rk4_step(const Rhs& rhs, double t, const Vec& z, double dt) {
    const Vec k1 = rhs(t, z);
    Vec zt = z;
    for (std::size_t i = 0; i < z.size(); ++i) zt[i] = z[i] + 0.5 * dt * k1[i];
    const Vec k2 = rhs(t + 0.5 * dt, zt);
    for (std::size_t i = 0; i < z.size(); ++i) zt[i] = z[i] + 0.5 * dt * k2[i];
    const Vec k3 = rhs(t + 0.5 * dt, zt);
    for (std::size_t i = 0; i < z.size(); ++i) zt[i] = z[i] + dt * k3[i];
    const Vec k4 = rhs(t + dt, zt);
    for (std::size_t i = 0; i < z.size(); ++i)
        zt[i] = z[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return zt;
}

inline std::size_t step_count(double dt, double T) {
    if (!(dt > 0.0) || T < dt) throw std::invalid_argument("need dt > 0 and T >= dt");
    return static_cast<std::size_t>(std::llround(T / dt));
}

enum class RunStatus { complete, truncated, diverged };

// Base-dynamics integration (no variational state); used by the oracle's
// displaced runs and by ensembles. Divergence and domain exit are flagged,
// not thrown, so callers can decide.
struct BaseRun {
    std::vector<double> times;
    std::vector<Vec> x;
    RunStatus status = RunStatus::complete;
    double stop_time = 0.0;  // set when truncated or diverged
};

inline BaseRun integrate_base(const ControlAffineSystem& sys, const Vec& x0,
                              const Signals& u_sigs, double dt, double T) {
    if (x0.size() != sys.n || u_sigs.size() != sys.m)
        throw DimensionError("integrate_base: dimension mismatch");
    const std::size_t steps = step_count(dt, T);
    auto rhs = [&sys, &u_sigs](double t, const Vec& x) {
        Vec xdot = sys.f(x);
        if (sys.m > 0) xdot = add(xdot, sys.g(x) * eval_signals(u_sigs, t));
        return xdot;
    };
    BaseRun run;
    run.times.reserve(steps + 1);
    run.x.reserve(steps + 1);
    Vec x = x0;
    run.times.push_back(0.0);
    run.x.push_back(x);
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const Vec x_next = rk4_step(rhs, t, x, dt);
        const double t_next = static_cast<double>(k + 1) * dt;
        if (!all_finite(x_next) || norm2(x_next) > kDivergenceNorm) {
            run.status = RunStatus::diverged;
            run.stop_time = t_next;
            return run;
        }
        if (!sys.in_domain(x_next)) {
            run.status = RunStatus::truncated;
            run.stop_time = t_next;
            return run;
        }
        x = x_next;
        run.times.push_back(t_next);
        run.x.push_back(x);
    }
    return run;
}

}  // namespace detail

inline Trajectory integrate_prolonged(const ControlAffineSystem& sys, const Vec& x0,
                                      const Vec& dx0, const Signals& u_sigs,
                                      const Signals& du_sigs, const QuadraticStorage& st,
                                      double dt, double T) {
    if (x0.size() != sys.n || dx0.size() != sys.n || u_sigs.size() != sys.m ||
        du_sigs.size() != sys.m)
        throw DimensionError("integrate_prolonged: dimension mismatch");
    if (!sys.in_domain(x0))
        throw std::invalid_argument("integrate_prolonged: x0 outside the declared domain");
    const std::size_t steps = detail::step_count(dt, T);
    const std::size_t n = sys.n;

    auto rhs = [&](double t, const Vec& z) {
        const Vec x(z.begin(), z.begin() + n);
        const Vec dx(z.begin() + n, z.end());
        const Vec u = eval_signals(u_sigs, t);
        const Vec du = eval_signals(du_sigs, t);
        Vec xdot = sys.f(x);
        if (sys.m > 0) xdot = add(xdot, sys.g(x) * u);
        const Vec dxdot = variational_rhs(sys, x, u, dx, du);
        Vec zdot(2 * n);
        for (std::size_t i = 0; i < n; ++i) {
            zdot[i] = xdot[i];
            zdot[n + i] = dxdot[i];
        }
        return zdot;
    };

    Trajectory traj;
    traj.dt = dt;
    const std::size_t cap = steps + 1;
    traj.times.reserve(cap);
    traj.x.reserve(cap);
    traj.dx.reserve(cap);
    traj.u.reserve(cap);
    traj.du.reserve(cap);
    traj.y.reserve(cap);
    traj.dy.reserve(cap);
    traj.dS.reserve(cap);

    Vec z(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        z[i] = x0[i];
        z[n + i] = dx0[i];
    }
    auto record = [&](double t, const Vec& zz) {
        const Vec x(zz.begin(), zz.begin() + n);
        const Vec dx(zz.begin() + n, zz.end());
        traj.times.push_back(t);
        traj.x.push_back(x);
        traj.dx.push_back(dx);
        traj.u.push_back(eval_signals(u_sigs, t));
        traj.du.push_back(eval_signals(du_sigs, t));
        traj.y.push_back(sys.h(x));
        traj.dy.push_back(sys.jac_h(x) * dx);
        traj.dS.push_back(eval_storage(st, x, dx));
    };
    record(0.0, z);

    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const double t_next = static_cast<double>(k + 1) * dt;
        const Vec z_next = detail::rk4_step(rhs, t, z, dt);
        const Vec x_next(z_next.begin(), z_next.begin() + n);
        if (!all_finite(z_next) || norm2(x_next) > kDivergenceNorm)
            throw DivergedError(t_next);
        if (!sys.in_domain(x_next)) {
            traj.truncated = true;
            traj.truncation_time = t_next;
            return traj;
        }
        z = z_next;
        record(t_next, z);
    }
    return traj;
}

// Trapezoidal running integral of the variational supply dy' du.
inline std::vector<double> cumulative_supply(const Trajectory& traj) {
    std::vector<double> cum(traj.size(), 0.0);
    for (std::size_t k = 1; k < traj.size(); ++k) {
        const double s_prev = dot(traj.dy[k - 1], traj.du[k - 1]);
        const double s_here = dot(traj.dy[k], traj.du[k]);
        cum[k] = cum[k - 1] + 0.5 * traj.dt * (s_prev + s_here);
    }
    return cum;
}

// max_k [ dS(t_k) - dS(0) - int_0^{t_k} dy' du ]; differential passivity
// along the trajectory holds when this stays within integration tolerance.
// (The max includes k = 0, so the residual is never below zero.)
inline double dissipation_residual(const Trajectory& traj) {
    const std::vector<double> cum = cumulative_supply(traj);
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < traj.size(); ++k)
        worst = std::max(worst, traj.dS[k] - traj.dS[0] - cum[k]);
    return worst;
}

// max_k | dS(t_k) - dS(0) - supply | — for lossless systems the balance is an
// equality and this deviation must vanish to quadrature accuracy.
inline double dissipation_balance_deviation(const Trajectory& traj) {
    const std::vector<double> cum = cumulative_supply(traj);
    double worst = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k)
        worst = std::max(worst, std::abs(traj.dS[k] - traj.dS[0] - cum[k]));
    return worst;
}

// Displacement oracle: the variational solution delta x(t) must match the
// finite-difference quotient of two base runs displaced by +-eps/2 in the
// initial state (along `dir`) and in the input (by the constant vector
// eps/2 * du_dir). Returns the max over the grid of
// ||fd(t) - dx(t)|| / (||dx(t)|| + 1e-12).
inline double variational_oracle(const ControlAffineSystem& sys, const Vec& x0, const Vec& dir,
                                 const Signals& u_sigs, const Vec& du_dir, double eps, double dt,
                                 double T) {
    if (dir.size() != sys.n || du_dir.size() != sys.m)
        throw DimensionError("variational_oracle: dimension mismatch");
    Signals u_plus, u_minus;
    for (std::size_t j = 0; j < sys.m; ++j) {
        u_plus.push_back(u_sigs[j] + SignalExpr::constant(0.5 * eps * du_dir[j]));
        u_minus.push_back(u_sigs[j] - SignalExpr::constant(0.5 * eps * du_dir[j]));
    }
    const detail::BaseRun plus =
        detail::integrate_base(sys, add(x0, scale(0.5 * eps, dir)), u_plus, dt, T);
    const detail::BaseRun minus =
        detail::integrate_base(sys, sub(x0, scale(0.5 * eps, dir)), u_minus, dt, T);
    if (plus.status == detail::RunStatus::diverged) throw DivergedError(plus.stop_time);
    if (minus.status == detail::RunStatus::diverged) throw DivergedError(minus.stop_time);

    const QuadraticStorage st = make_constant_storage(Mat::identity(sys.n));
    const Trajectory prolonged =
        integrate_prolonged(sys, x0, dir, u_sigs, constant_signals(du_dir), st, dt, T);

    std::size_t len = std::min(prolonged.size(), std::min(plus.x.size(), minus.x.size()));
    double worst = 0.0;
    for (std::size_t k = 0; k < len; ++k) {
        const Vec fd = scale(1.0 / eps, sub(plus.x[k], minus.x[k]));
        const double err = norm2(sub(fd, prolonged.dx[k])) / (norm2(prolonged.dx[k]) + 1e-12);
        worst = std::max(worst, err);
    }
    return worst;
}

// --------------------------------------------------------------- ensembles

enum class MemberStatus { complete, truncated, diverged };

struct EnsembleResult {
    std::vector<double> times;                    // common time grid (shortest member)
    std::vector<std::vector<Vec>> members;        // per member, per time, state
    std::vector<MemberStatus> status;
    std::vector<double> stop_times;               // per member, when not complete
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::vector<std::vector<double>> pair_distance;  // per pair, per time
    std::vector<double> spread;                      // max over pairs, per time
    double final_spread = 0.0;
};

// Integrates every initial condition under the shared input and reports the
// pairwise distance curves, Euclidean by default or weighted by a supplied
// metric field (evaluated at the pair midpoint). Members run concurrently;
// merging is by index, so results do not depend on scheduling.
inline EnsembleResult ensemble_contraction(const ControlAffineSystem& sys,
                                           const std::vector<Vec>& x0_list,
                                           const Signals& u_sigs, double dt, double T,
                                           const QuadraticStorage* metric = nullptr) {
    if (x0_list.size() < 2)
        throw std::invalid_argument("ensemble_contraction: need at least two initial conditions");
    const std::size_t n_members = x0_list.size();
    std::vector<detail::BaseRun> runs(n_members);
    parallel_for(n_members, [&](std::size_t i) {
        runs[i] = detail::integrate_base(sys, x0_list[i], u_sigs, dt, T);
    });

    EnsembleResult res;
    std::size_t len = runs[0].x.size();
    for (const auto& r : runs) len = std::min(len, r.x.size());
    res.times.assign(runs[0].times.begin(), runs[0].times.begin() + len);
    for (std::size_t i = 0; i < n_members; ++i) {
        res.members.emplace_back(runs[i].x.begin(), runs[i].x.end());
        res.status.push_back(runs[i].status == detail::RunStatus::complete
                                 ? MemberStatus::complete
                                 : runs[i].status == detail::RunStatus::truncated
                                       ? MemberStatus::truncated
                                       : MemberStatus::diverged);
        res.stop_times.push_back(runs[i].stop_time);
    }

    auto distance = [&](const Vec& a, const Vec& b) {
        const Vec d = sub(a, b);
        if (!metric) return norm2(d);
        Vec mid = add(a, b);
        for (double& v : mid) v *= 0.5;
        return std::sqrt(std::max(0.0, quad_form(d, metric->M(mid), d)));
    };

    res.spread.assign(len, 0.0);
    for (std::size_t i = 0; i < n_members; ++i)
        for (std::size_t j = i + 1; j < n_members; ++j) {
            res.pairs.emplace_back(i, j);
            std::vector<double> curve(len);
            for (std::size_t k = 0; k < len; ++k) {
                curve[k] = distance(runs[i].x[k], runs[j].x[k]);
                res.spread[k] = std::max(res.spread[k], curve[k]);
            }
            res.pair_distance.push_back(std::move(curve));
        }
    res.final_spread = len ? res.spread[len - 1] : 0.0;
    return res;
}

// ------------------------------------------------------------------- CSV

// One row per grid time:  t,x1..xn,u1..um,y1..yp,dx1..dxn,du1..dum,dy1..dyp,dS
// at 17 significant digits.
inline void write_trajectory_csv(const Trajectory& traj, std::size_t n, std::size_t m,
                                 std::size_t p, std::ostream& os) {
    os << "t";
    for (std::size_t i = 1; i <= n; ++i) os << ",x" << i;
    for (std::size_t i = 1; i <= m; ++i) os << ",u" << i;
    for (std::size_t i = 1; i <= p; ++i) os << ",y" << i;
    for (std::size_t i = 1; i <= n; ++i) os << ",dx" << i;
    for (std::size_t i = 1; i <= m; ++i) os << ",du" << i;
    for (std::size_t i = 1; i <= p; ++i) os << ",dy" << i;
    os << ",dS\n";
    char buf[40];
    auto put = [&os, &buf](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << ',' << buf;
    };
    for (std::size_t k = 0; k < traj.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", traj.times[k]);
        os << buf;
        for (double v : traj.x[k]) put(v);
        for (double v : traj.u[k]) put(v);
        for (double v : traj.y[k]) put(v);
        for (double v : traj.dx[k]) put(v);
        for (double v : traj.du[k]) put(v);
        for (double v : traj.dy[k]) put(v);
        put(traj.dS[k]);
        os << '\n';
    }
}

}  // namespace diffpass
