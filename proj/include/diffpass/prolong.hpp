#pragma once

// The variational system attached to xdot = f(x) + g(x)u,
//   dxdot = df/dx dx + d[g(x)u]/dx dx + g(x) du,    dy = dh/dx dx,
// assembled together with the base dynamics into the prolonged system.
// For gradient systems the correction terms Gamma and Omega collect the
// metric's state dependence: Gamma dx = -[sum_i dQ_i dx_i] xdot and
// Omega = sum_i dQ_i xdot_i.

#include <cstddef>

#include "diffpass/linalg.hpp"
#include "diffpass/model.hpp"

namespace diffpass {

struct ProlongedState {
    Vec x;   // base state
    Vec dx;  // variational state, same dimension
};

inline Vec variational_rhs(const ControlAffineSystem& sys, const Vec& x, const Vec& u,
                           const Vec& dx, const Vec& du) {
    if (x.size() != sys.n || dx.size() != sys.n || u.size() != sys.m || du.size() != sys.m)
        throw DimensionError("variational_rhs: dimension mismatch");
    Vec out = add(sys.jac_f(x) * dx, sys.jac_gu(x, u) * dx);
    if (sys.m > 0) out = add(out, sys.g(x) * du);
    return out;
}

struct ProlongedRhs {
    Vec xdot;
    Vec dxdot;
    Vec y;
    Vec dy;
};

inline ProlongedRhs prolonged_rhs(const ControlAffineSystem& sys, const ProlongedState& ps,
                                  const Vec& u, const Vec& du) {
    ProlongedRhs out;
    out.xdot = sys.f(ps.x);
    if (sys.m > 0) out.xdot = add(out.xdot, sys.g(ps.x) * u);
    out.dxdot = variational_rhs(sys, ps.x, u, ps.dx, du);
    out.y = sys.h(ps.x);
    out.dy = sys.jac_h(ps.x) * ps.dx;
    return out;
}

// Base velocity of a gradient system, xdot = Q(x)^-1 (-grad_V(x) + B u).
inline Vec gradient_velocity(const GradientSystem& gs, const Vec& x, const Vec& u) {
    Vec rhs = scale(-1.0, gs.grad_V(x));
    if (gs.m > 0) rhs = add(rhs, gs.B * u);
    return lu_factor(gs.Q(x)).solve(rhs);
}

inline Vec gamma_term(const GradientSystem& gs, const Vec& x, const Vec& u, const Vec& dx) {
    const Vec xdot = gradient_velocity(gs, x, u);
    const std::vector<Mat> dqs = gs.dQ(x);
    Mat s(gs.n, gs.n);
    for (std::size_t i = 0; i < gs.n; ++i)
        if (dx[i] != 0.0) s = s + dx[i] * dqs[i];
    return scale(-1.0, s * xdot);
}

// Linear-in-dx matrix representation of gamma_term: column j = -dQ_j xdot.
inline Mat gamma_matrix(const GradientSystem& gs, const Vec& x, const Vec& u) {
    const Vec xdot = gradient_velocity(gs, x, u);
    const std::vector<Mat> dqs = gs.dQ(x);
    Mat g(gs.n, gs.n);
    for (std::size_t j = 0; j < gs.n; ++j) {
        const Vec col = dqs[j] * xdot;
        for (std::size_t r = 0; r < gs.n; ++r) g(r, j) = -col[r];
    }
    return g;
}

inline Mat omega_term(const GradientSystem& gs, const Vec& x, const Vec& u) {
    const Vec xdot = gradient_velocity(gs, x, u);
    const std::vector<Mat> dqs = gs.dQ(x);
    Mat s(gs.n, gs.n);
    for (std::size_t i = 0; i < gs.n; ++i)
        if (xdot[i] != 0.0) s = s + xdot[i] * dqs[i];
    return s;
}

}  // namespace diffpass
