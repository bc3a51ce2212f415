#pragma once

// System definitions: control-affine systems xdot = f(x) + g(x)u with output
// y = h(x), gradient systems Q(x) xdot = -grad_V(x) + B u, Brayton-Moser
// systems with block-diagonal co-energy metric, and the conversions between
// them. The gradient right-hand side sign convention is fixed once here:
// the stored field grad_V is always the term that enters negated, so general
// (non-potential) dynamics Q xdot = A(x) + B u are stored as grad_V = -A.

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "diffpass/linalg.hpp"

namespace diffpass {

enum class JacobianMode { analytic, finite_difference };

struct ControlAffineSystem {
    std::size_t n = 0;  // state dim
    std::size_t m = 0;  // input dim
    std::size_t p = 0;  // output dim
    std::function<Vec(const Vec&)> f;                  // drift, n
    std::function<Mat(const Vec&)> g;                  // input matrix field, n x m
    std::function<Vec(const Vec&)> h;                  // output map, p
    std::function<Mat(const Vec&)> jac_f;              // n x n
    std::function<Mat(const Vec&, const Vec&)> jac_gu; // (x, u) -> d[g(x)u]/dx, n x n
    std::function<Mat(const Vec&)> jac_h;              // p x n
    JacobianMode jacobian_mode = JacobianMode::analytic;
    Vec domain_lo, domain_hi;  // box bounds; empty = unbounded

    bool in_domain(const Vec& x) const {
        if (domain_lo.empty()) return true;
        for (std::size_t i = 0; i < n; ++i)
            if (x[i] < domain_lo[i] || x[i] > domain_hi[i]) return false;
        return true;
    }
};

// Fills the Jacobian evaluators with central finite differences of f, g, h.
inline ControlAffineSystem make_affine_fd(std::size_t n, std::size_t m, std::size_t p,
                                          std::function<Vec(const Vec&)> f,
                                          std::function<Mat(const Vec&)> g,
                                          std::function<Vec(const Vec&)> h,
                                          double h_scale = 1e-5) {
    ControlAffineSystem sys;
    sys.n = n;
    sys.m = m;
    sys.p = p;
    sys.f = f;
    sys.g = g;
    sys.h = h;
    sys.jac_f = [f, h_scale](const Vec& x) { return finite_diff_jacobian(f, x, h_scale); };
    sys.jac_gu = [g, h_scale](const Vec& x, const Vec& u) {
        auto gu = [&g, &u](const Vec& xx) { return g(xx) * u; };
        return finite_diff_jacobian(gu, x, h_scale);
    };
    sys.jac_h = [h, h_scale](const Vec& x) { return finite_diff_jacobian(h, x, h_scale); };
    sys.jacobian_mode = JacobianMode::finite_difference;
    return sys;
}

inline ControlAffineSystem make_linear_system(const Mat& a, const Mat& b, const Mat& c) {
    if (!a.square() || b.rows != a.rows || c.cols != a.cols)
        throw DimensionError("make_linear_system: inconsistent shapes");
    ControlAffineSystem sys;
    sys.n = a.rows;
    sys.m = b.cols;
    sys.p = c.rows;
    sys.f = [a](const Vec& x) { return a * x; };
    sys.g = [b](const Vec&) { return b; };
    sys.h = [c](const Vec& x) { return c * x; };
    sys.jac_f = [a](const Vec&) { return a; };
    const std::size_t n = a.rows;
    sys.jac_gu = [n](const Vec&, const Vec&) { return Mat(n, n); };
    sys.jac_h = [c](const Vec&) { return c; };
    return sys;
}

// ------------------------------------------------------------------ gradient

struct GradientSystem {
    std::size_t n = 0;
    std::size_t m = 0;
    std::function<Mat(const Vec&)> Q;                    // metric field, symmetric invertible
    std::function<std::vector<Mat>(const Vec&)> dQ;      // n partials dQ/dx_i
    std::function<Vec(const Vec&)> grad_V;               // rhs = -grad_V(x) + B u
    std::function<Mat(const Vec&)> hess_V;               // Jacobian of grad_V
    bool potential = true;                               // grad_V is a true gradient
    Mat B;                                               // constant, n x m
    // Optional output y = C grad_q(x) with Q = hess q; both empty when unused.
    std::function<Vec(const Vec&)> grad_q;
    Mat C;                                               // p x n
    Vec domain_lo, domain_hi;

    std::size_t output_dim() const { return C.empty() ? m : C.rows; }
};

// Partial derivatives of Q by central finite differences, for systems whose
// metric has no convenient closed-form derivative (Brayton-Moser assembly).
inline std::function<std::vector<Mat>(const Vec&)> fd_dQ(std::function<Mat(const Vec&)> q_fn,
                                                         double h_scale = 1e-5) {
    return [q_fn, h_scale](const Vec& x) {
        std::vector<Mat> out;
        out.reserve(x.size());
        Vec probe = x;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double h = h_scale * (1.0 + std::abs(x[i]));
            probe[i] = x[i] + h;
            Mat qp = q_fn(probe);
            probe[i] = x[i] - h;
            Mat qm = q_fn(probe);
            probe[i] = x[i];
            out.push_back((1.0 / (2.0 * h)) * (qp - qm));
        }
        return out;
    };
}

inline std::function<std::vector<Mat>(const Vec&)> zero_dQ(std::size_t n) {
    return [n](const Vec&) { return std::vector<Mat>(n, Mat(n, n)); };
}

// Converts a gradient system to control-affine form by solving against Q(x):
//   f(x) = Q(x)^-1 (-grad_V(x)),   g(x) = Q(x)^-1 B.
// Analytic Jacobians follow from differentiating Q f = -grad_V and Q g = B:
//   df/dx_i  = Q^-1 (-hess_V e_i - dQ_i f),
//   d[gu]/dx_i = -Q^-1 dQ_i (g u).
// Output: y = C grad_q(x) when the system carries one (then dh/dx = C Q),
// else y = B' x.
inline ControlAffineSystem gradient_to_affine(const GradientSystem& gs) {
    if (!gs.Q || !gs.grad_V || !gs.hess_V || !gs.dQ)
        throw DimensionError("gradient_to_affine: Q, dQ, grad_V, hess_V are all required");
    if (gs.B.rows != gs.n || gs.B.cols != gs.m)
        throw DimensionError("gradient_to_affine: B must be n x m");
    const bool has_output = !gs.C.empty() && static_cast<bool>(gs.grad_q);
    if (!gs.C.empty() && gs.C.cols != gs.n)
        throw DimensionError("gradient_to_affine: C must have n columns");

    ControlAffineSystem sys;
    sys.n = gs.n;
    sys.m = gs.m;
    sys.p = has_output ? gs.C.rows : gs.m;
    sys.domain_lo = gs.domain_lo;
    sys.domain_hi = gs.domain_hi;
    sys.jacobian_mode = JacobianMode::analytic;

    sys.f = [gs](const Vec& x) { return lu_factor(gs.Q(x)).solve(scale(-1.0, gs.grad_V(x))); };
    sys.g = [gs](const Vec& x) { return lu_factor(gs.Q(x)).solve_columns(gs.B); };
    if (has_output) {
        sys.h = [gs](const Vec& x) { return gs.C * gs.grad_q(x); };
        sys.jac_h = [gs](const Vec& x) { return gs.C * gs.Q(x); };
    } else {
        const Mat bt = transpose(gs.B);
        sys.h = [bt](const Vec& x) { return bt * x; };
        sys.jac_h = [bt](const Vec&) { return bt; };
    }
    sys.jac_f = [gs](const Vec& x) {
        LuFactors lu(gs.Q(x));
        const Vec f0 = lu.solve(scale(-1.0, gs.grad_V(x)));
        const Mat hv = gs.hess_V(x);
        const std::vector<Mat> dqs = gs.dQ(x);
        Mat jac(gs.n, gs.n);
        for (std::size_t i = 0; i < gs.n; ++i) {
            Vec rhs = dqs[i] * f0;
            for (std::size_t r = 0; r < gs.n; ++r) rhs[r] = -hv(r, i) - rhs[r];
            const Vec col = lu.solve(rhs);
            for (std::size_t r = 0; r < gs.n; ++r) jac(r, i) = col[r];
        }
        return jac;
    };
    sys.jac_gu = [gs](const Vec& x, const Vec& u) {
        LuFactors lu(gs.Q(x));
        const Vec gu = lu.solve(gs.B * u);
        const std::vector<Mat> dqs = gs.dQ(x);
        Mat jac(gs.n, gs.n);
        for (std::size_t i = 0; i < gs.n; ++i) {
            const Vec col = lu.solve(scale(-1.0, dqs[i] * gu));
            for (std::size_t r = 0; r < gs.n; ++r) jac(r, i) = col[r];
        }
        return jac;
    };
    return sys;
}

// -------------------------------------------------------------- Brayton-Moser

// Mixed-potential circuit model on z = (f, e) with
//   Q(z) = blockdiag(-d2H*_f/df2, d2H*_e/de2),   Q(z) zdot = dp/dz + B u.
// The Hessian evaluators receive their own subvector; the potential
// evaluators receive the full z.
struct BraytonMoserSystem {
    std::size_t nf = 0;  // flow (current-like) dimension
    std::size_t ne = 0;  // effort (voltage-like) dimension
    std::function<Mat(const Vec&)> hess_Hf;   // nf x nf, of the f block
    std::function<Mat(const Vec&)> hess_He;   // ne x ne, of the e block
    std::function<Vec(const Vec&)> grad_Hstar;  // dH*/dz, for the output map
    std::function<Vec(const Vec&)> grad_p;      // dp/dz
    std::function<Mat(const Vec&)> hess_p;      // d2p/dz2
    Mat B;                                      // (nf+ne) x m
    bool potential = true;
};

// Reduction to gradient form. The assembled rhs must match Q zdot = dp/dz + Bu,
// so the stored field is grad_V = -grad_p. The metric is the Hessian of
// q(z) = -H*_f(f) + H*_e(e), whose gradient supplies grad_q.
inline GradientSystem brayton_to_gradient(const BraytonMoserSystem& bm) {
    const std::size_t n = bm.nf + bm.ne;
    if (bm.B.rows != n) throw DimensionError("brayton_to_gradient: B row count != nf+ne");
    if (!bm.hess_Hf && bm.nf > 0)
        throw DimensionError("brayton_to_gradient: hess_Hf required when nf > 0");
    if (!bm.hess_He && bm.ne > 0)
        throw DimensionError("brayton_to_gradient: hess_He required when ne > 0");

    GradientSystem gs;
    gs.n = n;
    gs.m = bm.B.cols;
    gs.B = bm.B;
    gs.potential = bm.potential;

    const std::size_t nf = bm.nf, ne = bm.ne;
    gs.Q = [bm, nf, ne](const Vec& z) {
        if (z.size() != nf + ne) throw DimensionError("BraytonMoser Q: bad state size");
        Mat q(nf + ne, nf + ne);
        if (nf > 0) {
            const Vec zf(z.begin(), z.begin() + nf);
            const Mat qf = bm.hess_Hf(zf);
            if (qf.rows != nf || qf.cols != nf)
                throw DimensionError("BraytonMoser Q: hess_Hf block shape");
            for (std::size_t i = 0; i < nf; ++i)
                for (std::size_t j = 0; j < nf; ++j) q(i, j) = -qf(i, j);
        }
        if (ne > 0) {
            const Vec ze(z.begin() + nf, z.end());
            const Mat qe = bm.hess_He(ze);
            if (qe.rows != ne || qe.cols != ne)
                throw DimensionError("BraytonMoser Q: hess_He block shape");
            for (std::size_t i = 0; i < ne; ++i)
                for (std::size_t j = 0; j < ne; ++j) q(nf + i, nf + j) = qe(i, j);
        }
        return q;
    };
    gs.dQ = fd_dQ(gs.Q);
    gs.grad_V = [bm, n](const Vec& z) {
        Vec gp = bm.grad_p(z);
        if (gp.size() != n) throw DimensionError("BraytonMoser grad_p: bad size");
        return scale(-1.0, gp);
    };
    gs.hess_V = [bm](const Vec& z) { return -1.0 * bm.hess_p(z); };
    if (bm.grad_Hstar) {
        gs.grad_q = [bm, nf](const Vec& z) {
            Vec gq = bm.grad_Hstar(z);
            for (std::size_t i = 0; i < nf; ++i) gq[i] = -gq[i];
            return gq;
        };
    }
    return gs;
}

// ------------------------------------------------------------- validation

struct ValidationReport {
    double max_rel_jac_f = 0.0;
    double max_rel_jac_gu = 0.0;
    double max_rel_jac_h = 0.0;
    bool pass = true;  // every mismatch <= 1e-4
    std::size_t points_checked = 0;
    std::vector<std::string> point_failures;  // evaluator failures, recorded not fatal
};

// Compares the declared Jacobians against central finite differences at the
// given (x, u) sample points. Mismatch is max-abs, relative against
// max(1, max-abs of the finite-difference value).
inline ValidationReport validate_model(const ControlAffineSystem& sys,
                                       const std::vector<std::pair<Vec, Vec>>& sample_points,
                                       double h_scale = 1e-5) {
    constexpr double kPassTol = 1e-4;
    ValidationReport rep;
    auto rel_mismatch = [](const Mat& analytic, const Mat& fd) {
        return max_abs(analytic - fd) / std::max(1.0, max_abs(fd));
    };
    for (const auto& [x, u] : sample_points) {
        try {
            const Mat fd_f = finite_diff_jacobian(sys.f, x, h_scale);
            rep.max_rel_jac_f = std::max(rep.max_rel_jac_f, rel_mismatch(sys.jac_f(x), fd_f));
            auto gu = [&sys, &u](const Vec& xx) { return sys.g(xx) * u; };
            const Mat fd_gu = finite_diff_jacobian(gu, x, h_scale);
            rep.max_rel_jac_gu =
                std::max(rep.max_rel_jac_gu, rel_mismatch(sys.jac_gu(x, u), fd_gu));
            const Mat fd_h = finite_diff_jacobian(sys.h, x, h_scale);
            rep.max_rel_jac_h = std::max(rep.max_rel_jac_h, rel_mismatch(sys.jac_h(x), fd_h));
            ++rep.points_checked;
        } catch (const std::exception& e) {
            std::string where = "x=(";
            for (std::size_t i = 0; i < x.size(); ++i)
                where += (i ? "," : "") + std::to_string(x[i]);
            rep.point_failures.push_back(where + "): " + e.what());
        }
    }
    rep.pass = rep.max_rel_jac_f <= kPassTol && rep.max_rel_jac_gu <= kPassTol &&
               rep.max_rel_jac_h <= kPassTol;
    return rep;
}

}  // namespace diffpass
