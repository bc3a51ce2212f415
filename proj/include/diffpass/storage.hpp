#pragma once

// Quadratic differential storage dS = 1/2 dx' M(x) dx, its derivative along
// the prolonged flow, and the two constructions from gradient systems:
// the natural storage M = Q (Riemannian Q only) and the QPQ storage
// M = Q(x) P Q(x) with constant P >= 0, which stays positive even when Q
// is indefinite.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "diffpass/linalg.hpp"
#include "diffpass/model.hpp"
#include "diffpass/prolong.hpp"

namespace diffpass {

struct InvalidPError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NotAMetricError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum class Definiteness { positive_definite, positive_semidefinite };
enum class StorageProvenance { constant_P, natural_Q, QPQ, custom };

struct QuadraticStorage {
    std::function<Mat(const Vec&)> M;                 // symmetric matrix field
    std::function<std::vector<Mat>(const Vec&)> dM;   // n partials dM/dx_i
    Definiteness definiteness = Definiteness::positive_semidefinite;
    StorageProvenance provenance = StorageProvenance::custom;
};

inline const char* provenance_name(StorageProvenance p) {
    switch (p) {
        case StorageProvenance::constant_P: return "constant-P";
        case StorageProvenance::natural_Q:  return "natural-Q";
        case StorageProvenance::QPQ:        return "QPQ";
        case StorageProvenance::custom:     return "custom";
    }
    return "custom";
}

inline double eval_storage(const QuadraticStorage& st, const Vec& x, const Vec& dx) {
    const Mat m = st.M(x);
    if (m.rows != dx.size() || m.cols != dx.size())
        throw DimensionError("eval_storage: dimension mismatch");
    const double val = 0.5 * quad_form(dx, m, dx);
    if (!std::isfinite(val)) throw EvaluationError("eval_storage: non-finite value");
    return val;
}

// d/dt[dS] along the prolonged flow:
//   dx' M(x) dxdot + 1/2 sum_i dx' dM_i(x) dx * xdot_i.
inline double storage_rate(const QuadraticStorage& st, const ControlAffineSystem& sys,
                           const Vec& x, const Vec& u, const Vec& dx, const Vec& du) {
    Vec xdot = sys.f(x);
    if (sys.m > 0) xdot = add(xdot, sys.g(x) * u);
    const Vec dxdot = variational_rhs(sys, x, u, dx, du);
    double rate = quad_form(dx, st.M(x), dxdot);
    const std::vector<Mat> dms = st.dM(x);
    for (std::size_t i = 0; i < sys.n; ++i)
        if (xdot[i] != 0.0) rate += 0.5 * quad_form(dx, dms[i], dx) * xdot[i];
    return rate;
}

inline QuadraticStorage make_constant_storage(const Mat& p, double tol = 1e-10) {
    if (!p.square()) throw InvalidPError("constant storage: matrix not square");
    const EigBounds eb = sym_eig_bounds(p);
    if (eb.asym_residual > tol * std::max(1.0, frobenius(p)))
        throw InvalidPError("constant storage: matrix not symmetric");
    if (eb.lambda_min < -tol) throw InvalidPError("constant storage: matrix not PSD");
    QuadraticStorage st;
    st.M = [p](const Vec&) { return p; };
    st.dM = [n = p.rows](const Vec&) { return std::vector<Mat>(n, Mat(n, n)); };
    st.definiteness = eb.lambda_min > tol ? Definiteness::positive_definite
                                          : Definiteness::positive_semidefinite;
    st.provenance = StorageProvenance::constant_P;
    return st;
}

// M(x) = Q(x) P Q(x), dM_i = dQ_i P Q + Q P dQ_i. P must be symmetric PSD;
// definiteness transfers from P by congruence since Q is invertible.
inline QuadraticStorage make_qpq_storage(const GradientSystem& gs, const Mat& p,
                                         double tol = 1e-10) {
    if (!p.square() || p.rows != gs.n) throw InvalidPError("make_qpq_storage: P must be n x n");
    const EigBounds eb = sym_eig_bounds(p);
    if (eb.asym_residual > tol * std::max(1.0, frobenius(p)))
        throw InvalidPError("make_qpq_storage: P not symmetric");
    if (eb.lambda_min < -tol) throw InvalidPError("make_qpq_storage: P not PSD");
    QuadraticStorage st;
    st.M = [gs, p](const Vec& x) {
        const Mat q = gs.Q(x);
        return q * p * q;
    };
    st.dM = [gs, p](const Vec& x) {
        const Mat q = gs.Q(x);
        const std::vector<Mat> dqs = gs.dQ(x);
        std::vector<Mat> out;
        out.reserve(gs.n);
        for (std::size_t i = 0; i < gs.n; ++i) out.push_back(dqs[i] * p * q + q * p * dqs[i]);
        return out;
    };
    st.definiteness = eb.lambda_min > tol ? Definiteness::positive_definite
                                          : Definiteness::positive_semidefinite;
    st.provenance = StorageProvenance::QPQ;
    return st;
}

// Sample points for spot-checking positivity of Q over the declared domain box:
// a coarse per-axis grid, capped to stay small in higher dimensions.
inline std::vector<Vec> domain_sample_points(const Vec& lo, const Vec& hi,
                                             std::size_t per_axis = 9) {
    const std::size_t n = lo.size();
    if (n == 0) return {Vec{}};
    auto pow_n = [n](std::size_t base) {
        std::size_t t = 1;
        for (std::size_t i = 0; i < n; ++i) t *= base;
        return t;
    };
    if (pow_n(per_axis) > 4096) per_axis = 3;
    if (pow_n(per_axis) > 4096) per_axis = 2;
    const std::size_t total = pow_n(per_axis);
    std::vector<Vec> pts;
    pts.reserve(total);
    for (std::size_t k = 0; k < total; ++k) {
        Vec x(n);
        std::size_t rem = k;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t idx = rem % per_axis;
            rem /= per_axis;
            x[i] = lo[i] + (hi[i] - lo[i]) * static_cast<double>(idx) /
                               static_cast<double>(per_axis - 1);
        }
        pts.push_back(std::move(x));
    }
    return pts;
}

// Natural storage M = Q. Only valid when Q is an actual Riemannian metric;
// positivity is spot-checked on a grid over the declared domain (or at the
// origin when no domain is declared).
inline QuadraticStorage natural_storage(const GradientSystem& gs, double tol = 1e-10) {
    std::vector<Vec> pts = gs.domain_lo.empty() ? std::vector<Vec>{Vec(gs.n, 0.0)}
                                                : domain_sample_points(gs.domain_lo, gs.domain_hi);
    for (const Vec& x : pts) {
        const EigBounds eb = sym_eig_bounds(gs.Q(x));
        if (eb.lambda_min <= tol)
            throw NotAMetricError("natural_storage: Q is not positive-definite at a sample point");
    }
    QuadraticStorage st;
    st.M = gs.Q;
    st.dM = gs.dQ;
    st.definiteness = Definiteness::positive_definite;
    st.provenance = StorageProvenance::natural_Q;
    return st;
}

// Scales a storage by c > 0; margins of every checker scale with it, verdicts
// do not (used by the scale-invariance property suite).
inline QuadraticStorage scale_storage(const QuadraticStorage& st, double c) {
    if (!(c > 0.0)) throw InvalidPError("scale_storage: scale must be positive");
    QuadraticStorage out = st;
    out.M = [st, c](const Vec& x) { return c * st.M(x); };
    out.dM = [st, c](const Vec& x) {
        std::vector<Mat> dms = st.dM(x);
        for (Mat& m : dms) m = c * m;
        return dms;
    };
    return out;
}

}  // namespace diffpass
