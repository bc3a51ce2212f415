#pragma once

// Pointwise checkers for the differential-passivity conditions, plus grid
// scanning with margin aggregation. Three condition shapes appear:
//   leq      - an eigenvalue bound lambda_max(...) <= 0; margin is lambda_max,
//              negative means satisfied,
//   geq      - a bound lambda_min(...) >= 0; margins are normalized by
//              negation so that <= semantics hold uniformly in reports,
//   equality - a residual norm that must vanish.
//
// check_metric_contraction:  M Jf + Jf' M + sum_i dM_i f_i          (leq)
// check_killing:             same shape per input direction, on g    (equality)
// check_output_match:        ||jac_h' - M g||_F                      (equality)
// check_gradient_natural:    -hess_V - hess_V' + Gamma + Gamma' + Omega  (leq)
// check_theorem_qpq:         hess_V P Q + Q P hess_V                 (geq)
// check_rigid_body:          Q^-1 hess_p + hess_p Q^-1 - 2 diag(r)   (leq)

#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "diffpass/linalg.hpp"
#include "diffpass/model.hpp"
#include "diffpass/parallel.hpp"
#include "diffpass/prolong.hpp"
#include "diffpass/storage.hpp"

namespace diffpass {

inline double check_metric_contraction(const ControlAffineSystem& sys,
                                       const QuadraticStorage& st, const Vec& x) {
    const Mat m = st.M(x);
    const Mat jf = sys.jac_f(x);
    Mat k = m * jf + transpose(jf) * m;
    const Vec fx = sys.f(x);
    const std::vector<Mat> dms = st.dM(x);
    for (std::size_t i = 0; i < sys.n; ++i)
        if (fx[i] != 0.0) k = k + fx[i] * dms[i];
    return sym_eig_bounds(k).lambda_max;
}

// One residual per basis input direction e_j: the Frobenius norm of the
// Lie-derivative expression that must vanish for g e_j to be a Killing field
// of the metric.
inline std::vector<double> check_killing(const ControlAffineSystem& sys,
                                         const QuadraticStorage& st, const Vec& x,
                                         std::vector<Vec> u_basis = {}) {
    if (u_basis.empty())
        for (std::size_t j = 0; j < sys.m; ++j) u_basis.push_back(unit(sys.m, j));
    const Mat m = st.M(x);
    const Mat gx = sys.g(x);
    const std::vector<Mat> dms = st.dM(x);
    std::vector<double> residuals;
    residuals.reserve(u_basis.size());
    for (const Vec& ej : u_basis) {
        const Mat jgu = sys.jac_gu(x, ej);
        Mat w = m * jgu + transpose(jgu) * m;
        const Vec gej = gx * ej;
        for (std::size_t i = 0; i < sys.n; ++i)
            if (gej[i] != 0.0) w = w + gej[i] * dms[i];
        residuals.push_back(frobenius(w));
    }
    return residuals;
}

inline double check_output_match(const ControlAffineSystem& sys, const QuadraticStorage& st,
                                 const Vec& x) {
    return frobenius(transpose(sys.jac_h(x)) - st.M(x) * sys.g(x));
}

// Natural-metric condition (storage M = Q): along the prolonged flow the
// storage rate is 1/2 dx' (-hess_V - hess_V' + Gamma + Gamma' + Omega) dx
// plus the supply, so the assembled matrix must be negative semidefinite.
// Note the explicit dependence on u through Gamma and Omega.
inline double check_gradient_natural(const GradientSystem& gs, const Vec& x, const Vec& u) {
    const Mat hv = gs.hess_V(x);
    const Mat gm = gamma_matrix(gs, x, u);
    const Mat k = gm + transpose(gm) + omega_term(gs, x, u) - hv - transpose(hv);
    return sym_eig_bounds(k).lambda_max;
}

struct QpqCheck {
    double margin = 0.0;           // lambda_min of the symmetrized expression (>= 0 required)
    double output_residual = 0.0;  // ||C' - P B||_F when the system carries C
};

inline QpqCheck check_theorem_qpq(const GradientSystem& gs, const Mat& p, const Vec& x,
                                  double tol = 1e-10) {
    if (!p.square() || p.rows != gs.n) throw InvalidPError("check_theorem_qpq: P must be n x n");
    const EigBounds pb = sym_eig_bounds(p);
    if (pb.asym_residual > tol * std::max(1.0, frobenius(p)) || pb.lambda_min < -tol)
        throw InvalidPError("check_theorem_qpq: P must be symmetric PSD");
    const Mat hv = gs.hess_V(x);
    const Mat q = gs.Q(x);
    const Mat expr = hv * p * q + q * p * hv;
    QpqCheck out;
    out.margin = sym_eig_bounds(expr).lambda_min;
    if (!gs.C.empty()) out.output_residual = frobenius(transpose(gs.C) - p * gs.B);
    return out;
}

// Rigid-body certificate: lambda_max of
//   Q^-1 hess_p(w) + hess_p(w) Q^-1 - 2 diag(r),
// with hess_p(w) = [[0,w3,w2],[w3,0,w1],[w2,w1,0]].
inline double check_rigid_body(const GradientSystem& gs_closed, const Vec& r, const Vec& x) {
    if (gs_closed.n != 3 || r.size() != 3 || x.size() != 3)
        throw DimensionError("check_rigid_body: three-dimensional systems only");
    Mat hp(3, 3);
    hp(0, 1) = hp(1, 0) = x[2];
    hp(0, 2) = hp(2, 0) = x[1];
    hp(1, 2) = hp(2, 1) = x[0];
    const Mat q_inv = lu_factor(gs_closed.Q(x)).solve_columns(Mat::identity(3));
    Mat k = q_inv * hp + hp * q_inv;
    for (std::size_t i = 0; i < 3; ++i) k(i, i) -= 2.0 * r[i];
    return sym_eig_bounds(k).lambda_max;
}

// ------------------------------------------------------------------ scanning

struct SampleGrid {
    Vec lower, upper;
    std::vector<std::size_t> counts;  // per-axis sample counts, each >= 2
    std::vector<Vec> u_samples;       // inputs for u-dependent conditions

    std::size_t total_points() const {
        std::size_t t = 1;
        for (std::size_t c : counts) t *= c;
        return t;
    }
    Vec point(std::size_t flat_index) const {
        Vec x(counts.size());
        std::size_t rem = flat_index;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            const std::size_t idx = rem % counts[i];
            rem /= counts[i];
            x[i] = counts[i] > 1 ? lower[i] + (upper[i] - lower[i]) * static_cast<double>(idx) /
                                                  static_cast<double>(counts[i] - 1)
                                 : lower[i];
        }
        return x;
    }
    void validate() const {
        if (lower.size() != upper.size() || lower.size() != counts.size())
            throw DimensionError("SampleGrid: inconsistent axis specs");
        for (std::size_t i = 0; i < counts.size(); ++i) {
            if (counts[i] < 2) throw DimensionError("SampleGrid: counts must be >= 2");
            if (!(lower[i] < upper[i])) throw DimensionError("SampleGrid: need lower < upper");
        }
    }
};

enum class ConditionSense { leq, geq, equality };
enum class Verdict { pass, fail, boundary };

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::pass:     return "pass";
        case Verdict::fail:     return "fail";
        case Verdict::boundary: return "boundary";
    }
    return "fail";
}

struct ConditionReport {
    std::string condition_id;
    ConditionSense sense = ConditionSense::leq;
    double tolerance = 0.0;
    std::size_t n_points = 0;          // points evaluated (x-grid times u-samples)
    std::vector<Vec> sample_points;    // x part, aligned with margins
    std::vector<double> margins;       // normalized so <= tolerance means satisfied
    double max_margin = -std::numeric_limits<double>::infinity();
    Vec worst_point;                   // attains max_margin
    Verdict verdict = Verdict::fail;
    std::size_t n_failures = 0;        // per-point evaluator failures
    bool invalid = false;              // > 1% of points failed to evaluate
    std::vector<std::string> failure_notes;

    // Raw extremal value in the condition's own orientation (for geq
    // conditions this is the smallest lambda_min encountered).
    double raw_extremal() const {
        return sense == ConditionSense::geq ? -max_margin : max_margin;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["condition_id"] = condition_id;
        j["tolerance"] = tolerance;
        j["n_points"] = n_points;
        j["n_failures"] = n_failures;
        j["invalid"] = invalid;
        j["verdict"] = verdict_name(verdict);
        j["max_margin"] = max_margin;
        if (sense == ConditionSense::geq) j["min_margin"] = raw_extremal();
        j["sense"] = sense == ConditionSense::leq      ? "leq"
                     : sense == ConditionSense::geq    ? "geq"
                                                       : "equality";
        j["worst_point"] = worst_point;
        if (!failure_notes.empty()) j["failures"] = failure_notes;
        return j;
    }
};

// Evaluates `checker(x, u)` over the grid (times u_samples when present; a
// single zero-input evaluation otherwise, with the margin meaning whatever
// the checker returns in leq/geq/equality orientation). Point evaluations
// run in parallel; the reduction is a deterministic serial pass by index.
inline ConditionReport scan_region(const std::string& condition_id, ConditionSense sense,
                                   const std::function<double(const Vec&, const Vec&)>& checker,
                                   const SampleGrid& grid, double tol) {
    grid.validate();
    ConditionReport rep;
    rep.condition_id = condition_id;
    rep.sense = sense;
    rep.tolerance = tol;

    const std::vector<Vec> us =
        grid.u_samples.empty() ? std::vector<Vec>{Vec{}} : grid.u_samples;
    const std::size_t nx = grid.total_points();
    const std::size_t total = nx * us.size();
    rep.n_points = total;
    rep.margins.assign(total, std::numeric_limits<double>::quiet_NaN());
    rep.sample_points.resize(total);
    std::vector<std::string> errors(total);

    parallel_for(total, [&](std::size_t k) {
        const Vec x = grid.point(k % nx);
        const Vec& u = us[k / nx];
        rep.sample_points[k] = x;
        try {
            double margin = checker(x, u);
            if (sense == ConditionSense::geq) margin = -margin;
            rep.margins[k] = margin;
        } catch (const std::exception& e) {
            errors[k] = e.what();
        }
    });

    for (std::size_t k = 0; k < total; ++k) {
        if (!errors[k].empty()) {
            ++rep.n_failures;
            if (rep.failure_notes.size() < 16) rep.failure_notes.push_back(errors[k]);
            continue;
        }
        if (rep.margins[k] > rep.max_margin) {
            rep.max_margin = rep.margins[k];
            rep.worst_point = rep.sample_points[k];
        }
    }
    rep.invalid = rep.n_failures * 100 > total;  // more than 1% failed

    if (rep.n_failures == total) {
        rep.verdict = Verdict::fail;
    } else if (sense == ConditionSense::equality) {
        rep.verdict = rep.max_margin <= tol ? Verdict::pass : Verdict::fail;
    } else if (rep.max_margin > tol) {
        rep.verdict = Verdict::fail;
    } else if (rep.max_margin > -tol) {
        rep.verdict = Verdict::boundary;
    } else {
        rep.verdict = Verdict::pass;
    }
    return rep;
}

// Default eigenvalue-margin and equality-residual tolerances.
constexpr double kMarginTol = 1e-9;
constexpr double kResidualTol = 1e-8;

}  // namespace diffpass
