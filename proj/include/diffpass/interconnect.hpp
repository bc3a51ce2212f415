#pragma once

// Negative-feedback interconnection u1 = -y2 + v1, u2 = y1 + v2 of two
// control-affine systems, assembled in closed form on the product state
// (one integrator, one time grid, exact block Jacobians), and the summed
// block-diagonal storage that certifies the composite.

#include <cstddef>
#include <limits>
#include <vector>

#include "diffpass/linalg.hpp"
#include "diffpass/model.hpp"
#include "diffpass/storage.hpp"

namespace diffpass {

namespace detail {

inline Vec head(const Vec& v, std::size_t n) { return Vec(v.begin(), v.begin() + n); }
inline Vec tail(const Vec& v, std::size_t n) { return Vec(v.begin() + n, v.end()); }

inline Vec concat(const Vec& a, const Vec& b) {
    Vec r = a;
    r.insert(r.end(), b.begin(), b.end());
    return r;
}

inline void place_block(Mat& dst, const Mat& src, std::size_t row0, std::size_t col0) {
    for (std::size_t i = 0; i < src.rows; ++i)
        for (std::size_t j = 0; j < src.cols; ++j) dst(row0 + i, col0 + j) = src(i, j);
}

}  // namespace detail

// Composite system on x = (x1, x2) with input v = (v1, v2), output (y1, y2):
//   x1dot = f1 + g1 (-h2(x2) + v1),   x2dot = f2 + g2 (h1(x1) + v2).
// Requires m1 = p2 and m2 = p1.
inline ControlAffineSystem feedback(const ControlAffineSystem& sys1,
                                    const ControlAffineSystem& sys2) {
    if (sys1.m != sys2.p || sys2.m != sys1.p)
        throw DimensionError("feedback: need m1 = p2 and m2 = p1");
    const std::size_t n1 = sys1.n, n2 = sys2.n;
    const std::size_t m1 = sys1.m, m2 = sys2.m;

    ControlAffineSystem c;
    c.n = n1 + n2;
    c.m = m1 + m2;
    c.p = sys1.p + sys2.p;
    c.jacobian_mode = (sys1.jacobian_mode == JacobianMode::analytic &&
                       sys2.jacobian_mode == JacobianMode::analytic)
                          ? JacobianMode::analytic
                          : JacobianMode::finite_difference;
    if (!sys1.domain_lo.empty() || !sys2.domain_lo.empty()) {
        Vec lo1 = sys1.domain_lo.empty() ? Vec(n1, -std::numeric_limits<double>::infinity())
                                         : sys1.domain_lo;
        Vec hi1 = sys1.domain_hi.empty() ? Vec(n1, std::numeric_limits<double>::infinity())
                                         : sys1.domain_hi;
        Vec lo2 = sys2.domain_lo.empty() ? Vec(n2, -std::numeric_limits<double>::infinity())
                                         : sys2.domain_lo;
        Vec hi2 = sys2.domain_hi.empty() ? Vec(n2, std::numeric_limits<double>::infinity())
                                         : sys2.domain_hi;
        c.domain_lo = detail::concat(lo1, lo2);
        c.domain_hi = detail::concat(hi1, hi2);
    }

    c.f = [sys1, sys2, n1](const Vec& x) {
        const Vec x1 = detail::head(x, n1), x2 = detail::tail(x, n1);
        Vec f1 = sys1.f(x1);
        if (sys1.m > 0) f1 = add(f1, sys1.g(x1) * scale(-1.0, sys2.h(x2)));
        Vec f2 = sys2.f(x2);
        if (sys2.m > 0) f2 = add(f2, sys2.g(x2) * sys1.h(x1));
        return detail::concat(f1, f2);
    };
    c.g = [sys1, sys2, n1, m1, m2](const Vec& x) {
        const Vec x1 = detail::head(x, n1), x2 = detail::tail(x, n1);
        Mat g(sys1.n + sys2.n, m1 + m2);
        detail::place_block(g, sys1.g(x1), 0, 0);
        detail::place_block(g, sys2.g(x2), sys1.n, m1);
        return g;
    };
    c.h = [sys1, sys2, n1](const Vec& x) {
        return detail::concat(sys1.h(detail::head(x, n1)), sys2.h(detail::tail(x, n1)));
    };
    // Blocks of d[f + g u_internal]/dx with u1 = -h2(x2), u2 = h1(x1):
    //   (1,1) Jf1 + Jgu1(x1, -h2)      (1,2) -g1 Jh2
    //   (2,1)  g2 Jh1                  (2,2) Jf2 + Jgu2(x2, h1)
    c.jac_f = [sys1, sys2, n1, n2](const Vec& x) {
        const Vec x1 = detail::head(x, n1), x2 = detail::tail(x, n1);
        const Vec y1 = sys1.h(x1);
        const Vec y2n = scale(-1.0, sys2.h(x2));
        Mat j(n1 + n2, n1 + n2);
        detail::place_block(j, sys1.jac_f(x1) + sys1.jac_gu(x1, y2n), 0, 0);
        detail::place_block(j, sys2.jac_f(x2) + sys2.jac_gu(x2, y1), n1, n1);
        if (sys1.m > 0)
            detail::place_block(j, -1.0 * (sys1.g(x1) * sys2.jac_h(x2)), 0, n1);
        if (sys2.m > 0) detail::place_block(j, sys2.g(x2) * sys1.jac_h(x1), n1, 0);
        return j;
    };
    c.jac_gu = [sys1, sys2, n1, n2, m1](const Vec& x, const Vec& v) {
        const Vec x1 = detail::head(x, n1), x2 = detail::tail(x, n1);
        const Vec v1 = detail::head(v, m1), v2 = detail::tail(v, m1);
        Mat j(n1 + n2, n1 + n2);
        detail::place_block(j, sys1.jac_gu(x1, v1), 0, 0);
        detail::place_block(j, sys2.jac_gu(x2, v2), n1, n1);
        return j;
    };
    c.jac_h = [sys1, sys2, n1, n2](const Vec& x) {
        Mat j(sys1.p + sys2.p, n1 + n2);
        detail::place_block(j, sys1.jac_h(detail::head(x, n1)), 0, 0);
        detail::place_block(j, sys2.jac_h(detail::tail(x, n1)), sys1.p, n1);
        return j;
    };
    return c;
}

// Block-diagonal sum of two storages on the product state:
// M(x1,x2) = diag(M1(x1), M2(x2)), so dS = dS1 + dS2.
inline QuadraticStorage sum_storage(const QuadraticStorage& st1, std::size_t n1,
                                    const QuadraticStorage& st2, std::size_t n2) {
    QuadraticStorage st;
    st.M = [st1, st2, n1](const Vec& x) {
        const Mat m1 = st1.M(detail::head(x, n1));
        const Mat m2 = st2.M(detail::tail(x, n1));
        Mat m(m1.rows + m2.rows, m1.cols + m2.cols);
        detail::place_block(m, m1, 0, 0);
        detail::place_block(m, m2, m1.rows, m1.cols);
        return m;
    };
    st.dM = [st1, st2, n1, n2](const Vec& x) {
        const std::vector<Mat> d1 = st1.dM(detail::head(x, n1));
        const std::vector<Mat> d2 = st2.dM(detail::tail(x, n1));
        std::vector<Mat> out(n1 + n2, Mat(n1 + n2, n1 + n2));
        for (std::size_t i = 0; i < n1; ++i) detail::place_block(out[i], d1[i], 0, 0);
        for (std::size_t i = 0; i < n2; ++i) detail::place_block(out[n1 + i], d2[i], n1, n1);
        return out;
    };
    st.definiteness = (st1.definiteness == Definiteness::positive_definite &&
                       st2.definiteness == Definiteness::positive_definite)
                          ? Definiteness::positive_definite
                          : Definiteness::positive_semidefinite;
    st.provenance = StorageProvenance::custom;
    return st;
}

}  // namespace diffpass
