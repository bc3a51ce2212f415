#pragma once

// Small dense linear-algebra kernel: vectors, matrices, a cyclic-Jacobi
// symmetric eigensolver, partial-pivot LU solves, and central finite
// differences. Everything here is sized for systems of dimension ~10;
// no attempt is made at large-scale performance.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace diffpass {

using Vec = std::vector<double>;

struct SingularMatrixError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An evaluator produced NaN/Inf or otherwise failed at a probe point.
struct EvaluationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------- matrices

struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;  // row-major

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
    static Mat diag(const Vec& d) {
        Mat m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }
    static Mat from_rows(std::initializer_list<std::initializer_list<double>> rows_init) {
        Mat m(rows_init.size(), rows_init.size() ? rows_init.begin()->size() : 0);
        std::size_t i = 0;
        for (const auto& row : rows_init) {
            if (row.size() != m.cols) throw DimensionError("from_rows: ragged rows");
            std::size_t j = 0;
            for (double v : row) m(i, j++) = v;
            ++i;
        }
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
    bool square() const { return rows == cols; }
    bool empty() const { return rows == 0 || cols == 0; }
};

inline Mat operator+(const Mat& x, const Mat& y) {
    if (x.rows != y.rows || x.cols != y.cols) throw DimensionError("Mat+: shape mismatch");
    Mat r = x;
    for (std::size_t k = 0; k < r.a.size(); ++k) r.a[k] += y.a[k];
    return r;
}

inline Mat operator-(const Mat& x, const Mat& y) {
    if (x.rows != y.rows || x.cols != y.cols) throw DimensionError("Mat-: shape mismatch");
    Mat r = x;
    for (std::size_t k = 0; k < r.a.size(); ++k) r.a[k] -= y.a[k];
    return r;
}

inline Mat operator*(double c, const Mat& x) {
    Mat r = x;
    for (double& v : r.a) v *= c;
    return r;
}

inline Mat operator*(const Mat& x, const Mat& y) {
    if (x.cols != y.rows) throw DimensionError("Mat*Mat: shape mismatch");
    Mat r(x.rows, y.cols);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t k = 0; k < x.cols; ++k) {
            const double xik = x(i, k);
            if (xik == 0.0) continue;
            for (std::size_t j = 0; j < y.cols; ++j) r(i, j) += xik * y(k, j);
        }
    return r;
}

inline Vec operator*(const Mat& x, const Vec& v) {
    if (x.cols != v.size()) throw DimensionError("Mat*Vec: shape mismatch");
    Vec r(x.rows, 0.0);
    for (std::size_t i = 0; i < x.rows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < x.cols; ++j) s += x(i, j) * v[j];
        r[i] = s;
    }
    return r;
}

inline Mat transpose(const Mat& x) {
    Mat r(x.cols, x.rows);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t j = 0; j < x.cols; ++j) r(j, i) = x(i, j);
    return r;
}

inline Mat symmetrize(const Mat& x) {
    if (!x.square()) throw DimensionError("symmetrize: matrix not square");
    Mat r(x.rows, x.cols);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t j = 0; j < x.cols; ++j) r(i, j) = 0.5 * (x(i, j) + x(j, i));
    return r;
}

inline double frobenius(const Mat& x) {
    double s = 0.0;
    for (double v : x.a) s += v * v;
    return std::sqrt(s);
}

inline double max_abs(const Mat& x) {
    double m = 0.0;
    for (double v : x.a) m = std::max(m, std::abs(v));
    return m;
}

inline double norm_inf(const Mat& x) {  // max row sum
    double m = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < x.cols; ++j) s += std::abs(x(i, j));
        m = std::max(m, s);
    }
    return m;
}

inline bool all_finite(const Mat& x) {
    for (double v : x.a)
        if (!std::isfinite(v)) return false;
    return true;
}

// ------------------------------------------------------------------ vectors

inline Vec add(const Vec& x, const Vec& y) {
    if (x.size() != y.size()) throw DimensionError("Vec add: size mismatch");
    Vec r = x;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += y[i];
    return r;
}

inline Vec sub(const Vec& x, const Vec& y) {
    if (x.size() != y.size()) throw DimensionError("Vec sub: size mismatch");
    Vec r = x;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= y[i];
    return r;
}

inline Vec scale(double c, const Vec& x) {
    Vec r = x;
    for (double& v : r) v *= c;
    return r;
}

inline double dot(const Vec& x, const Vec& y) {
    if (x.size() != y.size()) throw DimensionError("dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

inline double norm2(const Vec& x) { return std::sqrt(dot(x, x)); }

inline double max_abs(const Vec& x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
}

inline bool all_finite(const Vec& x) {
    for (double v : x)
        if (!std::isfinite(v)) return false;
    return true;
}

inline Vec unit(std::size_t n, std::size_t i) {
    Vec e(n, 0.0);
    e[i] = 1.0;
    return e;
}

// quadratic form x' M y
inline double quad_form(const Vec& x, const Mat& m, const Vec& y) { return dot(x, m * y); }

// ---------------------------------------------------- symmetric eigenvalues

struct EigBounds {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double asym_residual = 0.0;  // ||M - M'||_F before symmetrization
    int sweeps = 0;
};

// Extremal eigenvalues of (M+M')/2 by cyclic Jacobi rotations. The input is
// symmetrized first; asym_residual reports how far it was from symmetric so
// model bugs surface instead of being silently averaged away.
inline EigBounds sym_eig_bounds(const Mat& m_in, double tol = 1e-12) {
    if (!m_in.square()) throw DimensionError("sym_eig_bounds: matrix not square");
    const std::size_t n = m_in.rows;
    if (n > 64) throw DimensionError("sym_eig_bounds: dimension exceeds 64");
    if (!all_finite(m_in)) throw EvaluationError("sym_eig_bounds: NaN/Inf entries");

    EigBounds out;
    out.asym_residual = frobenius(m_in - transpose(m_in));
    if (n == 0) return out;

    Mat a = symmetrize(m_in);
    const double scale = std::max(frobenius(a), 1e-300);

    auto off_norm = [&a, n]() {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
        return std::sqrt(s);
    };

    const int max_sweeps = 64;
    int sweep = 0;
    while (off_norm() > tol * scale && sweep < max_sweeps) {
        ++sweep;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {  // rotate rows/cols p,q
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    out.sweeps = sweep;
    out.lambda_min = a(0, 0);
    out.lambda_max = a(0, 0);
    for (std::size_t i = 1; i < n; ++i) {
        out.lambda_min = std::min(out.lambda_min, a(i, i));
        out.lambda_max = std::max(out.lambda_max, a(i, i));
    }
    return out;
}

// -------------------------------------------------------------- LU solving

// Partial-pivot LU factorization; reusable for several right-hand sides
// (needed when converting gradient systems, where Q(x) is inverted against
// both -grad V and every column of B at the same x).
class LuFactors {
  public:
    explicit LuFactors(const Mat& a) : n_(a.rows), lu_(a), piv_(a.rows) {
        if (!a.square()) throw DimensionError("lu_factor: matrix not square");
        if (!all_finite(a)) throw EvaluationError("lu_factor: NaN/Inf entries");
        norm_a_ = norm_inf(a);
        const double pivot_tol = 1e-12 * std::max(norm_a_, 1e-300);
        for (std::size_t k = 0; k < n_; ++k) piv_[k] = k;
        for (std::size_t k = 0; k < n_; ++k) {
            std::size_t imax = k;
            double vmax = std::abs(lu_(k, k));
            for (std::size_t i = k + 1; i < n_; ++i) {
                const double v = std::abs(lu_(i, k));
                if (v > vmax) { vmax = v; imax = i; }
            }
            if (vmax <= pivot_tol)
                throw SingularMatrixError("lu_factor: singular within pivot tolerance");
            if (imax != k) {
                for (std::size_t j = 0; j < n_; ++j) std::swap(lu_(k, j), lu_(imax, j));
                std::swap(piv_[k], piv_[imax]);
            }
            for (std::size_t i = k + 1; i < n_; ++i) {
                lu_(i, k) /= lu_(k, k);
                const double lik = lu_(i, k);
                for (std::size_t j = k + 1; j < n_; ++j) lu_(i, j) -= lik * lu_(k, j);
            }
        }
    }

    std::size_t dim() const { return n_; }

    Vec solve(const Vec& b) const {
        if (b.size() != n_) throw DimensionError("LuFactors::solve: size mismatch");
        Vec x(n_);
        for (std::size_t i = 0; i < n_; ++i) x[i] = b[piv_[i]];
        for (std::size_t i = 1; i < n_; ++i)
            for (std::size_t j = 0; j < i; ++j) x[i] -= lu_(i, j) * x[j];
        for (std::size_t ii = n_; ii-- > 0;) {
            for (std::size_t j = ii + 1; j < n_; ++j) x[ii] -= lu_(ii, j) * x[j];
            x[ii] /= lu_(ii, ii);
        }
        return x;
    }

    Mat solve_columns(const Mat& b) const {
        if (b.rows != n_) throw DimensionError("LuFactors::solve_columns: size mismatch");
        Mat x(n_, b.cols);
        Vec col(n_);
        for (std::size_t j = 0; j < b.cols; ++j) {
            for (std::size_t i = 0; i < n_; ++i) col[i] = b(i, j);
            Vec sol = solve(col);
            for (std::size_t i = 0; i < n_; ++i) x(i, j) = sol[i];
        }
        return x;
    }

    // ||A||_inf * ||A^-1||_inf, with the inverse formed column by column;
    // exact enough at these dimensions and cheap enough to compute on demand.
    double cond_inf() const {
        if (n_ == 0) return 1.0;
        Mat inv = solve_columns(Mat::identity(n_));
        return norm_a_ * norm_inf(inv);
    }

  private:
    std::size_t n_;
    Mat lu_;
    std::vector<std::size_t> piv_;
    double norm_a_ = 0.0;
};

inline LuFactors lu_factor(const Mat& a) { return LuFactors(a); }

struct LinearSolution {
    Vec x;
    double cond_estimate = 0.0;
};

inline LinearSolution solve_linear_report(const Mat& a, const Vec& b) {
    LuFactors lu(a);
    return LinearSolution{lu.solve(b), lu.cond_inf()};
}

inline Vec solve_linear(const Mat& a, const Vec& b) { return LuFactors(a).solve(b); }

// --------------------------------------------------------- finite differences

// Central differences, column i = (fn(x + h_i e_i) - fn(x - h_i e_i)) / (2 h_i)
// with h_i = h_scale * (1 + |x_i|).
inline Mat finite_diff_jacobian(const std::function<Vec(const Vec&)>& fn, const Vec& x,
                                double h_scale = 1e-5) {
    const std::size_t n = x.size();
    Vec probe = x;
    Vec f0;  // sized lazily from the first evaluation
    Mat jac;
    for (std::size_t i = 0; i < n; ++i) {
        const double h = h_scale * (1.0 + std::abs(x[i]));
        probe[i] = x[i] + h;
        Vec fp = fn(probe);
        probe[i] = x[i] - h;
        Vec fm = fn(probe);
        probe[i] = x[i];
        if (!all_finite(fp) || !all_finite(fm))
            throw EvaluationError("finite_diff_jacobian: NaN/Inf at probe point");
        if (jac.empty() && !fp.empty()) jac = Mat(fp.size(), n);
        if (fp.size() != jac.rows || fm.size() != jac.rows)
            throw DimensionError("finite_diff_jacobian: evaluator output size changed");
        for (std::size_t r = 0; r < jac.rows; ++r) jac(r, i) = (fp[r] - fm[r]) / (2.0 * h);
    }
    if (jac.empty()) {
        // zero-argument or zero-output map: give the caller the right shape
        Vec f_at = n ? fn(x) : fn(Vec{});
        jac = Mat(f_at.size(), n);
    }
    return jac;
}

}  // namespace diffpass
