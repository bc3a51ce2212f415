#pragma once

// Bundled example systems with their storages, outputs, reference inputs and
// integration defaults. Registry names: osc-a, osc-b, osc-c, rc, rigid-body,
// linear-fixture.
//
// The oscillator family shares the drift f = -sin x on the chart (-pi, pi):
//   A: g = 1,        M = 1,            y = x,   valid near the origin only
//   B: g = cos(x/2), M = 1/(1+cos x),  y = log(tan(x/4 + pi/4))
//   C: gradient form Q = 1/cos(x/2), V = -4 cos(x/2), B = 1, QPQ storage
//      with P = 1 and output y = 2 log(tan(x/4 + pi/4))
// Domains are shrunk by 0.01 from the open-interval boundaries so the metric
// fields stay finite.
//
// Control-affine forms of the gradient examples are written out by hand for
// speed; unit tests pin them against gradient_to_affine of the same system.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "diffpass/linalg.hpp"
#include "diffpass/model.hpp"
#include "diffpass/signal.hpp"
#include "diffpass/storage.hpp"

namespace diffpass {

struct UnknownExampleError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InvalidInertiaError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InvalidFixtureError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// --------------------------------------------------------------- oscillator

enum class OscVariant { A, B, C };

struct OscillatorParts {
    ControlAffineSystem sys;
    std::optional<GradientSystem> grad;  // variant C only
    QuadraticStorage storage;
};

// Passivating output of variants B/C: antiderivative of 1/(2 cos(x/2)) resp.
// 1/cos(x/2), normalized to vanish at 0.
inline double osc_output_integral(double x) { return std::log(std::tan(0.25 * x + 0.25 * M_PI)); }

inline OscillatorParts oscillator(OscVariant variant) {
    OscillatorParts parts;
    ControlAffineSystem& sys = parts.sys;
    sys.n = sys.m = sys.p = 1;
    sys.f = [](const Vec& x) { return Vec{-std::sin(x[0])}; };
    sys.jac_f = [](const Vec& x) { return Mat::from_rows({{-std::cos(x[0])}}); };

    switch (variant) {
        case OscVariant::A: {
            sys.g = [](const Vec&) { return Mat::from_rows({{1.0}}); };
            sys.jac_gu = [](const Vec&, const Vec&) { return Mat(1, 1); };
            sys.h = [](const Vec& x) { return x; };
            sys.jac_h = [](const Vec&) { return Mat::from_rows({{1.0}}); };
            sys.domain_lo = {-0.5 * M_PI + 0.01};
            sys.domain_hi = {0.5 * M_PI - 0.01};
            parts.storage = make_constant_storage(Mat::identity(1));
            break;
        }
        case OscVariant::B: {
            sys.g = [](const Vec& x) { return Mat::from_rows({{std::cos(0.5 * x[0])}}); };
            sys.jac_gu = [](const Vec& x, const Vec& u) {
                return Mat::from_rows({{-0.5 * std::sin(0.5 * x[0]) * u[0]}});
            };
            sys.h = [](const Vec& x) { return Vec{osc_output_integral(x[0])}; };
            sys.jac_h = [](const Vec& x) {
                return Mat::from_rows({{0.5 / std::cos(0.5 * x[0])}});
            };
            sys.domain_lo = {-M_PI + 0.01};
            sys.domain_hi = {M_PI - 0.01};
            QuadraticStorage st;
            // Half-angle forms of 1/(1+cos x) and sin x/(1+cos x)^2: these
            // avoid the 1+cos x cancellation near the domain ends, where the
            // direct forms lose five digits.
            st.M = [](const Vec& x) {
                const double c = std::cos(0.5 * x[0]);
                return Mat::from_rows({{0.5 / (c * c)}});
            };
            st.dM = [](const Vec& x) {
                const double c = std::cos(0.5 * x[0]);
                return std::vector<Mat>{
                    Mat::from_rows({{0.5 * std::sin(0.5 * x[0]) / (c * c * c)}})};
            };
            st.definiteness = Definiteness::positive_definite;
            st.provenance = StorageProvenance::custom;
            parts.storage = st;
            break;
        }
        case OscVariant::C: {
            GradientSystem gs;
            gs.n = gs.m = 1;
            gs.Q = [](const Vec& x) { return Mat::from_rows({{1.0 / std::cos(0.5 * x[0])}}); };
            gs.dQ = [](const Vec& x) {
                const double c = std::cos(0.5 * x[0]);
                return std::vector<Mat>{Mat::from_rows({{0.5 * std::sin(0.5 * x[0]) / (c * c)}})};
            };
            gs.grad_V = [](const Vec& x) { return Vec{2.0 * std::sin(0.5 * x[0])}; };
            gs.hess_V = [](const Vec& x) { return Mat::from_rows({{std::cos(0.5 * x[0])}}); };
            gs.B = Mat::from_rows({{1.0}});
            gs.grad_q = [](const Vec& x) { return Vec{2.0 * osc_output_integral(x[0])}; };
            gs.C = Mat::from_rows({{1.0}});
            gs.domain_lo = {-M_PI + 0.01};
            gs.domain_hi = {M_PI - 0.01};
            parts.grad = gs;
            parts.storage = make_qpq_storage(gs, Mat::identity(1));

            sys.g = [](const Vec& x) { return Mat::from_rows({{std::cos(0.5 * x[0])}}); };
            sys.jac_gu = [](const Vec& x, const Vec& u) {
                return Mat::from_rows({{-0.5 * std::sin(0.5 * x[0]) * u[0]}});
            };
            sys.h = [](const Vec& x) { return Vec{2.0 * osc_output_integral(x[0])}; };
            sys.jac_h = [](const Vec& x) {
                return Mat::from_rows({{1.0 / std::cos(0.5 * x[0])}});
            };
            sys.domain_lo = {-M_PI + 0.01};
            sys.domain_hi = {M_PI - 0.01};
            break;
        }
    }
    return parts;
}

// ---------------------------------------------------------------- RC circuit

// Saturating-capacitor RC circuit: Q(v) = 1/(1+v) on v in [0, 10], driven by
// Q(v) vdot = -v^5 + i. Stored as a general-field gradient system (the slot
// grad_V holds the negated field, v^5). Output y = log(1+v) is the charge,
// so dy = Q dv.
struct RcParts {
    GradientSystem grad;
    ControlAffineSystem sys;
    QuadraticStorage storage;
};

inline RcParts rc_circuit() {
    RcParts parts;
    GradientSystem& gs = parts.grad;
    gs.n = gs.m = 1;
    gs.Q = [](const Vec& v) { return Mat::from_rows({{1.0 / (1.0 + v[0])}}); };
    gs.dQ = [](const Vec& v) {
        const double c = 1.0 + v[0];
        return std::vector<Mat>{Mat::from_rows({{-1.0 / (c * c)}})};
    };
    gs.grad_V = [](const Vec& v) { return Vec{std::pow(v[0], 5)}; };
    gs.hess_V = [](const Vec& v) { return Mat::from_rows({{5.0 * std::pow(v[0], 4)}}); };
    gs.potential = false;  // treated as a general field A(v) = -v^5
    gs.B = Mat::from_rows({{1.0}});
    gs.grad_q = [](const Vec& v) { return Vec{std::log(1.0 + v[0])}; };
    gs.C = Mat::from_rows({{1.0}});
    gs.domain_lo = {0.0};
    gs.domain_hi = {10.0};
    parts.storage = make_qpq_storage(gs, Mat::identity(1));

    ControlAffineSystem& sys = parts.sys;
    sys.n = sys.m = sys.p = 1;
    sys.f = [](const Vec& v) { return Vec{-(1.0 + v[0]) * std::pow(v[0], 5)}; };
    sys.jac_f = [](const Vec& v) {
        const double v4 = std::pow(v[0], 4);
        return Mat::from_rows({{-5.0 * v4 - 6.0 * v4 * v[0]}});
    };
    sys.g = [](const Vec& v) { return Mat::from_rows({{1.0 + v[0]}}); };
    sys.jac_gu = [](const Vec&, const Vec& u) { return Mat::from_rows({{u[0]}}); };
    sys.h = [](const Vec& v) { return Vec{std::log(1.0 + v[0])}; };
    sys.jac_h = [](const Vec& v) { return Mat::from_rows({{1.0 / (1.0 + v[0])}}); };
    sys.domain_lo = {0.0};
    sys.domain_hi = {10.0};
    return parts;
}

// ---------------------------------------------------------------- rigid body

// Euler equations in gradient form with p(w) = w1 w2 w3:
//   Q wdot = dp/dw + Qtilde^-1 u,  Q = I Qtilde^-1,
//   Qtilde = diag(I2-I3, I3-I1, I1-I2).
// The damping feedback u = I(-r(w) + G v) gives the closed loop
//   Q wdot = dp/dw - Q (r o w) + Q G v,
// certified by the QPQ storage with P = Q^-2 (so M = I) and output y = G'w.
// The output-feedback variant folds v = -0.5 y + w_ff into the dynamics,
// adding 0.5 Q G G' w to the potential gradient.
struct TrackingInputs {
    SignalExpr base;                  // v(t) = r1 d + d'
    SignalExpr feedback_feedforward;  // w_ff(t) = (r1 + 0.5) d + d'
};

struct RigidBodyParts {
    GradientSystem open_loop;
    GradientSystem closed_loop;
    GradientSystem closed_loop_fb;
    QuadraticStorage storage;           // M = identity
    ControlAffineSystem sys_closed;     // hand-written affine closed loop
    ControlAffineSystem sys_closed_fb;
    Mat Q;
    Vec r;
    Vec G;  // input direction (column of the 3x1 G matrix)

    TrackingInputs tracking_input(const SignalExpr& d) const {
        TrackingInputs t{SignalExpr::constant(r[0]) * d + d.derivative(),
                         SignalExpr::constant(r[0] + 0.5) * d + d.derivative()};
        return t;
    }
};

inline Vec rigid_grad_p(const Vec& w) { return Vec{w[1] * w[2], w[0] * w[2], w[0] * w[1]}; }

inline Mat rigid_hess_p(const Vec& w) {
    Mat h(3, 3);
    h(0, 1) = h(1, 0) = w[2];
    h(0, 2) = h(2, 0) = w[1];
    h(1, 2) = h(2, 1) = w[0];
    return h;
}

inline RigidBodyParts rigid_body(const Vec& inertia = {3.0, 2.0, 1.0},
                                 const Vec& r = {0.2, 0.2, 0.2},
                                 const Vec& g_dir = {1.0, 0.0, 0.0}) {
    if (inertia.size() != 3 || r.size() != 3 || g_dir.size() != 3)
        throw DimensionError("rigid_body: inertia, r, G must be 3-dimensional");
    const double i1 = inertia[0], i2 = inertia[1], i3 = inertia[2];
    if (!(i1 > i2 && i2 > i3))
        throw InvalidInertiaError("rigid_body: need strictly ordered inertias I1 > I2 > I3");

    RigidBodyParts parts;
    parts.r = r;
    parts.G = g_dir;
    const Vec qt_diag = {i2 - i3, i3 - i1, i1 - i2};
    const Vec q_diag = {i1 / qt_diag[0], i2 / qt_diag[1], i3 / qt_diag[2]};
    parts.Q = Mat::diag(q_diag);
    const Mat q = parts.Q;
    Mat g_col(3, 1);
    for (std::size_t i = 0; i < 3; ++i) g_col(i, 0) = g_dir[i];
    // Generous box: the certified contraction region is an elliptical cylinder
    // in (w2, w3) with w1 free, and tracking references push |w1| past 3.
    const Vec domain_lo = {-10.0, -10.0, -10.0};
    const Vec domain_hi = {10.0, 10.0, 10.0};

    auto base_gradient = [&](bool closed, double fb_gain) {
        GradientSystem gs;
        gs.n = 3;
        gs.Q = [q](const Vec&) { return q; };
        gs.dQ = zero_dQ(3);
        gs.domain_lo = domain_lo;
        gs.domain_hi = domain_hi;
        if (!closed) {
            gs.m = 3;
            gs.grad_V = [](const Vec& w) { return scale(-1.0, rigid_grad_p(w)); };
            gs.hess_V = [](const Vec& w) { return -1.0 * rigid_hess_p(w); };
            gs.B = Mat::diag({1.0 / qt_diag[0], 1.0 / qt_diag[1], 1.0 / qt_diag[2]});
        } else {
            gs.m = 1;
            // grad_V = -grad_p + Q diag(r) w (+ fb_gain * Q G G' w)
            Mat extra = q * Mat::diag(r);
            if (fb_gain != 0.0) extra = extra + fb_gain * (q * (g_col * transpose(g_col)));
            gs.grad_V = [extra](const Vec& w) {
                return add(scale(-1.0, rigid_grad_p(w)), extra * w);
            };
            gs.hess_V = [extra](const Vec& w) { return extra - rigid_hess_p(w); };
            gs.B = q * g_col;
            gs.grad_q = [q](const Vec& w) { return q * w; };
            // C = G' Q^-1, so that y = C grad_q = G' w and C' = P B for P = Q^-2
            Mat c(1, 3);
            for (std::size_t i = 0; i < 3; ++i) c(0, i) = g_dir[i] / q(i, i);
            gs.C = c;
        }
        return gs;
    };
    parts.open_loop = base_gradient(false, 0.0);
    parts.closed_loop = base_gradient(true, 0.0);
    parts.closed_loop_fb = base_gradient(true, 0.5);

    Mat p_qpq(3, 3);
    for (std::size_t i = 0; i < 3; ++i) p_qpq(i, i) = 1.0 / (q_diag[i] * q_diag[i]);
    parts.storage = make_qpq_storage(parts.closed_loop, p_qpq);

    auto make_affine_closed = [&](double fb_gain) {
        ControlAffineSystem sys;
        sys.n = 3;
        sys.m = sys.p = 1;
        Mat damp = Mat::diag(r);
        if (fb_gain != 0.0) damp = damp + fb_gain * (g_col * transpose(g_col));
        const Vec q_inv_diag = {1.0 / q_diag[0], 1.0 / q_diag[1], 1.0 / q_diag[2]};
        sys.f = [q_inv_diag, damp](const Vec& w) {
            const Vec gp = rigid_grad_p(w);
            Vec out(3);
            const Vec dw = damp * w;
            for (std::size_t i = 0; i < 3; ++i) out[i] = q_inv_diag[i] * gp[i] - dw[i];
            return out;
        };
        sys.jac_f = [q_inv_diag, damp](const Vec& w) {
            const Mat hp = rigid_hess_p(w);
            Mat j(3, 3);
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t jj = 0; jj < 3; ++jj)
                    j(i, jj) = q_inv_diag[i] * hp(i, jj) - damp(i, jj);
            return j;
        };
        sys.g = [g_col](const Vec&) { return g_col; };
        sys.jac_gu = [](const Vec&, const Vec&) { return Mat(3, 3); };
        sys.h = [g_dir = parts.G](const Vec& w) { return Vec{dot(g_dir, w)}; };
        sys.jac_h = [g_dir = parts.G](const Vec&) {
            Mat c(1, 3);
            for (std::size_t i = 0; i < 3; ++i) c(0, i) = g_dir[i];
            return c;
        };
        sys.domain_lo = domain_lo;
        sys.domain_hi = domain_hi;
        return sys;
    };
    parts.sys_closed = make_affine_closed(0.0);
    parts.sys_closed_fb = make_affine_closed(0.5);
    return parts;
}

// ------------------------------------------------------------ linear fixture

struct LinearFixture {
    ControlAffineSystem sys;
    QuadraticStorage storage;  // constant M = P
    Mat A, B, C, P;
};

// Passive linear system fixture: requires A'P + PA <= 0 and C' = PB (within
// tol), the linear shadow of the three geometric conditions.
inline LinearFixture linear_passive_fixture(const Mat& a, const Mat& b, const Mat& c,
                                            const Mat& p, double tol = 1e-9) {
    const Mat lyap = transpose(a) * p + p * a;
    if (sym_eig_bounds(lyap).lambda_max > tol)
        throw InvalidFixtureError("linear_passive_fixture: A'P + PA has a positive eigenvalue");
    if (frobenius(transpose(c) - p * b) > tol)
        throw InvalidFixtureError("linear_passive_fixture: C' != PB");
    LinearFixture fx;
    fx.A = a;
    fx.B = b;
    fx.C = c;
    fx.P = p;
    fx.sys = make_linear_system(a, b, c);
    fx.storage = make_constant_storage(p);
    return fx;
}

inline LinearFixture bundled_passive_fixture() {
    return linear_passive_fixture(Mat::from_rows({{0.0, 1.0}, {-1.0, -1.0}}),
                                  Mat::from_rows({{0.0}, {1.0}}),
                                  Mat::from_rows({{0.0, 1.0}}), Mat::identity(2));
}

// Undamped variant: A'P + PA = 0 exactly, so the dissipation inequality is an
// equality (energy balance).
inline LinearFixture bundled_lossless_fixture() {
    return linear_passive_fixture(Mat::from_rows({{0.0, 1.0}, {-1.0, 0.0}}),
                                  Mat::from_rows({{0.0}, {1.0}}),
                                  Mat::from_rows({{0.0, 1.0}}), Mat::identity(2));
}

// -------------------------------------------------------------------- registry

struct ExampleBundle {
    std::string name;
    std::string description;
    ControlAffineSystem sys;
    std::optional<GradientSystem> grad;
    QuadraticStorage storage;
    Signals default_u;   // reference input, one expression per channel
    Signals default_du;  // reference input variation
    double recommended_dt = 1e-3;
    Vec demo_x0;
    Vec demo_dx0;
};

inline std::vector<std::string> example_names() {
    return {"osc-a", "osc-b", "osc-c", "rc", "rigid-body", "linear-fixture"};
}

inline ExampleBundle make_example(const std::string& name) {
    ExampleBundle b;
    b.name = name;
    if (name == "osc-a") {
        OscillatorParts parts = oscillator(OscVariant::A);
        b.description = "pendulum-type oscillator, unit input field, identity metric";
        b.sys = parts.sys;
        b.storage = parts.storage;
        b.default_u = {SignalExpr::parse("0")};
        b.default_du = {SignalExpr::parse("0.1*cos(pi*t)")};
        b.demo_x0 = {0.3};
        b.demo_dx0 = {1.0};
    } else if (name == "osc-b") {
        OscillatorParts parts = oscillator(OscVariant::B);
        b.description = "oscillator with passivating input field cos(x/2)";
        b.sys = parts.sys;
        b.storage = parts.storage;
        b.default_u = {SignalExpr::parse("1+0.5*sin(pi*t)")};
        b.default_du = {SignalExpr::parse("0.1*cos(pi*t)")};
        b.demo_x0 = {0.5};
        b.demo_dx0 = {1.0};
    } else if (name == "osc-c") {
        OscillatorParts parts = oscillator(OscVariant::C);
        b.description = "oscillator in gradient form with QPQ storage";
        b.sys = parts.sys;
        b.grad = parts.grad;
        b.storage = parts.storage;
        b.default_u = {SignalExpr::parse("1+0.5*sin(pi*t)")};
        b.default_du = {SignalExpr::parse("0.1*cos(pi*t)")};
        b.demo_x0 = {0.0};
        b.demo_dx0 = {1.0};
    } else if (name == "rc") {
        RcParts parts = rc_circuit();
        b.description = "nonlinear RC circuit with saturating capacitor";
        b.sys = parts.sys;
        b.grad = parts.grad;
        b.storage = parts.storage;
        b.default_u = {SignalExpr::parse("2+sin(2*pi*t)")};
        b.default_du = {SignalExpr::parse("0.1*cos(2*pi*t)")};
        b.recommended_dt = 5e-5;  // the drift is stiff for large v
        b.demo_x0 = {0.5};
        b.demo_dx0 = {1.0};
    } else if (name == "rigid-body") {
        RigidBodyParts parts = rigid_body();
        b.description = "rigid body with damping feedback, reference tracking input";
        b.sys = parts.sys_closed;
        b.grad = parts.closed_loop;
        b.storage = parts.storage;
        const SignalExpr d = SignalExpr::parse("3*sin(pi*t)");
        b.default_u = {parts.tracking_input(d).base};
        b.default_du = {SignalExpr::parse("0.1*cos(pi*t)")};
        b.demo_x0 = {0.2, 0.1, -0.1};
        b.demo_dx0 = {1.0, 0.0, 0.0};
    } else if (name == "linear-fixture") {
        LinearFixture fx = bundled_passive_fixture();
        b.description = "passive linear fixture, A'P+PA <= 0 with C' = PB";
        b.sys = fx.sys;
        b.storage = fx.storage;
        b.default_u = {SignalExpr::parse("sin(t)")};
        b.default_du = {SignalExpr::parse("0.1*cos(t)")};
        b.demo_x0 = {0.3, -0.2};
        b.demo_dx0 = {1.0, 0.5};
    } else {
        throw UnknownExampleError("unknown example '" + name + "'");
    }
    return b;
}

}  // namespace diffpass
