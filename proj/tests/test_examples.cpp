#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>

#include "diffpass/conditions.hpp"
#include "diffpass/examples.hpp"

using namespace diffpass;

namespace {

// Adaptive Simpson quadrature, used as an independent oracle for closed-form
// output integrals.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double eps, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * eps)
        return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

double quad(const std::function<double(double)>& f, double a, double b, double eps = 1e-12) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, eps, 40);
}

std::vector<std::pair<Vec, Vec>> probe_points(const ExampleBundle& b) {
    std::vector<std::pair<Vec, Vec>> pts;
    const Vec u0(b.sys.m, 0.0);
    const Vec u1(b.sys.m, 1.3);
    pts.emplace_back(b.demo_x0, u0);
    pts.emplace_back(b.demo_x0, u1);
    Vec shifted = b.demo_x0;
    for (double& v : shifted) v = 0.5 * v + 0.2;
    pts.emplace_back(shifted, u1);
    return pts;
}

void check_affine_agreement(const ControlAffineSystem& hand, const ControlAffineSystem& derived,
                            const std::vector<Vec>& states, const Vec& u) {
    REQUIRE(hand.n == derived.n);
    REQUIRE(hand.m == derived.m);
    REQUIRE(hand.p == derived.p);
    for (const Vec& x : states) {
        CHECK(max_abs(sub(hand.f(x), derived.f(x))) < 1e-12);
        CHECK(max_abs(hand.jac_f(x) - derived.jac_f(x)) < 1e-12);
        CHECK(max_abs(hand.g(x) - derived.g(x)) < 1e-12);
        CHECK(max_abs(hand.jac_gu(x, u) - derived.jac_gu(x, u)) < 1e-12);
        CHECK(max_abs(sub(hand.h(x), derived.h(x))) < 1e-12);
        CHECK(max_abs(hand.jac_h(x) - derived.jac_h(x)) < 1e-12);
    }
}

}  // namespace

TEST_CASE("registry lists every bundle and rejects unknown names", "[examples]") {
    const std::vector<std::string> names = example_names();
    REQUIRE(names.size() == 6);
    for (const std::string& name : names) {
        const ExampleBundle b = make_example(name);
        CHECK(b.name == name);
        CHECK_FALSE(b.description.empty());
        CHECK(b.sys.n > 0);
        CHECK(b.demo_x0.size() == b.sys.n);
        CHECK(b.demo_dx0.size() == b.sys.n);
        CHECK(b.default_u.size() == b.sys.m);
        CHECK(b.default_du.size() == b.sys.m);
        CHECK(b.sys.in_domain(b.demo_x0));
        CHECK(b.recommended_dt > 0.0);
        // The default input evaluates to something finite.
        CHECK(all_finite(eval_signals(b.default_u, 0.3)));
    }
    CHECK(make_example("rc").recommended_dt == 5e-5);
    CHECK(make_example("osc-b").recommended_dt == 1e-3);
    CHECK_THROWS_AS(make_example("does-not-exist"), UnknownExampleError);
}

TEST_CASE("declared Jacobians of every bundle survive finite-difference audit",
          "[examples]") {
    for (const std::string& name : example_names()) {
        const ExampleBundle b = make_example(name);
        const ValidationReport rep = validate_model(b.sys, probe_points(b));
        INFO(name << ": jac_f " << rep.max_rel_jac_f << ", jac_gu " << rep.max_rel_jac_gu
                  << ", jac_h " << rep.max_rel_jac_h);
        CHECK(rep.pass);
        CHECK(rep.points_checked == 3);
        CHECK(rep.point_failures.empty());
    }
}

TEST_CASE("hand-written affine forms agree with the gradient reduction", "[examples]") {
    const OscillatorParts oc = oscillator(OscVariant::C);
    check_affine_agreement(oc.sys, gradient_to_affine(*oc.grad),
                           {Vec{-2.0}, Vec{-0.5}, Vec{0.0}, Vec{1.0}, Vec{2.5}}, Vec{0.7});

    const RcParts rc = rc_circuit();
    check_affine_agreement(rc.sys, gradient_to_affine(rc.grad),
                           {Vec{0.0}, Vec{0.5}, Vec{2.0}, Vec{7.0}}, Vec{1.5});

    const RigidBodyParts rb = rigid_body();
    const std::vector<Vec> spins = {Vec{0.0, 0.0, 0.0}, Vec{0.5, 0.2, -0.3},
                                    Vec{-1.0, 0.1, 0.4}};
    check_affine_agreement(rb.sys_closed, gradient_to_affine(rb.closed_loop), spins, Vec{0.9});
    check_affine_agreement(rb.sys_closed_fb, gradient_to_affine(rb.closed_loop_fb), spins,
                           Vec{0.9});
}

TEST_CASE("variant-B output integral matches quadrature of its integrand", "[examples]") {
    const OscillatorParts ob = oscillator(OscVariant::B);
    const auto integrand = [](double z) { return std::cos(0.5 * z) / (1.0 + std::cos(z)); };
    for (int k = 0; k < 1000; ++k) {
        const double x = -3.13 + 6.26 * k / 999.0;
        const double numeric = quad(integrand, 0.0, x);
        CHECK(std::abs(ob.sys.h(Vec{x})[0] - numeric) <= 1e-10);
    }

    // The gradient-form variant reads out twice the same integral.
    const OscillatorParts oc = oscillator(OscVariant::C);
    for (double x : {-2.8, -1.0, 0.0, 0.3, 2.2})
        CHECK(oc.sys.h(Vec{x})[0] ==
              Catch::Approx(2.0 * ob.sys.h(Vec{x})[0]).margin(1e-13));
}

TEST_CASE("oscillator variants expose consistent storage and domain", "[examples]") {
    const OscillatorParts oa = oscillator(OscVariant::A);
    CHECK(oa.sys.domain_hi[0] == Catch::Approx(0.5 * M_PI - 0.01));
    CHECK_FALSE(oa.grad.has_value());
    CHECK(oa.storage.M(Vec{0.7})(0, 0) == 1.0);

    const OscillatorParts ob = oscillator(OscVariant::B);
    CHECK(ob.sys.domain_hi[0] == Catch::Approx(M_PI - 0.01));
    CHECK(ob.storage.M(Vec{0.5})(0, 0) == Catch::Approx(1.0 / (1.0 + std::cos(0.5))));

    const OscillatorParts oc = oscillator(OscVariant::C);
    REQUIRE(oc.grad.has_value());
    CHECK(oc.grad->Q(Vec{1.0})(0, 0) == Catch::Approx(1.0 / std::cos(0.5)));
    CHECK(oc.grad->grad_V(Vec{1.0})[0] == Catch::Approx(2.0 * std::sin(0.5)));
    CHECK(oc.grad->B(0, 0) == 1.0);
}

TEST_CASE("circuit example stores the negated drift as its gradient field", "[examples]") {
    const RcParts rc = rc_circuit();
    CHECK_FALSE(rc.grad.potential);
    // Q vdot = -grad_V + u must reproduce vdot = -(1+v) v^5 + (1+v) u.
    CHECK(rc.grad.grad_V(Vec{2.0})[0] == Catch::Approx(32.0));
    CHECK(rc.grad.Q(Vec{2.0})(0, 0) == Catch::Approx(1.0 / 3.0));
    CHECK(rc.sys.f(Vec{2.0})[0] == Catch::Approx(-3.0 * 32.0));
    CHECK(rc.grad.grad_q(Vec{2.0})[0] == Catch::Approx(std::log(3.0)));
    CHECK(rc.sys.domain_lo[0] == 0.0);
    CHECK(rc.sys.domain_hi[0] == 10.0);
}

TEST_CASE("rigid body requires strictly ordered inertias", "[examples]") {
    CHECK_THROWS_AS(rigid_body(Vec{1.0, 2.0, 3.0}), InvalidInertiaError);
    CHECK_THROWS_AS(rigid_body(Vec{3.0, 3.0, 1.0}), InvalidInertiaError);
    CHECK_THROWS_AS(rigid_body(Vec{3.0, 2.0}), DimensionError);

    const RigidBodyParts rb = rigid_body();
    CHECK(rb.Q(0, 0) == Catch::Approx(3.0));
    CHECK(rb.Q(1, 1) == Catch::Approx(-1.0));
    CHECK(rb.Q(2, 2) == Catch::Approx(1.0));
}

TEST_CASE("rigid-body output weighting closes the supply-rate loop", "[examples]") {
    // With P = Q^-2 the QPQ check's output residual ||C' - P B|| must vanish
    // and the margin must be nonnegative near the origin.
    const RigidBodyParts rb = rigid_body();
    Mat p(3, 3);
    for (std::size_t i = 0; i < 3; ++i) p(i, i) = 1.0 / (rb.Q(i, i) * rb.Q(i, i));
    const QpqCheck qc = check_theorem_qpq(rb.closed_loop, p, Vec{0.0, 0.05, -0.05});
    CHECK(qc.output_residual < 1e-14);

    // y = G'w for the hand-written affine form.
    CHECK(rb.sys_closed.h(Vec{0.4, 1.0, 2.0})[0] == Catch::Approx(0.4));

    // Tracking inputs: v = r1 d + d' and the feedforward variant (r1 + 0.5) d + d'.
    const TrackingInputs ti = rb.tracking_input(SignalExpr::parse("3*sin(pi*t)"));
    for (double t : {0.0, 0.37, 1.4}) {
        const double d = 3.0 * std::sin(M_PI * t);
        const double ddot = 3.0 * M_PI * std::cos(M_PI * t);
        CHECK(ti.base(t) == Catch::Approx(0.2 * d + ddot).margin(1e-12));
        CHECK(ti.feedback_feedforward(t) == Catch::Approx(0.7 * d + ddot).margin(1e-12));
    }
}

TEST_CASE("linear fixture construction validates passivity algebra", "[examples]") {
    // A stable pair that violates C' = PB.
    CHECK_THROWS_AS(
        linear_passive_fixture(Mat::from_rows({{0.0, 1.0}, {-1.0, -1.0}}),
                               Mat::from_rows({{0.0}, {1.0}}), Mat::from_rows({{1.0, 0.0}}),
                               Mat::identity(2)),
        InvalidFixtureError);
    // A consistent output pair around an antistable A.
    CHECK_THROWS_AS(
        linear_passive_fixture(Mat::identity(2), Mat::from_rows({{0.0}, {1.0}}),
                               Mat::from_rows({{0.0, 1.0}}), Mat::identity(2)),
        InvalidFixtureError);

    const LinearFixture fx = bundled_passive_fixture();
    CHECK(frobenius(transpose(fx.C) - fx.P * fx.B) == 0.0);
    CHECK(sym_eig_bounds(transpose(fx.A) * fx.P + fx.P * fx.A).lambda_max <=
          Catch::Approx(0.0).margin(1e-12));

    const LinearFixture lossless = bundled_lossless_fixture();
    CHECK(frobenius(transpose(lossless.A) * lossless.P + lossless.P * lossless.A) == 0.0);
}
