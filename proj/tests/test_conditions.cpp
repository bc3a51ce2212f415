#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "diffpass/conditions.hpp"
#include "diffpass/examples.hpp"

using namespace diffpass;

namespace {

// Closed form for the natural-metric condition of the variant-C oscillator:
// the 1x1 assembled matrix collapses to -2 cos(x/2) - dQ(x) * xdot.
double osc_c_natural_closed_form(double x, double u) {
    const double dq = 0.5 * std::sin(0.5 * x) / (std::cos(0.5 * x) * std::cos(0.5 * x));
    const double xdot = -std::sin(x) + u * std::cos(0.5 * x);
    return -2.0 * std::cos(0.5 * x) - dq * xdot;
}

// Closed form for the rigid-body certificate with uniform damping r: the
// assembled matrix is [[ -2r, a, b], [a, -2r, 0], [b, 0, -2r]] with
// a = -2 w3 / 3 and b = 4 w2 / 3, whose top eigenvalue is -2r + sqrt(a^2+b^2).
double rigid_closed_form(const Vec& w, double r) {
    const double a = -2.0 * w[2] / 3.0;
    const double b = 4.0 * w[1] / 3.0;
    return -2.0 * r + std::sqrt(a * a + b * b);
}

}  // namespace

TEST_CASE("identity-metric contraction margin of the basic oscillator", "[conditions]") {
    const OscillatorParts oa = oscillator(OscVariant::A);
    for (double x : {-1.5, -0.7, 0.0, 0.4, 1.2})
        CHECK(check_metric_contraction(oa.sys, oa.storage, Vec{x}) ==
              Catch::Approx(-2.0 * std::cos(x)).margin(1e-13));
}

TEST_CASE("weighted metric flattens the oscillator margin to -1", "[conditions]") {
    const OscillatorParts ob = oscillator(OscVariant::B);
    for (int k = 0; k <= 100; ++k) {
        const double x = -3.13 + 6.26 * k / 100.0;
        CHECK(std::abs(check_metric_contraction(ob.sys, ob.storage, Vec{x}) + 1.0) < 1e-9);
    }
}

TEST_CASE("killing residual separates compatible and incompatible input fields",
          "[conditions]") {
    const OscillatorParts oa = oscillator(OscVariant::A);
    const OscillatorParts ob = oscillator(OscVariant::B);

    // g = cos(x/2) is a Killing field of M = 1/(1+cos x): exact cancellation.
    for (double x : {-2.5, -1.0, 0.0, 0.5, 2.0, 3.0}) {
        const std::vector<double> res = check_killing(ob.sys, ob.storage, Vec{x});
        REQUIRE(res.size() == 1);
        CHECK(res[0] < 1e-12);
    }

    // A constant input field is not: the residual is |dM| = sin x / (1+cos x)^2.
    const double x = 2.0;
    const std::vector<double> bad = check_killing(oa.sys, ob.storage, Vec{x});
    const double expect = std::sin(x) / std::pow(1.0 + std::cos(x), 2);
    CHECK(bad[0] == Catch::Approx(expect).margin(1e-12));
    CHECK(bad[0] > 0.5);

    // The identity metric accepts the constant field.
    CHECK(check_killing(oa.sys, oa.storage, Vec{x})[0] == 0.0);
}

TEST_CASE("output match holds exactly for the weighted oscillator", "[conditions]") {
    const OscillatorParts ob = oscillator(OscVariant::B);
    for (double x : {-2.0, -0.3, 0.0, 1.0, 2.8})
        CHECK(check_output_match(ob.sys, ob.storage, Vec{x}) < 1e-14);

    // Breaking the output gradient shows up as a proportional residual.
    ControlAffineSystem broken = ob.sys;
    broken.jac_h = [inner = ob.sys.jac_h](const Vec& x) { return 1.1 * inner(x); };
    const double r = check_output_match(broken, ob.storage, Vec{1.0});
    CHECK(r == Catch::Approx(0.1 * 0.5 / std::cos(0.5)).margin(1e-12));
}

TEST_CASE("natural-metric condition matches its scalar closed form", "[conditions]") {
    const OscillatorParts oc = oscillator(OscVariant::C);
    const GradientSystem& gs = *oc.grad;

    struct Case {
        double x, u;
        bool satisfied;
    };
    for (const Case c : {Case{1.0, 0.0, true}, Case{2.0, 0.0, false}, Case{1.0, -10.0, false},
                         Case{-1.5, 0.5, true}, Case{0.0, 3.0, true}}) {
        const double margin = check_gradient_natural(gs, Vec{c.x}, Vec{c.u});
        CHECK(margin == Catch::Approx(osc_c_natural_closed_form(c.x, c.u)).margin(1e-12));
        CHECK((margin < 0.0) == c.satisfied);
    }

    // Spot values: negative without input, driven positive by state or input.
    CHECK(check_gradient_natural(gs, Vec{1.0}, Vec{0.0}) ==
          Catch::Approx(-1.4932536).margin(1e-6));
    CHECK(check_gradient_natural(gs, Vec{2.0}, Vec{0.0}) > 0.2);
    CHECK(check_gradient_natural(gs, Vec{1.0}, Vec{-10.0}) > 1.0);
}

TEST_CASE("natural-metric condition on a constant-metric quadratic potential",
          "[conditions]") {
    // Q = I, V = 1/2 x' K x: the condition matrix is -2K, so the margin is
    // -2 lambda_min(K) at every state and input.
    const Mat k = Mat::from_rows({{2.0, 0.5}, {0.5, 1.0}});
    GradientSystem gs;
    gs.n = 2;
    gs.m = 1;
    gs.Q = [](const Vec&) { return Mat::identity(2); };
    gs.dQ = zero_dQ(2);
    gs.grad_V = [k](const Vec& x) { return k * x; };
    gs.hess_V = [k](const Vec&) { return k; };
    gs.B = Mat::from_rows({{1.0}, {0.0}});

    const double expect = -(3.0 - std::sqrt(2.0));  // -2 lambda_min(K)
    CHECK(check_gradient_natural(gs, Vec{0.3, -0.8}, Vec{0.0}) ==
          Catch::Approx(expect).margin(1e-12));
    CHECK(check_gradient_natural(gs, Vec{5.0, 5.0}, Vec{7.0}) ==
          Catch::Approx(expect).margin(1e-12));
}

TEST_CASE("weighted-metric certificate for the circuit example", "[conditions]") {
    const RcParts rc = rc_circuit();
    // hess_V P Q + Q P hess_V = 2 * 5 v^4 / (1+v) with P = 1.
    const QpqCheck at1 = check_theorem_qpq(rc.grad, Mat::identity(1), Vec{1.0});
    CHECK(at1.margin == Catch::Approx(5.0).margin(1e-12));
    CHECK(at1.output_residual == 0.0);
    const QpqCheck at0 = check_theorem_qpq(rc.grad, Mat::identity(1), Vec{0.0});
    CHECK(at0.margin == Catch::Approx(0.0).margin(1e-15));

    CHECK_THROWS_AS(check_theorem_qpq(rc.grad, Mat::diag(Vec{-1.0}), Vec{1.0}), InvalidPError);
    CHECK_THROWS_AS(check_theorem_qpq(rc.grad, Mat::identity(2), Vec{1.0}), InvalidPError);
    CHECK_THROWS_AS(
        check_theorem_qpq(rc.grad, Mat::from_rows({{1.0, 0.5}, {-0.5, 1.0}}), Vec{1.0, 1.0}),
        InvalidPError);
}

TEST_CASE("rigid-body certificate matches the closed form", "[conditions]") {
    const RigidBodyParts rb = rigid_body();
    CHECK(check_rigid_body(rb.closed_loop, rb.r, Vec{0.0, 0.0, 0.0}) ==
          Catch::Approx(-0.4).margin(1e-12));
    CHECK(check_rigid_body(rb.closed_loop, rb.r, Vec{0.0, 0.3, 0.6}) ==
          Catch::Approx(-0.4 + std::sqrt(0.32)).margin(1e-12));

    // The certificate ignores the first spin component entirely.
    for (const Vec& w : {Vec{0.0, 0.1, -0.2}, Vec{2.5, 0.1, -0.2}, Vec{-7.0, 0.1, -0.2}})
        CHECK(check_rigid_body(rb.closed_loop, rb.r, w) ==
              Catch::Approx(rigid_closed_form(w, 0.2)).margin(1e-12));

    CHECK(check_rigid_body(rb.closed_loop, rb.r, Vec{0.0, 0.31, 0.01}) > 0.013);
    CHECK_THROWS_AS(check_rigid_body(rb.closed_loop, rb.r, Vec{0.0, 0.0}), DimensionError);
}

TEST_CASE("rigid-body certificate holds on a pencil around the spin axis", "[conditions]") {
    const RigidBodyParts rb = rigid_body();
    SampleGrid grid;
    grid.lower = {-3.0, -0.2, -0.4};
    grid.upper = {3.0, 0.2, 0.4};
    grid.counts = {5, 7, 9};
    const ConditionReport rep = scan_region(
        "rigid-contraction", ConditionSense::leq,
        [&](const Vec& x, const Vec&) { return check_rigid_body(rb.closed_loop, rb.r, x); },
        grid, kMarginTol);
    CHECK(rep.verdict == Verdict::pass);
    CHECK(rep.n_points == 5 * 7 * 9);
    CHECK(rep.max_margin == Catch::Approx(-0.4 + std::sqrt(2.0) * 0.8 / 3.0).margin(1e-12));
    CHECK(std::abs(rep.worst_point[1]) == Catch::Approx(0.2));
    CHECK(std::abs(rep.worst_point[2]) == Catch::Approx(0.4));
}

TEST_CASE("sample grids enumerate axis-0-fastest", "[conditions]") {
    SampleGrid grid;
    grid.lower = {0.0, 10.0};
    grid.upper = {1.0, 20.0};
    grid.counts = {3, 2};
    CHECK(grid.total_points() == 6);
    CHECK(grid.point(0) == Vec{0.0, 10.0});
    CHECK(grid.point(1) == Vec{0.5, 10.0});
    CHECK(grid.point(2) == Vec{1.0, 10.0});
    CHECK(grid.point(3) == Vec{0.0, 20.0});
    CHECK(grid.point(5) == Vec{1.0, 20.0});

    SampleGrid bad_count = grid;
    bad_count.counts = {3, 1};
    CHECK_THROWS_AS(bad_count.validate(), DimensionError);
    SampleGrid bad_range = grid;
    bad_range.upper = {1.0, 10.0};
    CHECK_THROWS_AS(bad_range.validate(), DimensionError);
    SampleGrid bad_dims = grid;
    bad_dims.counts = {3};
    CHECK_THROWS_AS(bad_dims.validate(), DimensionError);
}

namespace {

SampleGrid line_grid(double lo, double hi, std::size_t count) {
    SampleGrid g;
    g.lower = {lo};
    g.upper = {hi};
    g.counts = {count};
    return g;
}

}  // namespace

TEST_CASE("scan verdicts for each condition sense", "[conditions]") {
    const SampleGrid grid = line_grid(-1.0, 1.0, 21);

    const auto constant = [](double v) {
        return [v](const Vec&, const Vec&) { return v; };
    };

    CHECK(scan_region("c", ConditionSense::leq, constant(-5.0), grid, 1e-9).verdict ==
          Verdict::pass);
    CHECK(scan_region("c", ConditionSense::leq, constant(5.0), grid, 1e-9).verdict ==
          Verdict::fail);
    CHECK(scan_region("c", ConditionSense::leq, constant(0.0), grid, 1e-6).verdict ==
          Verdict::boundary);

    // geq margins are negated so the report keeps <= semantics.
    const ConditionReport geq =
        scan_region("c", ConditionSense::geq, constant(3.0), grid, 1e-9);
    CHECK(geq.verdict == Verdict::pass);
    CHECK(geq.max_margin == -3.0);
    CHECK(geq.raw_extremal() == 3.0);
    CHECK(scan_region("c", ConditionSense::geq, constant(-0.5), grid, 1e-9).verdict ==
          Verdict::fail);

    // Equality passes only when the residual is below tolerance; there is no
    // boundary band on the satisfied side.
    CHECK(scan_region("c", ConditionSense::equality, constant(0.0), grid, 1e-8).verdict ==
          Verdict::pass);
    const auto absx = [](const Vec& x, const Vec&) { return std::abs(x[0]); };
    CHECK(scan_region("c", ConditionSense::equality, absx, grid, 1e-6).verdict ==
          Verdict::fail);
}

TEST_CASE("scan tracks the worst point and input samples", "[conditions]") {
    SampleGrid grid = line_grid(-1.0, 1.0, 21);
    const auto self = [](const Vec& x, const Vec&) { return x[0]; };
    const ConditionReport rep = scan_region("c", ConditionSense::leq, self, grid, 1e-9);
    CHECK(rep.verdict == Verdict::fail);
    CHECK(rep.max_margin == 1.0);
    CHECK(rep.worst_point == Vec{1.0});
    CHECK(rep.n_points == 21);

    grid.u_samples = {Vec{-1.0}, Vec{2.0}};
    const auto pick_u = [](const Vec&, const Vec& u) { return u[0]; };
    const ConditionReport urep = scan_region("c", ConditionSense::leq, pick_u, grid, 1e-9);
    CHECK(urep.n_points == 42);
    CHECK(urep.max_margin == 2.0);
}

TEST_CASE("scan counts evaluator failures and flags unreliable reports", "[conditions]") {
    const auto touchy = [](const Vec& x, const Vec&) {
        if (x[0] > 0.999) throw std::runtime_error("blew up");
        return -1.0;
    };

    // One failure out of 21 points is above the 1% budget.
    const ConditionReport small =
        scan_region("c", ConditionSense::leq, touchy, line_grid(-1.0, 1.0, 21), 1e-9);
    CHECK(small.n_failures == 1);
    CHECK(small.invalid);
    CHECK(small.failure_notes.size() == 1);
    CHECK(small.failure_notes[0] == "blew up");
    CHECK(small.verdict == Verdict::pass);  // the surviving margins still decide

    // One failure out of 201 points stays within it.
    const ConditionReport big =
        scan_region("c", ConditionSense::leq, touchy, line_grid(-1.0, 1.0, 201), 1e-9);
    CHECK(big.n_failures == 1);
    CHECK_FALSE(big.invalid);

    // All points failing is an outright fail.
    const auto always = [](const Vec&, const Vec&) -> double {
        throw std::runtime_error("nope");
    };
    const ConditionReport dead =
        scan_region("c", ConditionSense::leq, always, line_grid(-1.0, 1.0, 21), 1e-9);
    CHECK(dead.verdict == Verdict::fail);
    CHECK(dead.n_failures == 21);
    CHECK(dead.failure_notes.size() == 16);  // capped
}

TEST_CASE("condition reports serialize the fields consumers need", "[conditions]") {
    const SampleGrid grid = line_grid(0.0, 1.0, 11);
    const auto c = [](const Vec&, const Vec&) { return 4.0; };
    const ConditionReport rep = scan_region("demo-id", ConditionSense::geq, c, grid, 1e-9);
    const nlohmann::json j = rep.to_json();
    CHECK(j.at("condition_id") == "demo-id");
    CHECK(j.at("verdict") == "pass");
    CHECK(j.at("sense") == "geq");
    CHECK(j.at("n_points") == 11);
    CHECK(j.at("n_failures") == 0);
    CHECK(j.at("invalid") == false);
    CHECK(j.at("max_margin") == -4.0);
    CHECK(j.at("min_margin") == 4.0);
    CHECK(j.at("tolerance") == 1e-9);
    CHECK(j.at("worst_point").is_array());
}

TEST_CASE("scan results do not depend on the worker count", "[conditions]") {
    const OscillatorParts ob = oscillator(OscVariant::B);
    const auto checker = [&](const Vec& x, const Vec&) {
        return check_metric_contraction(ob.sys, ob.storage, x);
    };
    const SampleGrid grid = line_grid(-3.0, 3.0, 301);

    setenv("DIFFPASS_THREADS", "1", 1);
    const ConditionReport serial =
        scan_region("c", ConditionSense::leq, checker, grid, kMarginTol);
    setenv("DIFFPASS_THREADS", "4", 1);
    const ConditionReport parallel =
        scan_region("c", ConditionSense::leq, checker, grid, kMarginTol);
    unsetenv("DIFFPASS_THREADS");

    REQUIRE(serial.margins.size() == parallel.margins.size());
    for (std::size_t i = 0; i < serial.margins.size(); ++i)
        CHECK(serial.margins[i] == parallel.margins[i]);
    CHECK(serial.max_margin == parallel.max_margin);
    CHECK(serial.verdict == parallel.verdict);
}
