#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "diffpass/linalg.hpp"

using namespace diffpass;

TEST_CASE("matrix constructors and arithmetic", "[linalg]") {
    const Mat i3 = Mat::identity(3);
    CHECK(i3(0, 0) == 1.0);
    CHECK(i3(0, 1) == 0.0);

    const Mat d = Mat::diag({3.0, -1.0, 1.0});
    CHECK(d(1, 1) == -1.0);
    CHECK(d(0, 2) == 0.0);

    const Mat a = Mat::from_rows({{1.0, 2.0}, {3.0, 4.0}});
    const Mat b = Mat::from_rows({{0.0, 1.0}, {1.0, 0.0}});
    const Mat ab = a * b;
    CHECK(ab(0, 0) == 2.0);
    CHECK(ab(0, 1) == 1.0);
    CHECK(ab(1, 0) == 4.0);
    CHECK(ab(1, 1) == 3.0);

    const Vec v = a * Vec{1.0, 1.0};
    CHECK(v[0] == 3.0);
    CHECK(v[1] == 7.0);

    const Mat at = transpose(a);
    CHECK(at(0, 1) == 3.0);

    CHECK(frobenius(b) == Catch::Approx(std::sqrt(2.0)));
    CHECK(max_abs(a) == 4.0);
    CHECK(max_abs(a - a) == 0.0);
    CHECK((2.0 * a)(1, 1) == 8.0);

    CHECK_THROWS_AS((a * Vec{1.0, 2.0, 3.0}), DimensionError);
    CHECK_THROWS_AS(a + Mat::identity(3), DimensionError);
    CHECK_THROWS_AS(Mat::from_rows({{1.0}, {1.0, 2.0}}), DimensionError);
}

TEST_CASE("vector helpers", "[linalg]") {
    CHECK(dot(Vec{1, 2, 3}, Vec{4, 5, 6}) == 32.0);
    CHECK(norm2(Vec{3, 4}) == 5.0);
    CHECK(add(Vec{1, 2}, Vec{3, 4})[1] == 6.0);
    CHECK(sub(Vec{1, 2}, Vec{3, 4})[0] == -2.0);
    CHECK(scale(2.0, Vec{1, -1})[1] == -2.0);
    const Vec e1 = unit(3, 1);
    CHECK(e1[0] == 0.0);
    CHECK(e1[1] == 1.0);
    CHECK(quad_form(Vec{1, 2}, Mat::from_rows({{2, 0}, {0, 3}}), Vec{1, 2}) == 14.0);
    CHECK_FALSE(all_finite(Vec{1.0, std::nan("")}));
}

TEST_CASE("symmetric eigenvalue bounds on known matrices", "[linalg]") {
    SECTION("diagonal") {
        const EigBounds eb = sym_eig_bounds(Mat::diag({3.0, -1.0, 1.0}));
        CHECK(eb.lambda_min == Catch::Approx(-1.0).margin(1e-12));
        CHECK(eb.lambda_max == Catch::Approx(3.0).margin(1e-12));
        CHECK(eb.asym_residual == 0.0);
    }
    SECTION("2x2 with known spectrum") {
        const EigBounds eb = sym_eig_bounds(Mat::from_rows({{2.0, 1.0}, {1.0, 2.0}}));
        CHECK(eb.lambda_min == Catch::Approx(1.0).margin(1e-12));
        CHECK(eb.lambda_max == Catch::Approx(3.0).margin(1e-12));
    }
    SECTION("tridiagonal Toeplitz, eigenvalues 2 - 2cos(k pi/6)") {
        Mat t(5, 5);
        for (std::size_t i = 0; i < 5; ++i) {
            t(i, i) = 2.0;
            if (i + 1 < 5) t(i, i + 1) = t(i + 1, i) = -1.0;
        }
        const EigBounds eb = sym_eig_bounds(t);
        CHECK(eb.lambda_min == Catch::Approx(2.0 - std::sqrt(3.0)).margin(1e-11));
        CHECK(eb.lambda_max == Catch::Approx(2.0 + std::sqrt(3.0)).margin(1e-11));
    }
    SECTION("asymmetry is reported, not hidden") {
        const EigBounds eb = sym_eig_bounds(Mat::from_rows({{0.0, 1.0}, {-1.0, 0.0}}));
        CHECK(eb.asym_residual == Catch::Approx(2.0 * std::sqrt(2.0)));
        // symmetrized part of a skew matrix is zero
        CHECK(eb.lambda_min == Catch::Approx(0.0).margin(1e-14));
        CHECK(eb.lambda_max == Catch::Approx(0.0).margin(1e-14));
    }
    SECTION("guards") {
        CHECK_THROWS_AS(sym_eig_bounds(Mat(2, 3)), DimensionError);
        CHECK_THROWS_AS(sym_eig_bounds(Mat(65, 65)), DimensionError);
        Mat bad(2, 2);
        bad(0, 0) = std::nan("");
        CHECK_THROWS_AS(sym_eig_bounds(bad), EvaluationError);
    }
    SECTION("random symmetric: bounds match trace/determinant for 2x2") {
        // For a 2x2 symmetric matrix the eigenvalues solve
        // l^2 - tr l + det = 0; compare against the closed form.
        for (int k = 0; k < 25; ++k) {
            const double a = std::sin(3.0 * k), b = std::cos(5.0 * k), c = std::sin(7.0 * k + 1);
            const Mat m = Mat::from_rows({{a, b}, {b, c}});
            const double tr = a + c, det = a * c - b * b;
            const double disc = std::sqrt(tr * tr / 4.0 - det);
            const EigBounds eb = sym_eig_bounds(m);
            CHECK(eb.lambda_min == Catch::Approx(tr / 2.0 - disc).margin(1e-11));
            CHECK(eb.lambda_max == Catch::Approx(tr / 2.0 + disc).margin(1e-11));
        }
    }
}

TEST_CASE("LU solves", "[linalg]") {
    const Mat a = Mat::from_rows({{2.0, 1.0, 0.0}, {1.0, 3.0, 1.0}, {0.0, 1.0, 2.0}});
    SECTION("solve against known right-hand side") {
        const Vec x = solve_linear(a, a * Vec{1.0, -2.0, 3.0});
        CHECK(x[0] == Catch::Approx(1.0).margin(1e-13));
        CHECK(x[1] == Catch::Approx(-2.0).margin(1e-13));
        CHECK(x[2] == Catch::Approx(3.0).margin(1e-13));
    }
    SECTION("pivoting handles zero leading entry") {
        const Mat p = Mat::from_rows({{0.0, 1.0}, {1.0, 0.0}});
        const Vec x = solve_linear(p, Vec{5.0, 7.0});
        CHECK(x[0] == 7.0);
        CHECK(x[1] == 5.0);
    }
    SECTION("solve_columns produces the inverse") {
        const Mat inv = lu_factor(a).solve_columns(Mat::identity(3));
        CHECK(max_abs(a * inv - Mat::identity(3)) < 1e-13);
    }
    SECTION("singularity raises") {
        CHECK_THROWS_AS(solve_linear(Mat::from_rows({{1.0, 2.0}, {2.0, 4.0}}), Vec{1.0, 1.0}),
                        SingularMatrixError);
    }
    SECTION("condition number") {
        CHECK(lu_factor(Mat::identity(4)).cond_inf() == Catch::Approx(1.0));
        // diag(1, 1e-6): cond_inf = 1e6
        CHECK(lu_factor(Mat::diag({1.0, 1e-6})).cond_inf() == Catch::Approx(1e6));
        const LinearSolution rep = solve_linear_report(Mat::diag({1.0, 1e-6}), Vec{1.0, 1.0});
        CHECK(rep.cond_estimate == Catch::Approx(1e6));
        CHECK(rep.x[1] == Catch::Approx(1e6));
    }
    SECTION("non-finite input raises") {
        Mat bad = Mat::identity(2);
        bad(0, 1) = std::numeric_limits<double>::infinity();
        CHECK_THROWS_AS(lu_factor(bad), EvaluationError);
    }
}

TEST_CASE("finite-difference jacobians", "[linalg]") {
    SECTION("polynomial map") {
        auto fn = [](const Vec& x) { return Vec{x[0] * x[0], x[0] * x[1]}; };
        const Mat j = finite_diff_jacobian(fn, Vec{1.0, 2.0});
        CHECK(j(0, 0) == Catch::Approx(2.0).margin(1e-8));
        CHECK(j(0, 1) == Catch::Approx(0.0).margin(1e-8));
        CHECK(j(1, 0) == Catch::Approx(2.0).margin(1e-8));
        CHECK(j(1, 1) == Catch::Approx(1.0).margin(1e-8));
    }
    SECTION("step scales with |x|") {
        // f(x) = x^2 at large x: relative accuracy preserved by h = h0(1+|x|)
        auto fn = [](const Vec& x) { return Vec{x[0] * x[0]}; };
        const Mat j = finite_diff_jacobian(fn, Vec{1e4});
        CHECK(j(0, 0) == Catch::Approx(2e4).epsilon(1e-9));
    }
    SECTION("NaN at probe raises EvaluationError") {
        auto fn = [](const Vec& x) { return Vec{std::sqrt(x[0])}; };
        CHECK_THROWS_AS(finite_diff_jacobian(fn, Vec{0.0}), EvaluationError);
    }
}
