#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "core/bump.hpp"
#include "core/geometry.hpp"
#include "core/quadrature.hpp"
#include "core/window.hpp"

using namespace qlap;

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec vec2(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
}

Vec vec3(double x, double y, double z) {
    Vec v(3);
    v << x, y, z;
    return v;
}

} // namespace

TEST_CASE("anisotropy matrix norms match hand values") {
    Mat m(2, 2);
    m << 2, 1, 1, 2;
    AnisotropyMatrix A(m);

    const Vec x = vec2(1, 1);
    CHECK(A.anorm(x) == doctest::Approx(std::sqrt(6.0)).epsilon(1e-14));
    CHECK(A.anorm_inv(x) == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-14));
    CHECK(A.det() == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(A.eig_min() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(A.eig_max() == doctest::Approx(3.0).epsilon(1e-12));

    // Cholesky factor reproduces the matrix
    const Mat back = A.cholesky() * A.cholesky().transpose();
    CHECK((back - m).norm() < 1e-13);
}

TEST_CASE("identity and diagonal factories agree with dense construction") {
    auto I = AnisotropyMatrix::identity(3);
    CHECK(I.dim() == 3);
    CHECK(I.anorm(vec3(3, 0, 4)) == doctest::Approx(5.0));

    auto D = AnisotropyMatrix::diagonal({4.0, 1.0});
    CHECK(D.anorm(vec2(1, 0)) == doctest::Approx(2.0));
    CHECK(D.anorm_inv(vec2(1, 0)) == doctest::Approx(0.5));
}

TEST_CASE("point inversion lands on the reciprocal shell") {
    auto A = AnisotropyMatrix::diagonal({4.0, 1.0});
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> coord(-2.0, 2.0);
    for (int k = 0; k < 50; ++k) {
        Vec x = vec2(coord(rng), coord(rng));
        if (A.anorm_inv(x) < 1e-3) continue;
        const Vec y = A.invert_point(x);
        CHECK(A.anorm_inv(y) == doctest::Approx(1.0 / A.anorm_inv(x)).epsilon(1e-12));
        // involution
        const Vec back = A.invert_point(y);
        CHECK((back - x).norm() < 1e-12 * (1.0 + x.norm()));
    }
}

TEST_CASE("ellipsoid surface area carries the determinant factor") {
    // d = 2: area = r sqrt(det) omega_2
    Ellipsoid e2{AnisotropyMatrix::diagonal({4.0, 1.0}), 1.0};
    CHECK(e2.surface_area() == doctest::Approx(12.566370614359172).epsilon(1e-13));

    // d = 3: area = r^2 sqrt(det) omega_3
    Ellipsoid e3{AnisotropyMatrix::diagonal({1.0, 2.0, 4.0}), 0.5};
    CHECK(e3.surface_area() == doctest::Approx(8.8857658763167322).epsilon(1e-13));

    CHECK(unit_sphere_area(2) == doctest::Approx(2 * kPi));
    CHECK(unit_sphere_area(3) == doctest::Approx(4 * kPi));
}

TEST_CASE("surface integral of one recovers the area") {
    Ellipsoid e2{AnisotropyMatrix::diagonal({4.0, 1.0}), 2.0};
    const double a2 = surface_integral(e2, [](const Vec&) { return 1.0; });
    CHECK(a2 == doctest::Approx(e2.surface_area()).epsilon(1e-10));

    Ellipsoid e3{AnisotropyMatrix::diagonal({1.0, 2.0, 4.0}), 0.7};
    const double a3 = surface_integral(e3, [](const Vec&) { return 1.0; });
    CHECK(a3 == doctest::Approx(e3.surface_area()).epsilon(1e-9));
}

TEST_CASE("surface integral reproduces sphere moments") {
    // Euclidean spheres: classical second moments
    Ellipsoid s3{AnisotropyMatrix::identity(3), 1.0};
    const double m3 = surface_integral(s3, [](const Vec& x) { return x[0] * x[0]; });
    CHECK(m3 == doctest::Approx(4.1887902047863905).epsilon(1e-9));

    Ellipsoid s2{AnisotropyMatrix::identity(2), 1.0};
    const double m2 = surface_integral(s2, [](const Vec& x) { return x[0] * x[0]; });
    CHECK(m2 == doctest::Approx(kPi).epsilon(1e-10));
}

TEST_CASE("ellipsoid membership follows the inverse norm") {
    Ellipsoid e{AnisotropyMatrix::diagonal({4.0, 1.0}), 1.0};
    CHECK(e.contains(vec2(1.9, 0)));     // |x|_{A^-1} = 0.95
    CHECK(!e.contains(vec2(2.1, 0)));
    CHECK(e.contains(vec2(0, 0.9)));
    CHECK(!e.contains(vec2(0, 1.1)));
}

TEST_CASE("gauss rules hit polynomial exactness") {
    // n-point rule is exact through degree 2n-1
    const auto f6 = [](double x) { return x * x * x * x * x * x; };
    CHECK(gauss_legendre(f6, -1, 1, 4) == doctest::Approx(2.0 / 7.0).epsilon(1e-14));
    const auto f3 = [](double x) { return 4 * x * x * x - x; };
    CHECK(gauss_legendre(f3, 0, 2, 2) == doctest::Approx(14.0).epsilon(1e-14));

    const auto& rule = gauss_legendre_rule(5);
    CHECK(rule.nodes.size() == 5);
    double wsum = 0;
    for (double w : rule.weights) wsum += w;
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("adaptive quadrature integrates smooth and endpoint-singular integrands") {
    const double s = integrate_1d([](double x) { return std::sin(x); }, 0, kPi);
    CHECK(s == doctest::Approx(2.0).epsilon(1e-10));

    Quad1DOptions opt;
    opt.graded_at_a = true;
    const double g = integrate_1d([](double x) { return 1.0 / std::sqrt(x); }, 0, 1, opt);
    CHECK(g == doctest::Approx(2.0).epsilon(1e-8));

    Quad1DOptions opt2;
    opt2.graded_at_b = true;
    const double h = integrate_1d([](double x) { return 1.0 / std::sqrt(1.0 - x); }, 0, 1, opt2);
    CHECK(h == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("windows report membership and ray intervals") {
    auto ann = Window::annulus(2, 1.0, 2.0);
    CHECK(ann.contains(vec2(1.5, 0)));
    CHECK(!ann.contains(vec2(0.5, 0)));
    CHECK(!ann.contains(vec2(2.5, 0)));
    CHECK(!ann.closure_contains_origin());
    CHECK(ann.diameter() == doctest::Approx(4.0));

    // ray from the origin crosses the annulus in one interval
    const auto iv = ann.ray_intervals(vec2(0, 0), vec2(1, 0));
    REQUIRE(iv.size() == 1);
    CHECK(iv[0].first == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(iv[0].second == doctest::Approx(2.0).epsilon(1e-12));

    // ray through the hole picks up both crossings
    const auto iv2 = ann.ray_intervals(vec2(-3, 0), vec2(1, 0));
    REQUIRE(iv2.size() == 2);
    CHECK(iv2[0].first == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(iv2[0].second == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(iv2[1].first == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(iv2[1].second == doctest::Approx(5.0).epsilon(1e-12));

    auto ball = Window::ball(vec2(3, 0), 1.0);
    CHECK(ball.contains(vec2(3.5, 0)));
    CHECK(!ball.contains(vec2(4.5, 0)));
    const auto iv3 = ball.ray_intervals(vec2(0, 0), vec2(1, 0));
    REQUIRE(iv3.size() == 1);
    CHECK(iv3[0].first == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(iv3[0].second == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("anisotropic annulus window uses the inverse norm") {
    auto w = Window::annulus(AnisotropyMatrix::diagonal({4.0, 1.0}), 0.5, 1.5);
    CHECK(w.contains(vec2(1.9, 0)));  // s = 0.95
    CHECK(!w.contains(vec2(0.9, 0))); // s = 0.45
    CHECK(w.contains(vec2(0, 1.2)));
}

TEST_CASE("radial bump matches its derivative and support") {
    RadialBump b(0.5, 1.5, 2.0);
    CHECK(b.value(0.5) == 0.0);
    CHECK(b.value(1.5) == 0.0);
    CHECK(b.value(1.0) == doctest::Approx(2.0)); // peak = amplitude
    const double h = 1e-6;
    for (double r : {0.7, 0.9, 1.1, 1.3}) {
        const double fd = (b.value(r + h) - b.value(r - h)) / (2 * h);
        CHECK(b.derivative(r) == doctest::Approx(fd).epsilon(1e-6));
    }
    CHECK_THROWS_AS(RadialBump(1.0, 0.5, 1.0), std::invalid_argument);
}
