#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bbmax/field.hpp"
#include "bbmax/integrate.hpp"
#include "bbmax/quadrature.hpp"
#include "oracles.hpp"

using namespace bbmax;
using Catch::Approx;

TEST_CASE("gauss-legendre panels integrate polynomials exactly", "[quadrature]") {
    auto f = [](double x) { return 5.0 * x * x * x - x + 2.0; };
    CHECK(quad::panel(f, -1.0, 3.0, 4) == Approx(oracle::integrate_1d(f, -1.0, 3.0)));
    auto g = [](double x) { return std::pow(x, 9.0); };
    CHECK(quad::panel(g, 0.0, 2.0, 5) == Approx(1024.0 / 10.0).epsilon(1e-13));
}

TEST_CASE("integrate_1d handles corners via breakpoints", "[quadrature]") {
    auto f = [](double x) { return std::abs(x - 1.0 / 3.0); };
    IntegralValue v = integrate_1d(f, 0.0, 1.0, {}, {}, {1.0 / 3.0});
    CHECK(v.value == Approx(5.0 / 18.0).epsilon(1e-13));
}

TEST_CASE("integrate_1d resolves endpoint power singularities", "[quadrature]") {
    // int_0^1 x^(-0.9) dx = 10
    auto f = [](double x) { return std::pow(x, -0.9); };
    IntegralValue v = integrate_1d(f, 0.0, 1.0, {}, {true, false});
    CHECK(v.value == Approx(10.0).epsilon(1e-8));
}

TEST_CASE("closed-form 1-D moments", "[quadrature]") {
    CHECK(power_moment(2.0, 0.0, 2.0) == Approx(8.0 / 3.0).epsilon(1e-14));
    CHECK(power_moment(-1.0, 0.5, 2.0) == Approx(std::log(4.0)).epsilon(1e-14));
    CHECK(power_moment(-0.5, 0.0, 4.0) == Approx(4.0).epsilon(1e-14));
    CHECK_THROWS_AS(power_moment(-1.5, 0.0, 1.0), non_integrable);
    CHECK_THROWS_AS(power_moment(-1.0, 0.0, 1.0), non_integrable);

    for (double t : {-0.5, 0.0, 1.5}) {
        double num = oracle::integrate_1d(
            [t](double y) { return std::pow(y, t) * std::log(y); }, 0.25, 3.0);
        CHECK(power_log_moment(t, 0.25, 3.0) == Approx(num).epsilon(1e-10));
    }
    // limit case at 0 for positive effective exponent
    double num0 =
        oracle::integrate_1d([](double y) { return std::sqrt(y) * std::log(y); }, 1e-12, 1.0);
    CHECK(power_log_moment(0.5, 0.0, 1.0) == Approx(num0).epsilon(1e-6));
}

TEST_CASE("sine moment matches the Gamma expression", "[quadrature]") {
    for (double b : {-0.9, -0.5, 0.0, 0.5, 1.0, 2.5, 7.0})
        CHECK(sine_moment(b) == Approx(oracle::sine_moment_gamma(b)).epsilon(1e-9));
}

TEST_CASE("box integrals of power fields hit closed forms", "[integrate]") {
    for (double alpha : {-0.9, -0.5, 0.0, 1.0, 2.5}) {
        for (double L : {0.25, 1.0, 8.0}) {
            double got = integrate_box(ScalarField::constant(1.0), 0.0, L, alpha).value;
            CHECK(got == Approx(box_measure_alpha(L, alpha)).epsilon(1e-12));
            for (double t : {0.5, 1.0}) {
                double e = t + alpha + 1.0;
                double exact = L * std::pow(L, e) / e;
                CHECK(integrate_box(ScalarField::power_y(t), 0.0, L, alpha).value ==
                      Approx(exact).epsilon(1e-12));
                // translation invariance of pure y-powers
                CHECK(integrate_box(ScalarField::power_y(t), 17.0, 17.0 + L, alpha).value ==
                      Approx(exact).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("generic path agrees with closed forms near the axis", "[integrate]") {
    for (double alpha : {-0.9, -0.5, 0.0, 1.0, 2.5}) {
        for (double L : {0.25, 1.0, 8.0}) {
            ScalarField f = ScalarField::constant(1.0).as_generic();
            double got = integrate_box(f, 0.0, L, alpha).value;
            CHECK(got == Approx(box_measure_alpha(L, alpha)).epsilon(1e-8));
        }
        ScalarField g = ScalarField::power_y(0.5).as_generic();
        double e = 1.5 + alpha;
        CHECK(integrate_box(g, 0.0, 1.0, alpha).value ==
              Approx(1.0 / e).epsilon(1e-8));
    }
}

TEST_CASE("generic path above the axis uses tensor quadrature", "[integrate]") {
    auto fn = [](double x, double y) { return std::exp(-x * x - y); };
    ScalarField f = ScalarField::generic(fn, "gauss");
    double alpha = 1.5;
    double got = integrate_cell(f, Rect{0.0, 2.0, 1.0, 3.0}, alpha).value;
    double want = oracle::integrate_2d(
        [&](double x, double y) { return fn(x, y) * std::pow(y, alpha); }, 0.0, 2.0, 1.0,
        3.0);
    CHECK(got == Approx(want).epsilon(1e-8));
}

TEST_CASE("radial powers reduce to exact polar integrals", "[integrate]") {
    // int over the unit box of |z|^(-1) dV_0 = 2 log(1 + sqrt 2)
    double got = integrate_box(ScalarField::power_abs(-1.0), 0.0, 1.0, 0.0).value;
    CHECK(got == Approx(2.0 * std::log(1.0 + std::sqrt(2.0))).epsilon(1e-10));

    // quarter disk via the disk cut: area pi/4
    double quarter = integrate_box(ScalarField::halfdisk_indicator(1.0), 0.0, 1.0, 0.0).value;
    CHECK(quarter == Approx(std::numbers::pi / 4.0).epsilon(1e-12));

    // box far from the origin, radial integrand, against the naive oracle
    auto fn = [](double x, double y) { return std::pow(x * x + y * y, 0.35); };
    double off = integrate_box(ScalarField::power_abs(0.7), 2.0, 3.0, 1.0).value;
    double want = oracle::integrate_2d([&](double x, double y) { return fn(x, y) * y; }, 2.0,
                                       3.0, 1e-9, 1.0);
    CHECK(off == Approx(want).epsilon(1e-8));

    CHECK_THROWS_AS(integrate_box(ScalarField::power_abs(-2.5), 0.0, 1.0, 0.0),
                    non_integrable);
}

TEST_CASE("half-plane integrals need bounded support", "[integrate]") {
    for (double alpha : {-0.5, 0.0, 1.0}) {
        for (double R : {0.5, 1.0, 4.0}) {
            double got = integrate_halfplane(ScalarField::halfdisk_indicator(R), alpha).value;
            double K = 2.0 + alpha;
            CHECK(got == Approx(sine_moment(alpha) * std::pow(R, K) / K).epsilon(1e-12));
        }
    }
    // half disk of radius R, alpha = 0: area pi R^2 / 2
    CHECK(integrate_halfplane(ScalarField::halfdisk_indicator(2.0), 0.0).value ==
          Approx(2.0 * std::numbers::pi).epsilon(1e-12));
    CHECK(halfdisk_power_integral(1.0, 0.5, 0.0, 1.0) ==
          Approx(sine_moment(0.5) / 3.5).epsilon(1e-13));

    CHECK_THROWS_AS(integrate_halfplane(ScalarField::power_y(0.5), 0.0), non_integrable);
    CHECK_THROWS_AS(
        integrate_halfplane(ScalarField::constant(1.0).as_generic(), 0.0), non_integrable);
    CHECK_THROWS_AS(halfdisk_power_integral(-3.0, 0.0, 0.0, 1.0), non_integrable);
}

TEST_CASE("field algebra stays exact under products and powers", "[field]") {
    ScalarField a = ScalarField::power_y(0.5);
    ScalarField b = ScalarField::power_y(0.25);
    double got = integrate_box(a * b, 0.0, 1.0, 0.0).value;
    CHECK(got == Approx(1.0 / 1.75).epsilon(1e-13));
    CHECK_FALSE((a * b).is_generic());

    ScalarField ind = ScalarField::box_indicator(0.0, 1.0);
    CHECK_FALSE(pow(ind, 3.0).is_generic());
    CHECK(integrate_box(pow(ind, 3.0), 0.0, 1.0, 0.0).value == Approx(1.0).epsilon(1e-13));

    // overlapping indicators materialize onto a disjoint grid before powers
    ScalarField overlap = ScalarField::box_indicator(0.0, 1.0) +
                          ScalarField::box_indicator(0.5, 1.5);
    ScalarField sq = pow(overlap, 2.0);
    CHECK_FALSE(sq.is_generic());
    CHECK(integrate_box(sq, -1.0, 2.0, 0.0).value == Approx(3.0).epsilon(1e-13));
    // pointwise agreement with the generic square
    for (double x : {0.1, 0.6, 1.2}) CHECK(sq(x, 0.3) == Approx(overlap(x, 0.3) * overlap(x, 0.3)));
}

TEST_CASE("windowed norms report truncation honestly", "[integrate]") {
    ScalarField f = ScalarField::box_indicator(0.0, 1.0);
    ScalarField one = ScalarField::constant(1.0);

    ScaleWindow deep{-12, 0, -2.0, 2.0};
    NormValue nv = lp_norm(f, one, 2.0, 0.0, deep);
    CHECK(nv.value == Approx(std::sqrt(1.0 - std::ldexp(1.0, -13))).epsilon(1e-10));
    CHECK_FALSE(nv.tail_flag);

    ScaleWindow shallow{-2, 0, -2.0, 2.0};
    NormValue sv = lp_norm(f, one, 2.0, 0.0, shallow);
    CHECK(sv.tail_flag);
    CHECK(sv.value < nv.value);

    // weighted norm: ||1_Q||_{L^1(y^,dV_0)} over the deep window
    NormValue wv = lp_norm(f, ScalarField::power_y(1.0), 1.0, 0.0, deep);
    CHECK(wv.value == Approx(0.5).epsilon(1e-6));
}

TEST_CASE("box measures for densities and atoms", "[integrate]") {
    BorelMeasure mu = BorelMeasure::lebesgue(1.0);
    CHECK(measure_of_box(mu, 0.0, 2.0) == Approx(box_measure_alpha(2.0, 1.0)).epsilon(1e-12));

    BorelMeasure nu = BorelMeasure::atoms({{0.5, 0.5, 2.0}, {0.5, 1.5, 1.0}, {1.0, 0.1, 7.0}});
    CHECK(measure_of_box(nu, 0.0, 1.0) == 2.0);   // y < 1 and x in [0,1)
    CHECK(measure_of_box(nu, 0.0, 2.0) == 10.0);  // all three
    CHECK(measure_of_box(nu, DyadicInterval{0, 0, Shift::none}) == 2.0);
    CHECK_THROWS_AS(BorelMeasure::atoms({{0.0, 0.0, 1.0}}), domain_error);
    CHECK_THROWS_AS(BorelMeasure::density(ScalarField::constant(1.0), -1.0), domain_error);
}
