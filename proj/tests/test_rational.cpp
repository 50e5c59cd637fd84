#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "bbmax/rational.hpp"

using bbmax::rational;

TEST_CASE("rational reduces and compares exactly", "[rational]") {
    rational a(2, 6);
    CHECK(a == rational(1, 3));
    CHECK(a.numerator() == 1);
    CHECK(a.denominator() == 3);

    rational b(-4, -6);
    CHECK(b == rational(2, 3));

    rational c(1, -3);
    CHECK(c.sign() == -1);
    CHECK(c < rational(0));
    CHECK(rational(1, 3) + rational(1, 6) == rational(1, 2));
    CHECK(rational(1, 3) - rational(1, 2) == rational(-1, 6));
    CHECK(rational(2, 3) * rational(9, 4) == rational(3, 2));
    CHECK(rational(1, 3) < rational(2, 5));
    CHECK(rational(7, 2) >= rational(7, 2));
}

TEST_CASE("floor matches integer semantics", "[rational]") {
    CHECK(rational(7, 2).floor() == 3);
    CHECK(rational(-7, 2).floor() == -4);
    CHECK(rational(-4, 2).floor() == -2);
    CHECK(rational(0).floor() == 0);
    CHECK(rational(5, 1).floor() == 5);
    CHECK(rational(-1, 3).floor() == -1);
}

TEST_CASE("from_double is an exact round trip", "[rational]") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(-58, 58);
    for (int i = 0; i < 20000; ++i) {
        double x = std::ldexp(mant(rng), expo(rng));
        rational r = rational::from_double(x);
        CHECK(r.to_double() == x);
    }
    CHECK(rational::from_double(0.0).is_zero());
    CHECK(rational::from_double(0.1).to_double() == 0.1);
    CHECK(rational::from_double(-3.75) == rational(-15, 4));
}

TEST_CASE("from_double rejects unusable inputs", "[rational]") {
    CHECK_THROWS_AS(rational::from_double(std::ldexp(1.0, 120)), bbmax::domain_error);
    CHECK_THROWS_AS(rational::from_double(std::ldexp(1.0, -130)), bbmax::domain_error);
    CHECK_THROWS_AS(rational::from_double(std::nan("")), bbmax::domain_error);
    CHECK_THROWS_AS(rational(1, 0), bbmax::domain_error);
}

TEST_CASE("shift_pow2 scales exactly in both directions", "[rational]") {
    rational r(5, 3);
    r.shift_pow2(4);
    CHECK(r == rational(80, 3));
    r.shift_pow2(-4);
    CHECK(r == rational(5, 3));

    rational q(1, 3);
    q.shift_pow2(-2);
    CHECK(q == rational(1, 12));
    q.shift_pow2(3);
    CHECK(q == rational(2, 3));
}

TEST_CASE("str renders reduced fractions", "[rational]") {
    CHECK(rational(1, 3).str() == "1/3");
    CHECK(rational(-8, 2).str() == "-4");
    CHECK(rational(0).str() == "0");
}
