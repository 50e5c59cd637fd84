#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "bbmax/field.hpp"
#include "bbmax/geometry.hpp"
#include "bbmax/orlicz.hpp"
#include "oracles.hpp"

using namespace bbmax;
using Catch::Approx;

namespace {

// piecewise-constant x-profile on [0,1): disjoint vertical strips, so field
// powers and products stay on the exact monomial path
struct Pwc {
    std::vector<double> cuts;  // 0 = c_0 < ... < c_n = 1
    std::vector<double> vals;

    ScalarField field() const {
        std::vector<Monomial> terms;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            Monomial m;
            m.coef = vals[i];
            m.support = Rect{cuts[i], cuts[i + 1], 0.0, kInf};
            terms.push_back(m);
        }
        return ScalarField::from_terms(terms, "pwc");
    }
    // box average of f^p over Q_[0,1) is independent of alpha
    double avg_pow(double p) const {
        double s = 0.0;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
            s += std::pow(vals[i], p) * (cuts[i + 1] - cuts[i]);
        return s;
    }
};

Pwc random_pwc(std::mt19937_64& rng, int max_cells) {
    std::uniform_int_distribution<int> nd(1, max_cells);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    Pwc p;
    int n = nd(rng);
    p.cuts.push_back(0.0);
    for (int i = 1; i < n; ++i) p.cuts.push_back(ud(rng));
    p.cuts.push_back(1.0);
    std::sort(p.cuts.begin(), p.cuts.end());
    for (std::size_t i = 0; i + 1 < p.cuts.size(); ++i) p.vals.push_back(0.1 + 3.0 * ud(rng));
    return p;
}

}  // namespace

TEST_CASE("young function construction and evaluation", "[orlicz]") {
    YoungFunction sq = YoungFunction::power(2.0);
    CHECK(sq(0.0) == 0.0);
    CHECK(sq(3.0) == Approx(9.0));
    CHECK(sq(-3.0) == Approx(9.0));  // even extension
    CHECK(sq.exponent() == 2.0);
    CHECK(sq.coefficient() == 1.0);

    CHECK_THROWS_AS(YoungFunction::power(0.5), domain_error);
    CHECK_THROWS_AS(YoungFunction::power(2.0, -1.0), domain_error);
    // exponent/coefficient are data of the tagged kinds only
    YoungFunction gen = YoungFunction::from_function([](double t) { return t * t; }, "sq");
    CHECK_THROWS_AS(gen.exponent(), domain_error);
    CHECK_THROWS_AS(gen.coefficient(), domain_error);
}

TEST_CASE("power conjugate bump exponent", "[orlicz]") {
    // p = 2, r = 2: p' r = 4, conjugate 4/3
    CHECK(YoungFunction::power_conjugate_bump(2.0, 2.0).exponent() == Approx(4.0 / 3.0).epsilon(1e-15));
    // r = 1 collapses to p
    CHECK(YoungFunction::power_conjugate_bump(3.0, 1.0).exponent() == Approx(3.0).epsilon(1e-15));
    CHECK_THROWS_AS(YoungFunction::power_conjugate_bump(1.0, 2.0), domain_error);
}

TEST_CASE("legendre complements of powers are closed form", "[orlicz]") {
    // t^2/2 is self-complementary
    YoungFunction half_sq = YoungFunction::power(2.0, 0.5);
    YoungFunction c1 = half_sq.complementary();
    CHECK(c1.exponent() == Approx(2.0).epsilon(1e-15));
    CHECK(c1.coefficient() == Approx(0.5).epsilon(1e-15));

    // t^3/3 -> s^{3/2}/(3/2)
    YoungFunction c2 = YoungFunction::power(3.0, 1.0 / 3.0).complementary();
    CHECK(c2.exponent() == Approx(1.5).epsilon(1e-15));
    CHECK(c2.coefficient() == Approx(2.0 / 3.0).epsilon(1e-15));

    // t^2 -> s^2/4
    YoungFunction c3 = YoungFunction::power(2.0).complementary();
    CHECK(c3.coefficient() == Approx(0.25).epsilon(1e-15));

    // biduality is exact on the power family
    YoungFunction bb = YoungFunction::power(2.7, 1.3).complementary().complementary();
    CHECK(bb.exponent() == Approx(2.7).epsilon(1e-13));
    CHECK(bb.coefficient() == Approx(1.3).epsilon(1e-13));
}

TEST_CASE("complement of a linear function is a jump", "[orlicz]") {
    YoungFunction jump = YoungFunction::power(1.0, 2.5).complementary();
    CHECK(jump.kind() == YoungFunction::Kind::threshold);
    CHECK(jump(2.5) == 0.0);
    CHECK(std::isinf(jump(2.5 + 1e-9)));
    // and back
    YoungFunction lin = jump.complementary();
    CHECK(lin.exponent() == 1.0);
    CHECK(lin.coefficient() == Approx(2.5));
}

TEST_CASE("sampling validation rejects non-young callables", "[orlicz]") {
    CHECK_THROWS_AS(YoungFunction::from_function([](double t) { return t + 0.5; }, "affine"),
                    domain_error);
    CHECK_THROWS_AS(
        YoungFunction::from_function([](double t) { return t / (1.0 + t); }, "concave"),
        domain_error);
    CHECK_THROWS_AS(
        YoungFunction::from_function([](double t) { return std::sqrt(t); }, "sqrt"),
        domain_error);
    // a genuine young function passes
    CHECK_NOTHROW(YoungFunction::from_function(
        [](double t) { return std::expm1(t); }, "exp-1", ProbeGrid{1e-6, 600.0, 20}));
}

TEST_CASE("tabulated young functions interpolate log-linearly", "[orlicz]") {
    YoungFunction tab = YoungFunction::tabulated(
        {{0.5, 0.25}, {1.0, 1.0}, {2.0, 4.0}, {4.0, 16.0}}, "tab-square");
    // pure-power data is reproduced exactly, including both extrapolations
    CHECK(tab(1.5) == Approx(2.25).epsilon(1e-13));
    CHECK(tab(0.1) == Approx(0.01).epsilon(1e-13));
    CHECK(tab(100.0) == Approx(1e4).epsilon(1e-13));
    CHECK(tab(0.0) == 0.0);

    CHECK_THROWS_AS(YoungFunction::tabulated({{1.0, 1.0}}), domain_error);
    CHECK_THROWS_AS(YoungFunction::tabulated({{1.0, 1.0}, {1.0, 2.0}}), domain_error);
    CHECK_THROWS_AS(YoungFunction::tabulated({{-1.0, 1.0}, {1.0, 2.0}}), domain_error);
    // concave data fails the convexity sweep
    CHECK_THROWS_AS(YoungFunction::tabulated({{0.5, 0.7}, {1.0, 1.0}, {2.0, 1.4}, {4.0, 2.0}}),
                    domain_error);
}

TEST_CASE("numeric legendre transform agrees with closed forms", "[orlicz]") {
    YoungFunction phi = YoungFunction::from_function(
        [](double t) { return 0.5 * t * t; }, "t^2/2");
    YoungFunction psi = phi.complementary();
    for (double s : {0.01, 0.1, 1.0, 7.0, 120.0})
        CHECK(psi(s) == Approx(0.5 * s * s).epsilon(1e-8));

    // fractional exponent: dual of t^p/p is s^q/q
    double p = 2.3, q = p / (p - 1.0);
    YoungFunction psi2 = YoungFunction::from_function(
                             [p](double t) { return std::pow(t, p) / p; }, "t^2.3/2.3")
                             .complementary();
    for (double s : {0.05, 0.5, 3.0, 40.0})
        CHECK(psi2(s) == Approx(std::pow(s, q) / q).epsilon(1e-8));
}

TEST_CASE("biduality holds on probes for sampled kinds", "[orlicz]") {
    double p = 2.3;
    YoungFunction phi = YoungFunction::from_function(
        [p](double t) { return std::pow(t, p) / p; }, "t^2.3/2.3");
    YoungFunction bidual = phi.complementary().complementary();
    for (double t : {0.01, 0.1, 0.7, 1.0, 5.0, 90.0})
        CHECK(bidual(t) == Approx(phi(t)).epsilon(1e-4));
}

TEST_CASE("linear-growth duals saturate, invisible slopes are refused", "[orlicz]") {
    // t^2/(1+t) has asymptotic slope 1: the dual is finite below it and
    // saturates above it
    YoungFunction phi = YoungFunction::from_function(
        [](double t) { return t * t / (1.0 + t); }, "t^2/(1+t)");
    YoungFunction psi = phi.complementary();
    double oracle_half = 0.0;  // dense scan stands in for the sup
    for (double t = 0.0; t < 10.0; t += 1e-5)
        oracle_half = std::max(oracle_half, 0.5 * t - t * t / (1.0 + t));
    CHECK(psi(0.5) == Approx(oracle_half).epsilon(1e-6));
    CHECK(std::isinf(psi(2.0)));

    // a slope under the probe floor cannot be told from zero
    YoungFunction shallow = YoungFunction::from_function(
        [](double t) { return 1e-8 * t; }, "shallow");
    CHECK_THROWS_AS(shallow.complementary(), unbounded_complementary);
}

TEST_CASE("doubling constants", "[orlicz]") {
    Delta2Result a = check_delta2(YoungFunction::power(2.0));
    CHECK(a.holds);
    CHECK(a.K == Approx(4.0).epsilon(1e-15));

    Delta2Result b = check_delta2(YoungFunction::power(1.5));
    CHECK(b.holds);
    CHECK(b.K == Approx(std::pow(2.0, 1.5)).epsilon(1e-15));

    Delta2Result c = check_delta2(YoungFunction::from_function(
        [](double t) { return std::expm1(t); }, "exp-1", ProbeGrid{1e-6, 600.0, 20}));
    CHECK_FALSE(c.holds);
    CHECK(std::isinf(c.K));

    // sampled power ratio is flat, so refinement leaves it alone
    Delta2Result d = check_delta2(YoungFunction::from_function(
        [](double t) { return t * t; }, "square"));
    CHECK(d.holds);
    CHECK(d.K == Approx(4.0).epsilon(1e-12));

    // extended-valued jump doubles straight into +inf
    Delta2Result e = check_delta2(YoungFunction::power(1.0).complementary());
    CHECK_FALSE(e.holds);
}

TEST_CASE("b_p classification", "[orlicz]") {
    // t^{4/3} lies in B_2 with integral 3/2 from c = 1
    BpResult r = check_bp(YoungFunction::power(4.0 / 3.0), 2.0);
    CHECK(r.in_bp);
    CHECK(r.integral == Approx(1.5).epsilon(1e-8));
    CHECK(r.tail_exponent == Approx(4.0 / 3.0));

    // the boundary power is log-divergent, never in B_p
    BpResult s = check_bp(YoungFunction::power(2.0), 2.0);
    CHECK_FALSE(s.in_bp);
    CHECK(std::isinf(s.integral));
    CHECK(s.delta2.holds);

    // linear growth sits well inside B_2
    BpResult t = check_bp(YoungFunction::power(1.0), 2.0);
    CHECK(t.in_bp);
    CHECK(t.integral == Approx(1.0).epsilon(1e-8));

    // supercritical growth diverges outright
    BpResult u = check_bp(YoungFunction::power(3.0), 2.0);
    CHECK_FALSE(u.in_bp);
    CHECK(std::isinf(u.integral));

    // lower cutoff scales the integral
    BpResult v = check_bp(YoungFunction::power(1.0), 2.0, 2.0);
    CHECK(v.integral == Approx(0.5).epsilon(1e-8));

    CHECK_THROWS_AS(check_bp(YoungFunction::power(1.5), 1.0), domain_error);
}

TEST_CASE("b_p refuses fitted exponents near the boundary", "[orlicz]") {
    YoungFunction near = YoungFunction::from_function(
        [](double t) { return std::pow(t, 1.98); }, "t^1.98");
    CHECK_THROWS_AS(check_bp(near, 2.0), inconclusive);

    YoungFunction clear = YoungFunction::from_function(
        [](double t) { return std::pow(t, 1.5); }, "t^1.5");
    BpResult r = check_bp(clear, 2.0);
    CHECK(r.in_bp);
    CHECK(r.tail_exponent == Approx(1.5).epsilon(1e-10));
    CHECK(r.integral == Approx(2.0).epsilon(1e-6));
}

TEST_CASE("luxembourg norm closed forms", "[orlicz]") {
    // avg of y^2 over the unit box with alpha = 0 is 1/3
    double n1 = luxembourg_norm(ScalarField::power_y(1.0), 0.0, 1.0, YoungFunction::power(2.0), 0.0);
    CHECK(n1 == Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));

    // constants are fixed points whenever phi(1) = 1
    double n2 = luxembourg_norm(ScalarField::constant(2.37), -1.0, 3.0, YoungFunction::power(3.0), 1.5);
    CHECK(n2 == Approx(2.37).epsilon(1e-12));

    // weighted measure: avg of y^2 against y dA over Q_[0,2) is 8/4 = 2
    double n3 = luxembourg_norm(ScalarField::power_y(1.0), 0.0, 2.0, YoungFunction::power(2.0), 1.0);
    CHECK(n3 == Approx(std::sqrt(2.0)).epsilon(1e-12));

    // dyadic interval overload
    double n4 = luxembourg_norm(ScalarField::power_y(1.0), DyadicInterval{0, 0, Shift::none},
                                YoungFunction::power(2.0), 0.0);
    CHECK(n4 == Approx(n1).epsilon(1e-14));

    CHECK(luxembourg_norm(ScalarField::constant(0.0), 0.0, 1.0, YoungFunction::power(2.0), 0.0) == 0.0);
    CHECK_THROWS_AS(luxembourg_norm(ScalarField::constant(1.0), 1.0, 1.0, YoungFunction::power(2.0), 0.0),
                    domain_error);
    CHECK_THROWS_AS(luxembourg_norm(ScalarField::constant(1.0), 0.0, 1.0,
                                    YoungFunction::power(1.0).complementary(), 0.0),
                    domain_error);
}

TEST_CASE("luxembourg norm collapses to power averages", "[orlicz]") {
    std::mt19937_64 rng(20240817u);
    std::uniform_real_distribution<double> pd(1.1, 4.0);
    std::uniform_real_distribution<double> ad(-0.9, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        Pwc w = random_pwc(rng, 5);
        double p = pd(rng), alpha = ad(rng);
        double got = luxembourg_norm(w.field(), 0.0, 1.0, YoungFunction::power(p), alpha);
        CHECK(got == Approx(std::pow(w.avg_pow(p), 1.0 / p)).epsilon(1e-12));
    }
}

TEST_CASE("luxembourg bisection matches the closed form", "[orlicz]") {
    // same young function fed through the sampled kind forces the log-lambda
    // bisection; answers agree to the bisection tolerance
    std::mt19937_64 rng(77u);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    for (int trial = 0; trial < 3; ++trial) {
        double p = 1.3 + 2.0 * ud(rng);
        double a = 0.2 + 1.5 * ud(rng);
        double c = 0.3 + 2.0 * ud(rng);
        double alpha = -0.5 + 2.0 * ud(rng);
        double L = trial == 0 ? 1.0 : 0.5 + ud(rng);
        YoungFunction gen = YoungFunction::from_function(
            [p](double t) { return std::pow(t, p); }, "t^p sampled");
        ScalarField f = ScalarField::monomial({c, 0.0, a}, "c y^a");
        double got = luxembourg_norm(f, 0.0, L, gen, alpha);
        // avg (c y^a)^p over Q against y^alpha
        double m = std::pow(c, p) * std::pow(L, a * p) * (1.0 + alpha) / (1.0 + alpha + a * p);
        CHECK(got == Approx(std::pow(m, 1.0 / p)).epsilon(1e-7));
    }
}

TEST_CASE("luxembourg norm is homogeneous and monotone", "[orlicz]") {
    YoungFunction gen = YoungFunction::from_function(
        [](double t) { return t * t; }, "square sampled");
    ScalarField f = ScalarField::power_y(1.0);
    double base = luxembourg_norm(f, 0.0, 1.0, gen, 0.0);
    double scaled = luxembourg_norm(ScalarField::constant(3.7) * f, 0.0, 1.0, gen, 0.0);
    CHECK(scaled == Approx(3.7 * base).epsilon(1e-7));

    Pwc lo, hi;
    lo.cuts = {0.0, 0.4, 1.0};
    lo.vals = {1.0, 2.0};
    hi.cuts = {0.0, 0.4, 1.0};
    hi.vals = {1.5, 2.0};
    double nlo = luxembourg_norm(lo.field(), 0.0, 1.0, YoungFunction::power(2.5), 0.3);
    double nhi = luxembourg_norm(hi.field(), 0.0, 1.0, YoungFunction::power(2.5), 0.3);
    CHECK(nlo <= nhi);
}

TEST_CASE("tabulated kinds run the bisection path", "[orlicz]") {
    YoungFunction tab = YoungFunction::tabulated(
        {{0.25, 0.0625}, {1.0, 1.0}, {4.0, 16.0}}, "tab-square");
    double got = luxembourg_norm(ScalarField::power_y(1.0), 0.0, 1.0, tab, 0.0);
    CHECK(got == Approx(1.0 / std::sqrt(3.0)).epsilon(1e-7));
}

TEST_CASE("amemiya norm closed forms", "[orlicz]") {
    YoungFunction psi = YoungFunction::power(2.0).complementary();  // s^2/4

    // with the exact complement of t^p the amemiya norm is the plain
    // p'-average: avg y^4 = 1/5 on the unit box
    double a1 = amemiya_norm(ScalarField::power_y(2.0), 0.0, 1.0, psi, 0.0);
    CHECK(a1 == Approx(1.0 / std::sqrt(5.0)).epsilon(1e-12));

    double a2 = amemiya_norm(ScalarField::constant(1.0), 0.0, 1.0, psi, 0.0);
    CHECK(a2 == Approx(1.0).epsilon(1e-12));

    // exponent-one kinds: the infimum is the scaled average, 2.5 * (1/2)
    double a3 = amemiya_norm(ScalarField::power_y(1.0), 0.0, 1.0, YoungFunction::power(1.0, 2.5), 0.0);
    CHECK(a3 == Approx(1.25).epsilon(1e-12));

    CHECK(amemiya_norm(ScalarField::constant(0.0), 0.0, 1.0, psi, 0.0) == 0.0);
    CHECK_THROWS_AS(amemiya_norm(ScalarField::constant(1.0), 0.0, 1.0,
                                 YoungFunction::power(1.0).complementary(), 0.0),
                    domain_error);
}

TEST_CASE("amemiya golden-section matches the closed form", "[orlicz]") {
    YoungFunction gen = YoungFunction::from_function(
        [](double s) { return 0.25 * s * s; }, "s^2/4 sampled");
    double got = amemiya_norm(ScalarField::power_y(2.0), 0.0, 1.0, gen, 0.0);
    CHECK(got == Approx(1.0 / std::sqrt(5.0)).epsilon(1e-7));

    // dyadic overload
    double viaI = amemiya_norm(ScalarField::power_y(2.0), DyadicInterval{0, 0, Shift::none},
                               YoungFunction::power(2.0).complementary(), 0.0);
    CHECK(viaI == Approx(1.0 / std::sqrt(5.0)).epsilon(1e-12));
}

TEST_CASE("hoelder pairing: pinned cases", "[orlicz]") {
    // constants: both sides are exactly 1
    HolderResult h1 = holder_check(ScalarField::constant(1.0), ScalarField::constant(1.0),
                                   0.0, 1.0, YoungFunction::power(2.0), 0.0);
    CHECK(h1.lhs == Approx(1.0).epsilon(1e-12));
    CHECK(h1.rhs == Approx(1.0).epsilon(1e-12));
    CHECK(h1.holds);

    // f = y, g = y^2: avg y^3 = 1/4 against sqrt(1/3) sqrt(1/5)
    HolderResult h2 = holder_check(ScalarField::power_y(1.0), ScalarField::power_y(2.0),
                                   0.0, 1.0, YoungFunction::power(2.0), 0.0);
    CHECK(h2.lhs == Approx(0.25).epsilon(1e-12));
    CHECK(h2.rhs == Approx(1.0 / std::sqrt(15.0)).epsilon(1e-12));
    CHECK(h2.holds);
}

TEST_CASE("hoelder pairing holds across random data", "[orlicz]") {
    std::mt19937_64 rng(4242u);
    std::uniform_real_distribution<double> pd(1.2, 4.0);
    std::uniform_real_distribution<double> ad(-0.5, 1.5);
    for (int trial = 0; trial < 1000; ++trial) {
        Pwc fa = random_pwc(rng, 4), gb = random_pwc(rng, 4);
        double p = pd(rng), alpha = ad(rng);
        HolderResult h = holder_check(fa.field(), gb.field(), 0.0, 1.0,
                                      YoungFunction::power(p), alpha);
        CHECK(h.holds);
        // independent evaluation of both sides on the merged partition
        double q = p / (p - 1.0);
        CHECK(h.rhs == Approx(std::pow(fa.avg_pow(p), 1.0 / p) *
                              std::pow(gb.avg_pow(q), 1.0 / q))
                           .epsilon(1e-10));
        std::vector<double> cuts;
        cuts.insert(cuts.end(), fa.cuts.begin(), fa.cuts.end());
        cuts.insert(cuts.end(), gb.cuts.begin(), gb.cuts.end());
        std::sort(cuts.begin(), cuts.end());
        double lhs = 0.0;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            if (cuts[i + 1] <= cuts[i]) continue;
            double mid = 0.5 * (cuts[i] + cuts[i + 1]);
            double fv = 0.0, gv = 0.0;
            for (std::size_t k = 0; k + 1 < fa.cuts.size(); ++k)
                if (mid >= fa.cuts[k] && mid < fa.cuts[k + 1]) fv = fa.vals[k];
            for (std::size_t k = 0; k + 1 < gb.cuts.size(); ++k)
                if (mid >= gb.cuts[k] && mid < gb.cuts[k + 1]) gv = gb.vals[k];
            lhs += fv * gv * (cuts[i + 1] - cuts[i]);
        }
        CHECK(h.lhs == Approx(lhs).epsilon(1e-10));
    }
}
