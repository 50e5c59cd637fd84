#pragma once

// Young functions and the Orlicz machinery built on them: Legendre
// complementation, the Delta_2 and B_p growth classes, and box-averaged
// Luxembourg / Amemiya norms over Carleson boxes.
//
// Conventions:
//   * a Young function vanishes at 0, is convex and nondecreasing, and
//     diverges at infinity; extended values (+inf) are legal and are used
//     as saturating sentinels, e.g. the complement of t -> t jumps to +inf
//     past the unit slope,
//   * power-kind functions carry their exponent as data, so growth
//     classification is exact for them and numeric fitting is reserved for
//     opaque callables,
//   * the Hoelder pairing uses the Luxembourg norm on the left factor and
//     the Amemiya norm on the right one; with the exact Legendre complement
//     of t^p the Amemiya norm collapses to the plain p'-average, which keeps
//     the pairing sharp with constant one.

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "field.hpp"
#include "geometry.hpp"
#include "integrate.hpp"
#include "quadrature.hpp"

namespace bbmax {

// Log-spaced evaluation grid shared by sampled validation, Legendre probes,
// and growth-class scans.
struct ProbeGrid {
    double t_lo{1e-6};
    double t_hi{1e6};
    int per_decade{20};

    std::vector<double> points() const {
        if (!(t_lo > 0.0) || !(t_hi > t_lo) || per_decade < 2)
            throw domain_error("ProbeGrid: need 0 < t_lo < t_hi and >= 2 points per decade");
        double decades = std::log10(t_hi / t_lo);
        int n = std::max(2, static_cast<int>(std::lround(decades * per_decade)));
        std::vector<double> pts(n + 1);
        for (int i = 0; i <= n; ++i) pts[i] = t_lo * std::pow(10.0, decades * i / n);
        pts.back() = t_hi;
        return pts;
    }
};

namespace detail {

inline std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

// sup_{t >= 0} (s t - phi(t)).  The objective is concave for convex phi, so
// the probe-grid argmax brackets the true maximizer between its neighbors
// and golden-section refinement converges cleanly.  Returns +inf when the
// objective is still rising at the top probe.
inline double legendre_sup(const std::function<double(double)>& phi, double s,
                           const ProbeGrid& grid) {
    if (s <= 0.0) return 0.0;
    std::vector<double> pts = grid.points();
    auto obj = [&](double t) {
        double v = phi(t);
        return std::isfinite(v) ? s * t - v : -kInf;
    };
    double best = 0.0;
    int bi = -1;
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
        double v = obj(pts[i]);
        if (v > best) {
            best = v;
            bi = i;
        }
    }
    if (bi == static_cast<int>(pts.size()) - 1) return kInf;
    double lo = bi <= 0 ? 0.0 : pts[bi - 1];
    double hi = bi < 0 ? pts.front() : pts[bi + 1];

    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
    double fc = obj(c), fd = obj(d);
    for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + hi); ++it) {
        if (fc < fd) {
            lo = c;
            c = d;
            fc = fd;
            d = lo + gr * (hi - lo);
            fd = obj(d);
        } else {
            hi = d;
            d = c;
            fd = fc;
            c = hi - gr * (hi - lo);
            fc = obj(c);
        }
    }
    return std::max({best, fc, fd, 0.0});
}

}  // namespace detail

class YoungFunction {
  public:
    enum class Kind {
        power,      // coef * t^p with p >= 1
        threshold,  // 0 for t <= c, +inf beyond (complement of a linear function)
        generic     // opaque callable, validated by sampling
    };

    // coef * t^p.  Exponent 1 is allowed; its complement is extended-valued.
    static YoungFunction power(double p, double coef = 1.0) {
        if (!(p >= 1.0)) throw domain_error("YoungFunction::power: exponent below 1");
        if (!(coef > 0.0)) throw domain_error("YoungFunction::power: coefficient must be positive");
        YoungFunction y;
        y.kind_ = Kind::power;
        y.p_ = p;
        y.coef_ = coef;
        y.name_ = (coef == 1.0 ? std::string("t^") + detail::fmt_num(p)
                               : detail::fmt_num(coef) + " t^" + detail::fmt_num(p));
        return y;
    }

    // t^{(p' r)'}: the power whose complement grows like t^{p' r}.  Used as
    // the bump scale attached to an exponent pair (p, r).
    static YoungFunction power_conjugate_bump(double p, double r) {
        if (!(p > 1.0)) throw domain_error("power_conjugate_bump: p must exceed 1");
        if (!(r >= 1.0)) throw domain_error("power_conjugate_bump: r must be at least 1");
        double pr = p / (p - 1.0) * r;
        return power(pr / (pr - 1.0));
    }

    static YoungFunction from_function(std::function<double(double)> fn, std::string name,
                                       const ProbeGrid& grid = {}) {
        YoungFunction y;
        y.kind_ = Kind::generic;
        y.fn_ = std::move(fn);
        y.name_ = std::move(name);
        y.validate(grid);
        return y;
    }

    // Log-linear interpolation through (t, value) samples; the end segments
    // extrapolate with their local growth exponent so the function is defined
    // on all of (0, inf).
    static YoungFunction tabulated(std::vector<std::pair<double, double>> pts,
                                   std::string name = "tabulated") {
        if (pts.size() < 2) throw domain_error("YoungFunction::tabulated: need at least 2 samples");
        std::sort(pts.begin(), pts.end());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (!(pts[i].first > 0.0) || !(pts[i].second >= 0.0) || !std::isfinite(pts[i].second))
                throw domain_error("YoungFunction::tabulated: samples must have t > 0, value >= 0");
            if (i > 0 && pts[i].first == pts[i - 1].first)
                throw domain_error("YoungFunction::tabulated: duplicate abscissa");
        }
        auto tab = std::make_shared<std::vector<std::pair<double, double>>>(std::move(pts));
        auto fn = [tab](double t) {
            const auto& v = *tab;
            if (t <= 0.0) return 0.0;
            std::size_t k = 0;
            while (k + 2 < v.size() && t > v[k + 1].first) ++k;
            auto [ta, ya] = v[k];
            auto [tb, yb] = v[k + 1];
            if (ya <= 0.0 || yb <= 0.0) {
                // linear fill where the log chart is unusable
                double w = (t - ta) / (tb - ta);
                return std::max(0.0, ya + w * (yb - ya));
            }
            double q = std::log(yb / ya) / std::log(tb / ta);
            double anchor_t = t <= ta ? ta : (t >= tb ? tb : ta);
            double anchor_y = t >= tb ? yb : ya;
            return anchor_y * std::pow(t / anchor_t, q);
        };
        ProbeGrid grid{tab->front().first * 0.5, tab->back().first * 2.0, 20};
        return from_function(std::move(fn), std::move(name), grid);
    }

    double operator()(double t) const {
        t = std::abs(t);
        switch (kind_) {
            case Kind::power:
                return t == 0.0 ? 0.0 : coef_ * std::pow(t, p_);
            case Kind::threshold:
                return t <= coef_ ? 0.0 : kInf;
            case Kind::generic:
                return t == 0.0 ? 0.0 : fn_(t);
        }
        return 0.0;
    }

    Kind kind() const { return kind_; }
    const std::string& name() const { return name_; }

    double exponent() const {
        if (kind_ != Kind::power) throw domain_error("YoungFunction: exponent of a non-power kind");
        return p_;
    }
    // power: leading coefficient; threshold: the jump location.
    double coefficient() const {
        if (kind_ == Kind::generic)
            throw domain_error("YoungFunction: coefficient of a generic kind");
        return coef_;
    }

    // Legendre transform psi(s) = sup_t (s t - phi(t)).  Closed form for the
    // power kinds (and exact biduality there); probe grid plus golden-section
    // for opaque callables.
    YoungFunction complementary(const ProbeGrid& grid = {}) const {
        switch (kind_) {
            case Kind::power: {
                if (p_ == 1.0) {
                    YoungFunction y;
                    y.kind_ = Kind::threshold;
                    y.coef_ = coef_;
                    y.name_ = "jump@" + detail::fmt_num(coef_);
                    return y;
                }
                double q = p_ / (p_ - 1.0);
                double cq = std::pow(coef_ * p_, -(q - 1.0)) / q;
                return power(q, cq);
            }
            case Kind::threshold:
                return power(1.0, coef_);
            case Kind::generic: {
                if (!std::isfinite(detail::legendre_sup(fn_, grid.t_lo, grid)))
                    throw unbounded_complementary(
                        name_ + ": Legendre transform diverges arbitrarily close to s = 0");
                auto base = fn_;
                ProbeGrid g = grid;
                return from_function(
                    [base, g](double s) { return detail::legendre_sup(base, s, g); },
                    "legendre(" + name_ + ")", grid);
            }
        }
        throw domain_error("YoungFunction: unknown kind");
    }

  private:
    YoungFunction() = default;

    // Sampling validation: vanishing at 0, monotone, midpoint-convex, and
    // still climbing across the top decade.  Extended values pass once the
    // function has saturated for good.
    void validate(const ProbeGrid& grid) const {
        if (!(fn_(0.0) == 0.0))
            throw domain_error(name_ + ": Young function must vanish at 0");
        std::vector<double> pts = grid.points();
        std::vector<double> vals(pts.size());
        double prev = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            double v = fn_(pts[i]);
            if (std::isnan(v) || v < 0.0)
                throw domain_error(name_ + ": negative or NaN sample at t = " +
                                   detail::fmt_num(pts[i]));
            if (v < prev * (1.0 - 1e-12))
                throw domain_error(name_ + ": not nondecreasing near t = " +
                                   detail::fmt_num(pts[i]));
            vals[i] = v;
            prev = v;
        }
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            if (!std::isfinite(vals[i + 1])) break;
            double mid = fn_(0.5 * (pts[i] + pts[i + 1]));
            if (mid > 0.5 * (vals[i] + vals[i + 1]) * (1.0 + 1e-6) + 1e-300)
                throw domain_error(name_ + ": midpoint convexity fails near t = " +
                                   detail::fmt_num(pts[i]));
        }
        std::size_t n = pts.size();
        if (std::isfinite(vals[n - 1]) && !(vals[n - 1] > vals[n - 2]))
            throw domain_error(name_ + ": no growth across the top probe decade");
    }

    Kind kind_{Kind::power};
    double p_{1.0};
    double coef_{1.0};
    std::function<double(double)> fn_;
    std::string name_;
};

// ---- growth classes --------------------------------------------------------

struct Delta2Result {
    bool holds{false};
    double K{0.0};  // sup phi(2t) / phi(t) over the probe range
};

// Doubling constant.  Power kinds are exact (ratio is identically 2^p).  For
// sampled kinds the sup must stay put when the probe range is extended a
// decade upward, otherwise the ratio is judged unbounded.
inline Delta2Result check_delta2(const YoungFunction& phi, double t_lo = 1e-4,
                                 double t_hi = 1e4, int per_decade = 16) {
    if (phi.kind() == YoungFunction::Kind::power)
        return {true, std::pow(2.0, phi.exponent())};
    auto sup_on = [&phi, per_decade](double lo, double hi) {
        double K = 0.0;
        for (double t : ProbeGrid{lo, hi, per_decade}.points()) {
            double a = phi(t), b = phi(2.0 * t);
            if (a == 0.0) {
                if (b > 0.0) return kInf;
                continue;
            }
            if (!std::isfinite(b)) return kInf;
            K = std::max(K, b / a);
        }
        return K;
    };
    double K = sup_on(t_lo, t_hi);
    double K_ext = sup_on(t_lo, 10.0 * t_hi);
    bool holds = std::isfinite(K) && std::isfinite(K_ext) && K_ext <= K * 1.01;
    return {holds, K};
}

struct BpResult {
    bool in_bp{false};
    double integral{0.0};       // int_c^inf phi(t) t^{-p-1} dt, +inf when divergent
    double tail_exponent{0.0};  // growth exponent governing the tail
    Delta2Result delta2;
};

// Membership of phi in the B_p integrability class: Delta_2 plus convergence
// of the normalized tail integral.  The body [c, cap] is quadrature in log
// coordinates; past the cap the integrand is extrapolated as a pure power
// with the growth exponent of phi.  Power kinds supply that exponent exactly,
// so t^p lands on the divergence boundary and is classified divergent; for
// fitted kinds a result within 0.05 of the boundary is refused.
inline BpResult check_bp(const YoungFunction& phi, double p, double c = 1.0,
                         double cap = 1e8, const QuadratureSpec& spec = {}) {
    if (!(p > 1.0)) throw domain_error("check_bp: p must exceed 1");
    if (!(c > 0.0) || !(cap > 100.0 * c)) throw domain_error("check_bp: need 0 < 100 c < cap");
    BpResult res;
    res.delta2 = check_delta2(phi);
    if (!std::isfinite(phi(cap))) {
        res.integral = kInf;
        res.tail_exponent = kInf;
        return res;
    }

    if (phi.kind() == YoungFunction::Kind::power) {
        res.tail_exponent = phi.exponent();
    } else {
        // least-squares log-log slope across the decade below the cap
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        int n = 17;
        for (int i = 0; i < n; ++i) {
            double t = cap * std::pow(10.0, -1.0 + static_cast<double>(i) / (n - 1));
            double v = phi(t);
            if (!(v > 0.0)) throw domain_error("check_bp: vanishing sample near the cap");
            double lx = std::log(t), ly = std::log(v);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        res.tail_exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        if (std::abs(res.tail_exponent - p) <= 0.05)
            throw inconclusive("check_bp: fitted tail exponent " +
                               detail::fmt_num(res.tail_exponent) +
                               " within 0.05 of the divergence boundary " + detail::fmt_num(p));
    }

    if (res.tail_exponent >= p) {
        res.integral = kInf;
        return res;
    }
    IntegralValue body = integrate_1d(
        [&phi, p](double u) { return phi(std::exp(u)) * std::exp(-p * u); }, std::log(c),
        std::log(cap), spec);
    double tail = phi(cap) * std::pow(cap, -p) / (p - res.tail_exponent);
    res.integral = body.value + tail;
    res.in_bp = res.delta2.holds;
    return res;
}

// ---- box-averaged Orlicz norms ---------------------------------------------

namespace detail {

inline double box_average(const ScalarField& g, double x0, double x1, double alpha,
                          const QuadratureSpec& spec) {
    return integrate_box(g, x0, x1, alpha, spec).value / box_measure_alpha(x1 - x0, alpha);
}

// Average of phi(scale * f) over the box; +inf when the integral refuses to
// converge (the singularity then sits on the saturated side of the norm
// bracket, so divergence is an answer, not an error).
inline double phi_average(const ScalarField& f, double x0, double x1,
                          const YoungFunction& phi, double scale, double alpha,
                          const QuadratureSpec& spec) {
    ScalarField g = ScalarField::generic(
        [f, phi, scale](double x, double y) { return phi(scale * f(x, y)); },
        "phi(scale f)");
    try {
        return box_average(g, x0, x1, alpha, spec);
    } catch (const non_convergent&) {
        return kInf;
    }
}

}  // namespace detail

// Luxembourg norm over the Carleson box above [x0, x1):
//   inf { lam > 0 : avg_{Q, dV_alpha} phi(f / lam) <= 1 }.
// Power kinds collapse to the plain p-average (with the coefficient folded
// in); other kinds run a monotone bisection in log lam to relative 1e-8.
inline double luxembourg_norm(const ScalarField& f, double x0, double x1,
                              const YoungFunction& phi, double alpha,
                              const QuadratureSpec& spec = {}) {
    if (!(x1 > x0)) throw domain_error("luxembourg_norm: empty interval");
    if (phi.kind() == YoungFunction::Kind::threshold)
        throw domain_error("luxembourg_norm: extended-valued kinds need an essential sup, "
                           "which sampled quadrature cannot certify");
    if (phi.kind() == YoungFunction::Kind::power) {
        double p = phi.exponent();
        double m = detail::box_average(pow(f, p), x0, x1, alpha, spec);
        return std::pow(phi.coefficient() * m, 1.0 / p);
    }

    if (detail::box_average(f, x0, x1, alpha, spec) == 0.0) return 0.0;
    auto G = [&](double lam) {
        return detail::phi_average(f, x0, x1, phi, 1.0 / lam, alpha, spec);
    };
    double hi = 1.0;
    int guard = 0;
    while (G(hi) > 1.0) {
        hi *= 2.0;
        if (++guard > 1100) throw non_convergent("luxembourg_norm: no finite bracket");
    }
    double lo = hi * 0.5;
    while (G(lo) <= 1.0) {
        hi = lo;
        lo *= 0.5;
        if (++guard > 2200) return 0.0;
    }
    while (hi > lo * (1.0 + 1e-8)) {
        double mid = std::sqrt(lo * hi);
        (G(mid) <= 1.0 ? hi : lo) = mid;
    }
    return hi;
}

inline double luxembourg_norm(const ScalarField& f, const DyadicInterval& I,
                              const YoungFunction& phi, double alpha,
                              const QuadratureSpec& spec = {}) {
    double l = I.left().to_double();
    return luxembourg_norm(f, l, l + I.length(), phi, alpha, spec);
}

// Amemiya norm over the same box:  inf_{k > 0} (1 + avg psi(k f)) / k.
// For power kinds the infimum is stationary in closed form; in particular
// with the exact Legendre complement of t^p it reduces to the p'-average,
// which is what makes the Hoelder pairing below sharp.  Other kinds run a
// golden-section search on log k.
inline double amemiya_norm(const ScalarField& f, double x0, double x1,
                           const YoungFunction& psi, double alpha,
                           const QuadratureSpec& spec = {}) {
    if (!(x1 > x0)) throw domain_error("amemiya_norm: empty interval");
    if (psi.kind() == YoungFunction::Kind::threshold)
        throw domain_error("amemiya_norm: extended-valued kinds need an essential sup, "
                           "which sampled quadrature cannot certify");
    if (psi.kind() == YoungFunction::Kind::power) {
        double m = psi.exponent(), cm = psi.coefficient();
        double A = detail::box_average(pow(f, m), x0, x1, alpha, spec);
        if (A == 0.0) return 0.0;
        if (m == 1.0) return cm * A;  // infimum approached as k -> inf
        double k = std::pow((m - 1.0) * cm * A, -1.0 / m);
        return (1.0 + cm * std::pow(k, m) * A) / k;
    }

    if (detail::box_average(f, x0, x1, alpha, spec) == 0.0) return 0.0;
    auto h = [&](double lk) {
        double k = std::exp(lk);
        return (1.0 + detail::phi_average(f, x0, x1, psi, k, alpha, spec)) / k;
    };
    double lk = 0.0, step = std::log(2.0);
    double h0 = h(lk), hp = h(lk + step), hm = h(lk - step);
    int guard = 0;
    while (hp < h0) {
        lk += step;
        hm = h0;
        h0 = hp;
        hp = h(lk + step);
        if (++guard > 2200) throw non_convergent("amemiya_norm: objective keeps descending");
    }
    while (hm < h0) {
        lk -= step;
        hp = h0;
        h0 = hm;
        hm = h(lk - step);
        if (++guard > 2200) throw non_convergent("amemiya_norm: objective keeps descending");
    }
    double lo = lk - step, hi = lk + step;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
    double fc = h(c), fd = h(d);
    while (hi - lo > 1e-5) {
        if (fc > fd) {
            lo = c;
            c = d;
            fc = fd;
            d = lo + gr * (hi - lo);
            fd = h(d);
        } else {
            hi = d;
            d = c;
            fd = fc;
            c = hi - gr * (hi - lo);
            fc = h(c);
        }
    }
    return std::min(fc, fd);
}

inline double amemiya_norm(const ScalarField& f, const DyadicInterval& I,
                           const YoungFunction& psi, double alpha,
                           const QuadratureSpec& spec = {}) {
    double l = I.left().to_double();
    return amemiya_norm(f, l, l + I.length(), psi, alpha, spec);
}

// ---- Hoelder pairing -------------------------------------------------------

struct HolderResult {
    double lhs{0.0};  // box average of f g
    double rhs{0.0};  // ||f||_phi (Luxembourg) * ||g||_psi (Amemiya, psi = complement)
    bool holds{false};
};

// Generalized Hoelder over the box: avg(fg) <= ||f||_phi ||g||_psi with
// constant one.  The slack only absorbs quadrature noise.
inline HolderResult holder_check(const ScalarField& f, const ScalarField& g, double x0,
                                 double x1, const YoungFunction& phi, double alpha,
                                 const QuadratureSpec& spec = {}, double slack = 1e-7) {
    HolderResult r;
    r.lhs = detail::box_average(f * g, x0, x1, alpha, spec);
    YoungFunction psi = phi.complementary();
    r.rhs = luxembourg_norm(f, x0, x1, phi, alpha, spec) *
            amemiya_norm(g, x0, x1, psi, alpha, spec);
    r.holds = r.lhs <= r.rhs * (1.0 + slack) + 1e-300;
    return r;
}

inline HolderResult holder_check(const ScalarField& f, const ScalarField& g,
                                 const DyadicInterval& I, const YoungFunction& phi,
                                 double alpha, const QuadratureSpec& spec = {},
                                 double slack = 1e-7) {
    double l = I.left().to_double();
    return holder_check(f, g, l, l + I.length(), phi, alpha, spec, slack);
}

}  // namespace bbmax
