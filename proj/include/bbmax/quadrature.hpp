#pragma once

// Quadrature primitives shared by the integration engine: cached
// Gauss-Legendre rules, an adaptive 1-D integrator with geometric
// refinement toward flagged (integrable-singular) endpoints, and the
// closed-form one-dimensional moments the engine peels off analytically.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

#include "bbmax/errors.hpp"

namespace bbmax {

struct QuadratureSpec {
    double rel_tol{1e-10};
    double abs_tol{1e-14};
    int max_depth{60};        // geometric strip / panel refinement budget
    int nodes_per_axis{16};   // Gauss-Legendre order per panel
    double tail_tol{1e-3};    // truncation-flag threshold for windowed norms

    QuadratureSpec with_rel(double r) const {
        QuadratureSpec s = *this;
        s.rel_tol = r;
        return s;
    }
};

struct IntegralValue {
    double value{0.0};
    double err{0.0};
};

namespace quad {

struct Rule {
    std::vector<double> x;  // nodes on (-1, 1)
    std::vector<double> w;
};

// Legendre nodes by Newton iteration on P_n; cached per order.
inline const Rule& gauss_legendre(int n) {
    static std::mutex mu;
    static std::map<int, Rule> cache;
    std::scoped_lock lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    Rule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 0; k < n; ++k) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k + 1.0) * x * p1 - k * p2) / (k + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        r.x[i] = x;
        r.w[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    }
    auto [pos, ok] = cache.emplace(n, std::move(r));
    return pos->second;
}

inline double panel(const std::function<double(double)>& f, double a, double b, int n) {
    const Rule& r = gauss_legendre(n);
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * f(mid + half * r.x[i]);
    return s * half;
}

}  // namespace quad

struct SingularEnds {
    bool at_a{false};
    bool at_b{false};
};

namespace detail {

// Adaptive bisection for a panel that is smooth in its interior.
class Adaptive1D {
  public:
    Adaptive1D(std::function<double(double)> f, const QuadratureSpec& spec)
        : f_(std::move(f)), spec_(spec) {}

    double total() const { return total_; }
    double err() const { return err_; }

    void smooth(double lo, double hi) {
        if (!(hi > lo)) return;
        refine(lo, hi, quad::panel(f_, lo, hi, spec_.nodes_per_axis), 0);
    }

    // Geometric strips shrinking toward the singular endpoint `end`
    // (other endpoint `far`).  For power-type singularities the strip sums
    // are exactly geometric, so the leftover tail is recovered from the
    // measured ratio; a ratio >= 0.97 means the integral is too close to
    // divergence to extrapolate.
    void toward(double end, double far) {
        double len = far - end;  // signed
        double prev_piece = 0.0, prev_ratio = 0.0;
        double before = total_;
        for (int k = 0;; ++k) {
            double d1 = len * std::ldexp(1.0, -k);
            double d0 = len * std::ldexp(1.0, -(k + 1));
            double lo = end + std::min(d0, d1);
            double hi = end + std::max(d0, d1);
            double mark = total_;
            smooth(lo, hi);
            double piece = total_ - mark;
            double ratio = prev_piece != 0.0 ? piece / prev_piece : 0.0;
            bool small = std::abs(piece) <
                         spec_.abs_tol + spec_.rel_tol * (std::abs(total_) + std::abs(before));
            if ((k > 2 && small) || k >= spec_.max_depth) {
                if (!(ratio >= 0.0 && ratio < 0.97))
                    throw non_convergent("integrate: endpoint tail near divergence");
                double tail = piece * ratio / (1.0 - ratio);
                total_ += tail;
                err_ += std::abs(tail) *
                        std::min(1.0, std::abs(ratio - prev_ratio) / (1.0 - ratio));
                return;
            }
            prev_piece = piece;
            prev_ratio = ratio;
        }
    }

  private:
    void refine(double lo, double hi, double coarse, int depth) {
        double mid = 0.5 * (lo + hi);
        double s1 = quad::panel(f_, lo, mid, spec_.nodes_per_axis);
        double s2 = quad::panel(f_, mid, hi, spec_.nodes_per_axis);
        double fine = s1 + s2;
        double delta = std::abs(fine - coarse);
        double tol = spec_.abs_tol + spec_.rel_tol * (std::abs(total_) + std::abs(fine));
        if (delta < tol || depth >= spec_.max_depth) {
            total_ += fine;
            err_ += delta;
            return;
        }
        refine(lo, mid, s1, depth + 1);
        refine(mid, hi, s2, depth + 1);
    }

    const std::function<double(double)> f_;
    const QuadratureSpec& spec_;
    double total_{0.0};
    double err_{0.0};
};

}  // namespace detail

// Adaptive integral of f over (a, b).  Endpoints flagged in `singular` get
// geometric refinement (handles integrable power singularities such as
// sin(t)^b with b in (-1, 0)); `breakpoints` seed panel boundaries where f
// has corners.
inline IntegralValue integrate_1d(const std::function<double(double)>& f, double a, double b,
                                  const QuadratureSpec& spec, SingularEnds sing = {},
                                  const std::vector<double>& breakpoints = {}) {
    if (!(b > a)) return {0.0, 0.0};

    std::vector<double> cuts{a, b};
    for (double c : breakpoints)
        if (c > a && c < b) cuts.push_back(c);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    detail::Adaptive1D acc(f, spec);
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        double lo = cuts[i], hi = cuts[i + 1];
        bool sa = (i == 0) && sing.at_a;
        bool sb = (i + 2 == cuts.size()) && sing.at_b;
        if (sa && sb) {
            double mid = 0.5 * (lo + hi);
            acc.toward(lo, mid);
            acc.toward(hi, mid);
        } else if (sa) {
            acc.toward(lo, hi);
        } else if (sb) {
            acc.toward(hi, lo);
        } else {
            acc.smooth(lo, hi);
        }
    }
    return {acc.total(), acc.err()};
}

// ---- closed-form 1-D moments -------------------------------------------

// int_{y0}^{y1} y^t dy
inline double power_moment(double t, double y0, double y1) {
    if (y0 < 0.0 || y1 < y0) throw domain_error("power_moment: bad range");
    if (y0 == y1) return 0.0;
    if (t == -1.0) {
        if (y0 == 0.0) throw non_integrable("power_moment: log divergence at 0");
        return std::log(y1 / y0);
    }
    double e = t + 1.0;
    if (y0 == 0.0) {
        if (e <= 0.0) throw non_integrable("power_moment: divergent at 0");
        return std::pow(y1, e) / e;
    }
    return (std::pow(y1, e) - std::pow(y0, e)) / e;
}

// int_{y0}^{y1} y^t ln y dy
inline double power_log_moment(double t, double y0, double y1) {
    if (y0 < 0.0 || y1 < y0) throw domain_error("power_log_moment: bad range");
    if (y0 == y1) return 0.0;
    double e = t + 1.0;
    if (e <= 0.0 && y0 == 0.0) throw non_integrable("power_log_moment: divergent at 0");
    if (e == 0.0) {
        double l0 = std::log(y0), l1 = std::log(y1);
        return 0.5 * (l1 * l1 - l0 * l0);
    }
    auto anti = [&](double y) {
        if (y == 0.0) return 0.0;  // valid limit for e > 0
        return std::pow(y, e) * (e * std::log(y) - 1.0) / (e * e);
    };
    return anti(y1) - anti(y0);
}

// S_b = int_0^pi sin(t)^b dt, b > -1, by adaptive quadrature (cached).
// Computed as 2 int_0^(pi/2) by symmetry so the singular endpoint sits at
// zero, where doubles resolve the tail.  Tests cross-check against
// sqrt(pi) Gamma((b+1)/2) / Gamma(b/2 + 1).
inline double sine_moment(double b) {
    if (!(b > -1.0)) throw domain_error("sine_moment: exponent <= -1");
    static std::mutex mu;
    static std::map<double, double> cache;
    {
        std::scoped_lock lock(mu);
        auto it = cache.find(b);
        if (it != cache.end()) return it->second;
    }
    QuadratureSpec spec;
    spec.rel_tol = 1e-13;
    auto f = [b](double t) { return std::pow(std::sin(t), b); };
    IntegralValue v =
        integrate_1d(f, 0.0, std::numbers::pi / 2, spec, {b < 0.0, false}, {});
    std::scoped_lock lock(mu);
    cache[b] = 2.0 * v.value;
    return cache[b];
}

}  // namespace bbmax
