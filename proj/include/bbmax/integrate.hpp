#pragma once

// Integration engine for scalar fields against dV_a = y^a dx dy.
//
// Dispatch per monomial term over a rectangular cell:
//   * s == 0, no disk cut           -> separable closed form (exact)
//   * s != 0 or the disk cuts       -> polar reduction: the r-integral of
//     r^(s+t+a+1) over the convex cell-with-disk region is exact for every
//     ray, leaving one adaptive theta-integral with corner breakpoints.
//     This stays accurate for integrands with an integrable singularity at
//     the origin (the only singular point monomials admit).
// Generic fields take tensor Gauss-Legendre with adaptive quad-splitting;
// cells touching y = 0 are first cut into geometric strips with tail
// extrapolation so the y^a weight never meets a panel edge.

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "bbmax/field.hpp"
#include "bbmax/geometry.hpp"
#include "bbmax/quadrature.hpp"

namespace bbmax {

namespace detail {

// r-range of {r (cos t, sin t)} inside rect [x0,x1] x [y0,y1], r <= R.
// Returns false when empty.
inline bool ray_range(double ct, double st, const Rect& r, double R, double* lo, double* hi) {
    double rlo = r.y0 / st;
    double rhi = r.y1 == kInf ? kInf : r.y1 / st;
    if (ct > 0.0) {
        if (r.x1 < 0.0) return false;
        if (r.x0 > 0.0) rlo = std::max(rlo, r.x0 / ct);
        if (r.x1 != kInf) rhi = std::min(rhi, r.x1 / ct);
    } else if (ct < 0.0) {
        if (r.x0 > 0.0) return false;
        if (r.x1 < 0.0) rlo = std::max(rlo, r.x1 / ct);
        if (r.x0 != -kInf) rhi = std::min(rhi, r.x0 / ct);
    } else {
        if (r.x0 > 0.0 || r.x1 < 0.0) return false;
    }
    rhi = std::min(rhi, R);
    if (!(rhi > rlo)) return false;
    *lo = rlo;
    *hi = rhi;
    return true;
}

// Adaptive tensor Gauss-Legendre for a generic integrand over a rect with
// y0 > 0 (smooth weight).
inline IntegralValue tensor_2d(const std::function<double(double, double)>& f, const Rect& r,
                               const QuadratureSpec& spec) {
    const int n = std::max(6, spec.nodes_per_axis / 2);
    auto tensor = [&](const Rect& c) {
        const quad::Rule& rule = quad::gauss_legendre(n);
        double mx = 0.5 * (c.x0 + c.x1), hx = 0.5 * (c.x1 - c.x0);
        double my = 0.5 * (c.y0 + c.y1), hy = 0.5 * (c.y1 - c.y0);
        double s = 0.0;
        for (size_t i = 0; i < rule.x.size(); ++i)
            for (size_t j = 0; j < rule.x.size(); ++j)
                s += rule.w[i] * rule.w[j] * f(mx + hx * rule.x[i], my + hy * rule.x[j]);
        return s * hx * hy;
    };
    double total = 0.0, err = 0.0;
    std::function<void(const Rect&, double, int)> rec = [&](const Rect& c, double coarse,
                                                            int depth) {
        double mx = 0.5 * (c.x0 + c.x1), my = 0.5 * (c.y0 + c.y1);
        Rect q[4] = {{c.x0, mx, c.y0, my}, {mx, c.x1, c.y0, my}, {c.x0, mx, my, c.y1},
                     {mx, c.x1, my, c.y1}};
        double sv[4], fine = 0.0;
        for (int i = 0; i < 4; ++i) {
            sv[i] = tensor(q[i]);
            fine += sv[i];
        }
        double delta = std::abs(fine - coarse);
        double tol = spec.abs_tol + spec.rel_tol * (std::abs(total) + std::abs(fine));
        if (delta < tol || depth >= spec.max_depth) {
            total += fine;
            err += delta;
            return;
        }
        for (int i = 0; i < 4; ++i) rec(q[i], sv[i], depth + 1);
    };
    rec(r, tensor(r), 0);
    return {total, err};
}

// One monomial term over a bounded region (rect already intersected with the
// term's support), possibly cut by |z| <= R, against y^alpha.
inline IntegralValue monomial_cell(const Monomial& m, Rect region, double alpha,
                                   const QuadratureSpec& spec) {
    if (region.empty() || m.coef == 0.0) return {0.0, 0.0};
    double R = m.disk;
    if (R != kInf) {
        // clip to the disk's bounding box; decide whether the arc matters
        region = region.intersect(Rect{-R, R, 0.0, R});
        if (region.empty()) return {0.0, 0.0};
        if (region.dist_origin() >= R) return {0.0, 0.0};
        double far = 0.0;
        for (double cx : {region.x0, region.x1})
            for (double cy : {region.y0, region.y1})
                far = std::max(far, std::hypot(cx, cy));
        if (far <= R) R = kInf;  // disk inactive on this region
    }

    double te = m.t + alpha;
    if (m.s == 0.0 && R == kInf) {
        double v = m.coef * (region.x1 - region.x0) * power_moment(te, region.y0, region.y1);
        return {v, 0.0};
    }

    // polar reduction
    double K = m.s + m.t + alpha + 2.0;
    double tlo = std::numbers::pi, thi = 0.0;
    std::vector<double> breaks;
    for (double cx : {region.x0, region.x1})
        for (double cy : {region.y0, region.y1}) {
            if (cx == 0.0 && cy == 0.0) continue;
            double a = std::atan2(cy, cx);
            tlo = std::min(tlo, a);
            thi = std::max(thi, a);
            breaks.push_back(a);
        }
    if (region.x0 <= 0.0 && region.x1 >= 0.0) {
        if (region.y0 == 0.0) {
            tlo = std::min(tlo, region.x1 > 0.0 ? 0.0 : std::numbers::pi / 2);
            thi = std::max(thi, region.x0 < 0.0 ? std::numbers::pi : std::numbers::pi / 2);
        }
        breaks.push_back(std::numbers::pi / 2);
    }
    if (R != kInf) {
        // angles where the arc meets the rect edges
        auto add_if = [&](double x, double y) {
            if (x >= region.x0 && x <= region.x1 && y >= region.y0 && y <= region.y1)
                breaks.push_back(std::atan2(y, x));
        };
        for (double cx : {region.x0, region.x1})
            if (std::abs(cx) < R) add_if(cx, std::sqrt(R * R - cx * cx));
        for (double cy : {region.y0, region.y1})
            if (cy < R && cy > 0.0) {
                double cx = std::sqrt(R * R - cy * cy);
                add_if(cx, cy);
                add_if(-cx, cy);
            }
    }
    if (!(thi > tlo)) return {0.0, 0.0};

    bool touches_origin = region.y0 == 0.0 && region.x0 <= 0.0 && region.x1 >= 0.0;
    if (touches_origin && K <= 0.0)
        throw non_integrable("monomial not integrable at the origin");

    double Rcap = R == kInf ? kInf : R;
    auto eval_ray = [&, Rcap](double ct, double st) {
        double rlo = 0.0, rhi = 0.0;
        if (!ray_range(ct, st, region, Rcap, &rlo, &rhi)) return 0.0;
        double rpart;
        if (K == 0.0) {
            rpart = std::log(rhi / rlo);
        } else if (rlo == 0.0) {
            rpart = std::pow(rhi, K) / K;
        } else {
            rpart = (std::pow(rhi, K) - std::pow(rlo, K)) / K;
        }
        double w = te == 0.0 ? 1.0 : std::pow(st, te);
        return w * rpart;
    };

    // Split at pi/2 and mirror the left half-plane piece to phi = pi - th,
    // so every singular endpoint sits at 0 where doubles can resolve the
    // geometric tail (near pi the strip widths underflow the ulp).
    const double half_pi = std::numbers::pi / 2;
    bool sing_low = region.y0 == 0.0 && (te < 0.0 || tlo == 0.0);
    bool sing_high = region.y0 == 0.0 && (te < 0.0 || thi == std::numbers::pi);
    IntegralValue v;
    if (tlo < half_pi) {
        auto f = [&](double th) { return eval_ray(std::cos(th), std::sin(th)); };
        IntegralValue p =
            integrate_1d(f, tlo, std::min(thi, half_pi), spec, {sing_low, false}, breaks);
        v.value += p.value;
        v.err += p.err;
    }
    if (thi > half_pi) {
        auto f = [&](double ph) { return eval_ray(-std::cos(ph), std::sin(ph)); };
        std::vector<double> mirrored;
        for (double c : breaks) mirrored.push_back(std::numbers::pi - c);
        IntegralValue p =
            integrate_1d(f, std::numbers::pi - thi, std::numbers::pi - std::max(tlo, half_pi),
                         spec, {sing_high, false}, mirrored);
        v.value += p.value;
        v.err += p.err;
    }
    return {m.coef * v.value, std::abs(m.coef) * v.err};
}

}  // namespace detail

// Integral of f dV_alpha over a rect cell with y0 >= 0.
inline IntegralValue integrate_cell(const ScalarField& f, const Rect& cell, double alpha,
                                    const QuadratureSpec& spec = {}) {
    if (!(alpha > -1.0)) throw domain_error("integrate_cell: alpha must exceed -1");
    if (cell.empty()) return {0.0, 0.0};
    if (!f.is_generic()) {
        IntegralValue total;
        for (const Monomial& m : f.terms()) {
            IntegralValue v = detail::monomial_cell(m, cell.intersect(m.support), alpha, spec);
            total.value += v.value;
            total.err += v.err;
        }
        return total;
    }

    auto weighted = [&f, alpha](double x, double y) { return f(x, y) * std::pow(y, alpha); };
    if (cell.y0 > 0.0) return detail::tensor_2d(weighted, cell, spec);

    // strip decomposition toward y = 0; strip sums are exactly geometric
    // for power-law behavior near the axis, so the leftover tail comes
    // from the measured ratio
    double total = 0.0, err = 0.0, prev = 0.0, prev_ratio = 0.0;
    for (int k = 0;; ++k) {
        double y1 = cell.y1 * std::ldexp(1.0, -k);
        double y0 = cell.y1 * std::ldexp(1.0, -(k + 1));
        IntegralValue v =
            detail::tensor_2d(weighted, Rect{cell.x0, cell.x1, y0, y1}, spec);
        total += v.value;
        err += v.err;
        double ratio = prev != 0.0 ? v.value / prev : 0.0;
        bool small = std::abs(v.value) < spec.abs_tol + spec.rel_tol * std::abs(total);
        if ((k > 2 && small) || k >= spec.max_depth) {
            if (!(ratio >= 0.0 && ratio < 0.97))
                throw non_convergent("integrate_cell: tail near divergence at y = 0");
            double tail = v.value * ratio / (1.0 - ratio);
            total += tail;
            err += std::abs(tail) *
                   std::min(1.0, std::abs(ratio - prev_ratio) / (1.0 - ratio));
            break;
        }
        prev = v.value;
        prev_ratio = ratio;
    }
    return {total, err};
}

// Integral of f dV_alpha over the Carleson box above [x0, x1).
inline IntegralValue integrate_box(const ScalarField& f, double x0, double x1, double alpha,
                                   const QuadratureSpec& spec = {}) {
    if (!(x1 > x0)) throw domain_error("integrate_box: empty interval");
    return integrate_cell(f, Rect{x0, x1, 0.0, x1 - x0}, alpha, spec);
}

inline IntegralValue integrate_box(const ScalarField& f, const DyadicInterval& I, double alpha,
                                   const QuadratureSpec& spec = {}) {
    double l = I.left().to_double();
    return integrate_cell(f, Rect{l, l + I.length(), 0.0, I.length()}, alpha, spec);
}

// Exact closed form for c |z|^s y^t over the half-disk |z| <= R: the polar
// factorization  S_(t+alpha) R^(s+t+alpha+2) / (s+t+alpha+2).
inline double halfdisk_power_integral(double s, double t, double alpha, double R) {
    double K = s + t + alpha + 2.0;
    if (!(K > 0.0)) throw non_integrable("halfdisk moment: divergent at the origin");
    return sine_moment(t + alpha) * std::pow(R, K) / K;
}

// Integral over the whole upper half-plane; requires every term to have
// bounded effective support (a disk cap or a bounded rect).
inline IntegralValue integrate_halfplane(const ScalarField& f, double alpha,
                                         const QuadratureSpec& spec = {}) {
    if (f.is_generic())
        throw non_integrable("integrate_halfplane: generic field has unknown support");
    IntegralValue total;
    for (const Monomial& m : f.terms()) {
        if (m.coef == 0.0) continue;
        Rect reg = m.support;
        if (m.disk != kInf) {
            if (reg.whole_plane()) {
                double v = m.coef * halfdisk_power_integral(m.s, m.t, alpha, m.disk);
                total.value += v;
                continue;
            }
            reg = reg.intersect(Rect{-m.disk, m.disk, 0.0, m.disk});
        }
        if (reg.x0 == -kInf || reg.x1 == kInf || reg.y1 == kInf)
            throw non_integrable("integrate_halfplane: unbounded support");
        IntegralValue v = detail::monomial_cell(m, reg, alpha, spec);
        total.value += v.value;
        total.err += v.err;
    }
    return total;
}

// mu(Q_I) for a box given by interval endpoints.
inline double measure_of_box(const BorelMeasure& mu, double x0, double x1,
                             const QuadratureSpec& spec = {}) {
    if (!mu.is_atomic())
        return integrate_box(mu.weight(), x0, x1, mu.alpha(), spec).value;
    double h = x1 - x0;
    double sum = 0.0;
    for (const Atom& a : mu.atom_list())
        if (a.x >= x0 && a.x < x1 && a.y < h) sum += a.mass;
    return sum;
}

inline double measure_of_box(const BorelMeasure& mu, const DyadicInterval& I,
                             const QuadratureSpec& spec = {}) {
    double l = I.left().to_double();
    return measure_of_box(mu, l, l + I.length(), spec);
}

// mu of a horizontal slab [x0, x1) x [y0, y1); a slab with y0 = 0 is open at
// the bottom, so stacked rows partition a box without double counting atoms.
inline double measure_of_rect(const BorelMeasure& mu, const Rect& r,
                              const QuadratureSpec& spec = {}) {
    if (r.empty()) return 0.0;
    if (!mu.is_atomic())
        return integrate_cell(mu.weight(), r, mu.alpha(), spec).value;
    double sum = 0.0;
    for (const Atom& a : mu.atom_list())
        if (a.x >= r.x0 && a.x < r.x1 && a.y >= r.y0 && a.y > 0.0 && a.y < r.y1)
            sum += a.mass;
    return sum;
}

// ---- windowed L^p norms ---------------------------------------------------

struct NormValue {
    double value{0.0};
    double err{0.0};
    double tail_frac{0.0};
    bool tail_flag{false};
};

// || f ||_{L^p(w dV_alpha)} over the Whitney mesh of the window:
// (sum over cells T_I of integral f^p w dV_alpha)^(1/p).  The tail flag
// fires when the outermost shell (bottom layer, plus top layer / edge
// columns where the integrand's support extends past the window) carries
// more than tail_tol of the mass.
inline NormValue lp_norm(const ScalarField& f, const ScalarField& w, double p, double alpha,
                         const ScaleWindow& win, Shift beta = Shift::none,
                         const QuadratureSpec& spec = {}) {
    if (!(p > 0.0)) throw domain_error("lp_norm: p must be positive");
    win.validate();
    ScalarField g = pow(f, p) * w;

    double total = 0.0, err = 0.0;
    double bottom_layer = 0.0, top_layer = 0.0, edges = 0.0;
    double slo = 0.0, shi = 0.0;
    bool clipped = g.bounded_x_support(&slo, &shi);

    for (int j = win.j_min; j <= win.j_max; ++j) {
        double h = std::ldexp(1.0, j);
        ScaleWindow row_win = win;
        if (clipped) {
            row_win.x_lo = std::max(win.x_lo, slo - h);
            row_win.x_hi = std::min(win.x_hi, shi + h);
            if (!(row_win.x_lo < row_win.x_hi)) continue;
        }
        auto row = intervals_at_scale(j, beta, row_win);
        double layer = 0.0;
        for (size_t i = 0; i < row.size(); ++i) {
            double l = row[i].left().to_double();
            Rect cell{l, l + h, 0.5 * h, h};
            if (!g.support_intersects(cell)) continue;
            IntegralValue v = integrate_cell(g, cell, alpha, spec);
            layer += v.value;
            err += v.err;
            if (i == 0 || i + 1 == row.size()) edges += v.value;
        }
        total += layer;
        if (j == win.j_min) bottom_layer = layer;
        if (j == win.j_max) top_layer = layer;
    }

    NormValue out;
    if (total <= 0.0) return out;
    double shell = bottom_layer;
    double ytop = std::ldexp(1.0, win.j_max);
    if (g.support_intersects(Rect{win.x_lo, win.x_hi, ytop, kInf})) shell += top_layer;
    bool spills_x = g.support_intersects(Rect{-kInf, win.x_lo, 0.0, ytop}) ||
                    g.support_intersects(Rect{win.x_hi, kInf, 0.0, ytop});
    if (spills_x) shell += edges;
    out.tail_frac = shell / total;
    out.tail_flag = out.tail_frac > spec.tail_tol;
    out.value = std::pow(total, 1.0 / p);
    out.err = err;
    return out;
}

}  // namespace bbmax
