#pragma once

// Weight-class characteristics over the two shifted grids: Bekolle-Bonami
// constants, the box-maximal characteristic, joint and two-weight class
// constants, Orlicz bump variants, Sawyer-type testing constants, and
// Carleson sequence norms.
//
// Every constant is a supremum of a per-box functional over the window
// family, so each is a certified lower bound of its full-grid counterpart
// and nondecreasing under window growth.  Reports carry the argmax box, the
// window, the relative change from dropping the finest scale
// (refinement_delta), and, where the covering lemma gives one, an upper
// bound on the corresponding non-dyadic supremum (value_upper).
//
// Duals, inverses, and the S_pq geometric normalization require weights that
// are strictly positive on the window: power-law terms keep their support
// under pow(), so a compactly supported weight would silently lose the +inf
// its complement carries, and a vanishing region puts the log average outside
// what sampled quadrature can certify.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "field.hpp"
#include "geometry.hpp"
#include "integrate.hpp"
#include "operators.hpp"
#include "orlicz.hpp"
#include "quadrature.hpp"

namespace bbmax {

enum class ConstantKind {
    B_p_alpha,
    B_inf_alpha,
    A_pq,
    C_pq,
    S_pq,
    B_pq_joint,
    sawyer_testing,
    strong_class,
    weak_class,
    bump_single,
    bump_double,
    carleson_seq,
};

inline const char* constant_kind_name(ConstantKind k) {
    switch (k) {
        case ConstantKind::B_p_alpha: return "B_p_alpha";
        case ConstantKind::B_inf_alpha: return "B_inf_alpha";
        case ConstantKind::A_pq: return "A_pq";
        case ConstantKind::C_pq: return "C_pq";
        case ConstantKind::S_pq: return "S_pq";
        case ConstantKind::B_pq_joint: return "B_pq_joint";
        case ConstantKind::sawyer_testing: return "sawyer_testing";
        case ConstantKind::strong_class: return "strong_class";
        case ConstantKind::weak_class: return "weak_class";
        case ConstantKind::bump_single: return "bump_single";
        case ConstantKind::bump_double: return "bump_double";
        case ConstantKind::carleson_seq: return "carleson_seq";
    }
    throw domain_error("constant_kind_name: unknown kind");
}

struct ConstantReport {
    ConstantKind name{ConstantKind::B_p_alpha};
    double value{0.0};
    // Bound on the non-dyadic supremum where the covering lemma provides one.
    std::optional<double> value_upper;
    DyadicInterval argmax{0, 0, Shift::none};
    ScaleWindow window;
    // Relative growth of `value` when the finest scale joins the family.
    double refinement_delta{0.0};
};

inline void to_json(nlohmann::json& j, const DyadicInterval& I) {
    j = nlohmann::json{{"scale", I.scale},
                       {"m", I.m},
                       {"grid", I.beta == Shift::third ? "third" : "plain"}};
}

inline void to_json(nlohmann::json& j, const ScaleWindow& w) {
    j = nlohmann::json{
        {"j_min", w.j_min}, {"j_max", w.j_max}, {"x_lo", w.x_lo}, {"x_hi", w.x_hi}};
}

inline void to_json(nlohmann::json& j, const ConstantReport& r) {
    j = nlohmann::json{{"name", constant_kind_name(r.name)},
                       {"value", r.value},
                       {"argmax", r.argmax},
                       {"window", r.window},
                       {"refinement_delta", r.refinement_delta}};
    j["value_upper"] = r.value_upper ? nlohmann::json(*r.value_upper) : nlohmann::json();
}

// Strict weak order so grid boxes can key maps across both grids.
struct DyadicLess {
    bool operator()(const DyadicInterval& a, const DyadicInterval& b) const {
        return std::tuple{a.scale, a.m, static_cast<int>(a.beta)} <
               std::tuple{b.scale, b.m, static_cast<int>(b.beta)};
    }
};

using CarlesonSequence = std::map<DyadicInterval, double, DyadicLess>;

namespace detail {

// Row of grid intervals meeting [x_lo, x_hi) at one scale.  Rows wider than
// `cap` are strided evenly; any subfamily keeps the supremum a certified
// lower bound.
inline std::vector<DyadicInterval> family_row(int scale, Shift beta, const ScaleWindow& w,
                                              int cap) {
    DyadicInterval lo = interval_at(w.x_lo, scale, beta);
    while (!(lo.right().to_double() > w.x_lo)) lo = DyadicInterval{scale, lo.m + 1, beta};
    DyadicInterval hi = interval_at(w.x_hi, scale, beta);
    while (!(hi.left().to_double() < w.x_hi)) hi = DyadicInterval{scale, hi.m - 1, beta};
    if (hi.m < lo.m) return {};
    std::int64_t count = hi.m - lo.m + 1;
    std::int64_t stride = count > cap ? (count + cap - 1) / cap : 1;
    std::vector<DyadicInterval> out;
    out.reserve(static_cast<size_t>(std::min<std::int64_t>(count, cap) + 1));
    for (std::int64_t m = lo.m; m <= hi.m; m += stride)
        out.push_back(DyadicInterval{scale, m, beta});
    return out;
}

struct SupState {
    double value{0.0};
    DyadicInterval argmax{0, 0, Shift::none};
    bool any{false};
};

template <class F>
inline SupState window_sup(const ScaleWindow& w, int cap, F&& boxval) {
    SupState s;
    for (Shift beta : kShifts)
        for (int j = w.j_min; j <= w.j_max; ++j)
            for (const DyadicInterval& I : family_row(j, beta, w, cap)) {
                double v = boxval(I);
                if (!s.any || v > s.value) {
                    s.value = v;
                    s.argmax = I;
                    s.any = true;
                }
            }
    if (!s.any) throw window_too_small("constant: window holds no grid boxes");
    return s;
}

// Shared sup-with-refinement driver.  The refinement pass reruns the same
// evaluator over the family without its finest scale; moment caches live in
// the caller's closure, so the second pass is cheap and exactly comparable.
template <class F>
inline ConstantReport sup_report(ConstantKind kind, const ScaleWindow& w, int cap,
                                 std::optional<double> upper_factor, F&& boxval) {
    w.validate();
    SupState full = window_sup(w, cap, boxval);
    double delta = 0.0;
    if (w.j_min < w.j_max) {
        ScaleWindow coarse = w;
        coarse.j_min = w.j_min + 1;
        SupState prev = window_sup(coarse, cap, boxval);
        delta = prev.value > 0.0 ? (full.value - prev.value) / prev.value
                                 : (full.value > 0.0 ? kInf : 0.0);
    }
    ConstantReport r;
    r.name = kind;
    r.value = full.value;
    if (upper_factor) r.value_upper = full.value * *upper_factor;
    r.argmax = full.argmax;
    r.window = w;
    r.refinement_delta = delta;
    return r;
}

// Essential infimum proxy on Q_I: log-spaced rows over twelve octaves below
// the box top plus endpoint-adjacent samples.  Exact (to ~1e-9) for weights
// monotone in y; an infimum living at y -> 0 is reported at the mesh floor.
inline double box_essential_inf(const ScalarField& w, const DyadicInterval& I,
                                const QuadratureSpec& spec) {
    double l = I.left().to_double(), L = I.length();
    int n = std::max(4, spec.nodes_per_axis);
    double eps = std::ldexp(1.0, -30);
    std::vector<double> xs, ys;
    for (int i = 0; i < n; ++i) xs.push_back(l + L * (i + 0.5) / n);
    xs.push_back(l + L * eps);
    xs.push_back(l + L * (1.0 - eps));
    for (int i = 0; i < n; ++i) ys.push_back(L * std::pow(2.0, -12.0 * (i + 0.5) / n));
    ys.push_back(L * (1.0 - eps));
    ys.push_back(L * std::ldexp(1.0, -12) * (1.0 + eps));
    double inf = kInf;
    for (double yy : ys)
        for (double xx : xs) inf = std::min(inf, w(xx, yy));
    return inf;
}

// 1/w; exact for a single power term, generic wrapper otherwise.
inline ScalarField inverse_field(const ScalarField& w) {
    if (!w.is_generic() && w.terms().size() <= 1) return pow(w, -1.0);
    ScalarField c = w;
    return ScalarField::generic([c](double x, double y) { return 1.0 / c(x, y); },
                                "1/(" + w.name() + ")");
}

}  // namespace detail

// ---- per-box functionals ------------------------------------------------------
//
// Pure per-box values; each takes the caller's moment caches so window sweeps
// and tests share one set of integrals.

// (avg_alpha w) (avg_alpha w^{1-p'})^{p-1}; `mdual` caches w^{1-p'}.
inline double bp_box_value(BoxMoments& momega, BoxMoments& mdual, double p,
                           const DyadicInterval& I) {
    double qa = box_measure_alpha(I.length(), momega.alpha());
    return (momega.box(I) / qa) * std::pow(mdual.box(I) / qa, p - 1.0);
}

// |Q|_w^{p/q} |Q|_sigma^{p/p'} / |Q|_alpha^{p(1-gamma/(2+alpha))}.
inline double apq_box_value(BoxMoments& momega, BoxMoments& msigma, const Params& P,
                            const DyadicInterval& I) {
    double qa = box_measure_alpha(I.length(), P.alpha);
    return std::pow(momega.box(I), P.p / P.q) * std::pow(msigma.box(I), P.p / P.p_conj()) /
           std::pow(qa, P.p * P.weighted_exponent());
}

// |Q|_alpha^{gamma/(2+alpha)-1} (int w)^{1/q} (int sigma^{-p'})^{1/p'};
// `mdual` caches sigma^{-p'}.
inline double cpq_box_value(BoxMoments& momega, BoxMoments& mdual, const Params& P,
                            const DyadicInterval& I) {
    double qa = box_measure_alpha(I.length(), P.alpha);
    return std::pow(qa, P.gamma / (2.0 + P.alpha) - 1.0) *
           std::pow(momega.box(I), 1.0 / P.q) * std::pow(mdual.box(I), 1.0 / P.p_conj());
}

// |Q|_w^{p/q} |Q|_sigma^{p} / |Q|_alpha^{p(1-gamma/(2+alpha))+1} times the
// geometric normalization exp(avg_alpha log sigma^{-1}).
inline double spq_box_value(BoxMoments& momega, BoxMoments& msigma, const ScalarField& sigma,
                            const Params& P, const DyadicInterval& I,
                            const QuadratureSpec& spec = {}) {
    double qa = box_measure_alpha(I.length(), P.alpha);
    double li = detail::log_box_integral(sigma, I, P.alpha, spec);
    if (li == -kInf) throw log_singular("S_pq: log sigma^{-1} diverges on a box");
    return std::pow(momega.box(I), P.p / P.q) * std::pow(msigma.box(I), P.p) /
           std::pow(qa, P.p * P.weighted_exponent() + 1.0) * std::exp(-li / qa);
}

// (avg_alpha w^q) (avg_alpha w^{-p'})^{q/p'}; caches of w^q and w^{-p'}.
inline double joint_box_value(BoxMoments& momega_q, BoxMoments& mdual, const Params& P,
                              const DyadicInterval& I) {
    double qa = box_measure_alpha(I.length(), P.alpha);
    return (momega_q.box(I) / qa) * std::pow(mdual.box(I) / qa, P.q / P.p_conj());
}

// |Q|_alpha^{-q(1-gamma/(2+alpha))} mu(Q_I) |Q|_sigma^{q/p'}.
inline double strong_box_value(BoxMoments& msigma, const BorelMeasure& mu, const Params& P,
                               const DyadicInterval& I, const QuadratureSpec& spec = {}) {
    double qa = box_measure_alpha(I.length(), P.alpha);
    return std::pow(qa, -P.q * P.weighted_exponent()) * measure_of_box(mu, I, spec) *
           std::pow(msigma.box(I), P.q / P.p_conj());
}

// |Q|_alpha^{q(gamma/(2+alpha)-1/p)} (avg_alpha w^{1-p'})^{q/p'} mu(Q_I);
// at p = 1 the dual average becomes (ess inf_{Q_I} w)^{-q}.
inline double weak_box_value(BoxMoments* mdual, const ScalarField& omega,
                             const BorelMeasure& mu, const Params& P, const DyadicInterval& I,
                             const QuadratureSpec& spec = {}) {
    double m = measure_of_box(mu, I, spec);
    if (m == 0.0) return 0.0;
    double qa = box_measure_alpha(I.length(), P.alpha);
    double lead = std::pow(qa, P.q * (P.gamma / (2.0 + P.alpha) - 1.0 / P.p));
    double f;
    if (P.p > 1.0) {
        f = std::pow(mdual->box(I) / qa, P.q / P.p_conj());
    } else {
        double inf = detail::box_essential_inf(omega, I, spec);
        f = inf > 0.0 ? std::pow(inf, -P.q) : kInf;
    }
    return lead * f * m;
}

// |Q|_alpha^{q(gamma/(2+alpha)-1/p)} ||w^{-1}||_{Q_I,psi,alpha}^q mu(Q_I).
inline double bump_single_box_value(const ScalarField& omega_inv, const YoungFunction& psi,
                                    const BorelMeasure& mu, const Params& P,
                                    const DyadicInterval& I, const QuadratureSpec& spec = {}) {
    double m = measure_of_box(mu, I, spec);
    if (m == 0.0) return 0.0;
    double qa = box_measure_alpha(I.length(), P.alpha);
    double nrm = luxembourg_norm(omega_inv, I, psi, P.alpha, spec);
    return std::pow(qa, P.q * (P.gamma / (2.0 + P.alpha) - 1.0 / P.p)) * std::pow(nrm, P.q) * m;
}

// |Q|_alpha^{gamma/(2+alpha)+1/q-1/p} ||w||_{Q_I,psi,alpha} ||sigma^{-1}||_{Q_I,phi,alpha}.
inline double bump_double_box_value(const ScalarField& omega, const ScalarField& sigma_inv,
                                    const YoungFunction& psi, const YoungFunction& phi,
                                    const Params& P, const DyadicInterval& I,
                                    const QuadratureSpec& spec = {}) {
    double qa = box_measure_alpha(I.length(), P.alpha);
    return std::pow(qa, P.gamma / (2.0 + P.alpha) + 1.0 / P.q - 1.0 / P.p) *
           luxembourg_norm(omega, I, psi, P.alpha, spec) *
           luxembourg_norm(sigma_inv, I, phi, P.alpha, spec);
}

// ---- box-maximal characteristic -----------------------------------------------

namespace detail {

// Truncated same-grid integral of the chain maximal of (w chi_{Q_I}) over
// Q_I: descend from I carrying the running chain maximum; the leaf row
// spreads its value over the whole leaf box.  Masking is free inside I, so
// the box averages are plain averages of w.
inline double nested_maximal_integral(BoxMoments& mw, const DyadicInterval& I, int leaf_scale,
                                      double running) {
    double a = mw.alpha();
    running = std::max(running, mw.box(I) / box_measure_alpha(I.length(), a));
    if (I.scale <= leaf_scale) return running * box_measure_alpha(I.length(), a);
    auto kids = I.children();
    return running * top_half_measure_alpha(I.length(), a) +
           nested_maximal_integral(mw, kids[0], leaf_scale, running) +
           nested_maximal_integral(mw, kids[1], leaf_scale, running);
}

// Same integral for the other grid, whose boxes straddle I: chains enter
// three scales above I (larger boxes only lower the masked average by
// 4^{2+alpha} per scale), values settle on cell runs, and each run is
// clipped back to Q_I.
inline double cross_maximal_integral(const ScalarField& w, double alpha,
                                     const DyadicInterval& I, int leaf_scale,
                                     const QuadratureSpec& spec) {
    double l = I.left().to_double(), L = I.length();
    Shift other = I.beta == Shift::none ? Shift::third : Shift::none;
    ScaleWindow win{leaf_scale, std::min(I.scale + 3, kMaxScale), l, l + L};
    BoxMoments masked(w * ScalarField::rect_indicator(Rect{l, l + L, 0.0, L}), alpha, spec);
    auto avg = [&masked, alpha](const DyadicInterval& K) {
        return masked.box(K) / box_measure_alpha(K.length(), alpha);
    };
    BorelMeasure leb = BorelMeasure::lebesgue(alpha);
    double total = 0.0;
    for (const CellRun& r : chain_image_runs(avg, other, win, ChainFold::max)) {
        if (r.value == 0.0) continue;
        Rect clip{std::max(r.x0, l), std::min(r.x1, l + L), r.y0, std::min(r.y1, L)};
        if (clip.empty()) continue;
        total += r.value * measure_of_rect(leb, clip, spec);
    }
    return total;
}

}  // namespace detail

struct BoxMaximalPair {
    double dyadic{0.0};    // same-grid chain variant; 1.0 for w == 1
    double covering{0.0};  // 6^{2+alpha} (same + cross grid): bounds the full-maximal variant
};

// Per-box value of |Q_I|_{w,alpha}^{-1} int_{Q_I} M(w chi_{Q_I}) dV_alpha with
// the inner maximal truncated `inner_depth` scales below I.
inline BoxMaximalPair binf_box_value(BoxMoments& momega, const DyadicInterval& I,
                                     int inner_depth, const QuadratureSpec& spec = {}) {
    if (inner_depth < 0) throw domain_error("binf_box_value: inner_depth must be >= 0");
    double den = momega.box(I);
    if (!(den > 0.0)) return {0.0, 0.0};
    int leaf = std::max(I.scale - inner_depth, kMinScale);
    double same = detail::nested_maximal_integral(momega, I, leaf, 0.0);
    double cross = detail::cross_maximal_integral(momega.field(), momega.alpha(), I, leaf, spec);
    return {same / den, std::pow(6.0, 2.0 + momega.alpha()) * (same + cross) / den};
}

// ---- window suprema -------------------------------------------------------------

// [w]_{B_{p,alpha}} = sup_I (avg_alpha w)(avg_alpha w^{1-p'})^{p-1} over both
// grids.  Throws non_integrable if the dual power fails to integrate.
inline ConstantReport bekolle_bonami(const ScalarField& omega, double p, double alpha,
                                     const ScaleWindow& w, const QuadratureSpec& spec = {},
                                     int cap = 4096) {
    if (!(p > 1.0)) throw domain_error("bekolle_bonami: p must exceed 1");
    if (!(alpha > -1.0)) throw domain_error("bekolle_bonami: alpha must exceed -1");
    double pc = p / (p - 1.0);
    BoxMoments mo(omega, alpha, spec);
    BoxMoments md(pow(omega, 1.0 - pc), alpha, spec);
    return detail::sup_report(ConstantKind::B_p_alpha, w, cap,
                              std::pow(6.0, (2.0 + alpha) * p),
                              [&](const DyadicInterval& I) {
                                  return bp_box_value(mo, md, p, I);
                              });
}

// [w]_{B_{inf,alpha}}: value is the same-grid chain variant (1.0 for w == 1);
// value_upper is the covering variant, which dominates the full maximal.
inline ConstantReport bekolle_infinity(const ScalarField& omega, double alpha,
                                       const ScaleWindow& w, const QuadratureSpec& spec = {},
                                       int inner_depth = 6, int cap = 4096) {
    if (!(alpha > -1.0)) throw domain_error("bekolle_infinity: alpha must exceed -1");
    w.validate();
    BoxMoments mo(omega, alpha, spec);
    std::map<std::tuple<int, std::int64_t, int>, BoxMaximalPair> memo;
    auto eval = [&](const DyadicInterval& I) -> const BoxMaximalPair& {
        auto key = std::tuple{I.scale, I.m, static_cast<int>(I.beta)};
        auto it = memo.find(key);
        if (it == memo.end())
            it = memo.emplace(key, binf_box_value(mo, I, inner_depth, spec)).first;
        return it->second;
    };
    auto sweep = [&](const ScaleWindow& win, double* post, DyadicInterval* arg) {
        double best = 0.0, bestp = 0.0;
        bool any = false;
        for (Shift beta : kShifts)
            for (int j = win.j_min; j <= win.j_max; ++j)
                for (const DyadicInterval& I : detail::family_row(j, beta, win, cap)) {
                    const BoxMaximalPair& v = eval(I);
                    if (!any || v.dyadic > best) {
                        best = v.dyadic;
                        if (arg) *arg = I;
                        any = true;
                    }
                    bestp = std::max(bestp, v.covering);
                }
        if (!any) throw window_too_small("bekolle_infinity: window holds no grid boxes");
        if (post) *post = bestp;
        return best;
    };
    ConstantReport r;
    r.name = ConstantKind::B_inf_alpha;
    r.window = w;
    double post = 0.0;
    r.value = sweep(w, &post, &r.argmax);
    r.value_upper = post;
    if (w.j_min < w.j_max) {
        ScaleWindow coarse = w;
        coarse.j_min = w.j_min + 1;
        double prev = sweep(coarse, nullptr, nullptr);
        r.refinement_delta =
            prev > 0.0 ? (r.value - prev) / prev : (r.value > 0.0 ? kInf : 0.0);
    }
    return r;
}

// Inputs for class_constant; each kind reads the subset it needs.
struct ClassData {
    std::optional<ScalarField> sigma;
    std::optional<ScalarField> omega;
    std::optional<BorelMeasure> mu;
    std::optional<YoungFunction> phi;  // gauge for sigma^{-1} (double bump)
    std::optional<YoungFunction> psi;  // gauge for omega or omega^{-1} (bumps)
};

// Two-weight / joint class constants, one per-box formula per kind.  The
// value_upper factor is the covering inflation 6^{(2+alpha) c} with c the
// total order of the |Q_I|_alpha normalizers (Luxembourg norms inflate by
// one order each); kinds without a one-sided covering comparison (S_pq)
// leave it unset.
inline ConstantReport class_constant(ConstantKind kind, const ClassData& d, const Params& P,
                                     const ScaleWindow& w, const QuadratureSpec& spec = {},
                                     int cap = 4096) {
    P.validate();
    w.validate();
    auto need_field = [](const std::optional<ScalarField>& f, const char* what) -> const ScalarField& {
        if (!f) throw domain_error(std::string("class_constant: kind needs ") + what);
        return *f;
    };
    auto need_measure = [](const std::optional<BorelMeasure>& m) -> const BorelMeasure& {
        if (!m) throw domain_error("class_constant: kind needs mu");
        return *m;
    };
    auto need_gauge = [](const std::optional<YoungFunction>& g, const char* what) -> const YoungFunction& {
        if (!g) throw domain_error(std::string("class_constant: kind needs ") + what);
        return *g;
    };
    auto require_dual = [&] {
        if (!(P.p > 1.0)) throw domain_error("class_constant: kind needs p > 1");
    };
    double A = 2.0 + P.alpha;
    double ga = P.gamma / A;
    double ew = P.weighted_exponent();

    switch (kind) {
        case ConstantKind::A_pq: {
            BoxMoments mo(need_field(d.omega, "omega"), P.alpha, spec);
            BoxMoments ms(need_field(d.sigma, "sigma"), P.alpha, spec);
            return detail::sup_report(kind, w, cap, std::pow(6.0, A * P.p * ew),
                                      [&](const DyadicInterval& I) {
                                          return apq_box_value(mo, ms, P, I);
                                      });
        }
        case ConstantKind::C_pq: {
            require_dual();
            BoxMoments mo(need_field(d.omega, "omega"), P.alpha, spec);
            BoxMoments md(pow(need_field(d.sigma, "sigma"), -P.p_conj()), P.alpha, spec);
            return detail::sup_report(kind, w, cap, std::pow(6.0, A * ew),
                                      [&](const DyadicInterval& I) {
                                          return cpq_box_value(mo, md, P, I);
                                      });
        }
        case ConstantKind::S_pq: {
            const ScalarField& sigma = need_field(d.sigma, "sigma");
            BoxMoments mo(need_field(d.omega, "omega"), P.alpha, spec);
            BoxMoments ms(sigma, P.alpha, spec);
            return detail::sup_report(kind, w, cap, std::nullopt,
                                      [&](const DyadicInterval& I) {
                                          return spq_box_value(mo, ms, sigma, P, I, spec);
                                      });
        }
        case ConstantKind::B_pq_joint: {
            require_dual();
            const ScalarField& omega = need_field(d.omega, "omega");
            BoxMoments mq(pow(omega, P.q), P.alpha, spec);
            BoxMoments md(pow(omega, -P.p_conj()), P.alpha, spec);
            return detail::sup_report(kind, w, cap,
                                      std::pow(6.0, A * (1.0 + P.q / P.p_conj())),
                                      [&](const DyadicInterval& I) {
                                          return joint_box_value(mq, md, P, I);
                                      });
        }
        case ConstantKind::strong_class: {
            BoxMoments ms(need_field(d.sigma, "sigma"), P.alpha, spec);
            const BorelMeasure& mu = need_measure(d.mu);
            return detail::sup_report(kind, w, cap, std::pow(6.0, A * P.q * ew),
                                      [&](const DyadicInterval& I) {
                                          return strong_box_value(ms, mu, P, I, spec);
                                      });
        }
        case ConstantKind::weak_class: {
            const ScalarField& omega = need_field(d.omega, "omega");
            const BorelMeasure& mu = need_measure(d.mu);
            std::optional<BoxMoments> md;
            if (P.p > 1.0) md.emplace(pow(omega, 1.0 - P.p_conj()), P.alpha, spec);
            double c = std::max(0.0, P.q * (1.0 / P.p - ga));
            return detail::sup_report(kind, w, cap, std::pow(6.0, A * c),
                                      [&](const DyadicInterval& I) {
                                          return weak_box_value(md ? &*md : nullptr, omega, mu,
                                                                P, I, spec);
                                      });
        }
        case ConstantKind::bump_single: {
            ScalarField oinv = detail::inverse_field(need_field(d.omega, "omega"));
            const YoungFunction& psi = need_gauge(d.psi, "psi");
            const BorelMeasure& mu = need_measure(d.mu);
            double c = std::max(0.0, P.q * (1.0 / P.p - ga)) + P.q;
            return detail::sup_report(kind, w, cap, std::pow(6.0, A * c),
                                      [&](const DyadicInterval& I) {
                                          return bump_single_box_value(oinv, psi, mu, P, I, spec);
                                      });
        }
        case ConstantKind::bump_double: {
            const ScalarField& omega = need_field(d.omega, "omega");
            ScalarField sinv = detail::inverse_field(need_field(d.sigma, "sigma"));
            const YoungFunction& psi = need_gauge(d.psi, "psi");
            const YoungFunction& phi = need_gauge(d.phi, "phi");
            double c = std::max(0.0, 1.0 / P.p - 1.0 / P.q - ga) + 2.0;
            return detail::sup_report(kind, w, cap, std::pow(6.0, A * c),
                                      [&](const DyadicInterval& I) {
                                          return bump_double_box_value(omega, sinv, psi, phi, P,
                                                                       I, spec);
                                      });
        }
        default:
            throw domain_error("class_constant: kind has a dedicated operation");
    }
}

// Sawyer-type testing constant for the grid-beta fractional maximal:
//   sup_I ||M^{d,beta}_{alpha,gamma}(chi_{Q_I} sigma)||_{L^q(mu)} / |Q_I|_{sigma,alpha}^{1/p}
// with test boxes from both grids.  The image norm is the window-truncated
// layer-cake norm; the sigma == 1 weighted maximal equals (1+alpha)^{1-gamma/(2+alpha)}
// times the plain-normalized one, which is the exact rescaling applied here.
// Refinement varies the test family only; the image window stays fixed.
inline ConstantReport sawyer_testing(const ScalarField& sigma, const BorelMeasure& mu,
                                     const Params& P, Shift beta, const ScaleWindow& w,
                                     const QuadratureSpec& spec = {},
                                     double ratio = std::pow(2.0, 0.125), int cap = 4096) {
    P.validate();
    w.validate();
    if (!(P.p > 1.0) || !(P.q >= P.p))
        throw domain_error("sawyer_testing: needs 1 < p <= q");
    BoxMoments ms(sigma, P.alpha, spec);
    double fix = std::pow(1.0 + P.alpha, -P.weighted_exponent());
    ScalarField one = ScalarField::constant(1.0);
    return detail::sup_report(
        ConstantKind::sawyer_testing, w, cap, std::nullopt, [&](const DyadicInterval& I) {
            double den = ms.box(I);
            if (!(den > 0.0)) return 0.0;  // empty testing mass
            double l = I.left().to_double(), L = I.length();
            ScalarField g = sigma * ScalarField::rect_indicator(Rect{l, l + L, 0.0, L});
            double nrm =
                fix * maximal_lq_norm_layercake(g, one, P, beta, P.q, mu, w, ratio, spec);
            return nrm / std::pow(den, 1.0 / P.p);
        });
}

// Smallest C with sum_{I in D^beta, I subset J} lambda_{Q_I} <= C |Q_J|_{w,alpha}^delta
// over window boxes J of either grid: one bottom-up subtree-sum pass per grid.
// Children outside the window rows do not contribute (window truncation).
inline ConstantReport carleson_sequence_constant(const CarlesonSequence& lam,
                                                 const ScalarField& omega, double alpha,
                                                 double delta, const ScaleWindow& w,
                                                 const QuadratureSpec& spec = {}) {
    if (!(delta >= 1.0))
        throw domain_error("carleson_sequence_constant: delta must be at least 1");
    if (!(alpha > -1.0))
        throw domain_error("carleson_sequence_constant: alpha must exceed -1");
    w.validate();
    BoxMoments mo(omega, alpha, spec);
    auto sweep = [&](const ScaleWindow& win, DyadicInterval* arg) {
        double best = 0.0;
        bool any = false;
        for (Shift beta : kShifts) {
            std::map<std::pair<int, std::int64_t>, double> subtree;
            for (int j = win.j_min; j <= win.j_max; ++j)
                for (const DyadicInterval& I : intervals_at_scale(j, beta, win)) {
                    double s = 0.0;
                    if (auto it = lam.find(I); it != lam.end()) s = it->second;
                    if (j > win.j_min)
                        for (const DyadicInterval& c : I.children())
                            if (auto cs = subtree.find({c.scale, c.m}); cs != subtree.end())
                                s += cs->second;
                    subtree[{I.scale, I.m}] = s;
                    if (s == 0.0) continue;
                    double den = mo.box(I);
                    double v = den > 0.0 ? s / std::pow(den, delta) : kInf;
                    if (!any || v > best) {
                        best = v;
                        if (arg) *arg = I;
                        any = true;
                    }
                }
        }
        return best;
    };
    ConstantReport r;
    r.name = ConstantKind::carleson_seq;
    r.window = w;
    r.value = sweep(w, &r.argmax);
    if (w.j_min < w.j_max) {
        ScaleWindow coarse = w;
        coarse.j_min = w.j_min + 1;
        double prev = sweep(coarse, nullptr);
        r.refinement_delta =
            prev > 0.0 ? (r.value - prev) / prev : (r.value > 0.0 ? kInf : 0.0);
    }
    return r;
}

// {lambda_{Q_I} = |Q_I|_{w,alpha}} over every window box of both grids, the
// sequence the embedding theorem charges.
inline CarlesonSequence box_measure_sequence(const ScalarField& omega, double alpha,
                                             const ScaleWindow& w,
                                             const QuadratureSpec& spec = {}) {
    if (!(alpha > -1.0)) throw domain_error("box_measure_sequence: alpha must exceed -1");
    w.validate();
    BoxMoments mo(omega, alpha, spec);
    CarlesonSequence out;
    for (Shift beta : kShifts)
        for (int j = w.j_min; j <= w.j_max; ++j)
            for (const DyadicInterval& I : intervals_at_scale(j, beta, w))
                out.emplace(I, mo.box(I));
    return out;
}

}  // namespace bbmax
