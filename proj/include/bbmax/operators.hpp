#pragma once

// Operator evaluations on the upper half-plane: dyadic and bracketed
// fractional maximal functions, weighted / Orlicz / logarithmic maximal
// variants, the positive fractional Bergman operator, the dyadic positive
// operator, and the stopping-time machinery (level sets, layer-cake norms,
// piecewise-constant image runs) they share.
//
// Every maximal-type value at z is a fold over the chain of grid boxes
// containing z inside a finite window, so all operators here are window
// quantities; they increase monotonically as the window grows.
//
// Fields are integrated as given.  The classical definitions apply the
// operators to |f|, so callers pass nonnegative data.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <shared_mutex>
#include <tuple>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "field.hpp"
#include "geometry.hpp"
#include "integrate.hpp"
#include "orlicz.hpp"
#include "quadrature.hpp"

namespace bbmax {

// Exponent pack for the fractional scale: normalizations use
// |I|^{2+alpha-gamma} (plain) or |Q_I|_{sigma,alpha}^{1-gamma/(2+alpha)}
// (weighted).  q is carried for norm targets; the off-diagonal critical
// relation 1/q = 1/p - gamma/(2+alpha) is asserted only where required.
struct Params {
    double p{2.0};
    double q{2.0};
    double alpha{0.0};
    double gamma{0.0};

    void validate() const {
        if (!(p >= 1.0)) throw domain_error("Params: p must be at least 1");
        if (!(q > 0.0)) throw domain_error("Params: q must be positive");
        if (!(alpha > -1.0)) throw domain_error("Params: alpha must exceed -1");
        if (!(gamma >= 0.0 && gamma < 2.0 + alpha))
            throw domain_error("Params: gamma must lie in [0, 2+alpha)");
    }
    double p_conj() const { return p / (p - 1.0); }
    double frac_exponent() const { return 2.0 + alpha - gamma; }
    // 1 - gamma/(2+alpha), the exponent of weighted box measures
    double weighted_exponent() const { return 1.0 - gamma / (2.0 + alpha); }

    static double critical_q(double p, double alpha, double gamma) {
        double inv = 1.0 / p - gamma / (2.0 + alpha);
        if (!(inv > 0.0)) throw domain_error("critical_q: 1/p - gamma/(2+alpha) must be positive");
        return 1.0 / inv;
    }
    void require_critical() const {
        if (std::abs(1.0 / q - (1.0 / p - gamma / (2.0 + alpha))) > 1e-12)
            throw domain_error("Params: 1/q = 1/p - gamma/(2+alpha) required here");
    }
};

// Level-set comparison constant 2^{2+alpha-gamma}(1 + 2^{4+2alpha-2gamma});
// equals 68 at alpha = gamma = 0.
inline double levelset_constant(double alpha, double gamma) {
    return std::pow(2.0, 2.0 + alpha - gamma) *
           (1.0 + std::pow(2.0, 4.0 + 2.0 * alpha - 2.0 * gamma));
}

// ---- box-moment cache -------------------------------------------------------

// Memoized integrals of one field against dV_alpha over grid boxes Q_I and
// top halves T_I.  Boxes with scale above the assembly floor are assembled
// as children + top strip (the strip is smooth, so deep singular work happens
// once per leaf); at or below the floor they are integrated directly.  The
// default floor disables assembly, which is right for sparse chain queries.
// Readers share the cache; insertion is single-writer.
class BoxMoments {
  public:
    BoxMoments(ScalarField f, double alpha, QuadratureSpec spec = {},
               int assemble_floor = kMaxScale + 1)
        : f_(std::move(f)), alpha_(alpha), spec_(spec), floor_(assemble_floor) {}

    double box(const DyadicInterval& I) {
        if (auto hit = find(box_memo_, key(I))) return *hit;
        double v;
        if (I.scale <= floor_) {
            v = integrate_box(f_, I, alpha_, spec_).value;
        } else {
            auto kids = I.children();
            v = box(kids[0]) + box(kids[1]) + top(I);
        }
        insert(box_memo_, key(I), v);
        return v;
    }

    double top(const DyadicInterval& I) {
        if (auto hit = find(top_memo_, key(I))) return *hit;
        double l = I.left().to_double(), L = I.length();
        double v = integrate_cell(f_, Rect{l, l + L, 0.5 * L, L}, alpha_, spec_).value;
        insert(top_memo_, key(I), v);
        return v;
    }

    const ScalarField& field() const { return f_; }
    double alpha() const { return alpha_; }

  private:
    using Key = std::tuple<int, std::int64_t, int>;
    using Memo = std::map<Key, double>;

    static Key key(const DyadicInterval& I) {
        return {I.scale, I.m, static_cast<int>(I.beta)};
    }
    std::optional<double> find(const Memo& m, const Key& k) const {
        std::shared_lock lock(mu_);
        auto it = m.find(k);
        if (it == m.end()) return std::nullopt;
        return it->second;
    }
    void insert(Memo& m, const Key& k, double v) {
        std::unique_lock lock(mu_);
        m.emplace(k, v);
    }

    ScalarField f_;
    double alpha_;
    QuadratureSpec spec_;
    int floor_;
    mutable std::shared_mutex mu_;
    Memo box_memo_;
    Memo top_memo_;
};

// Numerator/denominator caches for sigma-weighted fractional averages
//   |Q_I|_{sigma,alpha}^{-e} * integral of f sigma over Q_I,  e = 1 - gamma/(2+alpha).
struct WeightedMoments {
    BoxMoments num;  // f sigma dV_alpha
    BoxMoments den;  // sigma dV_alpha

    WeightedMoments(const ScalarField& f, const ScalarField& sigma, double alpha,
                    QuadratureSpec spec = {}, int assemble_floor = kMaxScale + 1)
        : num(f * sigma, alpha, spec, assemble_floor),
          den(sigma, alpha, spec, assemble_floor) {}

    // 0/0 boxes contribute nothing; mass over a sigma-null box is flagged.
    double fractional_average(const DyadicInterval& I, double e) {
        double n = num.box(I);
        double d = den.box(I);
        if (d <= 0.0) {
            if (n <= 0.0) return 0.0;
            throw degenerate_box("weighted average: sigma vanishes on a box with mass");
        }
        return n / std::pow(d, e);
    }
};

// ---- maximal operators ------------------------------------------------------

// M^{d,beta}_{alpha,gamma} f(z): max over the chain of z of
// |I|^{-(2+alpha-gamma)} * integral of f over Q_I.  Zero on an empty chain.
inline double dyadic_fractional_maximal(const ScalarField& f, const Params& P, Shift beta,
                                        double x, double y, const ScaleWindow& W,
                                        const QuadratureSpec& spec = {},
                                        BoxMoments* cache = nullptr) {
    P.validate();
    std::optional<BoxMoments> local;
    if (!cache) local.emplace(f, P.alpha, spec);
    BoxMoments& m = cache ? *cache : *local;
    double best = 0.0;
    for (const DyadicInterval& I : boxes_containing(x, y, beta, W))
        best = std::max(best, m.box(I) / std::pow(I.length(), P.frac_exponent()));
    return best;
}

struct MaximalBracket {
    double lower{0.0};  // max over a lattice of generic intervals containing z
    double upper{0.0};  // covering-lemma majorant 6^{2+alpha-gamma} sum_beta dyadic
};

// Two-sided enclosure of the full (non-dyadic) maximal function.  The upper
// side widens the window top by three scales so that the covering interval
// of every lattice interval stays inside the dyadic family it is charged to.
inline MaximalBracket fractional_maximal_bracket(const ScalarField& f, const Params& P,
                                                 double x, double y, const ScaleWindow& W,
                                                 int density = 8,
                                                 const QuadratureSpec& spec = {}) {
    P.validate();
    W.validate();
    if (!(y > 0.0)) throw domain_error("maximal bracket: point not in upper half-plane");
    if (density < 1) throw domain_error("maximal bracket: density must be positive");

    MaximalBracket b;
    for (int j = W.j_min; j <= W.j_max; ++j) {
        double L = std::ldexp(1.0, j);
        if (!(L > y)) continue;  // z must lie in Q_K
        for (int i = 0; i < density; ++i) {
            double a = x - L * static_cast<double>(i) / density;
            double v = integrate_box(f, a, a + L, P.alpha, spec).value /
                       std::pow(L, P.frac_exponent());
            b.lower = std::max(b.lower, v);
        }
    }

    ScaleWindow wide = W;
    wide.j_max = std::min(W.j_max + 3, kMaxScale);
    double dy = 0.0;
    for (Shift beta : kShifts)
        dy += dyadic_fractional_maximal(f, P, beta, x, y, wide, spec);
    b.upper = std::pow(6.0, P.frac_exponent()) * dy;
    return b;
}

// Weighted variant: max over the chain of the sigma-fractional average.
inline double weighted_fractional_maximal(const ScalarField& f, const ScalarField& sigma,
                                          const Params& P, Shift beta, double x, double y,
                                          const ScaleWindow& W,
                                          const QuadratureSpec& spec = {},
                                          WeightedMoments* cache = nullptr) {
    P.validate();
    std::optional<WeightedMoments> local;
    if (!cache) local.emplace(f, sigma, P.alpha, spec);
    WeightedMoments& wm = cache ? *cache : *local;
    double e = P.weighted_exponent();
    double best = 0.0;
    for (const DyadicInterval& I : boxes_containing(x, y, beta, W))
        best = std::max(best, wm.fractional_average(I, e));
    return best;
}

namespace detail {

// integral over Q_I of log f dV_alpha; -inf means f vanishes on positive
// measure there.  Exact for a single positive pure-y monomial term covering
// the box; quadrature on the log field otherwise.
inline double log_box_integral(const ScalarField& f, const DyadicInterval& I, double alpha,
                               const QuadratureSpec& spec) {
    double l = I.left().to_double(), L = I.length();
    if (!f.is_generic() && f.terms().size() == 1) {
        const Monomial& m = f.terms().front();
        Rect boxr{l, l + L, 0.0, L};
        bool covers = m.support.x0 <= boxr.x0 && m.support.x1 >= boxr.x1 &&
                      m.support.y0 <= 0.0 && m.support.y1 >= L && m.disk == kInf;
        if (covers && m.coef > 0.0 && m.s == 0.0) {
            return std::log(m.coef) * box_measure_alpha(L, alpha) +
                   m.t * L * power_log_moment(alpha, 0.0, L);
        }
    }
    ScalarField logf = ScalarField::generic(
        [f](double u, double v) { return std::log(f(u, v)); }, "log f");
    double val;
    try {
        val = integrate_cell(logf, Rect{l, l + L, 0.0, L}, alpha, spec).value;
    } catch (const non_convergent&) {
        return -kInf;  // divergent negative tail: box contributes nothing
    }
    if (std::isnan(val)) throw log_singular("log-average: integrand changed sign to NaN");
    return val;
}

}  // namespace detail

// Logarithmic maximal function: max over the chain of exp of the log-average.
// Boxes whose log-integral is -inf contribute 0.
inline double exp_maximal(const ScalarField& f, double alpha, double x, double y,
                          const ScaleWindow& W, const QuadratureSpec& spec = {},
                          Shift beta = Shift::none) {
    if (!(alpha > -1.0)) throw domain_error("exp_maximal: alpha must exceed -1");
    double best = 0.0;
    for (const DyadicInterval& I : boxes_containing(x, y, beta, W)) {
        double li = detail::log_box_integral(f, I, alpha, spec);
        if (li == -kInf) continue;
        best = std::max(best, std::exp(li / box_measure_alpha(I.length(), alpha)));
    }
    return best;
}

// Orlicz maximal function: max over the chain of box Luxembourg norms.
inline double orlicz_maximal(const ScalarField& f, const YoungFunction& phi, double alpha,
                             double x, double y, const ScaleWindow& W,
                             const QuadratureSpec& spec = {}, Shift beta = Shift::none) {
    double best = 0.0;
    for (const DyadicInterval& I : boxes_containing(x, y, beta, W))
        best = std::max(best, luxembourg_norm(f, I, phi, alpha, spec));
    return best;
}

// ---- positive operators -----------------------------------------------------

// T_{alpha,gamma} f(z) = integral of f(w) |z - conj(w)|^{-(2+alpha-gamma)}
// dV_alpha(w) over the window region, cell by cell on the Whitney mesh plus
// the bottom slab (where the y^alpha strip refinement applies).  The kernel
// is smooth on every cell since Im z > 0.  f must be supported inside the
// window region for the value to mean the half-plane integral.
inline IntegralValue bergman_positive(const ScalarField& f, const Params& P, double x,
                                      double y, const ScaleWindow& W,
                                      const QuadratureSpec& spec = {}) {
    P.validate();
    W.validate();
    if (!(y > 0.0)) throw domain_error("bergman_positive: point not in upper half-plane");
    double K = P.frac_exponent();
    ScalarField g = ScalarField::generic(
        [f, x, y, K](double u, double v) {
            double dx = x - u, sy = y + v;
            return f(u, v) * std::pow(dx * dx + sy * sy, -0.5 * K);
        },
        "f kernel");
    IntegralValue total;
    double y_floor = std::ldexp(1.0, W.j_min - 1);
    for (const DyadicInterval& I : whitney_cells(W, Shift::none)) {
        double l = I.left().to_double(), L = I.length();
        IntegralValue v = integrate_cell(g, Rect{l, l + L, 0.5 * L, L}, P.alpha, spec);
        total.value += v.value;
        total.err += v.err;
    }
    IntegralValue bottom =
        integrate_cell(g, Rect{W.x_lo, W.x_hi, 0.0, y_floor}, P.alpha, spec);
    total.value += bottom.value;
    total.err += bottom.err;
    return total;
}

struct ChainSum {
    double value{0.0};
    bool truncated{false};  // largest-scale term still carries weight
};

// Q^beta_{alpha,gamma} f(z): the chain SUM of fractional averages.  The
// truncation flag fires when the top-scale term exceeds tail_tol of the sum.
inline ChainSum dyadic_positive_operator(const ScalarField& f, const Params& P, Shift beta,
                                         double x, double y, const ScaleWindow& W,
                                         const QuadratureSpec& spec = {},
                                         BoxMoments* cache = nullptr) {
    P.validate();
    std::optional<BoxMoments> local;
    if (!cache) local.emplace(f, P.alpha, spec);
    BoxMoments& m = cache ? *cache : *local;
    ChainSum out;
    double last = 0.0;
    for (const DyadicInterval& I : boxes_containing(x, y, beta, W)) {
        last = m.box(I) / std::pow(I.length(), P.frac_exponent());
        out.value += last;
    }
    out.truncated = last > spec.tail_tol * out.value && out.value > 0.0;
    return out;
}

// ---- stopping families ------------------------------------------------------

struct StoppedInterval {
    DyadicInterval I;
    double average{0.0};
};

// Maximal grid intervals whose sigma-fractional average exceeds the
// threshold; pairwise disjoint, parents all at or below the threshold.
struct StoppingFamily {
    double threshold{0.0};
    std::vector<StoppedInterval> members;
};

// Top-down sweep from the window top.  With certify_maximal the sweep
// refuses thresholds the top row already exceeds (an unseen grandparent
// could exceed too); the uncertified form is what window-local layer cakes
// use, where the window IS the universe.
inline StoppingFamily stopping_intervals(const ScalarField& f, const ScalarField& sigma,
                                         const Params& P, Shift beta, double lambda,
                                         const ScaleWindow& W,
                                         const QuadratureSpec& spec = {},
                                         WeightedMoments* cache = nullptr,
                                         bool certify_maximal = true) {
    P.validate();
    W.validate();
    if (!(lambda > 0.0)) throw domain_error("stopping_intervals: threshold must be positive");
    std::optional<WeightedMoments> local;
    if (!cache) local.emplace(f, sigma, P.alpha, spec);
    WeightedMoments& wm = cache ? *cache : *local;
    double e = P.weighted_exponent();
    rational xlo = rational::from_double(W.x_lo), xhi = rational::from_double(W.x_hi);

    StoppingFamily fam;
    fam.threshold = lambda;
    std::vector<DyadicInterval> frontier = intervals_at_scale(W.j_max, beta, W);
    for (int j = W.j_max; j >= W.j_min; --j) {
        std::vector<DyadicInterval> next;
        for (const DyadicInterval& I : frontier) {
            double a = wm.fractional_average(I, e);
            if (a > lambda) {
                if (j == W.j_max && certify_maximal)
                    throw window_too_small(
                        "stopping_intervals: top-scale average already exceeds the threshold");
                fam.members.push_back({I, a});
                continue;  // maximality: do not descend
            }
            if (j > W.j_min)
                for (const DyadicInterval& c : I.children())
                    if (xlo < c.right() && c.left() < xhi) next.push_back(c);
        }
        frontier = std::move(next);
    }
    return fam;
}

inline StoppingFamily stopping_intervals(const ScalarField& f, const Params& P, Shift beta,
                                         double lambda, const ScaleWindow& W,
                                         const QuadratureSpec& spec = {}) {
    return stopping_intervals(f, ScalarField::constant(1.0), P, beta, lambda, W, spec);
}

// mu of the union of boxes over arbitrary grid intervals (the two shifted
// grids may overlap): exact vertical-slab decomposition with rational
// breakpoints; on each slab the union is one rectangle of the tallest
// covering height.
inline double union_measure(const BorelMeasure& mu, const std::vector<DyadicInterval>& boxes,
                            const QuadratureSpec& spec = {}) {
    if (boxes.empty()) return 0.0;
    std::vector<rational> cuts;
    cuts.reserve(2 * boxes.size());
    for (const DyadicInterval& I : boxes) {
        cuts.push_back(I.left());
        cuts.push_back(I.right());
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double h = 0.0;
        for (const DyadicInterval& I : boxes)
            if (I.left() <= cuts[i] && cuts[i + 1] <= I.right())
                h = std::max(h, I.length());
        if (h > 0.0)
            total += measure_of_rect(
                mu, Rect{cuts[i].to_double(), cuts[i + 1].to_double(), 0.0, h}, spec);
    }
    return total;
}

// mu({ M^{d,beta}_{sigma,alpha,gamma} f > lambda }) within the window: the
// superlevel set of a dyadic maximal function is exactly the union of its
// stopping boxes, which for one grid are disjoint.
inline double superlevel_measure(const ScalarField& f, const ScalarField& sigma,
                                 const Params& P, Shift beta, double lambda,
                                 const BorelMeasure& mu, const ScaleWindow& W,
                                 const QuadratureSpec& spec = {},
                                 WeightedMoments* cache = nullptr,
                                 bool certify_maximal = true) {
    StoppingFamily fam =
        stopping_intervals(f, sigma, P, beta, lambda, W, spec, cache, certify_maximal);
    double total = 0.0;
    for (const StoppedInterval& s : fam.members) total += measure_of_box(mu, s.I, spec);
    return total;
}

inline double superlevel_measure(const ScalarField& f, const Params& P, Shift beta,
                                 double lambda, const BorelMeasure& mu,
                                 const ScaleWindow& W, const QuadratureSpec& spec = {}) {
    return superlevel_measure(f, ScalarField::constant(1.0), P, beta, lambda, mu, W, spec);
}

// ---- piecewise-constant operator images --------------------------------------

// Chain functionals are constant on each Whitney cell T_I (every point of
// T_I has the same chain), and below the bottom row the chain no longer
// changes, so the image of a window is a finite list of constant runs.
struct CellRun {
    double x0{0.0}, x1{0.0};
    double y0{0.0}, y1{0.0};
    double value{0.0};
};

enum class ChainFold { max, sum };

// Runs of fold(box_avg) over the window family of one grid.  box_avg is any
// per-box functional (plain or weighted fractional average).
inline std::vector<CellRun> chain_image_runs(
    const std::function<double(const DyadicInterval&)>& box_avg, Shift beta,
    const ScaleWindow& W, ChainFold fold) {
    W.validate();
    std::map<std::pair<int, std::int64_t>, double> memo;
    std::function<double(const DyadicInterval&)> chain_val =
        [&](const DyadicInterval& I) -> double {
        auto k = std::make_pair(I.scale, I.m);
        auto it = memo.find(k);
        if (it != memo.end()) return it->second;
        double a = box_avg(I);
        double v = (I.scale >= W.j_max)
                       ? a
                       : (fold == ChainFold::max ? std::max(a, chain_val(I.parent()))
                                                 : a + chain_val(I.parent()));
        memo.emplace(k, v);
        return v;
    };

    std::vector<CellRun> runs;
    for (int j = W.j_min; j <= W.j_max; ++j) {
        for (const DyadicInterval& I : intervals_at_scale(j, beta, W)) {
            double v = chain_val(I);
            double l = I.left().to_double(), L = I.length();
            runs.push_back({l, l + L, 0.5 * L, L, v});
            if (j == W.j_min) runs.push_back({l, l + L, 0.0, 0.5 * L, v});
        }
    }
    return runs;
}

// Pointwise sum of two run lists with identical row structure (the two
// shifted grids): rows are re-cut at the union of breakpoints.  Runs absent
// from one list contribute zero there.
inline std::vector<CellRun> overlay_runs(const std::vector<CellRun>& a,
                                         const std::vector<CellRun>& b) {
    std::map<std::pair<double, double>, std::pair<std::vector<const CellRun*>,
                                                  std::vector<const CellRun*>>>
        rows;
    for (const CellRun& r : a) rows[{r.y0, r.y1}].first.push_back(&r);
    for (const CellRun& r : b) rows[{r.y0, r.y1}].second.push_back(&r);

    std::vector<CellRun> out;
    for (const auto& [yr, lists] : rows) {
        std::vector<double> cuts;
        for (const CellRun* r : lists.first) {
            cuts.push_back(r->x0);
            cuts.push_back(r->x1);
        }
        for (const CellRun* r : lists.second) {
            cuts.push_back(r->x0);
            cuts.push_back(r->x1);
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        auto value_at = [](const std::vector<const CellRun*>& list, double mid) {
            for (const CellRun* r : list)
                if (r->x0 <= mid && mid < r->x1) return r->value;
            return 0.0;
        };
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            double mid = 0.5 * (cuts[i] + cuts[i + 1]);
            double v = value_at(lists.first, mid) + value_at(lists.second, mid);
            if (v != 0.0) out.push_back({cuts[i], cuts[i + 1], yr.first, yr.second, v});
        }
    }
    return out;
}

// (sum over runs of value^q mu(run))^{1/q}; exact in the run values.
inline double runs_lq_norm(const std::vector<CellRun>& runs, double qexp,
                           const BorelMeasure& mu, const QuadratureSpec& spec = {}) {
    if (!(qexp > 0.0)) throw domain_error("runs_lq_norm: exponent must be positive");
    double sum = 0.0;
    for (const CellRun& r : runs) {
        if (r.value == 0.0) continue;
        sum += std::pow(r.value, qexp) *
               measure_of_rect(mu, Rect{r.x0, r.x1, r.y0, r.y1}, spec);
    }
    return std::pow(sum, 1.0 / qexp);
}

// ---- layer-cake L^q norm of the weighted dyadic maximal image ----------------

// ||M^{d,beta}_{sigma,alpha,gamma} f||_{L^q(mu)} over the window via
// lambda-sweep of superlevel measures on a geometric grid.  Below the
// smallest positive top-row average the superlevel set is frozen (f >= 0
// makes the image vanish under mass-free top boxes), so that segment is
// added in closed form; the sweep then uses left endpoints, an upper bias
// bounded by the grid ratio.
inline double maximal_lq_norm_layercake(const ScalarField& f, const ScalarField& sigma,
                                        const Params& P, Shift beta, double qexp,
                                        const BorelMeasure& mu, const ScaleWindow& W,
                                        double ratio = std::pow(2.0, 0.125),
                                        const QuadratureSpec& spec = {}) {
    P.validate();
    W.validate();
    if (!(qexp > 0.0)) throw domain_error("layercake: exponent must be positive");
    if (!(ratio > 1.0)) throw domain_error("layercake: grid ratio must exceed 1");
    WeightedMoments wm(f, sigma, P.alpha, spec);
    double e = P.weighted_exponent();

    double lam0 = kInf;
    std::vector<DyadicInterval> frozen;
    for (const DyadicInterval& I : intervals_at_scale(W.j_max, beta, W)) {
        double a = wm.fractional_average(I, e);
        if (a > 0.0) {
            lam0 = std::min(lam0, a);
            frozen.push_back(I);
        }
    }
    if (frozen.empty()) return 0.0;

    double m0 = 0.0;
    for (const DyadicInterval& I : frozen) m0 += measure_of_box(mu, I, spec);
    double qth = m0 * std::pow(lam0, qexp);

    double lam = lam0;
    for (int i = 0; i < 4000; ++i) {
        double msk = superlevel_measure(f, sigma, P, beta, lam, mu, W, spec, &wm,
                                        /*certify_maximal=*/false);
        if (msk == 0.0) return std::pow(qth, 1.0 / qexp);
        double nxt = lam * ratio;
        qth += msk * (std::pow(nxt, qexp) - std::pow(lam, qexp));
        lam = nxt;
    }
    throw non_convergent("layercake: lambda sweep did not exhaust the image");
}

}  // namespace bbmax
