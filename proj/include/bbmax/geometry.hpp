#pragma once

// Dyadic machinery on the upper half-plane.
//
// Two translated dyadic lattices are used: for shift b in {0, 1/3} the grid
// consists of the intervals 2^j([0,1) + m + (-1)^j b), j, m integers.  The
// alternating sign makes the two grids jointly "fine": every finite interval
// I is contained in a grid interval J of one of the two grids with
// |J| <= 6|I|.  Over an interval I sits its Carleson box
// Q_I = I x (0, |I|) and the top half T_I = I x (|I|/2, |I|); for the
// measure dV_a = y^a dx dy both have closed-form mass.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "bbmax/errors.hpp"
#include "bbmax/rational.hpp"

namespace bbmax {

enum class Shift : int { none = 0, third = 1 };

constexpr std::array<Shift, 2> kShifts{Shift::none, Shift::third};

inline const char* shift_name(Shift b) { return b == Shift::none ? "0" : "1/3"; }

// Admissible scale range; keeps all rational arithmetic inside 128 bits.
constexpr int kMinScale = -60;
constexpr int kMaxScale = 60;

struct DyadicInterval {
    int scale{0};          // |I| = 2^scale
    std::int64_t m{0};     // translation index
    Shift beta{Shift::none};

    // (-1)^scale as used by the alternating shift.
    int parity_sign() const { return (scale % 2 != 0) ? -1 : 1; }

    // Shift term times 3: 0 for the plain grid, (-1)^scale for the 1/3 grid.
    int shift3() const { return beta == Shift::none ? 0 : parity_sign(); }

    rational left() const {
        check_scale(scale);
        rational r(int128(3) * m + shift3(), 3);
        r.shift_pow2(scale);
        return r;
    }
    rational right() const {
        rational r = left();
        rational len(1);
        len.shift_pow2(scale);
        return r + len;
    }
    double length() const { return std::ldexp(1.0, scale); }

    DyadicInterval parent() const {
        check_scale(scale + 1);
        // child index relation: m = 2 m' - e + {0,1}, e = (-1)^scale * [beta=1/3]
        std::int64_t e = shift3();
        std::int64_t t = m + e;
        std::int64_t mp = (t >= 0) ? t / 2 : -((-t + 1) / 2);
        return DyadicInterval{scale + 1, mp, beta};
    }

    std::array<DyadicInterval, 2> children() const {
        check_scale(scale - 1);
        int child_parity = ((scale - 1) % 2 != 0) ? -1 : 1;
        std::int64_t e = (beta == Shift::none) ? 0 : child_parity;
        return {DyadicInterval{scale - 1, 2 * m - e, beta},
                DyadicInterval{scale - 1, 2 * m - e + 1, beta}};
    }

    bool contains(const rational& x) const { return left() <= x && x < right(); }
    bool contains_double(double x) const { return contains(rational::from_double(x)); }

    bool contains(const DyadicInterval& other) const {
        if (other.beta != beta) return false;
        if (other.scale > scale) return false;
        DyadicInterval walk = other;
        while (walk.scale < scale) walk = walk.parent();
        return walk.m == m;
    }

    // Membership z = x + iy in Q_I (closed nowhere: x half-open, 0 < y < |I|).
    bool box_contains(double x, double y) const {
        if (!(y > 0.0) || !(y < length())) return false;
        return contains_double(x);
    }

    friend bool operator==(const DyadicInterval& a, const DyadicInterval& b) {
        return a.scale == b.scale && a.m == b.m && a.beta == b.beta;
    }

  private:
    static void check_scale(int j) {
        if (j < kMinScale || j > kMaxScale) throw domain_error("dyadic scale out of range");
    }
};

// Finite viewport: grid intervals with scale in [j_min, j_max] meeting
// [x_lo, x_hi).  All window-indexed computations enumerate this family.
struct ScaleWindow {
    int j_min{0};
    int j_max{0};
    double x_lo{0.0};
    double x_hi{1.0};

    void validate() const {
        if (j_min > j_max) throw domain_error("window: j_min > j_max");
        if (!(x_lo < x_hi)) throw domain_error("window: empty x range");
        if (j_min < kMinScale || j_max > kMaxScale)
            throw domain_error("window: scale out of range");
    }

    ScaleWindow shrunk_bottom() const { return ScaleWindow{j_min + 1, j_max, x_lo, x_hi}; }
};

// Measure of Q_I and T_I under dV_a, |I| = L.
inline double box_measure_alpha(double L, double alpha) {
    if (!(alpha > -1.0)) throw domain_error("alpha must exceed -1");
    return std::pow(L, 2.0 + alpha) / (1.0 + alpha);
}

inline double top_half_measure_alpha(double L, double alpha) {
    if (!(alpha > -1.0)) throw domain_error("alpha must exceed -1");
    return std::pow(L, 2.0 + alpha) * (1.0 - std::pow(2.0, -(1.0 + alpha))) / (1.0 + alpha);
}

// Unique grid interval of the given scale and shift containing x.
inline DyadicInterval interval_at(const rational& x, int scale, Shift beta) {
    rational scaled = x;
    scaled.shift_pow2(-scale);
    if (beta == Shift::third) {
        int sgn = (scale % 2 != 0) ? -1 : 1;
        scaled = scaled - rational(sgn, 3);
    }
    return DyadicInterval{scale, scaled.floor(), beta};
}

inline DyadicInterval interval_at(double x, int scale, Shift beta) {
    return interval_at(rational::from_double(x), scale, beta);
}

namespace detail {

// Smallest integer j with 2^j >= q, by exact comparison.
inline int scale_at_least(const rational& q) {
    int j = static_cast<int>(std::ceil(std::log2(q.to_double())));
    rational p(1);
    p.shift_pow2(j);
    while (p < q) {
        ++j;
        p.shift_pow2(1);
    }
    rational h = p;
    h.shift_pow2(-1);
    while (h >= q) {
        --j;
        h.shift_pow2(-1);
    }
    return j;
}

}  // namespace detail

// Covering lemma, constructive form: a grid interval J containing [a, b)
// with |J| <= 6 (b-a).  The plain grid is searched first, smallest scale
// upward; if no admissible plain interval covers I, the shifted grid is
// taken at the canonical scale (the unique j with 3|I| <= 2^j < 6|I|),
// where the two grids' failure sets are disjoint, so it cannot miss.
inline DyadicInterval containing_dyadic(const rational& a, const rational& b) {
    if (!(a < b)) throw domain_error("containing_dyadic: empty interval");
    rational len = b - a;
    int j_lo = detail::scale_at_least(len);
    int j_star = detail::scale_at_least(rational(3) * len);
    if (j_lo < kMinScale || j_star > kMaxScale)
        throw domain_error("containing_dyadic: interval length out of scale range");

    for (int k = j_lo; k <= j_star; ++k) {
        DyadicInterval J = interval_at(a, k, Shift::none);
        if (b <= J.right()) return J;
    }
    DyadicInterval J = interval_at(a, j_star, Shift::third);
    if (b <= J.right()) return J;
    throw error("containing_dyadic: covering lemma search failed");  // unreachable
}

inline DyadicInterval containing_dyadic(double a, double b) {
    return containing_dyadic(rational::from_double(a), rational::from_double(b));
}

// Grid intervals of one scale meeting [x_lo, x_hi), ordered by m.
inline std::vector<DyadicInterval> intervals_at_scale(int scale, Shift beta,
                                                      const ScaleWindow& w,
                                                      std::int64_t max_count = (1 << 22)) {
    w.validate();
    rational lo = rational::from_double(w.x_lo);
    rational hi = rational::from_double(w.x_hi);
    DyadicInterval first = interval_at(lo, scale, beta);
    if (first.right() <= lo) first.m += 1;  // defensive; interval_at is exact
    std::vector<DyadicInterval> out;
    DyadicInterval cur = first;
    while (cur.left() < hi) {
        out.push_back(cur);
        if (static_cast<std::int64_t>(out.size()) > max_count)
            throw domain_error("intervals_at_scale: window too wide for this scale");
        cur.m += 1;
    }
    return out;
}

// The grid boxes containing z within the window: scale in [j_min, j_max],
// x(z) in I, Im z < |I|.  Ordered by increasing scale; empty when
// Im z >= 2^j_max.
inline std::vector<DyadicInterval> boxes_containing(double x, double y, Shift beta,
                                                    const ScaleWindow& w) {
    w.validate();
    if (!(y > 0.0)) throw domain_error("boxes_containing: point not in upper half-plane");
    std::vector<DyadicInterval> chain;
    int j0 = std::ilogb(y) + 1;  // smallest j with 2^j > y
    rational rx = rational::from_double(x);
    rational lo = rational::from_double(w.x_lo);
    rational hi = rational::from_double(w.x_hi);
    for (int j = std::max(j0, w.j_min); j <= w.j_max; ++j) {
        DyadicInterval I = interval_at(rx, j, beta);
        if (I.right() <= lo || I.left() >= hi) continue;  // outside window family
        chain.push_back(I);
    }
    return chain;
}

// Whitney cells T_I for every window interval.  The union of the cells
// tiles [x_lo, x_hi) x [2^(j_min - 1), 2^j_max) up to the overhang of
// partially-overlapping edge cells.
inline std::vector<DyadicInterval> whitney_cells(const ScaleWindow& w, Shift beta) {
    w.validate();
    std::vector<DyadicInterval> cells;
    for (int j = w.j_min; j <= w.j_max; ++j) {
        auto row = intervals_at_scale(j, beta, w);
        cells.insert(cells.end(), row.begin(), row.end());
    }
    return cells;
}

}  // namespace bbmax
