#pragma once

// Nonnegative scalar fields on the upper half-plane, kept symbolic where
// possible.  A field is either a sum of monomials
//     c |z|^s y^t 1_rect 1_{|z| <= R}
// or an opaque callable.  The monomial form is closed under products,
// under powers of a single term, and under powers of sums with pairwise
// disjoint supports (after materializing overlapping indicator sums onto a
// disjoint grid).  The integration engine gives monomials closed-form or
// polar-reduced box integrals, so the common test fields, box-indicator
// sums against power weights, integrate without quadrature noise.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "bbmax/errors.hpp"

namespace bbmax {

constexpr double kInf = std::numeric_limits<double>::infinity();

// [x0, x1) x (y0, y1); y0 >= 0
struct Rect {
    double x0{-kInf};
    double x1{kInf};
    double y0{0.0};
    double y1{kInf};

    bool empty() const { return !(x0 < x1) || !(y0 < y1); }
    Rect intersect(const Rect& o) const {
        return Rect{std::max(x0, o.x0), std::min(x1, o.x1), std::max(y0, o.y0),
                    std::min(y1, o.y1)};
    }
    bool overlaps(const Rect& o) const { return !intersect(o).empty(); }
    bool whole_plane() const {
        return x0 == -kInf && x1 == kInf && y0 == 0.0 && y1 == kInf;
    }
    // nearest distance from the origin to the closure
    double dist_origin() const {
        double nx = std::clamp(0.0, x0, x1);
        double ny = std::clamp(0.0, y0, y1);
        return std::hypot(nx, ny);
    }
};

struct Monomial {
    double coef{1.0};
    double s{0.0};      // |z| exponent
    double t{0.0};      // y exponent
    Rect support{};
    double disk{kInf};  // |z| <= disk

    double eval(double x, double y) const {
        if (!(y > support.y0) || !(y < support.y1)) return 0.0;
        if (!(x >= support.x0) || !(x < support.x1)) return 0.0;
        double r2 = x * x + y * y;
        if (disk != kInf && r2 > disk * disk) return 0.0;
        double v = coef;
        if (s != 0.0) v *= std::pow(r2, 0.5 * s);
        if (t != 0.0) v *= std::pow(y, t);
        return v;
    }

    bool pure_power() const { return support.whole_plane() && disk == kInf; }
};

namespace detail {
inline std::uint64_t next_field_id() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1);
}
}  // namespace detail

class ScalarField {
  public:
    // zero field: empty term list
    ScalarField() : generic_(false), id_(detail::next_field_id()), name_("zero") {}

    static ScalarField constant(double c) {
        Monomial m;
        m.coef = c;
        return from_terms({m}, "const(" + std::to_string(c) + ")");
    }
    static ScalarField power_y(double t) {
        Monomial m;
        m.t = t;
        return from_terms({m}, "power_y(" + std::to_string(t) + ")");
    }
    static ScalarField power_abs(double s) {
        Monomial m;
        m.s = s;
        return from_terms({m}, "power_abs(" + std::to_string(s) + ")");
    }
    // indicator of the Carleson box over [x0, x1)
    static ScalarField box_indicator(double x0, double x1) {
        if (!(x1 > x0)) throw domain_error("box_indicator: empty interval");
        Monomial m;
        m.support = Rect{x0, x1, 0.0, x1 - x0};
        return from_terms({m}, "box([" + std::to_string(x0) + "," + std::to_string(x1) + "))");
    }
    static ScalarField rect_indicator(const Rect& r) {
        if (r.empty()) throw domain_error("rect_indicator: empty rect");
        Monomial m;
        m.support = r;
        return from_terms({m}, "rect");
    }
    static ScalarField halfdisk_indicator(double R) {
        if (!(R > 0.0)) throw domain_error("halfdisk_indicator: R <= 0");
        Monomial m;
        m.disk = R;
        return from_terms({m}, "halfdisk(" + std::to_string(R) + ")");
    }
    static ScalarField monomial(const Monomial& m, std::string name = "monomial") {
        return from_terms({m}, std::move(name));
    }
    static ScalarField from_terms(std::vector<Monomial> terms, std::string name) {
        ScalarField f;
        f.terms_ = std::move(terms);
        f.generic_ = false;
        f.name_ = std::move(name);
        f.id_ = detail::next_field_id();
        return f;
    }
    static ScalarField generic(std::function<double(double, double)> fn, std::string name) {
        ScalarField f;
        f.fn_ = std::move(fn);
        f.generic_ = true;
        f.name_ = std::move(name);
        f.id_ = detail::next_field_id();
        return f;
    }

    double operator()(double x, double y) const {
        if (generic_) return fn_(x, y);
        double v = 0.0;
        for (const Monomial& m : terms_) v += m.eval(x, y);
        return v;
    }

    bool is_generic() const { return generic_; }
    const std::vector<Monomial>& terms() const { return terms_; }
    std::uint64_t id() const { return id_; }
    const std::string& name() const { return name_; }

    ScalarField scaled(double c) const {
        if (generic_) {
            auto fn = fn_;
            return generic([fn, c](double x, double y) { return c * fn(x, y); },
                           std::to_string(c) + "*" + name_);
        }
        std::vector<Monomial> t = terms_;
        for (Monomial& m : t) m.coef *= c;
        return from_terms(std::move(t), std::to_string(c) + "*" + name_);
    }

    // Opaque copy: forces every consumer down the quadrature path.
    ScalarField as_generic() const {
        ScalarField self = *this;
        return generic([self](double x, double y) { return self(x, y); },
                       "generic(" + name_ + ")");
    }

    friend ScalarField operator+(const ScalarField& a, const ScalarField& b) {
        if (a.generic_ || b.generic_) {
            return generic([a, b](double x, double y) { return a(x, y) + b(x, y); },
                           a.name_ + "+" + b.name_);
        }
        std::vector<Monomial> t = a.terms_;
        t.insert(t.end(), b.terms_.begin(), b.terms_.end());
        return from_terms(std::move(t), a.name_ + "+" + b.name_);
    }

    friend ScalarField operator*(const ScalarField& a, const ScalarField& b) {
        if (a.generic_ || b.generic_ ||
            a.terms_.size() * b.terms_.size() > 4096) {
            return generic([a, b](double x, double y) { return a(x, y) * b(x, y); },
                           a.name_ + "*" + b.name_);
        }
        std::vector<Monomial> t;
        t.reserve(a.terms_.size() * b.terms_.size());
        for (const Monomial& ma : a.terms_)
            for (const Monomial& mb : b.terms_) {
                Monomial m;
                m.coef = ma.coef * mb.coef;
                m.s = ma.s + mb.s;
                m.t = ma.t + mb.t;
                m.support = ma.support.intersect(mb.support);
                m.disk = std::min(ma.disk, mb.disk);
                if (!m.support.empty() && m.coef != 0.0) t.push_back(m);
            }
        return from_terms(std::move(t), a.name_ + "*" + b.name_);
    }

    friend ScalarField pow(const ScalarField& f, double p);

    // True if f may be nonzero somewhere on the rect; conservative (always
    // true) for generic fields.
    bool support_intersects(const Rect& where) const {
        if (generic_) return true;
        for (const Monomial& m : terms_) {
            if (m.coef == 0.0) continue;
            Rect r = m.support.intersect(where);
            if (r.empty()) continue;
            if (m.disk != kInf && r.dist_origin() > m.disk) continue;
            return true;
        }
        return false;
    }

    // Carleson-box variant: [x0, x1) x (0, h).
    bool support_intersects_box(double x0, double x1, double h) const {
        return support_intersects(Rect{x0, x1, 0.0, h});
    }

    // Smallest x-range outside which the field vanishes, if bounded.
    bool bounded_x_support(double* lo, double* hi) const {
        if (generic_) return false;
        double a = kInf, b = -kInf;
        for (const Monomial& m : terms_) {
            if (m.coef == 0.0) continue;
            double mx0 = m.support.x0, mx1 = m.support.x1;
            if (m.disk != kInf) {
                mx0 = std::max(mx0, -m.disk);
                mx1 = std::min(mx1, m.disk);
            }
            if (mx0 == -kInf || mx1 == kInf) return false;
            a = std::min(a, mx0);
            b = std::max(b, mx1);
        }
        if (a > b) return false;
        *lo = a;
        *hi = b;
        return true;
    }

  private:
    std::vector<Monomial> terms_;
    std::function<double(double, double)> fn_;
    bool generic_{true};
    std::uint64_t id_{0};
    std::string name_;
};

namespace detail {

inline bool pairwise_disjoint(const std::vector<Monomial>& terms) {
    for (size_t i = 0; i < terms.size(); ++i)
        for (size_t j = i + 1; j < terms.size(); ++j)
            if (terms[i].support.overlaps(terms[j].support)) return false;
    return true;
}

// Overlay the rect supports of piecewise-constant terms onto a disjoint
// grid of cells carrying the summed coefficient.
inline std::vector<Monomial> materialize_pwc(const std::vector<Monomial>& terms) {
    std::set<double> xs, ys;
    for (const Monomial& m : terms) {
        xs.insert(m.support.x0);
        xs.insert(m.support.x1);
        ys.insert(m.support.y0);
        ys.insert(m.support.y1);
    }
    std::vector<double> xc(xs.begin(), xs.end()), yc(ys.begin(), ys.end());
    std::vector<Monomial> out;
    for (size_t i = 0; i + 1 < xc.size(); ++i)
        for (size_t j = 0; j + 1 < yc.size(); ++j) {
            Rect cell{xc[i], xc[i + 1], yc[j], yc[j + 1]};
            if (cell.empty()) continue;
            double v = 0.0;
            for (const Monomial& m : terms)
                if (!m.support.intersect(cell).empty()) v += m.coef;
            if (v != 0.0) {
                Monomial c;
                c.coef = v;
                c.support = cell;
                out.push_back(c);
            }
        }
    return out;
}

}  // namespace detail

inline ScalarField pow(const ScalarField& f, double p) {
    if (p == 1.0) return f;
    if (!f.is_generic()) {
        const auto& terms = f.terms();
        auto pow_term = [p](const Monomial& m) {
            Monomial r = m;
            r.coef = std::pow(m.coef, p);
            r.s = m.s * p;
            r.t = m.t * p;
            return r;
        };
        if (terms.size() <= 1 || detail::pairwise_disjoint(terms)) {
            std::vector<Monomial> t;
            t.reserve(terms.size());
            for (const Monomial& m : terms) t.push_back(pow_term(m));
            return ScalarField::from_terms(std::move(t), f.name() + "^" + std::to_string(p));
        }
        bool pwc = true;
        for (const Monomial& m : terms)
            if (m.s != 0.0 || m.t != 0.0 || m.disk != kInf || m.support.x0 == -kInf ||
                m.support.x1 == kInf || m.support.y1 == kInf)
                pwc = false;
        if (pwc && terms.size() <= 64) {
            std::vector<Monomial> cells = detail::materialize_pwc(terms);
            for (Monomial& m : cells) m.coef = std::pow(m.coef, p);
            return ScalarField::from_terms(std::move(cells),
                                           f.name() + "^" + std::to_string(p));
        }
    }
    ScalarField base = f;
    return ScalarField::generic(
        [base, p](double x, double y) { return std::pow(base(x, y), p); },
        base.name() + "^" + std::to_string(p));
}

// ---- Borel measures ------------------------------------------------------

struct Atom {
    double x{0.0};
    double y{0.0};
    double mass{0.0};
};

// Either weight * dV_alpha or a finite sum of point masses.
class BorelMeasure {
  public:
    static BorelMeasure density(ScalarField w, double alpha) {
        if (!(alpha > -1.0)) throw domain_error("measure: alpha must exceed -1");
        BorelMeasure m;
        m.atomic_ = false;
        m.weight_ = std::move(w);
        m.alpha_ = alpha;
        return m;
    }
    static BorelMeasure lebesgue(double alpha) {
        return density(ScalarField::constant(1.0), alpha);
    }
    static BorelMeasure atoms(std::vector<Atom> a) {
        BorelMeasure m;
        m.atomic_ = true;
        m.atoms_ = std::move(a);
        for (const Atom& at : m.atoms_)
            if (!(at.y > 0.0) || at.mass < 0.0)
                throw domain_error("measure: atoms must sit in the open half-plane");
        return m;
    }

    bool is_atomic() const { return atomic_; }
    const ScalarField& weight() const { return weight_; }
    double alpha() const { return alpha_; }
    const std::vector<Atom>& atom_list() const { return atoms_; }

  private:
    bool atomic_{false};
    ScalarField weight_{ScalarField::constant(1.0)};
    double alpha_{0.0};
    std::vector<Atom> atoms_;
};

}  // namespace bbmax
