#pragma once

// JSON configuration layer for the verification lab and the CLI.
//
// Every parse error is reported as config_error whose message starts with the
// JSON-pointer-ish path of the offending node ("/params/p: expected a number"),
// so a bad config pinpoints itself.  Scenario objects collect everything a
// verification run needs: exponents, window, weights, measures, gauges, the
// trial-family recipe and the lambda/epsilon grids.
//
// Trial families are deterministic in (seed, recipe): draws come straight from
// mt19937_64 words, not from std::uniform_*_distribution, so a config+seed pair
// reproduces bit-identical fields on any standard library.

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <bbmax/errors.hpp>
#include <bbmax/field.hpp>
#include <bbmax/geometry.hpp>
#include <bbmax/operators.hpp>
#include <bbmax/orlicz.hpp>
#include <bbmax/quadrature.hpp>

namespace bbmax {

// Scenario identifiers accepted by `bbmax verify <tag>`.  Each tag names one
// bundled check; the table in verify.hpp documents what each one computes.
enum class ScenarioTag {
    t2_1a,  // unweighted weak type for the fractional maximal operator
    t2_1b,  // sup bound M f <= || f ||_{(2+a)/g, a}
    c2_1,   // unweighted L^p -> L^q bound with the explicit constant
    t2_2,   // weighted weak type <-> box condition <-> testing condition
    t2_3,   // two-weight weak type with mu = sigma dV_a (box condition form)
    t2_4,   // testing characterization of the two-weight strong bound
    t2_5,   // strong bound from the joint box constant and the infinity class
    t2_6,   // Orlicz bump condition -> weighted maximal bound
    t2_7,   // double bump condition -> positive Bergman operator bound
    t2_8,   // three norm inequalities from joint class constants
    t2_9,   // improved exponent on the infinity-class factor
    p2_1,   // sharp joint bound at the critical exponent
    t2_10,  // sharp power of the joint constant
    c2_2,   // diagonal corollary + Hardy-Littlewood and exp-maximal extras
    l3_2,   // per-box equivalence: box condition <-> testing condition
    t3_1,   // Carleson embedding for box sequences
    s5,     // sharpness sweep on the power-weight family
};

inline constexpr ScenarioTag kAllScenarioTags[] = {
    ScenarioTag::t2_1a, ScenarioTag::t2_1b, ScenarioTag::c2_1, ScenarioTag::t2_2,
    ScenarioTag::t2_3,  ScenarioTag::t2_4,  ScenarioTag::t2_5, ScenarioTag::t2_6,
    ScenarioTag::t2_7,  ScenarioTag::t2_8,  ScenarioTag::t2_9, ScenarioTag::p2_1,
    ScenarioTag::t2_10, ScenarioTag::c2_2,  ScenarioTag::l3_2, ScenarioTag::t3_1,
    ScenarioTag::s5,
};

inline const char* scenario_tag_name(ScenarioTag t) {
    switch (t) {
        case ScenarioTag::t2_1a: return "T2.1a";
        case ScenarioTag::t2_1b: return "T2.1b";
        case ScenarioTag::c2_1: return "C2.1";
        case ScenarioTag::t2_2: return "T2.2";
        case ScenarioTag::t2_3: return "T2.3";
        case ScenarioTag::t2_4: return "T2.4";
        case ScenarioTag::t2_5: return "T2.5";
        case ScenarioTag::t2_6: return "T2.6";
        case ScenarioTag::t2_7: return "T2.7";
        case ScenarioTag::t2_8: return "T2.8";
        case ScenarioTag::t2_9: return "T2.9";
        case ScenarioTag::p2_1: return "P2.1";
        case ScenarioTag::t2_10: return "T2.10";
        case ScenarioTag::c2_2: return "C2.2";
        case ScenarioTag::l3_2: return "L3.2";
        case ScenarioTag::t3_1: return "T3.1";
        case ScenarioTag::s5: return "S5";
    }
    return "?";
}

inline std::optional<ScenarioTag> parse_scenario_tag(const std::string& s) {
    for (ScenarioTag t : kAllScenarioTags)
        if (s == scenario_tag_name(t)) return t;
    return std::nullopt;
}

namespace cfg {

using nlohmann::json;

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
    throw config_error(path.empty() ? "/: " + what : path + ": " + what);
}

// Path-carrying view over a JSON node.
class Cursor {
public:
    Cursor(const json& node, std::string path) : node_(&node), path_(std::move(path)) {}

    const json& raw() const { return *node_; }
    const std::string& path() const { return path_; }

    bool has(const char* key) const { return node_->is_object() && node_->contains(key); }

    Cursor at(const char* key) const {
        if (!node_->is_object()) fail(path_, "expected an object");
        auto it = node_->find(key);
        if (it == node_->end()) fail(path_ + "/" + key, "missing");
        return Cursor(*it, path_ + "/" + key);
    }

    std::optional<Cursor> find(const char* key) const {
        if (!node_->is_object()) return std::nullopt;
        auto it = node_->find(key);
        if (it == node_->end()) return std::nullopt;
        return Cursor(*it, path_ + "/" + key);
    }

    double number() const {
        if (!node_->is_number()) fail(path_, "expected a number");
        return node_->get<double>();
    }

    double number_or(const char* key, double fallback) const {
        auto c = find(key);
        return c ? c->number() : fallback;
    }

    int integer() const {
        if (!node_->is_number_integer()) fail(path_, "expected an integer");
        return node_->get<int>();
    }

    int integer_or(const char* key, int fallback) const {
        auto c = find(key);
        return c ? c->integer() : fallback;
    }

    bool boolean() const {
        if (!node_->is_boolean()) fail(path_, "expected a boolean");
        return node_->get<bool>();
    }

    std::string str() const {
        if (!node_->is_string()) fail(path_, "expected a string");
        return node_->get<std::string>();
    }

    std::string str_or(const char* key, const std::string& fallback) const {
        auto c = find(key);
        return c ? c->str() : fallback;
    }

    std::size_t size() const {
        if (!node_->is_array()) fail(path_, "expected an array");
        return node_->size();
    }

    Cursor item(std::size_t i) const {
        if (!node_->is_array()) fail(path_, "expected an array");
        if (i >= node_->size()) fail(path_ + "/" + std::to_string(i), "index out of range");
        return Cursor((*node_)[i], path_ + "/" + std::to_string(i));
    }

private:
    const json* node_;
    std::string path_;
};

// ---- scalar fields ----------------------------------------------------------
//
// {"kind":"constant","c":1}                       {"kind":"power_y","t":0.5}
// {"kind":"power_abs","s":-0.5}                   {"kind":"box","x0":0,"x1":1}
// {"kind":"rect","x0":..,"x1":..,"y0":..,"y1":..} {"kind":"halfdisk","radius":1}
// {"kind":"monomial","coef":..,"s":..,"t":..[,"disk":R]}
// {"kind":"sum","terms":[...]}  {"kind":"product","factors":[...]}
// {"kind":"power","base":{...},"exponent":p}      {"kind":"scaled","c":2,"of":{...}}
// Every primitive accepts an optional "coef" multiplier.

inline ScalarField parse_field(const Cursor& c);

inline ScalarField apply_coef(const Cursor& c, ScalarField f) {
    double k = c.number_or("coef", 1.0);
    return k == 1.0 ? f : f.scaled(k);
}

inline ScalarField parse_field(const Cursor& c) {
    std::string kind = c.at("kind").str();
    if (kind == "constant") return ScalarField::constant(c.at("c").number());
    if (kind == "power_y") return apply_coef(c, ScalarField::power_y(c.at("t").number()));
    if (kind == "power_abs") return apply_coef(c, ScalarField::power_abs(c.at("s").number()));
    if (kind == "box") {
        double x0 = c.at("x0").number(), x1 = c.at("x1").number();
        if (!(x0 < x1)) fail(c.path(), "box needs x0 < x1");
        return apply_coef(c, ScalarField::box_indicator(x0, x1));
    }
    if (kind == "rect") {
        Rect r{c.at("x0").number(), c.at("x1").number(), c.at("y0").number(), c.at("y1").number()};
        if (!(r.x0 < r.x1 && 0.0 <= r.y0 && r.y0 < r.y1)) fail(c.path(), "rect degenerate");
        return apply_coef(c, ScalarField::rect_indicator(r));
    }
    if (kind == "halfdisk") {
        double R = c.at("radius").number();
        if (!(R > 0.0)) fail(c.path() + "/radius", "must be positive");
        return apply_coef(c, ScalarField::halfdisk_indicator(R));
    }
    if (kind == "monomial") {
        Monomial m;
        m.coef = c.number_or("coef", 1.0);
        m.s = c.number_or("s", 0.0);
        m.t = c.number_or("t", 0.0);
        if (auto d = c.find("disk")) m.disk = d->number();
        return ScalarField::monomial(m);
    }
    if (kind == "sum") {
        Cursor terms = c.at("terms");
        if (terms.size() == 0) fail(terms.path(), "empty sum");
        ScalarField acc = parse_field(terms.item(0));
        for (std::size_t i = 1; i < terms.size(); ++i) acc = acc + parse_field(terms.item(i));
        return acc;
    }
    if (kind == "product") {
        Cursor factors = c.at("factors");
        if (factors.size() == 0) fail(factors.path(), "empty product");
        ScalarField acc = parse_field(factors.item(0));
        for (std::size_t i = 1; i < factors.size(); ++i) acc = acc * parse_field(factors.item(i));
        return acc;
    }
    if (kind == "power") return pow(parse_field(c.at("base")), c.at("exponent").number());
    if (kind == "scaled") return parse_field(c.at("of")).scaled(c.at("c").number());
    fail(c.path() + "/kind", "unknown field kind '" + kind + "'");
}

// ---- measures ---------------------------------------------------------------
//
// {"kind":"lebesgue"[,"alpha":a]}
// {"kind":"density","weight":<field>[,"alpha":a]}
// {"kind":"atoms","atoms":[[x,y,mass],...]}
// alpha defaults to the scenario's params.alpha.

inline BorelMeasure parse_measure(const Cursor& c, double alpha_default) {
    std::string kind = c.at("kind").str();
    double alpha = c.number_or("alpha", alpha_default);
    if (kind == "lebesgue") return BorelMeasure::lebesgue(alpha);
    if (kind == "density") return BorelMeasure::density(parse_field(c.at("weight")), alpha);
    if (kind == "atoms") {
        Cursor arr = c.at("atoms");
        std::vector<Atom> atoms;
        for (std::size_t i = 0; i < arr.size(); ++i) {
            Cursor a = arr.item(i);
            if (a.size() != 3) fail(a.path(), "atom needs [x, y, mass]");
            Atom at{a.item(0).number(), a.item(1).number(), a.item(2).number()};
            if (!(at.y > 0.0) || !(at.mass >= 0.0)) fail(a.path(), "atom needs y > 0, mass >= 0");
            atoms.push_back(at);
        }
        return BorelMeasure::atoms(std::move(atoms));
    }
    fail(c.path() + "/kind", "unknown measure kind '" + kind + "'");
}

// ---- exponents, window, quadrature, gauges ----------------------------------

inline Params parse_params(const Cursor& c) {
    double p = c.at("p").number();
    double alpha = c.at("alpha").number();
    double gamma = c.number_or("gamma", 0.0);
    double q;
    Cursor qc = c.at("q");
    if (qc.raw().is_string()) {
        if (qc.str() != "critical") fail(qc.path(), "expected a number or \"critical\"");
        try {
            q = Params::critical_q(p, alpha, gamma);
        } catch (const error& e) {
            fail(qc.path(), e.what());
        }
    } else {
        q = qc.number();
    }
    Params P{p, q, alpha, gamma};
    try {
        P.validate();
    } catch (const error& e) {
        fail(c.path(), e.what());
    }
    return P;
}

inline ScaleWindow parse_window(const Cursor& c) {
    ScaleWindow w{c.at("j_min").integer(), c.at("j_max").integer(),
                  c.at("x_lo").number(), c.at("x_hi").number()};
    try {
        w.validate();
    } catch (const error& e) {
        fail(c.path(), e.what());
    }
    return w;
}

inline QuadratureSpec parse_quadrature(const Cursor& c, QuadratureSpec base = {}) {
    base.rel_tol = c.number_or("rel_tol", base.rel_tol);
    base.abs_tol = c.number_or("abs_tol", base.abs_tol);
    base.max_depth = c.integer_or("max_depth", base.max_depth);
    base.nodes_per_axis = c.integer_or("nodes_per_axis", base.nodes_per_axis);
    base.tail_tol = c.number_or("tail_tol", base.tail_tol);
    return base;
}

// {"kind":"power","p":..[,"coef":..]} | {"kind":"power_conjugate_bump","p":..,"r":..}
inline YoungFunction parse_young(const Cursor& c) {
    std::string kind = c.at("kind").str();
    if (kind == "power") return YoungFunction::power(c.at("p").number(), c.number_or("coef", 1.0));
    if (kind == "power_conjugate_bump")
        return YoungFunction::power_conjugate_bump(c.at("p").number(), c.at("r").number());
    fail(c.path() + "/kind", "unknown Young function kind '" + kind + "'");
}

// ---- trial families ---------------------------------------------------------

// Recipe for the default trial family: sums of at most max_boxes Carleson-box
// indicators, interval lengths log-uniform over [2^scale_lo, 2^scale_hi],
// left endpoints uniform in the window, coefficients uniform in (0, 1].
struct FamilySpec {
    int count = 12;
    int max_boxes = 8;
    int scale_lo = -4;
    int scale_hi = 0;
};

inline FamilySpec parse_family(const Cursor& c, const ScaleWindow& w) {
    FamilySpec f;
    f.count = c.integer_or("count", f.count);
    f.max_boxes = c.integer_or("max_boxes", f.max_boxes);
    f.scale_lo = c.integer_or("scale_lo", w.j_min);
    f.scale_hi = c.integer_or("scale_hi", w.j_max);
    if (f.count < 1) fail(c.path() + "/count", "must be >= 1");
    if (f.max_boxes < 1 || f.max_boxes > 8) fail(c.path() + "/max_boxes", "must be in 1..8");
    if (f.scale_lo > f.scale_hi) fail(c.path(), "scale_lo > scale_hi");
    return f;
}

struct LambdaGrid {
    int count = 32;
    double decades = 3.0;  // sweep spans [ref * 10^-decades, 2 * ref]
};

inline LambdaGrid parse_lambda(const Cursor& c) {
    LambdaGrid g;
    g.count = c.integer_or("count", g.count);
    g.decades = c.number_or("decades", g.decades);
    if (g.count < 2) fail(c.path() + "/count", "must be >= 2");
    if (!(g.decades > 0.0)) fail(c.path() + "/decades", "must be positive");
    return g;
}

// Raw mt19937_64 words mapped to [0,1); intentionally distribution-free.
struct Draw {
    std::mt19937_64 rng;
    explicit Draw(std::uint64_t seed) : rng(seed) {}
    double unit() { return double(rng() >> 11) * 0x1.0p-53; }
    int range(int lo, int hi) {  // inclusive
        return lo + int(double(hi - lo + 1) * unit());
    }
};

inline std::vector<ScalarField> sample_box_family(const FamilySpec& fam, const ScaleWindow& w,
                                                  std::uint64_t seed) {
    Draw d(seed);
    std::vector<ScalarField> out;
    out.reserve(std::size_t(fam.count));
    double width = w.x_hi - w.x_lo;
    for (int i = 0; i < fam.count; ++i) {
        int n = d.range(1, fam.max_boxes);
        std::optional<ScalarField> f;
        for (int b = 0; b < n; ++b) {
            int j = d.range(fam.scale_lo, fam.scale_hi);
            double len = std::ldexp(1.0, j);
            len = std::min(len, width);
            double x0 = w.x_lo + (width - len) * d.unit();
            double coef = 1.0 - d.unit();  // (0, 1]
            ScalarField term = ScalarField::box_indicator(x0, x0 + len).scaled(coef);
            f = f ? (*f + term) : term;
        }
        out.push_back(std::move(*f));
    }
    return out;
}

// Sample points of the window region: x uniform, y log-uniform over the scales.
inline std::vector<std::pair<double, double>> sample_points(const ScaleWindow& w, int count,
                                                            std::uint64_t seed) {
    Draw d(seed);
    std::vector<std::pair<double, double>> pts;
    pts.reserve(std::size_t(count));
    for (int i = 0; i < count; ++i) {
        double x = w.x_lo + (w.x_hi - w.x_lo) * d.unit();
        double j = double(w.j_min - 1) + double(w.j_max - w.j_min + 1) * d.unit();
        pts.emplace_back(x, std::pow(2.0, j));
    }
    return pts;
}

// ---- scenarios ---------------------------------------------------------------

struct Scenario {
    ScenarioTag tag = ScenarioTag::t2_2;
    std::uint64_t seed = 20260825ull;
    Params P{2.0, 2.0, 0.0, 0.0};
    ScaleWindow W{-4, 0, 0.0, 1.0};
    QuadratureSpec spec{};
    std::optional<ScalarField> omega, sigma;
    std::optional<BorelMeasure> mu;
    std::optional<YoungFunction> phi, psi;
    FamilySpec family{};
    LambdaGrid lambda{};
    std::vector<double> eps{0.2, 0.1, 0.05, 0.025};
    double s = 1.0;            // Carleson embedding exponent
    double tolerance = 1e-6;
    double stab_tol = 0.25;    // fitted-constant drift allowed between half and full family
    int inner_depth = 5;       // B_infinity inner recursion depth
    int cap = 2048;            // per-scale interval cap for constant sweeps
    int sweep_depth = 10;      // depth of the sharpness-sweep window
    double ratio_step = std::pow(2.0, 0.125);  // layer-cake lambda grid step
    json sequence;             // Carleson sequence description (t3_1)
};

inline Scenario parse_scenario(const json& root, const std::string& root_path = "") {
    Cursor c(root, root_path);
    Scenario sc;
    std::string tag = c.at("tag").str();
    auto t = parse_scenario_tag(tag);
    if (!t) fail(c.path() + "/tag", "unknown scenario tag '" + tag + "'");
    sc.tag = *t;
    if (auto s = c.find("seed")) sc.seed = std::uint64_t(s->integer());
    sc.P = parse_params(c.at("params"));
    if (auto w = c.find("window")) sc.W = parse_window(*w);
    if (auto q = c.find("quadrature")) sc.spec = parse_quadrature(*q);
    if (auto f = c.find("omega")) sc.omega = parse_field(*f);
    if (auto f = c.find("sigma")) sc.sigma = parse_field(*f);
    if (auto m = c.find("mu")) sc.mu = parse_measure(*m, sc.P.alpha);
    if (auto y = c.find("phi")) sc.phi = parse_young(*y);
    if (auto y = c.find("psi")) sc.psi = parse_young(*y);
    if (auto f = c.find("f_family")) sc.family = parse_family(*f, sc.W);
    if (auto l = c.find("lambda")) sc.lambda = parse_lambda(*l);
    if (auto e = c.find("eps")) {
        sc.eps.clear();
        for (std::size_t i = 0; i < e->size(); ++i) {
            double v = e->item(i).number();
            if (!(v > 0.0)) fail(e->item(i).path(), "eps must be positive");
            sc.eps.push_back(v);
        }
        if (sc.eps.size() < 2) fail(e->path(), "need at least 2 eps values");
    }
    sc.s = c.number_or("s", sc.s);
    sc.tolerance = c.number_or("tolerance", sc.tolerance);
    sc.stab_tol = c.number_or("stab_tol", sc.stab_tol);
    sc.inner_depth = c.integer_or("inner_depth", sc.inner_depth);
    sc.cap = c.integer_or("cap", sc.cap);
    sc.sweep_depth = c.integer_or("sweep_depth", sc.sweep_depth);
    sc.ratio_step = c.number_or("ratio_step", sc.ratio_step);
    if (!(sc.ratio_step > 1.0)) fail(c.path() + "/ratio_step", "must be > 1");
    if (auto q = c.find("sequence")) sc.sequence = q->raw();
    if (auto f = c.find("trials")) sc.family.count = f->integer();
    if (sc.family.count < 1) fail(c.path() + "/trials", "must be >= 1");
    return sc;
}

// Mini-language for --weight flags: "power_y 0.5", "constant 2", "power_abs -0.5",
// "box 0 1", and '+'-separated sums of those, each with an optional leading
// numeric coefficient ("0.5 power_y 1 + constant 1").  Emits the field-config
// JSON so flag weights and file weights share one parse path.
inline json weight_expr_json(const std::string& expr) {
    std::vector<json> out;
    std::stringstream terms(expr);
    std::string term;
    while (std::getline(terms, term, '+')) {
        std::stringstream ss(term);
        std::vector<std::string> tok;
        std::string w;
        while (ss >> w) tok.push_back(w);
        if (tok.empty()) throw config_error("--weight: empty term in '" + expr + "'");
        double coef = 1.0;
        std::size_t k = 0;
        try {
            std::size_t used = 0;
            coef = std::stod(tok[0], &used);
            if (used == tok[0].size()) k = 1;
            else coef = 1.0;
        } catch (...) {
            coef = 1.0;
        }
        if (k >= tok.size())
            throw config_error("--weight: dangling coefficient in '" + term + "'");
        auto num = [&](std::size_t i) -> double {
            if (i >= tok.size())
                throw config_error("--weight: missing argument in '" + term + "'");
            try {
                return std::stod(tok[i]);
            } catch (...) {
                throw config_error("--weight: bad number '" + tok[i] + "'");
            }
        };
        json t;
        const std::string& kind = tok[k];
        if (kind == "constant") t = {{"kind", "constant"}, {"c", num(k + 1)}};
        else if (kind == "power_y") t = {{"kind", "power_y"}, {"t", num(k + 1)}};
        else if (kind == "power_abs") t = {{"kind", "power_abs"}, {"s", num(k + 1)}};
        else if (kind == "box") t = {{"kind", "box"}, {"x0", num(k + 1)}, {"x1", num(k + 2)}};
        else throw config_error("--weight: unknown kind '" + kind + "'");
        if (coef != 1.0) t["coef"] = coef;
        out.push_back(std::move(t));
    }
    if (out.empty()) throw config_error("--weight: empty expression");
    if (out.size() == 1) return out.front();
    return json{{"kind", "sum"}, {"terms", out}};
}

inline ScalarField parse_weight_expr(const std::string& expr) {
    return parse_field(Cursor(weight_expr_json(expr), "--weight"));
}

}  // namespace cfg
}  // namespace bbmax
