#pragma once

// Command-line driver.  Five subcommands:
//
//   measure       box and tent masses for a measure over listed boxes / a window
//   maximal-eval  pointwise operator values at sample points
//   constant      one weight-class / testing / sequence constant as JSON
//   verify TAG    run a scenario, emit per-trial CSV + JSON summary
//   sharpness     run the power-weight rate sweep
//
// Every run is driven by a JSON config (--config).  Outputs are a CSV (one
// row per trial / box / point / eps, last column a literal schema token) and
// a JSON summary that repeats the schema token as "csv_schema".  Identical
// config + seed gives byte-identical outputs: wall-clock time is printed to
// the console only.  Exit codes: 0 all checks pass, 1 any failure (including
// config errors, reported with their JSON pointer path on stderr), 2 every
// check passed but a stabilization or tail flag fired.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <bbmax/verify.hpp>

namespace bbmax {
namespace cli {

inline std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline nlohmann::json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw config_error(path + ": " + e.what());
    }
    return j;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot write output file: " + path);
    out << text;
}

inline std::string rows_csv(const std::string& tag, const std::vector<VerifyRow>& rows) {
    std::ostringstream os;
    os << "tag,trial,label,where,a,b,lhs,rhs,ratio,flag,schema\n";
    for (const VerifyRow& r : rows)
        os << tag << ',' << r.trial << ',' << r.label << ',' << r.where << ',' << num(r.a)
           << ',' << num(r.b) << ',' << num(r.lhs) << ',' << num(r.rhs) << ',' << num(r.ratio)
           << ',' << r.flag << ",verify.v1\n";
    return os.str();
}

inline void console_line(const VerificationResult& r) {
    std::printf("%-6s trials=%-4d worst=%-12.6g tol=%-10.3g %s%s  (%.2fs)\n",
                scenario_tag_name(r.tag), r.trials, r.worst_ratio, r.tolerance,
                r.pass ? "pass" : "FAIL", r.inconclusive ? " [inconclusive]" : "",
                r.runtime_seconds);
}

// ---- measure ---------------------------------------------------------------------

inline int run_measure(const nlohmann::json& config, const std::string& out_dir) {
    cfg::Cursor c(config, "");
    double alpha = c.number_or("alpha", 0.0);
    BorelMeasure mu = c.has("mu") ? cfg::parse_measure(c.at("mu"), alpha)
                                  : BorelMeasure::lebesgue(alpha);
    QuadratureSpec spec =
        c.has("quadrature") ? cfg::parse_quadrature(c.at("quadrature")) : QuadratureSpec{};

    std::vector<DyadicInterval> boxes;
    if (c.has("boxes")) {
        cfg::Cursor arr = c.at("boxes");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            cfg::Cursor b = arr.item(i);
            boxes.push_back(DyadicInterval{
                b.at("scale").integer(), b.at("m").integer(),
                b.str_or("grid", "plain") == "third" ? Shift::third : Shift::none});
        }
    } else if (c.has("window")) {
        ScaleWindow W = cfg::parse_window(c.at("window"));
        for (Shift beta : kShifts)
            for (int j = W.j_min; j <= W.j_max; ++j)
                for (const DyadicInterval& I : intervals_at_scale(j, beta, W))
                    boxes.push_back(I);
    } else {
        cfg::fail("/boxes", "measure config needs \"boxes\" or \"window\"");
    }

    std::ostringstream os;
    os << "grid,scale,m,x0,len,mu_box,box_alpha,tent_alpha,schema\n";
    double tent_factor = 1.0 - std::pow(2.0, -(1.0 + alpha));
    for (const DyadicInterval& I : boxes) {
        double qa = box_measure_alpha(I.length(), alpha);
        os << shift_name(I.beta) << ',' << I.scale << ',' << I.m << ','
           << num(I.left().to_double()) << ',' << num(I.length()) << ','
           << num(measure_of_box(mu, I, spec)) << ',' << num(qa) << ','
           << num(qa * tent_factor) << ",measure.v1\n";
    }
    write_text(out_dir + "/measure.csv", os.str());
    nlohmann::json summary{
        {"boxes", boxes.size()}, {"alpha", alpha}, {"csv_schema", "measure.v1"}};
    write_text(out_dir + "/measure.summary.json", summary.dump(2) + "\n");
    std::printf("measure: %zu boxes -> %s/measure.csv\n", boxes.size(), out_dir.c_str());
    return 0;
}

// ---- maximal-eval ----------------------------------------------------------------

inline int run_eval(const nlohmann::json& config, const std::string& out_dir) {
    cfg::Cursor c(config, "");
    std::string op = c.at("op").str();
    Params P = c.has("params") ? cfg::parse_params(c.at("params")) : Params{1.0, 1.0, 0.0, 0.0};
    ScaleWindow W = cfg::parse_window(c.at("window"));
    QuadratureSpec spec =
        c.has("quadrature") ? cfg::parse_quadrature(c.at("quadrature")) : QuadratureSpec{};
    ScalarField f = cfg::parse_field(c.at("f"));
    Shift beta = c.str_or("beta", "plain") == "third" ? Shift::third : Shift::none;

    std::vector<std::pair<double, double>> pts;
    if (c.has("points")) {
        cfg::Cursor arr = c.at("points");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            cfg::Cursor p = arr.item(i);
            pts.emplace_back(p.item(0).number(), p.item(1).number());
        }
    } else {
        pts = cfg::sample_points(W, int(c.number_or("count", 8)),
                                 std::uint64_t(c.number_or("seed", 20260825)));
    }

    std::optional<ScalarField> sigma;
    if (c.has("sigma")) sigma = cfg::parse_field(c.at("sigma"));
    std::optional<YoungFunction> phi;
    if (c.has("phi")) phi = cfg::parse_young(c.at("phi"));

    std::ostringstream os;
    os << "op,beta,x,y,value,extra,flag,schema\n";
    for (auto [x, y] : pts) {
        double value = 0.0, extra = 0.0;
        std::string flag;
        if (op == "dyadic") {
            value = dyadic_fractional_maximal(f, P, beta, x, y, W, spec);
        } else if (op == "weighted") {
            if (!sigma) cfg::fail("/sigma", "weighted eval needs a weight field");
            value = weighted_fractional_maximal(f, *sigma, P, beta, x, y, W, spec);
        } else if (op == "bracket") {
            MaximalBracket b = fractional_maximal_bracket(f, P, x, y, W, 8, spec);
            value = b.lower;
            extra = b.upper;
        } else if (op == "exp") {
            value = exp_maximal(f, P.alpha, x, y, W, spec, beta);
        } else if (op == "orlicz") {
            if (!phi) cfg::fail("/phi", "orlicz eval needs a young function");
            value = orlicz_maximal(f, *phi, P.alpha, x, y, W, spec, beta);
        } else if (op == "positive") {
            ChainSum s = dyadic_positive_operator(f, P, beta, x, y, W, spec);
            value = s.value;
            if (s.truncated) flag = "truncated";
        } else if (op == "bergman") {
            IntegralValue v = bergman_positive(f, P, x, y, W, spec);
            value = v.value;
            extra = v.err;
        } else {
            cfg::fail("/op", "unknown op '" + op + "'");
        }
        os << op << ',' << shift_name(beta) << ',' << num(x) << ',' << num(y) << ','
           << num(value) << ',' << num(extra) << ',' << flag << ",eval.v1\n";
    }
    write_text(out_dir + "/maximal_eval.csv", os.str());
    nlohmann::json summary{{"op", op}, {"points", pts.size()}, {"csv_schema", "eval.v1"}};
    write_text(out_dir + "/maximal_eval.summary.json", summary.dump(2) + "\n");
    std::printf("maximal-eval: %s at %zu points -> %s/maximal_eval.csv\n", op.c_str(),
                pts.size(), out_dir.c_str());
    return 0;
}

// ---- constant --------------------------------------------------------------------

inline int run_constant(const nlohmann::json& config, const std::string& out_dir) {
    cfg::Cursor c(config, "");
    std::string kind = c.at("kind").str();
    Params P = c.has("params") ? cfg::parse_params(c.at("params")) : Params{2.0, 2.0, 0.0, 0.0};
    ScaleWindow W = c.has("window") ? cfg::parse_window(c.at("window"))
                                    : ScaleWindow{-4, 0, 0.0, 1.0};
    QuadratureSpec spec =
        c.has("quadrature") ? cfg::parse_quadrature(c.at("quadrature")) : QuadratureSpec{};
    int cap = int(c.number_or("cap", 4096));
    int inner_depth = int(c.number_or("inner_depth", 6));

    auto field_at = [&](const char* key) -> std::optional<ScalarField> {
        if (!c.has(key)) return std::nullopt;
        return cfg::parse_field(c.at(key));
    };
    std::optional<ScalarField> omega = field_at("omega");
    std::optional<ScalarField> sigma = field_at("sigma");

    ConstantReport rep;
    if (kind == "Bp") {
        if (!omega) cfg::fail("/omega", "Bp needs a weight");
        rep = bekolle_bonami(*omega, P.p, P.alpha, W, spec, cap);
    } else if (kind == "Binf") {
        if (!omega) cfg::fail("/omega", "Binf needs a weight");
        rep = bekolle_infinity(*omega, P.alpha, W, spec, inner_depth, cap);
    } else if (kind == "sawyer") {
        if (!sigma) cfg::fail("/sigma", "sawyer testing needs sigma");
        if (!c.has("mu")) cfg::fail("/mu", "sawyer testing needs mu");
        BorelMeasure mu = cfg::parse_measure(c.at("mu"), P.alpha);
        Shift beta = c.str_or("beta", "plain") == "third" ? Shift::third : Shift::none;
        rep = sawyer_testing(*sigma, mu, P, beta, W, spec, std::pow(2.0, 0.125), cap);
    } else if (kind == "carleson") {
        if (!omega) cfg::fail("/omega", "carleson needs a weight");
        double delta = c.number_or("s", 1.0);
        double power = c.number_or("power", 1.0);
        CarlesonSequence seq = box_measure_sequence(*omega, P.alpha, W, spec);
        if (power != 1.0)
            for (auto& [I, v] : seq) v = std::pow(v, power);
        rep = carleson_sequence_constant(seq, *omega, P.alpha, delta, W, spec);
    } else {
        ConstantKind k;
        if (kind == "Apq") k = ConstantKind::A_pq;
        else if (kind == "Cpq") k = ConstantKind::C_pq;
        else if (kind == "Spq") k = ConstantKind::S_pq;
        else if (kind == "Bpq") k = ConstantKind::B_pq_joint;
        else if (kind == "strong") k = ConstantKind::strong_class;
        else if (kind == "weak") k = ConstantKind::weak_class;
        else if (kind == "bump-single") k = ConstantKind::bump_single;
        else if (kind == "bump-double") k = ConstantKind::bump_double;
        else cfg::fail("/kind", "unknown constant kind '" + kind + "'");
        ClassData d;
        d.omega = omega;
        d.sigma = sigma;
        if (c.has("mu")) d.mu = cfg::parse_measure(c.at("mu"), P.alpha);
        if (c.has("phi")) d.phi = cfg::parse_young(c.at("phi"));
        if (c.has("psi")) d.psi = cfg::parse_young(c.at("psi"));
        rep = class_constant(k, d, P, W, spec, cap);
    }

    nlohmann::json j = rep;
    j["kind"] = kind;
    j["csv_schema"] = "constant.v1";
    std::ostringstream os;
    os << "kind,value,value_upper,grid,scale,m,refinement_delta,schema\n";
    os << kind << ',' << num(rep.value) << ','
       << (rep.value_upper ? num(*rep.value_upper) : "") << ',' << shift_name(rep.argmax.beta)
       << ',' << rep.argmax.scale << ',' << rep.argmax.m << ',' << num(rep.refinement_delta)
       << ",constant.v1\n";
    write_text(out_dir + "/constant.csv", os.str());
    write_text(out_dir + "/constant.summary.json", j.dump(2) + "\n");
    std::printf("%s\n", j.dump(2).c_str());
    return 0;
}

// ---- verify ----------------------------------------------------------------------

inline int exit_code(const VerificationResult& r) {
    if (!r.pass) return 1;
    return r.inconclusive ? 2 : 0;
}

inline int run_verify(const std::string& tag_arg, nlohmann::json config,
                      const std::string& out_dir) {
    std::optional<ScenarioTag> tag = parse_scenario_tag(tag_arg);
    if (!tag) throw config_error("unknown scenario tag '" + tag_arg + "'");
    if (!config.contains("tag"))
        config["tag"] = scenario_tag_name(*tag);
    cfg::Scenario sc = cfg::parse_scenario(config);
    if (sc.tag != *tag)
        cfg::fail("/tag", std::string("config is for ") + scenario_tag_name(sc.tag) +
                              ", command asked for " + scenario_tag_name(*tag));
    VerificationResult res = verify_scenario(sc);
    console_line(res);
    std::string name = scenario_tag_name(res.tag);
    write_text(out_dir + "/verify_" + name + ".csv", rows_csv(name, res.rows));
    nlohmann::json summary = summary_json(res);
    summary["csv_schema"] = "verify.v1";
    write_text(out_dir + "/verify_" + name + ".summary.json", summary.dump(2) + "\n");
    return exit_code(res);
}

// ---- sharpness -------------------------------------------------------------------

inline int run_sharpness(const nlohmann::json& config, const std::string& out_dir) {
    cfg::Cursor c(config, "");
    Params P = c.has("params") ? cfg::parse_params(c.at("params")) : Params{2.0, 4.0, 0.0, 0.5};
    QuadratureSpec spec =
        c.has("quadrature") ? cfg::parse_quadrature(c.at("quadrature")) : QuadratureSpec{};
    std::vector<double> eps{0.2, 0.1, 0.05, 0.025};
    if (c.has("eps")) {
        eps.clear();
        cfg::Cursor arr = c.at("eps");
        for (std::size_t i = 0; i < arr.size(); ++i) eps.push_back(arr.item(i).number());
    }
    int depth = int(c.number_or("sweep_depth", 10));
    int inner_depth = int(c.number_or("inner_depth", 4));
    int cap = int(c.number_or("cap", 2048));

    SweepResult sw = sharpness_sweep(P, eps, depth, spec, inner_depth, cap);
    std::ostringstream os;
    os << "eps,joint,binf_dual,fnorm,rnum,ratio,tail,dropped,schema\n";
    for (const SweepPoint& pt : sw.points)
        os << num(pt.eps) << ',' << num(pt.joint) << ',' << num(pt.binf_dual) << ','
           << num(pt.fnorm) << ',' << num(pt.rnum) << ',' << num(pt.ratio) << ','
           << (pt.tail ? 1 : 0) << ',' << (pt.dropped ? 1 : 0) << ",sharpness.v1\n";
    write_text(out_dir + "/sharpness.csv", os.str());

    auto ok = [](double slope, double target, double tol) {
        return std::abs(slope - target) <= tol * target;
    };
    bool pass = ok(sw.joint_slope, sw.joint_target, 0.10) &&
                ok(sw.fnorm_slope, sw.fnorm_target, 0.10) &&
                ok(sw.ratio_slope, sw.ratio_target, 0.15);
    bool dropped = false;
    for (const SweepPoint& pt : sw.points) dropped |= pt.dropped;
    nlohmann::json summary{{"joint_slope", sw.joint_slope},
                           {"joint_target", sw.joint_target},
                           {"fnorm_slope", sw.fnorm_slope},
                           {"fnorm_target", sw.fnorm_target},
                           {"ratio_slope", sw.ratio_slope},
                           {"ratio_target", sw.ratio_target},
                           {"binf_dual_slope", sw.binf_slope},
                           {"pass", pass},
                           {"inconclusive", dropped},
                           {"csv_schema", "sharpness.v1"}};
    write_text(out_dir + "/sharpness.summary.json", summary.dump(2) + "\n");
    std::printf("sharpness: joint %.4f (want %.4f)  fnorm %.4f (want %.4f)  ratio %.4f "
                "(want %.4f)  %s\n",
                sw.joint_slope, sw.joint_target, sw.fnorm_slope, sw.fnorm_target,
                sw.ratio_slope, sw.ratio_target, pass ? "pass" : "FAIL");
    if (!pass) return 1;
    return dropped ? 2 : 0;
}

}  // namespace cli

inline int run_cli(int argc, char** argv) {
    CLI::App app{"bbmax: weighted maximal and Bergman-type operator workbench on the "
                 "upper half-plane"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", tag, kind, weight_expr, window_expr;
    double p = 2.0, q = 0.0, alpha = 0.0, gamma = 0.0;

    CLI::App* m = app.add_subcommand("measure", "box and tent masses of a measure");
    m->add_option("--config", config_path, "JSON config")->required();
    m->add_option("--out", out_dir, "output directory");

    CLI::App* e = app.add_subcommand("maximal-eval", "pointwise operator values");
    e->add_option("--config", config_path, "JSON config")->required();
    e->add_option("--out", out_dir, "output directory");

    CLI::App* k = app.add_subcommand("constant", "weight-class / testing constant");
    k->add_option("kind", kind, "Bp|Binf|Apq|Cpq|Spq|Bpq|weak|strong|bump-single|"
                                "bump-double|sawyer|carleson");
    k->add_option("--config", config_path, "JSON config");
    k->add_option("--weight", weight_expr, "weight expression, e.g. \"power_y 0.5\"");
    k->add_option("--p", p, "exponent p");
    k->add_option("--q", q, "exponent q (defaults to p)");
    k->add_option("--alpha", alpha, "measure power alpha");
    k->add_option("--gamma", gamma, "fractional order gamma");
    k->add_option("--window", window_expr, "window as j_min,j_max,x_lo,x_hi");
    k->add_option("--out", out_dir, "output directory");

    CLI::App* v = app.add_subcommand("verify", "run one scenario");
    v->add_option("tag", tag, "scenario tag (T2.1a .. S5)")->required();
    v->add_option("--config", config_path, "JSON config")->required();
    v->add_option("--out", out_dir, "output directory");

    CLI::App* s = app.add_subcommand("sharpness", "power-weight rate sweep");
    s->add_option("--config", config_path, "JSON config");
    s->add_option("--out", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (m->parsed()) return cli::run_measure(cli::load_config(config_path), out_dir);
        if (e->parsed()) return cli::run_eval(cli::load_config(config_path), out_dir);
        if (k->parsed()) {
            nlohmann::json config = config_path.empty() ? nlohmann::json::object()
                                                        : cli::load_config(config_path);
            if (!kind.empty()) config["kind"] = kind;
            if (!weight_expr.empty()) {
                nlohmann::json w = cfg::weight_expr_json(weight_expr);
                if (kind == "sawyer") config["sigma"] = w;
                else config["omega"] = w;
            }
            if (!config.contains("params"))
                config["params"] = {{"p", p}, {"q", q > 0.0 ? q : p}, {"alpha", alpha},
                                    {"gamma", gamma}};
            if (!window_expr.empty()) {
                double jn, jx, xl, xh;
                if (std::sscanf(window_expr.c_str(), "%lf,%lf,%lf,%lf", &jn, &jx, &xl, &xh) != 4)
                    throw config_error("--window expects j_min,j_max,x_lo,x_hi");
                config["window"] = {{"j_min", int(jn)}, {"j_max", int(jx)}, {"x_lo", xl},
                                    {"x_hi", xh}};
            }
            return cli::run_constant(config, out_dir);
        }
        if (v->parsed()) return cli::run_verify(tag, cli::load_config(config_path), out_dir);
        if (s->parsed()) {
            nlohmann::json config = config_path.empty() ? nlohmann::json::object()
                                                        : cli::load_config(config_path);
            return cli::run_sharpness(config, out_dir);
        }
    } catch (const config_error& ex) {
        std::fprintf(stderr, "config error: %s\n", ex.what());
        return 1;
    } catch (const error& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 1;
    }
    return 1;
}

}  // namespace bbmax
