#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "eeb/errors.hpp"
#include "eeb/expr.hpp"
#include "eeb/macro.hpp"

namespace eeb {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void apply_param_overrides(EconParams& p, const nlohmann::json& j) {
    auto set = [&](const char* key, double& slot) {
        if (j.contains(key)) slot = j.at(key).get<double>();
    };
    set("e_I", p.e_I);
    set("i_Y", p.i_Y);
    set("i_R", p.i_R);
    set("e_S", p.e_S);
    set("s_Y", p.s_Y);
    set("s_R", p.s_R);
    set("l_Y", p.l_Y);
    set("l_R", p.l_R);
    set("m_Y", p.m_Y);
    set("m_R", p.m_R);
    set("q_0", p.q_0);
    set("q_Y", p.q_Y);
    set("q_R", p.q_R);
    set("M_CB", p.M_CB);
    set("MP", p.MP);
    set("pi_e", p.pi_e);
    set("alpha_d", p.alpha_d);
    set("beta_d", p.beta_d);
    set("alpha_s", p.alpha_s);
    set("beta_s", p.beta_s);
}

// Shared expression closure over (Y, R); i is derived from R.
std::function<double(double, double)> closure_YR(const std::string& src) {
    auto ast = std::make_shared<ExprAst>(parse_expr(src, {"Y", "R"}));
    return [ast](double Y, double R) {
        return eval_expr(**ast, {{"Y", Y}, {"R", R}});
    };
}

std::function<double(double, double)> closure_Yi(const std::string& src) {
    auto ast = std::make_shared<ExprAst>(parse_expr(src, {"Y", "i"}));
    return [ast](double Y, double i) {
        return eval_expr(**ast, {{"Y", Y}, {"i", i}});
    };
}

} // namespace

ModelFile load_model_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    ModelFile mf;

    if (j.contains("region")) {
        auto r = j.at("region");
        mf.domain = Rect{r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>(),
                         r.at(3).get<double>()};
    }
    mf.force = j.value("force", false);

    if (j.contains("fields")) {
        // Raw two-branch model: expressions in (x, y) per component.
        auto jf = j.at("fields");
        auto comp = [&](const char* key) {
            auto ast = std::make_shared<ExprAst>(
                parse_expr(jf.at(key).get<std::string>(), {"x", "y"}));
            return [ast](Point2 p) { return eval_expr(**ast, {{"x", p.x}, {"y", p.y}}); };
        };
        auto fx = comp("fx"), fy = comp("fy"), gx = comp("gx"), gy = comp("gy");
        if (!j.contains("region")) mf.domain = Rect{-10, -10, 10, 10};
        EulerBranching eb;
        eb.domain = mf.domain;
        eb.f.name = "f";
        eb.f.domain = mf.domain;
        eb.f.eval = [fx, fy](Point2 p) -> Vec2 { return {fx(p), fy(p)}; };
        eb.g.name = "g";
        eb.g.domain = mf.domain;
        eb.g.eval = [gx, gy](Point2 p) -> Vec2 { return {gx(p), gy(p)}; };
        mf.is_macro = false;
        mf.raw = std::move(eb);
        return mf;
    }

    apply_param_overrides(mf.params, j);

    if (j.contains("expressions")) {
        auto je = j.at("expressions");
        EconFunctions fn;
        fn.I = closure_YR(je.at("I").get<std::string>());
        fn.S = closure_YR(je.at("S").get<std::string>());
        fn.L = closure_Yi(je.at("L").get<std::string>());
        fn.M = closure_Yi(je.at("M").get<std::string>());
        if (je.contains("Q")) {
            fn.Qeff = closure_YR(je.at("Q").get<std::string>());
        } else if (je.contains("K") && je.contains("Lab") && je.contains("T") &&
                   je.contains("Q_outer")) {
            // Full production composite. The outer map is an expression in
            // placeholder variables x = capital, y = labour, i = technical
            // progress.
            auto cap = closure_YR(je.at("K").get<std::string>());
            auto lab = closure_YR(je.at("Lab").get<std::string>());
            auto tech = closure_YR(je.at("T").get<std::string>());
            auto outer_ast = std::make_shared<ExprAst>(
                parse_expr(je.at("Q_outer").get<std::string>(), {"x", "y", "i"}));
            auto outer = [outer_ast](double k, double l, double t) {
                return eval_expr(**outer_ast, {{"x", k}, {"y", l}, {"i", t}});
            };
            fn.has_composite = true;
            fn.cap = cap;
            fn.lab = lab;
            fn.tech = tech;
            fn.Q_outer = outer;
            fn.Qeff = [cap, lab, tech, outer](double Y, double R) {
                return outer(cap(Y, R), lab(Y, R), tech(Y, R));
            };
        } else {
            throw Error(ErrorCode::InvalidArgument,
                        "expressions model needs Q or the full composite K/Lab/T/Q_outer");
        }
        mf.funcs = std::move(fn);
        return mf;
    }

    std::string builtin = j.value("builtin", "linear_reference");
    if (builtin != "linear_reference")
        throw Error(ErrorCode::InvalidArgument, "unknown builtin model '" + builtin + "'");
    mf.funcs = EconFunctions::linear(mf.params);
    return mf;
}

ModelFile load_model_file(const std::string& path) { return load_model_json(read_file(path)); }

} // namespace eeb
