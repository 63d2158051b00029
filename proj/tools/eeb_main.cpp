// Command-line front end: classify | validate | certify | simulate |
// portrait | demo islm. Reports go to stdout (JSON with --json), artifacts
// to --out; failures exit 1 with a machine-readable reason on stderr.

#include <cstdio>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "eeb/branching.hpp"
#include "eeb/chaos.hpp"
#include "eeb/equilibria.hpp"
#include "eeb/errors.hpp"
#include "eeb/macro.hpp"
#include "eeb/svg.hpp"

namespace {

using namespace eeb;

struct GlobalArgs {
    std::string model_path;
    std::string region_spec;
    std::string out_path;
    double rtol = 1e-9;
    bool json = false;
};

Rect parse_region(const std::string& spec) {
    Rect r;
    if (std::sscanf(spec.c_str(), "%lf,%lf,%lf,%lf", &r.x0, &r.y0, &r.x1, &r.y1) != 4)
        throw Error(ErrorCode::InvalidArgument, "--region expects x0,y0,x1,y1");
    if (!(r.x1 > r.x0) || !(r.y1 > r.y0))
        throw Error(ErrorCode::InvalidArgument, "--region is degenerate");
    return r;
}

struct LoadedModel {
    ModelFile file;
    EulerBranching eb;
    PropertyReport properties;
};

LoadedModel load_model(const GlobalArgs& g, bool force_build) {
    if (g.model_path.empty())
        throw Error(ErrorCode::InvalidArgument, "--model <path> is required");
    LoadedModel lm;
    lm.file = load_model_file(g.model_path);
    if (!g.region_spec.empty()) lm.file.domain = parse_region(g.region_spec);
    if (lm.file.is_macro) {
        MacroOpts mo;
        mo.domain = lm.file.domain;
        lm.eb = build_islm_qyml(lm.file.funcs, lm.file.params, mo,
                                force_build || lm.file.force, &lm.properties);
    } else {
        lm.eb = *lm.file.raw;
        lm.eb.domain = lm.file.domain;
        lm.eb.f.domain = lm.file.domain;
        lm.eb.g.domain = lm.file.domain;
        BranchingReport br = validate_branching(lm.eb);
        if (!br.pass) throw Error(ErrorCode::BranchingViolated, "branch gap vanishes on grid");
    }
    return lm;
}

void emit(const GlobalArgs& g, const std::string& text) {
    if (!g.out_path.empty()) write_file_atomic(g.out_path, text);
    else std::cout << text << std::endl;
}

nlohmann::json singular_point_json(const SingularPoint& sp) {
    nlohmann::json s;
    s["location"] = {sp.location.x, sp.location.y};
    s["kind"] = kind_name(sp.kind);
    s["eigenvalues"] = {{sp.eig.lambda1.real(), sp.eig.lambda1.imag()},
                        {sp.eig.lambda2.real(), sp.eig.lambda2.imag()}};
    s["residual"] = sp.residual;
    return s;
}

int cmd_classify(const GlobalArgs& g) {
    LoadedModel lm = load_model(g, true);
    nlohmann::json out;
    for (const PlanarField* fld : {&lm.eb.f, &lm.eb.g}) {
        auto search = find_singular_points(*fld, lm.eb.domain, 48, 1e-10);
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& sp : search.points) arr.push_back(singular_point_json(sp));
        out[fld->name] = {{"singular_points", arr}, {"dropped_seeds", search.dropped}};
    }
    emit(g, out.dump(2));
    return 0;
}

int cmd_validate(const GlobalArgs& g) {
    if (g.model_path.empty())
        throw Error(ErrorCode::InvalidArgument, "--model <path> is required");
    ModelFile mf = load_model_file(g.model_path);
    if (!mf.is_macro)
        throw Error(ErrorCode::InvalidArgument, "validate applies to macro model files");
    if (!g.region_spec.empty()) mf.domain = parse_region(g.region_spec);
    MacroOpts mo;
    mo.domain = mf.domain;
    PropertyReport rep = validate_properties(mf.funcs, mf.params, mo);
    emit(g, rep.to_json());
    if (!rep.pass) {
        nlohmann::json err;
        err["error"] = "PropertiesViolated";
        err["failed"] = rep.failed_ids();
        std::cerr << err.dump() << std::endl;
        return 1;
    }
    return 0;
}

int cmd_certify(const GlobalArgs& g, const std::string& seeds_spec) {
    LoadedModel lm = load_model(g, true);
    CertifyOpts co;
    if (!seeds_spec.empty()) {
        double px, py, fx, fy;
        if (std::sscanf(seeds_spec.c_str(), "%lf,%lf,%lf,%lf", &px, &py, &fx, &fy) != 4)
            throw Error(ErrorCode::InvalidArgument, "--seeds expects psix,psiy,phix,phiy");
        co.psi_seed = Point2{px, py};
        co.phi_seed = Point2{fx, fy};
    }
    ChaosCertificate cert;
    try {
        PairConfiguration cfg = detect_configuration(lm.eb, lm.eb.domain, co.detect);
        cert = certify(lm.eb, cfg, co);
    } catch (const Error& e) {
        cert.certified = false;
        cert.refusals.push_back(std::string(error_code_name(e.code())) + ": " + e.what());
    }
    if (lm.file.is_macro && !lm.properties.pass)
        cert.refusals.push_back("PropertiesViolated (forced build): model violates economic "
                                "sign conditions");
    emit(g, cert.to_json());
    if (!cert.certified || !cert.devaney) {
        nlohmann::json err;
        err["error"] = cert.refusals.empty() ? "Refused" : cert.refusals.front();
        std::cerr << err.dump() << std::endl;
        return 1;
    }
    return 0;
}

int cmd_simulate(const GlobalArgs& g, const std::string& schedule_path,
                 const std::string& cycle_spec, const std::string& x0_spec, double horizon) {
    LoadedModel lm = load_model(g, true);
    SwitchingSchedule sched;
    if (!schedule_path.empty()) {
        std::ifstream in(schedule_path);
        if (!in) throw Error(ErrorCode::Io, "cannot open " + schedule_path);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        sched = SwitchingSchedule::from_json(text);
    } else if (!cycle_spec.empty()) {
        CyclePhases phases = parse_cycle_spec(cycle_spec);
        sched = cycle_schedule(phases, phases.front().phase);
    }
    Point2 x0;
    if (std::sscanf(x0_spec.c_str(), "%lf,%lf", &x0.x, &x0.y) != 2)
        throw Error(ErrorCode::InvalidArgument, "--x0 expects x,y");
    IntegrateOpts io;
    io.rtol = g.rtol;
    SwitchedSolution sol = solve_switched(lm.eb, x0, sched, horizon, io);
    // The short-term nominal rate i = R - MP + pi_e should stay positive;
    // a non-positive value along the run is a warning, not an error.
    if (lm.file.is_macro) {
        double min_i = std::numeric_limits<double>::infinity();
        for (const auto& arc : sol.arcs)
            for (const auto& s : arc.samples)
                min_i = std::min(min_i, lm.file.params.nominal_rate(s.p.y));
        if (min_i <= 0.0) {
            nlohmann::json warn;
            warn["warning"] = "NominalRateNonPositive";
            warn["min_nominal_rate"] = min_i;
            std::cerr << warn.dump() << std::endl;
        }
    }
    emit(g, g.json ? sol.to_json() : sol.to_csv());
    return 0;
}

std::vector<ZeroCurve> macro_curves(const LoadedModel& lm) {
    std::vector<ZeroCurve> curves;
    if (!lm.file.is_macro) return curves;
    EconFunctions fn = lm.file.funcs;
    EconParams p = lm.file.params;
    curves.push_back({"IS", [fn](Point2 q) { return fn.I(q.x, q.y) - fn.S(q.x, q.y); }});
    curves.push_back({"LM", [fn, p](Point2 q) {
                          double i = p.nominal_rate(q.y);
                          return fn.L(q.x, i) - fn.M(q.x, i) - p.M_CB;
                      }});
    curves.push_back({"QY", [fn](Point2 q) { return fn.Qeff(q.x, q.y) - q.x; }});
    curves.push_back({"ML", [fn, p](Point2 q) {
                          double i = p.nominal_rate(q.y);
                          return fn.M(q.x, i) + p.M_CB - fn.L(q.x, i);
                      }});
    return curves;
}

int cmd_portrait(const GlobalArgs& g, const std::string& cert_path) {
    LoadedModel lm = load_model(g, true);
    std::vector<Point2> equilibria;
    for (const PlanarField* fld : {&lm.eb.f, &lm.eb.g}) {
        auto search = find_singular_points(*fld, lm.eb.domain, 48, 1e-10);
        for (const auto& sp : search.points) equilibria.push_back(sp.location);
    }
    std::optional<ChaoticSetGeometry> shade;
    if (!cert_path.empty()) {
        std::ifstream in(cert_path);
        if (!in) throw Error(ErrorCode::Io, "cannot open " + cert_path);
        nlohmann::json j = nlohmann::json::parse(in);
        if (!j.at("geometry").is_null()) {
            ChaoticSetGeometry geo;
            auto jg = j.at("geometry");
            if (jg.at("variant") == "region") {
                geo.variant = GeometryVariant::Region;
                LoopRegion lr;
                for (const auto& p : jg.at("boundary_points"))
                    lr.polygon.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
                geo.region = std::move(lr);
            } else {
                geo.variant = GeometryVariant::Arc;
                for (const auto& p : jg.at("arc_points"))
                    geo.arc_points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
            }
            shade = std::move(geo);
        }
    }
    std::string svg = render_portrait(lm.eb, macro_curves(lm), equilibria, shade);
    emit(g, svg);
    return 0;
}

int cmd_demo_islm(const GlobalArgs& g) {
    // Reference model end to end: properties, propositions, certification,
    // portrait.
    GlobalArgs gg = g;
    EconParams params;
    EconFunctions funcs = EconFunctions::linear(params);
    MacroOpts mo;
    if (!g.region_spec.empty()) mo.domain = parse_region(g.region_spec);

    PropertyReport props = validate_properties(funcs, params, mo);
    PropositionReport prop = verify_propositions(funcs, params, mo);
    PropertyReport build_rep;
    EulerBranching eb = build_islm_qyml(funcs, params, mo, false, &build_rep);

    CertifyOpts co;
    PairConfiguration cfg = detect_configuration(eb, mo.domain, co.detect);
    ChaosCertificate cert = certify(eb, cfg, co);

    nlohmann::json out;
    out["properties"] = nlohmann::json::parse(props.to_json());
    out["propositions"] = nlohmann::json::parse(prop.to_json());
    out["certificate"] = nlohmann::json::parse(cert.to_json());

    std::string dir = g.out_path.empty() ? std::string("islm_demo") : g.out_path;
    write_file_atomic(dir + "/certificate.json", cert.to_json());
    LoadedModel lm;
    lm.file.is_macro = true;
    lm.file.funcs = funcs;
    lm.file.params = params;
    lm.eb = eb;
    std::string svg = render_portrait(eb, macro_curves(lm),
                                      {prop.islm.location, prop.qyml.location}, cert.geometry);
    write_file_atomic(dir + "/portrait.svg", svg);
    out["artifacts"] = {dir + "/certificate.json", dir + "/portrait.svg"};
    std::cout << out.dump(2) << std::endl;

    if (!cert.certified) {
        std::cerr << R"({"error":"Refused"})" << std::endl;
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Planar Euler-equation-branching laboratory"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalArgs g;
    app.add_option("--model", g.model_path, "model file (JSON)");
    app.add_option("--region", g.region_spec, "domain rectangle x0,y0,x1,y1");
    app.add_option("--out", g.out_path, "output path");
    app.add_option("--rtol", g.rtol, "integrator relative tolerance");
    app.add_flag("--json", g.json, "JSON report to stdout");

    auto* classify_cmd = app.add_subcommand("classify", "locate and classify singular points");
    auto* validate_cmd = app.add_subcommand("validate", "check economic sign conditions");
    auto* certify_cmd = app.add_subcommand("certify", "certify chaos for the model");
    std::string seeds_spec;
    certify_cmd->add_option("--seeds", seeds_spec, "loop seeds psix,psiy,phix,phiy");
    auto* simulate_cmd = app.add_subcommand("simulate", "run a switched solution");
    std::string schedule_path, cycle_spec, x0_spec = "0,0";
    double horizon = 10.0;
    simulate_cmd->add_option("--schedule", schedule_path, "schedule file (JSON)");
    simulate_cmd->add_option("--cycle", cycle_spec, "cycle phases, e.g. R:2,E:3,R:2");
    simulate_cmd->add_option("--x0", x0_spec, "initial point x,y");
    simulate_cmd->add_option("--t", horizon, "horizon");
    auto* portrait_cmd = app.add_subcommand("portrait", "render an SVG phase portrait");
    std::string cert_path;
    portrait_cmd->add_option("--cert", cert_path, "certificate JSON for chaotic-set shading");
    auto* demo_cmd = app.add_subcommand("demo", "built-in demonstrations");
    std::string demo_name;
    demo_cmd->add_option("name", demo_name, "demo name (islm)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (classify_cmd->parsed()) return cmd_classify(g);
        if (validate_cmd->parsed()) return cmd_validate(g);
        if (certify_cmd->parsed()) return cmd_certify(g, seeds_spec);
        if (simulate_cmd->parsed())
            return cmd_simulate(g, schedule_path, cycle_spec, x0_spec, horizon);
        if (portrait_cmd->parsed()) return cmd_portrait(g, cert_path);
        if (demo_cmd->parsed()) {
            if (demo_name != "islm") {
                std::cerr << R"({"error":"UnknownDemo"})" << std::endl;
                return 1;
            }
            return cmd_demo_islm(g);
        }
    } catch (const eeb::Error& e) {
        nlohmann::json err;
        err["error"] = eeb::error_code_name(e.code());
        err["message"] = e.what();
        std::cerr << err.dump() << std::endl;
        return 1;
    } catch (const std::exception& e) {
        std::cerr << R"({"error":"Internal","message":")" << e.what() << "\"}" << std::endl;
        return 1;
    }
    return 0;
}
