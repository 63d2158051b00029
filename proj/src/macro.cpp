#include "eeb/macro.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "eeb/errors.hpp"

namespace eeb {

void EconParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0))
            throw Error(ErrorCode::InvalidArgument, std::string(name) + " must be positive");
    };
    positive(M_CB, "M_CB");
    positive(MP, "MP");
    positive(pi_e, "pi_e");
    positive(alpha_d, "alpha_d");
    positive(beta_d, "beta_d");
    positive(alpha_s, "alpha_s");
    positive(beta_s, "beta_s");
}

EconFunctions EconFunctions::linear(const EconParams& p) {
    EconFunctions fn;
    fn.I = [p](double Y, double R) { return p.e_I + p.i_Y * Y + p.i_R * R; };
    fn.S = [p](double Y, double R) { return p.e_S + p.s_Y * Y + p.s_R * R; };
    fn.L = [p](double Y, double i) { return p.l_Y * Y + p.l_R * i; };
    fn.M = [p](double Y, double i) { return p.m_Y * Y + p.m_R * i; };
    fn.Qeff = [p](double Y, double R) { return p.q_0 + p.q_Y * Y + p.q_R * R; };
    fn.linear_reference = true;
    fn.params = p;
    return fn;
}

PlanarField islm_field(const EconFunctions& funcs, const EconParams& params, Rect domain) {
    params.validate();
    PlanarField f;
    f.name = "islm";
    f.domain = domain;
    f.eval = [funcs, params](Point2 p) -> Vec2 {
        double Y = p.x, R = p.y;
        double i = params.nominal_rate(R);
        double dY = params.alpha_d * (funcs.I(Y, R) - funcs.S(Y, R));
        double dR = params.beta_d * (funcs.L(Y, i) - funcs.M(Y, i) - params.M_CB);
        return {dY, dR};
    };
    if (funcs.linear_reference) {
        EconParams p = funcs.params;
        Matrix2 j{p.alpha_d * (p.i_Y - p.s_Y), p.alpha_d * (p.i_R - p.s_R),
                  p.beta_d * (p.l_Y - p.m_Y), p.beta_d * (p.l_R - p.m_R)};
        f.analytic_jacobian = [j](Point2) { return j; };
    }
    return f;
}

PlanarField qyml_field(const EconFunctions& funcs, const EconParams& params, Rect domain) {
    params.validate();
    PlanarField g;
    g.name = "qyml";
    g.domain = domain;
    g.eval = [funcs, params](Point2 p) -> Vec2 {
        double Y = p.x, R = p.y;
        double i = params.nominal_rate(R);
        double dY = params.alpha_s * (funcs.Qeff(Y, R) - Y);
        double dR = params.beta_s * (funcs.M(Y, i) + params.M_CB - funcs.L(Y, i));
        return {dY, dR};
    };
    if (funcs.linear_reference) {
        EconParams p = funcs.params;
        Matrix2 j{p.alpha_s * (p.q_Y - 1.0), p.alpha_s * p.q_R,
                  p.beta_s * (p.m_Y - p.l_Y), p.beta_s * (p.m_R - p.l_R)};
        g.analytic_jacobian = [j](Point2) { return j; };
    }
    return g;
}

// ---------------------------------------------------------------------------
// Property validation
// ---------------------------------------------------------------------------

namespace {

struct Partials {
    double dY, dR;
};

Partials central_diff(const std::function<double(double, double)>& fn, double Y, double R,
                      double h) {
    return {(fn(Y + h, R) - fn(Y - h, R)) / (2.0 * h), (fn(Y, R + h) - fn(Y, R - h)) / (2.0 * h)};
}

// Solve curve(Y, R) = 0 for R at fixed Y by bisection over the R range,
// falling back to the sample closest to zero.
double solve_curve_for_R(const std::function<double(double, double)>& curve, double Y, double r_lo,
                         double r_hi) {
    const int n = 400;
    double prev_r = r_lo, prev_v = curve(Y, prev_r);
    double best_r = prev_r, best_v = std::abs(prev_v);
    for (int k = 1; k <= n; ++k) {
        double r = r_lo + (r_hi - r_lo) * k / n;
        double v = curve(Y, r);
        if (std::abs(v) < best_v) {
            best_v = std::abs(v);
            best_r = r;
        }
        if ((prev_v < 0.0) != (v < 0.0)) {
            double lo = prev_r, hi = r, vlo = prev_v;
            for (int it = 0; it < 80; ++it) {
                double mid = 0.5 * (lo + hi);
                double vm = curve(Y, mid);
                if ((vlo < 0.0) == (vm < 0.0)) {
                    lo = mid;
                    vlo = vm;
                } else {
                    hi = mid;
                }
            }
            return 0.5 * (lo + hi);
        }
        prev_r = r;
        prev_v = v;
    }
    return best_r;
}

} // namespace

std::vector<std::string> PropertyReport::failed_ids() const {
    std::vector<std::string> out;
    for (const auto& c : conditions)
        if (!c.pass) out.push_back(c.id);
    return out;
}

std::string PropertyReport::to_json() const {
    nlohmann::json j;
    j["pass"] = pass;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : conditions) {
        nlohmann::json e;
        e["id"] = c.id;
        e["pass"] = c.pass;
        e["pass_fraction"] = c.pass_fraction;
        e["worst_point"] = {c.worst.x, c.worst.y};
        e["worst_margin"] = c.worst_margin;
        arr.push_back(e);
    }
    j["conditions"] = arr;
    return j.dump(2);
}

PropertyReport validate_properties(const EconFunctions& funcs, const EconParams& params,
                                   const MacroOpts& opts) {
    params.validate();
    PropertyReport rep;
    const int n = opts.grid_n;
    const double h = opts.fd_step;

    struct Row {
        std::string id;
        std::function<double(double, double)> margin; // >= 0 iff satisfied, at (Y, R)
    };
    std::vector<Row> rows;

    auto I = funcs.I, S = funcs.S, L = funcs.L, M = funcs.M, Q = funcs.Qeff;
    auto iofR = [params](double R) { return params.nominal_rate(R); };

    rows.push_back({"0<I_Y<1", [=](double Y, double R) {
                        double p = central_diff(I, Y, R, h).dY;
                        return std::min(p, 1.0 - p);
                    }});
    rows.push_back({"I_R<0", [=](double Y, double R) { return -central_diff(I, Y, R, h).dR; }});
    rows.push_back({"0<S_Y<1", [=](double Y, double R) {
                        double p = central_diff(S, Y, R, h).dY;
                        return std::min(p, 1.0 - p);
                    }});
    rows.push_back({"S_R>0", [=](double Y, double R) { return central_diff(S, Y, R, h).dR; }});
    rows.push_back({"L_Y>0", [=](double Y, double R) {
                        return central_diff(L, Y, iofR(R), h).dY;
                    }});
    rows.push_back({"L_R<0", [=](double Y, double R) {
                        return -central_diff(L, Y, iofR(R), h).dR;
                    }});
    rows.push_back({"0<M_Y<L_Y", [=](double Y, double R) {
                        double my = central_diff(M, Y, iofR(R), h).dY;
                        double ly = central_diff(L, Y, iofR(R), h).dY;
                        return std::min(my, ly - my);
                    }});
    rows.push_back({"M_R>0", [=](double Y, double R) {
                        return central_diff(M, Y, iofR(R), h).dR;
                    }});
    rows.push_back({"I_Y<S_Y", [=](double Y, double R) {
                        return central_diff(S, Y, R, h).dY - central_diff(I, Y, R, h).dY;
                    }});
    rows.push_back({"Q_Y<1", [=](double Y, double R) {
                        return 1.0 - central_diff(Q, Y, R, h).dY;
                    }});
    rows.push_back({"Q_R<0", [=](double Y, double R) { return -central_diff(Q, Y, R, h).dR; }});

    if (funcs.has_composite) {
        auto cap = funcs.cap, lab = funcs.lab, tech = funcs.tech;
        auto outer = funcs.Q_outer;
        auto outer_partials = [=](double Y, double R) {
            double k = cap(Y, R), l = lab(Y, R), t = tech(Y, R);
            double qk = (outer(k + h, l, t) - outer(k - h, l, t)) / (2.0 * h);
            double ql = (outer(k, l + h, t) - outer(k, l - h, t)) / (2.0 * h);
            double qt = (outer(k, l, t + h) - outer(k, l, t - h)) / (2.0 * h);
            return std::array<double, 3>{qk, ql, qt};
        };
        rows.push_back({"Q_K>0", [=](double Y, double R) { return outer_partials(Y, R)[0]; }});
        rows.push_back({"Q_L>0", [=](double Y, double R) { return outer_partials(Y, R)[1]; }});
        rows.push_back({"Q_T>0", [=](double Y, double R) { return outer_partials(Y, R)[2]; }});
        rows.push_back({"K_Y>0", [=](double Y, double R) { return central_diff(cap, Y, R, h).dY; }});
        rows.push_back({"L_Y_factor>0", [=](double Y, double R) { return central_diff(lab, Y, R, h).dY; }});
        rows.push_back({"T_Y>0", [=](double Y, double R) { return central_diff(tech, Y, R, h).dY; }});
        rows.push_back({"K_R<0", [=](double Y, double R) { return -central_diff(cap, Y, R, h).dR; }});
        rows.push_back({"L_R_factor<0", [=](double Y, double R) { return -central_diff(lab, Y, R, h).dR; }});
        rows.push_back({"T_R<0", [=](double Y, double R) { return -central_diff(tech, Y, R, h).dR; }});
    }

    const Rect dom = opts.domain;
    for (const auto& row : rows) {
        PropertyCondition cond;
        cond.id = row.id;
        int passed = 0, total = 0;
        cond.worst_margin = std::numeric_limits<double>::infinity();
        for (int j = 0; j <= n; ++j) {
            for (int i = 0; i <= n; ++i) {
                double Y = dom.x0 + dom.width() * i / n;
                double R = dom.y0 + dom.height() * j / n;
                if (Y <= 0.0) continue;
                double mgn = row.margin(Y, R);
                ++total;
                if (mgn > 0.0) ++passed;
                if (mgn < cond.worst_margin) {
                    cond.worst_margin = mgn;
                    cond.worst = {Y, R};
                }
            }
        }
        cond.pass_fraction = total > 0 ? static_cast<double>(passed) / total : 0.0;
        cond.pass = passed == total;
        rep.conditions.push_back(cond);
    }

    // Intersection conditions: limits as Y -> 0+ taken at the smallest grid Y.
    const double y0 = opts.y_limit;
    auto is_curve = [&](double Y, double R) { return I(Y, R) - S(Y, R); };
    auto lm_curve = [&](double Y, double R) {
        return L(Y, iofR(R)) - M(Y, iofR(R)) - params.M_CB;
    };
    auto qy_curve = [&](double Y, double R) { return Q(Y, R) - Y; };
    double r_span = dom.height();
    double r_lo = dom.y0 - 2.0 * r_span, r_hi = dom.y1 + 2.0 * r_span;
    double R_IS = solve_curve_for_R(is_curve, y0, r_lo, r_hi);
    double R_LM = solve_curve_for_R(lm_curve, y0, r_lo, r_hi);
    double R_QY = solve_curve_for_R(qy_curve, y0, r_lo, r_hi);

    PropertyCondition c1;
    c1.id = "R_IS(0+)>R_LM(0+)";
    c1.worst = {y0, R_IS};
    c1.worst_margin = R_IS - R_LM;
    c1.pass = c1.worst_margin > 0.0;
    c1.pass_fraction = c1.pass ? 1.0 : 0.0;
    rep.conditions.push_back(c1);

    PropertyCondition c2;
    c2.id = "R_QY(0+)>R_ML(0+)";
    c2.worst = {y0, R_QY};
    c2.worst_margin = R_QY - R_LM; // ML and LM share the same zero set
    c2.pass = c2.worst_margin > 0.0;
    c2.pass_fraction = c2.pass ? 1.0 : 0.0;
    rep.conditions.push_back(c2);

    rep.pass = true;
    for (const auto& c : rep.conditions)
        if (!c.pass) rep.pass = false;
    return rep;
}

EulerBranching build_islm_qyml(const EconFunctions& funcs, const EconParams& params,
                               const MacroOpts& opts, bool force, PropertyReport* report_out) {
    PropertyReport rep = validate_properties(funcs, params, opts);
    if (report_out) *report_out = rep;
    if (!rep.pass && !force) {
        std::string failed;
        for (const auto& id : rep.failed_ids()) failed += (failed.empty() ? "" : ", ") + id;
        throw Error(ErrorCode::InvalidArgument,
                    "economic property validation failed: " + failed);
    }

    EulerBranching eb;
    eb.domain = opts.domain;
    eb.f = islm_field(funcs, params, opts.domain);
    eb.g = qyml_field(funcs, params, opts.domain);
    eb.branching_check_n = 200;

    BranchingReport br = validate_branching(eb);
    if (!br.pass)
        throw Error(ErrorCode::BranchingViolated,
                    "branch gap vanishes at (" + std::to_string(br.argmin.x) + ", " +
                        std::to_string(br.argmin.y) + ")");
    return eb;
}

SwitchingSchedule cycle_schedule(const CyclePhases& phases, CyclePhaseKind start_phase) {
    if (phases.empty()) throw Error(ErrorCode::InvalidArgument, "cycle needs at least one phase");
    if (phases.front().phase != start_phase)
        throw Error(ErrorCode::InvalidArgument, "first phase does not match start_phase");
    CyclePhaseKind expect = start_phase;
    for (const auto& ph : phases) {
        if (!(ph.duration > 0.0))
            throw Error(ErrorCode::InvalidArgument, "phase durations must be positive");
        if (ph.phase != expect)
            throw Error(ErrorCode::InvalidArgument, "phases must alternate");
        expect = expect == CyclePhaseKind::Recession ? CyclePhaseKind::Expansion
                                                     : CyclePhaseKind::Recession;
    }

    SwitchingSchedule s;
    // Recession runs the demand branch (IS-LM = F), expansion the supply
    // branch (QY-ML = G); the trough/peak instants are the switches.
    s.start = start_phase == CyclePhaseKind::Recession ? Branch::F : Branch::G;
    double t = 0.0;
    for (size_t k = 0; k + 1 < phases.size(); ++k) {
        t += phases[k].duration;
        s.times.push_back(t);
    }
    return s;
}

CyclePhases parse_cycle_spec(const std::string& spec) {
    CyclePhases phases;
    size_t pos = 0;
    while (pos < spec.size()) {
        size_t comma = spec.find(',', pos);
        std::string item = spec.substr(pos, comma == std::string::npos ? std::string::npos
                                                                        : comma - pos);
        size_t colon = item.find(':');
        if (colon == std::string::npos || colon == 0)
            throw Error(ErrorCode::InvalidArgument, "cycle item must look like R:2 or E:3");
        char c = item[0];
        CyclePhaseKind kind;
        if (c == 'R' || c == 'r') kind = CyclePhaseKind::Recession;
        else if (c == 'E' || c == 'e') kind = CyclePhaseKind::Expansion;
        else throw Error(ErrorCode::InvalidArgument, "cycle phase must be R or E");
        double dur = std::strtod(item.c_str() + colon + 1, nullptr);
        phases.push_back({kind, dur});
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return phases;
}

std::string PropositionReport::to_json() const {
    nlohmann::json j;
    j["islm"] = {{"location", {islm.location.x, islm.location.y}},
                 {"kind", kind_name(islm.kind)},
                 {"eigenvalues", {{islm.eig.lambda1.real(), islm.eig.lambda1.imag()},
                                  {islm.eig.lambda2.real(), islm.eig.lambda2.imag()}}},
                 {"det", islm_det},
                 {"trace", islm_trace},
                 {"discriminant", islm_discriminant},
                 {"stable", islm_stable},
                 {"node", islm_is_node}};
    j["qyml"] = {{"location", {qyml.location.x, qyml.location.y}},
                 {"kind", kind_name(qyml.kind)},
                 {"eigenvalues", {{qyml.eig.lambda1.real(), qyml.eig.lambda1.imag()},
                                  {qyml.eig.lambda2.real(), qyml.eig.lambda2.imag()}}},
                 {"det", qyml_det},
                 {"saddle", qyml_saddle}};
    j["pass"] = pass;
    return j.dump(2);
}

PropositionReport verify_propositions(const EconFunctions& funcs, const EconParams& params,
                                      const MacroOpts& opts) {
    PlanarField f = islm_field(funcs, params, opts.domain);
    PlanarField g = qyml_field(funcs, params, opts.domain);

    auto locate = [&](const PlanarField& field) {
        auto search = find_singular_points(field, opts.domain, 48, 1e-10);
        if (search.points.size() != 1)
            throw Error(search.points.empty() ? ErrorCode::NoEquilibrium
                                              : ErrorCode::MultipleEquilibria,
                        "branch " + field.name + ": expected a unique equilibrium, found " +
                            std::to_string(search.points.size()));
        return search.points[0];
    };

    PropositionReport rep;
    rep.islm = locate(f);
    rep.qyml = locate(g);

    rep.islm_det = rep.islm.jac.det();
    rep.islm_trace = rep.islm.jac.trace();
    rep.islm_discriminant = rep.islm_trace * rep.islm_trace - 4.0 * rep.islm_det;
    rep.islm_stable =
        rep.islm.eig.lambda1.real() < 0.0 && rep.islm.eig.lambda2.real() < 0.0;
    rep.islm_is_node = rep.islm_discriminant > 0.0;
    rep.qyml_det = rep.qyml.jac.det();
    rep.qyml_saddle = rep.qyml_det < 0.0;
    rep.pass = rep.islm_stable && rep.qyml_saddle;
    return rep;
}

} // namespace eeb
