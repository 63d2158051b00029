#ifndef EEB_MACRO_HPP
#define EEB_MACRO_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "eeb/branching.hpp"
#include "eeb/equilibria.hpp"
#include "eeb/field.hpp"

namespace eeb {

// Coefficients of the reference linear parameterization plus the model
// constants. The linear economic functions are
//   I = e_I + i_Y*Y + i_R*R        S = e_S + s_Y*Y + s_R*R
//   L = l_Y*Y + l_R*i              M = m_Y*Y + m_R*i     (i = R - MP + pi_e)
//   Qeff = q_0 + q_Y*Y + q_R*R
struct EconParams {
    double e_I = 20.0, i_Y = 0.3, i_R = -4.0;
    double e_S = 2.0, s_Y = 0.5, s_R = 3.0;
    double l_Y = 0.6, l_R = -5.0;
    double m_Y = 0.2, m_R = 2.0;
    double q_0 = 30.0, q_Y = 0.5, q_R = -6.0;
    double M_CB = 10.0; // central-bank money stock, > 0
    double MP = 0.02;   // maturity premium, > 0
    double pi_e = 0.03; // expected inflation rate, > 0
    double alpha_d = 1.0, beta_d = 1.0; // demand-side dynamics, > 0
    double alpha_s = 1.0, beta_s = 1.0; // supply-side dynamics, > 0

    void validate() const; // throws InvalidArgument on non-positive constants
    double nominal_rate(double R) const { return R - MP + pi_e; }
};

// The model's economic functions. L and M take the short-term nominal rate
// i = R - MP + pi_e directly. When the full production composite is
// supplied, factor functions and the outer production map are kept so the
// factor-wise sign conditions can be checked.
struct EconFunctions {
    std::function<double(double, double)> I;    // (Y, R)
    std::function<double(double, double)> S;    // (Y, R)
    std::function<double(double, double)> L;    // (Y, i)
    std::function<double(double, double)> M;    // (Y, i)
    std::function<double(double, double)> Qeff; // (Y, R)

    bool has_composite = false;
    std::function<double(double, double)> cap;   // capital(Y, R)
    std::function<double(double, double)> lab;   // labour(Y, R)
    std::function<double(double, double)> tech;  // technical progress(Y, R)
    std::function<double(double, double, double)> Q_outer; // Q(cap, lab, tech)

    bool linear_reference = false; // analytic Jacobians available
    EconParams params;             // meaningful when linear_reference

    static EconFunctions linear(const EconParams& p);
};

struct PropertyCondition {
    std::string id;       // e.g. "I_Y<S_Y"
    double pass_fraction; // fraction of grid points satisfying it
    Point2 worst;         // grid point with the worst margin
    double worst_margin;  // negative when violated
    bool pass;            // pass_fraction == 1
};

struct PropertyReport {
    std::vector<PropertyCondition> conditions;
    bool pass = false;
    std::vector<std::string> failed_ids() const;
    std::string to_json() const;
};

struct MacroOpts {
    Rect domain{1.0, -5.0, 100.0, 10.0};
    int grid_n = 50;
    double fd_step = 1e-6;
    double y_limit = 1e-3; // Y value standing in for the Y -> 0+ limits
};

PlanarField islm_field(const EconFunctions& funcs, const EconParams& params,
                       Rect domain = {1.0, -5.0, 100.0, 10.0});
PlanarField qyml_field(const EconFunctions& funcs, const EconParams& params,
                       Rect domain = {1.0, -5.0, 100.0, 10.0});

// Evaluates every sign, slope, and intersection condition on the grid;
// partials by central differences; the Y -> 0+ limits at the smallest grid Y.
PropertyReport validate_properties(const EconFunctions& funcs, const EconParams& params,
                                   const MacroOpts& opts = {});

// Assembles the two-branch inclusion with f = IS-LM and g = QY-ML.
// Requires a passing property report unless force is set (the caller is
// then expected to record the violation). Throws BranchingViolated when
// the branch gap vanishes on the validation grid.
EulerBranching build_islm_qyml(const EconFunctions& funcs, const EconParams& params,
                               const MacroOpts& opts = {}, bool force = false,
                               PropertyReport* report_out = nullptr);

enum class CyclePhaseKind { Recession, Expansion };

struct CyclePhase {
    CyclePhaseKind phase;
    double duration; // > 0
};

using CyclePhases = std::vector<CyclePhase>;

// Recession runs the IS-LM branch (F), expansion the QY-ML branch (G);
// troughs and peaks are the switch instants, i.e. cumulative durations.
SwitchingSchedule cycle_schedule(const CyclePhases& phases,
                                 CyclePhaseKind start_phase = CyclePhaseKind::Recession);

CyclePhases parse_cycle_spec(const std::string& spec); // "R:2,E:3,R:2"

struct PropositionReport {
    SingularPoint islm;
    SingularPoint qyml;
    bool islm_stable = false;      // both Re(lambda) < 0
    bool islm_is_node = false;     // discriminant > 0
    bool qyml_saddle = false;      // det J < 0
    double islm_det = 0.0, islm_trace = 0.0, islm_discriminant = 0.0;
    double qyml_det = 0.0;
    bool pass = false;
    std::string to_json() const;
};

// Verifies the two stability statements at the located equilibria:
// the demand-side point is a stable node or focus, the supply-side point
// an unstable saddle.
PropositionReport verify_propositions(const EconFunctions& funcs, const EconParams& params,
                                      const MacroOpts& opts = {});

// Model file loading (JSON): {"builtin": "linear_reference", <coefficient
// overrides>} or {"expressions": {"I": ..., "S": ..., "L": ..., "M": ...,
// "Q": ...}, <constants>}. Raw two-branch models use {"fields": {"fx": ...,
// "fy": ..., "gx": ..., "gy": ...}}.
struct ModelFile {
    bool is_macro = true;
    EconFunctions funcs;
    EconParams params;
    std::optional<EulerBranching> raw; // fields variant
    Rect domain{1.0, -5.0, 100.0, 10.0};
    bool force = false;
};

ModelFile load_model_file(const std::string& path);
ModelFile load_model_json(const std::string& text);

} // namespace eeb

#endif
