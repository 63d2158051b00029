#ifndef EEB_BRANCHING_HPP
#define EEB_BRANCHING_HPP

#include <string>
#include <vector>

#include "eeb/field.hpp"
#include "eeb/integrate.hpp"

namespace eeb {

// The two-branch differential inclusion xdot in {f(x), g(x)}.
struct EulerBranching {
    PlanarField f;
    PlanarField g;
    Rect domain;
    int branching_check_n = 64; // validation grid resolution

    const PlanarField& branch(bool use_g) const { return use_g ? g : f; }
};

struct BranchingReport {
    double min_gap = 0.0;
    Point2 argmin;
    bool pass = false;
};

// Checks min |f - g| over a grid; the branching condition requires f != g
// in every point, so pass iff the grid minimum is strictly positive.
BranchingReport validate_branching(const EulerBranching& eb, int grid_n = 0);

enum class Branch { F, G };

// Exogenous switching times: the active branch toggles at each T_i.
struct SwitchingSchedule {
    Branch start = Branch::F;
    std::vector<double> times; // strictly increasing, all positive

    void validate() const; // throws InvalidArgument on violation
    Branch branch_at(double t) const;

    std::string to_json() const;
    static SwitchingSchedule from_json(const std::string& text);
};

// Solution of the inclusion under a schedule: time-contiguous arcs,
// position-continuous at switches, alternating branch labels.
struct SwitchedSolution {
    Point2 x0;
    SwitchingSchedule schedule;
    double horizon = 0.0;
    std::vector<Trajectory> arcs; // absolute time, ascending
    bool domain_exit = false;
    bool step_underflow = false;

    Point2 at(double t) const;
    double t_end() const;
    // n samples uniform in time on [0, t_end].
    std::vector<TrajectorySample> sample_uniform(int n) const;
    std::string to_csv() const;
    // JSON array form: {"arcs": [{"branch": ..., "samples": [[t,x,y],...]}]}.
    std::string to_json() const;
};

SwitchedSolution solve_switched(const EulerBranching& eb, Point2 x0,
                                const SwitchingSchedule& schedule, double horizon,
                                const IntegrateOpts& opts = {});

// Jordan loop bounded by one forward-time f-arc (z1 -> z2) and one
// forward-time g-arc (z2 -> z1). Arc times are local, starting at 0.
struct LoopRegion {
    Trajectory f_arc;
    Trajectory g_arc;
    Point2 z1, z2;
    std::vector<Point2> polygon; // closed polyline, first == last
    Rect bbox;
    double diameter = 0.0; // bbox diagonal

    // Winding test with boundary tolerance: points within tol of the
    // polygon count as inside.
    bool contains(Point2 p, double boundary_tol = 1e-6) const;
    double distance_to_boundary(Point2 p) const;
};

struct LoopOpts {
    double t_span = 40.0;        // orbit cap in each time direction
    double junction_tol = 1e-10; // crossing refinement tolerance
    double max_sag = 0.0;        // polygonization sag; <= 0: 1e-7 * diagonal
    IntegrateOpts integrate;
};

// Integrates psi_B (branch g) and phi_B (branch f) from the seeds in both
// time directions to the domain cap, intersects them, and selects two
// transversal crossings z1, z2 such that travel along phi_B then psi_B is
// forward-time on each branch. Throws NeedTwoCrossings when no oriented
// pair exists (caller reseeds).
LoopRegion construct_loop(const EulerBranching& eb, Point2 psi_seed, Point2 phi_seed,
                          const LoopOpts& opts = {});

struct Gamma0 {
    SwitchedSolution solution;
    double period = 0.0; // T_phi + T_psi
    double T1 = 0.0;     // first switch; 0 for starting points on psi_B
    double T_phi = 0.0;  // f-arc transit x0gf -> x0fg
    double T_psi = 0.0;  // g-arc transit x0fg -> x0gf
    Point2 x0fg, x0gf;
};

struct GammaOpts {
    double horizon_periods = 10.0;
    double on_boundary_tol = 1e-6;
    IntegrateOpts integrate;
};

// Periodic switched solution running along phi_{x0} to x0fg on psi_B, along
// psi_B to x0gf, and back along phi_{x0}; switch times follow
// T_{2k} = T1 + (k-1)T_phi + k T_psi, T_{2k+1} = T1 + k T_phi + k T_psi.
// Throws NoCrossing if the f-trajectory through x0 misses the loop's g-arc.
Gamma0 build_gamma0(const EulerBranching& eb, const LoopRegion& loop, Point2 x0,
                    const GammaOpts& opts = {});

// Four-segment cycle visiting both x0's and xj's f-arcs through the
// boundary g-arc. Throws SameTrajectory if xj lies on phi_{x0}.
SwitchedSolution build_gamma_xj(const EulerBranching& eb, const LoopRegion& loop,
                                Point2 x0, Point2 xj, const GammaOpts& opts = {});

struct SimplePath {
    Point2 a, b;
    std::vector<Trajectory> arcs; // (branch, segment) in traversal order
    int discontinuity_count = 0;

    Point2 start() const { return arcs.front().front(); }
    Point2 end() const { return arcs.back().back(); }
};

// Forward-time path from a to b inside the loop: at most an f-arc to the
// boundary g-arc, a g-arc, and an f-arc to b. Interior avoids a and b.
SimplePath build_simple_path(const EulerBranching& eb, Point2 a, Point2 b,
                             const LoopRegion& loop, const GammaOpts& opts = {});

} // namespace eeb

#endif
