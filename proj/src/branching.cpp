#include "eeb/branching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

#include "eeb/errors.hpp"

namespace eeb {

BranchingReport validate_branching(const EulerBranching& eb, int grid_n) {
    int n = grid_n > 0 ? grid_n : eb.branching_check_n;
    BranchingReport rep;
    rep.min_gap = std::numeric_limits<double>::infinity();
    double scale = 0.0;
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            Point2 p{eb.domain.x0 + eb.domain.width() * i / n,
                     eb.domain.y0 + eb.domain.height() * j / n};
            Vec2 vf = eb.f.eval(p);
            Vec2 vg = eb.g.eval(p);
            double gap = norm(vf - vg);
            scale = std::max({scale, norm(vf), norm(vg)});
            if (gap < rep.min_gap) {
                rep.min_gap = gap;
                rep.argmin = p;
            }
        }
    }
    // Strictly positive up to the rounding floor of the field evaluations;
    // identical branches differ only by round-off and must fail.
    rep.pass = rep.min_gap > 1e-12 * (1.0 + scale);
    return rep;
}

void SwitchingSchedule::validate() const {
    double prev = 0.0;
    for (double t : times) {
        if (!(t > prev))
            throw Error(ErrorCode::InvalidArgument,
                        "schedule times must be strictly increasing and positive");
        prev = t;
    }
}

Branch SwitchingSchedule::branch_at(double t) const {
    size_t k = 0;
    while (k < times.size() && t >= times[k]) ++k;
    bool g_active = (k % 2 == 1) == (start == Branch::F);
    return g_active ? Branch::G : Branch::F;
}

std::string SwitchingSchedule::to_json() const {
    nlohmann::json j;
    j["start"] = start == Branch::F ? "F" : "G";
    j["times"] = times;
    return j.dump(2);
}

SwitchingSchedule SwitchingSchedule::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    SwitchingSchedule s;
    std::string st = j.value("start", "F");
    if (st != "F" && st != "G")
        throw Error(ErrorCode::InvalidArgument, "schedule start must be \"F\" or \"G\"");
    s.start = st == "F" ? Branch::F : Branch::G;
    s.times = j.value("times", std::vector<double>{});
    s.validate();
    return s;
}

Point2 SwitchedSolution::at(double t) const {
    if (arcs.empty()) throw Error(ErrorCode::InvalidArgument, "empty solution");
    for (const auto& arc : arcs)
        if (t <= arc.t_back()) return arc.at(t);
    return arcs.back().back();
}

double SwitchedSolution::t_end() const { return arcs.empty() ? 0.0 : arcs.back().t_back(); }

std::vector<TrajectorySample> SwitchedSolution::sample_uniform(int n) const {
    std::vector<TrajectorySample> out;
    double te = t_end();
    for (int i = 0; i < n; ++i) {
        double t = te * i / (n - 1);
        out.push_back({t, at(t), Vec2{}});
    }
    return out;
}

std::string SwitchedSolution::to_csv() const {
    std::string out = "t,x,y,branch\n";
    char buf[128];
    for (const auto& arc : arcs) {
        for (const auto& s : arc.samples) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,", s.t, s.p.x, s.p.y);
            out += buf;
            out += arc.branch;
            out += '\n';
        }
    }
    return out;
}

std::string SwitchedSolution::to_json() const {
    nlohmann::json j;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& arc : arcs) {
        nlohmann::json ja;
        ja["branch"] = arc.branch;
        nlohmann::json samples = nlohmann::json::array();
        for (const auto& s : arc.samples) samples.push_back({s.t, s.p.x, s.p.y});
        ja["samples"] = samples;
        arr.push_back(ja);
    }
    j["arcs"] = arr;
    j["domain_exit"] = domain_exit;
    return j.dump(2);
}

SwitchedSolution solve_switched(const EulerBranching& eb, Point2 x0,
                                const SwitchingSchedule& schedule, double horizon,
                                const IntegrateOpts& opts) {
    schedule.validate();
    if (!(horizon > 0.0)) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
    if (!eb.domain.contains(x0, 1e-9 * eb.domain.diagonal()))
        throw Error(ErrorCode::DomainExit, "x0 outside declared domain");

    SwitchedSolution sol;
    sol.x0 = x0;
    sol.schedule = schedule;
    sol.horizon = horizon;

    IntegrateOpts io = opts;
    if (io.max_space_step <= 0.0) io.max_space_step = eb.domain.diagonal() / 50.0;

    double t = 0.0;
    Point2 p = x0;
    bool use_g = schedule.start == Branch::G;
    size_t next_switch = 0;
    while (t < horizon) {
        double t_stop = horizon;
        if (next_switch < schedule.times.size())
            t_stop = std::min(horizon, schedule.times[next_switch]);
        if (t_stop > t) {
            Trajectory arc = integrate(eb.branch(use_g), p, t, t_stop, io);
            p = arc.back();
            double reached = arc.t_back();
            sol.domain_exit |= arc.domain_exit;
            sol.step_underflow |= arc.step_underflow;
            sol.arcs.push_back(std::move(arc));
            if (sol.domain_exit || sol.step_underflow) break;
            t = reached;
        }
        if (next_switch < schedule.times.size() && t >= schedule.times[next_switch] - 1e-15) {
            use_g = !use_g;
            ++next_switch;
        }
        if (t >= horizon) break;
    }
    return sol;
}

// ---------------------------------------------------------------------------
// Loop regions
// ---------------------------------------------------------------------------

namespace {

void subdivide(const Trajectory& arc, size_t i, double t0, double t1, Point2 p0, Point2 p1,
               double sag, int depth, std::vector<Point2>& out) {
    double tm = 0.5 * (t0 + t1);
    Point2 pm = arc.at(tm);
    Point2 chord_mid{0.5 * (p0.x + p1.x), 0.5 * (p0.y + p1.y)};
    if (depth >= 10 || dist(pm, chord_mid) <= sag) return;
    subdivide(arc, i, t0, tm, p0, pm, sag, depth + 1, out);
    out.push_back(pm);
    subdivide(arc, i, tm, t1, pm, p1, sag, depth + 1, out);
}

void polygonize_arc(const Trajectory& arc, double sag, std::vector<Point2>& out) {
    for (size_t i = 0; i + 1 < arc.samples.size(); ++i) {
        const auto& s0 = arc.samples[i];
        const auto& s1 = arc.samples[i + 1];
        out.push_back(s0.p);
        subdivide(arc, i, s0.t, s1.t, s0.p, s1.p, sag, 0, out);
    }
    out.push_back(arc.samples.back().p);
}

// Sub-arc of traj on [t_from, t_to], times shifted to start at 0, endpoints
// snapped to the given points (refined junctions).
Trajectory arc_between(const Trajectory& traj, double t_from, double t_to, Point2 snap_from,
                       Point2 snap_to, const PlanarField& field) {
    Trajectory arc;
    arc.branch = traj.branch;
    arc.samples.push_back({0.0, snap_from, field.eval(snap_from)});
    for (const auto& s : traj.samples) {
        if (s.t > t_from + 1e-12 && s.t < t_to - 1e-12)
            arc.samples.push_back({s.t - t_from, s.p, s.v});
    }
    arc.samples.push_back({t_to - t_from, snap_to, field.eval(snap_to)});
    return arc;
}

// Distance from p to the Hermite curve (not the sampled polyline).
double curve_distance(const Trajectory& traj, Point2 p) {
    return dist(traj.at(nearest_time(traj, p)), p);
}

} // namespace

bool LoopRegion::contains(Point2 p, double boundary_tol) const {
    if (boundary_tol > 0.0 && distance_to_boundary(p) <= boundary_tol) return true;
    bool inside = false;
    size_t n = polygon.size();
    for (size_t i = 0; i + 1 < n; ++i) {
        Point2 a = polygon[i], b = polygon[i + 1];
        if ((a.y > p.y) != (b.y > p.y)) {
            double xint = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < xint) inside = !inside;
        }
    }
    return inside;
}

double LoopRegion::distance_to_boundary(Point2 p) const {
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i + 1 < polygon.size(); ++i)
        best = std::min(best, dist_to_segment(p, polygon[i], polygon[i + 1]));
    return best;
}

LoopRegion construct_loop(const EulerBranching& eb, Point2 psi_seed, Point2 phi_seed,
                          const LoopOpts& opts) {
    IntegrateOpts io = opts.integrate;
    if (io.max_space_step <= 0.0) io.max_space_step = eb.domain.diagonal() / 50.0;

    Trajectory psi = full_orbit(eb.g, psi_seed, opts.t_span, io);
    Trajectory phi = full_orbit(eb.f, phi_seed, opts.t_span, io);
    if (psi.samples.size() < 2 || phi.samples.size() < 2)
        throw Error(ErrorCode::NeedTwoCrossings, "degenerate orbit from seed");

    auto crossings = intersect_trajectories(phi, psi, opts.junction_tol);
    if (crossings.size() < 2)
        throw Error(ErrorCode::NeedTwoCrossings,
                    "fewer than two transversal crossings between the seed orbits");

    // Choose z1, z2 with phi forward z1 -> z2, psi forward z2 -> z1, and no
    // other crossing strictly inside either arc (simple Jordan boundary).
    // Among valid pairs take the widest junction separation.
    int pick_i = -1, pick_j = -1;
    double best_sep = -1.0;
    for (size_t i = 0; i < crossings.size(); ++i) {
        for (size_t j = 0; j < crossings.size(); ++j) {
            if (i == j) continue;
            const auto& ci = crossings[i];
            const auto& cj = crossings[j];
            if (!(ci.ta < cj.ta && cj.tb < ci.tb)) continue;
            bool clean = true;
            for (size_t k = 0; k < crossings.size() && clean; ++k) {
                if (k == i || k == j) continue;
                if (crossings[k].ta > ci.ta && crossings[k].ta < cj.ta) clean = false;
                if (crossings[k].tb > cj.tb && crossings[k].tb < ci.tb) clean = false;
            }
            if (!clean) continue;
            double sep = dist(ci.p, cj.p);
            if (sep > best_sep) {
                best_sep = sep;
                pick_i = static_cast<int>(i);
                pick_j = static_cast<int>(j);
            }
        }
    }
    if (pick_i < 0)
        throw Error(ErrorCode::NeedTwoCrossings, "no forward-oriented crossing pair");

    const auto& c1 = crossings[pick_i];
    const auto& c2 = crossings[pick_j];

    LoopRegion loop;
    loop.z1 = c1.p;
    loop.z2 = c2.p;
    loop.f_arc = arc_between(phi, c1.ta, c2.ta, loop.z1, loop.z2, eb.f);
    loop.g_arc = arc_between(psi, c2.tb, c1.tb, loop.z2, loop.z1, eb.g);

    double diag_guess = dist(loop.z1, loop.z2) + loop.f_arc.arc_length();
    double sag = opts.max_sag > 0.0 ? opts.max_sag : 1e-7 * std::max(diag_guess, 1e-6);
    std::vector<Point2> poly;
    polygonize_arc(loop.f_arc, sag, poly);
    poly.pop_back(); // z2 re-added by the g-arc
    polygonize_arc(loop.g_arc, sag, poly);
    loop.polygon = std::move(poly);

    Rect bb{loop.polygon[0].x, loop.polygon[0].y, loop.polygon[0].x, loop.polygon[0].y};
    for (const auto& p : loop.polygon) {
        bb.x0 = std::min(bb.x0, p.x);
        bb.x1 = std::max(bb.x1, p.x);
        bb.y0 = std::min(bb.y0, p.y);
        bb.y1 = std::max(bb.y1, p.y);
    }
    loop.bbox = bb;
    loop.diameter = bb.diagonal();
    return loop;
}

// ---------------------------------------------------------------------------
// Switched-solution constructions on a loop
// ---------------------------------------------------------------------------

namespace {

struct OrbitCrossings {
    Trajectory orbit; // f-orbit through the base point, t = 0 there
    double ta_fwd = 0.0, tb_fwd = 0.0;   // first crossing forward (x_fg)
    double ta_back = 0.0, tb_back = 0.0; // first crossing backward (x_gf)
    Point2 x_fg, x_gf;
    bool t1_zero = false; // base point lies on the boundary g-arc
};

OrbitCrossings f_orbit_crossings(const EulerBranching& eb, const LoopRegion& loop, Point2 x,
                                 const GammaOpts& opts) {
    IntegrateOpts io = opts.integrate;
    if (io.max_space_step <= 0.0) io.max_space_step = eb.domain.diagonal() / 50.0;

    OrbitCrossings oc;
    oc.orbit = full_orbit(eb.f, x, 60.0, io);
    auto crossings = intersect_trajectories(oc.orbit, loop.g_arc, 1e-10);

    bool on_boundary = curve_distance(loop.g_arc, x) <= opts.on_boundary_tol;

    // Classify the crossings of phi_{x} with the boundary g-arc relative
    // to x: the crossing at x itself (boundary starts), nearest forward,
    // nearest backward.
    bool have_self = false, have_fwd = false, have_back = false;
    TrajectoryCrossing self{}, fwd{}, back{};
    for (const auto& c : crossings) {
        if (on_boundary && std::abs(c.ta) <= 1e-6 && (!have_self || std::abs(c.ta) < std::abs(self.ta))) {
            self = c;
            have_self = true;
        } else if (c.ta > 1e-9 && (!have_fwd || c.ta < fwd.ta)) {
            fwd = c;
            have_fwd = true;
        } else if (c.ta < -1e-9 && (!have_back || c.ta > back.ta)) {
            back = c;
            have_back = true;
        }
    }
    if (on_boundary && !have_self) {
        self = {x, 0.0, nearest_time(loop.g_arc, x)};
        have_self = true;
    }

    if (have_self && have_fwd) {
        // x sits on the boundary where f enters the region: the ordinary
        // construction applies with x itself as the return point x_gf.
        oc.ta_fwd = fwd.ta;
        oc.tb_fwd = fwd.tb;
        oc.x_fg = fwd.p;
        oc.ta_back = 0.0;
        oc.tb_back = self.tb;
        oc.x_gf = self.p;
        return oc;
    }
    if (have_self && have_back) {
        // x sits where f exits: start with the switch (T1 = 0).
        oc.t1_zero = true;
        oc.ta_fwd = 0.0;
        oc.tb_fwd = self.tb;
        oc.x_fg = self.p;
        oc.ta_back = back.ta;
        oc.tb_back = back.tb;
        oc.x_gf = back.p;
        return oc;
    }
    if (have_fwd && have_back) {
        oc.ta_fwd = fwd.ta;
        oc.tb_fwd = fwd.tb;
        oc.x_fg = fwd.p;
        oc.ta_back = back.ta;
        oc.tb_back = back.tb;
        oc.x_gf = back.p;
        return oc;
    }
    throw Error(ErrorCode::NoCrossing,
                "f-trajectory through the point does not cross the loop's g-arc in both "
                "time directions");
}

} // namespace

Gamma0 build_gamma0(const EulerBranching& eb, const LoopRegion& loop, Point2 x0,
                    const GammaOpts& opts) {
    if (!loop.contains(x0, 1e-7 * (1.0 + loop.diameter)))
        throw Error(ErrorCode::NoCrossing, "x0 outside the loop region");

    OrbitCrossings oc = f_orbit_crossings(eb, loop, x0, opts);

    Gamma0 g0;
    g0.T1 = oc.t1_zero ? 0.0 : oc.ta_fwd;
    g0.T_phi = oc.ta_fwd - oc.ta_back;
    g0.T_psi = oc.tb_back - oc.tb_fwd;
    g0.x0fg = oc.x_fg;
    g0.x0gf = oc.x_gf;
    if (!(g0.T_psi > 0.0))
        throw Error(ErrorCode::NoCrossing, "g-arc does not run forward from x0fg to x0gf");

    g0.period = g0.T_phi + g0.T_psi;
    double horizon = opts.horizon_periods * g0.period + g0.T1;

    SwitchingSchedule sched;
    sched.start = g0.T1 > 0.0 ? Branch::F : Branch::G;
    // T_{2k} = T1 + (k-1) T_phi + k T_psi, T_{2k+1} = T1 + k T_phi + k T_psi.
    if (g0.T1 > 0.0) sched.times.push_back(g0.T1);
    for (int k = 1;; ++k) {
        double t2k = g0.T1 + (k - 1) * g0.T_phi + k * g0.T_psi;
        double t2k1 = g0.T1 + k * g0.T_phi + k * g0.T_psi;
        if (t2k >= horizon && t2k1 >= horizon) break;
        if (t2k < horizon) sched.times.push_back(t2k);
        if (t2k1 < horizon) sched.times.push_back(t2k1);
        if (k > 100000) break;
    }
    g0.solution = solve_switched(eb, x0, sched, horizon, opts.integrate);
    return g0;
}

SwitchedSolution build_gamma_xj(const EulerBranching& eb, const LoopRegion& loop, Point2 x0,
                                Point2 xj, const GammaOpts& opts) {
    if (!loop.contains(xj, 1e-7 * (1.0 + loop.diameter)))
        throw Error(ErrorCode::NoCrossing, "xj outside the loop region");

    OrbitCrossings oc0 = f_orbit_crossings(eb, loop, x0, opts);
    if (curve_distance(oc0.orbit, xj) <= opts.on_boundary_tol ||
        dist(x0, xj) <= opts.on_boundary_tol)
        throw Error(ErrorCode::SameTrajectory, "xj lies on the f-trajectory through x0");

    OrbitCrossings ocj = f_orbit_crossings(eb, loop, xj, opts);

    double T1 = oc0.t1_zero ? 0.0 : oc0.ta_fwd;
    double T_psi_0j = ocj.tb_back - oc0.tb_fwd; // g-arc x0fg -> xjgf
    double T_phi_j = ocj.ta_fwd - ocj.ta_back;  // f-arc xjgf -> xjfg through xj
    double T_psi_j0 = oc0.tb_back - ocj.tb_fwd; // g-arc xjfg -> x0gf
    double T_phi_0 = oc0.ta_fwd - oc0.ta_back;  // f-arc x0gf -> x0fg through x0
    if (!(T_psi_0j > 0.0) || !(T_psi_j0 > 0.0))
        throw Error(ErrorCode::NoCrossing, "xj's f-arc is not reachable along the boundary g-arc");

    double period = T_psi_0j + T_phi_j + T_psi_j0 + T_phi_0;
    double horizon = opts.horizon_periods * period + T1;

    SwitchingSchedule sched;
    sched.start = T1 > 0.0 ? Branch::F : Branch::G;
    if (T1 > 0.0) sched.times.push_back(T1);
    double t = T1;
    const double legs[4] = {T_psi_0j, T_phi_j, T_psi_j0, T_phi_0};
    for (int k = 0; t < horizon; k = (k + 1) % 4) {
        t += legs[k];
        if (t < horizon) sched.times.push_back(t);
    }
    return solve_switched(eb, x0, sched, horizon, opts.integrate);
}

SimplePath build_simple_path(const EulerBranching& eb, Point2 a, Point2 b,
                             const LoopRegion& loop, const GammaOpts& opts) {
    double tol = 1e-7 * (1.0 + loop.diameter);
    if (!loop.contains(a, tol) || !loop.contains(b, tol))
        throw Error(ErrorCode::NoCrossing, "endpoints must lie inside or on the loop");

    IntegrateOpts io = opts.integrate;
    if (io.max_space_step <= 0.0) io.max_space_step = eb.domain.diagonal() / 50.0;

    SimplePath path;
    path.a = a;
    path.b = b;

    bool degenerate = dist(a, b) <= opts.on_boundary_tol;
    if (!degenerate) {
        // Single f-arc when b lies forward on a's f-trajectory.
        Trajectory fwd = integrate(eb.f, a, 0.0, 60.0, io);
        if (curve_distance(fwd, b) <= opts.on_boundary_tol) {
            double t_hit = nearest_time(fwd, b);
            if (t_hit > 1e-12) {
                Trajectory arc = integrate(eb.f, a, 0.0, t_hit, io);
                arc.samples.back().p = b;
                path.arcs.push_back(std::move(arc));
                path.discontinuity_count = 0;
                return path;
            }
        }
    }

    OrbitCrossings oca = f_orbit_crossings(eb, loop, a, opts);

    double tb_target;
    Point2 target;
    bool tail_arc = false;
    double tail_time = 0.0;
    Trajectory orbit_b;
    if (degenerate) {
        tb_target = oca.tb_back; // around once, back to a's own entry point
        target = oca.x_gf;
        tail_arc = true;
        tail_time = -oca.ta_back; // x0gf -> a along a's f-orbit
    } else if (curve_distance(loop.g_arc, b) <= opts.on_boundary_tol) {
        tb_target = nearest_time(loop.g_arc, b);
        target = b;
    } else {
        OrbitCrossings ocb = f_orbit_crossings(eb, loop, b, opts);
        tb_target = ocb.tb_back;
        target = ocb.x_gf;
        tail_arc = true;
        tail_time = -ocb.ta_back;
    }
    if (!(tb_target > oca.tb_fwd))
        throw Error(ErrorCode::NoCrossing, "target entry point is not forward along the g-arc");

    if (!oca.t1_zero) {
        Trajectory arc1 = integrate(eb.f, a, 0.0, oca.ta_fwd, io);
        arc1.samples.back().p = oca.x_fg;
        path.arcs.push_back(std::move(arc1));
    }
    Trajectory garc = integrate(eb.g, oca.x_fg, 0.0, tb_target - oca.tb_fwd, io);
    garc.samples.back().p = target;
    path.arcs.push_back(std::move(garc));
    if (tail_arc) {
        Trajectory arc3 = integrate(eb.f, target, 0.0, tail_time, io);
        arc3.samples.back().p = degenerate ? a : b;
        path.arcs.push_back(std::move(arc3));
    }
    path.discontinuity_count = static_cast<int>(path.arcs.size()) - 1;
    return path;
}

} // namespace eeb
