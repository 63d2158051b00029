#ifndef EEB_INTEGRATE_HPP
#define EEB_INTEGRATE_HPP

#include <functional>
#include <string>
#include <vector>

#include "eeb/field.hpp"
#include "eeb/geom.hpp"

namespace eeb {

struct IntegrateOpts {
    double rtol = 1e-9;
    double atol = 1e-12;
    // Spatial step cap; <= 0 means 1/50 of the field's domain diagonal.
    // Keeps samples dense enough that curve intersections cannot be skipped.
    double max_space_step = 0.0;
    double max_time_step = 0.0; // <= 0: no explicit cap
    // Known equilibria of the field being integrated; samples passing within
    // near_equilibrium_radius of one set the near_equilibrium flag.
    std::vector<Point2> equilibria;
    double near_equilibrium_radius = 1e-9;
    bool stop_on_domain_exit = true;
};

struct TrajectorySample {
    double t;
    Point2 p;
    Vec2 v; // field value at p, stored for cubic Hermite interpolation
};

// Dense single-branch solution arc. Samples are ordered by increasing t
// even when produced by reversed-time integration.
struct Trajectory {
    std::string branch;
    std::vector<TrajectorySample> samples;
    bool domain_exit = false;
    bool step_underflow = false;
    bool near_equilibrium = false;
    bool event_stop = false;

    bool empty() const { return samples.empty(); }
    double t_front() const { return samples.front().t; }
    double t_back() const { return samples.back().t; }
    Point2 front() const { return samples.front().p; }
    Point2 back() const { return samples.back().p; }

    // Cubic Hermite interpolation between stored samples; t clamped to range.
    Point2 at(double t) const;
    Vec2 velocity_at(double t) const;

    double arc_length() const;
    // Minimum distance from p to the sampled polyline.
    double distance_to(Point2 p) const;

    // CSV rows `t,x,y,branch`, '\n' endings, C locale.
    std::string to_csv() const;
    // JSON array form: {"branch": ..., "samples": [[t, x, y], ...]}.
    std::string to_json() const;
};

// Adaptive embedded Runge-Kutta 4(5) (Dormand-Prince) with PI step control.
// t1 < t0 integrates in reversed time. Domain exit truncates at the boundary
// and flags the trajectory; step underflow flags and stops.
Trajectory integrate(const PlanarField& field, Point2 x0, double t0, double t1,
                     const IntegrateOpts& opts = {});

enum class EventDirection { Rising, Falling, Any };

struct EventSpec {
    std::function<double(double, Point2)> fn;
    EventDirection direction = EventDirection::Any;
    bool terminal = true;
};

struct EventHit {
    double t;
    Point2 p;
    int spec_index;
};

// Integrate forward from t0 until a terminal event fires or t_max is
// reached. Sign changes are bracketed per accepted step and refined by
// bisection on the dense output to |dt| <= 1e-12*(1+|t|). Reaching t_max
// without events is not an error: empty hit list.
std::pair<Trajectory, std::vector<EventHit>> integrate_until(
    const PlanarField& field, Point2 x0, double t0,
    const std::vector<EventSpec>& events, double t_max,
    const IntegrateOpts& opts = {});

struct TrajectoryCrossing {
    Point2 p;
    double ta;
    double tb;
};

// All transversal crossings of two densely sampled trajectories, refined on
// the Hermite curves to |pa(ta) - pb(tb)| <= tol, sorted by ta. Tangential
// near-misses are excluded by a strict segment-crossing sign test.
std::vector<TrajectoryCrossing> intersect_trajectories(const Trajectory& a,
                                                       const Trajectory& b,
                                                       double tol = 1e-10);

// Concatenation of backward and forward integration through seed:
// samples span [-t_span, +t_span] in the field's own time (clipped by
// domain exit), with t = 0 at the seed.
Trajectory full_orbit(const PlanarField& field, Point2 seed, double t_span,
                      const IntegrateOpts& opts = {});

// Curve parameter of the nearest point to p on the Hermite interpolant
// (coarse sample scan plus ternary refinement). dist(tr.at(result), p) is
// the curve distance, sharper than the sampled-polyline distance.
double nearest_time(const Trajectory& tr, Point2 p);

} // namespace eeb

#endif
