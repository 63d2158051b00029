#ifndef EEB_FIELD_HPP
#define EEB_FIELD_HPP

#include <functional>
#include <string>
#include <utility>

#include "eeb/geom.hpp"

namespace eeb {

// A planar vector field: total evaluatable map over a declared rectangular
// domain, optionally with an analytic Jacobian. Immutable after construction.
struct PlanarField {
    std::string name;
    std::function<Vec2(Point2)> eval;
    std::function<Matrix2(Point2)> analytic_jacobian; // may be empty
    Rect domain;
    double fd_step_scale = 1e-6; // h = fd_step_scale * (1 + |p|)

    Vec2 operator()(Point2 p) const { return eval(p); }
    bool has_analytic_jacobian() const { return static_cast<bool>(analytic_jacobian); }

    // Linear field v(p) = A (p - fixed_point), Jacobian A everywhere.
    static PlanarField linear(std::string name, Matrix2 a, Point2 fixed_point, Rect domain);
};

// Analytic Jacobian if available, else central finite differences with
// step h = fd_step_scale * (1 + |p|). Throws Error(NonFinite) if the field
// is non-finite near p.
Matrix2 jacobian(const PlanarField& field, Point2 p);

// Field reversed in time (for backward integration and stable manifolds).
PlanarField reversed(const PlanarField& field);

} // namespace eeb

#endif
