#include "eeb/field.hpp"

#include "eeb/errors.hpp"

namespace eeb {

PlanarField PlanarField::linear(std::string name, Matrix2 a, Point2 fixed_point, Rect domain) {
    PlanarField f;
    f.name = std::move(name);
    f.domain = domain;
    f.eval = [a, fixed_point](Point2 p) { return a * (p - fixed_point); };
    f.analytic_jacobian = [a](Point2) { return a; };
    return f;
}

Matrix2 jacobian(const PlanarField& field, Point2 p) {
    if (field.analytic_jacobian) {
        Matrix2 j = field.analytic_jacobian(p);
        if (!finite(j)) throw Error(ErrorCode::NonFinite, "analytic Jacobian non-finite");
        return j;
    }
    const double h = field.fd_step_scale * (1.0 + std::hypot(p.x, p.y));
    Vec2 fx_p = field.eval({p.x + h, p.y});
    Vec2 fx_m = field.eval({p.x - h, p.y});
    Vec2 fy_p = field.eval({p.x, p.y + h});
    Vec2 fy_m = field.eval({p.x, p.y - h});
    if (!finite(fx_p) || !finite(fx_m) || !finite(fy_p) || !finite(fy_m))
        throw Error(ErrorCode::NonFinite, "field non-finite near (" + std::to_string(p.x) + ", " +
                                              std::to_string(p.y) + ")");
    Matrix2 j;
    j.a11 = (fx_p.x - fx_m.x) / (2.0 * h);
    j.a21 = (fx_p.y - fx_m.y) / (2.0 * h);
    j.a12 = (fy_p.x - fy_m.x) / (2.0 * h);
    j.a22 = (fy_p.y - fy_m.y) / (2.0 * h);
    return j;
}

PlanarField reversed(const PlanarField& field) {
    PlanarField r = field;
    r.name = field.name + "_reversed";
    auto base = field.eval;
    r.eval = [base](Point2 p) { return -base(p); };
    if (field.analytic_jacobian) {
        auto jac = field.analytic_jacobian;
        r.analytic_jacobian = [jac](Point2 p) {
            Matrix2 j = jac(p);
            return Matrix2{-j.a11, -j.a12, -j.a21, -j.a22};
        };
    }
    return r;
}

} // namespace eeb
