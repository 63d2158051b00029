#include "eeb/manifold.hpp"

#include <cmath>

#include "eeb/errors.hpp"

namespace eeb {

InvariantManifold trace_manifold(const PlanarField& field, const SingularPoint& saddle,
                                 ManifoldDirection direction, ManifoldSign sign, double length,
                                 const IntegrateOpts& opts) {
    if (saddle.kind != EquilibriumKind::Saddle)
        throw Error(ErrorCode::InvalidArgument, "trace_manifold requires a saddle point");
    if (!saddle.eig.e1 || !saddle.eig.e2)
        throw Error(ErrorCode::InvalidArgument, "saddle eigenvectors unavailable");

    // lambda1 < 0 < lambda2, so e1 spans the stable and e2 the unstable
    // direction.
    Vec2 e = direction == ManifoldDirection::Stable ? *saddle.eig.e1 : *saddle.eig.e2;
    if (sign == ManifoldSign::Minus) e = -e;

    const double eps_seed =
        1e-5 * (1.0 + std::hypot(saddle.location.x, saddle.location.y));
    Point2 seed = saddle.location + eps_seed * e;

    IntegrateOpts io = opts;
    if (io.max_space_step <= 0.0) io.max_space_step = field.domain.diagonal() / 50.0;
    io.equilibria.push_back(saddle.location);

    const PlanarField* fld = &field;
    PlanarField rev;
    if (direction == ManifoldDirection::Stable) {
        rev = reversed(field);
        fld = &rev;
    }

    // Step until the accumulated arc length reaches the target; the
    // integration time needed is unknown a priori, so grow in chunks.
    InvariantManifold man;
    man.saddle = saddle;
    man.direction = direction;
    man.sign = sign;

    double t0 = 0.0;
    Point2 p = seed;
    Trajectory acc;
    acc.branch = field.name;
    for (int chunk = 0; chunk < 64; ++chunk) {
        double span = 10.0 * (chunk + 1);
        Trajectory part = integrate(*fld, p, t0, t0 + span, io);
        if (acc.samples.empty()) {
            acc = part;
        } else {
            acc.samples.insert(acc.samples.end(), part.samples.begin() + 1, part.samples.end());
            acc.domain_exit |= part.domain_exit;
            acc.step_underflow |= part.step_underflow;
            acc.near_equilibrium |= part.near_equilibrium;
        }
        if (acc.domain_exit || acc.step_underflow) break;
        if (acc.arc_length() >= length) break;
        t0 = acc.t_back();
        p = acc.back();
    }

    // Trim past the requested arc length.
    double s = 0.0;
    size_t keep = acc.samples.size();
    for (size_t i = 0; i + 1 < acc.samples.size(); ++i) {
        s += dist(acc.samples[i].p, acc.samples[i + 1].p);
        if (s >= length) {
            keep = i + 2;
            break;
        }
    }
    acc.samples.resize(keep);
    man.arc = std::move(acc);
    return man;
}

} // namespace eeb
