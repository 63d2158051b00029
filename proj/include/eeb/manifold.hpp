#ifndef EEB_MANIFOLD_HPP
#define EEB_MANIFOLD_HPP

#include "eeb/equilibria.hpp"
#include "eeb/integrate.hpp"

namespace eeb {

enum class ManifoldDirection { Stable, Unstable };
enum class ManifoldSign { Plus, Minus };

struct InvariantManifold {
    SingularPoint saddle;
    ManifoldDirection direction;
    ManifoldSign sign;
    Trajectory arc; // traced outward from the saddle
};

// Trace one of the four saddle-manifold arcs: seed at
// location + eps_seed*(+-e_k) along the eigenvector whose eigenvalue sign
// matches the direction, forward time for Unstable, reversed for Stable,
// until arc length >= length or domain exit (exit is reported on the arc,
// not an error). eps_seed = 1e-5*(1+|saddle|).
InvariantManifold trace_manifold(const PlanarField& field, const SingularPoint& saddle,
                                 ManifoldDirection direction, ManifoldSign sign,
                                 double length, const IntegrateOpts& opts = {});

} // namespace eeb

#endif
