#ifndef EEB_EQUILIBRIA_HPP
#define EEB_EQUILIBRIA_HPP

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "eeb/field.hpp"
#include "eeb/geom.hpp"

namespace eeb {

enum class EquilibriumKind {
    StableNode,
    UnstableNode,
    StableFocus,
    UnstableFocus,
    Saddle,
    NonHyperbolic,
    DegenerateZeroDet,
};

// Human-readable names matching the combination-table vocabulary
// ("stable node", "unstable saddle", ...).
std::string kind_name(EquilibriumKind k);
bool kind_is_hyperbolic(EquilibriumKind k);
bool kind_is_node(EquilibriumKind k);
bool kind_is_focus(EquilibriumKind k);

// Eigenvalues ordered by ascending real part, so for a saddle
// lambda1 < 0 < lambda2 and e1 spans the stable direction.
// Eigenvectors are unit vectors, absent for complex eigenvalues.
struct Eigenstructure {
    std::complex<double> lambda1;
    std::complex<double> lambda2;
    std::optional<Vec2> e1;
    std::optional<Vec2> e2;
    bool repeated = false; // lambda1 == lambda2 (real double eigenvalue)
};

struct SingularPoint {
    Point2 location;
    Matrix2 jac;
    Eigenstructure eig;
    EquilibriumKind kind = EquilibriumKind::DegenerateZeroDet;
    double residual = 0.0; // |field(location)|
};

// Classify a Jacobian. Thresholds scale with the matrix norm:
// |Re lambda| <= tol*(1+|J|) counts as zero, |det| <= tol*(1+|J|)^2 as zero.
std::pair<EquilibriumKind, Eigenstructure> classify(const Matrix2& jac, double tol = 1e-8);

struct SingularPointSearch {
    std::vector<SingularPoint> points; // sorted lexicographically by (x, y)
    int seeds = 0;                     // Newton starts attempted
    int dropped = 0;                   // non-converged seeds (not errors)
};

// Grid-seeded Newton search for zeros of one branch. Cells whose corner
// signs straddle zero in both components seed a Newton iteration; results
// with |field| <= tol are kept, deduplicated by distance < 10*tol.
SingularPointSearch find_singular_points(const PlanarField& field, Rect region,
                                         int grid_n, double tol = 1e-10);

enum class Collinearity { NotCollinear, CollinearE1, CollinearE2 };

// Is v collinear (either sign) with one of the eigendirections? Unsigned
// angle within tol_angle of 0 or pi. Throws ZeroVector for |v| = 0 and
// InvalidArgument when the eigenvectors are complex.
Collinearity collinearity(Vec2 v, const Eigenstructure& eig, double tol_angle = 1e-6);

} // namespace eeb

#endif
