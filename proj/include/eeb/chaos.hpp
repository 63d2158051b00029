#ifndef EEB_CHAOS_HPP
#define EEB_CHAOS_HPP

#include <optional>
#include <string>
#include <vector>

#include "eeb/branching.hpp"
#include "eeb/equilibria.hpp"

namespace eeb {

enum class ManifoldOverlap { None, StableOverlapsUnstable, StableOverlapsStable, UnstableOverlapsUnstable };
enum class SpecialPosition { Outside, OnStableManifold, OnUnstableManifold };

// Detected relationship between the two branches' singular points: the
// coordinates the combination tables key on.
struct PairConfiguration {
    SingularPoint sp_f;
    SingularPoint sp_g;
    bool distinct = true;

    // Collinearity of the other branch's vector against a saddle's
    // eigenvectors; only meaningful when that branch's point is a saddle.
    Collinearity collinear_g_at_f = Collinearity::NotCollinear; // g(x*) vs f-saddle
    Collinearity collinear_f_at_g = Collinearity::NotCollinear; // f(y*) vs g-saddle

    // Saddle vs node/focus rows: where the non-saddle point sits relative
    // to the saddle's manifolds.
    SpecialPosition special_position = SpecialPosition::Outside;

    // Saddle-saddle rows.
    ManifoldOverlap overlap = ManifoldOverlap::None;
    bool other_manifolds_intersect = false; // for the overlapped-saddle sub-rows

    // Does the collinear branch's orbit through the saddle overlap the
    // manifold it is tangent to? Distinguishes the transversal and overlap
    // cases of the collinear-saddle construction.
    bool flow_overlap = false;
};

struct DetectOpts {
    int grid_n = 48;
    double root_tol = 1e-10;
    double classify_tol = 1e-8;
    double coincident_tol = 1e-6;
    double angle_tol = 1e-6;
    double manifold_tol = 1e-6;   // membership distance for on-manifold tests
    double manifold_span = 3.0;   // manifold trace length, in units of |x*-y*|
};

// Locates exactly one singular point per branch in the region, classifies
// both, and fills the table coordinates. Throws NoEquilibrium,
// MultipleEquilibria, CoincidentEquilibria, or NonHyperbolic.
PairConfiguration detect_configuration(const EulerBranching& eb, Rect region,
                                       const DetectOpts& opts = {});

enum class GeometryVariant { Region, Arc };

struct ChaoticSetGeometry {
    GeometryVariant variant = GeometryVariant::Region;
    std::optional<LoopRegion> region;
    // Arc: straight segment with equilibria excluded, sampled uniformly.
    Point2 arc_a, arc_b;
    std::vector<Point2> arc_points;
    bool theta_checked = false;
};

struct CertifyOpts {
    DetectOpts detect;
    LoopOpts loop;
    // Explicit loop seeds; when absent a retry ladder of offsets around the
    // segment between the equilibria is scanned.
    std::optional<Point2> psi_seed;
    std::optional<Point2> phi_seed;
    int max_retries = 600;
    double endpoint_margin = 0.05; // arc trim, in units of |x*-y*|
    int arc_samples = 200;
    double theta_tol = 1e-6;
    double delta_scale = 0.25;  // ball radius delta = delta_scale*|x*-y*|
    double unbounded_t_max = 50.0;
};

// Chaotic-set geometry for a certified-eligible configuration. Region:
// loop construction with the seed ladder; Arc: anti-parallel segment
// (between the equilibria or along the overlapped manifold ray), trimmed
// by endpoint_margin. Throws ConstructionFailed after retries.
ChaoticSetGeometry construct_chaotic_set(const EulerBranching& eb,
                                         const PairConfiguration& config,
                                         const CertifyOpts& opts = {});

// Angle between the branches at n uniform samples of the arc; the arc
// variant certifies only when max |theta - pi| <= theta_tol. Throws
// ZeroVector if |f||g| vanishes at a sample.
std::vector<double> theta_profile(const EulerBranching& eb, const ChaoticSetGeometry& arc,
                                  int n);

struct ChaosCertificate {
    bool certified = false;
    PairConfiguration config;
    std::optional<ChaoticSetGeometry> geometry;
    bool devaney = false;
    bool li_yorke = false;
    bool distributional = false;
    std::string theorem;   // construction identifier
    int table = 0;         // 1 or 2
    std::string row;       // combination-table row label
    std::vector<std::string> refusals;
    bool unbounded_proxy_f = false; // g-orbit through x*_f exits the delta-ball
    bool unbounded_proxy_g = false;

    std::string to_json() const; // schema 1
};

// Maps the configuration to its combination-table row, constructs the
// geometry, and sets the chaos flags: devaney whenever a chaotic set is
// constructed; li_yorke and distributional for Region geometry or for Arc
// geometry passing the theta profile. Never certifies non-hyperbolic or
// coincident pairs: those come back with certified=false and reasons.
ChaosCertificate certify(const EulerBranching& eb, const PairConfiguration& config,
                         const CertifyOpts& opts = {});

struct ScrambleReport {
    double min_dist = 0.0;
    double max_dist = 0.0;
    double fraction_below_eps = 0.0;
};

// Finite-horizon proxy for scrambling: pointwise distance of two solutions
// on a uniform time grid over the common horizon.
ScrambleReport scrambled_diagnostic(const SwitchedSolution& a, const SwitchedSolution& b,
                                    double horizon, double eps, int grid_n = 10000);

struct SolutionSetReport {
    struct PerSolution {
        double inside_fraction = 0.0;
        int uncovered_cells = 0; // region cells with no sample of this solution
    };
    std::vector<PerSolution> per_solution;
    int region_cells = 0;
    bool pass = false;
};

// F-invariance and non-density report: per-solution inside fraction
// (winding test, boundary tolerance) and uncovered region cells on a
// grid_n x grid_n grid over the loop's bounding box. Passes when all
// solutions stay inside, at least one leaves a cell uncovered, and the set
// has at least two solutions.
SolutionSetReport invariance_and_density_report(const std::vector<SwitchedSolution>& sols,
                                                const LoopRegion& region,
                                                int samples_per_solution = 1000,
                                                int grid_n = 50,
                                                double boundary_tol = 1e-6);

} // namespace eeb

#endif
