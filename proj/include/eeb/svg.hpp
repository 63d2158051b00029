#ifndef EEB_SVG_HPP
#define EEB_SVG_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "eeb/branching.hpp"
#include "eeb/chaos.hpp"

namespace eeb {

struct PortraitOpts {
    int width = 900;
    int height = 640;
    int lattice_n = 7;         // streamline seeds per axis, fixed lattice
    double stream_time = 12.0; // integration span per direction
    int curve_grid = 160;      // marching grid for zero-curves
    double rtol = 1e-7;
};

// Named scalar whose zero set is drawn as a curve (IS, LM, QY, ML).
struct ZeroCurve {
    std::string name;
    std::function<double(Point2)> fn;
};

// Self-contained SVG phase portrait: streamlines of both branches with
// distinguishable stroke classes, zero-curves, equilibria markers, and
// optional chaotic-set shading. Output is deterministic; the first line
// after the XML header is a version comment.
std::string render_portrait(const EulerBranching& eb,
                            const std::vector<ZeroCurve>& curves,
                            const std::vector<Point2>& equilibria,
                            const std::optional<ChaoticSetGeometry>& shade,
                            const PortraitOpts& opts = {});

// Atomic file write: temp file in the same directory, then rename.
void write_file_atomic(const std::string& path, const std::string& content);

} // namespace eeb

#endif
