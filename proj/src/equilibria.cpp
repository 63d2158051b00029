#include "eeb/equilibria.hpp"

#include <algorithm>
#include <cmath>

#include "eeb/errors.hpp"

namespace eeb {

std::string kind_name(EquilibriumKind k) {
    switch (k) {
        case EquilibriumKind::StableNode: return "stable node";
        case EquilibriumKind::UnstableNode: return "unstable node";
        case EquilibriumKind::StableFocus: return "stable focus";
        case EquilibriumKind::UnstableFocus: return "unstable focus";
        case EquilibriumKind::Saddle: return "unstable saddle";
        case EquilibriumKind::NonHyperbolic: return "non-hyperbolic";
        case EquilibriumKind::DegenerateZeroDet: return "degenerate";
    }
    return "?";
}

bool kind_is_hyperbolic(EquilibriumKind k) {
    return k == EquilibriumKind::StableNode || k == EquilibriumKind::UnstableNode ||
           k == EquilibriumKind::StableFocus || k == EquilibriumKind::UnstableFocus ||
           k == EquilibriumKind::Saddle;
}

bool kind_is_node(EquilibriumKind k) {
    return k == EquilibriumKind::StableNode || k == EquilibriumKind::UnstableNode;
}

bool kind_is_focus(EquilibriumKind k) {
    return k == EquilibriumKind::StableFocus || k == EquilibriumKind::UnstableFocus;
}

namespace {

std::optional<Vec2> real_eigenvector(const Matrix2& a, double lambda) {
    // Rows of (A - lambda I) are (a11-l, a12) and (a21, a22-l); the
    // eigenvector is orthogonal to the larger row.
    Vec2 r1{a.a11 - lambda, a.a12};
    Vec2 r2{a.a21, a.a22 - lambda};
    Vec2 row = norm(r1) >= norm(r2) ? r1 : r2;
    if (norm(row) == 0.0) return std::nullopt; // A == lambda I, every direction
    Vec2 e{-row.y, row.x};
    double n = norm(e);
    if (n == 0.0) return std::nullopt;
    e = (1.0 / n) * e;
    // Canonical sign: first nonzero component positive.
    if (e.x < 0.0 || (e.x == 0.0 && e.y < 0.0)) e = -e;
    return e;
}

} // namespace

std::pair<EquilibriumKind, Eigenstructure> classify(const Matrix2& jac, double tol) {
    const double scale = 1.0 + jac.fnorm();
    const double tol_lambda = tol * scale;
    const double tol_det = tol * scale * scale;

    const double tr = jac.trace();
    const double det = jac.det();
    const double disc = tr * tr - 4.0 * det;

    Eigenstructure eig;
    if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        double l1 = 0.5 * (tr - sq);
        double l2 = 0.5 * (tr + sq);
        eig.lambda1 = l1;
        eig.lambda2 = l2;
        eig.repeated = (sq <= tol_lambda);
        eig.e1 = real_eigenvector(jac, l1);
        eig.e2 = real_eigenvector(jac, l2);
        if (eig.repeated && eig.e1 && eig.e2 && std::abs(cross(*eig.e1, *eig.e2)) < 1e-12) {
            // Defective double eigenvalue: one eigendirection only.
            eig.e2 = eig.e1;
        }
        if (!eig.e1 && !eig.e2) {
            // A == lambda I: conventional basis.
            eig.e1 = Vec2{1.0, 0.0};
            eig.e2 = Vec2{0.0, 1.0};
        }
    } else {
        const double re = 0.5 * tr;
        const double im = 0.5 * std::sqrt(-disc);
        eig.lambda1 = {re, -im};
        eig.lambda2 = {re, im};
    }

    EquilibriumKind kind;
    if (std::abs(det) <= tol_det) {
        kind = EquilibriumKind::DegenerateZeroDet;
    } else if (det < 0.0) {
        kind = EquilibriumKind::Saddle;
    } else if (disc >= 0.0) {
        if (eig.lambda1.real() < -tol_lambda && eig.lambda2.real() < -tol_lambda)
            kind = EquilibriumKind::StableNode;
        else if (eig.lambda1.real() > tol_lambda && eig.lambda2.real() > tol_lambda)
            kind = EquilibriumKind::UnstableNode;
        else
            kind = EquilibriumKind::NonHyperbolic;
    } else {
        if (eig.lambda1.real() < -tol_lambda)
            kind = EquilibriumKind::StableFocus;
        else if (eig.lambda1.real() > tol_lambda)
            kind = EquilibriumKind::UnstableFocus;
        else
            kind = EquilibriumKind::NonHyperbolic;
    }
    return {kind, eig};
}

namespace {

SingularPoint make_singular_point(const PlanarField& field, Point2 p, double classify_tol) {
    SingularPoint sp;
    sp.location = p;
    sp.jac = jacobian(field, p);
    auto [kind, eig] = classify(sp.jac, classify_tol);
    sp.kind = kind;
    sp.eig = eig;
    sp.residual = norm(field.eval(p));
    return sp;
}

bool newton_refine(const PlanarField& field, Point2& p, double tol, int max_iters) {
    for (int it = 0; it < max_iters; ++it) {
        Vec2 v = field.eval(p);
        if (!finite(v)) return false;
        if (norm(v) <= tol) return true;
        Matrix2 j = jacobian(field, p);
        double det = j.det();
        if (std::abs(det) < 1e-300) return false;
        // Solve J d = v.
        double dx = (v.x * j.a22 - v.y * j.a12) / det;
        double dy = (j.a11 * v.y - j.a21 * v.x) / det;
        p.x -= dx;
        p.y -= dy;
        if (!finite(p)) return false;
    }
    return norm(field.eval(p)) <= tol;
}

} // namespace

SingularPointSearch find_singular_points(const PlanarField& field, Rect region,
                                         int grid_n, double tol) {
    if (grid_n < 2) throw Error(ErrorCode::InvalidArgument, "find_singular_points: grid_n >= 2");
    if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "find_singular_points: tol > 0");

    SingularPointSearch result;
    const double hx = region.width() / grid_n;
    const double hy = region.height() / grid_n;

    // Corner field values.
    std::vector<Vec2> corners(static_cast<size_t>(grid_n + 1) * (grid_n + 1));
    auto corner = [&](int i, int j) -> Vec2& {
        return corners[static_cast<size_t>(j) * (grid_n + 1) + i];
    };
    for (int j = 0; j <= grid_n; ++j)
        for (int i = 0; i <= grid_n; ++i)
            corner(i, j) = field.eval({region.x0 + i * hx, region.y0 + j * hy});

    std::vector<Point2> found;
    for (int j = 0; j < grid_n; ++j) {
        for (int i = 0; i < grid_n; ++i) {
            Vec2 c[4] = {corner(i, j), corner(i + 1, j), corner(i, j + 1), corner(i + 1, j + 1)};
            auto straddles = [&](auto pick) {
                double lo = pick(c[0]), hi = pick(c[0]);
                for (auto& v : c) {
                    lo = std::min(lo, pick(v));
                    hi = std::max(hi, pick(v));
                }
                return lo <= 0.0 && hi >= 0.0;
            };
            if (!straddles([](Vec2 v) { return v.x; }) || !straddles([](Vec2 v) { return v.y; }))
                continue;
            ++result.seeds;
            Point2 p{region.x0 + (i + 0.5) * hx, region.y0 + (j + 0.5) * hy};
            if (!newton_refine(field, p, tol, 50)) {
                ++result.dropped;
                continue;
            }
            if (!region.contains(p, std::max(hx, hy))) {
                ++result.dropped;
                continue;
            }
            bool dup = false;
            for (auto& q : found)
                if (dist(p, q) < 10.0 * tol) { dup = true; break; }
            if (!dup) found.push_back(p);
        }
    }

    std::sort(found.begin(), found.end(), [](Point2 a, Point2 b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    for (auto& p : found) result.points.push_back(make_singular_point(field, p, 1e-8));
    return result;
}

Collinearity collinearity(Vec2 v, const Eigenstructure& eig, double tol_angle) {
    double n = norm(v);
    if (n == 0.0) throw Error(ErrorCode::ZeroVector, "collinearity: zero vector");
    if (!eig.e1 || !eig.e2)
        throw Error(ErrorCode::InvalidArgument, "collinearity: eigenvectors are complex");
    auto angle_to = [&](Vec2 e) {
        double c = std::clamp(dot(v, e) / (n * norm(e)), -1.0, 1.0);
        double a = std::acos(c);
        return std::min(a, std::acos(-1.0) - a); // unsigned, mod direction
    };
    if (angle_to(*eig.e1) <= tol_angle) return Collinearity::CollinearE1;
    if (angle_to(*eig.e2) <= tol_angle) return Collinearity::CollinearE2;
    return Collinearity::NotCollinear;
}

} // namespace eeb
