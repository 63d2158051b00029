#include "eeb/chaos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

#include "eeb/errors.hpp"
#include "eeb/manifold.hpp"

namespace eeb {

namespace {

constexpr double PI = 3.14159265358979323846;

int kind_rank(EquilibriumKind k) {
    switch (k) {
        case EquilibriumKind::UnstableNode: return 0;
        case EquilibriumKind::StableNode: return 1;
        case EquilibriumKind::UnstableFocus: return 2;
        case EquilibriumKind::StableFocus: return 3;
        case EquilibriumKind::Saddle: return 4;
        default: return 5;
    }
}

// Table 1 rows list each unordered combination once, ordered by kind.
std::string table1_row(EquilibriumKind a, EquilibriumKind b) {
    if (kind_rank(a) > kind_rank(b)) std::swap(a, b);
    return kind_name(a) + " - " + kind_name(b);
}

std::vector<Trajectory> manifold_arcs(const PlanarField& field, const SingularPoint& saddle,
                                      ManifoldDirection dir, double length) {
    std::vector<Trajectory> arcs;
    for (auto sign : {ManifoldSign::Plus, ManifoldSign::Minus})
        arcs.push_back(trace_manifold(field, saddle, dir, sign, length).arc);
    return arcs;
}

double dist_to_arcs(const std::vector<Trajectory>& arcs, Point2 p) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& a : arcs) best = std::min(best, a.distance_to(p));
    return best;
}

bool parallel_within(Vec2 a, Vec2 b, double tol_angle) {
    double n = norm(a) * norm(b);
    if (n == 0.0) return false;
    double s = std::abs(cross(a, b)) / n;
    return s <= tol_angle;
}

} // namespace

PairConfiguration detect_configuration(const EulerBranching& eb, Rect region,
                                       const DetectOpts& opts) {
    auto locate = [&](const PlanarField& field) {
        auto search = find_singular_points(field, region, opts.grid_n, opts.root_tol);
        if (search.points.empty())
            throw Error(ErrorCode::NoEquilibrium,
                        "branch " + field.name + " has no singular point in the region");
        if (search.points.size() > 1)
            throw Error(ErrorCode::MultipleEquilibria,
                        "branch " + field.name + " has " + std::to_string(search.points.size()) +
                            " singular points in the region");
        return search.points[0];
    };

    PairConfiguration cfg;
    cfg.sp_f = locate(eb.f);
    cfg.sp_g = locate(eb.g);

    double d = dist(cfg.sp_f.location, cfg.sp_g.location);
    if (d <= opts.coincident_tol) {
        cfg.distinct = false;
        throw Error(ErrorCode::CoincidentEquilibria,
                    "singular points of both branches lie in the same point");
    }

    for (const auto* sp : {&cfg.sp_f, &cfg.sp_g}) {
        if (!kind_is_hyperbolic(sp->kind))
            throw Error(ErrorCode::NonHyperbolic,
                        "singular point at (" + std::to_string(sp->location.x) + ", " +
                            std::to_string(sp->location.y) + ") is " + kind_name(sp->kind));
    }

    const double mtol = opts.manifold_tol * (1.0 + d);
    const double mlen = opts.manifold_span * d;

    if (cfg.sp_f.kind == EquilibriumKind::Saddle)
        cfg.collinear_g_at_f = collinearity(eb.g.eval(cfg.sp_f.location), cfg.sp_f.eig, opts.angle_tol);
    if (cfg.sp_g.kind == EquilibriumKind::Saddle)
        cfg.collinear_f_at_g = collinearity(eb.f.eval(cfg.sp_g.location), cfg.sp_g.eig, opts.angle_tol);

    const bool f_saddle = cfg.sp_f.kind == EquilibriumKind::Saddle;
    const bool g_saddle = cfg.sp_g.kind == EquilibriumKind::Saddle;

    if (f_saddle != g_saddle) {
        // Saddle versus node/focus: locate the other point relative to the
        // saddle's manifolds.
        const auto& saddle = f_saddle ? cfg.sp_f : cfg.sp_g;
        const auto& field = f_saddle ? eb.f : eb.g;
        Point2 other = f_saddle ? cfg.sp_g.location : cfg.sp_f.location;
        auto ws = manifold_arcs(field, saddle, ManifoldDirection::Stable, mlen);
        auto wu = manifold_arcs(field, saddle, ManifoldDirection::Unstable, mlen);
        double ds = dist_to_arcs(ws, other);
        double du = dist_to_arcs(wu, other);
        if (ds <= mtol && ds <= du) cfg.special_position = SpecialPosition::OnStableManifold;
        else if (du <= mtol) cfg.special_position = SpecialPosition::OnUnstableManifold;
        else cfg.special_position = SpecialPosition::Outside;
    }

    if (f_saddle && g_saddle) {
        auto ws_f = manifold_arcs(eb.f, cfg.sp_f, ManifoldDirection::Stable, mlen);
        auto wu_f = manifold_arcs(eb.f, cfg.sp_f, ManifoldDirection::Unstable, mlen);
        auto ws_g = manifold_arcs(eb.g, cfg.sp_g, ManifoldDirection::Stable, mlen);
        auto wu_g = manifold_arcs(eb.g, cfg.sp_g, ManifoldDirection::Unstable, mlen);
        Point2 xf = cfg.sp_f.location, xg = cfg.sp_g.location;

        // A manifold of f overlaps one of g when it passes through the other
        // saddle with tangent along the matching eigendirection.
        auto overlaps = [&](const std::vector<Trajectory>& mf, Vec2 eg) {
            if (dist_to_arcs(mf, xg) > mtol) return false;
            Vec2 tangent = eb.f.eval(xg);
            return parallel_within(tangent, eg, std::max(opts.angle_tol, 1e-6));
        };
        auto overlaps_rev = [&](const std::vector<Trajectory>& mg, Vec2 ef) {
            if (dist_to_arcs(mg, xf) > mtol) return false;
            Vec2 tangent = eb.g.eval(xf);
            return parallel_within(tangent, ef, std::max(opts.angle_tol, 1e-6));
        };

        Vec2 e_u_f = *cfg.sp_f.eig.e2;
        Vec2 e_s_g = *cfg.sp_g.eig.e1, e_u_g = *cfg.sp_g.eig.e2;

        bool s_f_over_u_g = overlaps(ws_f, e_u_g);
        bool u_f_over_s_g = overlaps(wu_f, e_s_g) || overlaps_rev(ws_g, e_u_f);
        bool s_over_s = overlaps(ws_f, e_s_g);
        bool u_over_u = overlaps(wu_f, e_u_g);

        if (s_f_over_u_g || u_f_over_s_g) {
            cfg.overlap = ManifoldOverlap::StableOverlapsUnstable;
            // Do the two non-overlapped manifolds intersect?
            const auto& ma = s_f_over_u_g ? wu_f : ws_f;
            const auto& mb = s_f_over_u_g ? ws_g : wu_g;
            for (const auto& a : ma)
                for (const auto& b : mb)
                    if (!intersect_trajectories(a, b, 1e-8).empty())
                        cfg.other_manifolds_intersect = true;
        } else if (s_over_s) {
            cfg.overlap = ManifoldOverlap::StableOverlapsStable;
        } else if (u_over_u) {
            cfg.overlap = ManifoldOverlap::UnstableOverlapsUnstable;
        }
    }

    // Collinear saddle: does the other branch's orbit through the saddle
    // stay on the manifold it is tangent to?
    auto check_flow_overlap = [&](const SingularPoint& saddle, const PlanarField& other,
                                  Collinearity col) {
        if (col == Collinearity::NotCollinear) return false;
        Vec2 e = col == Collinearity::CollinearE1 ? *saddle.eig.e1 : *saddle.eig.e2;
        IntegrateOpts io;
        io.max_space_step = 0.05 * d;
        double span = 0.5 * d / std::max(norm(other.eval(saddle.location)), 1e-12);
        Trajectory orb = full_orbit(other, saddle.location, span, io);
        for (const auto& s : orb.samples) {
            Vec2 w = s.p - saddle.location;
            double off = std::abs(cross(w, e));
            if (off > mtol * (1.0 + norm(w))) return false;
        }
        return true;
    };
    if (f_saddle && cfg.collinear_g_at_f != Collinearity::NotCollinear)
        cfg.flow_overlap = check_flow_overlap(cfg.sp_f, eb.g, cfg.collinear_g_at_f);
    else if (g_saddle && cfg.collinear_f_at_g != Collinearity::NotCollinear)
        cfg.flow_overlap = check_flow_overlap(cfg.sp_g, eb.f, cfg.collinear_f_at_g);

    return cfg;
}

// ---------------------------------------------------------------------------
// Row mapping
// ---------------------------------------------------------------------------

namespace {

struct RowInfo {
    int table = 1;
    std::string row;
    std::string theorem;
    GeometryVariant variant = GeometryVariant::Region;
    // Rows whose citations admit the interval chaotic set as an
    // alternative realization (node-node and node-saddle combinations).
    bool arc_fallback = false;
};

bool collinear_case(const PairConfiguration& cfg) {
    return (cfg.sp_f.kind == EquilibriumKind::Saddle &&
            cfg.collinear_g_at_f != Collinearity::NotCollinear) ||
           (cfg.sp_g.kind == EquilibriumKind::Saddle &&
            cfg.collinear_f_at_g != Collinearity::NotCollinear);
}

RowInfo row_info(const PairConfiguration& cfg) {
    RowInfo info;
    const bool f_saddle = cfg.sp_f.kind == EquilibriumKind::Saddle;
    const bool g_saddle = cfg.sp_g.kind == EquilibriumKind::Saddle;

    if (!collinear_case(cfg)) {
        info.table = 1;
        info.row = table1_row(cfg.sp_f.kind, cfg.sp_g.kind);
        info.theorem = (f_saddle && g_saddle) ? "saddle-noncollinear" : "sink-or-source-pair";
        info.variant = GeometryVariant::Region;
        // Focus combinations have no anti-parallel interval; node rows do.
        info.arc_fallback = !kind_is_focus(cfg.sp_f.kind) && !kind_is_focus(cfg.sp_g.kind) &&
                            !(f_saddle && g_saddle);
        return info;
    }

    info.table = 2;
    if (f_saddle && g_saddle) {
        switch (cfg.overlap) {
            case ManifoldOverlap::None:
                info.row = "unstable saddle - unstable saddle: manifolds are not overlapped";
                info.theorem = "saddle-collinear-transversal";
                info.variant = GeometryVariant::Region;
                break;
            case ManifoldOverlap::StableOverlapsUnstable:
                info.row = cfg.other_manifolds_intersect
                               ? "unstable saddle - unstable saddle: stable manifold overlaps "
                                 "unstable manifold and second manifolds intersect each other"
                               : "unstable saddle - unstable saddle: stable manifold overlaps "
                                 "unstable manifold and second manifolds do not intersect";
                info.theorem = "saddle-collinear-overlap";
                info.variant = GeometryVariant::Arc;
                break;
            case ManifoldOverlap::StableOverlapsStable:
                info.row = "unstable saddle - unstable saddle: stable manifolds are overlapped";
                info.theorem = "saddle-collinear-overlap";
                info.variant = GeometryVariant::Arc;
                break;
            case ManifoldOverlap::UnstableOverlapsUnstable:
                info.row = "unstable saddle - unstable saddle: unstable manifolds are overlapped";
                info.theorem = "saddle-collinear-overlap";
                info.variant = GeometryVariant::Arc;
                break;
        }
        return info;
    }

    EquilibriumKind other = f_saddle ? cfg.sp_g.kind : cfg.sp_f.kind;
    std::string family = "unstable saddle - " + kind_name(other);
    if (kind_is_node(other)) {
        switch (cfg.special_position) {
            case SpecialPosition::Outside:
                info.row = family + ": node lies outside manifolds";
                info.theorem = "saddle-collinear-transversal";
                info.variant = GeometryVariant::Region;
                break;
            case SpecialPosition::OnStableManifold:
                info.row = family + ": node lies on stable manifold";
                info.theorem = "saddle-collinear-overlap";
                info.variant = GeometryVariant::Arc;
                break;
            case SpecialPosition::OnUnstableManifold:
                info.row = family + ": node lies on unstable manifold";
                info.theorem = "saddle-collinear-overlap";
                info.variant = GeometryVariant::Arc;
                break;
        }
    } else {
        if (cfg.flow_overlap) {
            info.row = family + ": flow overlaps manifold";
            info.theorem = "saddle-collinear-overlap";
            info.variant = GeometryVariant::Arc;
        } else {
            info.row = family + ": transversal";
            info.theorem = "saddle-collinear-transversal";
            info.variant = GeometryVariant::Region;
        }
    }
    return info;
}

} // namespace

// ---------------------------------------------------------------------------
// Geometry construction
// ---------------------------------------------------------------------------

namespace {

std::vector<double> theta_on_segment(const EulerBranching& eb, Point2 a, Point2 b, int n) {
    std::vector<double> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        double s = n == 1 ? 0.5 : static_cast<double>(i) / (n - 1);
        Point2 p = a + s * (b - a);
        Vec2 vf = eb.f.eval(p);
        Vec2 vg = eb.g.eval(p);
        double nn = norm(vf) * norm(vg);
        if (nn <= 0.0)
            throw Error(ErrorCode::ZeroVector, "|f||g| vanishes on the arc");
        out.push_back(std::acos(std::clamp(dot(vf, vg) / nn, -1.0, 1.0)));
    }
    return out;
}

bool segment_is_arc(const EulerBranching& eb, Point2 a, Point2 b, int n, double theta_tol) {
    if (!eb.domain.contains(a) || !eb.domain.contains(b)) return false;
    try {
        auto thetas = theta_on_segment(eb, a, b, n);
        for (double th : thetas)
            if (std::abs(th - PI) > theta_tol) return false;
        return true;
    } catch (const Error&) {
        return false;
    }
}

ChaoticSetGeometry make_arc(Point2 a, Point2 b, int n) {
    ChaoticSetGeometry geo;
    geo.variant = GeometryVariant::Arc;
    geo.arc_a = a;
    geo.arc_b = b;
    for (int i = 0; i < n; ++i) {
        double s = n == 1 ? 0.5 : static_cast<double>(i) / (n - 1);
        geo.arc_points.push_back(a + s * (b - a));
    }
    geo.theta_checked = true;
    return geo;
}

} // namespace

ChaoticSetGeometry construct_chaotic_set(const EulerBranching& eb,
                                         const PairConfiguration& config,
                                         const CertifyOpts& opts) {
    RowInfo info = row_info(config);
    Point2 xf = config.sp_f.location;
    Point2 xg = config.sp_g.location;
    double d = dist(xf, xg);
    Vec2 u = (1.0 / d) * (xg - xf);
    Vec2 nrm{-u.y, u.x};
    Point2 mid = xf + 0.5 * d * u;

    // Anti-parallel segment candidates: between the equilibria, on the rays
    // beyond either one, and along a collinear saddle eigendirection.
    auto try_arc = [&]() -> std::optional<ChaoticSetGeometry> {
        const double m = opts.endpoint_margin * d;
        const double len = 0.9 * d;
        struct Cand {
            Point2 a, b;
        };
        std::vector<Cand> cands;
        cands.push_back({xf + m * u, xg + (-m) * u});
        cands.push_back({xg + m * u, xg + (m + len) * u});
        cands.push_back({xf + (-m) * u, xf + (-(m + len)) * u});
        const bool f_saddle = config.sp_f.kind == EquilibriumKind::Saddle;
        const SingularPoint& saddle = f_saddle ? config.sp_f : config.sp_g;
        Point2 xs = saddle.location;
        Collinearity col = f_saddle ? config.collinear_g_at_f : config.collinear_f_at_g;
        if (col != Collinearity::NotCollinear && saddle.eig.e1 && saddle.eig.e2) {
            Vec2 e = col == Collinearity::CollinearE1 ? *saddle.eig.e1 : *saddle.eig.e2;
            cands.push_back({xs + m * e, xs + (m + len) * e});
            cands.push_back({xs + (-m) * e, xs + (-(m + len)) * e});
        }
        for (const auto& c : cands)
            if (segment_is_arc(eb, c.a, c.b, opts.arc_samples, opts.theta_tol))
                return make_arc(c.a, c.b, opts.arc_samples);
        return std::nullopt;
    };

    if (info.variant == GeometryVariant::Arc) {
        if (auto geo = try_arc()) return *geo;
        throw Error(ErrorCode::ConstructionFailed,
                    "no anti-parallel segment found for the arc variant");
    }

    // Region: loop construction, explicit seeds first, then the retry
    // ladder of offsets around the segment between the equilibria.
    std::vector<std::pair<Point2, Point2>> attempts;
    if (opts.psi_seed && opts.phi_seed) attempts.push_back({*opts.psi_seed, *opts.phi_seed});
    if (!opts.psi_seed || !opts.phi_seed) {
        std::vector<Point2> psi_cands, phi_cands;
        psi_cands.push_back(xf);
        psi_cands.push_back(xg);
        for (double o : {0.05, 0.1, 0.2, 0.4}) {
            for (double s : {1.0, -1.0}) {
                psi_cands.push_back(mid + (s * o * d) * nrm);
                phi_cands.push_back(mid + (s * 0.5 * o * d) * nrm);
                psi_cands.push_back(xf + (s * o * d) * nrm);
                phi_cands.push_back(xf + (s * 0.5 * o * d) * nrm);
            }
        }
        for (double s : {1.0, -1.0}) {
            psi_cands.push_back(mid + (0.35 * d) * u + (s * 0.2 * d) * nrm);
            psi_cands.push_back(mid + (-0.35 * d) * u + (s * 0.2 * d) * nrm);
            phi_cands.push_back(xf + (-3.0 * d) * u + (s * 0.3 * d) * nrm);
            phi_cands.push_back(xg + (3.0 * d) * u + (s * 0.3 * d) * nrm);
        }
        phi_cands.push_back(mid + (0.25 * d) * u);
        phi_cands.push_back(mid + (-0.25 * d) * u);
        phi_cands.push_back(xf + (-1.5 * d) * u);
        phi_cands.push_back(xf + (-3.0 * d) * u);
        phi_cands.push_back(xg + (1.5 * d) * u);
        phi_cands.push_back(xg + (3.0 * d) * u);
        for (const auto& ps : psi_cands)
            for (const auto& ph : phi_cands) {
                Point2 psi = opts.psi_seed.value_or(ps);
                Point2 phi = opts.phi_seed.value_or(ph);
                attempts.push_back({psi, phi});
            }
    }

    // A usable region keeps clear of degeneracy: junctions separated on the
    // scale of the pair and neither singular point strictly interior.
    auto acceptable = [&](const LoopRegion& loop) {
        if (loop.diameter < 0.02 * d) return false;
        for (Point2 eq : {xf, xg}) {
            if (loop.contains(eq, 0.0) &&
                loop.distance_to_boundary(eq) > 1e-6 * (1.0 + loop.diameter))
                return false;
        }
        return true;
    };

    // Keep the widest acceptable loop; stop early once it is comparable to
    // the separation of the singular points.
    std::optional<LoopRegion> best;
    int tried = 0;
    for (const auto& [psi, phi] : attempts) {
        if (tried++ >= opts.max_retries) break;
        if (!eb.domain.contains(psi) || !eb.domain.contains(phi)) continue;
        if (dist(psi, phi) < 1e-12) continue;
        try {
            LoopRegion loop = construct_loop(eb, psi, phi, opts.loop);
            if (!acceptable(loop)) continue;
            if (!best || loop.diameter > best->diameter) best = std::move(loop);
            if (best->diameter >= 0.4 * d) break;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NeedTwoCrossings) throw;
        }
    }
    if (best) {
        ChaoticSetGeometry geo;
        geo.variant = GeometryVariant::Region;
        geo.region = std::move(*best);
        return geo;
    }
    // Node rows admit the interval realization when no loop was found
    // (straight-orbit pairs cannot double-cross).
    if (info.arc_fallback) {
        if (auto geo = try_arc()) return *geo;
    }
    throw Error(ErrorCode::ConstructionFailed,
                "loop construction failed for all seed candidates");
}

std::vector<double> theta_profile(const EulerBranching& eb, const ChaoticSetGeometry& arc, int n) {
    if (arc.variant != GeometryVariant::Arc)
        throw Error(ErrorCode::InvalidArgument, "theta_profile requires arc geometry");
    return theta_on_segment(eb, arc.arc_a, arc.arc_b, n);
}

// ---------------------------------------------------------------------------
// Certification
// ---------------------------------------------------------------------------

namespace {

bool exits_ball(const PlanarField& field, Point2 center, double delta, double t_max) {
    EventSpec exit_event;
    exit_event.fn = [center, delta](double, Point2 p) { return dist(p, center) - delta; };
    exit_event.direction = EventDirection::Rising;
    exit_event.terminal = true;
    IntegrateOpts io;
    io.max_space_step = 0.5 * delta;
    const PlanarField rev = reversed(field);
    for (const PlanarField* use : {&field, &rev}) {
        auto [traj, hits] = integrate_until(*use, center, 0.0, {exit_event}, t_max, io);
        (void)traj;
        if (hits.empty()) return false;
    }
    return true;
}

} // namespace

ChaosCertificate certify(const EulerBranching& eb, const PairConfiguration& config,
                         const CertifyOpts& opts) {
    ChaosCertificate cert;
    cert.config = config;

    if (!kind_is_hyperbolic(config.sp_f.kind) || !kind_is_hyperbolic(config.sp_g.kind)) {
        cert.refusals.push_back("NonHyperbolic: a branch has a non-hyperbolic singular point");
        return cert;
    }
    if (!config.distinct || dist(config.sp_f.location, config.sp_g.location) <= opts.detect.coincident_tol) {
        cert.refusals.push_back("CoincidentEquilibria: singular points coincide");
        return cert;
    }

    double d = dist(config.sp_f.location, config.sp_g.location);
    double delta = opts.delta_scale * d;
    cert.unbounded_proxy_f = exits_ball(eb.g, config.sp_f.location, delta, opts.unbounded_t_max);
    cert.unbounded_proxy_g = exits_ball(eb.f, config.sp_g.location, delta, opts.unbounded_t_max);
    if (!cert.unbounded_proxy_f && !cert.unbounded_proxy_g) {
        cert.refusals.push_back(
            "UnboundedProxyFailed: neither branch's orbit through the other's singular point "
            "leaves the delta-ball in finite time");
        return cert;
    }

    RowInfo info = row_info(config);
    cert.table = info.table;
    cert.row = info.row;
    cert.theorem = info.theorem;

    try {
        cert.geometry = construct_chaotic_set(eb, config, opts);
    } catch (const Error& e) {
        cert.refusals.push_back(std::string(error_code_name(e.code())) + ": " + e.what());
        return cert;
    }

    cert.certified = true;
    cert.devaney = true;
    if (cert.geometry->variant == GeometryVariant::Region) {
        cert.li_yorke = true;
        cert.distributional = true;
    } else {
        // theta profile re-checked on the final arc
        auto thetas = theta_profile(eb, *cert.geometry, opts.arc_samples);
        double worst = 0.0;
        for (double th : thetas) worst = std::max(worst, std::abs(th - PI));
        if (worst <= opts.theta_tol) {
            cert.li_yorke = true;
            cert.distributional = true;
            cert.geometry->theta_checked = true;
        }
    }
    return cert;
}

std::string ChaosCertificate::to_json() const {
    nlohmann::json j;
    j["schema"] = 1;
    j["certified"] = certified;

    nlohmann::json jc;
    auto sp_json = [](const SingularPoint& sp) {
        nlohmann::json s;
        s["location"] = {sp.location.x, sp.location.y};
        s["kind"] = kind_name(sp.kind);
        s["eigenvalues"] = {{sp.eig.lambda1.real(), sp.eig.lambda1.imag()},
                            {sp.eig.lambda2.real(), sp.eig.lambda2.imag()}};
        s["residual"] = sp.residual;
        return s;
    };
    jc["f"] = sp_json(config.sp_f);
    jc["g"] = sp_json(config.sp_g);
    jc["distinct"] = config.distinct;
    auto col_name = [](Collinearity c) {
        switch (c) {
            case Collinearity::NotCollinear: return "not_collinear";
            case Collinearity::CollinearE1: return "collinear_e1";
            case Collinearity::CollinearE2: return "collinear_e2";
        }
        return "?";
    };
    jc["collinear_g_at_f"] = col_name(config.collinear_g_at_f);
    jc["collinear_f_at_g"] = col_name(config.collinear_f_at_g);
    j["config"] = jc;

    if (geometry) {
        nlohmann::json jg;
        jg["variant"] = geometry->variant == GeometryVariant::Region ? "region" : "arc";
        if (geometry->variant == GeometryVariant::Region && geometry->region) {
            nlohmann::json pts = nlohmann::json::array();
            for (const auto& p : geometry->region->polygon) pts.push_back({p.x, p.y});
            jg["boundary_points"] = pts;
        } else {
            nlohmann::json pts = nlohmann::json::array();
            for (const auto& p : geometry->arc_points) pts.push_back({p.x, p.y});
            jg["arc_points"] = pts;
            jg["theta_checked"] = geometry->theta_checked;
        }
        j["geometry"] = jg;
    } else {
        j["geometry"] = nullptr;
    }

    j["flags"] = {{"devaney", devaney}, {"li_yorke", li_yorke}, {"distributional", distributional}};
    j["provenance"] = {{"theorem", theorem}, {"table", table}, {"row", row}};
    j["refusals"] = refusals;
    j["unbounded_proxy"] = {{"at_f_point", unbounded_proxy_f}, {"at_g_point", unbounded_proxy_g}};
    return j.dump(2);
}

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

ScrambleReport scrambled_diagnostic(const SwitchedSolution& a, const SwitchedSolution& b,
                                    double horizon, double eps, int grid_n) {
    double te = std::min({horizon, a.t_end(), b.t_end()});
    ScrambleReport rep;
    rep.min_dist = std::numeric_limits<double>::infinity();
    int below = 0;
    for (int i = 0; i < grid_n; ++i) {
        double t = te * i / (grid_n - 1);
        double dd = dist(a.at(t), b.at(t));
        rep.min_dist = std::min(rep.min_dist, dd);
        rep.max_dist = std::max(rep.max_dist, dd);
        if (dd < eps) ++below;
    }
    rep.fraction_below_eps = static_cast<double>(below) / grid_n;
    return rep;
}

SolutionSetReport invariance_and_density_report(const std::vector<SwitchedSolution>& sols,
                                                const LoopRegion& region, int samples_per_solution,
                                                int grid_n, double boundary_tol) {
    SolutionSetReport rep;
    const Rect bb = region.bbox;

    std::vector<bool> cell_in_region(static_cast<size_t>(grid_n) * grid_n, false);
    for (int j = 0; j < grid_n; ++j)
        for (int i = 0; i < grid_n; ++i) {
            Point2 c{bb.x0 + bb.width() * (i + 0.5) / grid_n,
                     bb.y0 + bb.height() * (j + 0.5) / grid_n};
            if (region.contains(c, boundary_tol))
                cell_in_region[static_cast<size_t>(j) * grid_n + i] = true;
        }
    for (bool b : cell_in_region)
        if (b) ++rep.region_cells;

    bool any_uncovered = false;
    for (const auto& sol : sols) {
        SolutionSetReport::PerSolution ps;
        auto samples = sol.sample_uniform(samples_per_solution);
        int inside = 0;
        std::vector<bool> covered(cell_in_region.size(), false);
        for (const auto& s : samples) {
            if (region.contains(s.p, boundary_tol)) ++inside;
            int i = static_cast<int>((s.p.x - bb.x0) / bb.width() * grid_n);
            int j = static_cast<int>((s.p.y - bb.y0) / bb.height() * grid_n);
            if (i >= 0 && i < grid_n && j >= 0 && j < grid_n)
                covered[static_cast<size_t>(j) * grid_n + i] = true;
        }
        ps.inside_fraction = static_cast<double>(inside) / samples.size();
        for (size_t k = 0; k < covered.size(); ++k)
            if (cell_in_region[k] && !covered[k]) ++ps.uncovered_cells;
        if (ps.uncovered_cells > 0) any_uncovered = true;
        rep.per_solution.push_back(ps);
    }

    bool all_inside = !rep.per_solution.empty();
    for (const auto& ps : rep.per_solution)
        if (ps.inside_fraction < 1.0) all_inside = false;
    rep.pass = sols.size() >= 2 && all_inside && any_uncovered;
    return rep;
}

} // namespace eeb
