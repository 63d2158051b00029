#include <cmath>

#include "doctest.h"
#include "json.hpp"

#include "eeb/chaos.hpp"
#include "eeb/errors.hpp"
#include "table_fixtures.hpp"

using namespace eeb;

namespace {

const double PI = std::acos(-1.0);

EulerBranching star_pair() { // stable stars at (0,0) and (2,0): straight orbits
    EulerBranching eb;
    eb.domain = {-4, -4, 6, 4};
    eb.f = PlanarField::linear("f", {-1, 0, 0, -1}, {0, 0}, eb.domain);
    eb.g = PlanarField::linear("g", {-1, 0, 0, -1}, {2, 0}, eb.domain);
    return eb;
}

} // namespace

TEST_CASE("detect_configuration: distinct stable-node pair") {
    PairConfiguration cfg = detect_configuration(star_pair(), {-4, -4, 6, 4});
    CHECK(cfg.sp_f.kind == EquilibriumKind::StableNode);
    CHECK(cfg.sp_g.kind == EquilibriumKind::StableNode);
    CHECK(cfg.distinct);
    CHECK(cfg.collinear_g_at_f == Collinearity::NotCollinear);
}

TEST_CASE("detect_configuration: node on a saddle manifold") {
    EulerBranching eb;
    eb.domain = {-4, -4, 6, 4};
    eb.f = PlanarField::linear("f", {1, 0, 0, -1}, {0, 0}, eb.domain);
    eb.g = PlanarField::linear("g", {-1, 0, 0, -1}, {1, 0}, eb.domain);
    PairConfiguration cfg = detect_configuration(eb, eb.domain);
    CHECK(cfg.sp_f.kind == EquilibriumKind::Saddle);
    CHECK(cfg.sp_g.kind == EquilibriumKind::StableNode);
    // (1,0) lies on the x-axis, the unstable manifold of f.
    CHECK(cfg.special_position == SpecialPosition::OnUnstableManifold);
}

TEST_CASE("detect_configuration: coincident equilibria are refused") {
    EulerBranching eb;
    eb.domain = {-2, -2, 2, 2};
    eb.f = PlanarField::linear("f", {-1, 0, 0, -1}, {0, 0}, eb.domain);
    eb.g = PlanarField::linear("g", {-2, 0, 0, -2}, {0, 0}, eb.domain);
    try {
        (void)detect_configuration(eb, eb.domain);
        FAIL("expected CoincidentEquilibria");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CoincidentEquilibria);
    }
}

TEST_CASE("detect_configuration: a center branch is refused") {
    EulerBranching eb;
    eb.domain = {-3, -3, 3, 3};
    eb.f = PlanarField::linear("f", {0, -1, 1, 0}, {0, 0}, eb.domain); // pure rotation
    eb.g = PlanarField::linear("g", {-1, 0, 0, -1}, {1, 1}, eb.domain);
    try {
        (void)detect_configuration(eb, eb.domain);
        FAIL("expected NonHyperbolic");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonHyperbolic);
    }
}

TEST_CASE("certify: full combination-table matrix") {
    for (const auto& fx : fixtures::table_fixtures()) {
        CAPTURE(fx.id);
        PairConfiguration cfg = detect_configuration(fx.eb, fx.eb.domain);
        ChaosCertificate cert = certify(fx.eb, cfg);
        CHECK(cert.certified);
        CHECK(cert.table == fx.table);
        CHECK(cert.row == fx.row);
        REQUIRE(cert.geometry.has_value());
        CHECK(cert.geometry->variant == fx.variant);
        CHECK(cert.devaney);
        CHECK(cert.li_yorke);
        CHECK(cert.distributional);
        // Monotonicity: the stronger flags imply a chaotic set.
        CHECK((!cert.li_yorke || cert.devaney));
        CHECK((!cert.distributional || cert.devaney));
        CHECK((cert.unbounded_proxy_f || cert.unbounded_proxy_g));
        if (fx.variant == GeometryVariant::Arc) CHECK(cert.geometry->theta_checked);
    }
}

TEST_CASE("certify: straight-orbit node pair falls back to the interval set") {
    EulerBranching eb = star_pair();
    PairConfiguration cfg = detect_configuration(eb, eb.domain);
    ChaosCertificate cert = certify(eb, cfg);
    CHECK(cert.certified);
    CHECK(cert.row == "stable node - stable node");
    REQUIRE(cert.geometry.has_value());
    // Two star nodes have only straight orbits, so no two-crossing loop
    // exists; the anti-parallel segment between them realizes the set.
    CHECK(cert.geometry->variant == GeometryVariant::Arc);
    CHECK(cert.devaney);
    CHECK(cert.li_yorke);
    CHECK(cert.distributional);
    // The trimmed segment is {(x,0): 0.1 <= x <= 1.9} for margin 0.05*d.
    CHECK(cert.geometry->arc_a.x == doctest::Approx(0.1));
    CHECK(cert.geometry->arc_b.x == doctest::Approx(1.9));
}

TEST_CASE("certify: refusal soundness") {
    SUBCASE("non-hyperbolic config is never certified") {
        EulerBranching eb;
        eb.domain = {-3, -3, 3, 3};
        eb.f = PlanarField::linear("f", {0, -1, 1, 0}, {0, 0}, eb.domain);
        eb.g = PlanarField::linear("g", {-1, 0, 0, -1}, {1, 1}, eb.domain);
        PairConfiguration cfg;
        auto sf = find_singular_points(eb.f, eb.domain, 16);
        auto sg = find_singular_points(eb.g, eb.domain, 16);
        REQUIRE(sf.points.size() == 1);
        REQUIRE(sg.points.size() == 1);
        cfg.sp_f = sf.points[0];
        cfg.sp_g = sg.points[0];
        ChaosCertificate cert = certify(eb, cfg);
        CHECK_FALSE(cert.certified);
        CHECK_FALSE(cert.devaney);
        REQUIRE_FALSE(cert.refusals.empty());
        CHECK(cert.refusals.front().find("NonHyperbolic") != std::string::npos);
    }
    SUBCASE("coincident equilibria are never certified") {
        EulerBranching eb;
        eb.domain = {-2, -2, 2, 2};
        eb.f = PlanarField::linear("f", {-1, 0, 0, -1}, {0, 0}, eb.domain);
        eb.g = PlanarField::linear("g", {-2, 0, 0, -2}, {0, 0}, eb.domain);
        PairConfiguration cfg;
        cfg.sp_f = find_singular_points(eb.f, eb.domain, 16).points.at(0);
        cfg.sp_g = find_singular_points(eb.g, eb.domain, 16).points.at(0);
        ChaosCertificate cert = certify(eb, cfg);
        CHECK_FALSE(cert.certified);
        REQUIRE_FALSE(cert.refusals.empty());
        CHECK(cert.refusals.front().find("Coincident") != std::string::npos);
    }
}

TEST_CASE("theta_profile") {
    EulerBranching eb = star_pair();

    SUBCASE("anti-parallel by construction on the inter-node segment") {
        ChaoticSetGeometry arc;
        arc.variant = GeometryVariant::Arc;
        arc.arc_a = {0.1, 0.0};
        arc.arc_b = {1.9, 0.0};
        auto thetas = theta_profile(eb, arc, 101);
        for (double th : thetas) CHECK(std::abs(th - PI) <= 1e-12);
    }
    SUBCASE("equal branches give theta = 0 and fail certification") {
        EulerBranching same = eb;
        same.g = same.f;
        ChaoticSetGeometry arc;
        arc.variant = GeometryVariant::Arc;
        arc.arc_a = {0.1, 0.5};
        arc.arc_b = {1.9, 0.5};
        // acos near +1 amplifies round-off to sqrt(eps)
        auto thetas = theta_profile(same, arc, 11);
        for (double th : thetas) CHECK(std::abs(th) <= 1e-7);
    }
    SUBCASE("near-anti-parallel pair stays within 1e-9 of pi") {
        EulerBranching cst;
        cst.domain = {-2, -2, 2, 2};
        cst.f.name = "f";
        cst.f.domain = cst.domain;
        cst.f.eval = [](Point2) -> Vec2 { return {1, 0}; };
        cst.g.name = "g";
        cst.g.domain = cst.domain;
        cst.g.eval = [](Point2) -> Vec2 { return {-2, 1e-9}; };
        ChaoticSetGeometry arc;
        arc.variant = GeometryVariant::Arc;
        arc.arc_a = {-1, 0};
        arc.arc_b = {1, 0};
        auto thetas = theta_profile(cst, arc, 7);
        for (double th : thetas) CHECK(std::abs(th - PI) <= 1e-9);
    }
    SUBCASE("zero field value at a sample is an error") {
        ChaoticSetGeometry arc;
        arc.variant = GeometryVariant::Arc;
        arc.arc_a = {0.0, 0.0}; // f vanishes at its node
        arc.arc_b = {1.0, 0.0};
        CHECK_THROWS_AS((void)theta_profile(eb, arc, 5), Error);
    }
    SUBCASE("invariant under positive rescaling of one branch") {
        ChaoticSetGeometry arc;
        arc.variant = GeometryVariant::Arc;
        arc.arc_a = {0.3, 0.2};
        arc.arc_b = {1.7, -0.4};
        auto base = theta_profile(eb, arc, 33);
        EulerBranching scaled = eb;
        auto fe = eb.f.eval;
        scaled.f.eval = [fe](Point2 p) { return 17.0 * fe(p); };
        auto scaled_thetas = theta_profile(scaled, arc, 33);
        for (size_t i = 0; i < base.size(); ++i)
            CHECK(std::abs(base[i] - scaled_thetas[i]) <= 1e-12);
    }
}

TEST_CASE("scrambled_diagnostic") {
    SUBCASE("a solution against itself is identically zero") {
        EulerBranching eb = fixtures::node_pair_reference();
        SwitchingSchedule empty;
        SwitchedSolution sol = solve_switched(eb, {-1.5, 1.0}, empty, 2.0);
        auto rep = scrambled_diagnostic(sol, sol, 2.0, 1e-3);
        CHECK(rep.min_dist == 0.0);
        CHECK(rep.max_dist == 0.0);
        CHECK(rep.fraction_below_eps == 1.0);
    }
    SUBCASE("parallel constant-field solutions stay at distance 1") {
        EulerBranching eb;
        eb.domain = {-10, -10, 10, 10};
        eb.f.name = "f";
        eb.f.domain = eb.domain;
        eb.f.eval = [](Point2) -> Vec2 { return {1, 0}; };
        eb.g.name = "g";
        eb.g.domain = eb.domain;
        eb.g.eval = [](Point2) -> Vec2 { return {-1, 0}; };
        SwitchingSchedule empty;
        SwitchedSolution a = solve_switched(eb, {0, 0}, empty, 5.0);
        SwitchedSolution b = solve_switched(eb, {0, 1}, empty, 5.0);
        auto rep = scrambled_diagnostic(a, b, 5.0, 1e-3);
        CHECK(rep.min_dist == doctest::Approx(1.0));
        CHECK(rep.max_dist == doctest::Approx(1.0));
        CHECK(rep.fraction_below_eps == 0.0);
    }
    SUBCASE("gamma0 against gamma_xj on the reference loop; symmetric") {
        EulerBranching eb = fixtures::node_pair_reference();
        LoopRegion loop = fixtures::node_pair_loop();
        Point2 x0{-1.5, 1.0};
        Gamma0 g0 = build_gamma0(eb, loop, x0);
        SwitchedSolution gxj = build_gamma_xj(eb, loop, x0, {-1.8, 1.0});
        double horizon = 10.0 * g0.period;
        auto rep = scrambled_diagnostic(g0.solution, gxj, horizon, 1e-2);
        CHECK(rep.min_dist < 1e-2);
        CHECK(rep.max_dist > 0.1 * loop.diameter);
        CHECK(rep.fraction_below_eps > 0.0);
        auto rep2 = scrambled_diagnostic(gxj, g0.solution, horizon, 1e-2);
        CHECK(rep2.min_dist == rep.min_dist);
        CHECK(rep2.max_dist == rep.max_dist);
        CHECK(rep2.fraction_below_eps == rep.fraction_below_eps);
    }
}

TEST_CASE("invariance_and_density_report") {
    EulerBranching eb = fixtures::node_pair_reference();
    LoopRegion loop = fixtures::node_pair_loop();
    Point2 x0{-1.5, 1.0};
    Gamma0 g0 = build_gamma0(eb, loop, x0);
    SwitchedSolution gxj = build_gamma_xj(eb, loop, x0, {-1.8, 1.0});

    SUBCASE("gamma solutions stay inside and do not cover the region") {
        auto rep = invariance_and_density_report({g0.solution, gxj}, loop);
        REQUIRE(rep.per_solution.size() == 2);
        CHECK(rep.per_solution[0].inside_fraction == 1.0);
        CHECK(rep.per_solution[1].inside_fraction == 1.0);
        CHECK(rep.per_solution[0].uncovered_cells >= 1);
        CHECK(rep.pass);
    }
    SUBCASE("an escaping single-branch solution fails the report") {
        SwitchingSchedule empty;
        SwitchedSolution escape = solve_switched(eb, x0, empty, 5.0);
        auto rep = invariance_and_density_report({g0.solution, escape}, loop);
        CHECK(rep.per_solution[1].inside_fraction < 1.0);
        CHECK_FALSE(rep.pass);
    }
    SUBCASE("fewer than two solutions is a vacuous failure") {
        auto none = invariance_and_density_report({}, loop);
        CHECK_FALSE(none.pass);
        auto one = invariance_and_density_report({g0.solution}, loop);
        CHECK_FALSE(one.pass);
    }
}

TEST_CASE("certificate json schema") {
    EulerBranching eb = fixtures::node_pair_reference();
    PairConfiguration cfg = detect_configuration(eb, eb.domain);
    CertifyOpts co;
    co.psi_seed = Point2{-1, 0};
    co.phi_seed = Point2{-2, 1};
    ChaosCertificate cert = certify(eb, cfg, co);
    REQUIRE(cert.certified);

    auto j = nlohmann::json::parse(cert.to_json());
    CHECK(j.at("schema") == 1);
    CHECK(j.at("certified") == true);
    CHECK(j.at("flags").at("devaney") == true);
    CHECK(j.at("flags").at("li_yorke") == true);
    CHECK(j.at("flags").at("distributional") == true);
    CHECK(j.at("provenance").at("table") == 1);
    CHECK(j.at("provenance").at("row") == "stable node - stable node");
    CHECK(j.at("geometry").at("variant") == "region");
    CHECK(j.at("geometry").at("boundary_points").size() > 3);
    CHECK(j.at("refusals").empty());
}
