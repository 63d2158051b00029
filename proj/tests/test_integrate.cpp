#include <cmath>

#include "doctest.h"

#include "eeb/errors.hpp"
#include "eeb/integrate.hpp"

using namespace eeb;

namespace {

const double PI = std::acos(-1.0);

PlanarField growth_field() { // xdot = (x, y), closed form e^t
    return PlanarField::linear("growth", {1, 0, 0, 1}, {0, 0}, {-50, -50, 50, 50});
}
PlanarField rotation_field() { // xdot = (-y, x), rotation by t
    return PlanarField::linear("rot", {0, -1, 1, 0}, {0, 0}, {-5, -5, 5, 5});
}
PlanarField decay_field() { // xdot = (-x, -y), closed form e^{-t}
    return PlanarField::linear("decay", {-1, 0, 0, -1}, {0, 0}, {-10, -10, 10, 10});
}

} // namespace

TEST_CASE("integrate: exponential growth closed form") {
    Trajectory tr = integrate(growth_field(), {1, 0}, 0.0, 1.0);
    CHECK(std::abs(tr.back().x - std::exp(1.0)) < 1e-6);
    CHECK(std::abs(tr.back().y) < 1e-9);
}

TEST_CASE("integrate: quarter rotation") {
    Trajectory tr = integrate(rotation_field(), {1, 0}, 0.0, PI / 2.0);
    CHECK(std::abs(tr.back().x) < 1e-6);
    CHECK(std::abs(tr.back().y - 1.0) < 1e-6);
}

TEST_CASE("integrate: decay to 1e-10 of the start") {
    Trajectory tr = integrate(decay_field(), {3, 4}, 0.0, 10.0);
    CHECK(std::abs(tr.back().x - 3.0 * std::exp(-10.0)) < 1e-9);
    CHECK(std::abs(tr.back().y - 4.0 * std::exp(-10.0)) < 1e-9);
}

TEST_CASE("integrate: halving rtol never increases the rotation endpoint error") {
    double prev = std::numeric_limits<double>::infinity();
    for (double rtol = 1e-5; rtol > 0.9e-9; rtol /= 2.0) {
        IntegrateOpts opts;
        opts.rtol = rtol;
        Trajectory tr = integrate(rotation_field(), {1, 0}, 0.0, 2.0 * PI, opts);
        double err = dist(tr.back(), {1, 0});
        CHECK(err <= prev * 1.0000001);
        CHECK(err <= 100.0 * rtol);
        prev = err;
    }
}

TEST_CASE("integrate: time reversal returns to the start") {
    PlanarField f;
    f.name = "shear";
    f.domain = {-20, -20, 20, 20};
    f.eval = [](Point2 p) -> Vec2 { return {p.y, -std::sin(p.x)}; }; // pendulum
    Trajectory fwd = integrate(f, {1.0, 0.3}, 0.0, 6.0);
    REQUIRE_FALSE(fwd.domain_exit);
    Trajectory back = integrate(f, fwd.back(), 6.0, 0.0);
    CHECK(dist(back.front(), {1.0, 0.3}) < 1e-7);
}

TEST_CASE("integrate: reversed-time integration mirrors forward time") {
    Trajectory tr = integrate(rotation_field(), {1, 0}, 0.0, -PI / 2.0);
    // samples come back ascending in t, starting at -pi/2
    CHECK(tr.t_front() == doctest::Approx(-PI / 2.0));
    CHECK(std::abs(tr.front().x) < 1e-6);
    CHECK(std::abs(tr.front().y + 1.0) < 1e-6);
}

TEST_CASE("integrate: passing near a known equilibrium sets the flag") {
    IntegrateOpts opts;
    opts.equilibria = {{0, 0}};
    opts.near_equilibrium_radius = 1e-3;
    Trajectory close = integrate(decay_field(), {1, 0}, 0.0, 10.0, opts);
    CHECK(close.near_equilibrium);
    opts.near_equilibrium_radius = 1e-12;
    Trajectory far = integrate(decay_field(), {1, 0}, 0.0, 2.0, opts);
    CHECK_FALSE(far.near_equilibrium);
}

TEST_CASE("integrate: domain exit is flagged and truncated at the boundary") {
    Trajectory tr = integrate(growth_field(), {10, 10}, 0.0, 10.0);
    CHECK(tr.domain_exit);
    Point2 e = tr.back();
    CHECK(std::max(std::abs(e.x), std::abs(e.y)) == doctest::Approx(50.0).epsilon(1e-6));
}

TEST_CASE("integrate: dense output matches half-step re-integration") {
    PlanarField f;
    f.name = "nl";
    f.domain = {-20, -20, 20, 20};
    f.eval = [](Point2 p) -> Vec2 { return {p.y, -p.x - 0.2 * p.y * p.y}; };
    for (double rtol : {1e-6, 1e-9}) {
        IntegrateOpts opts;
        opts.rtol = rtol;
        Trajectory tr = integrate(f, {1.5, 0}, 0.0, 5.0, opts);
        for (size_t i = 0; i + 1 < tr.samples.size(); i += 3) {
            double tm = 0.5 * (tr.samples[i].t + tr.samples[i + 1].t);
            Point2 interp = tr.at(tm);
            Trajectory half = integrate(f, tr.samples[i].p, tr.samples[i].t, tm, opts);
            double scale = opts.atol + rtol * std::max(1.0, norm(interp - Point2{0, 0}));
            CHECK(dist(interp, half.back()) <= 10.0 * scale);
        }
    }
}

TEST_CASE("integrate_until: exponential hit of the unit circle at ln 2") {
    EventSpec ev;
    ev.fn = [](double, Point2 p) { return norm(Vec2{p.x, p.y}) - 1.0; };
    ev.direction = EventDirection::Rising;
    auto [tr, hits] = integrate_until(growth_field(), {0.5, 0}, 0.0, {ev}, 5.0);
    REQUIRE(hits.size() == 1);
    CHECK(std::abs(hits[0].t - std::log(2.0)) < 1e-9);
    CHECK(tr.event_stop);
    CHECK(std::abs(ev.fn(hits[0].t, hits[0].p)) <= 1e-10);
}

TEST_CASE("integrate_until: falling x-coordinate of the rotation at pi/2") {
    EventSpec ev;
    ev.fn = [](double, Point2 p) { return p.x; };
    ev.direction = EventDirection::Falling;
    auto [tr, hits] = integrate_until(rotation_field(), {1, 0}, 0.0, {ev}, 5.0);
    (void)tr;
    REQUIRE(hits.size() == 1);
    CHECK(std::abs(hits[0].t - PI / 2.0) < 1e-9);
}

TEST_CASE("integrate_until: stable node entering the unit ball at ln 2") {
    EventSpec ev;
    ev.fn = [](double, Point2 p) { return norm(Vec2{p.x, p.y}) - 1.0; };
    ev.direction = EventDirection::Falling;
    auto [tr, hits] = integrate_until(decay_field(), {2, 0}, 0.0, {ev}, 5.0);
    (void)tr;
    REQUIRE(hits.size() == 1);
    CHECK(std::abs(hits[0].t - std::log(2.0)) < 1e-9);
    CHECK(std::abs(ev.fn(hits[0].t, hits[0].p)) <= 1e-10);
}

TEST_CASE("integrate_until: no event reaches t_max with empty hits") {
    EventSpec ev;
    ev.fn = [](double, Point2 p) { return p.x - 100.0; };
    ev.direction = EventDirection::Rising;
    auto [tr, hits] = integrate_until(rotation_field(), {1, 0}, 0.0, {ev}, 3.0);
    CHECK(hits.empty());
    CHECK_FALSE(tr.event_stop);
    CHECK(tr.t_back() == doctest::Approx(3.0));
}

TEST_CASE("intersect_trajectories: two crossing lines") {
    PlanarField f1 = PlanarField::linear("c1", {0, 0, 0, 0}, {0, 0}, {-5, -5, 5, 5});
    f1.eval = [](Point2) -> Vec2 { return {1, 1}; }; // along y = x
    PlanarField f2 = f1;
    f2.name = "c2";
    f2.eval = [](Point2) -> Vec2 { return {1, -1}; }; // along y = -x + 2
    Trajectory a = integrate(f1, {-1, -1}, 0.0, 4.0);
    Trajectory b = integrate(f2, {-1, 3}, 0.0, 4.0);
    auto hits = intersect_trajectories(a, b, 1e-10);
    REQUIRE(hits.size() == 1);
    CHECK(std::abs(hits[0].p.x - 1.0) < 1e-9);
    CHECK(std::abs(hits[0].p.y - 1.0) < 1e-9);
}

TEST_CASE("intersect_trajectories: circle against a horizontal line") {
    Trajectory circle = integrate(rotation_field(), {1, 0}, 0.0, 2.0 * PI);
    PlanarField horiz;
    horiz.name = "h";
    horiz.domain = {-5, -5, 5, 5};
    horiz.eval = [](Point2) -> Vec2 { return {1, 0}; };
    Trajectory line = integrate(horiz, {-2, 0}, 0.0, 4.0);
    auto hits = intersect_trajectories(circle, line, 1e-10);
    REQUIRE(hits.size() == 2);
    // sorted by circle time: (1,0) at t ~ 0/2pi and (-1,0) at t ~ pi
    bool saw_plus = false, saw_minus = false;
    for (const auto& h : hits) {
        if (std::abs(h.p.x - 1.0) < 1e-8 && std::abs(h.p.y) < 1e-8) saw_plus = true;
        if (std::abs(h.p.x + 1.0) < 1e-8 && std::abs(h.p.y) < 1e-8) saw_minus = true;
    }
    CHECK(saw_plus);
    CHECK(saw_minus);
}

TEST_CASE("intersect_trajectories: symmetric in its arguments") {
    Trajectory circle = integrate(rotation_field(), {1.5, 0}, 0.0, 2.0 * PI);
    PlanarField diag;
    diag.name = "d";
    diag.domain = {-5, -5, 5, 5};
    diag.eval = [](Point2) -> Vec2 { return {1, 0.4}; };
    Trajectory line = integrate(diag, {-3, -0.7}, 0.0, 6.0);
    auto ab = intersect_trajectories(circle, line, 1e-10);
    auto ba = intersect_trajectories(line, circle, 1e-10);
    REQUIRE(ab.size() == ba.size());
    REQUIRE(ab.size() == 2);
    for (const auto& h : ab) {
        bool matched = false;
        for (const auto& k : ba)
            if (dist(h.p, k.p) < 1e-8 && std::abs(h.ta - k.tb) < 1e-7 &&
                std::abs(h.tb - k.ta) < 1e-7)
                matched = true;
        CHECK(matched);
    }
}

TEST_CASE("intersect_trajectories: logarithmic spiral radii decay by e^{-2pi} per turn") {
    // xdot = [[-1,-1],[1,-1]] x has polar form r(t) = r0 e^{-t}, theta = t.
    PlanarField spiral = PlanarField::linear("spiral", {-1, -1, 1, -1}, {0, 0}, {-5, -5, 5, 5});
    IntegrateOpts opts;
    opts.rtol = 1e-11;
    opts.atol = 1e-14;
    Trajectory sp = integrate(spiral, {2, 0}, 0.0, 3.0 * 2.0 * PI, opts);

    PlanarField horiz;
    horiz.name = "ray";
    horiz.domain = {-5, -5, 5, 5};
    horiz.eval = [](Point2) -> Vec2 { return {1, 0}; };
    Trajectory ray = integrate(horiz, {1e-7, 0}, 0.0, 3.0, opts);

    auto hits = intersect_trajectories(sp, ray, 1e-12);
    REQUIRE(hits.size() >= 3);
    double r0 = hits[0].p.x;
    double r1 = hits[1].p.x;
    double r2 = hits[2].p.x;
    CHECK(std::abs(r0 - 2.0) < 1e-9);
    const double decay = std::exp(-2.0 * PI);
    CHECK(std::abs(r1 / r0 - decay) < 1e-6);
    CHECK(std::abs(r2 / r1 - decay) < 1e-6);
}

TEST_CASE("trajectory csv export") {
    Trajectory tr = integrate(rotation_field(), {1, 0}, 0.0, 0.5);
    std::string csv = tr.to_csv();
    CHECK(csv.rfind("t,x,y,branch\n", 0) == 0);
    CHECK(csv.find(",rot\n") != std::string::npos);
    CHECK(csv.find(',') != std::string::npos);
    CHECK(csv.back() == '\n');
}

TEST_CASE("trajectory json export") {
    Trajectory tr = integrate(rotation_field(), {1, 0}, 0.0, 0.5);
    std::string j = tr.to_json();
    CHECK(j.find("\"branch\": \"rot\"") != std::string::npos);
    CHECK(j.find("\"samples\"") != std::string::npos);
    CHECK(j.find('[') != std::string::npos);
}
