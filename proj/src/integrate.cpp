#include "eeb/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <unordered_map>

#include "json.hpp"

#include "eeb/errors.hpp"

namespace eeb {

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
                 A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247,
                 A64 = 49.0 / 176, A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784,
                 B6 = 11.0 / 84;
// b - b* (5th minus embedded 4th order weights).
constexpr double E1 = B1 - 5179.0 / 57600;
constexpr double E3 = B3 - 7571.0 / 16695;
constexpr double E4 = B4 - 393.0 / 640;
constexpr double E5 = B5 + 92097.0 / 339200;
constexpr double E6 = B6 - 187.0 / 2100;
constexpr double E7 = -1.0 / 40;

struct Hermite {
    double t0, t1;
    Point2 p0, p1;
    Vec2 v0, v1;

    Point2 at(double t) const {
        double dt = t1 - t0;
        if (dt == 0.0) return p0;
        double th = (t - t0) / dt;
        double th2 = th * th, th3 = th2 * th;
        double h00 = 2 * th3 - 3 * th2 + 1;
        double h10 = th3 - 2 * th2 + th;
        double h01 = -2 * th3 + 3 * th2;
        double h11 = th3 - th2;
        return {h00 * p0.x + h10 * dt * v0.x + h01 * p1.x + h11 * dt * v1.x,
                h00 * p0.y + h10 * dt * v0.y + h01 * p1.y + h11 * dt * v1.y};
    }
    Vec2 velocity_at(double t) const {
        double dt = t1 - t0;
        if (dt == 0.0) return v0;
        double th = (t - t0) / dt;
        double th2 = th * th;
        double d00 = (6 * th2 - 6 * th) / dt;
        double d10 = 3 * th2 - 4 * th + 1;
        double d01 = (-6 * th2 + 6 * th) / dt;
        double d11 = 3 * th2 - 2 * th;
        return {d00 * p0.x + d10 * v0.x + d01 * p1.x + d11 * v1.x,
                d00 * p0.y + d10 * v0.y + d01 * p1.y + d11 * v1.y};
    }
};

Hermite interval_of(const Trajectory& tr, size_t i) {
    const auto& s0 = tr.samples[i];
    const auto& s1 = tr.samples[i + 1];
    return {s0.t, s1.t, s0.p, s1.p, s0.v, s1.v};
}

size_t locate_interval(const Trajectory& tr, double t) {
    const auto& s = tr.samples;
    if (t <= s.front().t) return 0;
    if (t >= s.back().t) return s.size() - 2;
    size_t lo = 0, hi = s.size() - 1;
    while (hi - lo > 1) {
        size_t mid = (lo + hi) / 2;
        if (s[mid].t <= t) lo = mid;
        else hi = mid;
    }
    return lo;
}

double initial_step(const PlanarField& field, Point2 x0, double dir, double rtol, double atol,
                    double space_cap) {
    Vec2 v = field.eval(x0);
    double scale = atol + rtol * std::max(1.0, norm(x0 - Point2{0, 0}));
    double d1 = norm(v) / scale;
    double h = d1 > 1e-12 ? 0.01 / d1 : 1e-3;
    double vn = norm(v);
    if (space_cap > 0.0 && vn > 1e-300) h = std::min(h, space_cap / vn);
    return dir * std::max(h, 1e-12);
}

} // namespace

Point2 Trajectory::at(double t) const {
    if (samples.empty()) throw Error(ErrorCode::InvalidArgument, "empty trajectory");
    if (samples.size() == 1) return samples[0].p;
    size_t i = locate_interval(*this, t);
    return interval_of(*this, i).at(t);
}

Vec2 Trajectory::velocity_at(double t) const {
    if (samples.empty()) throw Error(ErrorCode::InvalidArgument, "empty trajectory");
    if (samples.size() == 1) return samples[0].v;
    size_t i = locate_interval(*this, t);
    return interval_of(*this, i).velocity_at(t);
}

double Trajectory::arc_length() const {
    double s = 0.0;
    for (size_t i = 0; i + 1 < samples.size(); ++i) s += dist(samples[i].p, samples[i + 1].p);
    return s;
}

double Trajectory::distance_to(Point2 p) const {
    double best = std::numeric_limits<double>::infinity();
    if (samples.size() == 1) return dist(p, samples[0].p);
    for (size_t i = 0; i + 1 < samples.size(); ++i)
        best = std::min(best, dist_to_segment(p, samples[i].p, samples[i + 1].p));
    return best;
}

std::string Trajectory::to_csv() const {
    std::string out = "t,x,y,branch\n";
    char buf[128];
    for (const auto& s : samples) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,", s.t, s.p.x, s.p.y);
        out += buf;
        out += branch;
        out += '\n';
    }
    return out;
}

std::string Trajectory::to_json() const {
    nlohmann::json j;
    j["branch"] = branch;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : samples) arr.push_back({s.t, s.p.x, s.p.y});
    j["samples"] = arr;
    return j.dump(2);
}

Trajectory integrate(const PlanarField& field, Point2 x0, double t0, double t1,
                     const IntegrateOpts& opts) {
    if (t1 == t0) throw Error(ErrorCode::InvalidArgument, "integrate: t1 == t0");
    const double dir = t1 > t0 ? 1.0 : -1.0;
    const double space_cap =
        opts.max_space_step > 0.0 ? opts.max_space_step : field.domain.diagonal() / 50.0;

    Trajectory tr;
    tr.branch = field.name;

    double t = t0;
    Point2 p = x0;
    Vec2 k1 = field.eval(p);
    tr.samples.push_back({t, p, k1});

    auto near_check = [&](Point2 q) {
        for (const auto& e : opts.equilibria)
            if (dist(q, e) <= opts.near_equilibrium_radius) tr.near_equilibrium = true;
    };
    near_check(p);

    double h = initial_step(field, x0, dir, opts.rtol, opts.atol, space_cap);
    if (opts.max_time_step > 0.0) h = dir * std::min(std::abs(h), opts.max_time_step);
    double err_prev = 1.0;

    const int max_steps = 2000000;
    for (int step = 0; step < max_steps; ++step) {
        if ((dir > 0 && t >= t1) || (dir < 0 && t <= t1)) break;
        // Endpoint reached up to rounding: snap, do not flag underflow.
        if (std::abs(t1 - t) <= 1e-14 * (1.0 + std::abs(t))) {
            tr.samples.back().t = t1;
            t = t1;
            break;
        }

        // Clip to the endpoint and the caps.
        double habs = std::abs(h);
        double vn = norm(k1);
        if (vn > 1e-300) habs = std::min(habs, space_cap / vn);
        if (opts.max_time_step > 0.0) habs = std::min(habs, opts.max_time_step);
        habs = std::min(habs, std::abs(t1 - t));
        if (habs < 1e-14 * (1.0 + std::abs(t))) {
            tr.step_underflow = true;
            break;
        }
        h = dir * habs;

        Vec2 k2 = field.eval(p + h * (A21 * k1));
        Vec2 k3 = field.eval(p + h * (A31 * k1 + A32 * k2));
        Vec2 k4 = field.eval(p + h * (A41 * k1 + A42 * k2 + A43 * k3));
        Vec2 k5 = field.eval(p + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
        Vec2 k6 = field.eval(p + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
        Point2 pn = p + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        Vec2 k7 = field.eval(pn);

        if (!finite(pn) || !finite(k7)) {
            // Retry with a smaller step; blow-ups hit the underflow guard.
            h *= 0.25;
            continue;
        }

        Vec2 errv = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
        double sx = opts.atol + opts.rtol * std::max(std::abs(p.x), std::abs(pn.x));
        double sy = opts.atol + opts.rtol * std::max(std::abs(p.y), std::abs(pn.y));
        double err = std::sqrt(0.5 * ((errv.x / sx) * (errv.x / sx) + (errv.y / sy) * (errv.y / sy)));

        if (err <= 1.0) {
            // Continuous extension of the step (5th-order dense output),
            // used to keep the stored-sample cubic Hermite interpolation
            // within its tolerance budget by inserting interior samples.
            constexpr double D1 = -12715105075.0 / 11282082432.0;
            constexpr double D3 = 87487479700.0 / 32700410799.0;
            constexpr double D4 = -10690763975.0 / 1880347072.0;
            constexpr double D5 = 701980252875.0 / 199316789632.0;
            constexpr double D6 = -1453857185.0 / 822651844.0;
            constexpr double D7 = 69997945.0 / 29380423.0;
            Vec2 ydiff = pn - p;
            Vec2 r3 = h * k1 - ydiff;
            Vec2 r4 = ydiff - h * k7 - r3;
            Vec2 r5 = h * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 + D7 * k7);
            Point2 p0 = p;
            auto dense = [&](double th) -> Point2 {
                Vec2 off = th * (ydiff + (1.0 - th) * (r3 + th * (r4 + (1.0 - th) * r5)));
                return p0 + off;
            };
            double budget = 2.0 * (opts.atol + opts.rtol * std::max({1.0, norm(p - Point2{0, 0}),
                                                                     norm(pn - Point2{0, 0})}));
            // Depth-first subdivision; samples are emitted in theta order.
            std::function<void(double, Point2, Vec2, double, Point2, Vec2, int)> refine =
                [&](double tha, Point2 pa, Vec2 va, double thb, Point2 pb, Vec2 vb, int depth) {
                    double thm = 0.5 * (tha + thb);
                    Point2 ref = dense(thm);
                    Hermite hm{t + tha * h, t + thb * h, pa, pb, va, vb};
                    if (depth >= 3 || dist(hm.at(t + thm * h), ref) <= budget) return;
                    Vec2 vm = field.eval(ref);
                    refine(tha, pa, va, thm, ref, vm, depth + 1);
                    tr.samples.push_back({t + thm * h, ref, vm});
                    near_check(ref);
                    refine(thm, ref, vm, thb, pb, vb, depth + 1);
                };
            refine(0.0, p, k1, 1.0, pn, k7, 0);

            t = t + h;
            p = pn;
            k1 = k7;
            tr.samples.push_back({t, p, k1});
            near_check(p);

            if (opts.stop_on_domain_exit && !field.domain.contains(p)) {
                // Bisect the exit time on the dense output.
                Hermite hm = interval_of(tr, tr.samples.size() - 2);
                double lo = hm.t0, hi = hm.t1;
                for (int it = 0; it < 80 && (hi - lo) > 1e-13 * (1.0 + std::abs(hi)); ++it) {
                    double mid = 0.5 * (lo + hi);
                    if (field.domain.contains(hm.at(mid))) lo = mid;
                    else hi = mid;
                }
                Point2 pb = hm.at(hi);
                tr.samples.back() = {hi, pb, field.eval(pb)};
                tr.domain_exit = true;
                break;
            }

            double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.7 / 5.0) *
                         std::pow(std::max(err_prev, 1e-10), 0.4 / 5.0);
            fac = std::clamp(fac, 0.2, 5.0);
            h = h * fac;
            err_prev = std::max(err, 1e-10);
        } else {
            double fac = std::clamp(0.9 * std::pow(err, -0.2), 0.1, 1.0);
            h = h * fac;
        }
    }

    if (dir < 0) std::reverse(tr.samples.begin(), tr.samples.end());
    return tr;
}

std::pair<Trajectory, std::vector<EventHit>> integrate_until(
    const PlanarField& field, Point2 x0, double t0, const std::vector<EventSpec>& events,
    double t_max, const IntegrateOpts& opts) {
    if (!(t_max > t0)) throw Error(ErrorCode::InvalidArgument, "integrate_until: t_max <= t0");

    Trajectory tr = integrate(field, x0, t0, t_max, opts);
    std::vector<EventHit> hits;
    if (tr.samples.size() < 2) return {tr, hits};

    const int sub = 4; // in-step checkpoints so dips inside a step are seen

    IntegrateOpts tight = opts;
    tight.rtol = std::min(opts.rtol, 1e-12);
    tight.atol = std::min(opts.atol, 1e-14);
    tight.stop_on_domain_exit = false;
    tight.equilibria.clear();

    double terminal_t = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i + 1 < tr.samples.size(); ++i) {
        Hermite hm = interval_of(tr, i);
        // Re-integration from the step start gives true-flow points for the
        // final refinement; the interpolant only brackets.
        auto true_point = [&](double t) -> Point2 {
            if (t <= hm.t0 + 1e-300) return hm.p0;
            return integrate(field, hm.p0, hm.t0, t, tight).back();
        };
        for (size_t ev = 0; ev < events.size(); ++ev) {
            const auto& spec = events[ev];
            double ta = hm.t0;
            double ea = spec.fn(ta, hm.p0);
            for (int s = 1; s <= sub; ++s) {
                double tb = hm.t0 + (hm.t1 - hm.t0) * s / sub;
                Point2 pb = s == sub ? hm.p1 : hm.at(tb);
                double eb = spec.fn(tb, pb);
                bool crossed = false;
                switch (spec.direction) {
                    case EventDirection::Rising: crossed = ea < 0.0 && eb >= 0.0; break;
                    case EventDirection::Falling: crossed = ea > 0.0 && eb <= 0.0; break;
                    case EventDirection::Any:
                        crossed = (ea < 0.0 && eb >= 0.0) || (ea > 0.0 && eb <= 0.0);
                        break;
                }
                if (crossed) {
                    double lo = ta, hi = tb;
                    double elo = spec.fn(lo, true_point(lo));
                    double ehi = spec.fn(hi, true_point(hi));
                    if ((elo < 0.0) == (ehi < 0.0) && elo != 0.0 && ehi != 0.0) {
                        // Interpolation artifact; re-bracket over the whole step.
                        lo = hm.t0;
                        hi = hm.t1;
                        elo = spec.fn(lo, hm.p0);
                        ehi = spec.fn(hi, hm.p1);
                    }
                    if ((elo < 0.0) != (ehi < 0.0) || elo == 0.0 || ehi == 0.0) {
                        while (hi - lo > 1e-12 * (1.0 + std::abs(hi))) {
                            double mid = 0.5 * (lo + hi);
                            double em = spec.fn(mid, true_point(mid));
                            bool same_side = (elo < 0.0) == (em < 0.0) && em != 0.0;
                            if (same_side) {
                                lo = mid;
                                elo = em;
                            } else {
                                hi = mid;
                            }
                        }
                        EventHit hit{hi, true_point(hi), static_cast<int>(ev)};
                        bool dup = false;
                        for (const auto& h : hits)
                            if (h.spec_index == hit.spec_index &&
                                std::abs(h.t - hit.t) < 1e-9 * (1.0 + std::abs(hit.t)))
                                dup = true;
                        if (!dup) {
                            hits.push_back(hit);
                            if (spec.terminal) terminal_t = std::min(terminal_t, hit.t);
                        }
                    }
                }
                ta = tb;
                ea = eb;
            }
        }
        if (terminal_t <= hm.t1) break;
    }

    if (std::isfinite(terminal_t)) {
        std::vector<EventHit> kept;
        for (auto& h : hits)
            if (h.t <= terminal_t + 1e-12 * (1.0 + std::abs(terminal_t))) kept.push_back(h);
        hits = std::move(kept);
        Point2 pe = tr.at(terminal_t);
        size_t i = locate_interval(tr, terminal_t);
        tr.samples.resize(i + 1);
        if (tr.samples.back().t < terminal_t) tr.samples.push_back({terminal_t, pe, field.eval(pe)});
        tr.event_stop = true;
    }
    std::sort(hits.begin(), hits.end(), [](const EventHit& a, const EventHit& b) { return a.t < b.t; });
    return {tr, hits};
}

namespace {

struct SegmentGrid {
    double cell;
    double ox, oy;
    std::unordered_map<long long, std::vector<int>> cells;

    long long key(long long ix, long long iy) const { return ix * 2000003LL + iy; }

    void insert(int idx, Point2 a, Point2 b) {
        long long ix0 = static_cast<long long>(std::floor((std::min(a.x, b.x) - ox) / cell));
        long long ix1 = static_cast<long long>(std::floor((std::max(a.x, b.x) - ox) / cell));
        long long iy0 = static_cast<long long>(std::floor((std::min(a.y, b.y) - oy) / cell));
        long long iy1 = static_cast<long long>(std::floor((std::max(a.y, b.y) - oy) / cell));
        for (long long ix = ix0; ix <= ix1; ++ix)
            for (long long iy = iy0; iy <= iy1; ++iy) cells[key(ix, iy)].push_back(idx);
    }

    void query(Point2 a, Point2 b, std::vector<int>& out) const {
        long long ix0 = static_cast<long long>(std::floor((std::min(a.x, b.x) - ox) / cell)) - 1;
        long long ix1 = static_cast<long long>(std::floor((std::max(a.x, b.x) - ox) / cell)) + 1;
        long long iy0 = static_cast<long long>(std::floor((std::min(a.y, b.y) - oy) / cell)) - 1;
        long long iy1 = static_cast<long long>(std::floor((std::max(a.y, b.y) - oy) / cell)) + 1;
        for (long long ix = ix0; ix <= ix1; ++ix)
            for (long long iy = iy0; iy <= iy1; ++iy) {
                auto it = cells.find(key(ix, iy));
                if (it != cells.end()) out.insert(out.end(), it->second.begin(), it->second.end());
            }
    }
};

// Segment-segment intersection parameters; returns false for parallel.
bool segment_params(Point2 a0, Point2 a1, Point2 b0, Point2 b1, double& s, double& u) {
    Vec2 da = a1 - a0;
    Vec2 db = b1 - b0;
    double den = cross(da, db);
    if (std::abs(den) < 1e-300) return false;
    Vec2 w = b0 - a0;
    s = cross(w, db) / den;
    u = cross(w, da) / den;
    return true;
}

} // namespace

std::vector<TrajectoryCrossing> intersect_trajectories(const Trajectory& a, const Trajectory& b,
                                                       double tol) {
    std::vector<TrajectoryCrossing> out;
    if (a.samples.size() < 2 || b.samples.size() < 2) return out;

    double max_len = 1e-12;
    for (size_t i = 0; i + 1 < b.samples.size(); ++i)
        max_len = std::max(max_len, dist(b.samples[i].p, b.samples[i + 1].p));
    for (size_t i = 0; i + 1 < a.samples.size(); ++i)
        max_len = std::max(max_len, dist(a.samples[i].p, a.samples[i + 1].p));

    SegmentGrid grid{max_len, b.samples.front().p.x, b.samples.front().p.y, {}};
    for (size_t i = 0; i + 1 < b.samples.size(); ++i)
        grid.insert(static_cast<int>(i), b.samples[i].p, b.samples[i + 1].p);

    std::vector<int> cand;
    const double slack = 1e-9;
    for (size_t i = 0; i + 1 < a.samples.size(); ++i) {
        Point2 a0 = a.samples[i].p, a1 = a.samples[i + 1].p;
        cand.clear();
        grid.query(a0, a1, cand);
        std::sort(cand.begin(), cand.end());
        cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
        for (int j : cand) {
            Point2 b0 = b.samples[j].p, b1 = b.samples[j + 1].p;
            double s, u;
            if (!segment_params(a0, a1, b0, b1, s, u)) continue;
            if (s < -slack || s > 1.0 + slack || u < -slack || u > 1.0 + slack) continue;

            double ta = a.samples[i].t + s * (a.samples[i + 1].t - a.samples[i].t);
            double tb = b.samples[j].t + u * (b.samples[j + 1].t - b.samples[j].t);

            // Newton polish on the Hermite curves.
            bool converged = false;
            for (int it = 0; it < 30; ++it) {
                Point2 pa = a.at(ta), pb = b.at(tb);
                Vec2 F = pa - pb;
                if (norm(F) <= tol) { converged = true; break; }
                Vec2 va = a.velocity_at(ta), vb = b.velocity_at(tb);
                double den = cross(va, -1.0 * vb);
                if (std::abs(den) < 1e-300) break;
                // Solve [va, -vb] * (dta, dtb)^T = -F.
                double dta = (-F.x * (-vb.y) - (-F.y) * (-vb.x)) / den;
                double dtb = (va.x * (-F.y) - va.y * (-F.x)) / den;
                ta += dta;
                tb += dtb;
                ta = std::clamp(ta, a.t_front(), a.t_back());
                tb = std::clamp(tb, b.t_front(), b.t_back());
            }
            if (!converged) {
                Point2 pa = a.at(ta), pb = b.at(tb);
                if (norm(pa - pb) > 100.0 * tol) continue;
            }
            Vec2 va = a.velocity_at(ta), vb = b.velocity_at(tb);
            double tn = norm(va) * norm(vb);
            if (tn <= 0.0 || std::abs(cross(va, vb)) < 1e-8 * tn) continue; // tangential
            Point2 p = a.at(ta);

            // Positional dedupe also merges the start/end duplicate of a
            // closed orbit traversed exactly once.
            double pos_tol = std::max(10.0 * tol, 1e-8 * (1.0 + norm(p - Point2{0, 0})));
            bool dup = false;
            for (auto& c : out) {
                if (std::abs(c.ta - ta) < 1e-9 * (1.0 + std::abs(ta)) &&
                    std::abs(c.tb - tb) < 1e-9 * (1.0 + std::abs(tb))) {
                    dup = true;
                    break;
                }
                if (dist(c.p, p) < pos_tol) { dup = true; break; }
            }
            if (!dup) out.push_back({p, ta, tb});
        }
    }
    std::sort(out.begin(), out.end(),
              [](const TrajectoryCrossing& x, const TrajectoryCrossing& y) { return x.ta < y.ta; });
    return out;
}

double nearest_time(const Trajectory& tr, Point2 p) {
    if (tr.samples.empty()) throw Error(ErrorCode::InvalidArgument, "empty trajectory");
    size_t best = 0;
    double bestd = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < tr.samples.size(); ++i) {
        double d = dist(tr.samples[i].p, p);
        if (d < bestd) {
            bestd = d;
            best = i;
        }
    }
    size_t i0 = best > 0 ? best - 1 : best;
    size_t i1 = best + 1 < tr.samples.size() ? best + 1 : best;
    double lo = tr.samples[i0].t, hi = tr.samples[i1].t;
    for (int it = 0; it < 100 && hi > lo; ++it) {
        double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
        if (dist(tr.at(m1), p) < dist(tr.at(m2), p)) hi = m2;
        else lo = m1;
    }
    return 0.5 * (lo + hi);
}

Trajectory full_orbit(const PlanarField& field, Point2 seed, double t_span,
                      const IntegrateOpts& opts) {
    Trajectory back = integrate(field, seed, 0.0, -t_span, opts);
    Trajectory fwd = integrate(field, seed, 0.0, t_span, opts);
    Trajectory orbit;
    orbit.branch = field.name;
    orbit.samples = back.samples; // ascending, ends at t=0
    if (!orbit.samples.empty()) orbit.samples.pop_back();
    orbit.samples.insert(orbit.samples.end(), fwd.samples.begin(), fwd.samples.end());
    orbit.domain_exit = back.domain_exit || fwd.domain_exit;
    orbit.step_underflow = back.step_underflow || fwd.step_underflow;
    orbit.near_equilibrium = back.near_equilibrium || fwd.near_equilibrium;
    return orbit;
}

} // namespace eeb
