#include "eeb/svg.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "eeb/errors.hpp"
#include "eeb/integrate.hpp"

namespace eeb {

namespace {

struct Mapper {
    Rect world;
    double w, h, margin;

    double sx(double x) const { return margin + (x - world.x0) / world.width() * (w - 2 * margin); }
    double sy(double y) const {
        return h - margin - (y - world.y0) / world.height() * (h - 2 * margin);
    }
};

void append_num(std::string& out, double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    out += buf;
}

void append_polyline(std::string& out, const std::vector<Point2>& pts, const Mapper& m,
                     const char* cls, bool closed) {
    if (pts.size() < 2) return;
    out += closed ? "<polygon class=\"" : "<polyline class=\"";
    out += cls;
    out += "\" points=\"";
    for (size_t i = 0; i < pts.size(); ++i) {
        if (i) out += ' ';
        append_num(out, m.sx(pts[i].x));
        out += ',';
        append_num(out, m.sy(pts[i].y));
    }
    out += "\"/>\n";
}

std::vector<Point2> decimate(const Trajectory& tr, size_t max_pts) {
    std::vector<Point2> pts;
    size_t n = tr.samples.size();
    size_t stride = n > max_pts ? n / max_pts + 1 : 1;
    for (size_t i = 0; i < n; i += stride) pts.push_back(tr.samples[i].p);
    if (!tr.samples.empty() && (n - 1) % stride != 0) pts.push_back(tr.samples.back().p);
    return pts;
}

// Marching-squares zero set of a scalar on the domain grid.
std::vector<std::pair<Point2, Point2>> zero_segments(const std::function<double(Point2)>& fn,
                                                     Rect dom, int n) {
    std::vector<std::pair<Point2, Point2>> segs;
    std::vector<double> vals(static_cast<size_t>(n + 1) * (n + 1));
    auto val = [&](int i, int j) -> double& { return vals[static_cast<size_t>(j) * (n + 1) + i]; };
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            val(i, j) = fn({dom.x0 + dom.width() * i / n, dom.y0 + dom.height() * j / n});

    auto lerp_point = [&](int i0, int j0, int i1, int j1) {
        double v0 = val(i0, j0), v1 = val(i1, j1);
        double t = v0 / (v0 - v1);
        Point2 p0{dom.x0 + dom.width() * i0 / n, dom.y0 + dom.height() * j0 / n};
        Point2 p1{dom.x0 + dom.width() * i1 / n, dom.y0 + dom.height() * j1 / n};
        return Point2{p0.x + t * (p1.x - p0.x), p0.y + t * (p1.y - p0.y)};
    };

    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            Point2 hits[4];
            int cnt = 0;
            double v00 = val(i, j), v10 = val(i + 1, j), v01 = val(i, j + 1),
                   v11 = val(i + 1, j + 1);
            if ((v00 < 0) != (v10 < 0)) hits[cnt++] = lerp_point(i, j, i + 1, j);
            if ((v10 < 0) != (v11 < 0)) hits[cnt++] = lerp_point(i + 1, j, i + 1, j + 1);
            if ((v01 < 0) != (v11 < 0)) hits[cnt++] = lerp_point(i, j + 1, i + 1, j + 1);
            if ((v00 < 0) != (v01 < 0)) hits[cnt++] = lerp_point(i, j, i, j + 1);
            if (cnt == 2) segs.push_back({hits[0], hits[1]});
            // Saddle cells (cnt == 4) are rare at this resolution; pair in order.
            if (cnt == 4) {
                segs.push_back({hits[0], hits[1]});
                segs.push_back({hits[2], hits[3]});
            }
        }
    }
    return segs;
}

} // namespace

std::string render_portrait(const EulerBranching& eb, const std::vector<ZeroCurve>& curves,
                            const std::vector<Point2>& equilibria,
                            const std::optional<ChaoticSetGeometry>& shade,
                            const PortraitOpts& opts) {
    Mapper m{eb.domain, static_cast<double>(opts.width), static_cast<double>(opts.height), 24.0};

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " +
           std::to_string(opts.width) + " " + std::to_string(opts.height) + "\">\n";
    svg += "<!-- phase portrait, format 1 -->\n";
    svg += "<style>\n"
           ".bg{fill:#ffffff;stroke:#888888;stroke-width:1}\n"
           ".f{fill:none;stroke:#1f4f8f;stroke-width:1.1;opacity:0.85}\n"
           ".g{fill:none;stroke:#b03030;stroke-width:1.1;stroke-dasharray:none;opacity:0.85}\n"
           ".curve0{fill:none;stroke:#2a7f2a;stroke-width:1.8}\n"
           ".curve1{fill:none;stroke:#7f2a7f;stroke-width:1.8}\n"
           ".curve2{fill:none;stroke:#2a7f7f;stroke-width:1.8;stroke-dasharray:6 3}\n"
           ".curve3{fill:none;stroke:#7f7f2a;stroke-width:1.8;stroke-dasharray:6 3}\n"
           ".shade{fill:#f2c744;opacity:0.45;stroke:#c09020;stroke-width:1}\n"
           ".eq{fill:#000000}\n"
           ".lbl{font:12px sans-serif;fill:#333333}\n"
           "</style>\n";
    svg += "<rect class=\"bg\" x=\"0\" y=\"0\" width=\"" + std::to_string(opts.width) +
           "\" height=\"" + std::to_string(opts.height) + "\"/>\n";

    // Chaotic-set shading under everything else.
    if (shade) {
        if (shade->variant == GeometryVariant::Region && shade->region) {
            append_polyline(svg, shade->region->polygon, m, "shade", true);
        } else if (!shade->arc_points.empty()) {
            append_polyline(svg, shade->arc_points, m, "shade", false);
        }
    }

    // Streamlines from a fixed seed lattice.
    IntegrateOpts io;
    io.rtol = opts.rtol;
    io.max_space_step = eb.domain.diagonal() / 100.0;
    for (int which = 0; which < 2; ++which) {
        const PlanarField& fld = which == 0 ? eb.f : eb.g;
        const char* cls = which == 0 ? "f" : "g";
        for (int j = 1; j <= opts.lattice_n; ++j) {
            for (int i = 1; i <= opts.lattice_n; ++i) {
                Point2 seed{eb.domain.x0 + eb.domain.width() * i / (opts.lattice_n + 1),
                            eb.domain.y0 + eb.domain.height() * j / (opts.lattice_n + 1)};
                Trajectory orbit = full_orbit(fld, seed, opts.stream_time, io);
                append_polyline(svg, decimate(orbit, 240), m, cls, false);
            }
        }
    }

    for (size_t c = 0; c < curves.size(); ++c) {
        auto segs = zero_segments(curves[c].fn, eb.domain, opts.curve_grid);
        std::string cls = "curve" + std::to_string(c % 4);
        for (auto& [a, b] : segs) {
            std::vector<Point2> pts = {a, b};
            append_polyline(svg, pts, m, cls.c_str(), false);
        }
        if (!segs.empty()) {
            svg += "<text class=\"lbl\" x=\"";
            append_num(svg, m.sx(segs.front().first.x));
            svg += "\" y=\"";
            append_num(svg, m.sy(segs.front().first.y) - 4.0);
            svg += "\">" + curves[c].name + "</text>\n";
        }
    }

    for (const auto& p : equilibria) {
        svg += "<circle class=\"eq\" cx=\"";
        append_num(svg, m.sx(p.x));
        svg += "\" cy=\"";
        append_num(svg, m.sy(p.y));
        svg += "\" r=\"3.5\"/>\n";
    }

    svg += "</svg>\n";
    return svg;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path dir = target.parent_path();
    if (dir.empty()) dir = ".";
    fs::create_directories(dir);
    fs::path tmp = dir / (target.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, target);
}

} // namespace eeb
