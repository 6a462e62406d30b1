#include "spectral_drop/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

namespace spectral_drop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Distance and nearest point to a segment [a, b].
std::pair<double, Vec2> segment_closest(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Vec2 q = a + t * ab;
    return {(p - q).norm(), q};
}

// Distance and nearest point to a ray from the origin with unit direction u.
std::pair<double, Vec2> ray_closest(const Vec2& p, const Vec2& u) {
    const double t = std::max(0.0, p.dot(u));
    const Vec2 q = t * u;
    return {(p - q).norm(), q};
}

bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& poly) {
    bool inside = false;
    const int n = static_cast<int>(poly.size());
    for (int i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = poly[j];
        const Vec2& b = poly[i];
        if ((b.y() > p.y()) != (a.y() > p.y())) {
            const double x_cross = b.x() + (p.y() - b.y()) * (a.x() - b.x()) / (a.y() - b.y());
            if (p.x() < x_cross) inside = !inside;
        }
    }
    return inside;
}

std::pair<double, Vec2> polygon_boundary_closest(const Vec2& p, const std::vector<Vec2>& poly) {
    double best = kInf;
    Vec2 best_q = p;
    const int n = static_cast<int>(poly.size());
    for (int i = 0; i < n; ++i) {
        auto [d, q] = segment_closest(p, poly[i], poly[(i + 1) % n]);
        if (d < best) {
            best = d;
            best_q = q;
        }
    }
    return {best, best_q};
}

// Piecewise-linear profile, extended beyond the samples with the end slopes.
double profile_eval(const std::vector<Vec2>& prof, double x) {
    const int n = static_cast<int>(prof.size());
    if (x <= prof.front().x()) {
        const double s = (prof[1].y() - prof[0].y()) / (prof[1].x() - prof[0].x());
        return prof[0].y() + s * (x - prof[0].x());
    }
    if (x >= prof.back().x()) {
        const double s = (prof[n - 1].y() - prof[n - 2].y()) / (prof[n - 1].x() - prof[n - 2].x());
        return prof[n - 1].y() + s * (x - prof[n - 1].x());
    }
    auto it = std::upper_bound(prof.begin(), prof.end(), x,
                               [](double v, const Vec2& a) { return v < a.x(); });
    const Vec2& b = *it;
    const Vec2& a = *(it - 1);
    const double t = (x - a.x()) / (b.x() - a.x());
    return a.y() + t * (b.y() - a.y());
}

std::pair<double, Vec2> profile_closest(const std::vector<Vec2>& prof, const Vec2& p,
                                        double extend) {
    double best = kInf;
    Vec2 best_q = p;
    const int n = static_cast<int>(prof.size());
    auto consider = [&](const Vec2& a, const Vec2& b) {
        auto [d, q] = segment_closest(p, a, b);
        if (d < best) {
            best = d;
            best_q = q;
        }
    };
    for (int i = 0; i + 1 < n; ++i) consider(prof[i], prof[i + 1]);
    // end extensions, long enough to cover any point of interest
    {
        const Vec2 d0 = (prof[0] - prof[1]).normalized();
        consider(prof[0], prof[0] + extend * d0);
        const Vec2 d1 = (prof[n - 1] - prof[n - 2]).normalized();
        consider(prof[n - 1], prof[n - 1] + extend * d1);
    }
    return {best, best_q};
}

// Nearest point on the parabola y = q(x) by safeguarded Newton on
// g(s) = (s - px) + (q(s) - py) q'(s).
Vec2 parabola_closest(const ParabolaObstacle& par, const Vec2& p) {
    double s = p.x();
    for (int it = 0; it < 60; ++it) {
        const double q = par.eval(s);
        const double qp = par.slope(s);
        const double g = (s - p.x()) + (q - p.y()) * qp;
        const double gp = 1.0 + qp * qp + (q - p.y()) * 2.0 * par.a;
        double step = (std::abs(gp) > 1e-14) ? g / gp : g;
        // keep steps sane for points near the focal region
        const double cap = 1.0 + std::abs(s - p.x());
        step = std::clamp(step, -cap, cap);
        s -= step;
        if (std::abs(step) < 1e-14 * (1.0 + std::abs(s))) break;
    }
    return Vec2(s, par.eval(s));
}

}  // namespace

DomainSpec DomainSpec::strip(double width) {
    DomainSpec d;
    d.kind = DomainKind::Strip;
    d.strip_width = width;
    return d;
}

DomainSpec DomainSpec::half_plane() {
    DomainSpec d;
    d.kind = DomainKind::HalfPlane;
    return d;
}

DomainSpec DomainSpec::sector(double alpha) {
    DomainSpec d;
    d.kind = DomainKind::Sector;
    d.sector_alpha = alpha;
    return d;
}

DomainSpec DomainSpec::simple_polygon(std::vector<Vec2> vertices) {
    DomainSpec d;
    d.kind = DomainKind::Polygon;
    d.polygon = std::move(vertices);
    return d;
}

DomainSpec DomainSpec::exterior_convex(std::vector<Vec2> obstacle) {
    DomainSpec d;
    d.kind = DomainKind::ExteriorConvex;
    d.obstacle_polygon = std::move(obstacle);
    return d;
}

DomainSpec DomainSpec::exterior_parabola(double a, double b, double c) {
    DomainSpec d;
    d.kind = DomainKind::ExteriorConvex;
    d.obstacle_parabola = ParabolaObstacle{a, b, c};
    return d;
}

DomainSpec DomainSpec::convex_epigraph(std::vector<Vec2> profile) {
    DomainSpec d;
    d.kind = DomainKind::ConvexEpigraph;
    d.epigraph_profile = std::move(profile);
    return d;
}

void DomainSpec::validate() const {
    const double pi_half = std::numbers::pi / 2.0;
    switch (kind) {
        case DomainKind::Strip:
            if (!(strip_width > 0)) throw ValidationError("strip width must be positive");
            break;
        case DomainKind::HalfPlane:
            break;
        case DomainKind::Sector:
            if (!(sector_alpha > 0) || sector_alpha > pi_half + 1e-14)
                throw ValidationError("sector half-angle must lie in (0, pi/2]");
            break;
        case DomainKind::Polygon: {
            const int n = static_cast<int>(polygon.size());
            if (n < 3) throw ValidationError("polygon needs at least 3 vertices");
            double area2 = 0;
            for (int i = 0; i < n; ++i) area2 += cross2(polygon[i], polygon[(i + 1) % n]);
            if (!(area2 > 0)) throw ValidationError("polygon must be counterclockwise");
            // simple: no non-adjacent edge intersections
            auto seg_intersect = [](const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
                const double d1 = cross2(b - a, c - a);
                const double d2 = cross2(b - a, d - a);
                const double d3 = cross2(d - c, a - c);
                const double d4 = cross2(d - c, b - c);
                return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
            };
            for (int i = 0; i < n; ++i) {
                for (int j = i + 1; j < n; ++j) {
                    if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
                    if (seg_intersect(polygon[i], polygon[(i + 1) % n], polygon[j],
                                      polygon[(j + 1) % n]))
                        throw ValidationError("polygon must be simple");
                }
            }
            break;
        }
        case DomainKind::ExteriorConvex: {
            if (obstacle_parabola) {
                if (!(obstacle_parabola->a > 0))
                    throw ValidationError("parabola obstacle needs a > 0");
                break;
            }
            const int n = static_cast<int>(obstacle_polygon.size());
            if (n < 3) throw ValidationError("convex obstacle needs at least 3 vertices");
            for (int i = 0; i < n; ++i) {
                const Vec2& a = obstacle_polygon[i];
                const Vec2& b = obstacle_polygon[(i + 1) % n];
                const Vec2& c = obstacle_polygon[(i + 2) % n];
                if (cross2(b - a, c - b) < -1e-12)
                    throw ValidationError("obstacle polygon must be convex (counterclockwise)");
            }
            break;
        }
        case DomainKind::ConvexEpigraph: {
            const int n = static_cast<int>(epigraph_profile.size());
            if (n < 2) throw ValidationError("epigraph profile needs at least 2 samples");
            for (int i = 0; i + 1 < n; ++i)
                if (!(epigraph_profile[i + 1].x() > epigraph_profile[i].x()))
                    throw ValidationError("epigraph profile x must be strictly increasing");
            for (int i = 0; i + 2 < n; ++i) {
                const double s0 = (epigraph_profile[i + 1].y() - epigraph_profile[i].y()) /
                                  (epigraph_profile[i + 1].x() - epigraph_profile[i].x());
                const double s1 = (epigraph_profile[i + 2].y() - epigraph_profile[i + 1].y()) /
                                  (epigraph_profile[i + 2].x() - epigraph_profile[i + 1].x());
                if (s1 < s0 - 1e-12)
                    throw ValidationError("epigraph profile must be convex");
            }
            break;
        }
    }
}

double DomainSpec::signed_distance(const Vec2& p) const {
    switch (kind) {
        case DomainKind::Strip:
            return std::max(-p.y(), p.y() - strip_width);
        case DomainKind::HalfPlane:
            return -p.y();
        case DomainKind::Sector: {
            const Vec2 up(std::cos(sector_alpha), std::sin(sector_alpha));
            const Vec2 dn(std::cos(sector_alpha), -std::sin(sector_alpha));
            const double r = p.norm();
            if (r == 0) return 0.0;
            const double theta = std::atan2(p.y(), p.x());
            const double d_up = ray_closest(p, up).first;
            const double d_dn = ray_closest(p, dn).first;
            const double d = std::min(d_up, d_dn);
            return (std::abs(theta) < sector_alpha) ? -d : d;
        }
        case DomainKind::Polygon: {
            const auto [d, q] = polygon_boundary_closest(p, polygon);
            (void)q;
            return point_in_polygon(p, polygon) ? -d : d;
        }
        case DomainKind::ExteriorConvex: {
            if (obstacle_parabola) {
                const auto& par = *obstacle_parabola;
                const double gap = p.y() - par.eval(p.x());  // > 0 inside the obstacle
                const Vec2 q = parabola_closest(par, p);
                const double d = (p - q).norm();
                return gap >= 0 ? d : -d;
            }
            const auto [d, q] = polygon_boundary_closest(p, obstacle_polygon);
            (void)q;
            return point_in_polygon(p, obstacle_polygon) ? d : -d;
        }
        case DomainKind::ConvexEpigraph: {
            const double gap = p.y() - profile_eval(epigraph_profile, p.x());
            const auto [d, q] = profile_closest(epigraph_profile, p, 1e6);
            (void)q;
            return gap >= 0 ? -d : d;
        }
    }
    return kInf;
}

Vec2 DomainSpec::project_to_boundary(const Vec2& p) const {
    switch (kind) {
        case DomainKind::Strip:
            return Vec2(p.x(), p.y() < strip_width / 2 ? 0.0 : strip_width);
        case DomainKind::HalfPlane:
            return Vec2(p.x(), 0.0);
        case DomainKind::Sector: {
            const Vec2 up(std::cos(sector_alpha), std::sin(sector_alpha));
            const Vec2 dn(std::cos(sector_alpha), -std::sin(sector_alpha));
            const auto [du, qu] = ray_closest(p, up);
            const auto [dd, qd] = ray_closest(p, dn);
            return du <= dd ? qu : qd;
        }
        case DomainKind::Polygon:
            return polygon_boundary_closest(p, polygon).second;
        case DomainKind::ExteriorConvex:
            if (obstacle_parabola) return parabola_closest(*obstacle_parabola, p);
            return polygon_boundary_closest(p, obstacle_polygon).second;
        case DomainKind::ConvexEpigraph:
            return profile_closest(epigraph_profile, p, 1e6).second;
    }
    return p;
}

void Mesh::finalize() {
    const int m = num_triangles();
    tri_area.assign(m, 0.0);
    tri_centroid.assign(m, Vec2::Zero());
    total_area = 0;
    for (int t = 0; t < m; ++t) {
        auto& tri = triangles[t];
        const Vec2& a = vertices[tri[0]];
        const Vec2& b = vertices[tri[1]];
        const Vec2& c = vertices[tri[2]];
        double area2 = cross2(b - a, c - a);
        if (area2 < 0) {
            std::swap(tri[1], tri[2]);
            area2 = -area2;
        }
        tri_area[t] = 0.5 * area2;
        tri_centroid[t] = (a + b + c) / 3.0;
        total_area += tri_area[t];
    }
}

bool DensityField::is_binary(double tol) const {
    for (int i = 0; i < size(); ++i) {
        const double v = values[i];
        if (std::abs(v) > tol && std::abs(v - 1.0) > tol) return false;
    }
    return true;
}

void DensityField::validate_range(double tol) const {
    for (int i = 0; i < size(); ++i)
        if (values[i] < -tol || values[i] > 1.0 + tol)
            throw ValidationError("density value outside [0,1]");
}

std::vector<EdgeInfo> build_edges(const Mesh& mesh) {
    std::map<std::pair<int, int>, int> index;
    std::vector<EdgeInfo> edges;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (int e = 0; e < 3; ++e) {
            int a = tri[e], b = tri[(e + 1) % 3];
            if (a > b) std::swap(a, b);
            auto [it, fresh] = index.try_emplace({a, b}, static_cast<int>(edges.size()));
            if (fresh) {
                EdgeInfo info;
                info.v0 = a;
                info.v1 = b;
                info.t0 = t;
                info.length = (mesh.vertices[a] - mesh.vertices[b]).norm();
                edges.push_back(info);
            } else {
                edges[it->second].t1 = t;
            }
        }
    }
    for (const auto& be : mesh.boundary_edges) {
        int a = be.v0, b = be.v1;
        if (a > b) std::swap(a, b);
        auto it = index.find({a, b});
        if (it != index.end()) edges[it->second].boundary_tag = static_cast<int>(be.tag);
    }
    return edges;
}

Mesh build_mesh(const DomainSpec& spec, double h, const Box& box) {
    spec.validate();
    if (!(h > 0)) throw ValidationError("mesh size h must be positive");
    if (!(box.x1 > box.x0) || !(box.y1 > box.y0))
        throw ValidationError("truncation box must have positive area");

    const int nx = std::max(1, static_cast<int>(std::ceil(box.width() / h - 1e-9)));
    const int ny = std::max(1, static_cast<int>(std::ceil(box.height() / h - 1e-9)));
    const double hx = box.width() / nx;
    const double hy = box.height() / ny;
    const double hmin = std::min(hx, hy);
    const double snap_tol = 0.35 * hmin;

    const int nvx = nx + 1, nvy = ny + 1;
    std::vector<Vec2> nodes(static_cast<size_t>(nvx) * nvy);
    std::vector<double> phi(nodes.size());
    std::vector<char> on_boundary(nodes.size(), 0);
    auto nid = [&](int i, int j) { return j * nvx + i; };

    for (int j = 0; j < nvy; ++j) {
        for (int i = 0; i < nvx; ++i) {
            Vec2 p(box.x0 + i * hx, box.y0 + j * hy);
            double d = spec.signed_distance(p);
            if (std::abs(d) <= snap_tol) {
                p = spec.project_to_boundary(p);
                d = 0.0;
                on_boundary[nid(i, j)] = 1;
            }
            nodes[nid(i, j)] = p;
            phi[nid(i, j)] = d;
        }
    }

    const double inside_tol = 1e-12 * hmin;
    const double centroid_tol = 1e-9 * hmin;
    auto usable = [&](int idx) { return phi[idx] <= inside_tol; };

    std::vector<std::array<int, 3>> raw_tris;
    raw_tris.reserve(static_cast<size_t>(nx) * ny * 2);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int a = nid(i, j), b = nid(i + 1, j), c = nid(i + 1, j + 1), d = nid(i, j + 1);
            std::array<std::array<int, 3>, 2> cand;
            if ((i + j) % 2 == 0)
                cand = {{{a, b, c}, {a, c, d}}};
            else
                cand = {{{a, b, d}, {b, c, d}}};
            for (const auto& tri : cand) {
                if (!usable(tri[0]) || !usable(tri[1]) || !usable(tri[2])) continue;
                const Vec2 cen = (nodes[tri[0]] + nodes[tri[1]] + nodes[tri[2]]) / 3.0;
                if (spec.signed_distance(cen) >= -centroid_tol) continue;
                const double area2 =
                    cross2(nodes[tri[1]] - nodes[tri[0]], nodes[tri[2]] - nodes[tri[0]]);
                if (std::abs(area2) < 1e-10 * hmin * hmin) continue;
                raw_tris.push_back(tri);
            }
        }
    }
    if (raw_tris.empty())
        throw GeometryError("truncation box does not intersect the container");

    // compact vertex numbering
    std::vector<int> remap(nodes.size(), -1);
    Mesh mesh;
    mesh.h = h;
    for (auto& tri : raw_tris) {
        for (int& v : tri) {
            if (remap[v] < 0) {
                remap[v] = mesh.num_vertices();
                mesh.vertices.push_back(nodes[v]);
            }
            v = remap[v];
        }
        mesh.triangles.push_back(tri);
    }
    mesh.finalize();

    // boundary edges: shared by exactly one triangle
    const auto edges = build_edges(mesh);
    const double box_tol = 1e-9 * hmin;
    auto on_box_frontier = [&](const Vec2& p) {
        return std::abs(p.x() - box.x0) <= box_tol || std::abs(p.x() - box.x1) <= box_tol ||
               std::abs(p.y() - box.y0) <= box_tol || std::abs(p.y() - box.y1) <= box_tol;
    };
    for (const auto& e : edges) {
        if (e.t1 >= 0) continue;
        const Vec2 mid = 0.5 * (mesh.vertices[e.v0] + mesh.vertices[e.v1]);
        BoundaryEdge be;
        be.v0 = e.v0;
        be.v1 = e.v1;
        if (std::abs(spec.signed_distance(mid)) <= 1e-7 * hmin)
            be.tag = BoundaryTag::NeumannPhysical;
        else if (on_box_frontier(mesh.vertices[e.v0]) && on_box_frontier(mesh.vertices[e.v1]) &&
                 on_box_frontier(mid))
            be.tag = BoundaryTag::ArtificialTruncation;
        else
            be.tag = BoundaryTag::NeumannPhysical;  // snapped stretch of the wall
        mesh.boundary_edges.push_back(be);
    }
    return mesh;
}

double volume(const DensityField& chi, const Mesh& mesh) {
    if (chi.size() != mesh.num_triangles())
        throw ValidationError("density size does not match the mesh");
    double v = 0;
    for (int t = 0; t < mesh.num_triangles(); ++t) v += chi.values[t] * mesh.tri_area[t];
    return v;
}

double relative_perimeter(const DensityField& chi, const Mesh& mesh) {
    if (chi.size() != mesh.num_triangles())
        throw ValidationError("density size does not match the mesh");
    if (!chi.is_binary(1e-9)) throw ValidationError("relative perimeter needs a binary density");
    const auto edges = build_edges(mesh);
    double per = 0;
    for (const auto& e : edges) {
        const bool in0 = chi.values[e.t0] > 0.5;
        if (e.t1 >= 0) {
            const bool in1 = chi.values[e.t1] > 0.5;
            if (in0 != in1) per += e.length;
        } else if (in0 && e.boundary_tag == static_cast<int>(BoundaryTag::ArtificialTruncation)) {
            per += e.length;  // conservative: count the cut against the box
        }
    }
    return per;
}

double truncation_mass(const DensityField& chi, const Mesh& mesh, double band) {
    if (chi.size() != mesh.num_triangles())
        throw ValidationError("density size does not match the mesh");
    std::vector<std::pair<Vec2, Vec2>> artificial;
    for (const auto& be : mesh.boundary_edges)
        if (be.tag == BoundaryTag::ArtificialTruncation)
            artificial.emplace_back(mesh.vertices[be.v0], mesh.vertices[be.v1]);
    if (artificial.empty()) return 0.0;
    double m = 0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        if (chi.values[t] <= 0) continue;
        const Vec2& c = mesh.tri_centroid[t];
        for (const auto& [a, b] : artificial) {
            if (segment_closest(c, a, b).first <= band) {
                m += chi.values[t] * mesh.tri_area[t];
                break;
            }
        }
    }
    return m;
}

}  // namespace spectral_drop
