#pragma once

#include "spectral_drop/common.hpp"

#include <array>
#include <optional>
#include <vector>

namespace spectral_drop {

enum class DomainKind {
    Strip,           // R x (0, width)
    HalfPlane,       // { y > 0 }
    Sector,          // { r > 0, |theta| < alpha }, apex at origin, axis +x
    Polygon,         // bounded, simple, counterclockwise
    ExteriorConvex,  // complement of a closed convex obstacle
    ConvexEpigraph,  // { y > f(x) } for a piecewise-linear convex profile f
};

/// Obstacle { y >= a x^2 + b x + c } with a > 0 (strictly convex, unbounded).
struct ParabolaObstacle {
    double a = 1.0;
    double b = 0.0;
    double c = 0.0;
    double eval(double x) const { return (a * x + b) * x + c; }
    double slope(double x) const { return 2.0 * a * x + b; }
};

/// Symbolic description of the container D. Unbounded kinds are meshed only
/// after clipping against a truncation box.
struct DomainSpec {
    DomainKind kind = DomainKind::HalfPlane;
    double strip_width = 1.0;
    double sector_alpha = 0.0;  // half-angle in (0, pi/2]
    std::vector<Vec2> polygon;
    std::vector<Vec2> obstacle_polygon;  // convex, counterclockwise
    std::optional<ParabolaObstacle> obstacle_parabola;
    std::vector<Vec2> epigraph_profile;  // convex samples, x strictly increasing

    static DomainSpec strip(double width);
    static DomainSpec half_plane();
    static DomainSpec sector(double alpha);
    static DomainSpec simple_polygon(std::vector<Vec2> vertices);
    static DomainSpec exterior_convex(std::vector<Vec2> obstacle);
    static DomainSpec exterior_parabola(double a, double b, double c);
    static DomainSpec convex_epigraph(std::vector<Vec2> profile);

    /// Throws ValidationError on invariant violations (non-simple polygon,
    /// non-convex "convex" profile, alpha out of range, ...).
    void validate() const;

    /// Signed distance to the container boundary, negative inside D.
    /// Exact near the boundary; may underestimate far outside for Sector.
    double signed_distance(const Vec2& p) const;

    /// Nearest point on the physical boundary of D.
    Vec2 project_to_boundary(const Vec2& p) const;

    bool is_bounded() const { return kind == DomainKind::Polygon; }
};

struct Box {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() * height(); }
};

enum class BoundaryTag {
    NeumannPhysical,       // lies on the container boundary
    ArtificialTruncation,  // introduced by the truncation box
};

struct BoundaryEdge {
    int v0 = -1;
    int v1 = -1;
    BoundaryTag tag = BoundaryTag::ArtificialTruncation;
};

/// Conforming triangulation of the truncated container. Immutable after
/// build_mesh; safe to share across threads.
struct Mesh {
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;  // counterclockwise
    std::vector<BoundaryEdge> boundary_edges;
    double h = 0;  // target edge length

    // cached per-triangle geometry, filled by finalize()
    std::vector<double> tri_area;
    std::vector<Vec2> tri_centroid;
    double total_area = 0;

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }

    /// Orients triangles counterclockwise and rebuilds the cached geometry.
    void finalize();
};

/// Per-cell values in [0,1] describing the drop: 1 inside, 0 outside,
/// fractional values allowed while the shape is relaxed.
struct DensityField {
    Eigen::VectorXd values;

    DensityField() = default;
    explicit DensityField(Eigen::VectorXd v) : values(std::move(v)) {}
    static DensityField zeros(int n) { return DensityField(Eigen::VectorXd::Zero(n)); }
    static DensityField ones(int n) { return DensityField(Eigen::VectorXd::Ones(n)); }

    int size() const { return static_cast<int>(values.size()); }
    bool is_binary(double tol = 1e-12) const;
    void validate_range(double tol = 1e-12) const;
};

/// Undirected mesh edge with incident triangles (t1 = -1 on the boundary).
struct EdgeInfo {
    int v0 = -1, v1 = -1;
    int t0 = -1, t1 = -1;
    double length = 0;
    int boundary_tag = -1;  // -1 interior, else static_cast<int>(BoundaryTag)
};

std::vector<EdgeInfo> build_edges(const Mesh& mesh);

/// Structured clipped-grid mesher: regular grid over the truncation box,
/// near-boundary vertices moved onto the container boundary, outside cells
/// dropped. Deterministic in (spec, h, truncation).
Mesh build_mesh(const DomainSpec& spec, double h, const Box& truncation);

/// Integral of chi over the mesh, exact for piecewise-constant densities.
double volume(const DensityField& chi, const Mesh& mesh);

/// Length of the interior interfaces between chi=1 and chi=0 cells plus the
/// chi=1 sides on artificial truncation edges. Physical boundary edges do not
/// count: the perimeter is relative to the open container.
double relative_perimeter(const DensityField& chi, const Mesh& mesh);

/// Mass of chi carried by cells whose centroid lies within `band` of an
/// artificial truncation edge. Used as a post-hoc validity check: truncation
/// of an unbounded container is trusted only when the drop stays interior.
double truncation_mass(const DensityField& chi, const Mesh& mesh, double band);

}  // namespace spectral_drop
