#include "spectral_drop/optimize.hpp"

#include "spectral_drop/analytic.hpp"
#include "spectral_drop/run.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

namespace spectral_drop {

namespace {

constexpr double kTruncationBand = 2.0;     // in units of h
constexpr double kTruncationMassTol = 1e-3;

// Discrete stationarity scale for the penalized projection, kappa / h^2.
// Keeping a cell is worth it when its eigenvalue cost M_station * mean(u1^2)
// stays above the area price; on the marginal staircase boundary cells
// mean(u1^2) is a small multiple of |grad u1|^2 h^2, so kappa absorbs that
// cell-shape factor. The raw solve penalty (1e6 / h^2) in the same
// comparison would freeze every cell. Calibrated once against the flat-wall
// equilibrium radius; the value is h- and weight-independent within a couple
// of percent of drop volume.
constexpr double kStationarityKappa = 17.5;

double sym_diff(const DensityField& a, const DensityField& b, const Mesh& mesh) {
    double s = 0;
    for (int t = 0; t < mesh.num_triangles(); ++t)
        s += std::abs(a.values[t] - b.values[t]) * mesh.tri_area[t];
    return s;
}

std::vector<double> penalty_schedule(const OptimizerConfig& cfg, double h) {
    std::vector<double> levels = cfg.penalty_levels;
    if (levels.empty()) levels = {1e2, 1e4, 1e6};
    for (size_t i = 0; i + 1 < levels.size(); ++i)
        if (!(levels[i] < levels[i + 1]))
            throw ValidationError("penalty schedule must be ascending");
    std::vector<double> ms;
    for (double l : levels) {
        if (!(l > 0)) throw ValidationError("penalty levels must be positive");
        ms.push_back(l / (h * h));
    }
    return ms;
}

DensityField ball_prefix(const Mesh& mesh, const Vec2& center, double c,
                         const std::vector<char>& mask) {
    std::vector<int> order(mesh.num_triangles());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> dist(mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t)
        dist[t] = (mesh.tri_centroid[t] - center).norm();
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (dist[a] != dist[b]) return dist[a] < dist[b];
        return a < b;
    });
    DensityField chi = DensityField::zeros(mesh.num_triangles());
    double cum = 0;
    const double tol = 1e-12 * std::max(1.0, c);
    for (int t : order) {
        if (!mask.empty() && !mask[t]) continue;
        if (cum >= c - tol) break;
        chi.values[t] = 1.0;
        cum += mesh.tri_area[t];
    }
    if (cum <= 0) throw ValidationError("empty initial drop");
    return chi;
}

std::vector<Vec2> neumann_midpoints(const Mesh& mesh) {
    std::vector<Vec2> mids;
    for (const auto& be : mesh.boundary_edges)
        if (be.tag == BoundaryTag::NeumannPhysical)
            mids.push_back(0.5 * (mesh.vertices[be.v0] + mesh.vertices[be.v1]));
    return mids;
}

Vec2 mesh_center(const Mesh& mesh) {
    Vec2 lo = mesh.vertices.front(), hi = lo;
    for (const auto& v : mesh.vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    return 0.5 * (lo + hi);
}

struct LoopSetup {
    bool penalized = false;
    double volume_target = 0;  // constrained target, or initial volume when penalized
    double weight = 0;
    std::vector<char> mask;         // empty: all cells admissible
    std::optional<Vec2> init_point;  // override for the ball init center
};

DensityField initial_chi(const Mesh& mesh, const AssembledSystem& system,
                         const OptimizerConfig& cfg, const LoopSetup& setup,
                         const std::vector<double>& schedule) {
    switch (cfg.init) {
        case InitKind::UserChi: {
            if (cfg.user_chi.size() != mesh.num_triangles())
                throw ValidationError("user density size does not match the mesh");
            cfg.user_chi.validate_range(1e-12);
            if (!(volume(cfg.user_chi, mesh) > 0)) throw ValidationError("user density is empty");
            return cfg.user_chi;
        }
        case InitKind::Random: {
            std::mt19937_64 rng(cfg.seed);
            std::vector<int> order(mesh.num_triangles());
            std::iota(order.begin(), order.end(), 0);
            std::vector<double> key(mesh.num_triangles());
            for (auto& k : key) k = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                if (key[a] != key[b]) return key[a] > key[b];
                return a < b;
            });
            DensityField chi = DensityField::zeros(mesh.num_triangles());
            double cum = 0;
            for (int t : order) {
                if (!setup.mask.empty() && !setup.mask[t]) continue;
                if (cum >= setup.volume_target) break;
                chi.values[t] = 1.0;
                cum += mesh.tri_area[t];
            }
            return chi;
        }
        case InitKind::BallAtBoundary:
            break;
    }

    const Vec2 center = setup.init_point ? *setup.init_point : mesh_center(mesh);
    auto mids = neumann_midpoints(mesh);
    Vec2 fallback = setup.init_point ? *setup.init_point : mesh.tri_centroid.front();
    if (mids.empty()) mids.push_back(fallback);

    // boundary point nearest the box center is the default seed
    int nearest = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < mids.size(); ++i) {
        const double d = (mids[i] - center).norm();
        if (d < best_d) {
            best_d = d;
            nearest = static_cast<int>(i);
        }
    }
    std::vector<Vec2> candidates{mids[nearest]};
    if (cfg.init_candidates > 1 && mids.size() > 1) {
        std::vector<Vec2> sorted = mids;
        std::sort(sorted.begin(), sorted.end(), [](const Vec2& a, const Vec2& b) {
            if (a.x() != b.x()) return a.x() < b.x();
            return a.y() < b.y();
        });
        const int want = std::min<int>(cfg.init_candidates, static_cast<int>(sorted.size()));
        for (int i = 0; i < want; ++i) {
            const size_t idx = (sorted.size() - 1) * static_cast<size_t>(i) / std::max(1, want - 1);
            candidates.push_back(sorted[idx]);
        }
    }

    DensityField best_chi;
    double best_obj = std::numeric_limits<double>::infinity();
    for (const Vec2& p : candidates) {
        DensityField chi = ball_prefix(mesh, p, setup.volume_target, setup.mask);
        if (candidates.size() == 1) return chi;
        try {
            const SpectralResult sp = solve_eigs(system, chi, schedule.front(), 1, cfg.eig_tol,
                                                 cfg.seed);
            double obj = sp.eigenvalues[0];
            if (setup.penalized) obj += setup.weight * volume(chi, mesh);
            if (obj < best_obj) {
                best_obj = obj;
                best_chi = chi;
            }
        } catch (const SolverError&) {
            continue;  // an unlucky seed placement is simply skipped
        }
    }
    if (best_chi.size() == 0) throw SolverError("no admissible initial drop found");
    return best_chi;
}

OptimizeResult run_fixed_point(const Mesh& mesh, const AssembledSystem& system,
                               const OptimizerConfig& cfg, const LoopSetup& setup) {
    const auto schedule = penalty_schedule(cfg, mesh.h);
    const double mean_cell = mesh.total_area / mesh.num_triangles();
    const double stop_vol = cfg.stop_tol_volume > 0 ? cfg.stop_tol_volume : 2.0 * mean_cell;
    const double station_scale = kStationarityKappa / (mesh.h * mesh.h);

    DensityField chi = initial_chi(mesh, system, cfg, setup, schedule);
    DensityField chi_prev;  // previous accepted iterate, for the trace column

    OptimizeResult result;
    double best_obj = std::numeric_limits<double>::infinity();
    bool have_best = false;
    int iter = 0;

    for (size_t si = 0; si < schedule.size(); ++si) {
        const double M = schedule[si];
        const bool final_stage = si + 1 == schedule.size();
        int stage_budget = cfg.max_outer_iters - iter;
        if (final_stage) stage_budget = std::max(1, stage_budget);
        if (stage_budget <= 0) continue;

        double lambda_prev = std::numeric_limits<double>::quiet_NaN();
        for (int stage_it = 0; stage_it < stage_budget; ++stage_it) {
            const SpectralResult spectral = solve_eigs(system, chi, M, 1, cfg.eig_tol, cfg.seed);
            const double lambda = spectral.eigenvalues[0];
            const double vol = volume(chi, mesh);
            const double obj = setup.penalized ? lambda + setup.weight * vol : lambda;

            TraceRow row;
            row.iter = iter;
            row.lambda1 = lambda;
            row.volume = vol;
            row.perimeter = chi.is_binary(1e-9) ? relative_perimeter(chi, mesh) : 0.0;
            row.sym_diff = chi_prev.size() ? sym_diff(chi, chi_prev, mesh) : 0.0;
            row.penalty_M = M;
            result.trace.rows.push_back(row);

            if (final_stage && obj < best_obj) {
                best_obj = obj;
                result.chi = chi;
                result.lambda = lambda;
                result.objective = obj;
                result.spectral = spectral;
                have_best = true;
            }

            DensityField chi_next;
            if (setup.penalized) {
                const Eigen::VectorXd q = cell_mean_sq(spectral.eigenfunctions[0], system);
                chi_next = DensityField::zeros(mesh.num_triangles());
                int kept = 0;
                for (int t = 0; t < mesh.num_triangles(); ++t) {
                    if (!setup.mask.empty() && !setup.mask[t]) continue;
                    if (station_scale * q[t] >= setup.weight) {
                        chi_next.values[t] = 1.0;
                        ++kept;
                    }
                }
                if (kept == 0) {
                    // never let the drop vanish: keep the strongest cell
                    int arg = 0;
                    for (int t = 1; t < mesh.num_triangles(); ++t)
                        if (q[t] > q[arg]) arg = t;
                    chi_next.values[arg] = 1.0;
                }
            } else {
                chi_next = threshold_projection_masked(spectral.eigenfunctions[0], mesh,
                                                       setup.volume_target, setup.mask);
            }

            const double step = sym_diff(chi_next, chi, mesh);
            const bool lambda_settled =
                std::isfinite(lambda_prev) &&
                std::abs(lambda - lambda_prev) <= cfg.stop_tol_lambda * std::abs(lambda);
            lambda_prev = lambda;
            chi_prev = chi;
            chi = chi_next;
            ++iter;
            if (lambda_settled && step <= stop_vol) break;
        }
    }

    if (!have_best) {
        const double M = schedule.back();
        const SpectralResult spectral = solve_eigs(system, chi, M, 1, cfg.eig_tol, cfg.seed);
        result.chi = chi;
        result.lambda = spectral.eigenvalues[0];
        result.objective = setup.penalized
                               ? result.lambda + setup.weight * volume(chi, mesh)
                               : result.lambda;
        result.spectral = spectral;
    }

    const double near_mass =
        truncation_mass(result.chi, mesh, kTruncationBand * mesh.h);
    if (near_mass >= kTruncationMassTol) {
        result.truncation_warning = true;
        log_warn("optimized drop carries mass " + std::to_string(near_mass) +
                 " within the truncation band; enlarge the box");
    }
    return result;
}

}  // namespace

DensityField threshold_projection_masked(const ScalarField& u, const Mesh& mesh, double c,
                                         const std::vector<char>& admissible) {
    if (!(c > 0)) throw ValidationError("target volume must be positive");
    if (u.size() != mesh.num_vertices()) throw ValidationError("field size does not match");
    double available = 0;
    for (int t = 0; t < mesh.num_triangles(); ++t)
        if (admissible.empty() || admissible[t]) available += mesh.tri_area[t];
    if (c > available * (1 + 1e-12))
        throw ValidationError("target volume exceeds the admissible area");

    Eigen::VectorXd q(mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        const double a = u[tri[0]], b = u[tri[1]], d = u[tri[2]];
        q[t] = (a * a + b * b + d * d + a * b + a * d + b * d) / 6.0;
    }
    std::vector<int> order;
    order.reserve(mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t)
        if (admissible.empty() || admissible[t]) order.push_back(t);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (q[a] != q[b]) return q[a] > q[b];
        return a < b;
    });

    DensityField chi = DensityField::zeros(mesh.num_triangles());
    double cum = 0;
    const double tol = 1e-12 * std::max(1.0, c);
    for (int t : order) {
        if (cum >= c - tol) break;
        chi.values[t] = 1.0;
        cum += mesh.tri_area[t];
    }
    return chi;
}

DensityField threshold_projection(const ScalarField& u, const Mesh& mesh, double c) {
    return threshold_projection_masked(u, mesh, c, {});
}

OptimizeResult minimize_lambda1(const DomainSpec& spec, const Mesh& mesh,
                                const AssembledSystem& system, const OptimizerConfig& cfg) {
    spec.validate();
    if (!cfg.target_volume || cfg.penalty_weight)
        throw ValidationError("constrained mode needs target_volume and no penalty_weight");
    const double c = *cfg.target_volume;
    if (!(c > 0) || c > mesh.total_area * (1 + 1e-12))
        throw ValidationError("target volume must lie in (0, truncated domain area]");
    LoopSetup setup;
    setup.volume_target = c;
    return run_fixed_point(mesh, system, cfg, setup);
}

OptimizeResult minimize_lambda1(const DomainSpec& spec, const OptimizerConfig& cfg, double h,
                                const Box& truncation) {
    const Mesh mesh = build_mesh(spec, h, truncation);
    const AssembledSystem system = assemble(mesh, 0.0);
    return minimize_lambda1(spec, mesh, system, cfg);
}

OptimizeResult penalized_minimize(const DomainSpec& spec, const Mesh& mesh,
                                  const AssembledSystem& system, const OptimizerConfig& cfg) {
    spec.validate();
    if (!cfg.penalty_weight || cfg.target_volume)
        throw ValidationError("penalized mode needs penalty_weight and no target_volume");
    const double weight = *cfg.penalty_weight;
    if (!(weight > 0)) throw ValidationError("penalty weight must be positive");

    // start from twice the flat-wall equilibrium volume so that the fixed
    // point is approached by shedding cells (the calibrated margin)
    const double j0 = bessel_j0_first_zero();
    const double pi = std::numbers::pi;
    const double r_eq_sq = std::sqrt(2.0 * j0 * j0 / (pi * weight));
    const double v_eq = 0.5 * pi * r_eq_sq;
    const double mean_cell = mesh.total_area / mesh.num_triangles();
    LoopSetup setup;
    setup.penalized = true;
    setup.weight = weight;
    setup.volume_target =
        std::clamp(2.0 * v_eq, 8.0 * mean_cell, 0.6 * mesh.total_area);
    return run_fixed_point(mesh, system, cfg, setup);
}

OptimizeResult penalized_minimize(const DomainSpec& spec, const OptimizerConfig& cfg, double h,
                                  const Box& truncation) {
    const Mesh mesh = build_mesh(spec, h, truncation);
    const AssembledSystem system = assemble(mesh, 0.0);
    return penalized_minimize(spec, mesh, system, cfg);
}

namespace {

double parabola_arclength(const ParabolaObstacle& par, double x_from, double x_to) {
    // composite Simpson on sqrt(1 + q'(x)^2)
    const int n = 400;  // even
    const double dx = (x_to - x_from) / n;
    auto f = [&](double x) { return std::hypot(1.0, par.slope(x)); };
    double s = f(x_from) + f(x_to);
    for (int i = 1; i < n; ++i) s += f(x_from + i * dx) * (i % 2 ? 4.0 : 2.0);
    return s * dx / 3.0;
}

Vec2 parabola_point_at_arclength(const ParabolaObstacle& par, double s) {
    const double apex_x = -par.b / (2.0 * par.a);
    if (s == 0) return Vec2(apex_x, par.eval(apex_x));
    const double dir = s > 0 ? 1.0 : -1.0;
    const double target = std::abs(s);
    double lo = apex_x, hi = apex_x + dir * target;  // integrand >= 1
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double len = std::abs(parabola_arclength(par, apex_x, mid));
        if (len < target)
            lo = mid;
        else
            hi = mid;
    }
    const double x = 0.5 * (lo + hi);
    return Vec2(x, par.eval(x));
}

}  // namespace

std::vector<DriftSample> drift_experiment(const DomainSpec& spec, double radius,
                                          const std::vector<double>& positions, double c,
                                          const DriftParams& params) {
    spec.validate();
    const bool flat = spec.kind == DomainKind::HalfPlane;
    if (!flat) {
        if (spec.kind != DomainKind::ExteriorConvex || !spec.obstacle_parabola)
            throw ValidationError("drift experiment needs a strictly convex obstacle "
                                  "(parabola) or the flat half-plane control");
    }
    if (!(radius > 0)) throw ValidationError("ball radius must be positive");
    if (!(c > 0)) throw ValidationError("target volume must be positive");
    if (positions.empty()) throw ValidationError("no boundary positions given");

    const double h = params.h;
    const double halfwidth = params.box_halfwidth > 0 ? params.box_halfwidth : radius + 6 * h;
    if (halfwidth < radius + 2 * h)
        throw ValidationError("ball exits the truncation box; enlarge box_halfwidth");

    std::vector<DriftSample> samples;
    for (double s : positions) {
        const Vec2 p = flat ? Vec2(s, 0.0)
                            : parabola_point_at_arclength(*spec.obstacle_parabola, s);
        Box box{p.x() - halfwidth, p.y() - halfwidth, p.x() + halfwidth, p.y() + halfwidth};
        const Mesh mesh = build_mesh(spec, h, box);
        const AssembledSystem system = assemble(mesh, 0.0);

        std::vector<char> mask(mesh.num_triangles(), 0);
        double available = 0;
        for (int t = 0; t < mesh.num_triangles(); ++t) {
            if ((mesh.tri_centroid[t] - p).norm() <= radius) {
                mask[t] = 1;
                available += mesh.tri_area[t];
            }
        }
        if (available < c)
            throw ValidationError("ball does not contain the target volume at position " +
                                  std::to_string(s));

        OptimizerConfig cfg = params.optimizer;
        cfg.target_volume = c;
        cfg.penalty_weight.reset();
        cfg.init = InitKind::BallAtBoundary;
        cfg.init_candidates = 1;
        LoopSetup setup;
        setup.volume_target = c;
        setup.mask = mask;
        setup.init_point = p;
        const OptimizeResult r = run_fixed_point(mesh, system, cfg, setup);

        DriftSample sample;
        sample.arclength = s;
        sample.abs_x = p.norm();
        sample.point = p;
        sample.lambda = r.lambda;
        sample.volume = volume(r.chi, mesh);
        samples.push_back(sample);
    }
    std::sort(samples.begin(), samples.end(),
              [](const DriftSample& a, const DriftSample& b) { return a.abs_x < b.abs_x; });
    return samples;
}

namespace {

Vec2 tri_gradient(const Mesh& mesh, const std::array<int, 3>& tri, const ScalarField& u) {
    const Vec2& a = mesh.vertices[tri[0]];
    const Vec2& b = mesh.vertices[tri[1]];
    const Vec2& c = mesh.vertices[tri[2]];
    const double area2 = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
    const Vec2 g0(b.y() - c.y(), c.x() - b.x());
    const Vec2 g1(c.y() - a.y(), a.x() - c.x());
    const Vec2 g2(a.y() - b.y(), b.x() - a.x());
    return (u[tri[0]] * g0 + u[tri[1]] * g1 + u[tri[2]] * g2) / area2;
}

}  // namespace

OptimalityReport optimality_report(const DensityField& chi, const SpectralResult& spectral,
                                   const Mesh& mesh, std::optional<double> penalty_weight) {
    if (chi.size() != mesh.num_triangles())
        throw ValidationError("density size does not match the mesh");
    if (!chi.is_binary(1e-9)) throw ValidationError("optimality report needs a binary density");
    if (spectral.eigenfunctions.empty()) throw ValidationError("spectral result has no pairs");
    const ScalarField& u = spectral.eigenfunctions.front();
    const double lambda = spectral.eigenvalues.front();

    const auto edges = build_edges(mesh);

    // drop-side recovered gradient per vertex (area weighted)
    std::vector<Vec2> grad(mesh.num_vertices(), Vec2::Zero());
    std::vector<double> wsum(mesh.num_vertices(), 0.0);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        if (chi.values[t] < 0.5) continue;
        const Vec2 g = tri_gradient(mesh, mesh.triangles[t], u);
        for (int v : mesh.triangles[t]) {
            grad[v] += mesh.tri_area[t] * g;
            wsum[v] += mesh.tri_area[t];
        }
    }

    OptimalityReport rep;

    std::vector<Vec2> free_midpoints;
    std::vector<double> samples;
    std::set<int> wall_vertices;
    for (const auto& be : mesh.boundary_edges)
        if (be.tag == BoundaryTag::NeumannPhysical) {
            wall_vertices.insert(be.v0);
            wall_vertices.insert(be.v1);
        }

    std::set<int> contact_vertices;
    for (const auto& e : edges) {
        if (e.t1 < 0) continue;
        const bool in0 = chi.values[e.t0] > 0.5;
        const bool in1 = chi.values[e.t1] > 0.5;
        if (in0 == in1) continue;
        const Vec2 mid = 0.5 * (mesh.vertices[e.v0] + mesh.vertices[e.v1]);
        free_midpoints.push_back(mid);
        Vec2 g = Vec2::Zero();
        double w = 0;
        for (int v : {e.v0, e.v1})
            if (wsum[v] > 0) {
                g += grad[v];
                w += 1;
            }
        if (w > 0) samples.push_back((g / w).norm());
        for (int v : {e.v0, e.v1})
            if (wall_vertices.count(v)) contact_vertices.insert(v);
    }

    if (!samples.empty()) {
        double mean = 0;
        for (double v : samples) mean += v;
        mean /= samples.size();
        double var = 0;
        for (double v : samples) var += (v - mean) * (v - mean);
        var /= samples.size();
        rep.grad_mean = mean;
        rep.grad_cv = mean > 0 ? std::sqrt(var) / mean : 0.0;
    }

    // wall contact flag
    for (const auto& e : edges) {
        if (e.boundary_tag != static_cast<int>(BoundaryTag::NeumannPhysical)) continue;
        if (chi.values[e.t0] > 0.5) {
            rep.touches_boundary = true;
            break;
        }
    }

    // contact angles: cluster contact vertices, then fit a line through the
    // nearby free-boundary midpoints (weights decaying away from the contact)
    std::vector<int> contacts(contact_vertices.begin(), contact_vertices.end());
    std::sort(contacts.begin(), contacts.end(), [&](int a, int b) {
        const Vec2 &pa = mesh.vertices[a], &pb = mesh.vertices[b];
        if (pa.x() != pb.x()) return pa.x() < pb.x();
        return pa.y() < pb.y();
    });
    const double cluster_radius = 3.0 * mesh.h;
    std::vector<Vec2> reps;
    for (int v : contacts) {
        const Vec2& p = mesh.vertices[v];
        bool merged = false;
        for (const Vec2& r : reps)
            if ((p - r).norm() <= cluster_radius) {
                merged = true;
                break;
            }
        if (!merged) reps.push_back(p);
    }
    const double window = 4.0 * mesh.h;
    for (const Vec2& p : reps) {
        // wall tangent from the nearby physical edges
        Vec2 tangent = Vec2::Zero();
        for (const auto& be : mesh.boundary_edges) {
            if (be.tag != BoundaryTag::NeumannPhysical) continue;
            const Vec2 mid = 0.5 * (mesh.vertices[be.v0] + mesh.vertices[be.v1]);
            if ((mid - p).norm() > window) continue;
            Vec2 d = (mesh.vertices[be.v1] - mesh.vertices[be.v0]).normalized();
            if (tangent.squaredNorm() > 0 && tangent.dot(d) < 0) d = -d;
            tangent += d;
        }
        if (tangent.squaredNorm() == 0) continue;
        tangent.normalize();

        Vec2 mean = Vec2::Zero();
        double wtot = 0;
        std::vector<std::pair<Vec2, double>> pts;
        for (const Vec2& m : free_midpoints) {
            const double d = (m - p).norm();
            if (d > window) continue;
            const double w = window - d;
            pts.emplace_back(m, w);
            mean += w * m;
            wtot += w;
        }
        if (pts.size() < 3) continue;
        mean /= wtot;
        Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
        for (const auto& [m, w] : pts) {
            const Vec2 d = m - mean;
            cov += w * d * d.transpose();
        }
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
        const Vec2 dir = es.eigenvectors().col(1);  // principal direction
        const double cosang = std::min(1.0, std::abs(dir.dot(tangent)));
        rep.contact_angles_deg.push_back(std::acos(cosang) * 180.0 / std::numbers::pi);
    }

    if (penalty_weight) {
        if (!(*penalty_weight > 0)) throw ValidationError("penalty weight must be positive");
        const double praw = relative_perimeter(chi, mesh);
        // axis-aligned staircase overestimates smooth perimeter by 4/pi on
        // average; the debiased value feeds the one-sided inequality check
        const double pdeb = praw * std::numbers::pi / 4.0;
        const double vol = volume(chi, mesh);
        const double rhs = lambda * std::sqrt(vol) / std::sqrt(*penalty_weight);
        rep.perimeter_raw = praw;
        rep.perimeter_debiased = pdeb;
        rep.perimeter_bound_rhs = rhs;
        rep.perimeter_slack = rhs - pdeb;
        rep.perimeter_bound_holds = pdeb <= rhs;
    }
    return rep;
}

}  // namespace spectral_drop
