#include "spectral_drop/pde.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace spectral_drop {

namespace {

using Triplet = Eigen::Triplet<double>;

// local P1 mass rule: area/12 * [2 1 1; 1 2 1; 1 1 2], exact for products of
// affine basis functions
void add_cell_mass(std::vector<Triplet>& out, const std::array<int, 3>& tri, double area,
                   double scale) {
    const double off = scale * area / 12.0;
    const double diag = 2.0 * off;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) out.emplace_back(tri[i], tri[j], i == j ? diag : off);
    }
}

double checked_volume(const DensityField& chi, const AssembledSystem& s) {
    if (chi.size() != static_cast<int>(s.triangles.size()))
        throw ValidationError("density size does not match the assembled mesh");
    chi.validate_range(1e-9);
    double v = 0;
    for (size_t t = 0; t < s.triangles.size(); ++t) v += chi.values[t] * s.tri_area[t];
    return v;
}

SparseMat operator_sum(const AssembledSystem& s, const SparseMat& penalty) {
    SparseMat a = s.stiffness + penalty;
    if (s.robin_k != 0.0) a += s.robin;
    return a;
}

// deterministic uniform(-1,1) start entries; avoids distribution classes whose
// streams differ across standard library implementations
double uniform_pm1(std::mt19937_64& rng) {
    return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
}

// modified Gram-Schmidt in the B inner product, two passes
void b_orthonormalize(Eigen::MatrixXd& x, const SparseMat& b) {
    const int p = static_cast<int>(x.cols());
    Eigen::MatrixXd bx(x.rows(), p);
    for (int j = 0; j < p; ++j) {
        Eigen::VectorXd v = x.col(j);
        for (int pass = 0; pass < 2; ++pass) {
            for (int i = 0; i < j; ++i) {
                const double c = bx.col(i).dot(v);
                v -= c * x.col(i);
            }
        }
        Eigen::VectorXd bv = b * v;
        double nrm = std::sqrt(std::max(0.0, v.dot(bv)));
        if (nrm < 1e-140) {
            // degenerate start column: replace by a unit vector
            v.setZero();
            v[j % v.size()] = 1.0;
            bv = b * v;
            nrm = std::sqrt(v.dot(bv));
        }
        x.col(j) = v / nrm;
        bx.col(j) = bv / nrm;
    }
}

}  // namespace

AssembledSystem assemble(const Mesh& mesh, double robin_k) {
    if (robin_k < 0) throw ValidationError("robin coefficient must be nonnegative");
    AssembledSystem s;
    s.robin_k = robin_k;
    s.n_vertices = mesh.num_vertices();
    s.triangles = mesh.triangles;
    s.tri_area = mesh.tri_area;
    s.mesh_h = mesh.h;
    s.domain_area = mesh.total_area;

    std::vector<Triplet> kt, mt, rt;
    kt.reserve(mesh.num_triangles() * 9);
    mt.reserve(mesh.num_triangles() * 9);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        const double area = mesh.tri_area[t];
        if (area < 1e-14 * mesh.h * mesh.h)
            throw ValidationError("degenerate triangle in assembly");
        const Vec2& a = mesh.vertices[tri[0]];
        const Vec2& b = mesh.vertices[tri[1]];
        const Vec2& c = mesh.vertices[tri[2]];
        // gradients of the barycentric basis
        const Vec2 g0(b.y() - c.y(), c.x() - b.x());
        const Vec2 g1(c.y() - a.y(), a.x() - c.x());
        const Vec2 g2(a.y() - b.y(), b.x() - a.x());
        const Vec2 g[3] = {g0 / (2 * area), g1 / (2 * area), g2 / (2 * area)};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) kt.emplace_back(tri[i], tri[j], area * g[i].dot(g[j]));
        add_cell_mass(mt, tri, area, 1.0);
    }

    std::vector<char> constrained(mesh.num_vertices(), 0);
    for (const auto& be : mesh.boundary_edges) {
        if (be.tag == BoundaryTag::NeumannPhysical) {
            const double len = (mesh.vertices[be.v0] - mesh.vertices[be.v1]).norm();
            const double off = robin_k * len / 6.0;
            rt.emplace_back(be.v0, be.v0, 2 * off);
            rt.emplace_back(be.v1, be.v1, 2 * off);
            rt.emplace_back(be.v0, be.v1, off);
            rt.emplace_back(be.v1, be.v0, off);
        } else {
            constrained[be.v0] = 1;
            constrained[be.v1] = 1;
        }
    }

    const int n = mesh.num_vertices();
    s.stiffness.resize(n, n);
    s.stiffness.setFromTriplets(kt.begin(), kt.end());
    s.mass.resize(n, n);
    s.mass.setFromTriplets(mt.begin(), mt.end());
    s.robin.resize(n, n);
    s.robin.setFromTriplets(rt.begin(), rt.end());

    s.free_of_vertex.assign(n, -1);
    for (int v = 0; v < n; ++v) {
        if (constrained[v]) {
            s.constrained_dofs.push_back(v);
        } else {
            s.free_of_vertex[v] = static_cast<int>(s.vertex_of_free.size());
            s.vertex_of_free.push_back(v);
        }
    }
    s.n_free = static_cast<int>(s.vertex_of_free.size());
    return s;
}

SparseMat penalty_operator(const DensityField& chi, double M, const AssembledSystem& s) {
    if (!(M > 0)) throw ValidationError("penalty coefficient M must be positive");
    checked_volume(chi, s);
    std::vector<Triplet> pt;
    for (size_t t = 0; t < s.triangles.size(); ++t) {
        const double hole = 1.0 - chi.values[t];
        if (hole <= 0) continue;
        add_cell_mass(pt, s.triangles[t], s.tri_area[t], M * hole);
    }
    SparseMat p(s.n_vertices, s.n_vertices);
    p.setFromTriplets(pt.begin(), pt.end());
    return p;
}

SparseMat restrict_to_free(const SparseMat& full, const AssembledSystem& s) {
    std::vector<Triplet> t;
    t.reserve(full.nonZeros());
    for (int k = 0; k < full.outerSize(); ++k) {
        for (SparseMat::InnerIterator it(full, k); it; ++it) {
            const int r = s.free_of_vertex[it.row()];
            const int c = s.free_of_vertex[it.col()];
            if (r >= 0 && c >= 0) t.emplace_back(r, c, it.value());
        }
    }
    SparseMat out(s.n_free, s.n_free);
    out.setFromTriplets(t.begin(), t.end());
    return out;
}

Eigen::VectorXd restrict_vector(const Eigen::VectorXd& full, const AssembledSystem& s) {
    Eigen::VectorXd out(s.n_free);
    for (int i = 0; i < s.n_free; ++i) out[i] = full[s.vertex_of_free[i]];
    return out;
}

ScalarField extend_to_vertices(const Eigen::VectorXd& reduced, const AssembledSystem& s) {
    ScalarField out = ScalarField::Zero(s.n_vertices);
    for (int i = 0; i < s.n_free; ++i) out[s.vertex_of_free[i]] = reduced[i];
    return out;
}

Eigen::VectorXd cell_mean_sq(const ScalarField& u, const AssembledSystem& s) {
    if (u.size() != s.n_vertices) throw ValidationError("field size does not match the mesh");
    Eigen::VectorXd q(s.triangles.size());
    for (size_t t = 0; t < s.triangles.size(); ++t) {
        const auto& tri = s.triangles[t];
        const double a = u[tri[0]], b = u[tri[1]], c = u[tri[2]];
        q[t] = (a * a + b * b + c * c + a * b + a * c + b * c) / 6.0;
    }
    return q;
}

SpectralResult solve_eigs(const AssembledSystem& s, const DensityField& chi, double M,
                          const EigOptions& opts) {
    if (opts.num_eigs < 1) throw ValidationError("need at least one eigenpair");
    if (!(checked_volume(chi, s) > 0)) throw ValidationError("drop has zero volume");
    if (s.n_free == 0) throw ValidationError("no free degrees of freedom");

    const SparseMat a_full = operator_sum(s, penalty_operator(chi, M, s));
    const SparseMat a = restrict_to_free(a_full, s);
    const SparseMat b = restrict_to_free(s.mass, s);
    const int nf = s.n_free;
    const int k = opts.num_eigs;
    if (k > nf) throw ValidationError("more eigenpairs requested than free dofs");
    const int p = std::min(nf, k + std::max(4, k));

    // negative shift keeps the factored operator positive definite even for
    // the pure Neumann problem; scales like an eigenvalue (inverse area)
    const double delta = 1.0 / s.domain_area;
    SparseMat shifted = a + delta * b;
    Eigen::SimplicialLDLT<SparseMat> ldlt(shifted);
    if (ldlt.info() != Eigen::Success)
        throw SolverError("factorization of the shifted operator failed");

    std::mt19937_64 rng(opts.seed);
    Eigen::MatrixXd x(nf, p);
    for (int j = 0; j < p; ++j)
        for (int i = 0; i < nf; ++i) x(i, j) = uniform_pm1(rng);
    b_orthonormalize(x, b);

    Eigen::VectorXd ritz(p);
    std::vector<double> residuals(k, 1.0);
    double best_residual = 1.0;
    int it = 0;
    bool converged = false;
    for (; it < opts.max_iterations; ++it) {
        Eigen::MatrixXd y(nf, p);
        for (int j = 0; j < p; ++j) y.col(j) = ldlt.solve(b * x.col(j));
        b_orthonormalize(y, b);

        const Eigen::MatrixXd ay = a * y;
        const Eigen::MatrixXd by = b * y;
        Eigen::MatrixXd ga = y.transpose() * ay;
        Eigen::MatrixXd gb = y.transpose() * by;
        ga = 0.5 * (ga + ga.transpose()).eval();
        gb = 0.5 * (gb + gb.transpose()).eval();
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(ga, gb);
        if (ges.info() != Eigen::Success) throw SolverError("dense Ritz eigensolve failed");
        ritz = ges.eigenvalues();
        x = y * ges.eigenvectors();

        const Eigen::MatrixXd ax = ay * ges.eigenvectors();
        const Eigen::MatrixXd bx = by * ges.eigenvectors();
        double worst = 0;
        for (int i = 0; i < k; ++i) {
            const Eigen::VectorXd r = ax.col(i) - ritz[i] * bx.col(i);
            const Eigen::VectorXd scale = ax.col(i) + delta * bx.col(i);
            const double denom = std::max(scale.norm(), 1e-300);
            residuals[i] = r.norm() / denom;
            worst = std::max(worst, residuals[i]);
        }
        best_residual = std::min(best_residual, worst);
        if (worst <= opts.tol) {
            converged = true;
            ++it;
            break;
        }
    }
    if (!converged)
        throw SolverError("eigensolver did not converge; best residual " +
                          std::to_string(best_residual));

    SpectralResult res;
    res.penalty_M = M;
    res.iterations = it;
    for (int i = 0; i < k; ++i) {
        Eigen::VectorXd v = x.col(i);
        // canonical sign: the largest-magnitude entry is positive
        int arg = 0;
        for (int j = 1; j < nf; ++j)
            if (std::abs(v[j]) > std::abs(v[arg])) arg = j;
        if (v[arg] < 0) v = -v;
        res.eigenvalues.push_back(ritz[i]);
        res.eigenfunctions.push_back(extend_to_vertices(v, s));
        res.residuals.push_back(residuals[i]);
    }
    return res;
}

namespace {

ScalarField spd_solve(const AssembledSystem& s, const SparseMat& a_full,
                      const Eigen::VectorXd& rhs_full) {
    const SparseMat a = restrict_to_free(a_full, s);
    const Eigen::VectorXd rhs = restrict_vector(rhs_full, s);
    Eigen::SimplicialLDLT<SparseMat> ldlt(a);
    if (ldlt.info() != Eigen::Success) throw SolverError("factorization failed (singular system?)");
    const Eigen::VectorXd x = ldlt.solve(rhs);
    const double rhs_norm = rhs.norm();
    if (rhs_norm > 0) {
        const double rel = (a * x - rhs).norm() / rhs_norm;
        if (!(rel <= 1e-10))
            throw SolverError("linear solve residual " + std::to_string(rel) + " exceeds 1e-10");
    }
    return extend_to_vertices(x, s);
}

}  // namespace

ScalarField solve_poisson(const AssembledSystem& s, const DensityField& chi, double M,
                          const ScalarField& f) {
    if (!(checked_volume(chi, s) > 0)) throw ValidationError("drop has zero volume");
    if (f.size() != s.n_vertices) throw ValidationError("source field size does not match");
    const SparseMat a_full = operator_sum(s, penalty_operator(chi, M, s));
    return spd_solve(s, a_full, s.mass * f);
}

EnergyResult energy_function(const AssembledSystem& s, const DensityField& chi, double M) {
    const ScalarField ones = ScalarField::Ones(s.n_vertices);
    EnergyResult r;
    r.w = solve_poisson(s, chi, M, ones);
    r.dirichlet_energy = -0.5 * ones.dot(s.mass * r.w);
    return r;
}

ScalarField proximal(const AssembledSystem& s, const DensityField& chi, double M, double m,
                     const ScalarField& u) {
    if (!(m > 0)) throw ValidationError("proximal parameter m must be positive");
    if (u.size() != s.n_vertices) throw ValidationError("field size does not match");
    const SparseMat a_full = operator_sum(s, penalty_operator(chi, M, s)) + m * s.mass;
    return spd_solve(s, a_full, m * (s.mass * u));
}

}  // namespace spectral_drop
