#pragma once

#include "spectral_drop/common.hpp"
#include "spectral_drop/geometry.hpp"

#include <Eigen/Sparse>
#include <vector>

namespace spectral_drop {

using SparseMat = Eigen::SparseMatrix<double>;

/// P1 operators on the full vertex set. The artificial-truncation vertices are
/// listed in constrained_dofs and eliminated at solve time (homogeneous
/// Dirichlet); the Dirichlet condition on the drop complement is imposed by a
/// mass penalty, never by elimination, so relaxed densities stay admissible.
struct AssembledSystem {
    SparseMat stiffness;  // int grad u . grad v
    SparseMat mass;       // int u v (consistent, exact for P1)
    SparseMat robin;      // robin_k * int_{physical boundary} u v
    double robin_k = 0;

    std::vector<int> constrained_dofs;   // vertices on artificial edges
    std::vector<int> free_of_vertex;     // -1 if constrained
    std::vector<int> vertex_of_free;
    int n_vertices = 0;
    int n_free = 0;

    // triangle data retained for cell-wise penalty assembly
    std::vector<std::array<int, 3>> triangles;
    std::vector<double> tri_area;
    double mesh_h = 0;
    double domain_area = 0;  // measure of the meshed region
};

/// Eigenpairs of (stiffness + robin + penalty) u = lambda mass u on the free
/// dofs, extended by zero to constrained vertices. Eigenvalues ascend and the
/// eigenfunctions are mass-orthonormal.
struct SpectralResult {
    std::vector<double> eigenvalues;
    std::vector<ScalarField> eigenfunctions;
    /// Relative residual |(A - lambda B; u)| / |(A + delta B) u| per pair,
    /// where delta is the solver shift. Scale-aware so that the pure Neumann
    /// mode (lambda = 0) is handled gracefully.
    std::vector<double> residuals;
    double penalty_M = 0;
    int iterations = 0;
};

AssembledSystem assemble(const Mesh& mesh, double robin_k);

/// M * int (1 - chi) u v, assembled cell-wise with the exact P1 mass rule.
/// Zero where chi = 1, symmetric positive semidefinite.
SparseMat penalty_operator(const DensityField& chi, double M, const AssembledSystem& system);

struct EigOptions {
    int num_eigs = 1;
    double tol = 1e-8;
    unsigned seed = 1234;
    int max_iterations = 200;
};

/// Smallest-K eigenpairs via shifted block inverse iteration with
/// Rayleigh-Ritz extraction. Deterministic for a fixed seed.
SpectralResult solve_eigs(const AssembledSystem& system, const DensityField& chi, double M,
                          const EigOptions& opts);

inline SpectralResult solve_eigs(const AssembledSystem& system, const DensityField& chi, double M,
                                 int num_eigs, double tol = 1e-8, unsigned seed = 1234) {
    EigOptions o;
    o.num_eigs = num_eigs;
    o.tol = tol;
    o.seed = seed;
    return solve_eigs(system, chi, M, o);
}

/// Minimizer of 1/2 <(stiffness+robin+penalty) u, u> - <mass f, u>.
/// Relative residual of the linear system at most 1e-10.
ScalarField solve_poisson(const AssembledSystem& system, const DensityField& chi, double M,
                          const ScalarField& f);

struct EnergyResult {
    ScalarField w;           // energy function: -Laplace w = 1 on the drop
    double dirichlet_energy; // -1/2 int w
};

EnergyResult energy_function(const AssembledSystem& system, const DensityField& chi, double M);

/// Minimizer of <(stiffness+robin+penalty) v, v> + m <mass (u-v), (u-v)>:
/// the H1 proximal map of u onto the (penalized) drop subspace. For u
/// vanishing off the drop, |A_m(u) - u|_L2 <= m^{-1/2} |grad u|_L2.
ScalarField proximal(const AssembledSystem& system, const DensityField& chi, double M, double m,
                     const ScalarField& u);

// small shared helpers

SparseMat restrict_to_free(const SparseMat& full, const AssembledSystem& system);
Eigen::VectorXd restrict_vector(const Eigen::VectorXd& full, const AssembledSystem& system);
ScalarField extend_to_vertices(const Eigen::VectorXd& reduced, const AssembledSystem& system);

/// Exact mean of the squared P1 interpolant over each triangle.
Eigen::VectorXd cell_mean_sq(const ScalarField& u, const AssembledSystem& system);

inline double dirichlet_product(const AssembledSystem& s, const ScalarField& a, const ScalarField& b) {
    return a.dot(s.stiffness * b);
}
inline double mass_product(const AssembledSystem& s, const ScalarField& a, const ScalarField& b) {
    return a.dot(s.mass * b);
}

}  // namespace spectral_drop
