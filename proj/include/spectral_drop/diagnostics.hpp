#pragma once

#include "spectral_drop/geometry.hpp"
#include "spectral_drop/pde.hpp"

#include <string>
#include <vector>

namespace spectral_drop {

/// L2 distance between the energy functions of two drops on the same mesh:
/// the metric underlying gamma-convergence of domains.
double gamma_distance(const DensityField& a, const DensityField& b, const AssembledSystem& system,
                      double M);

struct SequenceTermRecord {
    int n = 0;
    double gamma_dist_to_limit = 0;
    std::vector<double> lambdas;
    double volume = 0;
};

struct SequenceDiagnostic {
    std::vector<SequenceTermRecord> terms;
    ScalarField w_limit;
    DensityField chi_limit;  // cells where the limit energy function is positive
    std::vector<double> limit_lambdas;
    double limit_volume = 0;
    bool volume_semicontinuous = false;
    std::vector<bool> lambda_semicontinuous;  // one verdict per eigenvalue index
    double support_threshold = 0;             // epsilon_w used for chi_limit
};

/// Weak-gamma diagnostics of a drop sequence: per-term energy functions and
/// spectra, a surrogate limit (the final term's energy function, its
/// positivity set read with threshold 1e-6 |w|_inf), and the semicontinuity
/// verdicts |limit| <= min over the tail of |drop_n| and
/// lambda_k(limit) <= min over the tail of lambda_k(n), with tolerances.
/// The tail is the second half of the sequence.
SequenceDiagnostic weak_gamma_limit(const std::vector<DensityField>& sequence,
                                    const AssembledSystem& system, double M, int num_eigs);

/// Riemann sum of |f'(t)|^{-1} length({u = t})^2 dt over quantile levels,
/// with f(t) = |{u > t}| (cell-interpolated) and level lines contoured by
/// edge-wise linear interpolation. Cauchy-Schwarz on the co-area formula
/// bounds the Dirichlet integral from below by this quantity; the contouring
/// error budget is 5 percent.
double coarea_lower_bound(const ScalarField& u, const Mesh& mesh, int nlevels);

/// Radially decreasing rearrangement about the apex (sector) or the wall
/// origin (half-plane): level sets become B_rho(t) intersected with the
/// container at equal measure. Preserves the distribution function; does not
/// increase the Dirichlet integral beyond contouring error.
ScalarField symmetrize_sector(const ScalarField& u, const Mesh& mesh, const DomainSpec& spec);

struct BoundsCheck {
    std::string name;
    double lhs = 0;
    double rhs = 0;
    double slack = 0;  // rhs - lhs
    bool pass = false;
};

struct BoundsReport {
    std::vector<BoundsCheck> checks;
    double lambda1 = 0;
    double volume = 0;
};

/// Energy-function bounds on a drop:
///   (i)  <stiffness w, w> <= 4 |drop| / lambda1
///   (ii) <mass w, w>      <= 4 |drop| / lambda1^2
/// plus, when a scale family of drops is supplied, the scaling-exponent fits
///   (iii) 1/lambda1 proportional to |drop|   (exponent within [0.95, 1.05])
///   (iv)  |u_f|_inf proportional to |f|_p |drop|^{1 - 1/p}  (f given; 2-D)
BoundsReport bounds_report(const AssembledSystem& system, const Mesh& mesh,
                           const DensityField& chi, double M, const ScalarField* f = nullptr,
                           double p = std::numeric_limits<double>::infinity(),
                           const std::vector<DensityField>* scale_family = nullptr);

// level-set helpers shared with the reports (P1 interpolation)

double superlevel_area(const ScalarField& u, const Mesh& mesh, double t);
double level_length(const ScalarField& u, const Mesh& mesh, double t);

}  // namespace spectral_drop
