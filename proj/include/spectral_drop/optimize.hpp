#pragma once

#include "spectral_drop/geometry.hpp"
#include "spectral_drop/pde.hpp"

#include <optional>
#include <vector>

namespace spectral_drop {

enum class InitKind { BallAtBoundary, Random, UserChi };

struct OptimizerConfig {
    // exactly one of the two must be set
    std::optional<double> target_volume;   // constrained mode: |drop| = c
    std::optional<double> penalty_weight;  // penalized mode: lambda1 + weight * |drop|

    /// Penalty continuation levels, multiplied by h^-2 at run time.
    /// Low levels smooth the landscape early, the last level enforces the
    /// Dirichlet surrogate at convergence.
    std::vector<double> penalty_levels{1e2, 1e4, 1e6};

    int max_outer_iters = 200;
    double stop_tol_lambda = 1e-5;
    /// Symmetric-difference stopping tolerance (area). Non-positive: use
    /// twice the mean cell area.
    double stop_tol_volume = 0;

    unsigned seed = 1234;
    double eig_tol = 1e-8;

    InitKind init = InitKind::BallAtBoundary;
    /// Number of candidate boundary seed points tried for BallAtBoundary
    /// (one eigensolve each at the first penalty level, best kept). 1 keeps
    /// only the boundary point nearest the truncation-box center.
    int init_candidates = 1;
    DensityField user_chi;
};

struct TraceRow {
    int iter = 0;
    double lambda1 = 0;
    double volume = 0;
    double perimeter = 0;
    double sym_diff = 0;  // symmetric difference to the previous iterate
    double penalty_M = 0;
};

struct OptimizerTrace {
    std::vector<TraceRow> rows;
};

struct OptimizeResult {
    DensityField chi;
    double lambda = 0;
    double objective = 0;  // lambda (+ weight * volume in penalized mode)
    OptimizerTrace trace;
    SpectralResult spectral;  // spectrum of the returned chi
    bool truncation_warning = false;  // drop mass detected near artificial edges
};

/// Binary projection of u onto the volume constraint: cells ranked by the
/// exact cell mean of u^2 (descending, ties by ascending index) and taken
/// until the accumulated area reaches c. The result overshoots c by at most
/// one cell.
DensityField threshold_projection(const ScalarField& u, const Mesh& mesh, double c);

/// Variant that restricts the admissible cells (used by the localized drift
/// solves). Cells with mask = false never enter the drop.
DensityField threshold_projection_masked(const ScalarField& u, const Mesh& mesh, double c,
                                         const std::vector<char>& admissible);

/// Fixed-point iteration for min lambda1 under |drop| = c: alternate an
/// eigensolve on the current drop with the volume projection of the first
/// eigenfunction, advancing the penalty along the continuation schedule.
/// The scheme is not guaranteed monotone; the best iterate at the final
/// penalty level is returned and the trace exposes any increase.
OptimizeResult minimize_lambda1(const DomainSpec& spec, const Mesh& mesh,
                                const AssembledSystem& system, const OptimizerConfig& cfg);

/// Convenience overload that builds the mesh and operators.
OptimizeResult minimize_lambda1(const DomainSpec& spec, const OptimizerConfig& cfg, double h,
                                const Box& truncation);

/// Penalized form: cells are kept where the stationarity test
///   M_station * cellmean(u1^2) >= weight
/// holds, the discrete first-order balance of lambda1 + weight * |drop| (a
/// cell is worth its eigenvalue perturbation against its area cost).
/// M_station is the calibrated stationarity scale kappa / h^2; the raw solve
/// penalty would freeze the iteration, see the implementation note.
OptimizeResult penalized_minimize(const DomainSpec& spec, const Mesh& mesh,
                                  const AssembledSystem& system, const OptimizerConfig& cfg);

OptimizeResult penalized_minimize(const DomainSpec& spec, const OptimizerConfig& cfg, double h,
                                  const Box& truncation);

struct DriftSample {
    double arclength = 0;  // position along the obstacle boundary
    double abs_x = 0;      // distance of the boundary point from the origin
    Vec2 point{0, 0};
    double lambda = 0;
    double volume = 0;
};

struct DriftParams {
    double h = 1.0 / 32;
    double box_halfwidth = 0;  // 0: auto = radius + 6h
    OptimizerConfig optimizer; // target_volume required
};

/// Localized constrained optimization in balls B_R(x_n) around boundary
/// points x_n: the non-existence mechanism makes the optimal values decrease
/// as the boundary flattens. Output sorted by |x_n|.
std::vector<DriftSample> drift_experiment(const DomainSpec& spec, double radius,
                                          const std::vector<double>& positions, double c,
                                          const DriftParams& params);

struct OptimalityReport {
    /// Coefficient of variation of |grad u1| along free-boundary edge
    /// midpoints (gradient recovered from drop-side cells only).
    double grad_cv = 0;
    double grad_mean = 0;
    std::vector<double> contact_angles_deg;
    bool touches_boundary = false;
    // subsolution perimeter bound, present when a penalty weight is given
    std::optional<double> perimeter_raw;
    std::optional<double> perimeter_debiased;  // raw * pi/4 staircase debias
    std::optional<double> perimeter_bound_rhs;
    std::optional<double> perimeter_slack;
    std::optional<bool> perimeter_bound_holds;
};

/// Necessary-condition diagnostics on a binary drop: constancy of |grad u1|
/// on the free boundary, orthogonal contact with the container wall, wall
/// contact, and (penalized mode) the subsolution perimeter bound
/// P <= weight^{-1/2} lambda1 |drop|^{1/2}.
OptimalityReport optimality_report(const DensityField& chi, const SpectralResult& spectral,
                                   const Mesh& mesh, std::optional<double> penalty_weight);

}  // namespace spectral_drop
