#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace spectral_drop {

using Vec2 = Eigen::Vector2d;

/// One real value per mesh vertex.
using ScalarField = Eigen::VectorXd;

/// Invalid input: bad domain description, malformed config, size mismatch.
/// Maps to CLI exit code 2.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid geometry (empty clip, degenerate domain). A kind of validation error.
struct GeometryError : ValidationError {
    using ValidationError::ValidationError;
};

/// A linear solve or eigensolve failed to converge. Maps to CLI exit code 3.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace spectral_drop
