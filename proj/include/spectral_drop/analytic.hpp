#pragma once

#include "spectral_drop/geometry.hpp"

#include <string>

namespace spectral_drop {

/// Bessel J0 by its power series (adequate over the range used here).
double bessel_j0(double x);

/// First positive zero of J0, by bisection on the series, 12+ significant
/// digits. The principal eigenvalue of the unit disc is its square.
double bessel_j0_first_zero();

/// Closed-form optimum for one of the solved container geometries.
struct ReferenceSolution {
    DomainKind kind = DomainKind::HalfPlane;
    double volume = 0;
    double lambda = 0;
    double radius = 0;       // half-disc or truncated-sector radius (0 if n/a)
    double rect_length = 0;  // rectangle branch length (0 if n/a)
    std::string shape;       // human-readable descriptor
    std::string regime;      // proof status of this branch at this volume
    std::string note;
};

/// Optimal half-disc on the half-plane wall: r = sqrt(2c/pi),
/// lambda = j01^2 / r^2.
ReferenceSolution reference_half_plane(double c);

/// Optimal apex-truncated sector: r0 = sqrt(c/alpha), lambda = (j01/r0)^2.
/// alpha is the half-angle, in (0, pi/2].
ReferenceSolution reference_sector(double alpha, double c);

/// Both candidate optima in the strip R x (0, width). The half-disc branch is
/// proved optimal for c <= 2 width^2 / pi and the rectangle branch for
/// c >= 2 sqrt(2) pi width^2; in between the branches are compared
/// numerically only. The half-disc radius follows from the area identity
/// pi r^2 / 2 = c.
struct StripReference {
    ReferenceSolution half_disc;
    ReferenceSolution rectangle;
    double crossover_c = 0;  // branch formulas cross at 2 pi width^2 / j01^2
    std::string proved_regime;  // "half-disc", "rectangle", or "neither-proved"
    const ReferenceSolution& winner() const {
        return half_disc.lambda <= rectangle.lambda ? half_disc : rectangle;
    }
};

StripReference reference_strip(double c, double width = 1.0);

}  // namespace spectral_drop
