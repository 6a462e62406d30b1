#include "spectral_drop/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace spectral_drop {

double gamma_distance(const DensityField& a, const DensityField& b, const AssembledSystem& system,
                      double M) {
    const ScalarField wa = energy_function(system, a, M).w;
    const ScalarField wb = energy_function(system, b, M).w;
    const ScalarField d = wa - wb;
    return std::sqrt(std::max(0.0, d.dot(system.mass * d)));
}

SequenceDiagnostic weak_gamma_limit(const std::vector<DensityField>& sequence,
                                    const AssembledSystem& system, double M, int num_eigs) {
    if (sequence.size() < 3) throw ValidationError("sequence needs at least 3 terms");
    const int m = static_cast<int>(system.triangles.size());
    for (const auto& chi : sequence)
        if (chi.size() != m) throw ValidationError("sequence terms live on different meshes");

    SequenceDiagnostic diag;
    std::vector<ScalarField> ws;
    for (size_t n = 0; n < sequence.size(); ++n) {
        SequenceTermRecord rec;
        rec.n = static_cast<int>(n);
        ws.push_back(energy_function(system, sequence[n], M).w);
        const SpectralResult sp = solve_eigs(system, sequence[n], M, num_eigs);
        rec.lambdas = sp.eigenvalues;
        double vol = 0;
        for (int t = 0; t < m; ++t) vol += sequence[n].values[t] * system.tri_area[t];
        rec.volume = vol;
        diag.terms.push_back(rec);
    }

    // surrogate limit: the final term's energy function; its positivity set
    // (read per cell against 1e-6 |w|Inf) is the limit drop
    diag.w_limit = ws.back();
    const double eps_w = 1e-6 * diag.w_limit.cwiseAbs().maxCoeff();
    diag.support_threshold = eps_w;
    diag.chi_limit = DensityField::zeros(m);
    for (int t = 0; t < m; ++t) {
        const auto& tri = system.triangles[t];
        const double mean = (diag.w_limit[tri[0]] + diag.w_limit[tri[1]] + diag.w_limit[tri[2]]) / 3.0;
        if (mean > eps_w) diag.chi_limit.values[t] = 1.0;
    }
    for (int t = 0; t < m; ++t) diag.limit_volume += diag.chi_limit.values[t] * system.tri_area[t];

    const SpectralResult limit_sp = solve_eigs(system, diag.chi_limit, M, num_eigs);
    diag.limit_lambdas = limit_sp.eigenvalues;

    const ScalarField w_chi_limit = energy_function(system, diag.chi_limit, M).w;
    for (size_t n = 0; n < sequence.size(); ++n) {
        const ScalarField d = ws[n] - w_chi_limit;
        diag.terms[n].gamma_dist_to_limit = std::sqrt(std::max(0.0, d.dot(system.mass * d)));
    }

    // verdicts against the tail (second half of the sequence)
    const size_t tail_from = sequence.size() / 2;
    double tail_min_vol = std::numeric_limits<double>::infinity();
    std::vector<double> tail_min_lambda(num_eigs, std::numeric_limits<double>::infinity());
    for (size_t n = tail_from; n < sequence.size(); ++n) {
        tail_min_vol = std::min(tail_min_vol, diag.terms[n].volume);
        for (int k = 0; k < num_eigs; ++k)
            tail_min_lambda[k] = std::min(tail_min_lambda[k], diag.terms[n].lambdas[k]);
    }
    const double mean_cell = system.domain_area / m;
    diag.volume_semicontinuous = diag.limit_volume <= tail_min_vol + mean_cell + 1e-9;
    for (int k = 0; k < num_eigs; ++k) {
        const double tol = 1e-8 * (1.0 + std::abs(tail_min_lambda[k]));
        diag.lambda_semicontinuous.push_back(diag.limit_lambdas[k] <= tail_min_lambda[k] + tol);
    }
    return diag;
}

double superlevel_area(const ScalarField& u, const Mesh& mesh, double t) {
    double area = 0;
    for (int tr = 0; tr < mesh.num_triangles(); ++tr) {
        const auto& tri = mesh.triangles[tr];
        double v[3] = {u[tri[0]] - t, u[tri[1]] - t, u[tri[2]] - t};
        // sort descending
        std::sort(v, v + 3, std::greater<double>());
        const double a = mesh.tri_area[tr];
        if (v[0] <= 0) continue;
        if (v[2] >= 0) {
            area += a;
            continue;
        }
        if (v[1] <= 0) {
            // one vertex above: similar triangle at the top corner
            const double f = (v[0] / (v[0] - v[1])) * (v[0] / (v[0] - v[2]));
            area += a * f;
        } else {
            // one vertex below: complement of the bottom corner
            const double f = (v[2] / (v[2] - v[0])) * (v[2] / (v[2] - v[1]));
            area += a * (1.0 - f);
        }
    }
    return area;
}

double level_length(const ScalarField& u, const Mesh& mesh, double t) {
    double len = 0;
    for (int tr = 0; tr < mesh.num_triangles(); ++tr) {
        const auto& tri = mesh.triangles[tr];
        Vec2 pts[2];
        int npts = 0;
        for (int e = 0; e < 3 && npts < 2; ++e) {
            const int i = tri[e], j = tri[(e + 1) % 3];
            const double a = u[i] - t, b = u[j] - t;
            if ((a > 0) == (b > 0)) continue;
            const double s = a / (a - b);
            pts[npts++] = mesh.vertices[i] + s * (mesh.vertices[j] - mesh.vertices[i]);
        }
        if (npts == 2) len += (pts[0] - pts[1]).norm();
    }
    return len;
}

double coarea_lower_bound(const ScalarField& u, const Mesh& mesh, int nlevels) {
    if (u.size() != mesh.num_vertices()) throw ValidationError("field size does not match");
    if (nlevels < 10) throw ValidationError("need at least 10 levels");
    const double umax = u.maxCoeff();
    const double umin = u.minCoeff();
    if (umin < -1e-10 * std::max(1.0, std::abs(umax)))
        throw ValidationError("co-area bound expects a nonnegative field");
    if (!(umax > umin) || !(umax > 0)) throw ValidationError("field is constant");

    // quantile levels over the positive nodal values
    std::vector<double> pos;
    for (int i = 0; i < u.size(); ++i)
        if (u[i] > 0) pos.push_back(u[i]);
    std::sort(pos.begin(), pos.end());
    std::vector<double> levels{0.0};
    for (int j = 1; j <= nlevels; ++j) {
        const size_t idx = std::min(pos.size() - 1,
                                    static_cast<size_t>(static_cast<double>(j) /
                                                        (nlevels + 1) * pos.size()));
        const double t = pos[idx];
        if (t > levels.back()) levels.push_back(t);
    }
    if (levels.back() < umax) levels.push_back(umax);

    double sum = 0;
    for (size_t j = 0; j + 1 < levels.size(); ++j) {
        const double t0 = levels[j], t1 = levels[j + 1];
        const double dt = t1 - t0;
        if (dt <= 0) continue;
        const double df = superlevel_area(u, mesh, t0) - superlevel_area(u, mesh, t1);
        if (df <= 1e-300) continue;  // degenerate bin contributes nothing (one-sided)
        const double len = level_length(u, mesh, 0.5 * (t0 + t1));
        sum += len * len * dt * dt / df;
    }
    return sum;
}

ScalarField symmetrize_sector(const ScalarField& u, const Mesh& mesh, const DomainSpec& spec) {
    if (u.size() != mesh.num_vertices()) throw ValidationError("field size does not match");
    double alpha;
    if (spec.kind == DomainKind::Sector)
        alpha = spec.sector_alpha;
    else if (spec.kind == DomainKind::HalfPlane)
        alpha = std::numbers::pi / 2.0;
    else
        throw ValidationError("rearrangement supports sector and half-plane containers");
    const double umin = u.minCoeff();
    if (umin < -1e-10 * std::max(1.0, u.cwiseAbs().maxCoeff()))
        throw ValidationError("rearrangement expects a nonnegative field");

    const double umax = u.maxCoeff();
    if (!(umax > 0)) return ScalarField::Zero(u.size());

    // distribution table mu(t) = |{u > t}| on thinned nodal levels
    std::vector<double> vals(u.data(), u.data() + u.size());
    std::sort(vals.begin(), vals.end());
    std::vector<double> levels{0.0};
    const size_t max_levels = 4000;
    const size_t stride = std::max<size_t>(1, vals.size() / max_levels);
    for (size_t i = 0; i < vals.size(); i += stride)
        if (vals[i] > levels.back()) levels.push_back(vals[i]);
    if (levels.back() < umax) levels.push_back(umax);
    std::vector<double> mu(levels.size());
    for (size_t i = 0; i < levels.size(); ++i) mu[i] = superlevel_area(u, mesh, levels[i]);

    // u~(x) = sup { t : mu(t) >= alpha |x|^2 } interpolated on the table
    // (mu decreasing); alpha r^2 is the measure of B_r within the container
    ScalarField out(u.size());
    for (int i = 0; i < u.size(); ++i) {
        const double target = alpha * mesh.vertices[i].squaredNorm();
        if (target >= mu.front()) {
            out[i] = 0.0;
            continue;
        }
        if (target <= mu.back()) {
            out[i] = levels.back();
            continue;
        }
        // find the last level with mu >= target
        size_t lo = 0, hi = mu.size() - 1;
        while (lo + 1 < hi) {
            const size_t mid = (lo + hi) / 2;
            if (mu[mid] >= target)
                lo = mid;
            else
                hi = mid;
        }
        const double m0 = mu[lo], m1 = mu[hi];
        const double s = (m0 - target) / std::max(1e-300, m0 - m1);
        out[i] = levels[lo] + s * (levels[hi] - levels[lo]);
    }
    return out;
}

BoundsReport bounds_report(const AssembledSystem& system, const Mesh& mesh,
                           const DensityField& chi, double M, const ScalarField* f, double p,
                           const std::vector<DensityField>* scale_family) {
    const double vol = volume(chi, mesh);
    if (!(vol > 0)) throw ValidationError("drop has zero volume");

    BoundsReport rep;
    const EnergyResult er = energy_function(system, chi, M);
    const SpectralResult sp = solve_eigs(system, chi, M, 1);
    const double lambda = sp.eigenvalues[0];
    rep.lambda1 = lambda;
    rep.volume = vol;

    {
        BoundsCheck c;
        c.name = "dirichlet_energy_bound";
        c.lhs = dirichlet_product(system, er.w, er.w);
        c.rhs = 4.0 * vol / lambda;
        c.slack = c.rhs - c.lhs;
        c.pass = c.lhs <= c.rhs;
        rep.checks.push_back(c);
    }
    {
        BoundsCheck c;
        c.name = "l2_energy_bound";
        c.lhs = mass_product(system, er.w, er.w);
        c.rhs = 4.0 * vol / (lambda * lambda);
        c.slack = c.rhs - c.lhs;
        c.pass = c.lhs <= c.rhs;
        rep.checks.push_back(c);
    }

    if (scale_family && scale_family->size() >= 2) {
        std::vector<double> log_v, log_inv_lambda, log_uinf;
        for (const auto& member : *scale_family) {
            const double v = volume(member, mesh);
            const SpectralResult s = solve_eigs(system, member, M, 1);
            log_v.push_back(std::log(v));
            log_inv_lambda.push_back(std::log(1.0 / s.eigenvalues[0]));
            if (f) {
                const ScalarField uf = solve_poisson(system, member, M, *f);
                log_uinf.push_back(std::log(uf.cwiseAbs().maxCoeff()));
            }
        }
        auto slope = [](const std::vector<double>& x, const std::vector<double>& y) {
            const size_t n = x.size();
            double mx = 0, my = 0;
            for (size_t i = 0; i < n; ++i) {
                mx += x[i];
                my += y[i];
            }
            mx /= n;
            my /= n;
            double num = 0, den = 0;
            for (size_t i = 0; i < n; ++i) {
                num += (x[i] - mx) * (y[i] - my);
                den += (x[i] - mx) * (x[i] - mx);
            }
            return num / den;
        };
        {
            BoundsCheck c;
            c.name = "lambda_volume_exponent";
            c.lhs = slope(log_v, log_inv_lambda);  // expected 2/d = 1 in 2-D
            c.rhs = 1.0;
            c.slack = 0.05 - std::abs(c.lhs - 1.0);
            c.pass = c.lhs >= 0.95 && c.lhs <= 1.05;
            rep.checks.push_back(c);
        }
        if (f) {
            const double expected = 1.0 - (std::isinf(p) ? 0.0 : 1.0 / p);  // 2/d - 1/p, d = 2
            BoundsCheck c;
            c.name = "uf_infinity_exponent";
            c.lhs = slope(log_v, log_uinf);
            c.rhs = expected;
            c.slack = 0.05 * std::max(1.0, std::abs(expected)) - std::abs(c.lhs - expected);
            c.pass = std::abs(c.lhs - expected) <= 0.05 * std::max(1.0, std::abs(expected));
            rep.checks.push_back(c);
        }
    }
    return rep;
}

}  // namespace spectral_drop
