#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "spectral_drop/analytic.hpp"
#include "spectral_drop/diagnostics.hpp"
#include "spectral_drop/io.hpp"
#include "spectral_drop/optimize.hpp"
#include "spectral_drop/pde.hpp"
#include "spectral_drop/version.hpp"

namespace py = pybind11;
using namespace spectral_drop;

namespace {

Eigen::MatrixXd vertices_matrix(const Mesh& m) {
    Eigen::MatrixXd v(m.num_vertices(), 2);
    for (int i = 0; i < m.num_vertices(); ++i) v.row(i) = m.vertices[i].transpose();
    return v;
}

Eigen::MatrixXi triangles_matrix(const Mesh& m) {
    Eigen::MatrixXi t(m.num_triangles(), 3);
    for (int i = 0; i < m.num_triangles(); ++i)
        t.row(i) << m.triangles[i][0], m.triangles[i][1], m.triangles[i][2];
    return t;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "spectral-drop core: mixed-boundary Laplace eigenproblems and "
              "drop-shape optimization";
    m.attr("__version__") = kVersion;

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

    py::class_<Box>(m, "Box")
        .def(py::init([](double x0, double y0, double x1, double y1) {
                 return Box{x0, y0, x1, y1};
             }),
             py::arg("x0"), py::arg("y0"), py::arg("x1"), py::arg("y1"))
        .def_readwrite("x0", &Box::x0)
        .def_readwrite("y0", &Box::y0)
        .def_readwrite("x1", &Box::x1)
        .def_readwrite("y1", &Box::y1);

    py::class_<DomainSpec>(m, "DomainSpec")
        .def_static("strip", &DomainSpec::strip, py::arg("width"))
        .def_static("half_plane", &DomainSpec::half_plane)
        .def_static("sector", &DomainSpec::sector, py::arg("alpha"))
        .def_static("polygon",
                    [](const std::vector<std::pair<double, double>>& pts) {
                        std::vector<Vec2> v;
                        for (auto [x, y] : pts) v.emplace_back(x, y);
                        return DomainSpec::simple_polygon(std::move(v));
                    },
                    py::arg("vertices"))
        .def_static("exterior_parabola", &DomainSpec::exterior_parabola, py::arg("a"),
                    py::arg("b"), py::arg("c"))
        .def("signed_distance",
             [](const DomainSpec& d, double x, double y) { return d.signed_distance({x, y}); })
        .def("validate", &DomainSpec::validate);

    py::class_<Mesh>(m, "Mesh")
        .def_property_readonly("vertices", &vertices_matrix)
        .def_property_readonly("triangles", &triangles_matrix)
        .def_property_readonly("areas",
                               [](const Mesh& mesh) {
                                   return Eigen::Map<const Eigen::VectorXd>(
                                       mesh.tri_area.data(), mesh.tri_area.size());
                               })
        .def_readonly("h", &Mesh::h)
        .def_readonly("total_area", &Mesh::total_area)
        .def_property_readonly("num_vertices", &Mesh::num_vertices)
        .def_property_readonly("num_triangles", &Mesh::num_triangles);

    py::class_<DensityField>(m, "DensityField")
        .def(py::init([](const Eigen::VectorXd& v) { return DensityField(v); }))
        .def_static("ones", &DensityField::ones)
        .def_static("zeros", &DensityField::zeros)
        .def_readwrite("values", &DensityField::values)
        .def("is_binary", &DensityField::is_binary, py::arg("tol") = 1e-12);

    py::class_<AssembledSystem>(m, "AssembledSystem")
        .def_readonly("robin_k", &AssembledSystem::robin_k)
        .def_readonly("constrained_dofs", &AssembledSystem::constrained_dofs)
        .def_property_readonly("n_vertices", [](const AssembledSystem& s) { return s.n_vertices; })
        .def_property_readonly("n_free", [](const AssembledSystem& s) { return s.n_free; });

    py::class_<SpectralResult>(m, "SpectralResult")
        .def_readonly("eigenvalues", &SpectralResult::eigenvalues)
        .def_readonly("eigenfunctions", &SpectralResult::eigenfunctions)
        .def_readonly("residuals", &SpectralResult::residuals)
        .def_readonly("penalty_M", &SpectralResult::penalty_M)
        .def_readonly("iterations", &SpectralResult::iterations);

    m.def("build_mesh", &build_mesh, py::arg("spec"), py::arg("h"), py::arg("truncation"));
    m.def("volume", &volume, py::arg("chi"), py::arg("mesh"));
    m.def("relative_perimeter", &relative_perimeter, py::arg("chi"), py::arg("mesh"));
    m.def("assemble", &assemble, py::arg("mesh"), py::arg("robin_k") = 0.0);
    m.def("solve_eigs",
          [](const AssembledSystem& s, const DensityField& chi, double M, int k, double tol,
             unsigned seed) { return solve_eigs(s, chi, M, k, tol, seed); },
          py::arg("system"), py::arg("chi"), py::arg("M"), py::arg("num_eigs") = 1,
          py::arg("tol") = 1e-8, py::arg("seed") = 1234);
    m.def("solve_poisson", &solve_poisson, py::arg("system"), py::arg("chi"), py::arg("M"),
          py::arg("f"));
    m.def("energy_function",
          [](const AssembledSystem& s, const DensityField& chi, double M) {
              const EnergyResult r = energy_function(s, chi, M);
              return py::make_tuple(r.w, r.dirichlet_energy);
          },
          py::arg("system"), py::arg("chi"), py::arg("M"));
    m.def("proximal", &proximal, py::arg("system"), py::arg("chi"), py::arg("M"), py::arg("m"),
          py::arg("u"));

    m.def("bessel_j0", &bessel_j0);
    m.def("bessel_j0_first_zero", &bessel_j0_first_zero);

    py::class_<ReferenceSolution>(m, "ReferenceSolution")
        .def_readonly("volume", &ReferenceSolution::volume)
        .def_readonly("lambda_", &ReferenceSolution::lambda)
        .def_readonly("radius", &ReferenceSolution::radius)
        .def_readonly("rect_length", &ReferenceSolution::rect_length)
        .def_readonly("shape", &ReferenceSolution::shape)
        .def_readonly("regime", &ReferenceSolution::regime);
    py::class_<StripReference>(m, "StripReference")
        .def_readonly("half_disc", &StripReference::half_disc)
        .def_readonly("rectangle", &StripReference::rectangle)
        .def_readonly("crossover_c", &StripReference::crossover_c)
        .def_readonly("proved_regime", &StripReference::proved_regime);
    m.def("reference_half_plane", &reference_half_plane, py::arg("c"));
    m.def("reference_sector", &reference_sector, py::arg("alpha"), py::arg("c"));
    m.def("reference_strip", &reference_strip, py::arg("c"), py::arg("width") = 1.0);

    py::enum_<InitKind>(m, "InitKind")
        .value("BallAtBoundary", InitKind::BallAtBoundary)
        .value("Random", InitKind::Random)
        .value("UserChi", InitKind::UserChi);

    py::class_<OptimizerConfig>(m, "OptimizerConfig")
        .def(py::init<>())
        .def_readwrite("target_volume", &OptimizerConfig::target_volume)
        .def_readwrite("penalty_weight", &OptimizerConfig::penalty_weight)
        .def_readwrite("penalty_levels", &OptimizerConfig::penalty_levels)
        .def_readwrite("max_outer_iters", &OptimizerConfig::max_outer_iters)
        .def_readwrite("stop_tol_lambda", &OptimizerConfig::stop_tol_lambda)
        .def_readwrite("stop_tol_volume", &OptimizerConfig::stop_tol_volume)
        .def_readwrite("seed", &OptimizerConfig::seed)
        .def_readwrite("eig_tol", &OptimizerConfig::eig_tol)
        .def_readwrite("init", &OptimizerConfig::init)
        .def_readwrite("init_candidates", &OptimizerConfig::init_candidates)
        .def_readwrite("user_chi", &OptimizerConfig::user_chi);

    py::class_<TraceRow>(m, "TraceRow")
        .def_readonly("iter", &TraceRow::iter)
        .def_readonly("lambda1", &TraceRow::lambda1)
        .def_readonly("volume", &TraceRow::volume)
        .def_readonly("perimeter", &TraceRow::perimeter)
        .def_readonly("sym_diff", &TraceRow::sym_diff)
        .def_readonly("penalty_M", &TraceRow::penalty_M);
    py::class_<OptimizerTrace>(m, "OptimizerTrace").def_readonly("rows", &OptimizerTrace::rows);
    py::class_<OptimizeResult>(m, "OptimizeResult")
        .def_readonly("chi", &OptimizeResult::chi)
        .def_readonly("lambda_", &OptimizeResult::lambda)
        .def_readonly("objective", &OptimizeResult::objective)
        .def_readonly("trace", &OptimizeResult::trace)
        .def_readonly("spectral", &OptimizeResult::spectral)
        .def_readonly("truncation_warning", &OptimizeResult::truncation_warning);

    m.def("threshold_projection", &threshold_projection, py::arg("u"), py::arg("mesh"),
          py::arg("c"));
    m.def("minimize_lambda1",
          [](const DomainSpec& spec, const OptimizerConfig& cfg, double h, const Box& box) {
              return minimize_lambda1(spec, cfg, h, box);
          },
          py::arg("spec"), py::arg("cfg"), py::arg("h"), py::arg("truncation"));
    m.def("penalized_minimize",
          [](const DomainSpec& spec, const OptimizerConfig& cfg, double h, const Box& box) {
              return penalized_minimize(spec, cfg, h, box);
          },
          py::arg("spec"), py::arg("cfg"), py::arg("h"), py::arg("truncation"));

    py::class_<OptimalityReport>(m, "OptimalityReport")
        .def_readonly("grad_cv", &OptimalityReport::grad_cv)
        .def_readonly("grad_mean", &OptimalityReport::grad_mean)
        .def_readonly("contact_angles_deg", &OptimalityReport::contact_angles_deg)
        .def_readonly("touches_boundary", &OptimalityReport::touches_boundary)
        .def_readonly("perimeter_raw", &OptimalityReport::perimeter_raw)
        .def_readonly("perimeter_debiased", &OptimalityReport::perimeter_debiased)
        .def_readonly("perimeter_bound_rhs", &OptimalityReport::perimeter_bound_rhs)
        .def_readonly("perimeter_slack", &OptimalityReport::perimeter_slack)
        .def_readonly("perimeter_bound_holds", &OptimalityReport::perimeter_bound_holds);
    m.def("optimality_report", &optimality_report, py::arg("chi"), py::arg("spectral"),
          py::arg("mesh"), py::arg("penalty_weight") = std::optional<double>());

    m.def("gamma_distance", &gamma_distance, py::arg("a"), py::arg("b"), py::arg("system"),
          py::arg("M"));
    m.def("coarea_lower_bound", &coarea_lower_bound, py::arg("u"), py::arg("mesh"),
          py::arg("nlevels") = 40);
    m.def("symmetrize_sector", &symmetrize_sector, py::arg("u"), py::arg("mesh"), py::arg("spec"));

    m.def("write_vtk",
          [](const std::filesystem::path& path, const Mesh& mesh,
             const std::vector<NamedField>& cell_data, const std::vector<NamedField>& point_data) {
              write_vtk(path, mesh, cell_data, point_data);
          },
          py::arg("path"), py::arg("mesh"), py::arg("cell_data") = std::vector<NamedField>{},
          py::arg("point_data") = std::vector<NamedField>{});
}
