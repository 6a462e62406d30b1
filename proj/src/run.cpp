#include "spectral_drop/run.hpp"

#include "spectral_drop/analytic.hpp"
#include "spectral_drop/diagnostics.hpp"
#include "spectral_drop/io.hpp"
#include "spectral_drop/version.hpp"

#include <json.hpp>

#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace spectral_drop {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int log_threshold() {
    static const int level = [] {
        const char* env = std::getenv("SPECTRAL_DROP_LOG");
        if (!env) return 1;
        const std::string s(env);
        if (s == "error") return 0;
        if (s == "warn") return 1;
        if (s == "info") return 2;
        if (s == "debug") return 3;
        return 1;
    }();
    return level;
}

const char* level_name(int level) {
    switch (level) {
        case 0: return "error";
        case 1: return "warn";
        case 2: return "info";
        default: return "debug";
    }
}

std::mutex log_mutex;

}  // namespace

void log_message(int level, const std::string& msg) {
    if (level > log_threshold()) return;
    std::lock_guard<std::mutex> lock(log_mutex);
    std::cerr << "[spectral-drop " << level_name(level) << "] " << msg << "\n";
}

namespace {

void check_keys(const json& obj, const std::string& ctx,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ValidationError(ctx + " must be a JSON object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            if (it.key() == a) {
                ok = true;
                break;
            }
        if (!ok) throw ValidationError("unknown key '" + it.key() + "' in " + ctx);
    }
}

double require_number(const json& obj, const std::string& ctx, const char* key) {
    if (!obj.contains(key)) throw ValidationError(ctx + " needs '" + key + "'");
    if (!obj[key].is_number()) throw ValidationError(ctx + "." + key + " must be a number");
    return obj[key].get<double>();
}

double number_or(const json& obj, const char* key, double dflt) {
    if (!obj.contains(key)) return dflt;
    if (!obj[key].is_number()) throw ValidationError(std::string(key) + " must be a number");
    return obj[key].get<double>();
}

std::vector<Vec2> point_list(const json& arr, const std::string& ctx) {
    if (!arr.is_array()) throw ValidationError(ctx + " must be an array of [x, y] pairs");
    std::vector<Vec2> pts;
    for (const auto& p : arr) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
            throw ValidationError(ctx + " entries must be [x, y] pairs");
        pts.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    return pts;
}

DomainSpec parse_domain(const json& j) {
    check_keys(j, "domain", {"kind", "width", "alpha", "vertices", "obstacle", "parabola",
                             "profile"});
    if (!j.contains("kind") || !j["kind"].is_string())
        throw ValidationError("domain.kind must be a string");
    const std::string kind = j["kind"].get<std::string>();
    DomainSpec d;
    if (kind == "strip") {
        d = DomainSpec::strip(number_or(j, "width", 1.0));
    } else if (kind == "half_plane") {
        d = DomainSpec::half_plane();
    } else if (kind == "sector") {
        d = DomainSpec::sector(require_number(j, "domain", "alpha"));
    } else if (kind == "polygon") {
        if (!j.contains("vertices")) throw ValidationError("polygon domain needs 'vertices'");
        d = DomainSpec::simple_polygon(point_list(j["vertices"], "domain.vertices"));
    } else if (kind == "exterior_convex") {
        if (j.contains("parabola")) {
            const auto& p = j["parabola"];
            if (!p.is_array() || p.size() != 3)
                throw ValidationError("domain.parabola must be [a, b, c]");
            d = DomainSpec::exterior_parabola(p[0].get<double>(), p[1].get<double>(),
                                              p[2].get<double>());
        } else if (j.contains("obstacle")) {
            d = DomainSpec::exterior_convex(point_list(j["obstacle"], "domain.obstacle"));
        } else {
            throw ValidationError("exterior_convex domain needs 'parabola' or 'obstacle'");
        }
    } else if (kind == "convex_epigraph") {
        if (!j.contains("profile")) throw ValidationError("convex_epigraph domain needs 'profile'");
        d = DomainSpec::convex_epigraph(point_list(j["profile"], "domain.profile"));
    } else {
        throw ValidationError("unknown domain kind '" + kind + "'");
    }
    d.validate();
    return d;
}

Command parse_command_name(const std::string& name) {
    if (name == "solve") return Command::Solve;
    if (name == "optimize") return Command::Optimize;
    if (name == "sweep") return Command::Sweep;
    if (name == "drift") return Command::Drift;
    if (name == "diagnose") return Command::Diagnose;
    if (name == "export") return Command::Export;
    throw ValidationError("unknown command '" + name + "'");
}

std::string command_name(Command c) {
    switch (c) {
        case Command::Solve: return "solve";
        case Command::Optimize: return "optimize";
        case Command::Sweep: return "sweep";
        case Command::Drift: return "drift";
        case Command::Diagnose: return "diagnose";
        case Command::Export: return "export";
    }
    return "?";
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(j, "config", {"command", "domain", "mesh", "solver", "optimizer", "solve", "sweep",
                             "drift", "diagnose", "export", "output_dir"});
    RunConfig cfg;
    cfg.config_text = text;

    if (j.contains("command")) cfg.command = parse_command_name(j["command"].get<std::string>());
    if (!j.contains("domain") && cfg.command != Command::Export)
        throw ValidationError("config needs a 'domain' block");
    if (j.contains("domain")) cfg.domain = parse_domain(j["domain"]);

    if (j.contains("mesh")) {
        const auto& m = j["mesh"];
        check_keys(m, "mesh", {"h", "truncation"});
        cfg.mesh.h = require_number(m, "mesh", "h");
        if (!(cfg.mesh.h > 0)) throw ValidationError("mesh.h must be positive");
        if (m.contains("truncation")) {
            const auto& b = m["truncation"];
            if (!b.is_array() || b.size() != 4)
                throw ValidationError("mesh.truncation must be [x0, y0, x1, y1]");
            Box box{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(),
                    b[3].get<double>()};
            if (!(box.x1 > box.x0) || !(box.y1 > box.y0))
                throw ValidationError("truncation box must have positive area");
            cfg.mesh.truncation = box;
        }
    }

    if (j.contains("solver")) {
        const auto& s = j["solver"];
        check_keys(s, "solver", {"num_eigs", "tol", "penalty", "robin_k", "seed"});
        cfg.solver.num_eigs = static_cast<int>(number_or(s, "num_eigs", 1));
        if (cfg.solver.num_eigs < 1) throw ValidationError("solver.num_eigs must be >= 1");
        cfg.solver.tol = number_or(s, "tol", 1e-8);
        cfg.solver.penalty_level = number_or(s, "penalty", 1e6);
        if (!(cfg.solver.penalty_level > 0)) throw ValidationError("solver.penalty must be > 0");
        cfg.solver.robin_k = number_or(s, "robin_k", 0.0);
        if (cfg.solver.robin_k < 0) throw ValidationError("solver.robin_k must be >= 0");
        cfg.solver.seed = static_cast<unsigned>(number_or(s, "seed", 1234));
    }

    if (j.contains("optimizer")) {
        const auto& o = j["optimizer"];
        check_keys(o, "optimizer",
                   {"target_volume", "penalty_weight", "penalty_levels", "max_outer_iters",
                    "stop_tol_lambda", "stop_tol_volume", "init", "init_candidates"});
        if (o.contains("target_volume")) cfg.optimizer.target_volume = o["target_volume"].get<double>();
        if (o.contains("penalty_weight"))
            cfg.optimizer.penalty_weight = o["penalty_weight"].get<double>();
        if (o.contains("penalty_levels")) {
            cfg.optimizer.penalty_levels.clear();
            for (const auto& v : o["penalty_levels"])
                cfg.optimizer.penalty_levels.push_back(v.get<double>());
        }
        cfg.optimizer.max_outer_iters = static_cast<int>(number_or(o, "max_outer_iters", 200));
        cfg.optimizer.stop_tol_lambda = number_or(o, "stop_tol_lambda", 1e-5);
        cfg.optimizer.stop_tol_volume = number_or(o, "stop_tol_volume", 0.0);
        if (o.contains("init")) {
            const std::string init = o["init"].get<std::string>();
            if (init == "ball_at_boundary")
                cfg.optimizer.init = InitKind::BallAtBoundary;
            else if (init == "random")
                cfg.optimizer.init = InitKind::Random;
            else
                throw ValidationError("optimizer.init must be ball_at_boundary or random");
        }
        cfg.optimizer.init_candidates = static_cast<int>(number_or(o, "init_candidates", 1));
    }
    cfg.optimizer.seed = cfg.solver.seed;
    cfg.optimizer.eig_tol = cfg.solver.tol;

    if (j.contains("solve")) {
        const auto& s = j["solve"];
        check_keys(s, "solve", {"drop"});
        if (s.contains("drop")) {
            const auto& d = s["drop"];
            check_keys(d, "solve.drop", {"kind", "length", "center", "radius"});
            const std::string kind = d["kind"].get<std::string>();
            if (kind == "full") {
                cfg.solve_drop.kind = SolveDrop::Kind::Full;
            } else if (kind == "rect") {
                cfg.solve_drop.kind = SolveDrop::Kind::Rect;
                cfg.solve_drop.rect_length = require_number(d, "solve.drop", "length");
            } else if (kind == "disc") {
                if (!d.contains("center") || !d.contains("radius"))
                    throw ValidationError("disc drop needs 'center' and 'radius'");
                const auto& c = d["center"];
                cfg.solve_drop.kind = SolveDrop::Kind::Disc;
                cfg.solve_drop.disc_center = Vec2(c[0].get<double>(), c[1].get<double>());
                cfg.solve_drop.disc_radius = d["radius"].get<double>();
            } else {
                throw ValidationError("solve.drop.kind must be full, rect, or disc");
            }
        }
    }

    if (j.contains("sweep")) {
        const auto& s = j["sweep"];
        check_keys(s, "sweep", {"c_min", "c_max", "c_step"});
        cfg.sweep.c_min = number_or(s, "c_min", 0.5);
        cfg.sweep.c_max = number_or(s, "c_max", 4.0);
        cfg.sweep.c_step = number_or(s, "c_step", 0.125);
        if (!(cfg.sweep.c_min > 0) || !(cfg.sweep.c_max >= cfg.sweep.c_min) ||
            !(cfg.sweep.c_step > 0))
            throw ValidationError("sweep grid must satisfy 0 < c_min <= c_max, c_step > 0");
    }

    if (j.contains("drift")) {
        const auto& d = j["drift"];
        check_keys(d, "drift", {"radius", "positions", "target_volume", "box_halfwidth"});
        cfg.drift.radius = require_number(d, "drift", "radius");
        cfg.drift.target_volume = number_or(d, "target_volume", 1.0);
        cfg.drift.box_halfwidth = number_or(d, "box_halfwidth", 0.0);
        if (!d.contains("positions") || !d["positions"].is_array())
            throw ValidationError("drift needs a 'positions' array");
        for (const auto& p : d["positions"]) cfg.drift.positions.push_back(p.get<double>());
    }

    if (j.contains("diagnose")) {
        const auto& d = j["diagnose"];
        check_keys(d, "diagnose", {"target_volume"});
        cfg.diagnose.target_volume = number_or(d, "target_volume", 1.0);
    }

    if (j.contains("export")) {
        const auto& e = j["export"];
        check_keys(e, "export", {"input"});
        if (!e.contains("input")) throw ValidationError("export needs 'input'");
        cfg.export_input = e["input"].get<std::string>();
    }

    if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
    return cfg;
}

RunConfig parse_config_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

namespace {

void write_manifest(const RunConfig& cfg, const fs::path& dir) {
    json m;
    m["config_hash"] = fnv1a_hex(cfg.config_text);
    m["seed"] = cfg.solver.seed;
    m["version"] = kVersion;
    m["command"] = command_name(cfg.command);
    m["config"] = json::parse(cfg.config_text);
    atomic_write(dir / "manifest.json", m.dump(2) + "\n");
}

Box required_box(const RunConfig& cfg) {
    if (!cfg.mesh.truncation)
        throw ValidationError("this command needs mesh.truncation = [x0, y0, x1, y1]");
    return *cfg.mesh.truncation;
}

DensityField solve_drop(const RunConfig& cfg, const Mesh& mesh) {
    switch (cfg.solve_drop.kind) {
        case SolveDrop::Kind::Rect: {
            double lo = mesh.vertices.front().x();
            for (const auto& v : mesh.vertices) lo = std::min(lo, v.x());
            const double xmax = lo + cfg.solve_drop.rect_length;
            DensityField chi = DensityField::zeros(mesh.num_triangles());
            for (int t = 0; t < mesh.num_triangles(); ++t)
                if (mesh.tri_centroid[t].x() <= xmax) chi.values[t] = 1.0;
            return chi;
        }
        case SolveDrop::Kind::Disc: {
            DensityField chi = DensityField::zeros(mesh.num_triangles());
            for (int t = 0; t < mesh.num_triangles(); ++t)
                if ((mesh.tri_centroid[t] - cfg.solve_drop.disc_center).norm() <=
                    cfg.solve_drop.disc_radius)
                    chi.values[t] = 1.0;
            return chi;
        }
        case SolveDrop::Kind::Full:
            break;
    }
    return DensityField::ones(mesh.num_triangles());
}

void run_solve(const RunConfig& cfg, const fs::path& out) {
    const Mesh mesh = build_mesh(cfg.domain, cfg.mesh.h, required_box(cfg));
    const AssembledSystem system = assemble(mesh, cfg.solver.robin_k);
    const DensityField chi = solve_drop(cfg, mesh);
    const double M = cfg.solver.penalty_level / (cfg.mesh.h * cfg.mesh.h);
    const SpectralResult sp =
        solve_eigs(system, chi, M, cfg.solver.num_eigs, cfg.solver.tol, cfg.solver.seed);

    std::vector<std::vector<std::string>> rows;
    for (size_t k = 0; k < sp.eigenvalues.size(); ++k)
        rows.push_back({std::to_string(k + 1), format_real(sp.eigenvalues[k]),
                        format_real(sp.residuals[k]), format_real(cfg.mesh.h), format_real(M)});
    write_csv(out / "eigenvalues.csv", {"k", "lambda", "residual", "h", "M"}, rows);

    std::vector<NamedField> point_data;
    for (size_t k = 0; k < sp.eigenfunctions.size(); ++k)
        point_data.emplace_back("u_" + std::to_string(k + 1), sp.eigenfunctions[k]);
    write_vtk(out / "fields.vtk", mesh, {{"chi", chi.values}}, point_data);
    write_edge_tags_csv(out / "edges.csv", mesh);
}

void append_trace_csv(const fs::path& path, const OptimizerTrace& trace) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : trace.rows)
        rows.push_back({std::to_string(r.iter), format_real(r.lambda1), format_real(r.volume),
                        format_real(r.perimeter), format_real(r.sym_diff),
                        format_real(r.penalty_M)});
    write_csv(path, {"iter", "lambda1", "volume", "perimeter", "sym_diff", "M"}, rows);
}

void run_optimize(const RunConfig& cfg, const fs::path& out) {
    const Mesh mesh = build_mesh(cfg.domain, cfg.mesh.h, required_box(cfg));
    const AssembledSystem system = assemble(mesh, cfg.solver.robin_k);
    const bool penalized = cfg.optimizer.penalty_weight.has_value();
    const OptimizeResult res = penalized
                                   ? penalized_minimize(cfg.domain, mesh, system, cfg.optimizer)
                                   : minimize_lambda1(cfg.domain, mesh, system, cfg.optimizer);

    append_trace_csv(out / "trace.csv", res.trace);
    write_vtk(out / "final.vtk", mesh, {{"chi", res.chi.values}},
              {{"u_1", res.spectral.eigenfunctions.front()}});

    const OptimalityReport rep =
        optimality_report(res.chi, res.spectral, mesh, cfg.optimizer.penalty_weight);
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"lambda1", format_real(res.lambda)});
    rows.push_back({"objective", format_real(res.objective)});
    rows.push_back({"volume", format_real(volume(res.chi, mesh))});
    rows.push_back({"grad_cv", format_real(rep.grad_cv)});
    rows.push_back({"grad_mean", format_real(rep.grad_mean)});
    for (size_t i = 0; i < rep.contact_angles_deg.size(); ++i)
        rows.push_back({"contact_angle_" + std::to_string(i),
                        format_real(rep.contact_angles_deg[i])});
    rows.push_back({"touches_boundary", rep.touches_boundary ? "1" : "0"});
    rows.push_back({"truncation_warning", res.truncation_warning ? "1" : "0"});
    if (rep.perimeter_raw) {
        rows.push_back({"perimeter_raw", format_real(*rep.perimeter_raw)});
        rows.push_back({"perimeter_debiased", format_real(*rep.perimeter_debiased)});
        rows.push_back({"perimeter_bound_rhs", format_real(*rep.perimeter_bound_rhs)});
        rows.push_back({"perimeter_slack", format_real(*rep.perimeter_slack)});
        rows.push_back({"perimeter_bound_holds", *rep.perimeter_bound_holds ? "1" : "0"});
    }
    write_csv(out / "optimality.csv", {"metric", "value"}, rows);
}

void run_sweep(const RunConfig& cfg, const fs::path& out, int threads) {
    if (cfg.domain.kind != DomainKind::Strip)
        throw ValidationError("sweep is defined for the strip container");
    const double width = cfg.domain.strip_width;
    std::vector<double> cs;
    for (double c = cfg.sweep.c_min; c <= cfg.sweep.c_max + 1e-9; c += cfg.sweep.c_step)
        cs.push_back(c);

    std::vector<std::vector<std::string>> rows(cs.size());
    parallel_for(static_cast<int>(cs.size()), threads, [&](int i) {
        const double c = cs[i];
        Box box = cfg.mesh.truncation ? *cfg.mesh.truncation
                                      : Box{0.0, 0.0, std::max(6.0, 1.5 * c / width + 2.0), width};
        OptimizerConfig ocfg = cfg.optimizer;
        ocfg.target_volume = c;
        ocfg.penalty_weight.reset();
        const OptimizeResult res = minimize_lambda1(cfg.domain, ocfg, cfg.mesh.h, box);
        const StripReference ref = reference_strip(c, width);
        const char* branch =
            ref.half_disc.lambda <= ref.rectangle.lambda ? "half-disc" : "rectangle";
        rows[i] = {format_real(c), format_real(res.lambda), format_real(ref.rectangle.lambda),
                   format_real(ref.half_disc.lambda), branch};
    });
    write_csv(out / "sweep.csv", {"c", "lambda_numeric", "lambda_rect", "lambda_hd", "branch"},
              rows);
}

void run_drift(const RunConfig& cfg, const fs::path& out, int threads) {
    DriftParams params;
    params.h = cfg.mesh.h;
    params.box_halfwidth = cfg.drift.box_halfwidth;
    params.optimizer = cfg.optimizer;
    params.optimizer.penalty_weight.reset();

    const auto& pos = cfg.drift.positions;
    std::vector<DriftSample> samples(pos.size());
    parallel_for(static_cast<int>(pos.size()), threads, [&](int i) {
        const auto one = drift_experiment(cfg.domain, cfg.drift.radius, {pos[i]},
                                          cfg.drift.target_volume, params);
        samples[i] = one.front();
    });
    std::sort(samples.begin(), samples.end(),
              [](const DriftSample& a, const DriftSample& b) { return a.abs_x < b.abs_x; });
    std::vector<std::vector<std::string>> rows;
    for (const auto& s : samples)
        rows.push_back({format_real(s.arclength), format_real(s.abs_x), format_real(s.lambda),
                        format_real(s.volume)});
    write_csv(out / "drift.csv", {"position", "abs_x", "lambda1", "volume"}, rows);
}

void run_diagnose(const RunConfig& cfg, const fs::path& out) {
    const Mesh mesh = build_mesh(cfg.domain, cfg.mesh.h, required_box(cfg));
    const AssembledSystem system = assemble(mesh, cfg.solver.robin_k);
    const double M = cfg.solver.penalty_level / (cfg.mesh.h * cfg.mesh.h);
    const double c = std::min(cfg.diagnose.target_volume, 0.5 * mesh.total_area);

    // base drop and a scale family for the exponent fits
    Vec2 seed_point = mesh.tri_centroid.front();
    double best = std::numeric_limits<double>::infinity();
    for (const auto& be : mesh.boundary_edges) {
        if (be.tag != BoundaryTag::NeumannPhysical) continue;
        const Vec2 mid = 0.5 * (mesh.vertices[be.v0] + mesh.vertices[be.v1]);
        const double d = (mid - Vec2(0.5 * (mesh.vertices.front().x() + mesh.vertices.back().x()),
                                     0.5 * (mesh.vertices.front().y() + mesh.vertices.back().y())))
                             .norm();
        if (d < best) {
            best = d;
            seed_point = mid;
        }
    }
    auto ball = [&](double target) {
        std::vector<int> order(mesh.num_triangles());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const double da = (mesh.tri_centroid[a] - seed_point).norm();
            const double db = (mesh.tri_centroid[b] - seed_point).norm();
            if (da != db) return da < db;
            return a < b;
        });
        DensityField chi = DensityField::zeros(mesh.num_triangles());
        double cum = 0;
        for (int t : order) {
            if (cum >= target) break;
            chi.values[t] = 1.0;
            cum += mesh.tri_area[t];
        }
        return chi;
    };
    const DensityField chi = ball(c);
    std::vector<DensityField> family{ball(0.5 * c), chi, ball(2.0 * c)};
    const ScalarField ones = ScalarField::Ones(mesh.num_vertices());

    BoundsReport rep = bounds_report(system, mesh, chi, M, &ones,
                                     std::numeric_limits<double>::infinity(), &family);

    std::vector<std::vector<std::string>> rows;
    auto add = [&](const std::string& name, double lhs, double rhs, bool pass) {
        rows.push_back({name, format_real(lhs), format_real(rhs), format_real(rhs - lhs),
                        pass ? "1" : "0"});
    };
    for (const auto& ck : rep.checks) add(ck.name, ck.lhs, ck.rhs, ck.pass);

    {
        const double d0 = gamma_distance(chi, chi, system, M);
        add("gamma_identity", d0, 1e-10, d0 <= 1e-10);
        const DensityField a = family[0];
        const DensityField b = family[2];
        const double dab = gamma_distance(a, b, system, M);
        const double dac = gamma_distance(a, chi, system, M);
        const double dcb = gamma_distance(chi, b, system, M);
        add("gamma_triangle", dab, dac + dcb + 1e-10, dab <= dac + dcb + 1e-10);
    }
    {
        const EnergyResult er = energy_function(system, chi, M);
        const double lb = coarea_lower_bound(er.w, mesh, 40);
        const double dirichlet = dirichlet_product(system, er.w, er.w);
        add("coarea_lower_bound", lb, dirichlet * 1.05, lb <= dirichlet * 1.05);
        if (cfg.domain.kind == DomainKind::Sector || cfg.domain.kind == DomainKind::HalfPlane) {
            const ScalarField wt = symmetrize_sector(er.w, mesh, cfg.domain);
            const double l2_u = mass_product(system, er.w, er.w);
            const double l2_t = mass_product(system, wt, wt);
            add("rearrangement_l2", std::abs(l2_t - l2_u), 0.01 * l2_u,
                std::abs(l2_t - l2_u) <= 0.01 * l2_u);
            const double dir_t = dirichlet_product(system, wt, wt);
            add("rearrangement_dirichlet", dir_t, dirichlet * 1.05, dir_t <= dirichlet * 1.05);
        }
    }
    write_csv(out / "diagnostics.csv", {"name", "lhs", "rhs", "slack", "pass"}, rows);

    std::ostringstream txt;
    txt << "diagnostics on " << command_name(cfg.command) << " run, h = " << format_real(cfg.mesh.h)
        << ", M = " << format_real(M) << "\n";
    for (const auto& r : rows)
        txt << (r[4] == "1" ? "PASS " : "FAIL ") << r[0] << ": lhs = " << r[1]
            << ", rhs = " << r[2] << "\n";
    atomic_write(out / "summary.txt", txt.str());
}

void run_export(const RunConfig& cfg, const fs::path& out) {
    const VtkData data = read_vtk(cfg.export_input);
    write_vtk(out / "exported.vtk", data);
}

}  // namespace

int run(const RunConfig& config, const RunOverrides& overrides) {
    try {
        const fs::path out = overrides.output_dir ? *overrides.output_dir : config.output_dir;
        fs::create_directories(out);
        switch (config.command) {
            case Command::Solve: run_solve(config, out); break;
            case Command::Optimize: run_optimize(config, out); break;
            case Command::Sweep: run_sweep(config, out, overrides.threads); break;
            case Command::Drift: run_drift(config, out, overrides.threads); break;
            case Command::Diagnose: run_diagnose(config, out); break;
            case Command::Export: run_export(config, out); break;
        }
        write_manifest(config, out);
        return kExitOk;
    } catch (const ValidationError& e) {
        log_error(std::string("validation: ") + e.what());
        return kExitValidation;
    } catch (const SolverError& e) {
        log_error(std::string("solver: ") + e.what());
        return kExitSolver;
    } catch (const std::exception& e) {
        log_error(std::string("failure: ") + e.what());
        return kExitSolver;
    }
}

}  // namespace spectral_drop
