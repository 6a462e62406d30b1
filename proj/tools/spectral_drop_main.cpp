#include "spectral_drop/run.hpp"
#include "spectral_drop/version.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

namespace {

constexpr const char* kDefaultsHelp = R"(config file (JSON). Defaults:
  domain:    required; kinds: strip{width=1}, half_plane, sector{alpha},
             polygon{vertices}, exterior_convex{parabola=[a,b,c] | obstacle},
             convex_epigraph{profile}
  mesh:      h (required for grid commands), truncation=[x0,y0,x1,y1]
  solver:    num_eigs=1, tol=1e-8, penalty=1e6 (times 1/h^2), robin_k=0, seed=1234
  optimizer: target_volume | penalty_weight (exactly one),
             penalty_levels=[1e2,1e4,1e6] (times 1/h^2), max_outer_iters=200,
             stop_tol_lambda=1e-5, stop_tol_volume=auto (two mean cells),
             init=ball_at_boundary|random, init_candidates=1
  solve:     drop = {kind: full|rect{length}|disc{center,radius}}, default full
  sweep:     c_min=0.5, c_max=4, c_step=0.125
  drift:     radius (required), positions (required), target_volume=1,
             box_halfwidth=auto
  diagnose:  target_volume=1
  export:    input (required)
  output_dir: "out" (overridden by --output-dir))";

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral-drop: mixed-boundary Laplace eigenproblems and drop-shape optimization"};
    app.set_version_flag("--version", std::string(spectral_drop::kVersion));
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir;
    int threads = 1;

    const std::vector<std::pair<std::string, spectral_drop::Command>> commands = {
        {"solve", spectral_drop::Command::Solve},       {"optimize", spectral_drop::Command::Optimize},
        {"sweep", spectral_drop::Command::Sweep},       {"drift", spectral_drop::Command::Drift},
        {"diagnose", spectral_drop::Command::Diagnose}, {"export", spectral_drop::Command::Export},
    };
    for (const auto& [name, cmd] : commands) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, kDefaultsHelp)->required();
        sub->add_option("--output-dir", output_dir, "override config output_dir");
        sub->add_option("--threads", threads, "worker pool size for sweep/drift fan-out");
        spectral_drop::Command command = cmd;
        sub->callback([&, command] {
            spectral_drop::RunConfig cfg;
            try {
                cfg = spectral_drop::parse_config_file(config_path);
            } catch (const spectral_drop::ValidationError& e) {
                spectral_drop::log_error(e.what());
                std::exit(spectral_drop::kExitValidation);
            }
            cfg.command = command;
            spectral_drop::RunOverrides ov;
            if (!output_dir.empty()) ov.output_dir = output_dir;
            ov.threads = threads;
            std::exit(spectral_drop::run(cfg, ov));
        });
    }
    CLI11_PARSE(app, argc, argv);
    return 0;
}
