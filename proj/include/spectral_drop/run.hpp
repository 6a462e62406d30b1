#pragma once

#include "spectral_drop/geometry.hpp"
#include "spectral_drop/optimize.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace spectral_drop {

enum class Command { Solve, Optimize, Sweep, Drift, Diagnose, Export };

struct SolverParams {
    int num_eigs = 1;
    double tol = 1e-8;
    double penalty_level = 1e6;  // multiplied by h^-2
    double robin_k = 0;
    unsigned seed = 1234;
};

struct MeshParams {
    double h = 1.0 / 32;
    std::optional<Box> truncation;  // required unless the command derives it
};

struct SweepParams {
    double c_min = 0.5;
    double c_max = 4.0;
    double c_step = 0.125;
};

struct DriftConfigParams {
    double radius = 1.6;
    std::vector<double> positions;
    double target_volume = 1.0;
    double box_halfwidth = 0;  // 0: auto
};

struct DiagnoseParams {
    double target_volume = 1.0;
};

/// Drop selector for the solve command.
struct SolveDrop {
    enum class Kind { Full, Rect, Disc } kind = Kind::Full;
    double rect_length = 0;     // measured from the low-x side of the box
    Vec2 disc_center{0, 0};
    double disc_radius = 0;
};

struct RunConfig {
    Command command = Command::Solve;
    DomainSpec domain;
    MeshParams mesh;
    SolverParams solver;
    OptimizerConfig optimizer;
    SolveDrop solve_drop;
    SweepParams sweep;
    DriftConfigParams drift;
    DiagnoseParams diagnose;
    std::filesystem::path export_input;
    std::filesystem::path output_dir = "out";
    std::string config_text;  // exact bytes, for the manifest fingerprint
};

/// Parse and validate a JSON config file. Unknown keys are rejected.
/// Throws ValidationError with a message naming the offending key.
RunConfig parse_config_file(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text);

struct RunOverrides {
    std::optional<std::filesystem::path> output_dir;
    int threads = 1;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitSolver = 3;

/// Execute a run and write its artifacts (CSV tables, field exports, and a
/// manifest with the config fingerprint, seed and tool version). Returns a
/// process exit status: 0 success, 2 validation error, 3 solver failure.
int run(const RunConfig& config, const RunOverrides& overrides = {});

/// Log levels via SPECTRAL_DROP_LOG: error, warn, info, debug.
void log_message(int level, const std::string& msg);
inline void log_error(const std::string& m) { log_message(0, m); }
inline void log_warn(const std::string& m) { log_message(1, m); }
inline void log_info(const std::string& m) { log_message(2, m); }
inline void log_debug(const std::string& m) { log_message(3, m); }

}  // namespace spectral_drop
