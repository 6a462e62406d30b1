#pragma once

#include "spectral_drop/geometry.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace spectral_drop {

/// Locale-independent decimal formatting, 17 significant digits.
std::string format_real(double v);

/// Write via a temporary file in the same directory, then rename.
void atomic_write(const std::filesystem::path& path, const std::string& content);

using NamedField = std::pair<std::string, Eigen::VectorXd>;

/// Legacy ASCII unstructured-grid writer: points, triangle connectivity,
/// then per-cell and per-point scalar arrays.
void write_vtk(const std::filesystem::path& path, const Mesh& mesh,
               const std::vector<NamedField>& cell_data,
               const std::vector<NamedField>& point_data, const std::string& title = "spectral-drop");

struct VtkData {
    std::vector<Vec2> points;
    std::vector<std::array<int, 3>> triangles;
    std::vector<NamedField> cell_data;
    std::vector<NamedField> point_data;
    std::string title;
};

/// Reader for the subset of the legacy format emitted by write_vtk.
VtkData read_vtk(const std::filesystem::path& path);

void write_vtk(const std::filesystem::path& path, const VtkData& data);

/// CSV with '.' decimals; reals at 17 significant digits.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

/// Edge table: index, endpoint ids, endpoint coordinates, boundary tag
/// ("neumann_physical", "artificial_truncation", or "interior").
void write_edge_tags_csv(const std::filesystem::path& path, const Mesh& mesh);

/// FNV-1a 64-bit, hex string; used for config fingerprints in manifests.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace spectral_drop
