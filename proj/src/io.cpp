#include "spectral_drop/io.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace spectral_drop {

namespace fs = std::filesystem;

std::string format_real(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    if (ec != std::errc()) return "nan";
    return std::string(buf, ptr);
}

void atomic_write(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

void write_vtk(const fs::path& path, const VtkData& data) {
    std::ostringstream out;
    out << "# vtk DataFile Version 3.0\n";
    out << (data.title.empty() ? "spectral-drop" : data.title) << "\n";
    out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << data.points.size() << " double\n";
    for (const auto& p : data.points)
        out << format_real(p.x()) << " " << format_real(p.y()) << " 0\n";
    const size_t m = data.triangles.size();
    out << "CELLS " << m << " " << 4 * m << "\n";
    for (const auto& t : data.triangles) out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
    out << "CELL_TYPES " << m << "\n";
    for (size_t i = 0; i < m; ++i) out << "5\n";
    if (!data.cell_data.empty()) {
        out << "CELL_DATA " << m << "\n";
        for (const auto& [name, values] : data.cell_data) {
            out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
            for (Eigen::Index i = 0; i < values.size(); ++i) out << format_real(values[i]) << "\n";
        }
    }
    if (!data.point_data.empty()) {
        out << "POINT_DATA " << data.points.size() << "\n";
        for (const auto& [name, values] : data.point_data) {
            out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
            for (Eigen::Index i = 0; i < values.size(); ++i) out << format_real(values[i]) << "\n";
        }
    }
    atomic_write(path, out.str());
}

void write_vtk(const fs::path& path, const Mesh& mesh, const std::vector<NamedField>& cell_data,
               const std::vector<NamedField>& point_data, const std::string& title) {
    VtkData data;
    data.title = title;
    data.points = mesh.vertices;
    data.triangles = mesh.triangles;
    data.cell_data = cell_data;
    data.point_data = point_data;
    write_vtk(path, data);
}

VtkData read_vtk(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open field file " + path.string());
    VtkData data;
    std::string line;
    std::getline(in, line);  // version banner
    std::getline(in, data.title);
    std::string token;
    size_t n_points = 0, n_cells = 0;
    auto read_fields = [&](size_t count, std::vector<NamedField>& dst) {
        std::string word;
        while (in >> word) {
            if (word == "CELL_DATA" || word == "POINT_DATA") return word;
            if (word != "SCALARS") throw ValidationError("unsupported field block: " + word);
            std::string name, type;
            int comps;
            in >> name >> type >> comps;
            std::string lut, lut_name;
            in >> lut >> lut_name;
            Eigen::VectorXd values(count);
            for (size_t i = 0; i < count; ++i) in >> values[i];
            dst.emplace_back(name, values);
        }
        return std::string();
    };
    while (in >> token) {
        if (token == "POINTS") {
            std::string type;
            in >> n_points >> type;
            data.points.resize(n_points);
            for (size_t i = 0; i < n_points; ++i) {
                double x, y, z;
                in >> x >> y >> z;
                data.points[i] = Vec2(x, y);
            }
        } else if (token == "CELLS") {
            size_t total;
            in >> n_cells >> total;
            data.triangles.resize(n_cells);
            for (size_t i = 0; i < n_cells; ++i) {
                int k, a, b, c;
                in >> k >> a >> b >> c;
                if (k != 3) throw ValidationError("only triangle cells are supported");
                data.triangles[i] = {a, b, c};
            }
        } else if (token == "CELL_TYPES") {
            size_t m;
            in >> m;
            for (size_t i = 0; i < m; ++i) {
                int t;
                in >> t;
            }
        } else if (token == "CELL_DATA") {
            size_t m;
            in >> m;
            std::string next = read_fields(m, data.cell_data);
            if (next == "POINT_DATA") {
                size_t np;
                in >> np;
                read_fields(np, data.point_data);
            }
        } else if (token == "POINT_DATA") {
            size_t np;
            in >> np;
            read_fields(np, data.point_data);
        }
    }
    if (data.points.empty() || data.triangles.empty())
        throw ValidationError("field file has no grid: " + path.string());
    return data;
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream out;
    for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
    atomic_write(path, out.str());
}

void write_edge_tags_csv(const fs::path& path, const Mesh& mesh) {
    std::vector<std::vector<std::string>> rows;
    const auto edges = build_edges(mesh);
    for (size_t i = 0; i < edges.size(); ++i) {
        const auto& e = edges[i];
        std::string tag = "interior";
        if (e.boundary_tag == static_cast<int>(BoundaryTag::NeumannPhysical))
            tag = "neumann_physical";
        else if (e.boundary_tag == static_cast<int>(BoundaryTag::ArtificialTruncation))
            tag = "artificial_truncation";
        else if (e.t1 < 0)
            tag = "boundary_untagged";
        const Vec2& a = mesh.vertices[e.v0];
        const Vec2& b = mesh.vertices[e.v1];
        rows.push_back({std::to_string(i), std::to_string(e.v0), std::to_string(e.v1),
                        format_real(a.x()), format_real(a.y()), format_real(b.x()),
                        format_real(b.y()), tag});
    }
    write_csv(path, {"edge", "v0", "v1", "x0", "y0", "x1", "y1", "tag"}, rows);
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    static const char* hex = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = hex[h & 0xf];
        h >>= 4;
    }
    buf[16] = '\0';
    return std::string(buf);
}

}  // namespace spectral_drop
