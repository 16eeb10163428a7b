#include "pneutop/export.hpp"

#include "pneutop/config.hpp"
#include "pneutop/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

namespace pneutop {

void write_file_atomic(const std::filesystem::path& path, const std::string& content)
{
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw std::runtime_error("failed writing " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw std::runtime_error("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string density_matrix_text(int nelx, int nely, const Vector& field)
{
    if (field.size() != static_cast<Eigen::Index>(nelx) * nely) throw ShapeError("field does not match nelx x nely");
    std::string out;
    for (int row = 0; row < nely; ++row) {
        const int ey = nely - 1 - row;
        for (int ex = 0; ex < nelx; ++ex) {
            if (ex) out += ' ';
            out += format_double(field[static_cast<Eigen::Index>(ex) * nely + ey]);
        }
        out += '\n';
    }
    return out;
}

DensityMatrix parse_density_matrix(const std::string& text)
{
    std::vector<std::vector<double>> rows;
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos || line[line.find_first_not_of(" \t")] == '#')
            continue;
        std::istringstream ls(line);
        std::string tok;
        std::vector<double> row;
        while (ls >> tok) {
            double v = 0.0;
            const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || !std::isfinite(v))
                throw ConfigError("density file line " + std::to_string(line_no) + ": bad value '" + tok + "'");
            row.push_back(v);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw ConfigError("density file line " + std::to_string(line_no) + ": expected " +
                              std::to_string(rows.front().size()) + " values, found " + std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ConfigError("density file is empty");

    DensityMatrix m;
    m.nely = static_cast<int>(rows.size());
    m.nelx = static_cast<int>(rows.front().size());
    m.values.resize(static_cast<Eigen::Index>(m.nelx) * m.nely);
    for (int row = 0; row < m.nely; ++row) {
        const int ey = m.nely - 1 - row;
        for (int ex = 0; ex < m.nelx; ++ex)
            m.values[static_cast<Eigen::Index>(ex) * m.nely + ey] =
                rows[static_cast<std::size_t>(row)][static_cast<std::size_t>(ex)];
    }
    return m;
}

std::string density_pgm(int nelx, int nely, const Vector& field)
{
    if (field.size() != static_cast<Eigen::Index>(nelx) * nely) throw ShapeError("field does not match nelx x nely");
    std::string out = "P5\n" + std::to_string(nelx) + " " + std::to_string(nely) + "\n255\n";
    for (int row = 0; row < nely; ++row) {
        const int ey = nely - 1 - row;
        for (int ex = 0; ex < nelx; ++ex) {
            const double rho = std::clamp(field[static_cast<Eigen::Index>(ex) * nely + ey], 0.0, 1.0);
            out += static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * (1.0 - rho))));
        }
    }
    return out;
}

std::string fields_vtk(const DomainModel& d, const Vector& rho_bar, const Vector& pressure,
                       const Vector& displacement, const std::string& title)
{
    const int nx = d.nelx() + 1, ny = d.nely() + 1;
    std::ostringstream os;
    os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET STRUCTURED_POINTS\n";
    os << "DIMENSIONS " << nx << ' ' << ny << " 1\n";
    os << "ORIGIN 0 0 0\n";
    os << "SPACING " << format_double(d.elem_size()) << ' ' << format_double(d.elem_size()) << " 1\n";
    // VTK orders points and cells with x varying fastest.
    if (pressure.size() > 0 || displacement.size() > 0) {
        os << "POINT_DATA " << nx * ny << '\n';
        if (pressure.size() > 0) {
            if (pressure.size() != d.num_nodes()) throw ShapeError("pressure field does not match the mesh");
            os << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
            for (int iy = 0; iy < ny; ++iy)
                for (int ix = 0; ix < nx; ++ix) os << format_double(pressure[d.node_index(ix, iy)]) << '\n';
        }
        if (displacement.size() > 0) {
            if (displacement.size() != d.num_dofs()) throw ShapeError("displacement field does not match the mesh");
            os << "VECTORS displacement double\n";
            for (int iy = 0; iy < ny; ++iy)
                for (int ix = 0; ix < nx; ++ix) {
                    const int n = d.node_index(ix, iy);
                    os << format_double(displacement[2 * n]) << ' ' << format_double(displacement[2 * n + 1])
                       << " 0\n";
                }
        }
    }
    if (rho_bar.size() > 0) {
        if (rho_bar.size() != d.num_elements()) throw ShapeError("density field does not match the mesh");
        os << "CELL_DATA " << d.num_elements() << '\n';
        os << "SCALARS density double 1\nLOOKUP_TABLE default\n";
        for (int ey = 0; ey < d.nely(); ++ey)
            for (int ex = 0; ex < d.nelx(); ++ex) os << format_double(rho_bar[d.element_index(ex, ey)]) << '\n';
    }
    return os.str();
}

} // namespace pneutop
