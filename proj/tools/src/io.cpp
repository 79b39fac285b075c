#include "screen_cli/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace screen::cli {

namespace fs = std::filesystem;

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_document(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out += ',';
        out += header[i];
    }
    out += "\r\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += format_number(row[i]);
        }
        out += "\r\n";
    }
    return out;
}

std::string vtk_document(const std::vector<NamedField>& fields, const std::string& title) {
    if (fields.empty()) throw std::invalid_argument("vtk_document: no fields");
    const GridSpec& g = fields.front().field->grid();
    for (const auto& f : fields) require_same_grid(*fields.front().field, *f.field, "vtk_document");
    const Vec3 o = g.cell_center(0, 0, 0);
    std::ostringstream os;
    os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET STRUCTURED_POINTS\n";
    os << "DIMENSIONS " << g.dim(0) << ' ' << g.dim(1) << ' ' << g.dim(2) << '\n';
    os << "ORIGIN " << format_number(o.x) << ' ' << format_number(o.y) << ' ' << format_number(o.z) << '\n';
    const std::string h = format_number(g.spacing());
    os << "SPACING " << h << ' ' << h << ' ' << h << '\n';
    os << "POINT_DATA " << g.size() << '\n';
    for (const auto& f : fields) {
        os << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
        const auto v = f.field->values();
        for (std::size_t n = 0; n < v.size(); ++n) {
            os << format_number(v[n]) << ((n + 1) % static_cast<std::size_t>(g.dim(0)) == 0 ? '\n' : ' ');
        }
    }
    return os.str();
}

std::map<std::string, ScalarField> read_vtk(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path.string() + ": cannot open");
    const auto bad = [&](const std::string& what) { return std::runtime_error(path.string() + ": " + what); };
    std::string line;
    std::getline(in, line);
    if (line.rfind("# vtk DataFile", 0) != 0) throw bad("not a legacy VTK file");
    std::getline(in, line);  // title
    std::string word;
    in >> word;
    if (word != "ASCII") throw bad("expected ASCII");
    in >> word >> word;
    if (word != "STRUCTURED_POINTS") throw bad("expected STRUCTURED_POINTS");
    Index3 dims{};
    Vec3 origin, spacing;
    std::size_t count = 0;
    if (!(in >> word >> dims[0] >> dims[1] >> dims[2]) || word != "DIMENSIONS") throw bad("bad DIMENSIONS");
    if (!(in >> word >> origin.x >> origin.y >> origin.z) || word != "ORIGIN") throw bad("bad ORIGIN");
    if (!(in >> word >> spacing.x >> spacing.y >> spacing.z) || word != "SPACING") throw bad("bad SPACING");
    if (!(in >> word >> count) || word != "POINT_DATA") throw bad("bad POINT_DATA");
    if (spacing.x != spacing.y || spacing.x != spacing.z) throw bad("anisotropic spacing");
    const double h = spacing.x;
    const GridSpec grid({origin.x - 0.5 * h, origin.y - 0.5 * h, origin.z - 0.5 * h}, h, dims);
    if (count != grid.size()) throw bad("POINT_DATA does not match DIMENSIONS");
    std::map<std::string, ScalarField> out;
    while (in >> word) {
        std::string name, type, lookup, table;
        int comps = 0;
        if (word != "SCALARS" || !(in >> name >> type >> comps >> lookup >> table) || comps != 1) {
            throw bad("bad SCALARS block");
        }
        std::vector<double> values(count);
        for (double& v : values) {
            // operator>> rejects inf/nan text, which ScalarField would refuse anyway.
            if (!(in >> v)) throw bad("truncated data for " + name);
        }
        out.emplace(name, ScalarField(grid, std::move(values)));
    }
    return out;
}

void OutputStage::commit() const {
    if (files_.empty()) return;
    fs::create_directories(dir_);
    const fs::path tmp = dir_ / ".staging";
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    try {
        for (const auto& [name, contents] : files_) {
            std::ofstream out(tmp / name, std::ios::binary);
            out << contents;
            if (!out) throw std::runtime_error((dir_ / name).string() + ": write failed");
        }
        for (const auto& [name, contents] : files_) fs::rename(tmp / name, dir_ / name);
    } catch (...) {
        fs::remove_all(tmp);
        throw;
    }
    fs::remove_all(tmp);
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path.string() + ": cannot open");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace screen::cli
