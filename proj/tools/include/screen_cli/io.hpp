#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "screen/grid.hpp"

namespace screen::cli {

/// Shortest of "%.17g": round-trips every double.
std::string format_number(double v);

/// RFC 4180 CSV: header plus rows, numbers with 17 significant digits, CRLF line ends.
std::string csv_document(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

struct NamedField {
    std::string name;
    const ScalarField* field;
};

/// Legacy ASCII VTK STRUCTURED_POINTS with one SCALARS block per field; ORIGIN is the first
/// cell centre and SPACING is h.
std::string vtk_document(const std::vector<NamedField>& fields, const std::string& title);

/// Reads a document written by vtk_document. Throws std::runtime_error on malformed input.
std::map<std::string, ScalarField> read_vtk(const std::filesystem::path& path);

/// Collects files in memory and writes them into a directory only on commit, through a
/// temporary sibling and renames, so a failed run leaves nothing behind.
class OutputStage {
public:
    explicit OutputStage(std::filesystem::path dir) : dir_(std::move(dir)) {}
    void add(const std::string& name, std::string contents) { files_[name] = std::move(contents); }
    void commit() const;
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    std::map<std::string, std::string> files_;
};

std::string read_text(const std::filesystem::path& path);

}  // namespace screen::cli
