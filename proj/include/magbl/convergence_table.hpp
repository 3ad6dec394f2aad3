#pragma once
/// Tables of (parameter, measured, target, error) rows and their file formats.

#include "magbl/common.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace magbl {

struct ConvergenceRow {
    double parameter = 0.0;  // mu or tau
    cplx measured{0.0, 0.0};
    cplx target{0.0, 0.0};
    double abs_error = 0.0;
    double rel_error = 0.0;
};

struct ConvergenceTable {
    std::string parameter_name = "tau";
    std::vector<ConvergenceRow> rows;
    /// Free-form key/value metadata (frame vectors, preset names, solver route).
    std::map<std::string, std::string> metadata;

    /// Appends a row; errors are derived from measured and target.
    /// rel_error is abs_error/|target|, or abs_error when the target vanishes.
    void add(double parameter, cplx measured, cplx target);
    bool empty() const { return rows.empty(); }
    std::vector<double> abs_errors() const;
    /// True when the parameter column is strictly increasing.
    bool parameter_increasing() const;
};

/// True when every entry is strictly smaller than its predecessor.
bool strictly_decreasing(const std::vector<double>& v);

/// CSV with columns mu_or_tau, measured, target, abs_error, rel_error, measured_im, target_im.
/// measured/target hold real parts; imaginary parts are appended so that complex rows round-trip.
void write_csv(const ConvergenceTable& table, std::ostream& os);
std::string to_csv(const ConvergenceTable& table);
/// Parses the CSV written by write_csv.
ConvergenceTable read_csv(std::istream& is);

/// Plot-ready output: one headerless two-column file per curve (x, y) plus
/// `<stem>_manifest.json` naming the axes of every curve. Returns the written paths.
/// Refuses an empty table.
std::vector<std::filesystem::path> emit_plotdata(const ConvergenceTable& table, const std::filesystem::path& dir,
                                                 const std::string& stem);

/// Reads back the files written by emit_plotdata.
ConvergenceTable read_plotdata(const std::filesystem::path& dir, const std::string& stem);

}  // namespace magbl
