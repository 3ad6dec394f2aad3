#include "magbl/convergence_table.hpp"

#include "magbl/io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace magbl {

void ConvergenceTable::add(double parameter, cplx measured, cplx target) {
    ConvergenceRow r;
    r.parameter = parameter;
    r.measured = measured;
    r.target = target;
    r.abs_error = std::abs(measured - target);
    r.rel_error = std::abs(target) > 0.0 ? r.abs_error / std::abs(target) : r.abs_error;
    rows.push_back(r);
}

std::vector<double> ConvergenceTable::abs_errors() const {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(r.abs_error);
    return v;
}

bool ConvergenceTable::parameter_increasing() const {
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (!(rows[i].parameter > rows[i - 1].parameter)) return false;
    return true;
}

bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1])) return false;
    return true;
}

void write_csv(const ConvergenceTable& table, std::ostream& os) {
    os << "mu_or_tau,measured,target,abs_error,rel_error,measured_im,target_im\n";
    for (const auto& r : table.rows) {
        os << format_double(r.parameter) << ',' << format_double(r.measured.real()) << ','
           << format_double(r.target.real()) << ',' << format_double(r.abs_error) << ','
           << format_double(r.rel_error) << ',' << format_double(r.measured.imag()) << ','
           << format_double(r.target.imag()) << '\n';
    }
}

std::string to_csv(const ConvergenceTable& table) {
    std::ostringstream os;
    write_csv(table, os);
    return os.str();
}

namespace {

std::vector<double> split_numbers(const std::string& line) {
    std::vector<double> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
    return out;
}

}  // namespace

ConvergenceTable read_csv(std::istream& is) {
    ConvergenceTable t;
    std::string line;
    if (!std::getline(is, line)) throw InvalidArgument("empty convergence CSV");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto v = split_numbers(line);
        if (v.size() != 7) throw InvalidArgument("convergence CSV row has " + std::to_string(v.size()) + " cells");
        ConvergenceRow r;
        r.parameter = v[0];
        r.measured = {v[1], v[5]};
        r.target = {v[2], v[6]};
        r.abs_error = v[3];
        r.rel_error = v[4];
        t.rows.push_back(r);
    }
    return t;
}

namespace {

struct Curve {
    const char* name;
    double (*get)(const ConvergenceRow&);
};

const Curve kCurves[] = {
    {"abs_error", [](const ConvergenceRow& r) { return r.abs_error; }},
    {"rel_error", [](const ConvergenceRow& r) { return r.rel_error; }},
    {"measured_re", [](const ConvergenceRow& r) { return r.measured.real(); }},
    {"measured_im", [](const ConvergenceRow& r) { return r.measured.imag(); }},
    {"target_re", [](const ConvergenceRow& r) { return r.target.real(); }},
    {"target_im", [](const ConvergenceRow& r) { return r.target.imag(); }},
};

}  // namespace

std::vector<std::filesystem::path> emit_plotdata(const ConvergenceTable& table, const std::filesystem::path& dir,
                                                 const std::string& stem) {
    if (table.empty()) throw InvalidArgument("refusing to emit plot data for an empty table");
    std::vector<std::filesystem::path> written;
    nlohmann::ordered_json manifest;
    manifest["x_axis"] = table.parameter_name;
    manifest["rows"] = table.rows.size();
    nlohmann::ordered_json curves = nlohmann::ordered_json::array();
    for (const auto& c : kCurves) {
        std::ostringstream os;
        for (const auto& r : table.rows) os << format_double(r.parameter) << ' ' << format_double(c.get(r)) << '\n';
        const std::string file = stem + "_" + c.name + ".dat";
        write_text_file(dir / file, os.str());
        written.push_back(dir / file);
        curves.push_back({{"file", file}, {"x", table.parameter_name}, {"y", c.name}});
    }
    manifest["curves"] = curves;
    const auto mpath = dir / (stem + "_manifest.json");
    write_text_file(mpath, manifest.dump(2) + "\n");
    written.push_back(mpath);
    return written;
}

ConvergenceTable read_plotdata(const std::filesystem::path& dir, const std::string& stem) {
    std::ifstream mf(dir / (stem + "_manifest.json"));
    if (!mf) throw Error("missing plot manifest for '" + stem + "'");
    const auto manifest = nlohmann::json::parse(mf);
    ConvergenceTable t;
    t.parameter_name = manifest.at("x_axis").get<std::string>();
    const std::size_t n = manifest.at("rows").get<std::size_t>();
    t.rows.resize(n);
    for (const auto& c : manifest.at("curves")) {
        std::ifstream is(dir / c.at("file").get<std::string>());
        const std::string y = c.at("y").get<std::string>();
        for (std::size_t i = 0; i < n; ++i) {
            std::string xs, ys;
            if (!(is >> xs >> ys)) throw Error("plot file '" + c.at("file").get<std::string>() + "' is short");
            ConvergenceRow& r = t.rows[i];
            r.parameter = std::stod(xs);
            const double v = std::stod(ys);
            if (y == "abs_error") r.abs_error = v;
            else if (y == "rel_error") r.rel_error = v;
            else if (y == "measured_re") r.measured.real(v);
            else if (y == "measured_im") r.measured.imag(v);
            else if (y == "target_re") r.target.real(v);
            else if (y == "target_im") r.target.imag(v);
        }
    }
    return t;
}

}  // namespace magbl
