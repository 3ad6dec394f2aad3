#include "magbl/config.hpp"

#include "magbl/ansatz.hpp"
#include "magbl/representation.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace magbl {

namespace {

std::string where(const std::string& origin, const YAML::Node& n) {
    std::ostringstream os;
    os << origin;
    if (n.Mark().line >= 0) os << ":" << n.Mark().line + 1;
    return os.str();
}

[[noreturn]] void fail(const std::string& origin, const YAML::Node& n, const std::string& msg) {
    throw ConfigError(where(origin, n) + ": " + msg);
}

void only_keys(const std::string& origin, const YAML::Node& n, std::initializer_list<const char*> keys,
               const std::string& block) {
    if (!n.IsMap()) fail(origin, n, "block '" + block + "' must be a mapping");
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& kv : n) {
        const std::string k = kv.first.as<std::string>();
        if (!allowed.count(k)) fail(origin, kv.first, "unknown key '" + k + "' in block '" + block + "'");
    }
}

template <class T>
T scalar(const std::string& origin, const YAML::Node& n, const std::string& name) {
    if (!n.IsScalar()) fail(origin, n, "'" + name + "' must be a scalar");
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        fail(origin, n, "'" + name + "' has the wrong type");
    }
}

double number(const std::string& origin, const YAML::Node& n, const std::string& name) {
    const double v = scalar<double>(origin, n, name);
    if (!std::isfinite(v)) fail(origin, n, "'" + name + "' must be finite");
    return v;
}

Vec2 vec2(const std::string& origin, const YAML::Node& n, const std::string& name) {
    if (!n.IsSequence() || n.size() != 2) fail(origin, n, "'" + name + "' must be a list of two numbers");
    return {number(origin, n[0], name), number(origin, n[1], name)};
}

std::vector<double> numbers(const std::string& origin, const YAML::Node& n, const std::string& name) {
    if (!n.IsSequence()) fail(origin, n, "'" + name + "' must be a list of numbers");
    std::vector<double> out;
    for (const auto& e : n) out.push_back(number(origin, e, name));
    return out;
}

PresetSpec preset(const std::string& origin, const YAML::Node& n, const std::string& block) {
    only_keys(origin, n,
              {"kind", "amplitude", "value", "center", "radius", "power", "direction", "sigma", "cutoff", "field",
               "inner_radius", "outer_radius", "terms"},
              block);
    PresetSpec s;
    if (!n["kind"]) fail(origin, n, "preset in '" + block + "' needs a 'kind'");
    s.kind = scalar<std::string>(origin, n["kind"], "kind");
    if (n["amplitude"]) s.amplitude = number(origin, n["amplitude"], "amplitude");
    if (n["value"]) s.value = number(origin, n["value"], "value");
    if (n["center"]) s.center = vec2(origin, n["center"], "center");
    if (n["radius"]) s.radius = number(origin, n["radius"], "radius");
    if (n["power"]) s.power = number(origin, n["power"], "power");
    if (n["direction"]) s.direction = vec2(origin, n["direction"], "direction");
    if (n["sigma"]) s.sigma = number(origin, n["sigma"], "sigma");
    if (n["cutoff"]) s.cutoff = number(origin, n["cutoff"], "cutoff");
    if (n["field"]) s.field = number(origin, n["field"], "field");
    if (n["inner_radius"]) s.inner_radius = number(origin, n["inner_radius"], "inner_radius");
    if (n["outer_radius"]) s.outer_radius = number(origin, n["outer_radius"], "outer_radius");
    if (n["terms"]) {
        if (!n["terms"].IsSequence()) fail(origin, n["terms"], "'terms' must be a list of presets");
        for (const auto& t : n["terms"]) s.terms.push_back(preset(origin, t, block + ".terms"));
    }
    return s;
}

void check_vector_preset(const std::string& origin, const YAML::Node& n, const PresetSpec& s) {
    try {
        (void)make_vector_function(s);
    } catch (const InvalidArgument& e) {
        fail(origin, n, e.what());
    }
}

void check_scalar_preset(const std::string& origin, const YAML::Node& n, const PresetSpec& s) {
    try {
        (void)make_scalar_function(s);
    } catch (const InvalidArgument& e) {
        fail(origin, n, e.what());
    }
}

OperatorPreset operator_block(const std::string& origin, const YAML::Node& n, const std::string& block) {
    only_keys(origin, n, {"A", "V"}, block);
    OperatorPreset p;
    if (n["A"]) {
        p.A = preset(origin, n["A"], block + ".A");
        check_vector_preset(origin, n["A"], p.A);
    }
    if (n["V"]) {
        p.V = preset(origin, n["V"], block + ".V");
        check_scalar_preset(origin, n["V"], p.V);
    }
    return p;
}

const std::set<std::string> kSubcommands = {"eigs",       "lemma-suite", "identity",  "limit-magnetic",
                                            "limit-electric", "recover-da", "recover-v", "gauge-check",
                                            "uniqueness"};

}  // namespace

EigenOptions SolverConfig::eigen_options() const {
    EigenOptions o;
    o.tolerance = tolerance;
    if (method == "dense") o.method = EigenOptions::Method::Dense;
    if (method == "krylov") o.method = EigenOptions::Method::Krylov;
    return o;
}

bool OutputConfig::wants(const std::string& f) const {
    return std::find(formats.begin(), formats.end(), f) != formats.end();
}

const std::map<std::string, double>& default_tolerances() {
    static const std::map<std::string, double> t = {
        {"eigs_lambda_rel", 0.02},
        {"orthonormality", 1e-10},
        {"eigen_residual_rel", 1e-8},
        {"series_direct_rel", 1e-9},
        {"gradient_ratio_spread", 10.0},
        {"z_mu_last_first_ratio", 0.2},
        {"identity_rel_residual", 1e-2},
        {"limit_magnetic_rel", 0.15},
        {"limit_electric_rel", 0.10},
        {"spectral_route_rel", 0.05},
        {"recover_curl_rel", 0.10},
        {"recover_potential_rel", 0.05},
        {"gauge_eigen_gap_rel", 1e-3},
        {"gauge_trace_rel", 1e-2},
        {"gauge_certificate_excess", 1e-4},
        {"gauge_function_error", 1e-4},
        {"gauge_curl_rel", 1e-2},
        {"uniqueness_curl", 1e-2},
        {"uniqueness_potential", 1e-2},
        {"uniqueness_gauge_boundary_rel", 1e-8},
    };
    return t;
}

double ExperimentConfig::tolerance(const std::string& name) const {
    const auto it = tolerances.find(name);
    if (it == tolerances.end()) throw InvalidArgument("unknown tolerance '" + name + "'");
    return it->second;
}

Domain2D ExperimentConfig::build() const {
    return build_domain(domain.L1, domain.L2, domain.N1, domain.N2, domain.collar);
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        std::ostringstream os;
        os << origin << ":" << e.mark.line + 1 << ": " << e.msg;
        throw ConfigError(os.str());
    }
    ExperimentConfig c;
    c.tolerances = default_tolerances();
    if (!root || root.IsNull()) return c;
    only_keys(origin, root,
              {"domain", "operator1", "operator2", "frame", "solver", "gauge", "recovery", "output", "tolerances"},
              "top level");

    if (const auto n = root["domain"]) {
        only_keys(origin, n, {"L1", "L2", "N1", "N2", "collar"}, "domain");
        if (n["L1"]) c.domain.L1 = number(origin, n["L1"], "L1");
        if (n["L2"]) c.domain.L2 = number(origin, n["L2"], "L2");
        if (n["N1"]) c.domain.N1 = scalar<int>(origin, n["N1"], "N1");
        if (n["N2"]) c.domain.N2 = scalar<int>(origin, n["N2"], "N2");
        if (n["collar"]) c.domain.collar = number(origin, n["collar"], "collar");
        try {
            (void)c.build();
        } catch (const InvalidArgument& e) {
            fail(origin, n, e.what());
        }
    }
    if (const auto n = root["operator1"]) c.first = operator_block(origin, n, "operator1");
    if (const auto n = root["operator2"]) c.second = operator_block(origin, n, "operator2");

    if (const auto n = root["frame"]) {
        only_keys(origin, n, {"xi", "xi_grid", "tau"}, "frame");
        if (const auto x = n["xi"]) {
            if (!x.IsSequence()) fail(origin, x, "'xi' must be a list of [xi1, xi2] pairs");
            for (const auto& e : x) {
                const Vec2 v = vec2(origin, e, "xi");
                if (v.norm() == 0.0) fail(origin, e, "xi must be nonzero");
                c.frame.xi.push_back(v);
            }
        }
        if (const auto g = n["xi_grid"]) {
            only_keys(origin, g, {"modes"}, "frame.xi_grid");
            if (g["modes"]) c.frame.grid_modes = scalar<int>(origin, g["modes"], "modes");
            if (c.frame.grid_modes < 1) fail(origin, g, "xi_grid.modes must be at least 1");
        }
        if (const auto t = n["tau"]) {
            c.frame.tau = numbers(origin, t, "tau");
            if (c.frame.tau.empty()) fail(origin, t, "tau ladder is empty");
            for (double v : c.frame.tau)
                if (!(v > 0.0)) fail(origin, t, "tau values must be positive");
            if (!std::is_sorted(c.frame.tau.begin(), c.frame.tau.end()) ||
                std::adjacent_find(c.frame.tau.begin(), c.frame.tau.end()) != c.frame.tau.end())
                fail(origin, t, "tau ladder must be strictly increasing");
        }
    }

    if (const auto n = root["solver"]) {
        only_keys(origin, n,
                  {"eigenpairs", "tolerance", "method", "mu_star", "lambda_list", "mu_list", "gradient_lambda_list", "datum_wave",
                   "resolution_limit", "spectral_route"},
                  "solver");
        if (n["eigenpairs"]) c.solver.eigenpairs = scalar<int>(origin, n["eigenpairs"], "eigenpairs");
        if (c.solver.eigenpairs < 0) fail(origin, n["eigenpairs"], "eigenpairs must be >= 0");
        if (n["tolerance"]) c.solver.tolerance = number(origin, n["tolerance"], "tolerance");
        if (!(c.solver.tolerance > 0.0)) fail(origin, n, "solver tolerance must be positive");
        if (n["method"]) {
            c.solver.method = scalar<std::string>(origin, n["method"], "method");
            if (c.solver.method != "automatic" && c.solver.method != "dense" && c.solver.method != "krylov")
                fail(origin, n["method"], "method must be automatic, dense or krylov");
        }
        if (n["mu_star"]) c.solver.mu_star = number(origin, n["mu_star"], "mu_star");
        if (n["lambda_list"]) c.solver.lambda_list = numbers(origin, n["lambda_list"], "lambda_list");
        if (n["mu_list"]) c.solver.mu_list = numbers(origin, n["mu_list"], "mu_list");
        if (n["gradient_lambda_list"])
            c.solver.gradient_lambda_list = numbers(origin, n["gradient_lambda_list"], "gradient_lambda_list");
        if (n["datum_wave"]) c.solver.datum_wave = vec2(origin, n["datum_wave"], "datum_wave");
        if (n["resolution_limit"]) c.solver.resolution_limit = number(origin, n["resolution_limit"], "resolution_limit");
        if (!(c.solver.resolution_limit > 0.0)) fail(origin, n, "resolution_limit must be positive");
        if (n["spectral_route"]) c.solver.spectral_route = scalar<bool>(origin, n["spectral_route"], "spectral_route");
    }

    if (const auto n = root["gauge"]) {
        only_keys(origin, n, {"p"}, "gauge");
        if (!n["p"]) fail(origin, n, "gauge block needs 'p'");
        c.gauge = preset(origin, n["p"], "gauge.p");
        check_scalar_preset(origin, n["p"], *c.gauge);
    }

    if (const auto n = root["recovery"]) {
        only_keys(origin, n, {"mode"}, "recovery");
        if (n["mode"]) c.recovery_mode = scalar<std::string>(origin, n["mode"], "mode");
        if (c.recovery_mode != "oracle" && c.recovery_mode != "spectral")
            fail(origin, n["mode"], "recovery mode must be oracle or spectral");
    }

    if (const auto n = root["output"]) {
        only_keys(origin, n, {"directory", "formats"}, "output");
        if (n["directory"]) c.output.directory = scalar<std::string>(origin, n["directory"], "directory");
        if (const auto f = n["formats"]) {
            if (!f.IsSequence()) fail(origin, f, "'formats' must be a list");
            c.output.formats.clear();
            for (const auto& e : f) {
                const std::string s = scalar<std::string>(origin, e, "formats");
                if (s != "csv" && s != "json" && s != "plot") fail(origin, e, "format must be csv, json or plot");
                c.output.formats.push_back(s);
            }
        }
    }

    if (const auto n = root["tolerances"]) {
        if (!n.IsMap()) fail(origin, n, "'tolerances' must be a mapping");
        for (const auto& kv : n) {
            const std::string k = kv.first.as<std::string>();
            if (!c.tolerances.count(k)) fail(origin, kv.first, "unknown tolerance '" + k + "'");
            const double v = number(origin, kv.second, k);
            if (!(v > 0.0)) fail(origin, kv.second, "tolerance '" + k + "' must be positive");
            c.tolerances[k] = v;
        }
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open configuration file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string());
}

std::vector<Vec2> frame_frequencies(const ExperimentConfig& cfg) {
    if (!cfg.frame.xi.empty()) return cfg.frame.xi;
    return {Vec2(2.0 * kPi / cfg.domain.L1, 0.0)};
}

void validate_config(const ExperimentConfig& cfg, const std::string& sub) {
    if (!kSubcommands.count(sub)) throw ConfigError("unknown subcommand '" + sub + "'");
    Domain2D d;
    try {
        d = cfg.build();
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("domain: ") + e.what());
    }
    const int n = d.interior_count();
    if (cfg.solver.eigenpairs > n) {
        std::ostringstream os;
        os << "solver.eigenpairs = " << cfg.solver.eigenpairs << " exceeds the " << n << " interior nodes";
        throw ConfigError(os.str());
    }

    const bool needs_tau = sub == "identity" || sub == "limit-magnetic" || sub == "limit-electric" ||
                           ((sub == "recover-da" || sub == "recover-v") && cfg.recovery_mode == "spectral") ||
                           sub == "uniqueness";
    if (needs_tau) {
        const double tmax = max_admissible_tau(d, cfg.solver.resolution_limit);
        for (double t : cfg.frame.tau)
            if (t > tmax) {
                std::ostringstream os;
                os << "frame.tau = " << t << " violates tau * max(h1, h2) <= " << cfg.solver.resolution_limit
                   << " on this grid (largest admissible tau " << tmax << ")";
                throw ConfigError(os.str());
            }
        std::vector<Vec2> freqs;
        if (sub == "identity" || sub == "limit-magnetic" || sub == "limit-electric") {
            freqs = frame_frequencies(cfg);
        } else {
            // the electric stage of the uniqueness sweep needs at least three modes
            const int m = sub == "uniqueness" ? std::max(3, cfg.frame.grid_modes) : cfg.frame.grid_modes;
            freqs.push_back(Vec2(2.0 * kPi * m / cfg.domain.L1, 2.0 * kPi * m / cfg.domain.L2));
        }
        for (const Vec2& xi : freqs)
            for (double t : cfg.frame.tau)
                if (!(t > xi.norm())) {
                    std::ostringstream os;
                    os << "frame.tau = " << t << " does not exceed |xi| = " << xi.norm();
                    throw ConfigError(os.str());
                }
        for (double t : cfg.frame.tau) {
            if (!(std::pow(t, -1.0 / 3.0) > 2.0 * std::max(d.h1, d.h2))) {
                std::ostringstream os;
                os << "frame.tau = " << t << " gives a mollification scale below two grid steps";
                throw ConfigError(os.str());
            }
        }
    }

    if (sub == "limit-electric" || sub == "recover-v") {
        const VectorField2D a1 = sample_vector(d, *make_vector_function(cfg.first.A));
        const VectorField2D a2 = sample_vector(d, *make_vector_function(cfg.second.A));
        if (sub == "limit-electric" || cfg.recovery_mode == "oracle")
            if (a1.a1 != a2.a1 || a1.a2 != a2.a2)
                throw ConfigError("operator1.A and operator2.A must coincide for the electric experiments");
    }
    if (sub == "lemma-suite" || sub == "limit-magnetic" || sub == "limit-electric" || sub == "uniqueness" ||
        sub == "recover-da" || sub == "recover-v" || sub == "identity") {
        const VectorField2D a1 = sample_vector(d, *make_vector_function(cfg.first.A));
        const VectorField2D a2 = sample_vector(d, *make_vector_function(cfg.second.A));
        const CollarReport cr = check_collar(a1, a2, d);
        if (!cr.pass) {
            std::ostringstream os;
            os << "operator1.A and operator2.A differ on the collar (max difference " << cr.max_difference << ")";
            throw ConfigError(os.str());
        }
    }
    if (sub == "lemma-suite") {
        if (cfg.solver.lambda_list.empty() || cfg.solver.mu_list.empty() || cfg.solver.gradient_lambda_list.empty())
            throw ConfigError("solver.lambda_list, solver.mu_list and solver.gradient_lambda_list must be nonempty");
    }
    if (sub == "gauge-check") {
        if (!cfg.gauge) throw ConfigError("gauge-check needs a 'gauge' block");
        const Box s = make_scalar_function(*cfg.gauge)->support();
        if (!support_avoids_collar(d, s)) throw ConfigError("gauge.p must be supported away from the collar");
        if (cfg.solver.eigenpairs < 1) throw ConfigError("gauge-check needs solver.eigenpairs >= 1");
    }
    if (sub == "recover-v" && cfg.frame.grid_modes < 3)
        throw ConfigError("frame.xi_grid.modes must be at least 3 for potential recovery");
    if (sub == "eigs" && cfg.solver.eigenpairs < 1) throw ConfigError("eigs needs solver.eigenpairs >= 1");
}

}  // namespace magbl
