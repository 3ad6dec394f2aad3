#pragma once
/// Experiment configuration: a YAML file with named blocks, validated before any compute.

#include "magbl/field_domain.hpp"
#include "magbl/hamiltonian.hpp"
#include "magbl/presets.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace magbl {

/// Malformed or inconsistent configuration. The message names the offending line.
class ConfigError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

struct DomainConfig {
    double L1 = 1.0, L2 = 1.0;
    int N1 = 65, N2 = 65;
    double collar = 0.15;
};

struct FrameConfig {
    std::vector<Vec2> xi;
    int grid_modes = 8;  // xi lattice |m|, |n| <= grid_modes for recovery
    std::vector<double> tau{8.0, 16.0, 32.0};
};

struct SolverConfig {
    int eigenpairs = 10;  // 0 selects the full spectrum
    double tolerance = 1e-11;
    std::string method = "automatic";  // automatic, dense, krylov
    std::optional<double> mu_star;
    std::vector<double> lambda_list{-10.0, -100.0, -1000.0, -10000.0};
    std::vector<double> mu_list{-10.0, -100.0, -1000.0, -10000.0};
    // the gradient bound is an upper bound uniform in lambda; far down the ladder u is confined to
    // a cell of the boundary and the ratio collapses, so it has its own moderate ladder
    std::vector<double> gradient_lambda_list{-50.0, -100.0, -200.0};
    Vec2 datum_wave{1.0, 2.0};  // boundary datum exp(i k.x) for the Dirichlet experiments
    double resolution_limit = 0.5;
    bool spectral_route = false;  // limit sweeps also evaluated from spectral data

    EigenOptions eigen_options() const;
};

struct OutputConfig {
    std::string directory = "out";
    std::vector<std::string> formats{"csv", "json"};
    bool wants(const std::string& f) const;
};

struct ExperimentConfig {
    DomainConfig domain;
    OperatorPreset first, second;
    FrameConfig frame;
    SolverConfig solver;
    std::optional<PresetSpec> gauge;   // gauge function p for gauge-check
    std::string recovery_mode = "oracle";  // oracle or spectral
    OutputConfig output;
    std::map<std::string, double> tolerances;  // defaults merged with overrides

    double tolerance(const std::string& name) const;
    Domain2D build() const;
};

/// Named tolerances and their defaults.
const std::map<std::string, double>& default_tolerances();

/// Parses YAML text. `origin` is used in diagnostics.
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Checks everything a subcommand needs before any solve: presets, grid, tau ladder
/// against the resolution limit and |xi|, eigenpair counts. Throws ConfigError.
void validate_config(const ExperimentConfig& cfg, const std::string& subcommand);

/// The frequencies used by the limit and identity experiments; defaults to (2 pi / L1, 0).
std::vector<Vec2> frame_frequencies(const ExperimentConfig& cfg);

}  // namespace magbl
