#pragma once
/// Built-in closed-form coefficient families and their sampling onto a grid.

#include "magbl/field_domain.hpp"
#include "magbl/functions.hpp"

#include <string>
#include <vector>

namespace magbl {

/// Parameters of one closed-form field.
///
/// Vector kinds: zero, vortex_bump, directional_bump, gradient (of `terms[0]`, a scalar
/// spec), uniform_field (windowed), sum (of `terms`).
/// Scalar kinds: zero, constant, bump, gaussian, sum.
struct PresetSpec {
    std::string kind = "zero";
    double amplitude = 0.0;
    double value = 0.0;
    Vec2 center{0.0, 0.0};
    double radius = 0.25;
    double power = 4.0;
    Vec2 direction{1.0, 0.0};
    double sigma = 0.1;
    double cutoff = 0.3;
    double field = 0.0;
    double inner_radius = 0.1;
    double outer_radius = 0.3;
    std::vector<PresetSpec> terms;
};

/// Coefficients (A, V) of one operator.
struct OperatorPreset {
    PresetSpec A;
    PresetSpec V;
};

VectorFn make_vector_function(const PresetSpec& spec);
ScalarFn make_scalar_function(const PresetSpec& spec);

VectorField2D sample_vector(const Domain2D& d, const VectorFunction& f);
RealField sample_scalar(const Domain2D& d, const ScalarFunction& f);

struct SampledPreset {
    VectorFn A_fn;
    ScalarFn V_fn;
    VectorField2D A;
    RealField V;
};

/// Samples a preset. With `require_collar_free`, refuses an A whose support meets the collar.
SampledPreset sample_preset(const Domain2D& d, const OperatorPreset& preset, bool require_collar_free = false);

/// True when the support box of f stays at distance >= w from the boundary.
bool support_avoids_collar(const Domain2D& d, const Box& support);

}  // namespace magbl
