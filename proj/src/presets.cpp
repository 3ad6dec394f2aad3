#include "magbl/presets.hpp"

namespace magbl {

VectorFn make_vector_function(const PresetSpec& s) {
    if (s.kind == "zero") return zero_vector();
    if (s.kind == "vortex_bump") return vortex_bump(s.amplitude, s.center, s.radius, s.power);
    if (s.kind == "directional_bump") return directional_bump(s.amplitude, s.center, s.radius, s.direction, s.power);
    if (s.kind == "gradient") {
        if (s.terms.size() != 1) throw InvalidArgument("gradient preset needs exactly one scalar term");
        return gradient_field(make_scalar_function(s.terms[0]));
    }
    if (s.kind == "uniform_field") return windowed_uniform_field(s.field, s.center, s.inner_radius, s.outer_radius);
    if (s.kind == "sum") {
        VectorFn acc = zero_vector();
        for (const auto& t : s.terms) acc = combine(1.0, acc, 1.0, make_vector_function(t));
        return acc;
    }
    throw InvalidArgument("unknown vector preset '" + s.kind + "'");
}

ScalarFn make_scalar_function(const PresetSpec& s) {
    if (s.kind == "zero") return zero_scalar();
    if (s.kind == "constant") return constant_scalar(s.value);
    if (s.kind == "bump") return bump_scalar(s.amplitude, s.center, s.radius, s.power);
    if (s.kind == "gaussian") return gaussian_scalar(s.amplitude, s.center, s.sigma, s.cutoff);
    if (s.kind == "sum") {
        ScalarFn acc = zero_scalar();
        for (const auto& t : s.terms) acc = combine(1.0, acc, 1.0, make_scalar_function(t));
        return acc;
    }
    throw InvalidArgument("unknown scalar preset '" + s.kind + "'");
}

VectorField2D sample_vector(const Domain2D& d, const VectorFunction& f) {
    VectorField2D out(d.node_count());
    for (int g = 0; g < d.node_count(); ++g) {
        const Vec2 v = f.value(d.point(g));
        out.a1[g] = v[0];
        out.a2[g] = v[1];
    }
    return out;
}

RealField sample_scalar(const Domain2D& d, const ScalarFunction& f) {
    RealField out(d.node_count());
    for (int g = 0; g < d.node_count(); ++g) out[g] = f.value(d.point(g));
    return out;
}

bool support_avoids_collar(const Domain2D& d, const Box& s) {
    if (s.empty) return true;
    if (!s.bounded()) return false;
    const double w = d.collar_width;
    return s.lo[0] >= d.x0 + w && s.hi[0] <= d.x0 + d.L1 - w && s.lo[1] >= d.y0 + w && s.hi[1] <= d.y0 + d.L2 - w;
}

SampledPreset sample_preset(const Domain2D& d, const OperatorPreset& preset, bool require_collar_free) {
    SampledPreset out;
    out.A_fn = make_vector_function(preset.A);
    out.V_fn = make_scalar_function(preset.V);
    if (require_collar_free && !support_avoids_collar(d, out.A_fn->support()))
        throw InvalidArgument("preset '" + preset.A.kind + "' has support reaching the collar");
    out.A = sample_vector(d, *out.A_fn);
    out.V = sample_scalar(d, *out.V_fn);
    return out;
}

}  // namespace magbl
