#pragma once
/// Oscillating test functions: frame parameters, mollified magnetic potentials,
/// transport phases and amplitudes, and the two ansatz families on the grid.

#include "magbl/field_domain.hpp"
#include "magbl/functions.hpp"

#include <memory>

namespace magbl {

/// Parameter bundle for one probing frequency xi at scale tau.
///
/// eta is xi rotated by -90 degrees (orientation +1) or +90 degrees (orientation -1);
/// y = xi/|xi|. eta1 = B eta - xi/(2 tau), eta2 = B eta + xi/(2 tau) with
/// B = sqrt(1 - |xi|^2/(4 tau^2)), lambda = (tau + i)^2 and delta = tau^(-1/3).
struct IsozakiFrame {
    Vec2 xi{0, 0};
    double tau = 0.0;
    double B = 0.0;
    Vec2 eta{0, 0};
    Vec2 y{0, 0};
    Vec2 eta1{0, 0};
    Vec2 eta2{0, 0};
    Vec2 omega{0, 0};  // B xi - |xi|^2 eta / (2 tau), orthogonal to eta2
    cplx lambda{0, 0};
    cplx sqrt_lambda{0, 0};  // principal branch, equals tau + i
    double delta = 0.0;
    int orientation = 1;
};

/// Orientation +1 when xi_1 != 0, otherwise -1 (the roles of the two axes are swapped).
IsozakiFrame isozaki_params(const Vec2& xi, double tau);
IsozakiFrame isozaki_params(const Vec2& xi, double tau, int orientation);

/// Smoothed vector potential A_sharp = chi_delta * A_ext, stored on an auxiliary grid
/// together with its first derivatives (convolutions with the kernel gradient).
struct MollifiedPotential {
    std::shared_ptr<const GridVectorFunction> field;  // null when the extension vanishes
    VectorFn extension;
    double delta = 0.0;
    double spacing = 0.0;       // auxiliary grid step
    double sup_distance = 0.0;  // max |A_sharp - A_ext| on the auxiliary grid
    double sup_first = 0.0;     // max |d A_sharp|
    double sup_second = 0.0;    // max |d^2 A_sharp| (differences of the derivative grids)
    Box support;

    Vec2 value(const Vec2& x) const;
    Mat2 jacobian(const Vec2& x) const;
    VectorFn as_function() const;
};

/// Kernel profile (1 - |x|^2)^4 on the unit disc (unnormalized).
double mollifier_profile(double r2);

/// Mollifies a compactly supported C1 field. `grid_spacing` is the spacing of the
/// computational grid; delta <= 2 * grid_spacing is refused. The auxiliary grid uses
/// step min(grid_spacing/2, delta/16) and the discrete kernel is renormalized to unit mass.
MollifiedPotential mollify(const VectorFn& extension, double delta, double grid_spacing);

/// Extension of the first potential: the closed form itself.
VectorFn extension_first(const VectorFn& A1);
/// Extension of the second potential: A2 on the closed rectangle, A1 outside.
VectorFn extension_second(const Domain2D& d, const VectorFn& A1, const VectorFn& A2);

/// Integral of f(x + s dir) over s in [lower, upper] restricted to the parameters where
/// x + s dir lies in `support`; composite Simpson with step <= max_step.
double ray_integral(const std::function<double(const Vec2&)>& f, const Box& support, const Vec2& x,
                    const Vec2& dir, double lower, double upper, double max_step);

/// psi(x) = -integral_{-inf}^0 dir . A_sharp(x + s dir) ds.
double transport_phase(const MollifiedPotential& A, const Vec2& dir, const Vec2& x, double max_step);

/// Closed-form amplitude
///   b2(x) = (-i omega.y - i int_R eta2.(y.grad)A_sharp(x + s eta2) ds) exp(-i int_R eta2.A_sharp(x + s eta2) ds)
/// with A_sharp = A2_sharp - A1_sharp.
class AmplitudeField {
public:
    AmplitudeField(const IsozakiFrame& frame, const MollifiedPotential& A1, const MollifiedPotential& A2,
                   double max_step);
    cplx operator()(const Vec2& x) const;

private:
    IsozakiFrame frame_;
    GridField proj_;   // eta2 . A_sharp
    GridField slope_;  // y . grad(eta2 . A_sharp)
    Box support_;
    double step_;
    bool zero_ = true;
};

/// Large-tau limits of the amplitude and of psi1 - psi2, built from the unmollified
/// difference A = A2 - A1:
///   b(x) = (-i xi.y - i int_R eta.(y.grad)A ds) exp(-i int_R eta.A ds),
///   psi(x) = int_{-inf}^0 eta.A(x + s eta) ds.
class LimitAmplitude {
public:
    LimitAmplitude(const Vec2& xi, const Vec2& eta, const Vec2& y, VectorFn A1, VectorFn A2, double max_step);
    cplx b(const Vec2& x) const;
    double psi(const Vec2& x) const;
    /// Full-line integral of eta.A through x.
    double full_ray(const Vec2& x) const;

private:
    Vec2 xi_, eta_, y_;
    VectorFn A1_, A2_;
    Box support_;
    double step_;
};

/// Phases and amplitude sampled on the grid extended by one ghost layer, plus the two
/// test functions on the grid nodes.
struct AnsatzFields {
    IsozakiFrame frame;
    bool unit_amplitude = false;
    int ext_n1 = 0, ext_n2 = 0;  // N1 + 2, N2 + 2
    RVec psi1, psi2;             // extended grid
    CVec b2;                     // extended grid
    ComplexField phi1, phi2;     // grid nodes
    BoundaryFunction phi1_trace, phi2_trace;

    int ext(int i, int j) const { return (i + 1) + (j + 1) * ext_n1; }
};

struct AnsatzOptions {
    bool unit_amplitude = false;  // b2 = 1
    double max_step = 0.0;        // ray quadrature step; 0 selects min(h, delta/4)
};

AnsatzFields build_ansatz(const Domain2D& d, const IsozakiFrame& frame, const MollifiedPotential& A1,
                          const MollifiedPotential& A2, const AnsatzOptions& opt = {});

enum class AnsatzKind { First, Second };

struct AnsatzSample {
    BoundaryFunction trace;
    ComplexField values;
};

AnsatzSample evaluate_ansatz(const AnsatzFields& fields, AnsatzKind which);

/// Default ray quadrature step for a grid and frame.
double default_ray_step(const Domain2D& d, const IsozakiFrame& frame);

}  // namespace magbl
