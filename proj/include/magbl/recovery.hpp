#pragma once
/// Fourier-side recovery of curl(A1 - A2) and V1 - V2, and the end-to-end uniqueness sweep.

#include "magbl/gauge.hpp"
#include "magbl/presets.hpp"
#include "magbl/representation.hpp"

#include <array>
#include <string>
#include <vector>

namespace magbl {

/// Lattice xi = 2 pi (m / L1, n / L2), |m|, |n| <= modes, without xi = 0.
struct FourierGrid {
    int modes = 0;
    double L1 = 1.0, L2 = 1.0;
    std::vector<std::array<int, 2>> index;
    CVec values;
    /// max |F(-xi) - conj F(xi)| / max |F| measured before enforcement.
    double asymmetry = 0.0;

    int size() const { return static_cast<int>(index.size()); }
    Vec2 xi(int k) const;
    /// Position of (m, n) in `index`, or -1.
    int find(int m, int n) const;
    /// Records the asymmetry, then replaces F(xi) by (F(xi) + conj F(-xi)) / 2.
    void enforce_conjugate_symmetry();
};

FourierGrid make_fourier_grid(const Domain2D& d, int modes);

/// f(x) = (zero_value + sum_xi F(xi) e^{i xi.x}) / |Omega|, real part, on every node.
RealField inverse_transform(const Domain2D& d, const FourierGrid& g, cplx zero_value = 0.0);

/// Trapezoidal Fourier coefficient int_Omega f e^{-i xi.x} dx of a nodal field.
cplx fourier_coefficient(const Domain2D& d, const RealField& f, const Vec2& xi);

struct RayIdentity {
    cplx lhs{0, 0};  // volume form
    cplx rhs{0, 0};  // line-of-rays form
};

/// Both sides of int eta.A e^{-i xi.x} b e^{i psi} dx = -i int_{eta-perp} [e^{i I(x')} - 1] b(x') e^{-i xi.x'} dx'
/// with I the full ray integral of eta.A, for A = A_diff extended by zero.
RayIdentity ray_transform_identity(const Domain2D& d, const Vec2& xi, const VectorFn& A_diff, double ray_step = 0.0);

enum class RecoveryMode { Oracle, Spectral };

struct RecoverySource {
    const Domain2D* domain = nullptr;
    VectorFn A1, A2;
    ScalarFn V1, V2;
    /// Potential used in the second slot of the ansatz (defaults to A2). The electric
    /// recovery after gauge alignment uses A1 here.
    VectorFn A_ansatz_second;
    const BoundarySpectralData* spec1 = nullptr;  // spectral mode
    const BoundarySpectralData* spec2 = nullptr;
    int K = 0;  // 0 = all available pairs
};

struct RecoveryOptions {
    RecoveryMode mode = RecoveryMode::Oracle;
    int modes = 8;
    std::vector<double> taus;  // spectral mode; empty selects the largest admissible tau
    double resolution_limit = 0.5;
};

struct RecoveryReport {
    std::string quantity;  // "curl" or "potential"
    FourierGrid data;      // per-xi values after symmetry enforcement
    FourierGrid fitted;    // spectral mode: linear fit in 1/tau (equal to data with one tau)
    std::vector<cplx> oracle;         // spectral mode: the limit targets per xi
    std::vector<double> gap;          // spectral mode: |measured - oracle| per xi
    std::vector<double> indicators;   // spectral mode: truncation indicators per xi
    cplx zero_value{0, 0};
    RealField estimate, fitted_estimate, reference;
    double reference_scale = 0.0;
    double rel_l2_error = 0.0;
    double fitted_rel_l2_error = 0.0;
    std::string to_json() const;
};

/// Recovers curl(A1 - A2) from F[curl(A1 - A2)](xi) = T(xi) / (2 orientation), with T the
/// magnetic limit (oracle) or the measured (S1 - S2)/sqrt(lambda) (spectral).
RecoveryReport recover_curl(const RecoverySource& src, const RecoveryOptions& opt);
/// Recovers V1 - V2 from the electric limit. The xi = 0 coefficient is filled by quadratic
/// extrapolation in |xi|^2 along both axes.
RecoveryReport recover_potential(const RecoverySource& src, const RecoveryOptions& opt);

/// Writes a nodal field as CSV with columns x1, x2, value.
std::string field_csv(const Domain2D& d, const RealField& f);

struct UniquenessOptions {
    int eigenpairs = 0;  // 0 = full spectrum
    int modes = 2;
    std::vector<double> taus;
    double curl_tolerance = 1e-2;
    double potential_tolerance = 1e-2;
    double gauge_boundary_tolerance = 1e-8;  // max |p| on the boundary relative to max |p|
    EigenOptions eig;
};

struct UniquenessReport {
    SpectralComparison diagnostics;
    RecoveryReport curl;
    bool gauge_stage_run = false;
    double gauge_certificate = 0.0;
    double gauge_curl_ratio = 0.0;
    double gauge_boundary_rel = 0.0;
    SpectralComparison aligned;  // aligned data versus operator 1 (diagnostic)
    RecoveryReport potential;
    bool curl_pass = false, gauge_pass = false, potential_pass = false;
    bool pass = false;
    std::string failed_stage;
    std::string to_json() const;
};

UniquenessReport uniqueness_sweep(const Domain2D& d, const OperatorPreset& first, const OperatorPreset& second,
                                  const UniquenessOptions& opt);

}  // namespace magbl
