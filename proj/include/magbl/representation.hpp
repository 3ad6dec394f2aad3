#pragma once
/// Scattering functionals S_j, the term-by-term representation identity, and the
/// large-tau limits that expose A1 - A2 and V1 - V2.

#include "magbl/ansatz.hpp"
#include "magbl/convergence_table.hpp"
#include "magbl/resolvent_dtn.hpp"

#include <string>
#include <vector>

namespace magbl {

/// Largest tau allowed on the grid: tau * max(h1, h2) <= limit.
double max_admissible_tau(const Domain2D& d, double limit = 0.5);
/// Throws InvalidArgument naming the admissible maximum when tau is too large.
void check_resolution(const Domain2D& d, double tau, double limit = 0.5);

/// One operator together with the closed form of its magnetic potential.
struct OperatorInput {
    const MagneticOperator* op = nullptr;
    VectorFn A;
};

/// Frame, mollified potentials and the sampled ansatz pair for one (xi, tau).
struct ProbeSetup {
    IsozakiFrame frame;
    MollifiedPotential A1_sharp, A2_sharp;
    AnsatzFields fields;
};

/// Builds the probe: mollifies the extensions of A1 and A2 at delta = tau^(-1/3) and
/// samples the ansatz. Refuses tau beyond the resolution limit.
ProbeSetup make_probe(const Domain2D& d, const VectorFn& A1, const VectorFn& A2, const Vec2& xi, double tau,
                      bool unit_amplitude, double resolution_limit = 0.5);

struct ScatteringPair {
    cplx S1{0.0, 0.0};
    cplx S2{0.0, 0.0};
};

/// S_j = sum_b w_b (Lambda_j Phi1)_b Phi2_b (no conjugation).
ScatteringPair scattering_pair(const MagneticOperator& op1, const MagneticOperator& op2, const AnsatzFields& fields);
cplx scattering_functional(const MagneticOperator& op, const AnsatzFields& fields);

/// Terms of the representation of one S_j.
struct TermSet {
    cplx volume_magnetic{0, 0};  // 2 sqrt(lambda) int eta2.(A_j - A2_sharp) E b2
    cplx volume_electric{0, 0};  // int (V_j b2 - q_j2) E
    cplx boundary{0, 0};         // -i int_Gamma E (b2 sqrt(lambda) eta2 + b2 grad psi2 + i grad b2 + b2 A_j).nu
    cplx resolvent{0, 0};        // -int [(H_j - lambda)^{-1} (s_j Phi1)] W M_j
    cplx rhs{0, 0};              // sum of the four terms
    cplx direct{0, 0};           // S_j from the discrete DtN map
    double abs_residual = 0.0;
    double rel_residual = 0.0;
    double resolvent_bound = 0.0;  // ||source|| ||weight|| / |Im lambda|
    ComplexField q_first;          // q_j1 at every node
    ComplexField q_second;         // q_j2 at every node
};

struct RepresentationTerms {
    IsozakiFrame frame;
    TermSet first, second;
    /// Per-term breakdown (complex values as [re, im]).
    std::string to_json() const;
};

RepresentationTerms representation_terms(const OperatorInput& op1, const OperatorInput& op2, const ProbeSetup& probe);

/// 2 int_Omega eta.(A1 - A2) e^{-i xi.x} b e^{i psi} dx by trapezoidal quadrature on the grid.
cplx magnetic_limit_target(const Domain2D& d, const Vec2& xi, const Vec2& eta, const Vec2& y, const VectorFn& A1,
                           const VectorFn& A2, double ray_step = 0.0);
cplx magnetic_limit_target(const Domain2D& d, const IsozakiFrame& frame, const VectorFn& A1, const VectorFn& A2,
                           double ray_step = 0.0);

/// int_Omega (V1 - V2) e^{-i xi.x} dx. Refuses A1 != A2.
cplx electric_limit_target(const Domain2D& d, const Vec2& xi, const VectorField2D& A1, const VectorField2D& A2,
                           const RealField& V1, const RealField& V2);

enum class LimitMode { Magnetic, Electric };
enum class LimitRoute { Direct, Spectral };

struct SweepInput {
    OperatorInput first, second;
    const BoundarySpectralData* spec1 = nullptr;  // spectral route only
    const BoundarySpectralData* spec2 = nullptr;
    int K = 0;                                    // spectral route: pairs used (0 = all available)
    double resolution_limit = 0.5;
};

struct TauSweepResult {
    ConvergenceTable table;
    std::vector<double> truncation_indicators;  // spectral route
};

/// Measured (S1 - S2)/sqrt(lambda) (magnetic, closed-form b2) or S1 - S2 (electric, b2 = 1)
/// against the corresponding limit target for each tau. All taus are validated before
/// any solve.
TauSweepResult tau_sweep(const SweepInput& in, const Vec2& xi, const std::vector<double>& taus, LimitMode mode,
                         LimitRoute route);

}  // namespace magbl
