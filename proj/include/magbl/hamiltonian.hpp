#pragma once
/// Link-phase discretization of (-i grad + A)^2 + V with Dirichlet conditions,
/// eigensolvers and boundary spectral data.

#include "magbl/field_domain.hpp"

#include <Eigen/SparseCore>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace magbl {

using SpMat = Eigen::SparseMatrix<cplx, Eigen::ColMajor, int>;

/// Hermitian matrix over interior nodes plus the data needed for boundary fluxes.
///
/// The hopping amplitude between neighbours x and y = x + h e_j is
/// H(x, y) = -U(x->y) / h^2 with U(x->y) = exp(i h (A_j(x) + A_j(y)) / 2), and
/// H(y, x) = conj(H(x, y)). Plane waves e^{ik.x} see the symbol (k + A)^2.
struct MagneticOperator {
    Domain2D domain;
    VectorField2D A;
    RealField V;
    SpMat H;
    std::vector<cplx> link_x;  // U(g -> g+1) for nodes with i < N1-1
    std::vector<cplx> link_y;  // U(g -> g+N1) for nodes with j < N2-1
    double spectrum_lower_bound = 0.0;  // Gershgorin bound
    double spectrum_upper_bound = 0.0;
    std::string scheme = "peierls-link";

    /// Phase U(from -> to) for nearest neighbours.
    cplx link(int from, int to) const;
    int interior_count() const { return domain.interior_count(); }
};

/// Assembles the operator; rejects non-finite or mis-sized fields.
MagneticOperator assemble(const Domain2D& d, const VectorField2D& A, const RealField& V);

/// Non-Hermitian centered-difference expansion -Lap - 2iA.grad - i div A + |A|^2 + V over
/// interior nodes. Cross-check only.
SpMat assemble_expanded(const Domain2D& d, const VectorField2D& A, const RealField& V);

/// Right-hand side contribution -H_IB f of boundary values on the interior equations.
CVec boundary_lift(const MagneticOperator& op, const CVec& f);

/// Flux-form residual at every node: sum over links c_xy (u_x - U(x->y) u_y) + |cell_x| (V_x - lambda) u_x,
/// with c_xy = dual edge length / link length. At interior nodes this equals |cell| ((H - lambda) u)_x.
CVec nodal_residual(const MagneticOperator& op, const ComplexField& u, cplx lambda);

/// Discrete magnetic conormal derivative (d_nu + i A.nu) u at boundary nodes: the residual
/// divided by the boundary quadrature weight.
BoundaryFunction conormal_flux(const MagneticOperator& op, const ComplexField& u, cplx lambda);

/// Second-order one-sided derivative along -nu using the two nearest nodes inward.
BoundaryFunction normal_derivative(const Domain2D& d, const ComplexField& phi);

struct EigenOptions {
    enum class Method { Automatic, Dense, Krylov };
    Method method = Method::Automatic;
    int block_size = 8;
    /// Residual target ||H x - lambda x|| <= tolerance * spectrum_upper_bound.
    double tolerance = 1e-11;
    std::uint64_t seed = 20240517;
    /// Automatic picks the dense solver up to this many interior nodes.
    int dense_limit = 1600;
};

/// Lowest K eigenpairs with boundary traces h_k = (d_nu + iA.nu) phi_k.
struct BoundarySpectralData {
    RVec eigenvalues;   // ascending
    CMat vectors;       // interior values, sum |phi|^2 h1 h2 = 1
    CMat traces;        // boundary values, column k is h_k
    RVec boundary_weights;
    RVec residuals;     // ||H phi - lambda phi|| / ||phi|| (Euclidean)
    double cell_area = 0.0;
    std::string method;

    int count() const { return static_cast<int>(eigenvalues.size()); }
    BoundaryFunction trace(int k) const { return BoundaryFunction(traces.col(k), boundary_weights); }
    /// First K pairs of this data set.
    BoundarySpectralData truncated(int K) const;
};

BoundarySpectralData eigensolve(const MagneticOperator& op, int K, const EigenOptions& opt = {});

/// Boundary trace of an eigenvector given by its interior values.
CVec eigen_trace(const MagneticOperator& op, const CVec& interior);

/// Groups of consecutive indices whose eigenvalues lie within rel_tol*|lambda| of a neighbour.
std::vector<std::vector<int>> eigen_clusters(const RVec& eigenvalues, double rel_tol = 1e-6);

/// CSV with columns k, lambda, then Re/Im of h_k at each boundary node in boundary order.
void write_spectral_csv(const BoundarySpectralData& data, std::ostream& os);

}  // namespace magbl
