#pragma once
/// Gauge functions, gauge transformations and the gauge-invariance checks of boundary
/// spectral data.

#include "magbl/hamiltonian.hpp"
#include "magbl/functions.hpp"

#include <string>

namespace magbl {

struct GaugeFunction {
    RealField p;
    VectorField2D gradient;  // discrete gradient of p (same stencils as curl)
    CVec boundary_trace;
    double certificate = 0.0;  // max |grad_h p - A| over nodes
    double curl_ratio = 0.0;   // max |curl_h A| / max |d_h A|
};

struct GaugeOptions {
    double curl_tolerance = 0.05;
    int panels = 32;  // composite Gauss-Legendre panels on [0, 1]
};

/// p(x) = int_0^1 (x - c).A(c + t (x - c)) dt about the domain center c, shifted so that
/// p vanishes at the lower-left corner and set to exactly 0 outside the support box of A.
/// The certificate uses central differences, so it carries their O(h^2) truncation. Refuses fields whose
/// discrete curl exceeds curl_tolerance relative to their discrete first derivatives.
GaugeFunction gauge_function(const Domain2D& d, const VectorFn& A_diff, const GaugeOptions& opt = {});

/// max over nodes of |grad_h p - grad p| for a closed-form p: the floor of any certificate.
double gradient_truncation(const Domain2D& d, const ScalarFunction& p);

/// Spectral data of e^{ip} H e^{-ip} from those of H: eigenvalues unchanged, eigenvectors and
/// boundary traces multiplied by e^{ip}. Exact for the link-phase discretization, so the data
/// coincide with those of H wherever p vanishes on the boundary.
BoundarySpectralData gauge_conjugate(const Domain2D& d, const BoundarySpectralData& s, const RealField& p);

/// A + grad p with the exact gradient of a closed-form p; V is returned unchanged.
std::pair<VectorField2D, RealField> gauge_transform(const Domain2D& d, const VectorField2D& A, const RealField& V,
                                                    const ScalarFunction& p);
/// A + grad_h p with the discrete gradient stored in g.
std::pair<VectorField2D, RealField> gauge_transform(const VectorField2D& A, const RealField& V,
                                                    const GaugeFunction& g);

/// Cluster-aware comparison of two boundary spectral data sets over their first K pairs.
struct SpectralComparison {
    int pairs_compared = 0;
    int clusters = 0;
    double max_eigen_gap = 0.0;
    double max_rel_eigen_gap = 0.0;
    /// Sum over clusters of min_Q ||H1 - H2 Q||^2_{L2(Gamma)} (Q unitary): the partial sum of
    /// ||h_{1,k} - h_{2,k}||^2 in the best bases of degenerate eigenspaces.
    double trace_distance_sum = 0.0;
    /// Largest cluster distance divided by the cluster's trace norm.
    double max_rel_trace_distance = 0.0;
    double max_principal_angle = 0.0;
};

/// Clusters are formed from the first data set's eigenvalues (relative tolerance cluster_tol).
/// A cluster that reaches the last computed pair is skipped unless the full spectrum is present.
SpectralComparison compare_spectral_data(const BoundarySpectralData& a, const BoundarySpectralData& b, int K,
                                         double cluster_tol = 1e-6);

struct ObstructionReport {
    SpectralComparison comparison;
    double potential_difference = 0.0;  // max |A - A'| over nodes
    double p_boundary_max = 0.0;
    int eigenpairs = 0;
    std::string to_json() const;
};

/// Compares assemble(A, V) with assemble(A + grad p, V) for a p supported away from the collar.
ObstructionReport obstruction_check(const Domain2D& d, const VectorFn& A, const ScalarFn& V, const ScalarFn& p, int K,
                                    const EigenOptions& eig = {});

}  // namespace magbl
