#pragma once
/// Non-homogeneous Dirichlet problems, the magnetic Dirichlet-to-Neumann map and the
/// eigen-series functionals built from boundary spectral data.

#include "magbl/convergence_table.hpp"
#include "magbl/hamiltonian.hpp"

#include <Eigen/SparseLU>

#include <memory>
#include <optional>
#include <vector>

namespace magbl {

struct DirichletSolution {
    ComplexField u;        // every node; boundary entries equal f exactly
    CVec interior;         // interior slots
    BoundaryFunction f;
    cplx lambda{0.0, 0.0};
    CVec alpha;            // <f, h_k> when obtained from the series, empty otherwise
    double relative_residual = 0.0;
};

/// Factorization of H - lambda over interior nodes, reusable for many boundary data.
///
/// Refuses lambda within `min_distance` of the discrete spectrum. Non-real lambda
/// with |Im lambda| >= min_distance and real lambda below the Gershgorin bound are
/// accepted directly; other values are checked by estimating the spectral distance.
/// Holds a reference to `op`, which must outlive the solver. Concurrent solves are safe.
class DirichletSolver {
public:
    DirichletSolver(const MagneticOperator& op, cplx lambda, double min_distance = 1e-8);

    const MagneticOperator& op() const { return *op_; }
    cplx lambda() const { return lambda_; }

    /// (H - lambda)^{-1} rhs over interior slots; residual checked against 1e-10 relative.
    CVec solve_interior(const CVec& rhs, double* relative_residual = nullptr) const;
    DirichletSolution solve(const BoundaryFunction& f) const;
    /// Magnetic conormal derivative of the solution with boundary datum f.
    BoundaryFunction dtn(const BoundaryFunction& f) const;

private:
    const MagneticOperator* op_;
    cplx lambda_;
    SpMat shifted_;
    std::shared_ptr<Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>> lu_;
};

/// Distance from lambda to the discrete Dirichlet spectrum, estimated by power iteration
/// on the resolvent (exact for Hermitian H up to the iteration tolerance).
double spectral_distance(const MagneticOperator& op, cplx lambda);

DirichletSolution solve_dirichlet(const MagneticOperator& op, cplx lambda, const BoundaryFunction& f);
BoundaryFunction dtn(const MagneticOperator& op, cplx lambda, const BoundaryFunction& f);

/// u = sum_k alpha_k phi_k / (lambda - lambda_k) with alpha_k = <f, h_k>, first K pairs.
DirichletSolution series_solution(const BoundarySpectralData& spec, const Domain2D& d, cplx lambda,
                                  const BoundaryFunction& f, int K);

/// Parseval form of the L2 norm: sqrt(sum |alpha_k|^2 / |lambda - lambda_k|^2).
double series_norm(const BoundarySpectralData& spec, cplx lambda, const BoundaryFunction& f, int K);

/// L2(Omega) norm of a solution over interior nodes (cell-area weights), matching the
/// eigenvector normalization.
double interior_l2_norm(const Domain2D& d, const ComplexField& u);

/// -(||V||_inf + 6 ||A||_inf^2 + 1).
double default_mu_star(const VectorField2D& A, const RealField& V);
/// Largest lambda admitted by the gradient bound: -||V||_inf - 6 ||A||_inf^2.
double gradient_bound_threshold(const VectorField2D& A, const RealField& V);

/// ||grad u||_{L2(Omega \ collar)} / ||u||_{L2(collar)} for the solution with datum f.
/// Refuses lambda at or above gradient_bound_threshold. Returns 0 when u vanishes.
double gradient_bound_check(const MagneticOperator& op, double lambda, const BoundaryFunction& f);

struct SeriesResult {
    BoundaryFunction value;
    double tail_indicator = 0.0;
};

/// Normal derivative of v = u_lambda - u_mu from the first K spectral pairs:
/// sum (mu - lambda) alpha_k h_k / ((lambda - lambda_k)(mu - lambda_k)).
SeriesResult v_normal_series(const BoundarySpectralData& spec, cplx lambda, cplx mu, const BoundaryFunction& f,
                             int K);

/// The same quantity from two direct solves: conormal flux of u_lambda - u_mu.
BoundaryFunction v_normal_direct(const MagneticOperator& op, cplx lambda, cplx mu, const BoundaryFunction& f);

/// Table of (mu, ||Lambda_1 f - Lambda_2 f||_{L2(Gamma)}) for mu in mu_list, target 0.
/// The difference of the two conormal fluxes is the normal derivative of z_mu = u_1 - u_2
/// since both operators coincide on the collar. Refuses pairs that differ on the collar.
ConvergenceTable z_mu_decay(const MagneticOperator& op1, const MagneticOperator& op2,
                            const std::vector<double>& mu_list, const BoundaryFunction& f);

struct GStarResult {
    cplx value{0.0, 0.0};              // the mu -> -infinity limit, K terms
    std::optional<cplx> finite_mu;     // G(lambda, mu) with the same K terms
    cplx half_value{0.0, 0.0};         // the limit with K/2 terms
    double truncation_indicator = 0.0;
    int K = 0;
};

/// Scale applied to |G(K) - G(K/2)| to form the truncation indicator. Terms decay like
/// k^{-3/2}, so the remainder after K terms is |G(K) - G(K/2)| / (sqrt(2) - 1).
inline constexpr double kTruncationScale = 2.414213562373095;

/// Sum_k <Phi1, h_{1,k}> (h_{1,k}, Phi2) / (lambda - lambda_{1,k}) minus the same with data set 2,
/// where (h, Phi2) = sum_b w_b h_b Phi2_b is the unconjugated pairing.
///
/// Plain partial sums over the first K indices converge erratically: a cut that splits a
/// cluster of nearly equal eigenvalues leaves unmatched terms in the two data sets. With fewer
/// pairs than the full spectrum, the tails of both sums are smoothed on a common cutoff
/// Lambda = min(lambda_{1,K}, lambda_{2,K}): terms with lambda_k <= s = max(Re lambda, lowest eigenvalue)
/// keep weight 1, and beyond s the weight is (1 - x^2)^3 with x = (lambda_k - s) / (Lambda - s).
/// With complete spectra the sums are unweighted and exact.
/// half_value uses the first K/2 pairs with their own cutoff.
GStarResult g_star(const BoundarySpectralData& spec1, const BoundarySpectralData& spec2, cplx lambda,
                   const BoundaryFunction& phi1, const BoundaryFunction& phi2, int K,
                   std::optional<cplx> mu = std::nullopt);

/// sum_k |<Phi1, h_k> / (lambda_k - lambda)|^2 over the first K pairs.
double resolvent_coefficient_sum(const BoundarySpectralData& spec, cplx lambda, const BoundaryFunction& phi, int K);

}  // namespace magbl
