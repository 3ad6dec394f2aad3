#include "magbl/resolvent_dtn.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace magbl {

namespace {

void require_boundary(const Domain2D& d, const BoundaryFunction& f) {
    if (f.size() != d.boundary_count()) throw InvalidArgument("boundary datum has wrong length");
    if (!f.values.allFinite()) throw InvalidArgument("boundary datum contains non-finite values");
}

}  // namespace

DirichletSolver::DirichletSolver(const MagneticOperator& op, cplx lambda, double min_distance)
    : op_(&op), lambda_(lambda) {
    if (!std::isfinite(lambda.real()) || !std::isfinite(lambda.imag()))
        throw InvalidArgument("spectral parameter must be finite");
    shifted_ = op.H;
    for (Eigen::Index p = 0; p < shifted_.rows(); ++p) shifted_.coeffRef(p, p) -= lambda;
    shifted_.makeCompressed();
    lu_ = std::make_shared<Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>>();
    lu_->compute(shifted_);
    if (lu_->info() != Eigen::Success) {
        std::ostringstream os;
        os << "lambda = " << lambda << " is on the discrete spectrum (factorization is singular)";
        throw ComputeError(os.str());
    }
    const bool off_axis = std::abs(lambda.imag()) >= min_distance;
    const bool below = lambda.real() < op.spectrum_lower_bound - min_distance;
    if (!off_axis && !below) {
        const double dist = spectral_distance(op, lambda);
        if (dist < min_distance) {
            std::ostringstream os;
            os << "lambda = " << lambda << " lies within " << dist << " of a discrete eigenvalue (minimum "
               << min_distance << ")";
            throw InvalidArgument(os.str());
        }
    }
}

CVec DirichletSolver::solve_interior(const CVec& rhs, double* relative_residual) const {
    if (rhs.size() != shifted_.rows()) throw InvalidArgument("right-hand side has wrong length");
    CVec x = lu_->solve(rhs);
    const double bn = rhs.norm();
    double rel = 0.0;
    if (bn > 0.0) {
        CVec r = rhs - shifted_ * x;
        rel = r.norm() / bn;
        // one step of iterative refinement if the direct solve is loose
        if (rel > 1e-12) {
            x += lu_->solve(r);
            r = rhs - shifted_ * x;
            rel = r.norm() / bn;
        }
    }
    if (!(rel < 1e-10)) {
        std::ostringstream os;
        os << "linear solve residual " << rel << " exceeds 1e-10 relative";
        throw ComputeError(os.str());
    }
    if (relative_residual) *relative_residual = rel;
    return x;
}

DirichletSolution DirichletSolver::solve(const BoundaryFunction& f) const {
    const Domain2D& d = op_->domain;
    require_boundary(d, f);
    DirichletSolution s;
    s.f = f;
    s.lambda = lambda_;
    s.interior = solve_interior(boundary_lift(*op_, f.values), &s.relative_residual);
    s.u = assemble_nodal(d, s.interior, f.values);
    return s;
}

BoundaryFunction DirichletSolver::dtn(const BoundaryFunction& f) const {
    const DirichletSolution s = solve(f);
    return conormal_flux(*op_, s.u, lambda_);
}

double spectral_distance(const MagneticOperator& op, cplx lambda) {
    SpMat shifted = op.H;
    for (Eigen::Index p = 0; p < shifted.rows(); ++p) shifted.coeffRef(p, p) -= lambda;
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu(shifted);
    if (lu.info() != Eigen::Success) return 0.0;
    CVec x = CVec::Ones(shifted.rows());
    for (Eigen::Index p = 0; p < x.size(); ++p) x[p] += 0.01 * std::cos(0.7 * p);
    x /= x.norm();
    double growth = 0.0;
    for (int it = 0; it < 200; ++it) {
        CVec y = lu.solve(x);
        const double g = y.norm();
        if (!std::isfinite(g)) return 0.0;
        x = y / g;
        if (it > 5 && std::abs(g - growth) <= 1e-10 * g) {
            growth = g;
            break;
        }
        growth = g;
    }
    return growth > 0.0 ? 1.0 / growth : std::numeric_limits<double>::infinity();
}

DirichletSolution solve_dirichlet(const MagneticOperator& op, cplx lambda, const BoundaryFunction& f) {
    return DirichletSolver(op, lambda).solve(f);
}

BoundaryFunction dtn(const MagneticOperator& op, cplx lambda, const BoundaryFunction& f) {
    return DirichletSolver(op, lambda).dtn(f);
}

namespace {

void require_pairs(const BoundarySpectralData& spec, int K) {
    if (K < 0 || K > spec.count()) throw InvalidArgument("requested more eigenpairs than available");
}

CVec alpha_coefficients(const BoundarySpectralData& spec, const BoundaryFunction& f, int K) {
    if (f.size() != spec.traces.rows()) throw InvalidArgument("boundary datum has wrong length");
    CVec a(K);
    for (int k = 0; k < K; ++k) {
        cplx s = 0.0;
        for (Eigen::Index b = 0; b < f.size(); ++b) s += f.weights[b] * f.values[b] * std::conj(spec.traces(b, k));
        a[k] = s;
    }
    return a;
}

}  // namespace

DirichletSolution series_solution(const BoundarySpectralData& spec, const Domain2D& d, cplx lambda,
                                  const BoundaryFunction& f, int K) {
    require_pairs(spec, K);
    require_boundary(d, f);
    DirichletSolution s;
    s.f = f;
    s.lambda = lambda;
    s.alpha = alpha_coefficients(spec, f, K);
    s.interior = CVec::Zero(d.interior_count());
    for (int k = 0; k < K; ++k) s.interior += (s.alpha[k] / (lambda - spec.eigenvalues[k])) * spec.vectors.col(k);
    s.u = assemble_nodal(d, s.interior, f.values);
    return s;
}

double series_norm(const BoundarySpectralData& spec, cplx lambda, const BoundaryFunction& f, int K) {
    require_pairs(spec, K);
    const CVec a = alpha_coefficients(spec, f, K);
    double s = 0.0;
    for (int k = 0; k < K; ++k) s += std::norm(a[k] / (lambda - spec.eigenvalues[k]));
    return std::sqrt(s);
}

double interior_l2_norm(const Domain2D& d, const ComplexField& u) {
    require_congruent(d, u.size(), "field");
    double s = 0.0;
    for (int g : d.interior_nodes) s += std::norm(u[g]);
    return std::sqrt(s * d.cell_area());
}

double gradient_bound_threshold(const VectorField2D& A, const RealField& V) {
    double amax = 0.0;
    for (Eigen::Index g = 0; g < A.size(); ++g) amax = std::max(amax, std::hypot(A.a1[g], A.a2[g]));
    const double vmax = V.size() ? V.cwiseAbs().maxCoeff() : 0.0;
    return -vmax - 6.0 * amax * amax;
}

double default_mu_star(const VectorField2D& A, const RealField& V) { return gradient_bound_threshold(A, V) - 1.0; }

double gradient_bound_check(const MagneticOperator& op, double lambda, const BoundaryFunction& f) {
    const double thr = gradient_bound_threshold(op.A, op.V);
    if (!(lambda < thr)) {
        std::ostringstream os;
        os << "gradient bound needs lambda < " << thr << ", got " << lambda;
        throw InvalidArgument(os.str());
    }
    const Domain2D& d = op.domain;
    const DirichletSolution s = solve_dirichlet(op, lambda, f);
    const ComplexField ux = partial(d, s.u, 0), uy = partial(d, s.u, 1);
    const RVec w = d.node_area_weights();
    double grad2 = 0.0, collar2 = 0.0;
    for (int g = 0; g < d.node_count(); ++g) {
        if (d.collar_mask[g]) collar2 += w[g] * std::norm(s.u[g]);
        else grad2 += w[g] * (std::norm(ux[g]) + std::norm(uy[g]));
    }
    if (collar2 == 0.0) return 0.0;
    return std::sqrt(grad2 / collar2);
}

SeriesResult v_normal_series(const BoundarySpectralData& spec, cplx lambda, cplx mu, const BoundaryFunction& f,
                             int K) {
    require_pairs(spec, K);
    const CVec a = alpha_coefficients(spec, f, K);
    SeriesResult r;
    CVec v = CVec::Zero(spec.traces.rows());
    for (int k = 0; k < K; ++k) {
        const cplx c = (mu - lambda) * a[k] / ((lambda - spec.eigenvalues[k]) * (mu - spec.eigenvalues[k]));
        v += c * spec.traces.col(k);
    }
    r.value = BoundaryFunction(std::move(v), spec.boundary_weights);
    if (K > 0) {
        const int k = K - 1;
        const double hn = boundary_l2_norm(spec.trace(k));
        r.tail_indicator = std::abs(mu - lambda) * std::abs(a[k]) * hn /
                           (std::abs(lambda - spec.eigenvalues[k]) * std::abs(mu - spec.eigenvalues[k]));
    }
    return r;
}

BoundaryFunction v_normal_direct(const MagneticOperator& op, cplx lambda, cplx mu, const BoundaryFunction& f) {
    const DirichletSolution a = solve_dirichlet(op, lambda, f);
    const DirichletSolution b = solve_dirichlet(op, mu, f);
    // v vanishes on the boundary, so its flux does not depend on the spectral parameter
    return conormal_flux(op, a.u - b.u, lambda);
}

ConvergenceTable z_mu_decay(const MagneticOperator& op1, const MagneticOperator& op2,
                            const std::vector<double>& mu_list, const BoundaryFunction& f) {
    const CollarReport rep = check_collar(op1.A, op2.A, op1.domain);
    if (!rep.pass) {
        std::ostringstream os;
        os << "magnetic potentials differ on the collar (max difference " << rep.max_difference << ")";
        throw InvalidArgument(os.str());
    }
    std::vector<BoundaryFunction> diffs(mu_list.size());
    parallel_for(mu_list.size(), [&](std::size_t i) {
        const BoundaryFunction a = dtn(op1, mu_list[i], f);
        const BoundaryFunction b = dtn(op2, mu_list[i], f);
        diffs[i] = BoundaryFunction(a.values - b.values, a.weights);
    });
    ConvergenceTable t;
    t.parameter_name = "mu";
    for (std::size_t i = 0; i < mu_list.size(); ++i) t.add(mu_list[i], boundary_l2_norm(diffs[i]), 0.0);
    return t;
}

namespace {

// Weight 1 up to `start`, then the Riesz rolloff (1 - x^2)^3 on [start, cutoff]; 1 when cutoff is infinite.
// Terms near the resonance Re(lambda) are never damped; only the tail is smoothed.
double riesz_weight(double lambda_k, double start, double cutoff) {
    if (!std::isfinite(cutoff)) return 1.0;
    if (lambda_k > cutoff) return 0.0;
    if (start >= cutoff || lambda_k <= start) return 1.0;
    const double x = (lambda_k - start) / (cutoff - start);
    const double v = 1.0 - x * x;
    return v * v * v;
}

cplx g_partial(const BoundarySpectralData& spec, cplx lambda, const BoundaryFunction& phi1,
               const BoundaryFunction& phi2, int K, const cplx* mu, double start, double cutoff) {
    cplx s = 0.0;
    for (int k = 0; k < K; ++k) {
        const double wk = riesz_weight(spec.eigenvalues[k], start, cutoff);
        if (wk == 0.0) continue;
        cplx a = 0.0, b = 0.0;
        for (Eigen::Index q = 0; q < phi1.size(); ++q) {
            const double w = spec.boundary_weights[q];
            a += w * phi1.values[q] * std::conj(spec.traces(q, k));
            b += w * spec.traces(q, k) * phi2.values[q];
        }
        cplx term = wk * a * b / (lambda - spec.eigenvalues[k]);
        if (mu) term *= (*mu - lambda) / (*mu - spec.eigenvalues[k]);
        s += term;
    }
    return s;
}

// Cutoff shared by both data sets: the smaller K-th eigenvalue, or none when both spectra are complete.
double common_cutoff(const BoundarySpectralData& a, const BoundarySpectralData& b, int K) {
    if (K == a.vectors.rows() && K == b.vectors.rows()) return INFINITY;
    return std::min(a.eigenvalues[K - 1], b.eigenvalues[K - 1]);
}

}  // namespace

GStarResult g_star(const BoundarySpectralData& spec1, const BoundarySpectralData& spec2, cplx lambda,
                   const BoundaryFunction& phi1, const BoundaryFunction& phi2, int K, std::optional<cplx> mu) {
    require_pairs(spec1, K);
    require_pairs(spec2, K);
    if (K < 2) throw InvalidArgument("g_star needs at least two eigenpairs");
    if (phi1.size() != spec1.traces.rows() || phi2.size() != spec1.traces.rows() ||
        spec1.traces.rows() != spec2.traces.rows())
        throw InvalidArgument("boundary data sizes do not match");
    const double start = std::max({lambda.real(), spec1.eigenvalues[0], spec2.eigenvalues[0]});
    const auto diff = [&](int n, const cplx* m) {
        const double cut = common_cutoff(spec1, spec2, n);
        return g_partial(spec1, lambda, phi1, phi2, n, m, start, cut) -
               g_partial(spec2, lambda, phi1, phi2, n, m, start, cut);
    };
    GStarResult r;
    r.K = K;
    r.value = diff(K, nullptr);
    r.half_value = diff(K / 2, nullptr);
    r.truncation_indicator = kTruncationScale * std::abs(r.value - r.half_value);
    if (mu) {
        const cplx m = *mu;
        r.finite_mu = diff(K, &m);
    }
    return r;
}

double resolvent_coefficient_sum(const BoundarySpectralData& spec, cplx lambda, const BoundaryFunction& phi, int K) {
    require_pairs(spec, K);
    const CVec a = alpha_coefficients(spec, phi, K);
    double s = 0.0;
    for (int k = 0; k < K; ++k) s += std::norm(a[k] / (spec.eigenvalues[k] - lambda));
    return s;
}

}  // namespace magbl
