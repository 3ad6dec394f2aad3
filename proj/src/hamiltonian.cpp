#include "magbl/hamiltonian.hpp"

#include "magbl/dense_eigen.hpp"
#include "magbl/io.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

namespace magbl {

cplx MagneticOperator::link(int from, int to) const {
    const int N1 = domain.N1;
    if (to == from + 1 && domain.col(from) < N1 - 1) return link_x[from];
    if (from == to + 1 && domain.col(to) < N1 - 1) return std::conj(link_x[to]);
    if (to == from + N1) return link_y[from];
    if (from == to + N1) return std::conj(link_y[to]);
    throw InvalidArgument("link requested between non-neighbouring nodes");
}

namespace {

void check_fields(const Domain2D& d, const VectorField2D& A, const RealField& V) {
    require_congruent(d, A.a1.size(), "A (component 1)");
    require_congruent(d, A.a2.size(), "A (component 2)");
    require_congruent(d, V.size(), "V");
    if (!A.a1.allFinite() || !A.a2.allFinite() || !V.allFinite())
        throw InvalidArgument("coefficient fields contain non-finite values");
}

/// Visits the (up to four) neighbours of grid node g with their flux coefficient c = dual/length.
template <class F>
void for_each_link(const Domain2D& d, int g, F&& f) {
    const int i = d.col(g), j = d.row(g);
    const double ext_x = (i == 0 || i == d.N1 - 1) ? 0.5 * d.h1 : d.h1;
    const double ext_y = (j == 0 || j == d.N2 - 1) ? 0.5 * d.h2 : d.h2;
    if (i > 0) f(g - 1, ext_y / d.h1);
    if (i < d.N1 - 1) f(g + 1, ext_y / d.h1);
    if (j > 0) f(g - d.N1, ext_x / d.h2);
    if (j < d.N2 - 1) f(g + d.N1, ext_x / d.h2);
}

double cell_area_of(const Domain2D& d, int g) {
    const int i = d.col(g), j = d.row(g);
    const double ext_x = (i == 0 || i == d.N1 - 1) ? 0.5 * d.h1 : d.h1;
    const double ext_y = (j == 0 || j == d.N2 - 1) ? 0.5 * d.h2 : d.h2;
    return ext_x * ext_y;
}

}  // namespace

MagneticOperator assemble(const Domain2D& d, const VectorField2D& A, const RealField& V) {
    check_fields(d, A, V);
    MagneticOperator op;
    op.domain = d;
    op.A = A;
    op.V = V;
    const int n = d.node_count();
    op.link_x.assign(n, cplx(1.0, 0.0));
    op.link_y.assign(n, cplx(1.0, 0.0));
    for (int g = 0; g < n; ++g) {
        if (d.col(g) < d.N1 - 1) op.link_x[g] = std::polar(1.0, d.h1 * 0.5 * (A.a1[g] + A.a1[g + 1]));
        if (d.row(g) < d.N2 - 1) op.link_y[g] = std::polar(1.0, d.h2 * 0.5 * (A.a2[g] + A.a2[g + d.N1]));
    }

    const int m = d.interior_count();
    std::vector<Eigen::Triplet<cplx>> trip;
    trip.reserve(static_cast<std::size_t>(m) * 5);
    const double ih1 = 1.0 / (d.h1 * d.h1), ih2 = 1.0 / (d.h2 * d.h2);
    double lower = std::numeric_limits<double>::infinity();
    double upper = -std::numeric_limits<double>::infinity();
    for (int p = 0; p < m; ++p) {
        const int g = d.interior_nodes[p];
        const double diag = 2.0 * ih1 + 2.0 * ih2 + V[g];
        trip.emplace_back(p, p, cplx(diag, 0.0));
        double off = 0.0;
        const int nbs[4] = {g - 1, g + 1, g - d.N1, g + d.N1};
        const double w[4] = {ih1, ih1, ih2, ih2};
        for (int k = 0; k < 4; ++k) {
            const int q = d.interior_index[nbs[k]];
            if (q < 0) continue;
            trip.emplace_back(p, q, -op.link(g, nbs[k]) * w[k]);
            off += w[k];
        }
        lower = std::min(lower, diag - off);
        upper = std::max(upper, diag + off);
    }
    op.H.resize(m, m);
    op.H.setFromTriplets(trip.begin(), trip.end());
    op.H.makeCompressed();
    op.spectrum_lower_bound = lower;
    op.spectrum_upper_bound = upper;
    return op;
}

SpMat assemble_expanded(const Domain2D& d, const VectorField2D& A, const RealField& V) {
    check_fields(d, A, V);
    const RealField divA = partial(d, A.a1, 0) + partial(d, A.a2, 1);
    const int m = d.interior_count();
    std::vector<Eigen::Triplet<cplx>> trip;
    const double ih1 = 1.0 / (d.h1 * d.h1), ih2 = 1.0 / (d.h2 * d.h2);
    for (int p = 0; p < m; ++p) {
        const int g = d.interior_nodes[p];
        const double a1 = A.a1[g], a2 = A.a2[g];
        trip.emplace_back(p, p, cplx(2.0 * ih1 + 2.0 * ih2 + a1 * a1 + a2 * a2 + V[g], -divA[g]));
        // -u_xx - 2i a1 u_x with centered differences
        const cplx east = -ih1 - kI * a1 / d.h1, west = -ih1 + kI * a1 / d.h1;
        const cplx north = -ih2 - kI * a2 / d.h2, south = -ih2 + kI * a2 / d.h2;
        const int nbs[4] = {g + 1, g - 1, g + d.N1, g - d.N1};
        const cplx c[4] = {east, west, north, south};
        for (int k = 0; k < 4; ++k) {
            const int q = d.interior_index[nbs[k]];
            if (q >= 0) trip.emplace_back(p, q, c[k]);
        }
    }
    SpMat M(m, m);
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

CVec boundary_lift(const MagneticOperator& op, const CVec& f) {
    const Domain2D& d = op.domain;
    if (f.size() != d.boundary_count()) throw InvalidArgument("boundary datum has wrong length");
    CVec rhs = CVec::Zero(d.interior_count());
    const double ih1 = 1.0 / (d.h1 * d.h1), ih2 = 1.0 / (d.h2 * d.h2);
    for (int p = 0; p < d.interior_count(); ++p) {
        const int g = d.interior_nodes[p];
        const int nbs[4] = {g - 1, g + 1, g - d.N1, g + d.N1};
        const double w[4] = {ih1, ih1, ih2, ih2};
        for (int k = 0; k < 4; ++k) {
            const int b = d.boundary_index[nbs[k]];
            if (b >= 0) rhs[p] += op.link(g, nbs[k]) * w[k] * f[b];
        }
    }
    return rhs;
}

CVec nodal_residual(const MagneticOperator& op, const ComplexField& u, cplx lambda) {
    const Domain2D& d = op.domain;
    require_congruent(d, u.size(), "field");
    CVec r(d.node_count());
    for (int g = 0; g < d.node_count(); ++g) {
        cplx s = cell_area_of(d, g) * (op.V[g] - lambda) * u[g];
        for_each_link(d, g, [&](int y, double c) { s += c * (u[g] - op.link(g, y) * u[y]); });
        r[g] = s;
    }
    return r;
}

BoundaryFunction conormal_flux(const MagneticOperator& op, const ComplexField& u, cplx lambda) {
    const Domain2D& d = op.domain;
    require_congruent(d, u.size(), "field");
    CVec out(d.boundary_count());
    for (int b = 0; b < d.boundary_count(); ++b) {
        const int g = d.boundary_nodes[b];
        cplx s = cell_area_of(d, g) * (op.V[g] - lambda) * u[g];
        for_each_link(d, g, [&](int y, double c) { s += c * (u[g] - op.link(g, y) * u[y]); });
        out[b] = s / d.boundary_weights[b];
    }
    return BoundaryFunction(std::move(out), d.boundary_weights);
}

BoundaryFunction normal_derivative(const Domain2D& d, const ComplexField& phi) {
    require_congruent(d, phi.size(), "field");
    CVec out(d.boundary_count());
    for (int b = 0; b < d.boundary_count(); ++b) {
        const int g = d.boundary_nodes[b];
        const Vec2& nu = d.normals[b];
        const int di = static_cast<int>(std::lround(nu[0])), dj = static_cast<int>(std::lround(nu[1]));
        const int i = d.col(g), j = d.row(g);
        const int i2 = i - 2 * di, j2 = j - 2 * dj;
        if (i2 < 0 || i2 >= d.N1 || j2 < 0 || j2 >= d.N2)
            throw InvalidArgument("normal-derivative stencil leaves the grid");
        const double h = di != 0 ? d.h1 : d.h2;
        const cplx f0 = phi[g], f1 = phi[d.node(i - di, j - dj)], f2 = phi[d.node(i2, j2)];
        out[b] = (3.0 * f0 - 4.0 * f1 + f2) / (2.0 * h);
    }
    return BoundaryFunction(std::move(out), d.boundary_weights);
}

CVec eigen_trace(const MagneticOperator& op, const CVec& interior) {
    const Domain2D& d = op.domain;
    if (interior.size() != d.interior_count()) throw InvalidArgument("eigenvector has wrong length");
    CVec out = CVec::Zero(d.boundary_count());
    for (int b = 0; b < d.boundary_count(); ++b) {
        const int g = d.boundary_nodes[b];
        cplx s = 0.0;
        for_each_link(d, g, [&](int y, double c) {
            const int q = d.interior_index[y];
            if (q >= 0) s -= c * op.link(g, y) * interior[q];
        });
        out[b] = s / d.boundary_weights[b];
    }
    return out;
}

BoundarySpectralData BoundarySpectralData::truncated(int K) const {
    if (K < 0 || K > count()) throw InvalidArgument("truncation beyond available eigenpairs");
    BoundarySpectralData t = *this;
    t.eigenvalues = eigenvalues.head(K);
    t.vectors = vectors.leftCols(K);
    t.traces = traces.leftCols(K);
    t.residuals = residuals.head(K);
    return t;
}

namespace {

/// Multiplies each column by a unit phase so that its largest-magnitude entry is real positive.
/// Ties within a relative 1e-10 go to the lowest index.
void fix_phases(CMat& V) {
    for (Eigen::Index k = 0; k < V.cols(); ++k) {
        double mx = 0.0;
        for (Eigen::Index r = 0; r < V.rows(); ++r) mx = std::max(mx, std::abs(V(r, k)));
        if (mx == 0.0) continue;
        Eigen::Index pick = 0;
        for (Eigen::Index r = 0; r < V.rows(); ++r)
            if (std::abs(V(r, k)) >= mx * (1.0 - 1e-10)) {
                pick = r;
                break;
            }
        const cplx ph = std::conj(V(pick, k)) / std::abs(V(pick, k));
        V.col(k) *= ph;
        V(pick, k) = cplx(std::abs(V(pick, k)), 0.0);
    }
}

void dense_solve(const MagneticOperator& op, int K, RVec& vals, CMat& vecs) {
    const CMat Hd = CMat(op.H);
    hermitian_eigen(Hd, 1, K, vals, vecs);
}

/// Orthonormal random block, deterministic for a given seed.
CMat random_block(Eigen::Index n, Eigen::Index b, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CMat X(n, b);
    for (Eigen::Index c = 0; c < b; ++c)
        for (Eigen::Index r = 0; r < n; ++r) {
            const double re = u(rng);
            const double im = u(rng);
            X(r, c) = cplx(re, im);
        }
    return X;
}

/// Block shift-invert Lanczos with full reorthogonalization; the shift sits below the spectrum.
void krylov_solve(const MagneticOperator& op, int K, const EigenOptions& opt, RVec& vals, CMat& vecs, int& basis_used) {
    const Eigen::Index n = op.H.rows();
    const double sigma = op.spectrum_lower_bound - 1.0;
    SpMat shifted = op.H;
    for (Eigen::Index p = 0; p < n; ++p) shifted.coeffRef(p, p) -= sigma;
    Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> chol(shifted);
    if (chol.info() != Eigen::Success) throw ComputeError("shifted operator factorization failed");

    const Eigen::Index b = std::min<Eigen::Index>(std::max(1, opt.block_size), n);
    std::mt19937_64 rng(opt.seed);
    Eigen::Index cap = std::min<Eigen::Index>(n, std::max<Eigen::Index>(2 * K + 2 * b, K + 8 * b));
    CMat Q(n, cap);
    CMat T = CMat::Zero(cap, cap);
    {
        Eigen::HouseholderQR<CMat> qr(random_block(n, b, rng));
        Q.leftCols(b) = qr.householderQ() * CMat::Identity(n, b);
    }
    Eigen::Index m = b;          // columns of Q filled
    Eigen::Index done = 0;       // columns whose image under the inverse has been processed
    Eigen::Index next_check = std::min<Eigen::Index>(n, std::max<Eigen::Index>(K + 2 * b, (3 * K) / 2 + b));
    const double target = opt.tolerance * std::max(1.0, op.spectrum_upper_bound);

    for (;;) {
        // expand: image of the newest block
        const Eigen::Index start = done, width = m - done;
        if (width > 0) {
            CMat W(n, width);
            for (Eigen::Index c = 0; c < width; ++c) W.col(c) = chol.solve(Q.col(start + c));
            CMat coeff = Q.leftCols(m).adjoint() * W;
            W.noalias() -= Q.leftCols(m) * coeff;
            CMat coeff2 = Q.leftCols(m).adjoint() * W;
            W.noalias() -= Q.leftCols(m) * coeff2;
            coeff += coeff2;
            T.block(0, start, m, width) = coeff;
            done = m;
            const Eigen::Index add = std::min(width, n - m);
            if (add > 0) {
                if (m + add > cap) {
                    const Eigen::Index newcap = std::min<Eigen::Index>(n, std::max(m + add, cap + cap / 2));
                    Q.conservativeResize(n, newcap);
                    CMat T2 = CMat::Zero(newcap, newcap);
                    T2.topLeftCorner(cap, cap) = T;
                    T.swap(T2);
                    cap = newcap;
                }
                Eigen::HouseholderQR<CMat> qr(W);
                CMat Qn = qr.householderQ() * CMat::Identity(n, width);
                CMat R = qr.matrixQR().topRows(width).template triangularView<Eigen::Upper>();
                const double scale = std::max(1e-300, W.cwiseAbs().maxCoeff());
                for (Eigen::Index c = 0; c < width; ++c) {
                    if (std::abs(R(c, c)) < 1e-12 * scale || !std::isfinite(std::abs(R(c, c)))) {
                        // invariant subspace reached along this direction: restart it randomly
                        CMat fresh = random_block(n, 1, rng);
                        for (int pass = 0; pass < 2; ++pass) {
                            fresh -= Q.leftCols(m) * (Q.leftCols(m).adjoint() * fresh);
                            fresh -= Qn.leftCols(c) * (Qn.leftCols(c).adjoint() * fresh);
                        }
                        Qn.col(c) = fresh / fresh.norm();
                        R.row(c).setZero();
                    }
                }
                // one more pass keeps the new block orthogonal to the basis at working precision
                for (int pass = 0; pass < 1; ++pass) {
                    Qn -= Q.leftCols(m) * (Q.leftCols(m).adjoint() * Qn);
                    Eigen::HouseholderQR<CMat> qr2(Qn);
                    Qn = qr2.householderQ() * CMat::Identity(n, width);
                }
                Q.block(0, m, n, add) = Qn.leftCols(add);
                T.block(m, start, add, width) = R.topRows(add);
                m += add;
            }
        }
        if (done < next_check && done < n) continue;

        // Rayleigh-Ritz on the processed part of the basis
        const Eigen::Index k = done;
        CMat Tk = T.topLeftCorner(k, k);
        Tk = 0.5 * (Tk + Tk.adjoint()).eval();
        RVec theta;
        CMat Y;
        hermitian_eigen(Tk, static_cast<int>(k - K + 1), static_cast<int>(k), theta, Y);
        vals.resize(K);
        vecs.resize(n, K);
        for (int c = 0; c < K; ++c) {
            const Eigen::Index src = K - 1 - c;  // largest theta first
            vals[c] = sigma + 1.0 / theta[src];
            vecs.col(c) = Q.leftCols(k) * Y.col(src);
        }
        double worst = 0.0;
        for (int c = 0; c < K; ++c) {
            const CVec r = op.H * vecs.col(c) - vals[c] * vecs.col(c);
            worst = std::max(worst, r.norm());
        }
        if (worst <= target || k >= n) {
            basis_used = static_cast<int>(k);
            if (worst > target && k >= n && worst > 1e3 * target) {
                std::ostringstream os;
                os << "Krylov eigensolver did not converge: worst residual " << worst << " > " << target;
                throw ComputeError(os.str());
            }
            return;
        }
        next_check = std::min<Eigen::Index>(n, std::max<Eigen::Index>(done + b, (done * 13) / 10));
    }
}

}  // namespace

BoundarySpectralData eigensolve(const MagneticOperator& op, int K, const EigenOptions& opt) {
    const int n = op.interior_count();
    if (K < 1 || K > n) throw InvalidArgument("eigensolve needs 1 <= K <= interior node count");
    RVec vals;
    CMat vecs;
    BoundarySpectralData out;
    bool dense = opt.method == EigenOptions::Method::Dense ||
                 (opt.method == EigenOptions::Method::Automatic && n <= opt.dense_limit);
    if (dense) {
        dense_solve(op, K, vals, vecs);
        out.method = "dense";
    } else {
        int used = 0;
        krylov_solve(op, K, opt, vals, vecs, used);
        out.method = "krylov(basis=" + std::to_string(used) + ")";
    }
    // ascending order with stable tie handling
    std::vector<int> order(K);
    for (int k = 0; k < K; ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });
    RVec sv(K);
    CMat svec(vecs.rows(), K);
    for (int k = 0; k < K; ++k) {
        sv[k] = vals[order[k]];
        svec.col(k) = vecs.col(order[k]) / vecs.col(order[k]).norm();
    }
    fix_phases(svec);

    const Domain2D& d = op.domain;
    out.cell_area = d.cell_area();
    out.eigenvalues = sv;
    out.residuals.resize(K);
    for (int k = 0; k < K; ++k) out.residuals[k] = (op.H * svec.col(k) - sv[k] * svec.col(k)).norm();
    out.vectors = svec / std::sqrt(out.cell_area);
    out.traces.resize(d.boundary_count(), K);
    for (int k = 0; k < K; ++k) out.traces.col(k) = eigen_trace(op, out.vectors.col(k));
    out.boundary_weights = d.boundary_weights;
    return out;
}

std::vector<std::vector<int>> eigen_clusters(const RVec& ev, double rel_tol) {
    std::vector<std::vector<int>> out;
    for (int k = 0; k < ev.size(); ++k) {
        if (!out.empty()) {
            const int prev = out.back().back();
            if (std::abs(ev[k] - ev[prev]) <= rel_tol * std::max(std::abs(ev[k]), std::abs(ev[prev]))) {
                out.back().push_back(k);
                continue;
            }
        }
        out.push_back({k});
    }
    return out;
}

void write_spectral_csv(const BoundarySpectralData& data, std::ostream& os) {
    os << "k,lambda";
    for (Eigen::Index b = 0; b < data.traces.rows(); ++b) os << ",h" << b << "_re,h" << b << "_im";
    os << '\n';
    for (int k = 0; k < data.count(); ++k) {
        os << (k + 1) << ',' << format_double(data.eigenvalues[k]);
        for (Eigen::Index b = 0; b < data.traces.rows(); ++b)
            os << ',' << format_double(data.traces(b, k).real()) << ',' << format_double(data.traces(b, k).imag());
        os << '\n';
    }
}

}  // namespace magbl
