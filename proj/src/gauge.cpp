#include "magbl/gauge.hpp"

#include "magbl/presets.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <json.hpp>

#include <cmath>
#include <sstream>

namespace magbl {

namespace {

// 4-point Gauss-Legendre rule on [-1, 1]
constexpr double kGLx[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
constexpr double kGLw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};

double radial_integral(const VectorFunction& A, const Vec2& c, const Vec2& x, int panels) {
    const Vec2 r = x - c;
    double s = 0.0;
    const double hp = 1.0 / panels;
    for (int k = 0; k < panels; ++k) {
        const double mid = (k + 0.5) * hp;
        for (int q = 0; q < 4; ++q) {
            const double t = mid + 0.5 * hp * kGLx[q];
            s += 0.5 * hp * kGLw[q] * r.dot(A.value(c + t * r));
        }
    }
    return s;
}

}  // namespace

GaugeFunction gauge_function(const Domain2D& d, const VectorFn& A_diff, const GaugeOptions& opt) {
    if (!A_diff) throw InvalidArgument("gauge function needs a field");
    if (opt.panels < 1) throw InvalidArgument("gauge quadrature needs at least one panel");
    GaugeFunction g;
    const VectorField2D A = sample_vector(d, *A_diff);
    const RealField c = curl(d, A);
    double dmax = 0.0;
    for (const RealField* comp : {&A.a1, &A.a2})
        for (int axis = 0; axis < 2; ++axis) {
            const RealField pd = partial(d, *comp, axis);
            if (pd.size()) dmax = std::max(dmax, pd.cwiseAbs().maxCoeff());
        }
    const double cmax = c.size() ? c.cwiseAbs().maxCoeff() : 0.0;
    g.curl_ratio = dmax > 0.0 ? cmax / dmax : 0.0;
    if (g.curl_ratio > opt.curl_tolerance) {
        std::ostringstream os;
        os << "field is not closed: curl ratio " << g.curl_ratio << " exceeds " << opt.curl_tolerance;
        throw InvalidArgument(os.str());
    }
    const Vec2 center(d.x0 + 0.5 * d.L1, d.y0 + 0.5 * d.L2);
    const Vec2 ref(d.x0, d.y0);
    const double p_ref = radial_integral(*A_diff, center, ref, opt.panels);
    g.p = RealField(d.node_count());
    const Box hull = A_diff->support();
    const bool bounded = !hull.empty && hull.bounded();
    parallel_for(static_cast<std::size_t>(d.node_count()), [&](std::size_t q) {
        const int k = static_cast<int>(q);
        const Vec2 x = d.point(k);
        // a closed form vanishing outside a box is exact there, so p is pinned to 0
        if (bounded && !hull.contains(x)) {
            g.p[k] = 0.0;
            return;
        }
        g.p[k] = radial_integral(*A_diff, center, x, opt.panels) - p_ref;
    });
    g.gradient.a1 = partial(d, g.p, 0);
    g.gradient.a2 = partial(d, g.p, 1);
    double cert = 0.0;
    for (int k = 0; k < d.node_count(); ++k)
        cert = std::max(cert, std::hypot(g.gradient.a1[k] - A.a1[k], g.gradient.a2[k] - A.a2[k]));
    g.certificate = cert;
    g.boundary_trace = boundary_trace(d, g.p.cast<cplx>());
    return g;
}

BoundarySpectralData gauge_conjugate(const Domain2D& d, const BoundarySpectralData& s, const RealField& p) {
    require_congruent(d, p.size(), "gauge function");
    if (s.vectors.rows() != d.interior_count() || s.traces.rows() != d.boundary_count())
        throw InvalidArgument("spectral data do not live on this domain");
    BoundarySpectralData out = s;
    for (int q = 0; q < d.interior_count(); ++q) out.vectors.row(q) *= std::polar(1.0, p[d.interior_nodes[q]]);
    for (int b = 0; b < d.boundary_count(); ++b) out.traces.row(b) *= std::polar(1.0, p[d.boundary_nodes[b]]);
    return out;
}

double gradient_truncation(const Domain2D& d, const ScalarFunction& p) {
    const RealField s = sample_scalar(d, p);
    const RealField g1 = partial(d, s, 0), g2 = partial(d, s, 1);
    double e = 0.0;
    for (int k = 0; k < d.node_count(); ++k) {
        const Vec2 g = p.gradient(d.point(k));
        e = std::max(e, std::hypot(g1[k] - g[0], g2[k] - g[1]));
    }
    return e;
}

std::pair<VectorField2D, RealField> gauge_transform(const Domain2D& d, const VectorField2D& A, const RealField& V,
                                                    const ScalarFunction& p) {
    require_congruent(d, A.size(), "A");
    VectorField2D out = A;
    for (int g = 0; g < d.node_count(); ++g) {
        const Vec2 gp = p.gradient(d.point(g));
        out.a1[g] += gp[0];
        out.a2[g] += gp[1];
    }
    return {out, V};
}

std::pair<VectorField2D, RealField> gauge_transform(const VectorField2D& A, const RealField& V,
                                                    const GaugeFunction& g) {
    if (A.size() != g.gradient.size()) throw InvalidArgument("gauge function does not match the field");
    VectorField2D out;
    out.a1 = A.a1 + g.gradient.a1;
    out.a2 = A.a2 + g.gradient.a2;
    return {out, V};
}

SpectralComparison compare_spectral_data(const BoundarySpectralData& a, const BoundarySpectralData& b, int K,
                                         double cluster_tol) {
    const int avail = std::min(a.count(), b.count());
    if (K < 1 || K > avail) throw InvalidArgument("comparison needs 1 <= K <= available pairs");
    if (a.traces.rows() != b.traces.rows()) throw InvalidArgument("spectral data live on different boundaries");
    const bool full = a.count() == a.vectors.rows() && b.count() == b.vectors.rows();
    const auto clusters = eigen_clusters(a.eigenvalues.head(avail), cluster_tol);
    const RVec sw = a.boundary_weights.cwiseSqrt();

    SpectralComparison r;
    for (const auto& cl : clusters) {
        if (cl.front() >= K) break;
        if (!full && cl.back() == avail - 1) continue;  // possibly truncated cluster
        const int m = static_cast<int>(cl.size());
        CMat Ha(a.traces.rows(), m), Hb(b.traces.rows(), m);
        for (int c = 0; c < m; ++c) {
            const int k = cl[c];
            Ha.col(c) = sw.asDiagonal() * a.traces.col(k);
            Hb.col(c) = sw.asDiagonal() * b.traces.col(k);
            const double gap = std::abs(a.eigenvalues[k] - b.eigenvalues[k]);
            r.max_eigen_gap = std::max(r.max_eigen_gap, gap);
            r.max_rel_eigen_gap = std::max(r.max_rel_eigen_gap, gap / std::max(std::abs(a.eigenvalues[k]), 1e-300));
        }
        // best unitary alignment; the residual is formed directly to avoid cancellation
        Eigen::JacobiSVD<CMat> svd(Hb.adjoint() * Ha, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const CMat Q = svd.matrixU() * svd.matrixV().adjoint();
        const double na = Ha.squaredNorm(), nb = Hb.squaredNorm();
        const double d2 = (Ha - Hb * Q).squaredNorm();
        r.trace_distance_sum += d2;
        if (na > 0.0) r.max_rel_trace_distance = std::max(r.max_rel_trace_distance, std::sqrt(d2 / na));
        if (na > 0.0 && nb > 0.0) {
            Eigen::HouseholderQR<CMat> qa(Ha), qb(Hb);
            const CMat Qa = qa.householderQ() * CMat::Identity(Ha.rows(), m);
            const CMat Qb = qb.householderQ() * CMat::Identity(Hb.rows(), m);
            Eigen::JacobiSVD<CMat> s2(Qa.adjoint() * Qb);
            const double smin = std::min(1.0, s2.singularValues().minCoeff());
            r.max_principal_angle = std::max(r.max_principal_angle, std::acos(smin));
        }
        r.pairs_compared += m;
        ++r.clusters;
    }
    return r;
}

std::string ObstructionReport::to_json() const {
    nlohmann::ordered_json j;
    j["eigenpairs"] = eigenpairs;
    j["pairs_compared"] = comparison.pairs_compared;
    j["clusters"] = comparison.clusters;
    j["max_eigen_gap"] = comparison.max_eigen_gap;
    j["max_rel_eigen_gap"] = comparison.max_rel_eigen_gap;
    j["trace_distance_sum"] = comparison.trace_distance_sum;
    j["max_rel_trace_distance"] = comparison.max_rel_trace_distance;
    j["max_principal_angle"] = comparison.max_principal_angle;
    j["potential_difference"] = potential_difference;
    j["p_boundary_max"] = p_boundary_max;
    return j.dump(2) + "\n";
}

ObstructionReport obstruction_check(const Domain2D& d, const VectorFn& A, const ScalarFn& V, const ScalarFn& p, int K,
                                    const EigenOptions& eig) {
    if (!A || !V || !p) throw InvalidArgument("obstruction check needs A, V and p");
    const Box supp = p->support();
    if (!supp.empty && !support_avoids_collar(d, supp))
        throw InvalidArgument("gauge function must be supported away from the collar");
    ObstructionReport r;
    for (int b = 0; b < d.boundary_count(); ++b)
        r.p_boundary_max = std::max(r.p_boundary_max, std::abs(p->value(d.point(d.boundary_nodes[b]))));
    if (r.p_boundary_max != 0.0) throw InvalidArgument("gauge function must vanish on the boundary");

    const VectorField2D a = sample_vector(d, *A);
    const RealField v = sample_scalar(d, *V);
    const auto [a2, v2] = gauge_transform(d, a, v, *p);
    for (int g = 0; g < d.node_count(); ++g)
        r.potential_difference = std::max(r.potential_difference, std::hypot(a2.a1[g] - a.a1[g], a2.a2[g] - a.a2[g]));

    const MagneticOperator op1 = assemble(d, a, v);
    const MagneticOperator op2 = assemble(d, a2, v2);
    const int n = op1.interior_count();
    const int Kx = std::min(n, K + 8);
    const BoundarySpectralData s1 = eigensolve(op1, Kx, eig);
    const BoundarySpectralData s2 = eigensolve(op2, Kx, eig);
    r.eigenpairs = K;
    r.comparison = compare_spectral_data(s1, s2, std::min(K, Kx));
    return r;
}

}  // namespace magbl
