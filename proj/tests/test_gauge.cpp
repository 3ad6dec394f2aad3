#include "magbl/gauge.hpp"
#include "magbl/presets.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include <cmath>

using namespace magbl;

namespace {

ScalarFn ref_bump() { return bump_scalar(0.3, {0.0, 0.05}, 0.25); }
VectorFn ref_potential() { return vortex_bump(0.5, {0.05, -0.03}, 0.25); }

// max |grad_h p - grad p| for the exact p: what a perfect quadrature would certify
double stencil_truncation(const Domain2D& d, const ScalarFn& p) {
    RealField s(d.node_count());
    for (int k = 0; k < d.node_count(); ++k) s[k] = p->value(d.point(k));
    const RealField g1 = partial(d, s, 0), g2 = partial(d, s, 1);
    double e = 0.0;
    for (int k = 0; k < d.node_count(); ++k) {
        const Vec2 g = p->gradient(d.point(k));
        e = std::max(e, std::hypot(g1[k] - g[0], g2[k] - g[1]));
    }
    return e;
}

}  // namespace

TEST(GaugeFunction, ZeroFieldGivesZero) {
    const Domain2D d = build_domain(1, 1, 33, 33, 0.15);
    const GaugeFunction g = gauge_function(d, zero_vector());
    EXPECT_EQ(g.p.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(g.certificate, 0.0);
}

TEST(GaugeFunction, RecoversKnownBump) {
    const Domain2D d = build_domain(1, 1, 65, 65, 0.15);
    const ScalarFn p = ref_bump();
    const GaugeFunction g = gauge_function(d, gradient_field(p));
    double e = 0.0;
    for (int k = 0; k < d.node_count(); ++k) e = std::max(e, std::abs(g.p[k] - p->value(d.point(k))));
    EXPECT_LT(e, 1e-4);
    EXPECT_NEAR(g.certificate, stencil_truncation(d, p), 1e-4);
    EXPECT_EQ(g.boundary_trace.cwiseAbs().maxCoeff(), 0.0);
}

TEST(GaugeFunction, CertificateSecondOrder) {
    std::vector<double> c;
    for (int N : {65, 129}) c.push_back(gauge_function(build_domain(1, 1, N, N, 0.15), gradient_field(ref_bump())).certificate);
    EXPECT_GT(c[0] / c[1], 3.5);
    EXPECT_LT(c[0] / c[1], 4.5);
}

TEST(GaugeFunction, RoundTripCertificate) {
    const Domain2D d = build_domain(1, 1, 65, 65, 0.15);
    const ScalarFn p = bump_scalar(0.2, {-0.05, 0.0}, 0.3, 6.0);
    const GaugeFunction g = gauge_function(d, gradient_field(p));
    EXPECT_NEAR(g.certificate, stencil_truncation(d, p), 1e-4);
    // up to a constant
    const double shift = g.p[d.node(32, 32)] - p->value(d.point(32, 32));
    for (int k = 0; k < d.node_count(); k += 7) EXPECT_NEAR(g.p[k] - shift, p->value(d.point(k)), 1e-4);
}

TEST(GaugeFunction, RefusesFieldWithCurl) {
    const Domain2D d = build_domain(1, 1, 33, 33, 0.15);
    EXPECT_THROW(gauge_function(d, ref_potential()), InvalidArgument);
}

TEST(GaugeTransform, ZeroFunctionIsIdentity) {
    const Domain2D d = build_domain(1, 1, 33, 33, 0.15);
    const VectorField2D A = sample_vector(d, *ref_potential());
    const RealField V = RealField::Constant(d.node_count(), 2.0);
    const auto [A2, V2] = gauge_transform(d, A, V, *zero_scalar());
    EXPECT_EQ(A2.a1, A.a1);
    EXPECT_EQ(A2.a2, A.a2);
    EXPECT_EQ(V2, V);
}

TEST(GaugeTransform, InverseTransformRestores) {
    const Domain2D d = build_domain(1, 1, 33, 33, 0.15);
    const VectorField2D A = sample_vector(d, *ref_potential());
    const RealField V = RealField::Zero(d.node_count());
    const ScalarFn p = ref_bump();
    const auto [A2, V2] = gauge_transform(d, A, V, *p);
    const auto [A3, V3] = gauge_transform(d, A2, V2, *combine(-1.0, p, 0.0, zero_scalar()));
    EXPECT_LT((A3.a1 - A.a1).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((A3.a2 - A.a2).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(GaugeTransform, CurlPreservedToSecondOrder) {
    std::vector<double> e;
    for (int N : {65, 129}) {
        const Domain2D d = build_domain(1, 1, N, N, 0.15);
        const VectorField2D A = sample_vector(d, *ref_potential());
        const auto [A2, V2] = gauge_transform(d, A, RealField::Zero(d.node_count()), *ref_bump());
        e.push_back((curl(d, A2) - curl(d, A)).cwiseAbs().maxCoeff());
    }
    EXPECT_GT(e[0] / e[1], 3.5);
}

TEST(GaugeTransform, DiscreteGradientVersion) {
    const Domain2D d = build_domain(1, 1, 33, 33, 0.15);
    const GaugeFunction g = gauge_function(d, gradient_field(ref_bump()));
    const VectorField2D A = sample_vector(d, *ref_potential());
    const auto [A2, V2] = gauge_transform(A, RealField::Zero(d.node_count()), g);
    EXPECT_EQ(A2.a1, A.a1 + g.gradient.a1);
    // the discrete gradient of p is discretely curl free
    EXPECT_LT((curl(d, A2) - curl(d, A)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_THROW(gauge_transform(VectorField2D(4), RealField::Zero(4), g), InvalidArgument);
}

TEST(Comparison, IdenticalDataAgreeExactly) {
    const Domain2D d = build_domain(1, 1, 12, 12, 0.15);
    const MagneticOperator op = assemble(d, sample_vector(d, *ref_potential()), RealField::Zero(d.node_count()));
    const BoundarySpectralData s = eigensolve(op, 20);
    const SpectralComparison c = compare_spectral_data(s, s, 12);
    EXPECT_EQ(c.max_eigen_gap, 0.0);
    EXPECT_LT(c.trace_distance_sum, 1e-24);
    EXPECT_EQ(c.pairs_compared > 0, true);
}

TEST(Comparison, BasisRotationInsideClusterIsInvisible) {
    // the free square has double eigenvalues; rotate each pair's basis
    const Domain2D d = build_domain(1, 1, 14, 14, 0.15);
    const MagneticOperator op = assemble(d, VectorField2D(d.node_count()), RealField::Zero(d.node_count()));
    const BoundarySpectralData s = eigensolve(op, d.interior_count());
    BoundarySpectralData r = s;
    int rotated = 0;
    for (const auto& cl : eigen_clusters(s.eigenvalues))
        if (cl.size() == 2) {
            const cplx c(std::cos(0.7), 0.0), sn(std::sin(0.7) * std::cos(0.3), std::sin(0.7) * std::sin(0.3));
            r.traces.col(cl[0]) = c * s.traces.col(cl[0]) + sn * s.traces.col(cl[1]);
            r.traces.col(cl[1]) = -std::conj(sn) * s.traces.col(cl[0]) + c * s.traces.col(cl[1]);
            ++rotated;
        }
    ASSERT_GT(rotated, 3);
    const SpectralComparison c = compare_spectral_data(s, r, d.interior_count());
    double scale = 0.0;
    for (int k = 0; k < s.count(); ++k) scale += s.traces.col(k).squaredNorm();
    EXPECT_LT(c.trace_distance_sum, 1e-20 * scale);
    EXPECT_LT(c.max_principal_angle, 1e-6);
    EXPECT_GT(c.clusters, 0);
}

TEST(Obstruction, ZeroGaugeAgreesExactly) {
    const Domain2D d = build_domain(1, 1, 17, 17, 0.15);
    const ObstructionReport r = obstruction_check(d, ref_potential(), zero_scalar(), zero_scalar(), 10);
    EXPECT_EQ(r.comparison.max_eigen_gap, 0.0);
    EXPECT_EQ(r.potential_difference, 0.0);
    EXPECT_TRUE(nlohmann::json::parse(r.to_json()).is_object());
}

TEST(Obstruction, GapsFallAtSecondOrder) {
    std::vector<double> gaps, dist;
    for (int N : {65, 129}) {
        const ObstructionReport r =
            obstruction_check(build_domain(1, 1, N, N, 0.15), ref_potential(), zero_scalar(), ref_bump(), 10);
        EXPECT_GT(r.potential_difference, 0.1);
        gaps.push_back(r.comparison.max_rel_eigen_gap);
        dist.push_back(r.comparison.max_rel_trace_distance);
    }
    EXPECT_LT(gaps[0], 1e-3);
    EXPECT_GT(gaps[0] / gaps[1], 3.0);
    EXPECT_GT(dist[0] / dist[1], 3.0);
}

TEST(Obstruction, RefusesGaugeReachingCollar) {
    const Domain2D d = build_domain(1, 1, 17, 17, 0.15);
    EXPECT_THROW(obstruction_check(d, zero_vector(), zero_scalar(), bump_scalar(1.0, {0, 0}, 0.45), 5),
                 InvalidArgument);
    EXPECT_THROW(obstruction_check(d, zero_vector(), zero_scalar(), constant_scalar(1.0), 5), InvalidArgument);
}

TEST(GaugeConjugate, ZeroFunctionIsIdentity) {
    const Domain2D d = build_domain(1, 1, 17, 17, 0.15);
    const MagneticOperator op = assemble(d, sample_vector(d, *ref_potential()), RealField::Zero(d.node_count()));
    const BoundarySpectralData s = eigensolve(op, 6);
    const BoundarySpectralData c = gauge_conjugate(d, s, RealField::Zero(d.node_count()));
    EXPECT_EQ(c.vectors, s.vectors);
    EXPECT_EQ(c.traces, s.traces);
}

TEST(GaugeConjugate, EigenvectorsOfTheConjugatedMatrix) {
    const Domain2D d = build_domain(1, 1, 17, 17, 0.15);
    const MagneticOperator op = assemble(d, sample_vector(d, *ref_potential()), RealField::Zero(d.node_count()));
    const BoundarySpectralData s = eigensolve(op, 6);
    const RealField p = sample_scalar(d, *ref_bump());
    const BoundarySpectralData c = gauge_conjugate(d, s, p);
    CVec ph(d.interior_count());
    for (int q = 0; q < d.interior_count(); ++q) ph[q] = std::polar(1.0, p[d.interior_nodes[q]]);
    // (D H D*) v' = lambda v' with D = diag(e^{ip})
    for (int k = 0; k < 6; ++k) {
        const CVec v = c.vectors.col(k);
        const CVec Hv = ph.asDiagonal() * (op.H * (ph.conjugate().asDiagonal() * v));
        EXPECT_LT((Hv - s.eigenvalues[k] * v).norm() / v.norm(), 1e-8);
    }
    // p vanishes on the boundary, so the traces are unchanged
    EXPECT_EQ(c.traces, s.traces);
    EXPECT_EQ(c.eigenvalues, s.eigenvalues);
    EXPECT_THROW(gauge_conjugate(build_domain(1, 1, 9, 9, 0.15), s, p), InvalidArgument);
}
