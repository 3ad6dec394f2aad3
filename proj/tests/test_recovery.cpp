#include "magbl/recovery.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include <cmath>

using namespace magbl;

namespace {

VectorFn bump_potential() { return vortex_bump(0.5, {0.05, -0.03}, 0.25); }
ScalarFn gauge_bump() { return bump_scalar(0.3, {0.0, 0.05}, 0.25); }

RecoverySource oracle_source(const Domain2D& d, VectorFn A1, VectorFn A2, ScalarFn V1, ScalarFn V2) {
    RecoverySource s;
    s.domain = &d;
    s.A1 = std::move(A1);
    s.A2 = std::move(A2);
    s.V1 = std::move(V1);
    s.V2 = std::move(V2);
    return s;
}

double rel_l2(const Domain2D& d, const RealField& a, const RealField& b) {
    const RVec w = d.node_area_weights();
    return std::sqrt((w.array() * (a - b).array().square()).sum() / (w.array() * b.array().square()).sum());
}

}  // namespace

TEST(FourierGrid, LatticeLayout) {
    const Domain2D d = build_domain(2, 1, 33, 17, 0.1);
    const FourierGrid g = make_fourier_grid(d, 3);
    EXPECT_EQ(g.size(), 48);
    for (int k = 0; k < g.size(); ++k) {
        const auto [m, n] = g.index[k];
        EXPECT_FALSE(m == 0 && n == 0);
        EXPECT_EQ(g.find(m, n), k);
        EXPECT_LT((g.xi(k) - Vec2(2 * kPi * m / 2.0, 2 * kPi * n)).norm(), 1e-14);
    }
    EXPECT_EQ(g.find(0, 0), -1);
    EXPECT_EQ(g.find(4, 0), -1);
}

TEST(FourierGrid, ConjugateSymmetryEnforcedExactly) {
    const Domain2D d = build_domain(1, 1, 17, 17, 0.1);
    FourierGrid g = make_fourier_grid(d, 2);
    for (int k = 0; k < g.size(); ++k) g.values[k] = cplx(k + 1.0, 0.5 * k);
    g.enforce_conjugate_symmetry();
    EXPECT_GT(g.asymmetry, 0.0);
    for (int k = 0; k < g.size(); ++k) {
        const int j = g.find(-g.index[k][0], -g.index[k][1]);
        EXPECT_EQ(g.values[j], std::conj(g.values[k]));
    }
    FourierGrid h = g;
    h.enforce_conjugate_symmetry();
    EXPECT_EQ(h.asymmetry, 0.0);
}

TEST(FourierGrid, ForwardThenInverseIsIdentityOnLatticeModes) {
    const Domain2D d = build_domain(1, 1, 33, 33, 0.1);
    RealField f(d.node_count());
    for (int g = 0; g < d.node_count(); ++g) {
        const Vec2 x = d.point(g);
        f[g] = 0.7 + std::cos(2 * kPi * x[0]) - 0.4 * std::sin(2 * kPi * (2 * x[0] - x[1])) +
               0.2 * std::cos(2 * kPi * 3 * x[1]);
    }
    FourierGrid grid = make_fourier_grid(d, 3);
    for (int k = 0; k < grid.size(); ++k) grid.values[k] = fourier_coefficient(d, f, grid.xi(k));
    grid.enforce_conjugate_symmetry();
    EXPECT_LT(grid.asymmetry, 1e-14);
    const RealField back = inverse_transform(d, grid, fourier_coefficient(d, f, Vec2(0, 0)));
    EXPECT_LT((back - f).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(RayIdentity, ZeroDifference) {
    const Domain2D d = build_domain(1, 1, 33, 33, 0.15);
    const RayIdentity r = ray_transform_identity(d, Vec2(4, 3), zero_vector());
    EXPECT_EQ(r.lhs, cplx(0, 0));
    EXPECT_EQ(r.rhs, cplx(0, 0));
}

TEST(RayIdentity, BothQuadraturesAgree) {
    const Domain2D d = build_domain(1, 1, 129, 129, 0.15);
    for (const Vec2& xi : {Vec2(2 * kPi, 0), Vec2(4, 3), Vec2(0, -5)}) {
        const RayIdentity r = ray_transform_identity(d, xi, bump_potential());
        EXPECT_LT(std::abs(r.lhs - r.rhs) / std::abs(r.lhs), 1e-3) << xi.transpose();
    }
}

TEST(RayIdentity, PureGaugeHasNoRayData) {
    const Domain2D d = build_domain(1, 1, 129, 129, 0.15);
    const RayIdentity r = ray_transform_identity(d, Vec2(4, 3), gradient_field(gauge_bump()));
    EXPECT_LT(std::abs(r.rhs), 1e-8);
    EXPECT_LT(std::abs(r.lhs), 1e-4);
}

TEST(RecoverCurl, EqualPotentialsGiveZero) {
    const Domain2D d = build_domain(1, 1, 33, 33, 0.15);
    RecoveryOptions opt;
    opt.modes = 3;
    const RecoveryReport r =
        recover_curl(oracle_source(d, bump_potential(), bump_potential(), zero_scalar(), zero_scalar()), opt);
    EXPECT_LT(r.estimate.cwiseAbs().maxCoeff(), 1e-8);
}

TEST(RecoverCurl, OracleBumpWithinTenPercent) {
    const Domain2D d = build_domain(1, 1, 65, 65, 0.15);
    RecoveryOptions opt;
    opt.modes = 8;
    const RecoveryReport r =
        recover_curl(oracle_source(d, bump_potential(), zero_vector(), zero_scalar(), zero_scalar()), opt);
    EXPECT_EQ(r.data.size(), 17 * 17 - 1);
    EXPECT_LT(r.rel_l2_error, 0.10);
    // the reference is the grid curl of the difference
    EXPECT_LT((r.reference - curl(d, sample_vector(d, *bump_potential()))).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(r.rel_l2_error, rel_l2(d, r.estimate, r.reference), 1e-12);
}

TEST(RecoverCurl, GaugeInvariant) {
    const Domain2D d = build_domain(1, 1, 65, 65, 0.15);
    RecoveryOptions opt;
    opt.modes = 6;
    const VectorFn A = bump_potential();
    const VectorFn Ag = combine(1.0, A, 1.0, gradient_field(gauge_bump()));
    const RecoveryReport a = recover_curl(oracle_source(d, A, zero_vector(), zero_scalar(), zero_scalar()), opt);
    const RecoveryReport b = recover_curl(oracle_source(d, Ag, zero_vector(), zero_scalar(), zero_scalar()), opt);
    EXPECT_LT(rel_l2(d, b.estimate, a.estimate), 1e-2);
    const RecoveryReport g = recover_curl(oracle_source(d, Ag, A, zero_scalar(), zero_scalar()), opt);
    EXPECT_LT(std::sqrt((d.node_area_weights().array() * g.estimate.array().square()).sum()) / g.reference_scale,
              1e-2);
}

TEST(RecoverPotential, EqualPotentialsGiveZero) {
    const Domain2D d = build_domain(1, 1, 33, 33, 0.15);
    RecoveryOptions opt;
    opt.modes = 3;
    const ScalarFn V = gaussian_scalar(2.0, {0.02, 0.04}, 0.08, 0.3);
    const RecoveryReport r = recover_potential(oracle_source(d, zero_vector(), zero_vector(), V, V), opt);
    EXPECT_LT(r.estimate.cwiseAbs().maxCoeff(), 1e-8);
}

TEST(RecoverPotential, OracleGaussianWithinFivePercent) {
    const Domain2D d = build_domain(1, 1, 65, 65, 0.15);
    RecoveryOptions opt;
    opt.modes = 8;
    const ScalarFn V = gaussian_scalar(2.0, {0.02, 0.04}, 0.08, 0.3);
    const RecoveryReport r =
        recover_potential(oracle_source(d, bump_potential(), bump_potential(), V, zero_scalar()), opt);
    EXPECT_LT(r.rel_l2_error, 0.05);
    EXPECT_LT(r.data.asymmetry, 1e-12);
}

TEST(RecoverPotential, RefusesDifferentMagneticPotentials) {
    const Domain2D d = build_domain(1, 1, 33, 33, 0.15);
    RecoveryOptions opt;
    opt.modes = 3;
    EXPECT_THROW(recover_potential(oracle_source(d, bump_potential(), zero_vector(), zero_scalar(), zero_scalar()), opt),
                 InvalidArgument);
    opt.modes = 2;
    EXPECT_THROW(
        recover_potential(oracle_source(d, zero_vector(), zero_vector(), constant_scalar(1), zero_scalar()), opt),
        InvalidArgument);
}

TEST(RecoverCurl, SpectralModeReportsGapPerFrequency) {
    const Domain2D d = build_domain(1, 1, 33, 33, 0.15);
    const MagneticOperator op1 = assemble(d, sample_vector(d, *bump_potential()), RealField::Zero(d.node_count()));
    const MagneticOperator op2 = assemble(d, VectorField2D(d.node_count()), RealField::Zero(d.node_count()));
    const int n = d.interior_count();
    const BoundarySpectralData s1 = eigensolve(op1, n), s2 = eigensolve(op2, n);
    RecoverySource src = oracle_source(d, bump_potential(), zero_vector(), zero_scalar(), zero_scalar());
    src.spec1 = &s1;
    src.spec2 = &s2;
    RecoveryOptions opt;
    opt.mode = RecoveryMode::Spectral;
    opt.modes = 1;
    opt.taus = {12.0, 16.0};
    const RecoveryReport r = recover_curl(src, opt);
    ASSERT_EQ(r.gap.size(), 8u);
    ASSERT_EQ(r.oracle.size(), 8u);
    ASSERT_EQ(r.indicators.size(), 8u);
    for (int k = 0; k < 8; ++k) EXPECT_TRUE(std::isfinite(r.gap[k]));
    EXPECT_EQ(r.fitted.size(), r.data.size());
    const auto j = nlohmann::json::parse(r.to_json());
    EXPECT_EQ(j.at("quantity"), "curl");
}

TEST(Uniqueness, IdenticalOperatorsPassWithZeroEstimates) {
    const Domain2D d = build_domain(1, 1, 57, 57, 0.15);
    OperatorPreset p;
    p.A.kind = "vortex_bump";
    p.A.amplitude = 0.5;
    p.A.radius = 0.25;
    p.V.kind = "gaussian";
    p.V.amplitude = 2.0;
    p.V.sigma = 0.08;
    p.V.cutoff = 0.3;
    UniquenessOptions opt;
    opt.eigenpairs = 24;
    opt.modes = 1;
    const UniquenessReport r = uniqueness_sweep(d, p, p, opt);
    EXPECT_TRUE(r.pass) << r.failed_stage;
    EXPECT_EQ(r.diagnostics.max_eigen_gap, 0.0);
    EXPECT_EQ(r.curl.estimate.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(r.potential.estimate.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(r.gauge_certificate, 0.0);
    EXPECT_EQ(r.gauge_boundary_rel, 0.0);
}

TEST(Uniqueness, RefusesPairsDifferingOnCollar) {
    const Domain2D d = build_domain(1, 1, 57, 57, 0.15);
    OperatorPreset a, b;
    b.A.kind = "directional_bump";
    b.A.amplitude = 0.3;
    b.A.radius = 0.45;
    EXPECT_THROW(uniqueness_sweep(d, a, b, {}), InvalidArgument);
}
