#include "magbl/ansatz.hpp"
#include "magbl/hamiltonian.hpp"
#include "magbl/presets.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace magbl;

namespace {

// C1 but not C2 across the rim of the disc
VectorFn c1_bump() { return directional_bump(1.0, {0.03, -0.02}, 0.25, Vec2(0.6, 0.8), 1.5); }

}  // namespace

TEST(Frame, WorkedValues) {
    const IsozakiFrame f = isozaki_params(Vec2(1.0, 0.0), 2.0);
    EXPECT_NEAR(f.B, std::sqrt(15.0) / 4.0, 1e-15);
    const IsozakiFrame g = isozaki_params(Vec2(0.6, 0.8), 3.0);
    EXPECT_EQ(g.lambda, cplx(8.0, 6.0));
    EXPECT_EQ(g.lambda.imag(), 6.0);
    EXPECT_NEAR(g.delta, std::pow(3.0, -1.0 / 3.0), 1e-15);
    EXPECT_EQ(g.sqrt_lambda, cplx(3.0, 1.0));
}

TEST(Frame, TwoDimensionalChoice) {
    const Vec2 xi(3.0, 4.0);
    const IsozakiFrame f = isozaki_params(xi, 10.0);
    EXPECT_LT((f.eta - Vec2(0.8, -0.6)).norm(), 1e-15);
    EXPECT_LT((f.y - Vec2(0.6, 0.8)).norm(), 1e-15);
    EXPECT_LT((f.eta1 - (f.B * f.eta - xi / 20.0)).norm(), 1e-15);
    EXPECT_LT((f.eta2 - (f.B * f.eta + xi / 20.0)).norm(), 1e-15);
}

TEST(Frame, InvariantsForRandomParameters) {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-20.0, 20.0), s(1.01, 10.0);
    for (int t = 0; t < 500; ++t) {
        const Vec2 xi(u(rng), u(rng));
        const double tau = xi.norm() * s(rng);
        for (int o : {1, -1}) {
            const IsozakiFrame f = isozaki_params(xi, tau, o);
            EXPECT_NEAR(f.eta1.norm(), 1.0, 1e-14);
            EXPECT_NEAR(f.eta2.norm(), 1.0, 1e-14);
            EXPECT_NEAR(f.eta.norm(), 1.0, 1e-14);
            EXPECT_NEAR(f.eta.dot(xi), 0.0, 1e-14 * xi.norm());
            EXPECT_EQ(f.lambda.imag(), 2.0 * tau);
            EXPECT_NEAR(f.omega.dot(f.eta2), 0.0, 1e-12 * (1.0 + xi.squaredNorm()));
            EXPECT_NEAR(f.eta1.dot(f.eta2), 1.0 - xi.squaredNorm() / (2.0 * tau * tau), 1e-12);
            EXPECT_NEAR(f.y.dot(f.eta), 0.0, 1e-14);
            EXPECT_GT(f.sqrt_lambda.real(), 0.0);
        }
    }
}

TEST(Frame, OrientationFollowsFirstComponent) {
    EXPECT_EQ(isozaki_params(Vec2(1.0, 2.0), 5.0).orientation, 1);
    const IsozakiFrame f = isozaki_params(Vec2(0.0, 2.0), 5.0);
    EXPECT_EQ(f.orientation, -1);
    EXPECT_LT((f.eta - Vec2(-1.0, 0.0)).norm(), 1e-15);
}

TEST(Frame, ScaledDifferenceTendsToMinusXi) {
    const Vec2 xi(2.0, -1.0);
    const IsozakiFrame f = isozaki_params(xi, 100.0);
    const Eigen::Vector2cd d = f.sqrt_lambda * (f.eta1 - f.eta2).cast<cplx>();
    const Eigen::Vector2cd m = d + xi.cast<cplx>();
    EXPECT_LE(m.norm(), xi.norm() * std::sqrt(2.0) / 100.0);
}

TEST(Frame, RefusesInvalidParameters) {
    EXPECT_THROW(isozaki_params(Vec2(0.0, 0.0), 5.0), InvalidArgument);
    EXPECT_THROW(isozaki_params(Vec2(3.0, 4.0), 5.0), InvalidArgument);
    EXPECT_THROW(isozaki_params(Vec2(3.0, 4.0), 4.0), InvalidArgument);
    EXPECT_NO_THROW(isozaki_params(Vec2(3.0, 4.0), 5.0001));
}

TEST(Mollify, ZeroStaysZero) {
    const MollifiedPotential m = mollify(zero_vector(), 0.1, 0.01);
    EXPECT_EQ(m.value(Vec2(0.1, 0.2)), Vec2(0.0, 0.0));
    EXPECT_EQ(m.sup_distance, 0.0);
}

TEST(Mollify, DistanceShrinksAtC1Rate) {
    double prev = 0.0;
    for (double delta : {0.08, 0.04, 0.02}) {
        const MollifiedPotential m = mollify(c1_bump(), delta, delta / 4);
        if (prev > 0.0) {
            const double f = prev / m.sup_distance;
            EXPECT_GE(f, 1.5) << delta;
            EXPECT_LE(f, 3.0) << delta;
        }
        prev = m.sup_distance;
    }
}

TEST(Mollify, SecondDifferencesGrowAtMostLikeInverseDelta) {
    std::vector<double> scaled;
    for (double delta : {0.08, 0.04, 0.02}) scaled.push_back(mollify(c1_bump(), delta, delta / 4).sup_second * delta);
    const double first = scaled.front();
    for (double s : scaled) EXPECT_LE(s, 1.05 * first);
}

TEST(Mollify, PreservesIntegralAndSupport) {
    const MollifiedPotential m = mollify(c1_bump(), 0.05, 0.01);
    const Box b = m.support;
    EXPECT_FALSE(b.empty);
    EXPECT_LE(b.lo[0], 0.03 - 0.25 - 0.05 + 1e-12);
    EXPECT_EQ(m.value(Vec2(0.03 + 0.25 + 0.06, -0.02)), Vec2(0.0, 0.0));
    // unit mass kernel: the mean of the first component is preserved
    const double h = 0.005;
    double a = 0.0, b0 = 0.0;
    const VectorFn src = c1_bump();
    for (double x = -0.4; x <= 0.4; x += h)
        for (double y = -0.4; y <= 0.4; y += h) {
            a += m.value(Vec2(x, y))[0];
            b0 += src->value(Vec2(x, y))[0];
        }
    EXPECT_NEAR(a / b0, 1.0, 1e-3);
}

TEST(Mollify, RefusesUnresolvedScale) {
    EXPECT_THROW(mollify(c1_bump(), 0.02, 0.01), InvalidArgument);
    EXPECT_NO_THROW(mollify(c1_bump(), 0.021, 0.01));
}

TEST(Extension, SecondUsesFirstOutsideRectangle) {
    const Domain2D d = build_domain(1, 1, 17, 17, 0.15);
    const VectorFn A1 = directional_bump(1.0, {0.5, 0.0}, 0.2, Vec2(1, 0));
    const VectorFn A2 = vortex_bump(1.0, {0.0, 0.0}, 0.2);
    const VectorFn e = extension_second(d, A1, A2);
    EXPECT_EQ(e->value(Vec2(0.6, 0.0)), A1->value(Vec2(0.6, 0.0)));
    EXPECT_EQ(e->value(Vec2(0.1, 0.05)), A2->value(Vec2(0.1, 0.05)));
    EXPECT_EQ(extension_first(A1)->value(Vec2(0.6, 0.0)), A1->value(Vec2(0.6, 0.0)));
}

TEST(Transport, RayMissingSupportGivesZero) {
    const MollifiedPotential m = mollify(vortex_bump(1.0, {0.0, 0.0}, 0.1), 0.05, 0.01);
    EXPECT_EQ(transport_phase(m, Vec2(1.0, 0.0), Vec2(0.0, 0.4), 0.01), 0.0);
}

TEST(Transport, SatisfiesTransportEquation) {
    const MollifiedPotential m = mollify(c1_bump(), 0.05, 0.01);
    const Vec2 dir = Vec2(1.0, 2.0).normalized();
    const double eps = 1e-4;
    for (const Vec2& x : {Vec2(0.0, 0.0), Vec2(0.1, -0.05), Vec2(-0.12, 0.08)}) {
        const double step = std::min(0.01, m.delta / 4);
        const double dpsi = (transport_phase(m, dir, x + eps * dir, step) - transport_phase(m, dir, x, step)) / eps;
        EXPECT_LT(std::abs(dpsi + dir.dot(m.value(x))), 1e-4);
    }
}

TEST(Transport, QuadratureConverged) {
    const MollifiedPotential m = mollify(c1_bump(), 0.05, 0.01);
    const Vec2 dir = Vec2(-0.3, 1.0).normalized();
    const double a = transport_phase(m, dir, Vec2(0.05, 0.1), 0.0125);
    const double b = transport_phase(m, dir, Vec2(0.05, 0.1), 0.00625);
    EXPECT_LT(std::abs(a - b), 1e-8);
}

TEST(Amplitude, EqualPotentialsGiveConstant) {
    const VectorFn A = c1_bump();
    const IsozakiFrame f = isozaki_params(Vec2(3.0, 1.0), 12.0);
    const MollifiedPotential m = mollify(A, f.delta, 0.01);
    const AmplitudeField b2(f, m, m, 0.01);
    const cplx expected = -kI * f.omega.dot(f.y);
    for (const Vec2& x : {Vec2(0.0, 0.0), Vec2(0.2, -0.3), Vec2(-0.45, 0.1)})
        EXPECT_LT(std::abs(b2(x) - expected), 1e-14);
    const LimitAmplitude lim(f.xi, f.eta, f.y, A, A, 0.01);
    EXPECT_LT(std::abs(lim.b(Vec2(0.1, 0.1)) + kI * f.xi.dot(f.y)), 1e-14);
    EXPECT_EQ(lim.psi(Vec2(0.1, 0.1)), 0.0);
}

TEST(Amplitude, BoundedAndConvergingAlongTau) {
    const Domain2D d = build_domain(1, 1, 65, 65, 0.15);
    const VectorFn A1 = vortex_bump(0.8, {0.05, -0.03}, 0.25);
    const VectorFn A2 = directional_bump(0.5, {-0.04, 0.02}, 0.2, Vec2(0.6, 0.8));
    const Vec2 xi(4.0, 3.0);
    // bound on y.grad A from the closed forms
    double grad = 0.0;
    for (int g = 0; g < d.node_count(); ++g)
        for (const VectorFn& a : {A1, A2}) grad = std::max(grad, a->jacobian(d.point(g)).norm());
    std::vector<double> gaps;
    for (double tau : {8.0, 16.0, 32.0, 64.0}) {
        const IsozakiFrame f = isozaki_params(xi, tau);
        const double h = 0.5 * f.delta / 4;
        const MollifiedPotential m1 = mollify(extension_first(A1), f.delta, h);
        const MollifiedPotential m2 = mollify(extension_second(d, A1, A2), f.delta, h);
        const AmplitudeField b2(f, m1, m2, h);
        const LimitAmplitude b(f.xi, f.eta, f.y, A1, A2, h);
        double sup = 0.0, gap = 0.0;
        for (int j = 0; j < d.N2; j += 4)
            for (int i = 0; i < d.N1; i += 4) {
                const Vec2 x = d.point(d.node(i, j));
                sup = std::max(sup, std::abs(b2(x)));
                gap = std::max(gap, std::abs(b2(x) - b.b(x)));
            }
        EXPECT_LE(sup, 1.0 + xi.norm() + 2.0 * grad) << tau;
        gaps.push_back(gap);
    }
    for (std::size_t k = 1; k < gaps.size(); ++k) EXPECT_LT(gaps[k], gaps[k - 1]);
}

TEST(Ansatz, FreeCaseIsPlaneWave) {
    const Domain2D d = build_domain(1, 1, 33, 33, 0.15);
    const IsozakiFrame f = isozaki_params(Vec2(2.0, 1.0), 10.0);
    const MollifiedPotential m = mollify(zero_vector(), f.delta, d.h1);
    AnsatzOptions opt;
    opt.unit_amplitude = true;
    const AnsatzFields a = build_ansatz(d, f, m, m, opt);
    for (int g = 0; g < d.node_count(); ++g) {
        const Vec2 x = d.point(g);
        EXPECT_LT(std::abs(a.phi1[g] - std::exp(kI * f.sqrt_lambda * f.eta1.dot(x))), 1e-13);
        EXPECT_LT(std::abs(a.phi2[g] - std::exp(-kI * f.sqrt_lambda * f.eta2.dot(x))), 1e-13);
    }
    const AnsatzSample s = evaluate_ansatz(a, AnsatzKind::First);
    EXPECT_EQ((s.trace.values - a.phi1_trace.values).norm(), 0.0);
}

TEST(Ansatz, FirstFunctionBoundedUniformlyInTau) {
    const Domain2D d = build_domain(1, 1, 65, 65, 0.15);
    const VectorFn A1 = vortex_bump(0.8, {0.05, -0.03}, 0.25);
    for (double tau : {8.0, 16.0, 32.0}) {
        const IsozakiFrame f = isozaki_params(Vec2(4.0, 3.0), tau);
        const MollifiedPotential m = mollify(extension_first(A1), f.delta, d.h1);
        const AnsatzFields a = build_ansatz(d, f, m, m);
        for (int g = 0; g < d.node_count(); ++g) EXPECT_LE(std::abs(a.phi1[g]), std::exp(d.point(g).norm()) * (1 + 1e-12));
    }
}

TEST(Ansatz, ResidualGrowsNoFasterThanTau) {
    // ((-i grad + A1)^2 + V1 - lambda) Phi1 through the discrete operator, away from the boundary
    const VectorFn A1 = vortex_bump(0.8, {0.05, -0.03}, 0.25);
    std::vector<double> ratios;
    for (double tau : {8.0, 16.0, 32.0}) {
        const Domain2D d = build_domain(1, 1, 257, 257, 0.15);
        const MagneticOperator op = assemble(d, sample_vector(d, *A1), RealField::Zero(d.node_count()));
        const IsozakiFrame f = isozaki_params(Vec2(4.0, 3.0), tau);
        const MollifiedPotential m = mollify(extension_first(A1), f.delta, d.h1);
        const AnsatzFields a = build_ansatz(d, f, m, m);
        const CVec r = nodal_residual(op, a.phi1, f.lambda);
        double rmax = 0.0;
        for (int k = 0; k < d.interior_count(); ++k) {
            const int g = d.interior_nodes[k];
            rmax = std::max(rmax, std::abs(r[g]) / (d.h1 * d.h2));
        }
        ratios.push_back(rmax / (tau * a.phi1.cwiseAbs().maxCoeff()));
    }
    for (double q : ratios) EXPECT_LT(q, 4.0 * ratios.front());
}
