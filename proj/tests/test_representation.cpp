#include "magbl/presets.hpp"
#include "magbl/recovery.hpp"
#include "magbl/representation.hpp"

#include <fftw3.h>
#include <gtest/gtest.h>

#include <cmath>

using namespace magbl;

namespace {

struct Sample {
    Domain2D d;
    VectorFn A1, A2;
    ScalarFn V1, V2;
    MagneticOperator op1, op2;
};

Sample make_sample(int N, bool same_potential = false) {
    Sample s{build_domain(1, 1, N, N, 0.15), vortex_bump(0.5, {0.05, -0.03}, 0.25), zero_vector(),
            gaussian_scalar(2.0, {0.02, 0.04}, 0.08, 0.3), zero_scalar(), {}, {}};
    if (same_potential) s.A2 = s.A1;
    s.op1 = assemble(s.d, sample_vector(s.d, *s.A1), sample_scalar(s.d, *s.V1));
    s.op2 = assemble(s.d, sample_vector(s.d, *s.A2), sample_scalar(s.d, *s.V2));
    return s;
}

RepresentationTerms terms_at(const Sample& s, const Vec2& xi, double tau) {
    const ProbeSetup p = make_probe(s.d, s.A1, s.A2, xi, tau, false);
    return representation_terms({&s.op1, s.A1}, {&s.op2, s.A2}, p);
}

}  // namespace

TEST(Scattering, IdenticalOperatorsAgreeExactly) {
    const Sample s = make_sample(33);
    const ProbeSetup p = make_probe(s.d, s.A1, s.A1, Vec2(2 * kPi, 0), 8.0, false);
    const ScatteringPair r = scattering_pair(s.op1, s.op1, p.fields);
    EXPECT_EQ(r.S1, r.S2);
}

TEST(Scattering, FreeOperatorsGiveFiniteEqualValues) {
    const Domain2D d = build_domain(1, 1, 33, 33, 0.15);
    const MagneticOperator op = assemble(d, VectorField2D(d.node_count()), RealField::Zero(d.node_count()));
    const ProbeSetup p = make_probe(d, zero_vector(), zero_vector(), Vec2(3, 4), 8.0, true);
    const ScatteringPair r = scattering_pair(op, op, p.fields);
    EXPECT_TRUE(std::isfinite(std::abs(r.S1)));
    EXPECT_EQ(r.S1 - r.S2, cplx(0, 0));
}

TEST(Scattering, RefusesUnderResolvedTau) {
    const Domain2D d = build_domain(1, 1, 33, 33, 0.15);
    EXPECT_DOUBLE_EQ(max_admissible_tau(d), 16.0);
    EXPECT_NO_THROW(check_resolution(d, 16.0));
    try {
        check_resolution(d, 16.5);
        FAIL() << "accepted tau above the resolution limit";
    } catch (const InvalidArgument& e) {
        EXPECT_NE(std::string(e.what()).find("16"), std::string::npos) << e.what();
    }
    EXPECT_THROW(make_probe(d, zero_vector(), zero_vector(), Vec2(2 * kPi, 0), 32.0, true), InvalidArgument);
}

TEST(Representation, AssembledSideIsSumOfTerms) {
    const Sample s = make_sample(33);
    const RepresentationTerms t = terms_at(s, Vec2(2 * kPi, 0), 8.0);
    for (const TermSet* ts : {&t.first, &t.second})
        EXPECT_EQ(ts->rhs, ts->volume_magnetic + ts->volume_electric + ts->boundary + ts->resolvent);
}

TEST(Representation, FreeCaseTermsVanish) {
    const Domain2D d = build_domain(1, 1, 33, 33, 0.15);
    const MagneticOperator op = assemble(d, VectorField2D(d.node_count()), RealField::Zero(d.node_count()));
    const ProbeSetup p = make_probe(d, zero_vector(), zero_vector(), Vec2(3, 4), 8.0, true);
    const RepresentationTerms t = representation_terms({&op, zero_vector()}, {&op, zero_vector()}, p);
    EXPECT_LT(t.first.q_second.cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT(t.first.q_first.cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(t.first.volume_magnetic, cplx(0, 0));
    EXPECT_EQ(t.first.volume_electric, cplx(0, 0));
    EXPECT_LT(t.first.rel_residual, 1e-2);
}

TEST(Representation, ResolventTermWithinOperatorNormBound) {
    const Sample s = make_sample(65);
    for (double tau : {8.0, 16.0, 32.0}) {
        const RepresentationTerms t = terms_at(s, Vec2(4, 3), tau);
        for (const TermSet* ts : {&t.first, &t.second}) {
            EXPECT_LE(std::abs(ts->resolvent), ts->resolvent_bound * (1 + 1e-12)) << tau;
            EXPECT_GT(ts->resolvent_bound, 0.0);
        }
    }
}

TEST(Representation, ResidualSecondOrderUnderRefinement) {
    std::vector<double> r;
    for (int N : {65, 129}) {
        const RepresentationTerms t = terms_at(make_sample(N), Vec2(2 * kPi, 0), 8.0);
        r.push_back(std::max(t.first.rel_residual, t.second.rel_residual));
    }
    EXPECT_LT(r[1], 1e-2);
    EXPECT_GT(r[0] / r[1], 3.0);
}

TEST(Representation, TermsJsonNamesEveryTerm) {
    const RepresentationTerms t = terms_at(make_sample(33), Vec2(2 * kPi, 0), 8.0);
    const std::string j = t.to_json();
    for (const char* key : {"volume_magnetic", "volume_electric", "boundary", "resolvent", "rhs", "direct"})
        EXPECT_NE(j.find(key), std::string::npos) << key;
}

TEST(MagneticTarget, VanishesForEqualPotentials) {
    const Sample s = make_sample(33);
    EXPECT_EQ(magnetic_limit_target(s.d, isozaki_params(Vec2(4, 3), 8.0), s.A1, s.A1), cplx(0, 0));
}

TEST(MagneticTarget, ConvergedUnderRefinement) {
    cplx prev;
    for (int N : {129, 257}) {
        const Domain2D d = build_domain(1, 1, N, N, 0.15);
        const cplx v = magnetic_limit_target(d, isozaki_params(Vec2(4, 3), 8.0), vortex_bump(0.5, {0.05, -0.03}, 0.25),
                                             zero_vector());
        if (N == 257) EXPECT_LT(std::abs(v - prev) / std::abs(v), 1e-6);
        prev = v;
    }
}

TEST(MagneticTarget, PureGaugeDifferenceGivesNoCurl) {
    const Domain2D d = build_domain(1, 1, 65, 65, 0.15);
    RecoverySource src;
    src.domain = &d;
    src.A1 = vortex_bump(0.5, {0.05, -0.03}, 0.25);
    src.A2 = combine(1.0, src.A1, 1.0, gradient_field(bump_scalar(0.3, {0.0, 0.05}, 0.25)));
    src.V1 = src.V2 = zero_scalar();
    RecoveryOptions opt;
    opt.modes = 4;
    const RecoveryReport r = recover_curl(src, opt);
    EXPECT_LT(r.estimate.cwiseAbs().maxCoeff(), 1e-3);
}

TEST(ElectricTarget, VanishesForEqualPotentials) {
    const Sample s = make_sample(33, true);
    EXPECT_EQ(electric_limit_target(s.d, Vec2(4, 3), s.op1.A, s.op1.A, s.op1.V, s.op1.V), cplx(0, 0));
}

TEST(ElectricTarget, ConjugateSymmetric) {
    const Sample s = make_sample(33, true);
    const cplx a = electric_limit_target(s.d, Vec2(4, 3), s.op1.A, s.op2.A, s.op1.V, s.op2.V);
    const cplx b = electric_limit_target(s.d, Vec2(-4, -3), s.op1.A, s.op2.A, s.op1.V, s.op2.V);
    EXPECT_LT(std::abs(a - std::conj(b)), 1e-14 * std::abs(a));
}

TEST(ElectricTarget, RefusesDifferentPotentials) {
    const Sample s = make_sample(33);
    EXPECT_THROW(electric_limit_target(s.d, Vec2(4, 3), s.op1.A, s.op2.A, s.op1.V, s.op2.V), InvalidArgument);
}

TEST(ElectricTarget, MatchesFftOfZeroExtendedField) {
    // the field vanishes on the boundary, so it extends periodically over one cell-centered period
    const int N = 65, M = N - 1;
    const Sample s = make_sample(N, true);
    const RealField dv = s.op1.V - s.op2.V;
    fftw_complex* in = fftw_alloc_complex(M * M);
    fftw_complex* out = fftw_alloc_complex(M * M);
    fftw_plan plan = fftw_plan_dft_2d(M, M, in, out, FFTW_FORWARD, FFTW_ESTIMATE);
    for (int j = 0; j < M; ++j)
        for (int i = 0; i < M; ++i) {
            in[j * M + i][0] = dv[s.d.node(i, j)];
            in[j * M + i][1] = 0.0;
        }
    fftw_execute(plan);
    for (const auto& [m, n] : std::vector<std::pair<int, int>>{{1, 0}, {0, 2}, {2, -1}, {-3, 1}}) {
        const Vec2 xi(2 * kPi * m, 2 * kPi * n);
        const int k1 = (m + M) % M, k2 = (n + M) % M;
        const cplx raw(out[k2 * M + k1][0], out[k2 * M + k1][1]);
        const cplx oracle = raw * s.d.cell_area() * std::exp(-kI * xi.dot(Vec2(s.d.x0, s.d.y0)));
        const cplx v = electric_limit_target(s.d, xi, s.op1.A, s.op2.A, s.op1.V, s.op2.V);
        EXPECT_LT(std::abs(v - oracle), 1e-6 * std::abs(oracle)) << m << "," << n;
    }
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
}

TEST(TauSweep, IdenticalOperatorsGiveZeroRows) {
    const Sample s = make_sample(33);
    SweepInput in;
    in.first = {&s.op1, s.A1};
    in.second = {&s.op1, s.A1};
    const TauSweepResult r = tau_sweep(in, Vec2(4, 3), {8.0, 12.0, 16.0}, LimitMode::Magnetic, LimitRoute::Direct);
    ASSERT_EQ(r.table.rows.size(), 3u);
    for (const auto& row : r.table.rows) {
        EXPECT_EQ(row.measured, cplx(0, 0));
        EXPECT_EQ(row.target, cplx(0, 0));
    }
    EXPECT_TRUE(r.table.parameter_increasing());
}

TEST(TauSweep, ValidatesEveryTauBeforeSolving) {
    const Sample s = make_sample(33);
    SweepInput in;
    in.first = {&s.op1, s.A1};
    in.second = {&s.op2, s.A2};
    EXPECT_THROW(tau_sweep(in, Vec2(4, 3), {8.0, 64.0}, LimitMode::Magnetic, LimitRoute::Direct), InvalidArgument);
    EXPECT_THROW(tau_sweep(in, Vec2(4, 3), {4.0, 8.0}, LimitMode::Magnetic, LimitRoute::Direct), InvalidArgument);
    EXPECT_THROW(tau_sweep(in, Vec2(4, 3), {8.0}, LimitMode::Electric, LimitRoute::Direct), InvalidArgument);
}

TEST(TauSweep, SpectralRouteEqualsDirectWithFullSpectra) {
    const Sample s = make_sample(14);
    const int n = s.d.interior_count();
    const BoundarySpectralData sp1 = eigensolve(s.op1, n), sp2 = eigensolve(s.op2, n);
    SweepInput in;
    in.first = {&s.op1, s.A1};
    in.second = {&s.op2, s.A2};
    in.spec1 = &sp1;
    in.spec2 = &sp2;
    const std::vector<double> taus{4.0, 5.0, 6.0};
    const TauSweepResult direct = tau_sweep(in, Vec2(2, 1), taus, LimitMode::Magnetic, LimitRoute::Direct);
    const TauSweepResult spectral = tau_sweep(in, Vec2(2, 1), taus, LimitMode::Magnetic, LimitRoute::Spectral);
    for (std::size_t k = 0; k < taus.size(); ++k) {
        const cplx a = direct.table.rows[k].measured, b = spectral.table.rows[k].measured;
        EXPECT_LT(std::abs(a - b), 1e-6 * std::abs(a)) << taus[k];
    }
    ASSERT_EQ(spectral.truncation_indicators.size(), taus.size());
}
