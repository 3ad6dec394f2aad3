#include "magbl/representation.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

namespace magbl {

double max_admissible_tau(const Domain2D& d, double limit) { return limit / std::max(d.h1, d.h2); }

void check_resolution(const Domain2D& d, double tau, double limit) {
    const double h = std::max(d.h1, d.h2);
    if (!(tau * h <= limit)) {
        std::ostringstream os;
        os << "tau = " << tau << " is not resolved on this grid (tau*h = " << tau * h << " > " << limit
           << "); admissible tau_max = " << max_admissible_tau(d, limit);
        throw InvalidArgument(os.str());
    }
}

ProbeSetup make_probe(const Domain2D& d, const VectorFn& A1, const VectorFn& A2, const Vec2& xi, double tau,
                      bool unit_amplitude, double resolution_limit) {
    check_resolution(d, tau, resolution_limit);
    ProbeSetup p;
    p.frame = isozaki_params(xi, tau);
    const double h = std::max(d.h1, d.h2);
    p.A1_sharp = mollify(extension_first(A1), p.frame.delta, h);
    p.A2_sharp = mollify(extension_second(d, A1, A2), p.frame.delta, h);
    AnsatzOptions opt;
    opt.unit_amplitude = unit_amplitude;
    p.fields = build_ansatz(d, p.frame, p.A1_sharp, p.A2_sharp, opt);
    return p;
}

cplx scattering_functional(const MagneticOperator& op, const AnsatzFields& fields) {
    const BoundaryFunction flux = dtn(op, fields.frame.lambda, fields.phi1_trace);
    return boundary_pairing(flux, fields.phi2_trace);
}

ScatteringPair scattering_pair(const MagneticOperator& op1, const MagneticOperator& op2, const AnsatzFields& fields) {
    ScatteringPair s;
    s.S1 = scattering_functional(op1, fields);
    s.S2 = (&op1 == &op2) ? s.S1 : scattering_functional(op2, fields);
    return s;
}

namespace {

struct ExtDerivs {
    Vec2 grad_psi1, grad_psi2;
    double lap_psi1 = 0.0, lap_psi2 = 0.0;
    Eigen::Vector2cd grad_b2;
    cplx lap_b2{0.0, 0.0};
};

ExtDerivs ext_derivatives(const Domain2D& d, const AnsatzFields& f, int i, int j) {
    const int c = f.ext(i, j), e = f.ext(i + 1, j), w = f.ext(i - 1, j), n = f.ext(i, j + 1), s = f.ext(i, j - 1);
    const double ih1 = 1.0 / d.h1, ih2 = 1.0 / d.h2;
    ExtDerivs r;
    r.grad_psi1 = Vec2((f.psi1[e] - f.psi1[w]) * 0.5 * ih1, (f.psi1[n] - f.psi1[s]) * 0.5 * ih2);
    r.grad_psi2 = Vec2((f.psi2[e] - f.psi2[w]) * 0.5 * ih1, (f.psi2[n] - f.psi2[s]) * 0.5 * ih2);
    r.lap_psi1 = (f.psi1[e] + f.psi1[w] - 2.0 * f.psi1[c]) * ih1 * ih1 + (f.psi1[n] + f.psi1[s] - 2.0 * f.psi1[c]) * ih2 * ih2;
    r.lap_psi2 = (f.psi2[e] + f.psi2[w] - 2.0 * f.psi2[c]) * ih1 * ih1 + (f.psi2[n] + f.psi2[s] - 2.0 * f.psi2[c]) * ih2 * ih2;
    r.grad_b2 = Eigen::Vector2cd((f.b2[e] - f.b2[w]) * 0.5 * ih1, (f.b2[n] - f.b2[s]) * 0.5 * ih2);
    r.lap_b2 = (f.b2[e] + f.b2[w] - 2.0 * f.b2[c]) * ih1 * ih1 + (f.b2[n] + f.b2[s] - 2.0 * f.b2[c]) * ih2 * ih2;
    return r;
}

TermSet terms_for(const OperatorInput& in, const ProbeSetup& probe) {
    const MagneticOperator& op = *in.op;
    const Domain2D& d = op.domain;
    const AnsatzFields& f = probe.fields;
    const IsozakiFrame& fr = probe.frame;
    const cplx sl = fr.sqrt_lambda;
    const int n = d.node_count();
    const RVec wts = d.node_area_weights();

    TermSet t;
    t.q_first.resize(n);
    t.q_second.resize(n);
    CVec E(n), W(n), M(n), source(n);
    for (int g = 0; g < n; ++g) {
        const int i = d.col(g), j = d.row(g);
        const Vec2 x = d.point(g);
        const ExtDerivs dv = ext_derivatives(d, f, i, j);
        const Vec2 A = op.A.at(g);
        const double divA = in.A->divergence(x);
        const double V = op.V[g];
        const cplx b2 = f.b2[f.ext(i, j)];
        const double p1 = f.psi1[f.ext(i, j)], p2 = f.psi2[f.ext(i, j)];
        const Eigen::Vector2cd Ac(A[0], A[1]);

        const cplx q1 = -kI * divA + A.squaredNorm() + V + 2.0 * A.dot(dv.grad_psi1) - kI * dv.lap_psi1 +
                        dv.grad_psi1.squaredNorm();
        const cplx gb_gp = dv.grad_b2[0] * dv.grad_psi2[0] + dv.grad_b2[1] * dv.grad_psi2[1];
        const cplx gb_A = dv.grad_b2[0] * A[0] + dv.grad_b2[1] * A[1];
        const cplx q2 = dv.lap_b2 - 2.0 * kI * gb_gp - 2.0 * kI * gb_A +
                        (-kI * dv.lap_psi2 - dv.grad_psi2.squaredNorm() - 2.0 * dv.grad_psi2.dot(A) - kI * divA -
                         A.squaredNorm()) *
                            b2;
        t.q_first[g] = q1;
        t.q_second[g] = q2;

        const Vec2 A1s = probe.A1_sharp.value(x), A2s = probe.A2_sharp.value(x);
        E[g] = std::exp(kI * sl * (fr.eta1 - fr.eta2).dot(x) + kI * (p1 - p2));
        W[g] = std::exp(-kI * sl * fr.eta2.dot(x) - kI * p2);
        M[g] = 2.0 * sl * fr.eta2.dot(A - A2s) * b2 + V * b2 - q2;
        source[g] = (2.0 * sl * fr.eta1.dot(A - A1s) + q1) * f.phi1[g];

        t.volume_magnetic += wts[g] * 2.0 * sl * fr.eta2.dot(A - A2s) * E[g] * b2;
        t.volume_electric += wts[g] * (V * b2 - q2) * E[g];
    }
    for (int b = 0; b < d.boundary_count(); ++b) {
        const int g = d.boundary_nodes[b];
        const int i = d.col(g), j = d.row(g);
        const ExtDerivs dv = ext_derivatives(d, f, i, j);
        const cplx b2 = f.b2[f.ext(i, j)];
        const Vec2 A = op.A.at(g);
        const Vec2& nu = d.flux_normals[b];
        const cplx flux = b2 * sl * fr.eta2.dot(nu) + b2 * dv.grad_psi2.dot(nu) +
                          kI * (dv.grad_b2[0] * nu[0] + dv.grad_b2[1] * nu[1]) + b2 * A.dot(nu);
        t.boundary += -kI * d.boundary_weights[b] * E[g] * flux;
    }

    const DirichletSolver solver(op, fr.lambda);
    CVec rhs(d.interior_count());
    for (int p = 0; p < d.interior_count(); ++p) rhs[p] = source[d.interior_nodes[p]];
    const CVec R = solver.solve_interior(rhs);
    double sn = 0.0, wn = 0.0;
    for (int p = 0; p < d.interior_count(); ++p) {
        const int g = d.interior_nodes[p];
        t.resolvent -= d.cell_area() * R[p] * W[g] * M[g];
        sn += d.cell_area() * std::norm(rhs[p]);
        wn += d.cell_area() * std::norm(W[g] * M[g]);
    }
    t.resolvent_bound = std::sqrt(sn) * std::sqrt(wn) / std::abs(fr.lambda.imag());

    t.rhs = t.volume_magnetic + t.volume_electric + t.boundary + t.resolvent;
    t.direct = scattering_functional(op, f);
    t.abs_residual = std::abs(t.direct - t.rhs);
    t.rel_residual = std::abs(t.direct) > 0.0 ? t.abs_residual / std::abs(t.direct) : t.abs_residual;
    return t;
}

nlohmann::ordered_json cjson(cplx z) { return nlohmann::ordered_json::array({z.real(), z.imag()}); }

nlohmann::ordered_json term_json(const TermSet& t) {
    nlohmann::ordered_json j;
    j["volume_magnetic"] = cjson(t.volume_magnetic);
    j["volume_electric"] = cjson(t.volume_electric);
    j["boundary"] = cjson(t.boundary);
    j["resolvent"] = cjson(t.resolvent);
    j["rhs"] = cjson(t.rhs);
    j["direct"] = cjson(t.direct);
    j["abs_residual"] = t.abs_residual;
    j["rel_residual"] = t.rel_residual;
    j["resolvent_bound"] = t.resolvent_bound;
    double q1 = 0.0, q2 = 0.0;
    for (Eigen::Index g = 0; g < t.q_first.size(); ++g) {
        q1 = std::max(q1, std::abs(t.q_first[g]));
        q2 = std::max(q2, std::abs(t.q_second[g]));
    }
    j["q_first_sup"] = q1;
    j["q_second_sup"] = q2;
    return j;
}

}  // namespace

RepresentationTerms representation_terms(const OperatorInput& op1, const OperatorInput& op2, const ProbeSetup& probe) {
    if (!op1.op || !op2.op || !op1.A || !op2.A) throw InvalidArgument("representation needs both operators");
    RepresentationTerms r;
    r.frame = probe.frame;
    r.first = terms_for(op1, probe);
    r.second = terms_for(op2, probe);
    return r;
}

std::string RepresentationTerms::to_json() const {
    nlohmann::ordered_json j;
    j["xi"] = {frame.xi[0], frame.xi[1]};
    j["tau"] = frame.tau;
    j["eta"] = {frame.eta[0], frame.eta[1]};
    j["lambda"] = cjson(frame.lambda);
    j["delta"] = frame.delta;
    j["first"] = term_json(first);
    j["second"] = term_json(second);
    return j.dump(2) + "\n";
}

cplx magnetic_limit_target(const Domain2D& d, const Vec2& xi, const Vec2& eta, const Vec2& y, const VectorFn& A1,
                           const VectorFn& A2, double ray_step) {
    const Box supp = A1->support().united(A2->support());
    if (supp.empty) return 0.0;
    const double step = ray_step > 0.0 ? ray_step : std::min(d.h1, d.h2);
    const LimitAmplitude lim(xi, eta, y, A1, A2, step);
    const RVec w = d.node_area_weights();
    std::vector<cplx> part(static_cast<std::size_t>(d.N2), cplx(0.0, 0.0));
    parallel_for(static_cast<std::size_t>(d.N2), [&](std::size_t j) {
        cplx s = 0.0;
        for (int i = 0; i < d.N1; ++i) {
            const int g = d.node(i, static_cast<int>(j));
            const Vec2 x = d.point(g);
            if (!supp.contains(x)) continue;
            const double a = eta.dot(A1->value(x) - A2->value(x));
            if (a == 0.0) continue;
            s += w[g] * 2.0 * a * std::exp(-kI * xi.dot(x)) * lim.b(x) * std::exp(kI * lim.psi(x));
        }
        part[j] = s;
    });
    cplx total = 0.0;
    for (const cplx& p : part) total += p;
    return total;
}

cplx magnetic_limit_target(const Domain2D& d, const IsozakiFrame& frame, const VectorFn& A1, const VectorFn& A2,
                           double ray_step) {
    return magnetic_limit_target(d, frame.xi, frame.eta, frame.y, A1, A2, ray_step);
}

cplx electric_limit_target(const Domain2D& d, const Vec2& xi, const VectorField2D& A1, const VectorField2D& A2,
                           const RealField& V1, const RealField& V2) {
    require_congruent(d, V1.size(), "V1");
    require_congruent(d, V2.size(), "V2");
    if (A1.a1 != A2.a1 || A1.a2 != A2.a2)
        throw InvalidArgument("electric limit needs identical magnetic potentials");
    const RVec w = d.node_area_weights();
    cplx s = 0.0;
    for (int g = 0; g < d.node_count(); ++g) {
        const double dv = V1[g] - V2[g];
        if (dv != 0.0) s += w[g] * dv * std::exp(-kI * xi.dot(d.point(g)));
    }
    return s;
}

TauSweepResult tau_sweep(const SweepInput& in, const Vec2& xi, const std::vector<double>& taus, LimitMode mode,
                         LimitRoute route) {
    if (!in.first.op || !in.second.op) throw InvalidArgument("tau sweep needs both operators");
    const Domain2D& d = in.first.op->domain;
    if (taus.empty()) throw InvalidArgument("tau ladder is empty");
    for (std::size_t k = 0; k < taus.size(); ++k) {
        check_resolution(d, taus[k], in.resolution_limit);
        if (!(taus[k] > xi.norm())) throw InvalidArgument("every tau must exceed |xi|");
        if (k > 0 && !(taus[k] > taus[k - 1])) throw InvalidArgument("tau ladder must be strictly increasing");
    }
    int K = in.K;
    if (route == LimitRoute::Spectral) {
        if (!in.spec1 || !in.spec2) throw InvalidArgument("spectral route needs both spectral data sets");
        const int avail = std::min(in.spec1->count(), in.spec2->count());
        if (K <= 0) K = avail;
        if (K > avail) throw InvalidArgument("spectral route requests more eigenpairs than available");
    }

    const IsozakiFrame f0 = isozaki_params(xi, taus.front());
    cplx target;
    if (mode == LimitMode::Magnetic)
        target = magnetic_limit_target(d, f0, in.first.A, in.second.A);
    else
        target = electric_limit_target(d, xi, in.first.op->A, in.second.op->A, in.first.op->V, in.second.op->V);

    TauSweepResult res;
    res.table.parameter_name = "tau";
    res.table.metadata["mode"] = mode == LimitMode::Magnetic ? "magnetic" : "electric";
    res.table.metadata["route"] = route == LimitRoute::Direct ? "direct" : "spectral";
    for (double tau : taus) {
        const ProbeSetup probe = make_probe(d, in.first.A, in.second.A, xi, tau, mode == LimitMode::Electric,
                                            in.resolution_limit);
        cplx diff;
        double indicator = 0.0;
        if (route == LimitRoute::Direct) {
            const ScatteringPair s = scattering_pair(*in.first.op, *in.second.op, probe.fields);
            diff = s.S1 - s.S2;
        } else {
            const GStarResult g = g_star(*in.spec1, *in.spec2, probe.frame.lambda, probe.fields.phi1_trace,
                                         probe.fields.phi2_trace, K);
            diff = g.value;
            indicator = g.truncation_indicator;
        }
        if (mode == LimitMode::Magnetic) {
            diff /= probe.frame.sqrt_lambda;
            indicator /= std::abs(probe.frame.sqrt_lambda);
        }
        res.table.add(tau, diff, target);
        res.truncation_indicators.push_back(indicator);
    }
    return res;
}

}  // namespace magbl
