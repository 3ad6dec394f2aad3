#include "magbl/recovery.hpp"

#include "magbl/io.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

namespace magbl {

Vec2 FourierGrid::xi(int k) const {
    return {2.0 * kPi * index[k][0] / L1, 2.0 * kPi * index[k][1] / L2};
}

int FourierGrid::find(int m, int n) const {
    if (std::abs(m) > modes || std::abs(n) > modes || (m == 0 && n == 0)) return -1;
    // row-major over n then m, with the origin removed
    int pos = (n + modes) * (2 * modes + 1) + (m + modes);
    const int origin = modes * (2 * modes + 1) + modes;
    return pos > origin ? pos - 1 : pos;
}

void FourierGrid::enforce_conjugate_symmetry() {
    double amax = 0.0, asym = 0.0;
    for (int k = 0; k < size(); ++k) {
        amax = std::max(amax, std::abs(values[k]));
        const int mk = find(-index[k][0], -index[k][1]);
        asym = std::max(asym, std::abs(values[mk] - std::conj(values[k])));
    }
    asymmetry = amax > 0.0 ? asym / amax : 0.0;
    CVec sym(values.size());
    for (int k = 0; k < size(); ++k) {
        const int mk = find(-index[k][0], -index[k][1]);
        sym[k] = 0.5 * (values[k] + std::conj(values[mk]));
    }
    values = sym;
}

FourierGrid make_fourier_grid(const Domain2D& d, int modes) {
    if (modes < 1) throw InvalidArgument("Fourier grid needs at least one mode per axis");
    FourierGrid g;
    g.modes = modes;
    g.L1 = d.L1;
    g.L2 = d.L2;
    for (int n = -modes; n <= modes; ++n)
        for (int m = -modes; m <= modes; ++m)
            if (m != 0 || n != 0) g.index.push_back({m, n});
    g.values = CVec::Zero(g.size());
    return g;
}

RealField inverse_transform(const Domain2D& d, const FourierGrid& g, cplx zero_value) {
    RealField f(d.node_count());
    const double area = d.L1 * d.L2;
    parallel_for(static_cast<std::size_t>(d.node_count()), [&](std::size_t q) {
        const Vec2 x = d.point(static_cast<int>(q));
        cplx s = zero_value;
        for (int k = 0; k < g.size(); ++k) s += g.values[k] * std::exp(kI * g.xi(k).dot(x));
        f[static_cast<Eigen::Index>(q)] = s.real() / area;
    });
    return f;
}

cplx fourier_coefficient(const Domain2D& d, const RealField& f, const Vec2& xi) {
    require_congruent(d, f.size(), "field");
    const RVec w = d.node_area_weights();
    cplx s = 0.0;
    for (int g = 0; g < d.node_count(); ++g)
        if (f[g] != 0.0) s += w[g] * f[g] * std::exp(-kI * xi.dot(d.point(g)));
    return s;
}

RayIdentity ray_transform_identity(const Domain2D& d, const Vec2& xi, const VectorFn& A_diff, double ray_step) {
    const IsozakiFrame fr = isozaki_params(xi, 2.0 * xi.norm() + 1.0);
    const double step = ray_step > 0.0 ? ray_step : std::min(d.h1, d.h2) / 2.0;
    RayIdentity r;
    const Box supp = A_diff->support();
    if (supp.empty) return r;
    const LimitAmplitude lim(xi, fr.eta, fr.y, zero_vector(), A_diff, step);
    const RVec w = d.node_area_weights();
    for (int g = 0; g < d.node_count(); ++g) {
        const Vec2 x = d.point(g);
        if (!supp.contains(x)) continue;
        const double a = fr.eta.dot(A_diff->value(x));
        if (a == 0.0) continue;
        r.lhs += w[g] * a * std::exp(-kI * xi.dot(x)) * lim.b(x) * std::exp(kI * lim.psi(x));
    }
    // x' = s y runs over the line orthogonal to eta; only |s| below the support radius contributes
    const double R = std::max({std::abs(supp.lo[0]), std::abs(supp.hi[0]), std::abs(supp.lo[1]), std::abs(supp.hi[1])}) *
                     std::sqrt(2.0);
    int n = static_cast<int>(std::ceil(2.0 * R / step));
    if (n % 2) ++n;
    const double hs = 2.0 * R / n;
    cplx s = 0.0;
    for (int k = 0; k <= n; ++k) {
        const Vec2 x = (-R + k * hs) * fr.y;
        const double wk = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        s += wk * (std::exp(kI * lim.full_ray(x)) - 1.0) * lim.b(x) * std::exp(-kI * xi.dot(x));
    }
    r.rhs = -kI * s * hs / 3.0;
    return r;
}

namespace {

double l2(const Domain2D& d, const RealField& f) {
    const RVec w = d.node_area_weights();
    return std::sqrt((w.array() * f.array().square()).sum());
}

/// Fills xi = 0 from the axis values at |m| = 1, 2, 3 (quadratic in |xi|^2).
cplx extrapolate_zero(const FourierGrid& g) {
    if (g.modes < 3) throw InvalidArgument("zero-frequency extrapolation needs at least 3 modes per axis");
    const double w[3] = {1.5, -0.6, 0.1};
    cplx s = 0.0;
    for (int k = 1; k <= 3; ++k) {
        const cplx avg = 0.25 * (g.values[g.find(k, 0)] + g.values[g.find(-k, 0)] + g.values[g.find(0, k)] +
                                 g.values[g.find(0, -k)]);
        s += w[k - 1] * avg;
    }
    return cplx(s.real(), 0.0);
}

struct SpectralMeasurement {
    cplx raw{0, 0};
    cplx fitted{0, 0};
    double indicator = 0.0;
};

/// Measures the limit quantity for one xi from spectral data along the tau ladder.
SpectralMeasurement measure_spectral(const RecoverySource& src, const Vec2& xi, const std::vector<double>& taus,
                                     bool magnetic, double limit) {
    const Domain2D& d = *src.domain;
    const int avail = std::min(src.spec1->count(), src.spec2->count());
    const int K = src.K > 0 ? std::min(src.K, avail) : avail;
    const VectorFn A2 = src.A_ansatz_second ? src.A_ansatz_second : src.A2;
    std::vector<cplx> vals;
    SpectralMeasurement m;
    for (double tau : taus) {
        const ProbeSetup p = make_probe(d, src.A1, A2, xi, tau, !magnetic, limit);
        const GStarResult g = g_star(*src.spec1, *src.spec2, p.frame.lambda, p.fields.phi1_trace,
                                     p.fields.phi2_trace, K);
        cplx v = g.value;
        double ind = g.truncation_indicator;
        if (magnetic) {
            v /= p.frame.sqrt_lambda;
            ind /= std::abs(p.frame.sqrt_lambda);
        }
        vals.push_back(v);
        m.indicator = ind;
    }
    m.raw = vals.back();
    if (vals.size() < 2) {
        m.fitted = m.raw;
        return m;
    }
    // least squares v = a + b / tau
    double s1 = 0, sx = 0, sxx = 0;
    cplx sy = 0, sxy = 0;
    for (std::size_t k = 0; k < vals.size(); ++k) {
        const double x = 1.0 / taus[k];
        s1 += 1;
        sx += x;
        sxx += x * x;
        sy += vals[k];
        sxy += x * vals[k];
    }
    const double det = s1 * sxx - sx * sx;
    m.fitted = (sxx * sy - sx * sxy) / det;
    return m;
}

std::vector<double> spectral_taus(const Domain2D& d, const RecoveryOptions& opt) {
    if (!opt.taus.empty()) return opt.taus;
    return {std::floor(max_admissible_tau(d, opt.resolution_limit))};
}

void finish(const Domain2D& d, RecoveryReport& r, double fallback_scale, bool with_zero) {
    r.data.enforce_conjugate_symmetry();
    const double fit_asym = r.fitted.asymmetry;
    r.fitted.enforce_conjugate_symmetry();
    (void)fit_asym;
    cplx z = 0.0, zf = 0.0;
    if (with_zero) {
        z = extrapolate_zero(r.data);
        zf = extrapolate_zero(r.fitted);
    }
    r.zero_value = z;
    r.estimate = inverse_transform(d, r.data, z);
    r.fitted_estimate = inverse_transform(d, r.fitted, zf);
    const double nref = l2(d, r.reference);
    r.reference_scale = nref > 1e-12 * fallback_scale && nref > 0.0 ? nref : fallback_scale;
    if (!(r.reference_scale > 0.0)) r.reference_scale = 1.0;
    r.rel_l2_error = l2(d, r.estimate - r.reference) / r.reference_scale;
    r.fitted_rel_l2_error = l2(d, r.fitted_estimate - r.reference) / r.reference_scale;
}

void check_source(const RecoverySource& src, const RecoveryOptions& opt) {
    if (!src.domain || !src.A1 || !src.A2 || !src.V1 || !src.V2) throw InvalidArgument("recovery source incomplete");
    if (opt.mode == RecoveryMode::Spectral && (!src.spec1 || !src.spec2))
        throw InvalidArgument("spectral recovery needs both spectral data sets");
}

}  // namespace

RecoveryReport recover_curl(const RecoverySource& src, const RecoveryOptions& opt) {
    check_source(src, opt);
    const Domain2D& d = *src.domain;
    RecoveryReport r;
    r.quantity = "curl";
    r.data = make_fourier_grid(d, opt.modes);
    r.fitted = r.data;
    const VectorField2D a1 = sample_vector(d, *src.A1), a2 = sample_vector(d, *src.A2);
    VectorField2D diff;
    diff.a1 = a1.a1 - a2.a1;
    diff.a2 = a1.a2 - a2.a2;
    r.reference = curl(d, diff);
    const double scale = std::max(l2(d, curl(d, a1)), l2(d, curl(d, a2)));

    const int n = r.data.size();
    std::vector<cplx> oracle(n), measured(n), fitted(n);
    std::vector<double> ind(n, 0.0);
    const std::vector<double> taus =
        opt.mode == RecoveryMode::Spectral ? spectral_taus(d, opt) : std::vector<double>{};
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t k) {
        const Vec2 xi = r.data.xi(static_cast<int>(k));
        const IsozakiFrame fr = isozaki_params(xi, 2.0 * xi.norm() + 1.0);
        const double sig = fr.orientation;
        oracle[k] = magnetic_limit_target(d, fr, src.A1, src.A2) / (2.0 * sig);
        if (opt.mode == RecoveryMode::Spectral) {
            const SpectralMeasurement m = measure_spectral(src, xi, taus, true, opt.resolution_limit);
            measured[k] = m.raw / (2.0 * sig);
            fitted[k] = m.fitted / (2.0 * sig);
            ind[k] = m.indicator / 2.0;
        } else {
            measured[k] = oracle[k];
            fitted[k] = oracle[k];
        }
    });
    for (int k = 0; k < n; ++k) {
        r.data.values[k] = measured[k];
        r.fitted.values[k] = fitted[k];
    }
    if (opt.mode == RecoveryMode::Spectral) {
        r.oracle = oracle;
        r.indicators = ind;
        for (int k = 0; k < n; ++k) r.gap.push_back(std::abs(measured[k] - oracle[k]));
    }
    finish(d, r, scale, false);
    return r;
}

RecoveryReport recover_potential(const RecoverySource& src, const RecoveryOptions& opt) {
    check_source(src, opt);
    const Domain2D& d = *src.domain;
    RecoveryReport r;
    r.quantity = "potential";
    r.data = make_fourier_grid(d, opt.modes);
    r.fitted = r.data;
    const RealField v1 = sample_scalar(d, *src.V1), v2 = sample_scalar(d, *src.V2);
    r.reference = v1 - v2;
    const double scale = std::max(l2(d, v1), l2(d, v2));
    if (opt.mode == RecoveryMode::Oracle) {
        // the electric limit presumes identical magnetic potentials
        const VectorField2D a1 = sample_vector(d, *src.A1), a2 = sample_vector(d, *src.A2);
        if (a1.a1 != a2.a1 || a1.a2 != a2.a2)
            throw InvalidArgument("potential recovery needs identical magnetic potentials");
    }
    const int n = r.data.size();
    std::vector<cplx> oracle(n), measured(n), fitted(n);
    std::vector<double> ind(n, 0.0);
    const std::vector<double> taus =
        opt.mode == RecoveryMode::Spectral ? spectral_taus(d, opt) : std::vector<double>{};
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t k) {
        const Vec2 xi = r.data.xi(static_cast<int>(k));
        oracle[k] = fourier_coefficient(d, r.reference, xi);
        if (opt.mode == RecoveryMode::Spectral) {
            const SpectralMeasurement m = measure_spectral(src, xi, taus, false, opt.resolution_limit);
            measured[k] = m.raw;
            fitted[k] = m.fitted;
            ind[k] = m.indicator;
        } else {
            measured[k] = oracle[k];
            fitted[k] = oracle[k];
        }
    });
    for (int k = 0; k < n; ++k) {
        r.data.values[k] = measured[k];
        r.fitted.values[k] = fitted[k];
    }
    if (opt.mode == RecoveryMode::Spectral) {
        r.oracle = oracle;
        r.indicators = ind;
        for (int k = 0; k < n; ++k) r.gap.push_back(std::abs(measured[k] - oracle[k]));
    }
    finish(d, r, scale, true);
    return r;
}

namespace {

nlohmann::ordered_json cjson(cplx z) { return nlohmann::ordered_json::array({z.real(), z.imag()}); }

nlohmann::ordered_json comparison_json(const SpectralComparison& c) {
    nlohmann::ordered_json j;
    j["pairs_compared"] = c.pairs_compared;
    j["clusters"] = c.clusters;
    j["max_eigen_gap"] = c.max_eigen_gap;
    j["max_rel_eigen_gap"] = c.max_rel_eigen_gap;
    j["trace_distance_sum"] = c.trace_distance_sum;
    j["max_rel_trace_distance"] = c.max_rel_trace_distance;
    j["max_principal_angle"] = c.max_principal_angle;
    return j;
}

nlohmann::ordered_json report_json(const RecoveryReport& r) {
    nlohmann::ordered_json j;
    j["quantity"] = r.quantity;
    j["modes"] = r.data.modes;
    j["rel_l2_error"] = r.rel_l2_error;
    j["fitted_rel_l2_error"] = r.fitted_rel_l2_error;
    j["reference_scale"] = r.reference_scale;
    j["asymmetry_before_enforcement"] = r.data.asymmetry;
    j["zero_value"] = cjson(r.zero_value);
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (int k = 0; k < r.data.size(); ++k) {
        nlohmann::ordered_json e;
        e["m"] = r.data.index[k][0];
        e["n"] = r.data.index[k][1];
        e["value"] = cjson(r.data.values[k]);
        if (!r.oracle.empty()) {
            e["fitted"] = cjson(r.fitted.values[k]);
            e["oracle"] = cjson(r.oracle[k]);
            e["gap"] = r.gap[k];
            e["truncation_indicator"] = r.indicators[k];
        }
        rows.push_back(e);
    }
    j["per_xi"] = rows;
    return j;
}

}  // namespace

std::string RecoveryReport::to_json() const { return report_json(*this).dump(2) + "\n"; }

std::string field_csv(const Domain2D& d, const RealField& f) {
    require_congruent(d, f.size(), "field");
    std::ostringstream os;
    os << "x1,x2,value\n";
    for (int g = 0; g < d.node_count(); ++g) {
        const Vec2 x = d.point(g);
        os << format_double(x[0]) << ',' << format_double(x[1]) << ',' << format_double(f[g]) << '\n';
    }
    return os.str();
}

std::string UniquenessReport::to_json() const {
    nlohmann::ordered_json j;
    j["pass"] = pass;
    j["failed_stage"] = failed_stage;
    j["diagnostics"] = comparison_json(diagnostics);
    j["curl"] = report_json(curl);
    j["curl_pass"] = curl_pass;
    j["gauge_stage_run"] = gauge_stage_run;
    j["gauge_certificate"] = gauge_certificate;
    j["gauge_curl_ratio"] = gauge_curl_ratio;
    j["gauge_pass"] = gauge_pass;
    j["gauge_boundary_rel"] = gauge_boundary_rel;
    j["aligned_vs_first"] = comparison_json(aligned);
    if (gauge_stage_run) j["potential"] = report_json(potential);
    j["potential_pass"] = potential_pass;
    return j.dump(2) + "\n";
}

UniquenessReport uniqueness_sweep(const Domain2D& d, const OperatorPreset& first, const OperatorPreset& second,
                                  const UniquenessOptions& opt) {
    UniquenessReport r;
    const SampledPreset s1 = sample_preset(d, first), s2 = sample_preset(d, second);
    const CollarReport collar = check_collar(s1.A, s2.A, d);
    if (!collar.pass) {
        std::ostringstream os;
        os << "magnetic potentials differ on the collar (max difference " << collar.max_difference << ")";
        throw InvalidArgument(os.str());
    }
    const MagneticOperator op1 = assemble(d, s1.A, s1.V);
    const MagneticOperator op2 = assemble(d, s2.A, s2.V);
    const int n = op1.interior_count();
    const int K = opt.eigenpairs > 0 ? std::min(opt.eigenpairs, n) : n;
    const int Kx = std::min(n, K + (K < n ? 8 : 0));
    const BoundarySpectralData spec1 = eigensolve(op1, Kx, opt.eig);
    const BoundarySpectralData spec2 = eigensolve(op2, Kx, opt.eig);

    // (i) spectral diagnostics
    r.diagnostics = compare_spectral_data(spec1, spec2, K);

    // (ii) magnetic recovery purely from boundary spectral data
    RecoveryOptions ro;
    ro.mode = RecoveryMode::Spectral;
    ro.modes = opt.modes;
    ro.taus = opt.taus;
    RecoverySource src;
    src.domain = &d;
    src.A1 = s1.A_fn;
    src.A2 = s2.A_fn;
    src.V1 = s1.V_fn;
    src.V2 = s2.V_fn;
    src.spec1 = &spec1;
    src.spec2 = &spec2;
    src.K = K;
    r.curl = recover_curl(src, ro);
    const RealField est = r.curl.estimate;
    const RVec w = d.node_area_weights();
    const double est_norm = std::sqrt((w.array() * est.array().square()).sum());
    r.curl_pass = est_norm / r.curl.reference_scale < opt.curl_tolerance;
    if (!r.curl_pass) {
        r.failed_stage = "magnetic recovery";
        return r;
    }

    // (iii) gauge alignment of the second potential onto the first
    GaugeFunction gf;
    try {
        gf = gauge_function(d, combine(1.0, s2.A_fn, -1.0, s1.A_fn));
    } catch (const InvalidArgument&) {
        r.failed_stage = "gauge alignment";
        return r;
    }
    r.gauge_stage_run = true;
    r.gauge_certificate = gf.certificate;
    r.gauge_curl_ratio = gf.curl_ratio;
    // operator 3 = e^{ip} H2 e^{-ip} carries the potential A2 - grad p = A1 and, with p = 0 on
    // the boundary, exactly the boundary spectral data of H2
    const BoundarySpectralData spec3 = gauge_conjugate(d, spec2, gf.p);
    r.aligned = compare_spectral_data(spec3, spec1, K);
    const double pmax = gf.p.cwiseAbs().maxCoeff();
    r.gauge_boundary_rel = pmax > 0.0 ? gf.boundary_trace.cwiseAbs().maxCoeff() / pmax : 0.0;
    r.gauge_pass = r.gauge_boundary_rel <= opt.gauge_boundary_tolerance;
    if (!r.gauge_pass) {
        r.failed_stage = "gauge alignment";
        return r;
    }

    // (iv) electric recovery on the aligned pair
    RecoverySource esrc = src;
    esrc.A2 = s1.A_fn;
    esrc.A_ansatz_second = s1.A_fn;
    esrc.spec2 = &spec3;
    RecoveryOptions eo = ro;
    eo.modes = std::max(3, opt.modes);
    r.potential = recover_potential(esrc, eo);
    const RealField vest = r.potential.estimate;
    const RealField vref = r.potential.reference;
    const double verr = std::sqrt((w.array() * (vest - vref).array().square()).sum());
    r.potential_pass = verr / r.potential.reference_scale < opt.potential_tolerance;
    if (!r.potential_pass) {
        r.failed_stage = "electric recovery";
        return r;
    }
    r.pass = true;
    return r;
}

}  // namespace magbl
