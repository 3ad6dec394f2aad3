#include "magbl/ansatz.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <sstream>

namespace magbl {

IsozakiFrame isozaki_params(const Vec2& xi, double tau) {
    return isozaki_params(xi, tau, xi[0] != 0.0 ? 1 : -1);
}

IsozakiFrame isozaki_params(const Vec2& xi, double tau, int orientation) {
    const double nx = xi.norm();
    if (!(nx > 0.0) || !std::isfinite(nx)) throw InvalidArgument("frame frequency must be nonzero and finite");
    if (!(tau > nx)) {
        std::ostringstream os;
        os << "frame scale tau = " << tau << " must exceed |xi| = " << nx;
        throw InvalidArgument(os.str());
    }
    if (orientation != 1 && orientation != -1) throw InvalidArgument("orientation must be +1 or -1");
    IsozakiFrame f;
    f.xi = xi;
    f.tau = tau;
    f.orientation = orientation;
    f.B = std::sqrt(1.0 - nx * nx / (4.0 * tau * tau));
    f.eta = orientation * Vec2(xi[1], -xi[0]) / nx;
    f.y = xi / nx;
    f.eta1 = f.B * f.eta - xi / (2.0 * tau);
    f.eta2 = f.B * f.eta + xi / (2.0 * tau);
    f.omega = f.B * xi - (nx * nx / (2.0 * tau)) * f.eta;
    f.sqrt_lambda = cplx(tau, 1.0);
    f.lambda = f.sqrt_lambda * f.sqrt_lambda;
    f.delta = std::cbrt(1.0 / tau);
    return f;
}

double mollifier_profile(double r2) {
    if (r2 >= 1.0) return 0.0;
    const double s = 1.0 - r2;
    return s * s * s * s;
}

namespace {

std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

int smooth_size(int n) {
    for (int m = n;; ++m) {
        int r = m;
        for (int p : {2, 3, 5, 7})
            while (r % p == 0) r /= p;
        if (r == 1) return m;
    }
}

/// Real 2D arrays of size ny x nx (row index j) with FFT helpers.
struct Spectrum {
    int nx, ny;
    fftw_complex* data;
    explicit Spectrum(int nx_, int ny_) : nx(nx_), ny(ny_) {
        data = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * static_cast<std::size_t>(ny) * (nx / 2 + 1)));
    }
    ~Spectrum() { fftw_free(data); }
    Spectrum(const Spectrum&) = delete;
    Spectrum& operator=(const Spectrum&) = delete;
    std::size_t size() const { return static_cast<std::size_t>(ny) * (nx / 2 + 1); }
};

struct RealBuffer {
    double* data;
    std::size_t n;
    explicit RealBuffer(std::size_t n_) : n(n_) {
        data = static_cast<double*>(fftw_malloc(sizeof(double) * n));
        std::fill(data, data + n, 0.0);
    }
    ~RealBuffer() { fftw_free(data); }
    RealBuffer(const RealBuffer&) = delete;
    RealBuffer& operator=(const RealBuffer&) = delete;
};

void forward(RealBuffer& in, Spectrum& out) {
    fftw_plan p;
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        p = fftw_plan_dft_r2c_2d(out.ny, out.nx, in.data, out.data, FFTW_ESTIMATE);
    }
    fftw_execute(p);
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(p);
}

/// Inverse transform of a*b, scaled by 1/(nx ny).
void inverse_product(const Spectrum& a, const Spectrum& b, RealBuffer& out) {
    Spectrum prod(a.nx, a.ny);
    const double scale = 1.0 / (static_cast<double>(a.nx) * a.ny);
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double re = a.data[k][0] * b.data[k][0] - a.data[k][1] * b.data[k][1];
        const double im = a.data[k][0] * b.data[k][1] + a.data[k][1] * b.data[k][0];
        prod.data[k][0] = re * scale;
        prod.data[k][1] = im * scale;
    }
    fftw_plan p;
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        p = fftw_plan_dft_c2r_2d(a.ny, a.nx, prod.data, out.data, FFTW_ESTIMATE);
    }
    fftw_execute(p);
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(p);
}

}  // namespace

Vec2 MollifiedPotential::value(const Vec2& x) const { return field ? field->value(x) : Vec2::Zero(); }
Mat2 MollifiedPotential::jacobian(const Vec2& x) const { return field ? field->jacobian(x) : Mat2::Zero(); }
VectorFn MollifiedPotential::as_function() const { return field ? VectorFn(field) : zero_vector(); }

MollifiedPotential mollify(const VectorFn& extension, double delta, double grid_spacing) {
    if (!extension) throw InvalidArgument("mollify needs a field");
    if (!(grid_spacing > 0.0)) throw InvalidArgument("grid spacing must be positive");
    if (!(delta > 2.0 * grid_spacing)) {
        std::ostringstream os;
        os << "mollifier scale delta = " << delta << " is unresolved (needs delta > 2h = " << 2.0 * grid_spacing << ")";
        throw InvalidArgument(os.str());
    }
    MollifiedPotential m;
    m.extension = extension;
    m.delta = delta;
    m.spacing = std::min(grid_spacing / 2.0, delta / 16.0);
    const Box supp = extension->support();
    if (supp.empty) {
        m.support = Box::none();
        return m;
    }
    if (!supp.bounded()) throw InvalidArgument("mollify needs a compactly supported extension");

    const double hm = m.spacing;
    const int r = static_cast<int>(std::ceil(delta / hm));
    const double pad = delta + 3.0 * hm;
    const Vec2 origin = supp.lo.array() - pad;
    const int nx = static_cast<int>(std::ceil((supp.hi[0] - supp.lo[0] + 2.0 * pad) / hm)) + 1;
    const int ny = static_cast<int>(std::ceil((supp.hi[1] - supp.lo[1] + 2.0 * pad) / hm)) + 1;
    const int Nx = smooth_size(nx + 2 * r + 1);
    const int Ny = smooth_size(ny + 2 * r + 1);
    const std::size_t total = static_cast<std::size_t>(Nx) * Ny;

    RealBuffer f1(total), f2(total), k0(total), kx(total), ky(total);
    std::vector<double> s1(static_cast<std::size_t>(nx) * ny), s2(s1.size());
    parallel_for(static_cast<std::size_t>(ny), [&](std::size_t j) {
        for (int i = 0; i < nx; ++i) {
            const Vec2 x(origin[0] + i * hm, origin[1] + static_cast<double>(j) * hm);
            const Vec2 a = supp.contains(x) ? extension->value(x) : Vec2::Zero();
            const std::size_t q = static_cast<std::size_t>(i) + j * nx;
            s1[q] = a[0];
            s2[q] = a[1];
            f1.data[static_cast<std::size_t>(i) + j * Nx] = a[0];
            f2.data[static_cast<std::size_t>(i) + j * Nx] = a[1];
        }
    });
    double mass = 0.0;
    for (int b = -r; b <= r; ++b)
        for (int a = -r; a <= r; ++a) {
            const double u = a * hm / delta, v = b * hm / delta;
            const double r2 = u * u + v * v;
            if (r2 >= 1.0) continue;
            const std::size_t q = static_cast<std::size_t>((a + Nx) % Nx) + static_cast<std::size_t>((b + Ny) % Ny) * Nx;
            const double s = 1.0 - r2;
            k0.data[q] = s * s * s * s;
            const double dprof = -8.0 * s * s * s / delta;  // d/dx_k of the profile is dprof * u_k
            kx.data[q] = dprof * u;
            ky.data[q] = dprof * v;
            mass += k0.data[q];
        }
    const double norm = 1.0 / mass;  // includes the cell area: sum chi * hm^2 = 1
    for (std::size_t q = 0; q < total; ++q) {
        k0.data[q] *= norm;
        kx.data[q] *= norm;
        ky.data[q] *= norm;
    }

    Spectrum F1(Nx, Ny), F2(Nx, Ny), K0(Nx, Ny), KX(Nx, Ny), KY(Nx, Ny);
    forward(f1, F1);
    forward(f2, F2);
    forward(k0, K0);
    forward(kx, KX);
    forward(ky, KY);

    GridField out[6];
    const Spectrum* fs[2] = {&F1, &F2};
    const Spectrum* ks[3] = {&K0, &KX, &KY};
    for (int c = 0; c < 2; ++c)
        for (int k = 0; k < 3; ++k) {
            RealBuffer res(total);
            inverse_product(*fs[c], *ks[k], res);
            GridField g(origin, hm, hm, nx, ny);
            for (int j = 0; j < ny; ++j)
                for (int i = 0; i < nx; ++i) g.at(i, j) = res.data[static_cast<std::size_t>(i) + static_cast<std::size_t>(j) * Nx];
            out[c * 3 + k] = std::move(g);
        }

    double dist = 0.0, first = 0.0, second = 0.0;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const std::size_t q = static_cast<std::size_t>(i) + static_cast<std::size_t>(j) * nx;
            dist = std::max(dist, std::hypot(out[0].at(i, j) - s1[q], out[3].at(i, j) - s2[q]));
            for (int c = 0; c < 2; ++c)
                for (int k = 1; k < 3; ++k) {
                    const GridField& dg = out[c * 3 + k];
                    first = std::max(first, std::abs(dg.at(i, j)));
                    if (i + 1 < nx) second = std::max(second, std::abs(dg.at(i + 1, j) - dg.at(i, j)) / hm);
                    if (j + 1 < ny) second = std::max(second, std::abs(dg.at(i, j + 1) - dg.at(i, j)) / hm);
                }
        }
    m.sup_distance = dist;
    m.sup_first = first;
    m.sup_second = second;
    m.support = supp.expanded(delta);
    auto field = std::make_shared<GridVectorFunction>(std::move(out[0]), std::move(out[3]), std::move(out[1]),
                                                      std::move(out[2]), std::move(out[4]), std::move(out[5]));
    field->set_support(m.support);
    m.field = std::move(field);
    return m;
}

VectorFn extension_first(const VectorFn& A1) { return A1; }

VectorFn extension_second(const Domain2D& d, const VectorFn& A1, const VectorFn& A2) {
    const Box omega{Vec2(d.x0, d.y0), Vec2(d.x0 + d.L1, d.y0 + d.L2), false};
    return piecewise(omega, A2, A1);
}

namespace {

/// Parameter interval of the line x + s dir inside the box, intersected with [lo, hi].
bool clip_ray(const Box& box, const Vec2& x, const Vec2& dir, double& lo, double& hi) {
    if (box.empty) return false;
    for (int k = 0; k < 2; ++k) {
        if (dir[k] == 0.0) {
            if (x[k] < box.lo[k] || x[k] > box.hi[k]) return false;
            continue;
        }
        double a = (box.lo[k] - x[k]) / dir[k], b = (box.hi[k] - x[k]) / dir[k];
        if (a > b) std::swap(a, b);
        lo = std::max(lo, a);
        hi = std::min(hi, b);
    }
    return hi > lo;
}

template <class F>
double simpson_ray(F&& f, const Box& support, const Vec2& x, const Vec2& dir, double lower, double upper,
                   double max_step) {
    double lo = lower, hi = upper;
    if (!clip_ray(support, x, dir, lo, hi)) return 0.0;
    int n = static_cast<int>(std::ceil((hi - lo) / max_step));
    if (n < 2) n = 2;
    if (n % 2) ++n;
    const double h = (hi - lo) / n;
    double s = f(x + lo * dir) + f(x + hi * dir);
    for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(x + (lo + k * h) * dir);
    return s * h / 3.0;
}

/// Grid samples of dir . A_sharp on the potential's own auxiliary grid.
GridField projection(const MollifiedPotential& m, const Vec2& dir) {
    const GridField& a = m.field->component(0);
    const GridField& b = m.field->component(1);
    GridField g(a.origin(), a.h1(), a.h2(), a.nx(), a.ny());
    for (std::size_t q = 0; q < g.data().size(); ++q) g.data()[q] = dir[0] * a.data()[q] + dir[1] * b.data()[q];
    return g;
}

/// Grid samples of dir^T J y where J is the Jacobian of A_sharp.
GridField slope(const MollifiedPotential& m, const Vec2& dir, const Vec2& y) {
    const GridField& ref = m.field->component(0);
    GridField g(ref.origin(), ref.h1(), ref.h2(), ref.nx(), ref.ny());
    for (std::size_t q = 0; q < g.data().size(); ++q) {
        double s = 0.0;
        for (int c = 0; c < 2; ++c)
            for (int k = 0; k < 2; ++k) s += dir[c] * m.field->derivative(c, k).data()[q] * y[k];
        g.data()[q] = s;
    }
    return g;
}

bool same_geometry(const GridField& a, const GridField& b) {
    return a.nx() == b.nx() && a.ny() == b.ny() && a.h1() == b.h1() && a.h2() == b.h2() && a.origin() == b.origin();
}

/// a - b on a common grid (resampled when the geometries differ).
GridField difference(const GridField& a, const GridField& b) {
    if (same_geometry(a, b)) {
        GridField g = a;
        for (std::size_t q = 0; q < g.data().size(); ++q) g.data()[q] -= b.data()[q];
        return g;
    }
    const Box e = a.extent().united(b.extent());
    const double h = std::min(a.h1(), b.h1());
    const int nx = static_cast<int>(std::ceil((e.hi[0] - e.lo[0]) / h)) + 1;
    const int ny = static_cast<int>(std::ceil((e.hi[1] - e.lo[1]) / h)) + 1;
    GridField g(e.lo, h, h, nx, ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) g.at(i, j) = a.value(g.point(i, j)) - b.value(g.point(i, j));
    return g;
}

}  // namespace

double ray_integral(const std::function<double(const Vec2&)>& f, const Box& support, const Vec2& x, const Vec2& dir,
                    double lower, double upper, double max_step) {
    if (!(max_step > 0.0)) throw InvalidArgument("ray quadrature step must be positive");
    return simpson_ray(f, support, x, dir, lower, upper, max_step);
}

double transport_phase(const MollifiedPotential& A, const Vec2& dir, const Vec2& x, double max_step) {
    if (!A.field) return 0.0;
    const double inf = std::numeric_limits<double>::infinity();
    return -ray_integral([&](const Vec2& p) { return dir.dot(A.field->value(p)); }, A.support, x, dir, -inf, 0.0,
                         max_step);
}

AmplitudeField::AmplitudeField(const IsozakiFrame& frame, const MollifiedPotential& A1, const MollifiedPotential& A2,
                               double max_step)
    : frame_(frame), step_(max_step) {
    if (!(max_step > 0.0)) throw InvalidArgument("ray quadrature step must be positive");
    if (!A1.field && !A2.field) return;
    zero_ = false;
    if (A1.field && A2.field) {
        proj_ = difference(projection(A2, frame.eta2), projection(A1, frame.eta2));
        slope_ = difference(slope(A2, frame.eta2, frame.y), slope(A1, frame.eta2, frame.y));
        support_ = A1.support.united(A2.support);
    } else if (A2.field) {
        proj_ = projection(A2, frame.eta2);
        slope_ = slope(A2, frame.eta2, frame.y);
        support_ = A2.support;
    } else {
        proj_ = projection(A1, frame.eta2);
        slope_ = slope(A1, frame.eta2, frame.y);
        for (double& v : proj_.data()) v = -v;
        for (double& v : slope_.data()) v = -v;
        support_ = A1.support;
    }
}

cplx AmplitudeField::operator()(const Vec2& x) const {
    const double wy = frame_.omega.dot(frame_.y);
    if (zero_) return cplx(0.0, -wy);
    const double inf = std::numeric_limits<double>::infinity();
    const Vec2& d = frame_.eta2;
    const double I = simpson_ray([&](const Vec2& p) { return proj_.value(p); }, support_, x, d, -inf, inf, step_);
    const double J = simpson_ray([&](const Vec2& p) { return slope_.value(p); }, support_, x, d, -inf, inf, step_);
    return cplx(0.0, -(wy + J)) * std::exp(cplx(0.0, -I));
}

LimitAmplitude::LimitAmplitude(const Vec2& xi, const Vec2& eta, const Vec2& y, VectorFn A1, VectorFn A2,
                               double max_step)
    : xi_(xi), eta_(eta), y_(y), A1_(std::move(A1)), A2_(std::move(A2)), step_(max_step) {
    if (!(max_step > 0.0)) throw InvalidArgument("ray quadrature step must be positive");
    support_ = A1_->support().united(A2_->support());
    if (!support_.bounded()) throw InvalidArgument("limit amplitude needs compactly supported potentials");
}

double LimitAmplitude::full_ray(const Vec2& x) const {
    const double inf = std::numeric_limits<double>::infinity();
    return simpson_ray([&](const Vec2& p) { return eta_.dot(A2_->value(p) - A1_->value(p)); }, support_, x, eta_,
                       -inf, inf, step_);
}

cplx LimitAmplitude::b(const Vec2& x) const {
    const double inf = std::numeric_limits<double>::infinity();
    const double I = full_ray(x);
    const double J = simpson_ray(
        [&](const Vec2& p) { return eta_.dot((A2_->jacobian(p) - A1_->jacobian(p)) * y_); }, support_, x, eta_, -inf,
        inf, step_);
    return cplx(0.0, -(xi_.dot(y_) + J)) * std::exp(cplx(0.0, -I));
}

double LimitAmplitude::psi(const Vec2& x) const {
    const double inf = std::numeric_limits<double>::infinity();
    return simpson_ray([&](const Vec2& p) { return eta_.dot(A2_->value(p) - A1_->value(p)); }, support_, x, eta_, -inf,
                       0.0, step_);
}

double default_ray_step(const Domain2D& d, const IsozakiFrame& frame) {
    return std::min(std::min(d.h1, d.h2), frame.delta / 4.0);
}

AnsatzFields build_ansatz(const Domain2D& d, const IsozakiFrame& frame, const MollifiedPotential& A1,
                          const MollifiedPotential& A2, const AnsatzOptions& opt) {
    const double step = opt.max_step > 0.0 ? opt.max_step : default_ray_step(d, frame);
    AnsatzFields a;
    a.frame = frame;
    a.unit_amplitude = opt.unit_amplitude;
    a.ext_n1 = d.N1 + 2;
    a.ext_n2 = d.N2 + 2;
    const std::size_t ne = static_cast<std::size_t>(a.ext_n1) * a.ext_n2;
    a.psi1 = RVec::Zero(static_cast<Eigen::Index>(ne));
    a.psi2 = RVec::Zero(static_cast<Eigen::Index>(ne));
    a.b2 = CVec::Ones(static_cast<Eigen::Index>(ne));

    const double inf = std::numeric_limits<double>::infinity();
    GridField p1, p2;
    if (A1.field) p1 = projection(A1, frame.eta1);
    if (A2.field) p2 = projection(A2, frame.eta2);
    std::unique_ptr<AmplitudeField> amp;
    if (!opt.unit_amplitude) amp = std::make_unique<AmplitudeField>(frame, A1, A2, step);

    parallel_for(ne, [&](std::size_t q) {
        const int i = static_cast<int>(q % a.ext_n1) - 1;
        const int j = static_cast<int>(q / a.ext_n1) - 1;
        const Vec2 x(d.x0 + i * d.h1, d.y0 + j * d.h2);
        if (A1.field)
            a.psi1[q] = -simpson_ray([&](const Vec2& p) { return p1.value(p); }, A1.support, x, frame.eta1, -inf, 0.0,
                                     step);
        if (A2.field)
            a.psi2[q] = -simpson_ray([&](const Vec2& p) { return p2.value(p); }, A2.support, x, frame.eta2, -inf, 0.0,
                                     step);
        if (amp) a.b2[q] = (*amp)(x);
    });

    a.phi1.resize(d.node_count());
    a.phi2.resize(d.node_count());
    for (int g = 0; g < d.node_count(); ++g) {
        const Vec2 x = d.point(g);
        const int q = a.ext(d.col(g), d.row(g));
        a.phi1[g] = std::exp(kI * (frame.sqrt_lambda * frame.eta1.dot(x) + a.psi1[q]));
        a.phi2[g] = std::exp(-kI * (frame.sqrt_lambda * frame.eta2.dot(x) + a.psi2[q])) * a.b2[q];
    }
    a.phi1_trace = make_boundary_function(d, boundary_trace(d, a.phi1));
    a.phi2_trace = make_boundary_function(d, boundary_trace(d, a.phi2));
    return a;
}

AnsatzSample evaluate_ansatz(const AnsatzFields& fields, AnsatzKind which) {
    if (which == AnsatzKind::First) return {fields.phi1_trace, fields.phi1};
    return {fields.phi2_trace, fields.phi2};
}

}  // namespace magbl
