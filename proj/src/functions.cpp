#include "magbl/functions.hpp"

#include <algorithm>
#include <cmath>

namespace magbl {

Box Box::everywhere() {
    const double inf = std::numeric_limits<double>::infinity();
    return {Vec2(-inf, -inf), Vec2(inf, inf), false};
}

bool Box::bounded() const {
    return empty || (std::isfinite(lo[0]) && std::isfinite(lo[1]) && std::isfinite(hi[0]) && std::isfinite(hi[1]));
}

Box Box::expanded(double r) const {
    if (empty) return *this;
    return {lo.array() - r, hi.array() + r, false};
}

Box Box::united(const Box& other) const {
    if (empty) return other;
    if (other.empty) return *this;
    return {lo.cwiseMin(other.lo), hi.cwiseMax(other.hi), false};
}

bool Box::contains(const Vec2& x) const {
    return !empty && x[0] >= lo[0] && x[0] <= hi[0] && x[1] >= lo[1] && x[1] <= hi[1];
}

double PowerBump::value(const Vec2& x) const {
    const double s = (x - center).squaredNorm() / (radius * radius);
    return s >= 1.0 ? 0.0 : std::pow(1.0 - s, power);
}

Vec2 PowerBump::gradient(const Vec2& x) const {
    const Vec2 d = x - center;
    const double R2 = radius * radius;
    const double s = d.squaredNorm() / R2;
    if (s >= 1.0) return Vec2::Zero();
    const double db = -power * std::pow(1.0 - s, power - 1.0);
    return db * 2.0 * d / R2;
}

Mat2 PowerBump::hessian(const Vec2& x) const {
    const Vec2 d = x - center;
    const double R2 = radius * radius;
    const double s = d.squaredNorm() / R2;
    if (s >= 1.0) return Mat2::Zero();
    const double db = -power * std::pow(1.0 - s, power - 1.0);
    const double ddb = power * (power - 1.0) * std::pow(1.0 - s, power - 2.0);
    return ddb * 4.0 * d * d.transpose() / (R2 * R2) + db * 2.0 / R2 * Mat2::Identity();
}

namespace {

struct WindowProfile {
    double w, dw, ddw;  // value and radial derivatives
};

WindowProfile window_profile(double r, double r0, double r1) {
    if (r <= r0) return {1.0, 0.0, 0.0};
    if (r >= r1) return {0.0, 0.0, 0.0};
    const double L = r1 - r0;
    const double t = (r - r0) / L;
    const double S = t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
    const double dS = 30.0 * t * t * (1.0 - t) * (1.0 - t);
    const double ddS = 60.0 * t - 180.0 * t * t + 120.0 * t * t * t;
    return {1.0 - S, -dS / L, -ddS / (L * L)};
}

}  // namespace

double RadialWindow::value(const Vec2& x) const { return window_profile((x - center).norm(), r0, r1).w; }

Vec2 RadialWindow::gradient(const Vec2& x) const {
    const Vec2 d = x - center;
    const double r = d.norm();
    const WindowProfile p = window_profile(r, r0, r1);
    if (p.dw == 0.0 || r == 0.0) return Vec2::Zero();
    return p.dw * d / r;
}

Mat2 RadialWindow::hessian(const Vec2& x) const {
    const Vec2 d = x - center;
    const double r = d.norm();
    if (r <= r0 || r >= r1 || r == 0.0) return Mat2::Zero();
    const WindowProfile p = window_profile(r, r0, r1);
    const Mat2 P = d * d.transpose() / (r * r);
    return p.ddw * P + p.dw / r * (Mat2::Identity() - P);
}

namespace {

class ZeroVector final : public VectorFunction {
public:
    Vec2 value(const Vec2&) const override { return Vec2::Zero(); }
    Mat2 jacobian(const Vec2&) const override { return Mat2::Zero(); }
    Box support() const override { return Box::none(); }
};

class ConstantScalar final : public ScalarFunction {
public:
    explicit ConstantScalar(double c) : c_(c) {}
    double value(const Vec2&) const override { return c_; }
    Vec2 gradient(const Vec2&) const override { return Vec2::Zero(); }
    Mat2 hessian(const Vec2&) const override { return Mat2::Zero(); }
    Box support() const override { return c_ == 0.0 ? Box::none() : Box::everywhere(); }

private:
    double c_;
};

class BumpScalar final : public ScalarFunction {
public:
    BumpScalar(double amp, PowerBump b) : amp_(amp), b_(b) {}
    double value(const Vec2& x) const override { return amp_ * b_.value(x); }
    Vec2 gradient(const Vec2& x) const override { return amp_ * b_.gradient(x); }
    Mat2 hessian(const Vec2& x) const override { return amp_ * b_.hessian(x); }
    Box support() const override { return amp_ == 0.0 ? Box::none() : Box::around(b_.center, b_.radius); }

private:
    double amp_;
    PowerBump b_;
};

class GaussianScalar final : public ScalarFunction {
public:
    GaussianScalar(double amp, Vec2 c, double sigma, double cutoff)
        : amp_(amp), c_(c), sigma_(sigma), win_{c, 0.7 * cutoff, cutoff} {}
    double value(const Vec2& x) const override { return g(x) * win_.value(x); }
    Vec2 gradient(const Vec2& x) const override {
        const double gv = g(x);
        return -gv * (x - c_) / (sigma_ * sigma_) * win_.value(x) + gv * win_.gradient(x);
    }
    Mat2 hessian(const Vec2& x) const override {
        const Vec2 d = x - c_;
        const double s2 = sigma_ * sigma_;
        const double gv = g(x);
        const Vec2 gg = -gv * d / s2;
        const Mat2 hg = gv * (d * d.transpose() / (s2 * s2) - Mat2::Identity() / s2);
        const Vec2 gw = win_.gradient(x);
        return hg * win_.value(x) + gg * gw.transpose() + gw * gg.transpose() + gv * win_.hessian(x);
    }
    Box support() const override { return amp_ == 0.0 ? Box::none() : Box::around(c_, win_.r1); }

private:
    double g(const Vec2& x) const { return amp_ * std::exp(-(x - c_).squaredNorm() / (2.0 * sigma_ * sigma_)); }
    double amp_;
    Vec2 c_;
    double sigma_;
    RadialWindow win_;
};

class VortexBump final : public VectorFunction {
public:
    VortexBump(double amp, PowerBump b) : amp_(amp), b_(b) {}
    Vec2 value(const Vec2& x) const override {
        const Vec2 d = x - b_.center;
        return amp_ * b_.value(x) / b_.radius * Vec2(-d[1], d[0]);
    }
    Mat2 jacobian(const Vec2& x) const override {
        const Vec2 d = x - b_.center;
        const double beta = b_.value(x);
        const Vec2 gb = b_.gradient(x);
        Mat2 J;
        J << -d[1] * gb[0], -d[1] * gb[1] - beta, d[0] * gb[0] + beta, d[0] * gb[1];
        return amp_ / b_.radius * J;
    }
    Box support() const override { return amp_ == 0.0 ? Box::none() : Box::around(b_.center, b_.radius); }

private:
    double amp_;
    PowerBump b_;
};

class DirectionalBump final : public VectorFunction {
public:
    DirectionalBump(double amp, PowerBump b, Vec2 dir) : amp_(amp), b_(b), dir_(dir) {}
    Vec2 value(const Vec2& x) const override { return amp_ * b_.value(x) * dir_; }
    Mat2 jacobian(const Vec2& x) const override { return amp_ * dir_ * b_.gradient(x).transpose(); }
    Box support() const override {
        return amp_ == 0.0 || dir_.isZero() ? Box::none() : Box::around(b_.center, b_.radius);
    }

private:
    double amp_;
    PowerBump b_;
    Vec2 dir_;
};

class GradientField final : public VectorFunction {
public:
    explicit GradientField(ScalarFn p) : p_(std::move(p)) {}
    Vec2 value(const Vec2& x) const override { return p_->gradient(x); }
    Mat2 jacobian(const Vec2& x) const override { return p_->hessian(x); }
    Box support() const override { return p_->support(); }

private:
    ScalarFn p_;
};

class WindowedUniform final : public VectorFunction {
public:
    WindowedUniform(double B, RadialWindow w) : B_(B), w_(w) {}
    Vec2 value(const Vec2& x) const override {
        const Vec2 d = x - w_.center;
        return 0.5 * B_ * w_.value(x) * Vec2(-d[1], d[0]);
    }
    Mat2 jacobian(const Vec2& x) const override {
        const Vec2 d = x - w_.center;
        const double W = w_.value(x);
        const Vec2 gw = w_.gradient(x);
        Mat2 J;
        J << -d[1] * gw[0], -d[1] * gw[1] - W, d[0] * gw[0] + W, d[0] * gw[1];
        return 0.5 * B_ * J;
    }
    Box support() const override { return B_ == 0.0 ? Box::none() : Box::around(w_.center, w_.r1); }

private:
    double B_;
    RadialWindow w_;
};

class CombinedVector final : public VectorFunction {
public:
    CombinedVector(double ca, VectorFn a, double cb, VectorFn b) : ca_(ca), cb_(cb), a_(std::move(a)), b_(std::move(b)) {}
    Vec2 value(const Vec2& x) const override { return ca_ * a_->value(x) + cb_ * b_->value(x); }
    Mat2 jacobian(const Vec2& x) const override { return ca_ * a_->jacobian(x) + cb_ * b_->jacobian(x); }
    Box support() const override {
        Box s = Box::none();
        if (ca_ != 0.0) s = s.united(a_->support());
        if (cb_ != 0.0) s = s.united(b_->support());
        return s;
    }

private:
    double ca_, cb_;
    VectorFn a_, b_;
};

class CombinedScalar final : public ScalarFunction {
public:
    CombinedScalar(double ca, ScalarFn a, double cb, ScalarFn b) : ca_(ca), cb_(cb), a_(std::move(a)), b_(std::move(b)) {}
    double value(const Vec2& x) const override { return ca_ * a_->value(x) + cb_ * b_->value(x); }
    Vec2 gradient(const Vec2& x) const override { return ca_ * a_->gradient(x) + cb_ * b_->gradient(x); }
    Mat2 hessian(const Vec2& x) const override { return ca_ * a_->hessian(x) + cb_ * b_->hessian(x); }
    Box support() const override {
        Box s = Box::none();
        if (ca_ != 0.0) s = s.united(a_->support());
        if (cb_ != 0.0) s = s.united(b_->support());
        return s;
    }

private:
    double ca_, cb_;
    ScalarFn a_, b_;
};

class PiecewiseVector final : public VectorFunction {
public:
    PiecewiseVector(Box box, VectorFn in, VectorFn out) : box_(box), in_(std::move(in)), out_(std::move(out)) {}
    Vec2 value(const Vec2& x) const override { return box_.contains(x) ? in_->value(x) : out_->value(x); }
    Mat2 jacobian(const Vec2& x) const override { return box_.contains(x) ? in_->jacobian(x) : out_->jacobian(x); }
    Box support() const override {
        Box s = out_->support();
        const Box si = in_->support();
        if (!si.empty) {
            Box clipped{si.lo.cwiseMax(box_.lo), si.hi.cwiseMin(box_.hi), false};
            if ((clipped.lo.array() <= clipped.hi.array()).all()) s = s.united(clipped);
        }
        return s;
    }

private:
    Box box_;
    VectorFn in_, out_;
};

}  // namespace

VectorFn zero_vector() { return std::make_shared<ZeroVector>(); }
ScalarFn zero_scalar() { return std::make_shared<ConstantScalar>(0.0); }
ScalarFn constant_scalar(double c) { return std::make_shared<ConstantScalar>(c); }

ScalarFn bump_scalar(double amplitude, const Vec2& center, double radius, double power) {
    if (!(radius > 0.0) || !(power > 1.0)) throw InvalidArgument("bump needs radius > 0 and power > 1");
    return std::make_shared<BumpScalar>(amplitude, PowerBump{center, radius, power});
}

ScalarFn gaussian_scalar(double amplitude, const Vec2& center, double sigma, double cutoff) {
    if (!(sigma > 0.0) || !(cutoff > 0.0)) throw InvalidArgument("gaussian needs sigma > 0 and cutoff > 0");
    return std::make_shared<GaussianScalar>(amplitude, center, sigma, cutoff);
}

VectorFn vortex_bump(double amplitude, const Vec2& center, double radius, double power) {
    if (!(radius > 0.0) || !(power > 1.0)) throw InvalidArgument("vortex bump needs radius > 0 and power > 1");
    return std::make_shared<VortexBump>(amplitude, PowerBump{center, radius, power});
}

VectorFn directional_bump(double amplitude, const Vec2& center, double radius, const Vec2& direction, double power) {
    if (!(radius > 0.0) || !(power > 1.0)) throw InvalidArgument("directional bump needs radius > 0 and power > 1");
    return std::make_shared<DirectionalBump>(amplitude, PowerBump{center, radius, power}, direction);
}

VectorFn gradient_field(ScalarFn p) { return std::make_shared<GradientField>(std::move(p)); }

VectorFn windowed_uniform_field(double B, const Vec2& center, double r0, double r1) {
    if (!(r0 >= 0.0) || !(r1 > r0)) throw InvalidArgument("window needs 0 <= r0 < r1");
    return std::make_shared<WindowedUniform>(B, RadialWindow{center, r0, r1});
}

VectorFn combine(double ca, VectorFn a, double cb, VectorFn b) {
    return std::make_shared<CombinedVector>(ca, std::move(a), cb, std::move(b));
}

ScalarFn combine(double ca, ScalarFn a, double cb, ScalarFn b) {
    return std::make_shared<CombinedScalar>(ca, std::move(a), cb, std::move(b));
}

VectorFn piecewise(const Box& box, VectorFn inside, VectorFn outside) {
    return std::make_shared<PiecewiseVector>(box, std::move(inside), std::move(outside));
}

GridField::GridField(Vec2 origin, double h1, double h2, int nx, int ny)
    : origin_(origin), h1_(h1), h2_(h2), nx_(nx), ny_(ny),
      data_(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny), 0.0) {}

Box GridField::extent() const {
    if (nx_ == 0 || ny_ == 0) return Box::none();
    return {origin_, point(nx_ - 1, ny_ - 1), false};
}

namespace {

inline void catmull_rom(double t, double w[4], double dw[4]) {
    const double t2 = t * t, t3 = t2 * t;
    w[0] = 0.5 * (-t3 + 2.0 * t2 - t);
    w[1] = 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0);
    w[2] = 0.5 * (-3.0 * t3 + 4.0 * t2 + t);
    w[3] = 0.5 * (t3 - t2);
    if (dw) {
        dw[0] = 0.5 * (-3.0 * t2 + 4.0 * t - 1.0);
        dw[1] = 0.5 * (9.0 * t2 - 10.0 * t);
        dw[2] = 0.5 * (-9.0 * t2 + 8.0 * t + 1.0);
        dw[3] = 0.5 * (3.0 * t2 - 2.0 * t);
    }
}

}  // namespace

double GridField::value(const Vec2& x) const { return value_gradient(x, nullptr); }

double GridField::value_gradient(const Vec2& x, Vec2* grad) const {
    const double u = (x[0] - origin_[0]) / h1_;
    const double v = (x[1] - origin_[1]) / h2_;
    if (!(u > -2.0 && v > -2.0 && u < nx_ + 1.0 && v < ny_ + 1.0)) {
        if (grad) grad->setZero();
        return 0.0;
    }
    const int i = static_cast<int>(std::floor(u));
    const int j = static_cast<int>(std::floor(v));
    double wx[4], wy[4], dwx[4], dwy[4];
    catmull_rom(u - i, wx, grad ? dwx : nullptr);
    catmull_rom(v - j, wy, grad ? dwy : nullptr);
    double val = 0.0, gx = 0.0, gy = 0.0;
    const bool inside = i >= 1 && j >= 1 && i + 2 < nx_ && j + 2 < ny_;
    for (int b = 0; b < 4; ++b) {
        double row = 0.0, drow = 0.0;
        for (int a = 0; a < 4; ++a) {
            const double s = inside ? data_[static_cast<std::size_t>(i - 1 + a) + static_cast<std::size_t>(j - 1 + b) * nx_]
                                    : at(i - 1 + a, j - 1 + b);
            row += wx[a] * s;
            if (grad) drow += dwx[a] * s;
        }
        val += wy[b] * row;
        if (grad) {
            gx += wy[b] * drow;
            gy += dwy[b] * row;
        }
    }
    if (grad) *grad = Vec2(gx / h1_, gy / h2_);
    return val;
}

GridVectorFunction::GridVectorFunction(GridField a1, GridField a2) {
    comp_[0] = std::move(a1);
    comp_[1] = std::move(a2);
    support_ = comp_[0].extent().united(comp_[1].extent());
}

GridVectorFunction::GridVectorFunction(GridField a1, GridField a2, GridField d1a1, GridField d2a1, GridField d1a2,
                                       GridField d2a2)
    : GridVectorFunction(std::move(a1), std::move(a2)) {
    deriv_[0][0] = std::move(d1a1);
    deriv_[0][1] = std::move(d2a1);
    deriv_[1][0] = std::move(d1a2);
    deriv_[1][1] = std::move(d2a2);
    has_derivs_ = true;
}

Vec2 GridVectorFunction::value(const Vec2& x) const {
    if (!support_.contains(x)) return Vec2::Zero();
    return {comp_[0].value(x), comp_[1].value(x)};
}

Mat2 GridVectorFunction::jacobian(const Vec2& x) const {
    if (!support_.contains(x)) return Mat2::Zero();
    Mat2 J;
    if (has_derivs_) {
        for (int c = 0; c < 2; ++c)
            for (int k = 0; k < 2; ++k) J(c, k) = deriv_[c][k].value(x);
        return J;
    }
    for (int c = 0; c < 2; ++c) {
        Vec2 g;
        comp_[c].value_gradient(x, &g);
        J.row(c) = g.transpose();
    }
    return J;
}

}  // namespace magbl
