#pragma once
/// Closed-form coefficient fields on the whole plane and grid interpolants.

#include "magbl/common.hpp"

#include <limits>
#include <memory>
#include <vector>

namespace magbl {

/// Axis-aligned box; an empty box means the function vanishes identically.
struct Box {
    Vec2 lo{0, 0};
    Vec2 hi{0, 0};
    bool empty = true;

    static Box none() { return {}; }
    static Box everywhere();
    static Box around(const Vec2& c, double r) { return {c.array() - r, c.array() + r, false}; }
    bool bounded() const;
    Box expanded(double r) const;
    Box united(const Box& other) const;
    bool contains(const Vec2& x) const;
};

/// Real vector field on R^2 with its Jacobian J(i, j) = d a_i / d x_j.
class VectorFunction {
public:
    virtual ~VectorFunction() = default;
    virtual Vec2 value(const Vec2& x) const = 0;
    virtual Mat2 jacobian(const Vec2& x) const = 0;
    virtual Box support() const = 0;
    double curl(const Vec2& x) const {
        const Mat2 J = jacobian(x);
        return J(1, 0) - J(0, 1);
    }
    double divergence(const Vec2& x) const { return jacobian(x).trace(); }
};

/// Real scalar field on R^2 with gradient and Hessian.
class ScalarFunction {
public:
    virtual ~ScalarFunction() = default;
    virtual double value(const Vec2& x) const = 0;
    virtual Vec2 gradient(const Vec2& x) const = 0;
    virtual Mat2 hessian(const Vec2& x) const = 0;
    virtual Box support() const = 0;
};

using VectorFn = std::shared_ptr<const VectorFunction>;
using ScalarFn = std::shared_ptr<const ScalarFunction>;

/// Radial profile (1 - |x-c|^2/R^2)^p inside the disc of radius R, zero outside.
struct PowerBump {
    Vec2 center{0, 0};
    double radius = 1.0;
    double power = 4.0;

    double value(const Vec2& x) const;
    Vec2 gradient(const Vec2& x) const;
    Mat2 hessian(const Vec2& x) const;
};

/// Quintic window equal to 1 for r <= r0 and 0 for r >= r1 (C2 across both radii).
struct RadialWindow {
    Vec2 center{0, 0};
    double r0 = 0.0;
    double r1 = 1.0;

    double value(const Vec2& x) const;
    Vec2 gradient(const Vec2& x) const;
    Mat2 hessian(const Vec2& x) const;
};

VectorFn zero_vector();
ScalarFn zero_scalar();
ScalarFn constant_scalar(double c);
/// amplitude * (1 - rho^2)^power.
ScalarFn bump_scalar(double amplitude, const Vec2& center, double radius, double power = 4.0);
/// amplitude * exp(-|x-c|^2 / (2 sigma^2)), smoothly cut off between 0.7*cutoff and cutoff.
ScalarFn gaussian_scalar(double amplitude, const Vec2& center, double sigma, double cutoff);
/// amplitude * bump(x) * (-(x2-c2), x1-c1) / radius: a localized vortex with nonzero curl.
VectorFn vortex_bump(double amplitude, const Vec2& center, double radius, double power = 4.0);
/// amplitude * bump(x) * direction.
VectorFn directional_bump(double amplitude, const Vec2& center, double radius, const Vec2& direction,
                          double power = 4.0);
/// Gradient of a scalar function.
VectorFn gradient_field(ScalarFn p);
/// (B/2) * (-(x2-c2), x1-c1) multiplied by a radial window; curl equals B where the window is 1.
VectorFn windowed_uniform_field(double B, const Vec2& center, double r0, double r1);
/// ca*a + cb*b.
VectorFn combine(double ca, VectorFn a, double cb, VectorFn b);
ScalarFn combine(double ca, ScalarFn a, double cb, ScalarFn b);
/// inside(x) for x in the closed box, outside(x) elsewhere.
VectorFn piecewise(const Box& box, VectorFn inside, VectorFn outside);

/// Uniform grid of real samples with Catmull-Rom bicubic interpolation (C1).
/// Samples outside the stored grid are treated as zero.
class GridField {
public:
    GridField() = default;
    GridField(Vec2 origin, double h1, double h2, int nx, int ny);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double h1() const { return h1_; }
    double h2() const { return h2_; }
    const Vec2& origin() const { return origin_; }
    Vec2 point(int i, int j) const { return {origin_[0] + i * h1_, origin_[1] + j * h2_}; }
    double& at(int i, int j) { return data_[static_cast<std::size_t>(i) + static_cast<std::size_t>(j) * nx_]; }
    double at(int i, int j) const {
        if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return 0.0;
        return data_[static_cast<std::size_t>(i) + static_cast<std::size_t>(j) * nx_];
    }
    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    double value(const Vec2& x) const;
    /// Value and gradient of the interpolant.
    double value_gradient(const Vec2& x, Vec2* grad) const;
    Box extent() const;

private:
    Vec2 origin_{0, 0};
    double h1_ = 1.0, h2_ = 1.0;
    int nx_ = 0, ny_ = 0;
    std::vector<double> data_;
};

/// Vector field given by two grid interpolants (components) and optional derivative grids.
class GridVectorFunction : public VectorFunction {
public:
    /// comps[c] holds component c; derivs[c][k] holds d comp_c / d x_k when provided.
    GridVectorFunction(GridField a1, GridField a2);
    GridVectorFunction(GridField a1, GridField a2, GridField d1a1, GridField d2a1, GridField d1a2,
                       GridField d2a2);
    Vec2 value(const Vec2& x) const override;
    Mat2 jacobian(const Vec2& x) const override;
    Box support() const override { return support_; }
    void set_support(const Box& b) { support_ = b; }
    const GridField& component(int c) const { return comp_[c]; }
    /// Grid of d comp_c / d x_k; only valid when has_derivatives().
    const GridField& derivative(int c, int k) const { return deriv_[c][k]; }
    bool has_derivatives() const { return has_derivs_; }

private:
    GridField comp_[2];
    GridField deriv_[2][2];
    bool has_derivs_ = false;
    Box support_;
};

}  // namespace magbl
