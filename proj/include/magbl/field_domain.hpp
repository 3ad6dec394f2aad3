#pragma once
/// Rectangular computational domain, nodal fields and grid differential operators.

#include "magbl/common.hpp"

#include <cstdint>
#include <vector>

namespace magbl {

/// Real scalar field sampled at every grid node (row-major, index = i + j*N1).
using RealField = RVec;
/// Complex scalar field sampled at every grid node.
using ComplexField = CVec;

/// Vector potential (a1, a2), one value per grid node.
struct VectorField2D {
    RVec a1;
    RVec a2;

    VectorField2D() = default;
    explicit VectorField2D(Eigen::Index n) : a1(RVec::Zero(n)), a2(RVec::Zero(n)) {}
    Eigen::Index size() const { return a1.size(); }
    Vec2 at(Eigen::Index g) const { return {a1[g], a2[g]}; }
};

/// Rectangle [-L1/2, L1/2] x [-L2/2, L2/2] with a uniform node grid.
///
/// Boundary nodes are listed counterclockwise starting at the lower-left corner:
/// bottom row left to right, right column upwards (corners excluded), top row
/// right to left, left column downwards (corners excluded). Corners belong to
/// the bottom or top face and carry that face's unit normal.
struct Domain2D {
    double L1 = 0.0, L2 = 0.0;
    int N1 = 0, N2 = 0;
    double h1 = 0.0, h2 = 0.0;
    double collar_width = 0.0;
    double x0 = 0.0, y0 = 0.0;  // lower-left corner

    std::vector<int> interior_nodes;   // grid indices, ascending
    std::vector<int> interior_index;   // grid index -> interior slot or -1
    std::vector<int> boundary_nodes;   // grid indices, counterclockwise
    std::vector<int> boundary_index;   // grid index -> boundary slot or -1
    std::vector<Vec2> normals;         // outward unit normal per boundary slot
    std::vector<Vec2> flux_normals;    // length-weighted normal used for boundary fluxes
    RVec boundary_weights;             // arc-length quadrature weight per boundary slot
    std::vector<std::uint8_t> collar_mask;  // per grid node: 1 if dist(x, boundary) < w

    int node_count() const { return N1 * N2; }
    int interior_count() const { return static_cast<int>(interior_nodes.size()); }
    int boundary_count() const { return static_cast<int>(boundary_nodes.size()); }
    int node(int i, int j) const { return i + j * N1; }
    int col(int g) const { return g % N1; }
    int row(int g) const { return g / N1; }
    Vec2 point(int i, int j) const { return {x0 + i * h1, y0 + j * h2}; }
    Vec2 point(int g) const { return point(col(g), row(g)); }
    double perimeter() const { return 2.0 * (L1 + L2); }
    double cell_area() const { return h1 * h2; }
    double distance_to_boundary(const Vec2& x) const;
    bool contains(const Vec2& x) const;

    /// Trapezoidal area weight of each node (interior h1*h2, faces half, corners quarter).
    RVec node_area_weights() const;
};

/// Function on the boundary node list together with its quadrature weights.
struct BoundaryFunction {
    CVec values;
    RVec weights;

    BoundaryFunction() = default;
    BoundaryFunction(CVec v, RVec w) : values(std::move(v)), weights(std::move(w)) {}
    Eigen::Index size() const { return values.size(); }
};

/// Builds the grid. Requires N1, N2 >= 8, positive lengths and 0 < w < min(L1, L2)/2.
Domain2D build_domain(double L1, double L2, int N1, int N2, double collar_width);

BoundaryFunction make_boundary_function(const Domain2D& d, CVec values);
BoundaryFunction zero_boundary_function(const Domain2D& d);

/// <f, g> = sum_b w_b f_b conj(g_b).
cplx boundary_inner(const BoundaryFunction& f, const BoundaryFunction& g);
/// sum_b w_b f_b g_b without conjugation.
cplx boundary_pairing(const BoundaryFunction& f, const BoundaryFunction& g);
double boundary_l2_norm(const BoundaryFunction& f);

/// Boundary trace of a nodal field.
CVec boundary_trace(const Domain2D& d, const ComplexField& u);
/// Values at interior nodes of a nodal field.
CVec interior_values(const Domain2D& d, const ComplexField& u);
/// Nodal field assembled from interior values and a boundary trace.
ComplexField assemble_nodal(const Domain2D& d, const CVec& interior, const CVec& boundary);

/// Trapezoidal integral over the rectangle.
cplx integrate(const Domain2D& d, const ComplexField& u);
double integrate(const Domain2D& d, const RealField& u);
/// Discrete L2(Omega) norm with trapezoidal weights.
double l2_norm(const Domain2D& d, const ComplexField& u);

/// Scalar curl d1 a2 - d2 a1: centered differences inside, second-order one-sided at the boundary.
RealField curl(const Domain2D& d, const VectorField2D& field);
/// Partial derivative along axis 0 (x1) or 1 (x2) with the same stencils as curl.
RealField partial(const Domain2D& d, const RealField& u, int axis);
ComplexField partial(const Domain2D& d, const ComplexField& u, int axis);

struct CollarReport {
    double max_difference = 0.0;
    int collar_nodes = 0;
    bool pass = true;
};

/// Maximum |A1 - A2| over collar nodes; passes only when the fields agree exactly there.
CollarReport check_collar(const VectorField2D& A1, const VectorField2D& A2, const Domain2D& d);

void require_congruent(const Domain2D& d, Eigen::Index n, const char* what);

}  // namespace magbl
