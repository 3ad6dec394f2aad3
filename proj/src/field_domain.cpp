#include "magbl/field_domain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace magbl {

double Domain2D::distance_to_boundary(const Vec2& x) const {
    const double dx = std::min(x[0] - x0, x0 + L1 - x[0]);
    const double dy = std::min(x[1] - y0, y0 + L2 - x[1]);
    return std::min(dx, dy);
}

bool Domain2D::contains(const Vec2& x) const {
    return x[0] >= x0 && x[0] <= x0 + L1 && x[1] >= y0 && x[1] <= y0 + L2;
}

RVec Domain2D::node_area_weights() const {
    RVec w(node_count());
    for (int j = 0; j < N2; ++j) {
        const double wy = (j == 0 || j == N2 - 1) ? 0.5 * h2 : h2;
        for (int i = 0; i < N1; ++i) {
            const double wx = (i == 0 || i == N1 - 1) ? 0.5 * h1 : h1;
            w[node(i, j)] = wx * wy;
        }
    }
    return w;
}

Domain2D build_domain(double L1, double L2, int N1, int N2, double collar_width) {
    if (!(L1 > 0.0) || !(L2 > 0.0) || !std::isfinite(L1) || !std::isfinite(L2))
        throw InvalidArgument("domain lengths must be positive and finite");
    if (N1 < 8 || N2 < 8) throw InvalidArgument("grid too coarse: need N1, N2 >= 8");
    if (!(collar_width > 0.0) || !(collar_width < 0.5 * std::min(L1, L2)))
        throw InvalidArgument("collar width must satisfy 0 < w < min(L1, L2)/2");

    Domain2D d;
    d.L1 = L1;
    d.L2 = L2;
    d.N1 = N1;
    d.N2 = N2;
    d.h1 = L1 / (N1 - 1);
    d.h2 = L2 / (N2 - 1);
    d.collar_width = collar_width;
    d.x0 = -0.5 * L1;
    d.y0 = -0.5 * L2;

    const int n = N1 * N2;
    d.interior_index.assign(n, -1);
    d.boundary_index.assign(n, -1);
    for (int j = 1; j < N2 - 1; ++j)
        for (int i = 1; i < N1 - 1; ++i) {
            d.interior_index[d.node(i, j)] = static_cast<int>(d.interior_nodes.size());
            d.interior_nodes.push_back(d.node(i, j));
        }

    const Vec2 down(0, -1), right(1, 0), up(0, 1), left(-1, 0);
    const double wc = 0.5 * (d.h1 + d.h2);
    std::vector<double> weights;
    auto add = [&](int i, int j, const Vec2& nu, const Vec2& flux, double w) {
        const int g = d.node(i, j);
        d.boundary_index[g] = static_cast<int>(d.boundary_nodes.size());
        d.boundary_nodes.push_back(g);
        d.normals.push_back(nu);
        d.flux_normals.push_back(flux);
        weights.push_back(w);
    };
    auto corner_flux = [&](const Vec2& horizontal_face, const Vec2& vertical_face) {
        return Vec2((0.5 * d.h1 * horizontal_face + 0.5 * d.h2 * vertical_face) / wc);
    };
    for (int i = 0; i < N1; ++i) {
        if (i == 0) add(i, 0, down, corner_flux(down, left), wc);
        else if (i == N1 - 1) add(i, 0, down, corner_flux(down, right), wc);
        else add(i, 0, down, down, d.h1);
    }
    for (int j = 1; j < N2 - 1; ++j) add(N1 - 1, j, right, right, d.h2);
    for (int i = N1 - 1; i >= 0; --i) {
        if (i == N1 - 1) add(i, N2 - 1, up, corner_flux(up, right), wc);
        else if (i == 0) add(i, N2 - 1, up, corner_flux(up, left), wc);
        else add(i, N2 - 1, up, up, d.h1);
    }
    for (int j = N2 - 2; j >= 1; --j) add(0, j, left, left, d.h2);
    d.boundary_weights = Eigen::Map<RVec>(weights.data(), static_cast<Eigen::Index>(weights.size()));

    d.collar_mask.assign(n, 0);
    for (int g = 0; g < n; ++g)
        d.collar_mask[g] = d.distance_to_boundary(d.point(g)) < collar_width ? 1 : 0;
    return d;
}

BoundaryFunction make_boundary_function(const Domain2D& d, CVec values) {
    if (values.size() != d.boundary_count())
        throw InvalidArgument("boundary function length does not match the boundary node count");
    return BoundaryFunction(std::move(values), d.boundary_weights);
}

BoundaryFunction zero_boundary_function(const Domain2D& d) {
    return BoundaryFunction(CVec::Zero(d.boundary_count()), d.boundary_weights);
}

cplx boundary_inner(const BoundaryFunction& f, const BoundaryFunction& g) {
    if (f.size() != g.size()) throw InvalidArgument("boundary functions differ in length");
    cplx s = 0.0;
    for (Eigen::Index b = 0; b < f.size(); ++b) s += f.weights[b] * f.values[b] * std::conj(g.values[b]);
    return s;
}

cplx boundary_pairing(const BoundaryFunction& f, const BoundaryFunction& g) {
    if (f.size() != g.size()) throw InvalidArgument("boundary functions differ in length");
    cplx s = 0.0;
    for (Eigen::Index b = 0; b < f.size(); ++b) s += f.weights[b] * f.values[b] * g.values[b];
    return s;
}

double boundary_l2_norm(const BoundaryFunction& f) {
    double s = 0.0;
    for (Eigen::Index b = 0; b < f.size(); ++b) s += f.weights[b] * std::norm(f.values[b]);
    return std::sqrt(s);
}

CVec boundary_trace(const Domain2D& d, const ComplexField& u) {
    require_congruent(d, u.size(), "field");
    CVec t(d.boundary_count());
    for (int b = 0; b < d.boundary_count(); ++b) t[b] = u[d.boundary_nodes[b]];
    return t;
}

CVec interior_values(const Domain2D& d, const ComplexField& u) {
    require_congruent(d, u.size(), "field");
    CVec t(d.interior_count());
    for (int k = 0; k < d.interior_count(); ++k) t[k] = u[d.interior_nodes[k]];
    return t;
}

ComplexField assemble_nodal(const Domain2D& d, const CVec& interior, const CVec& boundary) {
    if (interior.size() != d.interior_count() || boundary.size() != d.boundary_count())
        throw InvalidArgument("interior/boundary vectors do not match the domain");
    ComplexField u(d.node_count());
    for (int k = 0; k < d.interior_count(); ++k) u[d.interior_nodes[k]] = interior[k];
    for (int b = 0; b < d.boundary_count(); ++b) u[d.boundary_nodes[b]] = boundary[b];
    return u;
}

cplx integrate(const Domain2D& d, const ComplexField& u) {
    require_congruent(d, u.size(), "field");
    const RVec w = d.node_area_weights();
    cplx s = 0.0;
    for (Eigen::Index g = 0; g < u.size(); ++g) s += w[g] * u[g];
    return s;
}

double integrate(const Domain2D& d, const RealField& u) {
    require_congruent(d, u.size(), "field");
    return d.node_area_weights().dot(u);
}

double l2_norm(const Domain2D& d, const ComplexField& u) {
    require_congruent(d, u.size(), "field");
    const RVec w = d.node_area_weights();
    double s = 0.0;
    for (Eigen::Index g = 0; g < u.size(); ++g) s += w[g] * std::norm(u[g]);
    return std::sqrt(s);
}

namespace {

template <class Field>
Field partial_impl(const Domain2D& d, const Field& u, int axis) {
    require_congruent(d, u.size(), "field");
    if (axis != 0 && axis != 1) throw InvalidArgument("axis must be 0 or 1");
    Field out(u.size());
    const int n = axis == 0 ? d.N1 : d.N2;
    const double h = axis == 0 ? d.h1 : d.h2;
    for (int j = 0; j < d.N2; ++j)
        for (int i = 0; i < d.N1; ++i) {
            const int k = axis == 0 ? i : j;
            auto at = [&](int kk) { return axis == 0 ? u[d.node(kk, j)] : u[d.node(i, kk)]; };
            typename Field::Scalar v;
            if (k == 0) v = (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
            else if (k == n - 1) v = (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h);
            else v = (at(k + 1) - at(k - 1)) / (2.0 * h);
            out[d.node(i, j)] = v;
        }
    return out;
}

}  // namespace

RealField partial(const Domain2D& d, const RealField& u, int axis) { return partial_impl(d, u, axis); }
ComplexField partial(const Domain2D& d, const ComplexField& u, int axis) { return partial_impl(d, u, axis); }

RealField curl(const Domain2D& d, const VectorField2D& field) {
    require_congruent(d, field.a1.size(), "vector field a1");
    require_congruent(d, field.a2.size(), "vector field a2");
    return partial(d, field.a2, 0) - partial(d, field.a1, 1);
}

CollarReport check_collar(const VectorField2D& A1, const VectorField2D& A2, const Domain2D& d) {
    require_congruent(d, A1.size(), "A1");
    require_congruent(d, A2.size(), "A2");
    CollarReport r;
    for (int g = 0; g < d.node_count(); ++g) {
        if (!d.collar_mask[g]) continue;
        ++r.collar_nodes;
        const double diff = std::hypot(A1.a1[g] - A2.a1[g], A1.a2[g] - A2.a2[g]);
        r.max_difference = std::max(r.max_difference, diff);
    }
    r.pass = r.max_difference == 0.0;
    return r;
}

void require_congruent(const Domain2D& d, Eigen::Index n, const char* what) {
    if (n != d.node_count()) {
        std::ostringstream os;
        os << what << " has " << n << " values, grid has " << d.node_count() << " nodes";
        throw InvalidArgument(os.str());
    }
}

}  // namespace magbl
