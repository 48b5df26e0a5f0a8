// Orthonormal bases on elements and Legendre bases on edges.
//
// Each element is the affine image x = origin + J xi of a reference cell: the
// triangle (0,0),(1,0),(0,1) spanned by vertices 0,1,2, or the unit square
// spanned by vertices 0,1,3 of a parallelogram. Element functions are
// phi_pq(x) = psi_pq(xi), with psi_pq of total degree p+q:
//   triangle: Dubiner polynomials  P_p(a) (1-eta)^p P_q^(2p+1,0)(2 eta - 1),
//             a = 2 xi / (1 - eta) - 1
//   square:   Legendre products    L_p(2 xi - 1) L_q(2 eta - 1)
// normalized so the element mass matrix is |T| times the identity. Functions
// are ordered by total degree, then by q: the first dim P_r of them span P_r.
// Vector-valued spaces [P_r]^2 stack the x-component block before the
// y-component block.

#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "mesh.hpp"
#include "quadrature.hpp"

namespace gwg {

inline constexpr std::size_t
poly_dim(int degree)
{
    return degree < 0 ? 0 : std::size_t(degree + 1) * std::size_t(degree + 2) / 2;
}

struct MultiIndex
{
    int x;
    int y;
};

/// Index pairs (p,q) in basis order.
inline std::vector<MultiIndex>
multi_indices(int degree)
{
    std::vector<MultiIndex> out;
    out.reserve(poly_dim(degree));
    for (int d = 0; d <= degree; d++)
        for (int b = 0; b <= d; b++)
            out.push_back({d - b, b});
    return out;
}

/// Position of psi_pq in the basis order.
inline constexpr std::size_t
multi_index_position(int p, int q)
{
    return poly_dim(p + q - 1) + std::size_t(q);
}

/// Affine map x = origin + jacobian * xi from the reference cell.
struct ReferenceFrame
{
    CellShape       shape = CellShape::triangle;
    Point           origin = Point::Zero();
    Eigen::Matrix2d jacobian = Eigen::Matrix2d::Identity();
};

inline ReferenceFrame
reference_frame(const Mesh& mesh, std::size_t e)
{
    auto cyc = mesh.element(e);
    ReferenceFrame f;
    f.shape = mesh.shape();
    f.origin = mesh.vertex(cyc[0]);
    f.jacobian.col(0) = mesh.vertex(cyc[1]) - f.origin;
    f.jacobian.col(1) = mesh.vertex(cyc[mesh.shape() == CellShape::triangle ? 2 : 3]) - f.origin;
    return f;
}

/// Legendre polynomials L_0..L_degree at t in [-1,1].
inline Eigen::VectorXd
legendre(int degree, double t)
{
    Eigen::VectorXd out(degree + 1);
    out(0) = 1.0;
    if (degree >= 1)
        out(1) = t;
    for (int n = 2; n <= degree; n++)
        out(n) = ((2.0 * n - 1.0) * t * out(n - 1) - (n - 1.0) * out(n - 2)) / double(n);
    return out;
}

namespace detail {

/// Legendre values and derivatives at t.
inline void
legendre_with_derivative(int degree, double t, Eigen::VectorXd& val, Eigen::VectorXd& der)
{
    val.resize(degree + 1);
    der.resize(degree + 1);
    val(0) = 1.0;
    der(0) = 0.0;
    if (degree >= 1)
    {
        val(1) = t;
        der(1) = 1.0;
    }
    for (int n = 2; n <= degree; n++)
    {
        val(n) = ((2.0 * n - 1.0) * t * val(n - 1) - (n - 1.0) * val(n - 2)) / n;
        der(n) = ((2.0 * n - 1.0) * (val(n - 1) + t * der(n - 1)) - (n - 1.0) * der(n - 2)) / n;
    }
}

/// Jacobi P_n^(alpha,0) values and derivatives at x, n = 0..degree.
inline void
jacobi_with_derivative(int degree, double alpha, double x, Eigen::VectorXd& val, Eigen::VectorXd& der)
{
    val.resize(degree + 1);
    der.resize(degree + 1);
    val(0) = 1.0;
    der(0) = 0.0;
    if (degree >= 1)
    {
        val(1) = 0.5 * (alpha + (alpha + 2.0) * x);
        der(1) = 0.5 * (alpha + 2.0);
    }
    for (int n = 2; n <= degree; n++)
    {
        const double a1 = 2.0 * n * (n + alpha) * (2.0 * n + alpha - 2.0);
        const double a2 = (2.0 * n + alpha - 1.0) * alpha * alpha;
        const double a3 = (2.0 * n + alpha - 2.0) * (2.0 * n + alpha - 1.0) * (2.0 * n + alpha);
        const double a4 = 2.0 * (n + alpha - 1.0) * (n - 1.0) * (2.0 * n + alpha);
        val(n) = ((a2 + a3 * x) * val(n - 1) - a4 * val(n - 2)) / a1;
        der(n) = (a3 * val(n - 1) + (a2 + a3 * x) * der(n - 1) - a4 * der(n - 2)) / a1;
    }
}

/// Reference basis values and (d/dxi, d/deta) at xi. Either output may be null.
inline void
reference_basis(CellShape shape, int degree, const Point& xi, Eigen::VectorXd* val, Eigen::MatrixX2d* grad)
{
    const auto n = Eigen::Index(poly_dim(degree));
    if (val)
        val->resize(n);
    if (grad)
        grad->resize(n, 2);
    if (degree < 0)
        return;

    if (shape == CellShape::rectangle)
    {
        Eigen::VectorXd lx, dx, ly, dy;
        legendre_with_derivative(degree, 2.0 * xi.x() - 1.0, lx, dx);
        legendre_with_derivative(degree, 2.0 * xi.y() - 1.0, ly, dy);
        Eigen::Index pos = 0;
        for (int d = 0; d <= degree; d++)
            for (int q = 0; q <= d; q++, pos++)
            {
                const int p = d - q;
                const double c = std::sqrt((2.0 * p + 1.0) * (2.0 * q + 1.0));
                if (val)
                    (*val)(pos) = c * lx(p) * ly(q);
                if (grad)
                {
                    (*grad)(pos, 0) = 2.0 * c * dx(p) * ly(q);
                    (*grad)(pos, 1) = 2.0 * c * lx(p) * dy(q);
                }
            }
        return;
    }

    // Q_p = (1-eta)^p P_p(xh / (1-eta)) with xh = 2 xi + eta - 1, built without division.
    const double s = 1.0 - xi.y(), xh = 2.0 * xi.x() + xi.y() - 1.0;
    Eigen::VectorXd Q(degree + 1);
    Eigen::MatrixX2d dQ(degree + 1, 2);
    Q(0) = 1.0;
    dQ.row(0).setZero();
    if (degree >= 1)
    {
        Q(1) = xh;
        dQ.row(1) << 2.0, 1.0;
    }
    for (int p = 2; p <= degree; p++)
    {
        Q(p) = ((2.0 * p - 1.0) * xh * Q(p - 1) - (p - 1.0) * s * s * Q(p - 2)) / p;
        const Eigen::RowVector2d dxh(2.0, 1.0), ds(0.0, -1.0);
        dQ.row(p) = ((2.0 * p - 1.0) * (dxh * Q(p - 1) + xh * dQ.row(p - 1)) -
                     (p - 1.0) * (2.0 * s * Q(p - 2) * ds + s * s * dQ.row(p - 2))) /
                    p;
    }

    std::vector<Eigen::VectorXd> R(degree + 1), dR(degree + 1);
    for (int p = 0; p <= degree; p++)
        jacobi_with_derivative(degree - p, 2.0 * p + 1.0, 2.0 * xi.y() - 1.0, R[p], dR[p]);

    Eigen::Index pos = 0;
    for (int d = 0; d <= degree; d++)
        for (int q = 0; q <= d; q++, pos++)
        {
            const int p = d - q;
            const double c = std::sqrt((2.0 * p + 1.0) * (p + q + 1.0));
            if (val)
                (*val)(pos) = c * Q(p) * R[p](q);
            if (grad)
            {
                (*grad)(pos, 0) = c * dQ(p, 0) * R[p](q);
                (*grad)(pos, 1) = c * (dQ(p, 1) * R[p](q) + 2.0 * Q(p) * dR[p](q));
            }
        }
}

inline double
reference_area(CellShape shape)
{
    return shape == CellShape::triangle ? 0.5 : 1.0;
}

} // namespace detail

/// Reference-cell expansion of d/dxi (top block) and d/deta (bottom block) of
/// the degree-k functions in the degree-m functions, m >= k-1.
inline const Eigen::MatrixXd&
reference_derivatives(CellShape shape, int k, int m)
{
    static std::map<std::tuple<int, int, int>, Eigen::MatrixXd> cache;
    const auto key = std::make_tuple(int(shape), k, m);
    if (auto it = cache.find(key); it != cache.end())
        return it->second;

    const auto dk = Eigen::Index(poly_dim(k)), dm = Eigen::Index(poly_dim(m));
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2 * dm, dk);
    const auto rule = element_quadrature(shape, std::max(k - 1 + m, 0));
    Eigen::VectorXd psi;
    Eigen::MatrixX2d dpsi;
    for (std::size_t q = 0; q < rule.size(); q++)
    {
        detail::reference_basis(shape, m, rule.points[q], &psi, nullptr);
        detail::reference_basis(shape, k, rule.points[q], nullptr, &dpsi);
        D.topRows(dm).noalias() += rule.weights[q] * psi * dpsi.col(0).transpose();
        D.bottomRows(dm).noalias() += rule.weights[q] * psi * dpsi.col(1).transpose();
    }
    D /= detail::reference_area(shape);
    D = (D.array().abs() < 1e-13 * std::max(1.0, D.cwiseAbs().maxCoeff())).select(0.0, D);
    return cache.emplace(key, std::move(D)).first->second;
}

class ElementBasis
{
public:
    ElementBasis(int degree, const ReferenceFrame& frame)
        : degree_(degree), frame_(frame), inverse_(frame.jacobian.inverse())
    {}

    ElementBasis(const Mesh& mesh, std::size_t element, int degree)
        : ElementBasis(degree, reference_frame(mesh, element))
    {}

    int degree() const { return degree_; }
    std::size_t size() const { return poly_dim(degree_); }
    const ReferenceFrame& frame() const { return frame_; }

    Point to_reference(const Point& p) const { return inverse_ * (p - frame_.origin); }

    Eigen::VectorXd eval(const Point& p) const
    {
        Eigen::VectorXd out;
        detail::reference_basis(frame_.shape, degree_, to_reference(p), &out, nullptr);
        return out;
    }

    /// Row i holds (d/dx, d/dy) of basis function i.
    Eigen::MatrixX2d grad(const Point& p) const
    {
        Eigen::MatrixX2d ref;
        detail::reference_basis(frame_.shape, degree_, to_reference(p), nullptr, &ref);
        return ref * inverse_;
    }

private:
    int             degree_;
    ReferenceFrame  frame_;
    Eigen::Matrix2d inverse_;
};

class EdgeBasis
{
public:
    EdgeBasis(int degree, double length) : degree_(degree), length_(length) {}

    int degree() const { return degree_; }
    std::size_t size() const { return std::size_t(degree_ + 1); }
    double length() const { return length_; }

    Eigen::VectorXd eval(double t) const { return legendre(degree_, t); }

    /// Diagonal of the arc-length mass matrix: |e| / (2a + 1).
    Eigen::VectorXd mass_diagonal() const
    {
        Eigen::VectorXd d(size());
        for (int a = 0; a <= degree_; a++)
            d(a) = length_ / (2.0 * a + 1.0);
        return d;
    }

private:
    int    degree_;
    double length_;
};

inline Eigen::MatrixXd
mass_matrix(const ElementBasis& basis, const QuadratureRule& rule)
{
    const auto n = basis.size();
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t q = 0; q < rule.size(); q++)
    {
        Eigen::VectorXd phi = basis.eval(rule.points[q]);
        M.selfadjointView<Eigen::Lower>().rankUpdate(phi, rule.weights[q]);
    }
    return M.selfadjointView<Eigen::Lower>();
}

inline Eigen::MatrixXd
mass_matrix(const Mesh& mesh, std::size_t element, int degree)
{
    ElementBasis basis(mesh, element, degree);
    return mass_matrix(basis, element_rule(mesh, element, 2 * std::max(degree, 0)));
}

/// Exact map from the coefficients of a degree-k basis to the [P_m]^2
/// coefficients of their gradients (m >= k-1), on the same element.
inline Eigen::MatrixXd
gradient_embedding(const ElementBasis& basis, int m)
{
    const Eigen::MatrixXd& D = reference_derivatives(basis.frame().shape, basis.degree(), m);
    const auto dm = Eigen::Index(poly_dim(m));
    // grad_x = J^{-T} grad_xi
    const Eigen::Matrix2d G = basis.frame().jacobian.inverse().transpose();
    Eigen::MatrixXd E(2 * dm, D.cols());
    E.topRows(dm) = G(0, 0) * D.topRows(dm) + G(0, 1) * D.bottomRows(dm);
    E.bottomRows(dm) = G(1, 0) * D.topRows(dm) + G(1, 1) * D.bottomRows(dm);
    return E;
}

} // namespace gwg
