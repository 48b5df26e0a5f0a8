// Weak function space V_h, L2 projections, and the generalized discrete weak
// gradient.
//
// A weak function v = {v0, vb} carries an interior polynomial of degree k per
// element and an edge polynomial of degree j per edge. Edge blocks are owned by
// the edge (interior edges are shared by both neighbours) and are expressed in
// the Legendre basis of the edge's canonical orientation.
//
// Local DoF layout on an element: [interior | side 0 | side 1 | ...], where
// side i runs from vertex i to vertex i+1 of the element cycle.
//
// The weak gradient is grad v0 + delta v, where delta v in [P_l]^2 solves
//     (delta v, psi)_T = <vb - Qb v0, psi.n>_{dT}   for all psi in [P_l]^2,
// and the sum is stored in [P_m]^2, m = max(k-1, l).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mesh.hpp"
#include "polybasis.hpp"
#include "quadrature.hpp"

namespace gwg {

using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Eigen::Vector2d(const Point&)>;

/// Element family P_k(T) / P_j(dT) / [P_l(T)]^2.
class Signature
{
public:
    Signature(int k, int j, int l) : k_(k), j_(j), l_(l)
    {
        if (k < 0 || j < 0 || l < 0)
            throw std::invalid_argument("element degrees must be non-negative");
    }

    int k() const { return k_; }
    int j() const { return j_; }
    int l() const { return l_; }
    int s() const { return std::min(j_, l_); }
    int m() const { return std::max(k_ - 1, l_); }

    std::size_t interior_size() const { return poly_dim(k_); }
    std::size_t edge_size() const { return std::size_t(j_ + 1); }
    std::size_t delta_size() const { return 2 * poly_dim(l_); }
    std::size_t gradient_size() const { return 2 * poly_dim(m()); }

    std::size_t local_size(std::size_t sides) const { return interior_size() + sides * edge_size(); }

    bool operator==(const Signature&) const = default;

private:
    int k_, j_, l_;
};

/// Interior blocks first (element order), then edge blocks (edge order).
class GlobalDofMap
{
public:
    GlobalDofMap(const Mesh& mesh, const Signature& sig)
        : num_elements_(mesh.num_elements()), num_edges_(mesh.num_edges()),
          interior_size_(sig.interior_size()), edge_size_(sig.edge_size()),
          boundary_(mesh.num_edges())
    {
        for (std::size_t i = 0; i < num_edges_; i++)
            boundary_[i] = mesh.edge(i).boundary();
    }

    std::size_t num_elements() const { return num_elements_; }
    std::size_t num_edges() const { return num_edges_; }
    std::size_t interior_size() const { return interior_size_; }
    std::size_t edge_size() const { return edge_size_; }

    std::size_t interior_offset(std::size_t e) const { return e * interior_size_; }
    std::size_t edge_offset(std::size_t ed) const { return num_elements_ * interior_size_ + ed * edge_size_; }
    std::size_t total() const { return num_elements_ * interior_size_ + num_edges_ * edge_size_; }

    bool is_boundary_edge(std::size_t ed) const { return boundary_[ed]; }

    bool is_boundary_dof(std::size_t dof) const
    {
        const auto first_edge_dof = num_elements_ * interior_size_;
        if (dof < first_edge_dof)
            return false;
        return boundary_[(dof - first_edge_dof) / edge_size_];
    }

    std::vector<std::size_t> local_dofs(const Mesh& mesh, std::size_t e) const
    {
        auto sides = mesh.element_edges(e);
        std::vector<std::size_t> out;
        out.reserve(interior_size_ + sides.size() * edge_size_);
        for (std::size_t i = 0; i < interior_size_; i++)
            out.push_back(interior_offset(e) + i);
        for (const auto& side : sides)
            for (std::size_t a = 0; a < edge_size_; a++)
                out.push_back(edge_offset(side.edge) + a);
        return out;
    }

private:
    std::size_t       num_elements_, num_edges_;
    std::size_t       interior_size_, edge_size_;
    std::vector<bool> boundary_;
};

struct WeakFunction
{
    Eigen::VectorXd coeffs;

    auto interior(const GlobalDofMap& map, std::size_t e) const
    {
        return coeffs.segment(Eigen::Index(map.interior_offset(e)), Eigen::Index(map.interior_size()));
    }
    auto edge(const GlobalDofMap& map, std::size_t ed) const
    {
        return coeffs.segment(Eigen::Index(map.edge_offset(ed)), Eigen::Index(map.edge_size()));
    }

    /// Membership in V_h^0: every boundary edge block vanishes.
    bool vanishes_on_boundary(const GlobalDofMap& map, double tol = 0.0) const
    {
        for (std::size_t ed = 0; ed < map.num_edges(); ed++)
            if (map.is_boundary_edge(ed) && edge(map, ed).cwiseAbs().maxCoeff() > tol)
                return false;
        return true;
    }
};

inline Eigen::VectorXd
gather_local(const Mesh& mesh, const GlobalDofMap& map, std::size_t e, const WeakFunction& v)
{
    if (std::size_t(v.coeffs.size()) != map.total())
        throw std::invalid_argument("weak function length does not match the DoF map");
    auto dofs = map.local_dofs(mesh, e);
    Eigen::VectorXd out(dofs.size());
    for (std::size_t i = 0; i < dofs.size(); i++)
        out(Eigen::Index(i)) = v.coeffs(Eigen::Index(dofs[i]));
    return out;
}

// ---------------------------------------------------------------------------
// Projections
// ---------------------------------------------------------------------------

inline Eigen::VectorXd
project_Q0(const ScalarField& fn, const Mesh& mesh, std::size_t e, int k,
           const DataQuadrature& dq = {})
{
    ElementBasis basis(mesh, e, k);
    const auto rule = element_data_rule(mesh, e, 2 * k + dq.extra_degree, dq);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(basis.size());
    for (std::size_t q = 0; q < rule.size(); q++)
        rhs += rule.weights[q] * fn(rule.points[q]) * basis.eval(rule.points[q]);
    Eigen::LLT<Eigen::MatrixXd> llt(mass_matrix(mesh, e, k));
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("singular element mass matrix on element " + std::to_string(e));
    return llt.solve(rhs);
}

inline Eigen::VectorXd
project_Qb(const ScalarField& fn, const Mesh& mesh, std::size_t edge, int j,
           const DataQuadrature& dq = {})
{
    const auto rule = edge_rule(mesh, edge, 2 * j + dq.extra_degree, &dq);
    EdgeBasis basis(j, mesh.edge_length(edge));
    Eigen::VectorXd c = Eigen::VectorXd::Zero(basis.size());
    for (std::size_t q = 0; q < rule.size(); q++)
        c += rule.weights[q] * fn(rule.points[q]) * basis.eval(rule.params[q]);
    return c.cwiseQuotient(basis.mass_diagonal());
}

inline WeakFunction
project_Qh(const ScalarField& fn, const Mesh& mesh, const Signature& sig,
           const DataQuadrature& dq = {})
{
    GlobalDofMap map(mesh, sig);
    WeakFunction v{Eigen::VectorXd::Zero(Eigen::Index(map.total()))};
    for (std::size_t e = 0; e < mesh.num_elements(); e++)
        v.coeffs.segment(Eigen::Index(map.interior_offset(e)), Eigen::Index(map.interior_size())) =
            project_Q0(fn, mesh, e, sig.k(), dq);
    for (std::size_t ed = 0; ed < mesh.num_edges(); ed++)
        v.coeffs.segment(Eigen::Index(map.edge_offset(ed)), Eigen::Index(map.edge_size())) =
            project_Qb(fn, mesh, ed, sig.j(), dq);
    return v;
}

/// Componentwise projection onto [P_s]^2; x block then y block.
inline Eigen::VectorXd
project_Qs_vector(const VectorField& fn, const Mesh& mesh, std::size_t e, int s,
                  const DataQuadrature& dq = {})
{
    const auto d = Eigen::Index(poly_dim(s));
    Eigen::VectorXd out(2 * d);
    out.head(d) = project_Q0([&](const Point& p) { return fn(p).x(); }, mesh, e, s, dq);
    out.tail(d) = project_Q0([&](const Point& p) { return fn(p).y(); }, mesh, e, s, dq);
    return out;
}

// ---------------------------------------------------------------------------
// Weak gradient
// ---------------------------------------------------------------------------

/// Legendre coefficients (canonical orientation) of Qb applied to the trace
/// of each interior basis function on one side of an element. Size (j+1) x dim P_k.
inline Eigen::MatrixXd
trace_projection(const Mesh& mesh, std::size_t e, std::size_t side, const Signature& sig)
{
    const auto ed = mesh.element_edges(e)[side].edge;
    ElementBasis basis(mesh, e, sig.k());
    EdgeBasis eb(sig.j(), mesh.edge_length(ed));
    const auto rule = edge_rule(mesh, ed, sig.k() + sig.j());
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(Eigen::Index(eb.size()), Eigen::Index(basis.size()));
    for (std::size_t q = 0; q < rule.size(); q++)
        P.noalias() += rule.weights[q] * eb.eval(rule.params[q]) * basis.eval(rule.points[q]).transpose();
    return eb.mass_diagonal().cwiseInverse().asDiagonal() * P;
}

struct LocalWeakGradient
{
    /// delta_g: local DoFs -> [P_l]^2 coefficients.
    Eigen::MatrixXd delta;
    /// grad v0 + delta_g v: local DoFs -> [P_m]^2 coefficients.
    Eigen::MatrixXd gradient;
    /// Per side, Qb of the interior trace (see trace_projection).
    std::vector<Eigen::MatrixXd> traces;
};

inline LocalWeakGradient
build_local_weak_gradient(const Mesh& mesh, std::size_t e, const Signature& sig)
{
    const auto& geo = mesh.geometry(e);
    const auto sides = mesh.element_edges(e);
    const auto n0 = Eigen::Index(sig.interior_size());
    const auto nb = Eigen::Index(sig.edge_size());
    const auto nloc = Eigen::Index(sig.local_size(sides.size()));
    const auto dl = Eigen::Index(poly_dim(sig.l()));
    const auto dm = Eigen::Index(poly_dim(sig.m()));

    ElementBasis psi_basis(mesh, e, sig.l());

    LocalWeakGradient out;
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(2 * dl, nloc);

    for (std::size_t s = 0; s < sides.size(); s++)
    {
        const auto ed = sides[s].edge;
        const Eigen::Vector2d& n = geo.normals[s];
        EdgeBasis eb(sig.j(), mesh.edge_length(ed));
        const auto rule = edge_rule(mesh, ed, sig.l() + sig.j());

        // B(psi, a) = <L_a, psi.n>_e
        Eigen::MatrixXd B = Eigen::MatrixXd::Zero(2 * dl, nb);
        for (std::size_t q = 0; q < rule.size(); q++)
        {
            Eigen::VectorXd psi = psi_basis.eval(rule.points[q]);
            Eigen::RowVectorXd L = eb.eval(rule.params[q]).transpose();
            B.topRows(dl).noalias() += (rule.weights[q] * n.x()) * psi * L;
            B.bottomRows(dl).noalias() += (rule.weights[q] * n.y()) * psi * L;
        }

        out.traces.push_back(trace_projection(mesh, e, s, sig));
        rhs.middleCols(n0 + Eigen::Index(s) * nb, nb) += B;
        rhs.leftCols(n0).noalias() -= B * out.traces.back();
    }

    Eigen::LLT<Eigen::MatrixXd> llt(mass_matrix(mesh, e, sig.l()));
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("singular vector mass matrix on element " + std::to_string(e));
    out.delta.resize(2 * dl, nloc);
    out.delta.topRows(dl) = llt.solve(rhs.topRows(dl));
    out.delta.bottomRows(dl) = llt.solve(rhs.bottomRows(dl));

    out.gradient = Eigen::MatrixXd::Zero(2 * dm, nloc);
    out.gradient.leftCols(n0) = gradient_embedding(ElementBasis(mesh, e, sig.k()), sig.m());
    out.gradient.topRows(dl) += out.delta.topRows(dl);
    out.gradient.middleRows(dm, dl) += out.delta.bottomRows(dl);
    return out;
}

/// Value of the interior component on element e at p.
inline double
eval_interior(const Mesh& mesh, const Signature& sig, const GlobalDofMap& map,
              const WeakFunction& v, std::size_t e, const Point& p)
{
    ElementBasis basis(mesh, e, sig.k());
    return basis.eval(p).dot(v.interior(map, e));
}

/// Value of the edge component at p on side `side` of element e, using the
/// element's own traversal direction and the stored orientation sign.
inline double
eval_edge_from_element(const Mesh& mesh, const Signature& sig, const GlobalDofMap& map,
                       const WeakFunction& v, std::size_t e, std::size_t side, const Point& p)
{
    auto cyc = mesh.element(e);
    const auto& ee = mesh.element_edges(e)[side];
    const Point& from = mesh.vertex(cyc[side]);
    const Point& to = mesh.vertex(cyc[(side + 1) % cyc.size()]);
    const Eigen::Vector2d d = to - from;
    // Local coordinate in [-1,1] along the element's traversal.
    double t_local = 2.0 * (p - from).dot(d) / d.squaredNorm() - 1.0;
    double t = ee.sign * t_local;
    return legendre(sig.j(), t).dot(v.edge(map, ee.edge));
}

} // namespace gwg
