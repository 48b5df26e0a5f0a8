// Assembly and solution of
//     a(u_h, v) + s(u_h, v) = (f, v0)   for all v in V_h^0,   u_b = Qb g on dOmega,
// with a(w,v) = sum_T (A grad_g w, grad_g v)_T and
//      s(w,v) = sum_T rho h_T^gamma <Qb w0 - wb, Qb v0 - vb>_{dT}.

#pragma once

#include <cmath>
#include <cstddef>
#include <iomanip>
#include <sstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/IterativeLinearSolvers>

#include "mesh.hpp"
#include "polybasis.hpp"
#include "quadrature.hpp"
#include "weakspace.hpp"

namespace gwg {

struct SchemeParameters
{
    double rho = 1.0;
    double gamma = -1.0;
    /// Per-element symmetric positive definite tensor; empty means identity.
    std::vector<Eigen::Matrix2d> coefficient;

    Eigen::Matrix2d coefficient_on(std::size_t e) const
    {
        return coefficient.empty() ? Eigen::Matrix2d::Identity() : coefficient.at(e);
    }

    void validate(const Mesh& mesh) const
    {
        if (!(rho >= 0.0))
            throw std::invalid_argument("stabilizer weight rho must be non-negative");
        if (!std::isfinite(gamma))
            throw std::invalid_argument("stabilizer exponent gamma must be finite");
        if (coefficient.empty())
            return;
        if (coefficient.size() != mesh.num_elements())
            throw std::invalid_argument("coefficient count does not match the element count");
        for (std::size_t e = 0; e < coefficient.size(); e++)
        {
            const auto& A = coefficient[e];
            if (std::abs(A(0, 1) - A(1, 0)) > 1e-14 * A.cwiseAbs().maxCoeff())
                throw std::invalid_argument("coefficient on element " + std::to_string(e) + " is not symmetric");
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(A);
            if (eig.eigenvalues().minCoeff() <= 0.0)
                throw std::invalid_argument("coefficient on element " + std::to_string(e) +
                                            " is not positive definite");
        }
    }
};

/// [P_m]^2 mass matrix weighted by the constant tensor A.
inline Eigen::MatrixXd
weighted_vector_mass(const Mesh& mesh, std::size_t e, int m, const Eigen::Matrix2d& A)
{
    const Eigen::MatrixXd M = mass_matrix(mesh, e, m);
    const auto d = M.rows();
    Eigen::MatrixXd K(2 * d, 2 * d);
    K.topLeftCorner(d, d) = A(0, 0) * M;
    K.topRightCorner(d, d) = A(0, 1) * M;
    K.bottomLeftCorner(d, d) = A(1, 0) * M;
    K.bottomRightCorner(d, d) = A(1, 1) * M;
    return K;
}

inline Eigen::MatrixXd
local_stiffness(const Mesh& mesh, std::size_t e, const Signature& sig,
                const SchemeParameters& params, const LocalWeakGradient& wg)
{
    const Eigen::MatrixXd K = weighted_vector_mass(mesh, e, sig.m(), params.coefficient_on(e));
    Eigen::MatrixXd S = wg.gradient.transpose() * K * wg.gradient;
    return 0.5 * (S + S.transpose());
}

inline Eigen::MatrixXd
local_stabilizer(const Mesh& mesh, std::size_t e, const Signature& sig,
                 const SchemeParameters& params, const LocalWeakGradient& wg)
{
    const auto sides = mesh.element_edges(e);
    const auto n0 = Eigen::Index(sig.interior_size());
    const auto nb = Eigen::Index(sig.edge_size());
    const auto nloc = Eigen::Index(sig.local_size(sides.size()));
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(nloc, nloc);
    if (params.rho == 0.0)
        return S;

    const double weight = params.rho * std::pow(mesh.geometry(e).diameter, params.gamma);
    for (std::size_t s = 0; s < sides.size(); s++)
    {
        // C maps local DoFs to the Legendre coefficients of Qb v0 - vb on this side.
        Eigen::MatrixXd C = Eigen::MatrixXd::Zero(nb, nloc);
        C.leftCols(n0) = wg.traces[s];
        C.middleCols(n0 + Eigen::Index(s) * nb, nb) = -Eigen::MatrixXd::Identity(nb, nb);
        EdgeBasis eb(sig.j(), mesh.edge_length(sides[s].edge));
        S.noalias() += C.transpose() * eb.mass_diagonal().asDiagonal() * C;
    }
    return weight * S;
}

inline Eigen::MatrixXd
local_stabilizer(const Mesh& mesh, std::size_t e, const Signature& sig, const SchemeParameters& params)
{
    return local_stabilizer(mesh, e, sig, params, build_local_weak_gradient(mesh, e, sig));
}

struct LocalOperators
{
    LocalWeakGradient weak_gradient;
    Eigen::MatrixXd   stiffness;
    Eigen::MatrixXd   stabilizer;
};

inline LocalOperators
local_operators(const Mesh& mesh, std::size_t e, const Signature& sig, const SchemeParameters& params)
{
    LocalOperators op;
    op.weak_gradient = build_local_weak_gradient(mesh, e, sig);
    op.stiffness = local_stiffness(mesh, e, sig, params, op.weak_gradient);
    op.stabilizer = local_stabilizer(mesh, e, sig, params, op.weak_gradient);
    return op;
}

/// Raised when the factorization meets a pivot that is not safely positive.
class SingularSystem : public std::runtime_error
{
public:
    SingularSystem(std::size_t pivot, std::size_t dof, double value)
        : std::runtime_error("singular system: pivot " + std::to_string(pivot) + " (global DoF " +
                             std::to_string(dof) + ") has value " + format_value(value)),
          pivot_(pivot), dof_(dof)
    {}

    /// Position of the pivot in elimination order.
    std::size_t pivot() const { return pivot_; }
    /// Global DoF eliminated at that pivot.
    std::size_t dof() const { return dof_; }

private:
    static std::string format_value(double v)
    {
        std::ostringstream os;
        os << std::setprecision(3) << v;
        return os.str();
    }

    std::size_t pivot_, dof_;
};

struct GlobalSystem
{
    Eigen::SparseMatrix<double> matrix;     // free DoFs only, full symmetric storage
    Eigen::VectorXd             rhs;
    GlobalDofMap                dofs;
    std::vector<std::ptrdiff_t> free_index; // global DoF -> free index, -1 on the boundary
    std::vector<std::size_t>    free_dofs;  // free index -> global DoF
    Eigen::VectorXd             dirichlet;  // global length; Qb g on boundary blocks, zero elsewhere
};

inline GlobalSystem
assemble(const Mesh& mesh, const Signature& sig, const SchemeParameters& params,
         const ScalarField& f, const ScalarField& g, const DataQuadrature& dq = {})
{
    params.validate(mesh);
    GlobalSystem sys{.matrix = {}, .rhs = {}, .dofs = GlobalDofMap(mesh, sig), .free_index = {},
                     .free_dofs = {}, .dirichlet = {}};
    const auto& map = sys.dofs;

    sys.free_index.assign(map.total(), -1);
    for (std::size_t i = 0; i < map.total(); i++)
        if (!map.is_boundary_dof(i))
        {
            sys.free_index[i] = std::ptrdiff_t(sys.free_dofs.size());
            sys.free_dofs.push_back(i);
        }
    const auto nfree = Eigen::Index(sys.free_dofs.size());

    sys.dirichlet = Eigen::VectorXd::Zero(Eigen::Index(map.total()));
    for (std::size_t ed = 0; ed < mesh.num_edges(); ed++)
        if (map.is_boundary_edge(ed))
            sys.dirichlet.segment(Eigen::Index(map.edge_offset(ed)), Eigen::Index(map.edge_size())) =
                project_Qb(g, mesh, ed, sig.j(), dq);

    sys.rhs = Eigen::VectorXd::Zero(nfree);
    std::vector<Eigen::Triplet<double>> triplets;
    {
        const auto nloc = sig.local_size(mesh.shape() == CellShape::triangle ? 3 : 4);
        triplets.reserve(mesh.num_elements() * nloc * nloc);
    }

    for (std::size_t e = 0; e < mesh.num_elements(); e++)
    {
        const auto op = local_operators(mesh, e, sig, params);
        const Eigen::MatrixXd A = op.stiffness + op.stabilizer;
        const auto dofs = map.local_dofs(mesh, e);

        ElementBasis basis(mesh, e, sig.k());
        const auto rule = element_data_rule(mesh, e, 2 * sig.k() + dq.extra_degree, dq);
        Eigen::VectorXd load = Eigen::VectorXd::Zero(Eigen::Index(basis.size()));
        for (std::size_t q = 0; q < rule.size(); q++)
            load += rule.weights[q] * f(rule.points[q]) * basis.eval(rule.points[q]);

        for (std::size_t r = 0; r < dofs.size(); r++)
        {
            const auto fr = sys.free_index[dofs[r]];
            if (fr < 0)
                continue;
            if (r < basis.size())
                sys.rhs(fr) += load(Eigen::Index(r));
            for (std::size_t c = 0; c < dofs.size(); c++)
            {
                const auto fc = sys.free_index[dofs[c]];
                const double a = A(Eigen::Index(r), Eigen::Index(c));
                if (fc >= 0)
                    triplets.emplace_back(fr, fc, a);
                else
                    sys.rhs(fr) -= a * sys.dirichlet(Eigen::Index(dofs[c]));
            }
        }
    }

    sys.matrix.resize(nfree, nfree);
    sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
    sys.matrix.makeCompressed();
    return sys;
}

enum class SolverKind { direct, cg };

/// Relative threshold below which an LDL^T pivot counts as singular.
inline constexpr double pivot_tolerance = 1e-12;

inline WeakFunction
solve(const GlobalSystem& sys, SolverKind kind = SolverKind::direct)
{
    Eigen::VectorXd x_free;
    if (sys.matrix.rows() > 0)
    {
        if (kind == SolverKind::direct)
        {
            Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
            ldlt.compute(sys.matrix);
            const Eigen::VectorXd D = ldlt.vectorD();
            const double scale = D.cwiseAbs().maxCoeff();
            for (Eigen::Index p = 0; p < D.size(); p++)
                if (!(D(p) > pivot_tolerance * scale))
                {
                    const auto free = std::size_t(ldlt.permutationPinv().indices()(p));
                    throw SingularSystem(std::size_t(p), sys.free_dofs[free], D(p));
                }
            if (ldlt.info() != Eigen::Success)
                throw SingularSystem(0, sys.free_dofs.front(), 0.0);
            x_free = ldlt.solve(sys.rhs);
        }
        else
        {
            Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                                     Eigen::DiagonalPreconditioner<double>> cg;
            cg.setTolerance(1e-13);
            cg.setMaxIterations(std::max<Eigen::Index>(1000, 20 * sys.matrix.rows()));
            cg.compute(sys.matrix);
            x_free = cg.solve(sys.rhs);
            if (cg.info() != Eigen::Success)
                throw std::runtime_error("conjugate gradient did not converge (" +
                                         std::to_string(cg.iterations()) + " iterations)");
        }
    }

    WeakFunction u{sys.dirichlet};
    for (std::size_t i = 0; i < sys.free_dofs.size(); i++)
        u.coeffs(Eigen::Index(sys.free_dofs[i])) = x_free(Eigen::Index(i));
    return u;
}

/// Free-DoF part of a full coefficient vector.
inline Eigen::VectorXd
restrict_to_free(const GlobalSystem& sys, const WeakFunction& v)
{
    Eigen::VectorXd out(Eigen::Index(sys.free_dofs.size()));
    for (std::size_t i = 0; i < sys.free_dofs.size(); i++)
        out(Eigen::Index(i)) = v.coeffs(Eigen::Index(sys.free_dofs[i]));
    return out;
}

/// `row col value` per stored entry, 0-based, 17 significant digits.
inline void
write_coordinate(std::ostream& os, const GlobalSystem& sys)
{
    auto old = os.precision(17);
    for (int c = 0; c < sys.matrix.outerSize(); c++)
        for (Eigen::SparseMatrix<double>::InnerIterator it(sys.matrix, c); it; ++it)
            os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    os.precision(old);
}

} // namespace gwg
