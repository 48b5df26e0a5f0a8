// Manufactured solutions, error norms, and convergence studies.

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "assembly.hpp"
#include "mesh.hpp"
#include "weakspace.hpp"

namespace gwg {

/// Exact solution u of -div(A grad u) = f with A = I, u = g on the boundary.
struct ManufacturedCase
{
    std::string           name;
    ScalarField           u;
    VectorField           grad_u;
    ScalarField           f;
    ScalarField           g;
    std::optional<Point>  singularity;  // where u is not smooth, if anywhere
    std::string           regularity;
};

namespace cases {

inline ManufacturedCase
cospi_cospi()
{
    using std::numbers::pi;
    auto u = [](const Point& p) { return std::cos(pi * p.x()) * std::cos(pi * p.y()); };
    return {"cospi_cospi", u,
            [](const Point& p) {
                return Eigen::Vector2d(-pi * std::sin(pi * p.x()) * std::cos(pi * p.y()),
                                       -pi * std::cos(pi * p.x()) * std::sin(pi * p.y()));
            },
            [u](const Point& p) { return 2.0 * pi * pi * u(p); }, u, std::nullopt, "smooth"};
}

inline ManufacturedCase
cospi_sinpi()
{
    using std::numbers::pi;
    auto u = [](const Point& p) { return std::cos(pi * p.x()) * std::sin(pi * p.y()); };
    return {"cospi_sinpi", u,
            [](const Point& p) {
                return Eigen::Vector2d(-pi * std::sin(pi * p.x()) * std::sin(pi * p.y()),
                                       pi * std::cos(pi * p.x()) * std::cos(pi * p.y()));
            },
            [u](const Point& p) { return 2.0 * pi * pi * u(p); }, u, std::nullopt, "smooth"};
}

inline ManufacturedCase
x2_cospi()
{
    using std::numbers::pi;
    auto u = [](const Point& p) { return p.x() * p.x() * std::cos(pi * p.y()); };
    return {"x2_cospi", u,
            [](const Point& p) {
                return Eigen::Vector2d(2.0 * p.x() * std::cos(pi * p.y()),
                                       -pi * p.x() * p.x() * std::sin(pi * p.y()));
            },
            [](const Point& p) {
                return (pi * pi * p.x() * p.x() - 2.0) * std::cos(pi * p.y());
            },
            u, std::nullopt, "smooth"};
}

/// u = x(x-1) y(y-1) (x^2+y^2)^((alpha-2)/2), in H^{1+alpha-eps}; singular at the origin.
inline ManufacturedCase
lowreg(double alpha)
{
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("lowreg needs 0 < alpha <= 1");
    const double beta = 0.5 * (alpha - 2.0);
    auto u = [beta](const Point& p) {
        const double x = p.x(), y = p.y();
        return x * (x - 1.0) * y * (y - 1.0) * std::pow(x * x + y * y, beta);
    };
    auto grad = [beta](const Point& p) {
        const double x = p.x(), y = p.y();
        const double R = x * x + y * y;
        const double q = x * (x - 1.0) * y * (y - 1.0);
        const double qx = (2.0 * x - 1.0) * y * (y - 1.0);
        const double qy = x * (x - 1.0) * (2.0 * y - 1.0);
        const double Rb = std::pow(R, beta), Rb1 = std::pow(R, beta - 1.0);
        return Eigen::Vector2d(Rb * qx + 2.0 * beta * q * x * Rb1, Rb * qy + 2.0 * beta * q * y * Rb1);
    };
    // -lap u = -(R^b lap q + 4b R^{b-1} (x q_x + y q_y) + 4b^2 q R^{b-1}).
    auto f = [beta](const Point& p) {
        const double x = p.x(), y = p.y();
        const double R = x * x + y * y;
        const double q = x * (x - 1.0) * y * (y - 1.0);
        const double qx = (2.0 * x - 1.0) * y * (y - 1.0);
        const double qy = x * (x - 1.0) * (2.0 * y - 1.0);
        const double lap_q = 2.0 * y * (y - 1.0) + 2.0 * x * (x - 1.0);
        const double Rb = std::pow(R, beta), Rb1 = std::pow(R, beta - 1.0);
        return -(Rb * lap_q + 4.0 * beta * Rb1 * (x * qx + y * qy) + 4.0 * beta * beta * q * Rb1);
    };
    return {"lowreg", u, grad, f, u, Point(0.0, 0.0),
            "H^{1+alpha-eps}, alpha = " + std::to_string(alpha)};
}

inline ManufacturedCase
by_name(const std::string& name, double alpha = 0.5)
{
    if (name == "cospi_cospi")
        return cospi_cospi();
    if (name == "cospi_sinpi")
        return cospi_sinpi();
    if (name == "x2_cospi")
        return x2_cospi();
    if (name == "lowreg")
        return lowreg(alpha);
    throw std::invalid_argument("unknown solution case '" + name + "'");
}

} // namespace cases

inline DataQuadrature
data_quadrature_for(const ManufacturedCase& c)
{
    DataQuadrature dq;
    dq.singularity = c.singularity;
    return dq;
}

/// e_h = Q_h u - u_h.
inline WeakFunction
error_function(const ScalarField& u_exact, const WeakFunction& u_h, const Mesh& mesh,
               const Signature& sig, const DataQuadrature& dq = {})
{
    WeakFunction qu = project_Qh(u_exact, mesh, sig, dq);
    if (qu.coeffs.size() != u_h.coeffs.size())
        throw std::invalid_argument("discrete solution does not match the mesh and element family");
    return {qu.coeffs - u_h.coeffs};
}

/// Sums of sum_T (A grad_g v, grad_g v)_T and s(v, v).
struct EnergySplit
{
    double stiffness = 0.0;
    double stabilizer = 0.0;
};

inline EnergySplit
energy_split(const WeakFunction& v, const Mesh& mesh, const Signature& sig, const SchemeParameters& params)
{
    GlobalDofMap map(mesh, sig);
    EnergySplit out;
    const auto n0 = Eigen::Index(sig.interior_size());
    const auto nb = Eigen::Index(sig.edge_size());
    for (std::size_t e = 0; e < mesh.num_elements(); e++)
    {
        // Weak gradient and trace jumps first, then their norms.
        const auto wg = build_local_weak_gradient(mesh, e, sig);
        const Eigen::VectorXd x = gather_local(mesh, map, e, v);
        const Eigen::VectorXd g = wg.gradient * x;
        out.stiffness += g.dot(weighted_vector_mass(mesh, e, sig.m(), params.coefficient_on(e)) * g);

        if (params.rho == 0.0)
            continue;
        const double weight = params.rho * std::pow(mesh.geometry(e).diameter, params.gamma);
        const auto sides = mesh.element_edges(e);
        for (std::size_t s = 0; s < sides.size(); s++)
        {
            const Eigen::VectorXd jump =
                wg.traces[s] * x.head(n0) - x.segment(n0 + Eigen::Index(s) * nb, nb);
            EdgeBasis eb(sig.j(), mesh.edge_length(sides[s].edge));
            out.stabilizer += weight * jump.cwiseAbs2().dot(eb.mass_diagonal());
        }
    }
    return out;
}

inline double
energy_norm(const WeakFunction& v, const Mesh& mesh, const Signature& sig, const SchemeParameters& params)
{
    const auto s = energy_split(v, mesh, sig, params);
    return std::sqrt(std::max(0.0, s.stiffness + s.stabilizer));
}

inline double
l2_norm_e0(const WeakFunction& v, const Mesh& mesh, const Signature& sig)
{
    GlobalDofMap map(mesh, sig);
    double sum = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); e++)
    {
        const Eigen::VectorXd c = v.interior(map, e);
        sum += c.dot(mass_matrix(mesh, e, sig.k()) * c);
    }
    return std::sqrt(std::max(0.0, sum));
}

/// (sum_T h_T ||e_b||^2_{dT})^{1/2}; interior edges count once per neighbour.
inline double
edge_norm_eb(const WeakFunction& v, const Mesh& mesh, const Signature& sig)
{
    GlobalDofMap map(mesh, sig);
    double sum = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); e++)
    {
        const double h = mesh.geometry(e).diameter;
        for (const auto& side : mesh.element_edges(e))
        {
            const Eigen::VectorXd c = v.edge(map, side.edge);
            EdgeBasis eb(sig.j(), mesh.edge_length(side.edge));
            sum += h * c.cwiseAbs2().dot(eb.mass_diagonal());
        }
    }
    return std::sqrt(sum);
}

// ---------------------------------------------------------------------------
// Convergence studies
// ---------------------------------------------------------------------------

enum class MeshFamily { triangular, rectangular };

/// Mesh for a nominal 1/h label: n = label for triangles, level = log2(label) - 1
/// for rectangles.
inline Mesh
build_mesh(MeshFamily family, std::size_t label)
{
    if (family == MeshFamily::triangular)
        return build_uniform_triangular(label);
    if (label < 2 || (label & (label - 1)) != 0)
        throw std::invalid_argument("rectangular mesh label " + std::to_string(label) +
                                    " is not a power of two >= 2");
    unsigned level = 0;
    while ((std::size_t{2} << level) < label)
        level++;
    return build_uniform_rectangular(level);
}

struct LevelErrors
{
    double      label = 0.0;
    double      h_max = 0.0;
    std::size_t dofs = 0;
    double      energy = 0.0;
    double      l2 = 0.0;
    double      edge = 0.0;
};

struct Rates
{
    double energy, l2, edge;
};

inline double
convergence_rate(double err_coarse, double err_fine, double h_coarse, double h_fine)
{
    if (!(err_coarse > 0.0 && err_fine > 0.0))
        return std::numeric_limits<double>::quiet_NaN();
    return std::log(err_coarse / err_fine) / std::log(h_coarse / h_fine);
}

struct ErrorReport
{
    std::vector<LevelErrors> levels;

    /// rates()[i] compares level i with level i+1.
    std::vector<Rates> rates() const
    {
        std::vector<Rates> out;
        for (std::size_t i = 1; i < levels.size(); i++)
        {
            const auto& c = levels[i - 1];
            const auto& f = levels[i];
            out.push_back({convergence_rate(c.energy, f.energy, c.h_max, f.h_max),
                           convergence_rate(c.l2, f.l2, c.h_max, f.h_max),
                           convergence_rate(c.edge, f.edge, c.h_max, f.h_max)});
        }
        return out;
    }
};

/// SingularSystem at some level of a study; carries the levels completed so far.
class StudyFailure : public SingularSystem
{
public:
    StudyFailure(const SingularSystem& cause, std::size_t level, ErrorReport partial)
        : SingularSystem(cause), level_(level), partial_(std::move(partial))
    {
        message_ = std::string("level ") + std::to_string(level) + ": " + cause.what();
    }

    const char* what() const noexcept override { return message_.c_str(); }
    std::size_t level() const { return level_; }
    const ErrorReport& partial() const { return partial_; }

private:
    std::size_t  level_;
    ErrorReport  partial_;
    std::string  message_;
};

struct StudyOptions
{
    SolverKind solver = SolverKind::direct;
    /// Solve with f = 0 and g = 0 while still measuring against case.u.
    bool zero_data = false;
    /// Called after each completed level.
    std::function<void(const LevelErrors&)> on_level;
};

inline LevelErrors
run_level(const ManufacturedCase& c, const Mesh& mesh, const Signature& sig,
          const SchemeParameters& params, const StudyOptions& opts)
{
    const auto dq = data_quadrature_for(c);
    const ScalarField zero = [](const Point&) { return 0.0; };
    const auto sys = assemble(mesh, sig, params, opts.zero_data ? zero : c.f,
                              opts.zero_data ? zero : c.g, dq);
    const auto uh = solve(sys, opts.solver);
    const auto eh = error_function(c.u, uh, mesh, sig, dq);

    LevelErrors out;
    out.label = mesh.label();
    out.h_max = mesh.h_max();
    out.dofs = sys.free_dofs.size();
    out.energy = energy_norm(eh, mesh, sig, params);
    out.l2 = l2_norm_e0(eh, mesh, sig);
    out.edge = edge_norm_eb(eh, mesh, sig);
    return out;
}

inline ErrorReport
run_convergence_study(const ManufacturedCase& c, MeshFamily family, const std::vector<std::size_t>& labels,
                      const Signature& sig, const SchemeParameters& params, const StudyOptions& opts = {})
{
    if (labels.size() < 2)
        throw std::invalid_argument("a convergence study needs at least two levels");
    ErrorReport report;
    for (std::size_t i = 0; i < labels.size(); i++)
    {
        const Mesh mesh = build_mesh(family, labels[i]);
        try
        {
            report.levels.push_back(run_level(c, mesh, sig, params, opts));
        }
        catch (const SingularSystem& err)
        {
            throw StudyFailure(err, i, report);
        }
        if (opts.on_level)
            opts.on_level(report.levels.back());
    }
    return report;
}

} // namespace gwg
