// Gauss-type quadrature on [-1,1], the reference triangle, the reference
// square, and their images on mesh elements and edges.

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mesh.hpp"

namespace gwg {

struct QuadratureRule
{
    std::vector<Point>  points;
    std::vector<double> weights;
    int                 degree = 0;

    std::size_t size() const { return points.size(); }
};

struct LineRule
{
    std::vector<double> points;
    std::vector<double> weights;
    int                 degree = 0;

    std::size_t size() const { return points.size(); }
};

namespace detail {

inline constexpr std::size_t max_gauss_points = 96;

inline LineRule
compute_gauss_legendre(std::size_t n)
{
    LineRule r;
    r.points.resize(n);
    r.weights.resize(n);
    r.degree = static_cast<int>(2 * n - 1);
    for (std::size_t i = 0; i < (n + 1) / 2; i++)
    {
        double x = std::cos(std::numbers::pi * (double(i) + 0.75) / (double(n) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; it++)
        {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= n; k++)
            {
                double pk = ((2.0 * double(k) - 1.0) * x * p1 - (double(k) - 1.0) * p0) / double(k);
                p0 = p1;
                p1 = pk;
            }
            dp = double(n) * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        // Recompute the derivative at the converged node.
        double p0 = 1.0, p1 = x;
        for (std::size_t k = 2; k <= n; k++)
        {
            double pk = ((2.0 * double(k) - 1.0) * x * p1 - (double(k) - 1.0) * p0) / double(k);
            p0 = p1;
            p1 = pk;
        }
        dp = double(n) * (x * p1 - p0) / (x * x - 1.0);
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.points[i] = -x;
        r.points[n - 1 - i] = x;
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1)
        r.points[n / 2] = 0.0;
    return r;
}

inline const std::vector<LineRule>&
gauss_table()
{
    static const std::vector<LineRule> table = [] {
        std::vector<LineRule> t(max_gauss_points + 1);
        for (std::size_t n = 1; n <= max_gauss_points; n++)
            t[n] = compute_gauss_legendre(n);
        return t;
    }();
    return table;
}

} // namespace detail

/// n-point Gauss-Legendre rule on [-1,1].
inline const LineRule&
gauss_legendre(std::size_t n)
{
    if (n == 0 || n > detail::max_gauss_points)
        throw std::domain_error("Gauss-Legendre rule with " + std::to_string(n) + " points not available");
    return detail::gauss_table()[n];
}

inline std::size_t
gauss_points_for(int degree)
{
    return static_cast<std::size_t>(std::max(1, (degree + 2) / 2));
}

/// Gauss-Legendre on [-1,1] exact to the given degree.
inline const LineRule&
edge_quadrature(int degree)
{
    if (degree < 0)
        throw std::domain_error("negative quadrature degree");
    return gauss_legendre(gauss_points_for(degree));
}

inline constexpr int max_element_quadrature_degree = 2 * int(detail::max_gauss_points) - 3;

/// Rule on the reference triangle (0,0),(1,0),(0,1) or the reference square
/// [0,1]^2. Triangles use the Duffy-collapsed tensor Gauss rule except for
/// degree <= 1, which gets the centroid rule.
inline QuadratureRule
element_quadrature(CellShape shape, int degree)
{
    if (degree < 0)
        throw std::domain_error("negative quadrature degree");
    if (degree > max_element_quadrature_degree)
        throw std::domain_error("element quadrature degree " + std::to_string(degree) +
                                " exceeds the supported maximum " +
                                std::to_string(max_element_quadrature_degree));

    QuadratureRule q;
    q.degree = degree;

    if (shape == CellShape::rectangle)
    {
        const auto& g = gauss_legendre(gauss_points_for(degree));
        for (std::size_t i = 0; i < g.size(); i++)
            for (std::size_t k = 0; k < g.size(); k++)
            {
                q.points.emplace_back(0.5 * (g.points[i] + 1.0), 0.5 * (g.points[k] + 1.0));
                q.weights.push_back(0.25 * g.weights[i] * g.weights[k]);
            }
        return q;
    }

    if (degree <= 1)
    {
        q.points.emplace_back(1.0 / 3.0, 1.0 / 3.0);
        q.weights.push_back(0.5);
        return q;
    }

    // x = u, y = v (1 - u), dA = (1 - u) du dv; the u-integrand has degree d+1.
    const auto& gu = gauss_legendre(gauss_points_for(degree + 1));
    const auto& gv = gauss_legendre(gauss_points_for(degree));
    for (std::size_t i = 0; i < gu.size(); i++)
    {
        double u = 0.5 * (gu.points[i] + 1.0);
        for (std::size_t k = 0; k < gv.size(); k++)
        {
            double v = 0.5 * (gv.points[k] + 1.0);
            q.points.emplace_back(u, v * (1.0 - u));
            q.weights.push_back(0.25 * gu.weights[i] * gv.weights[k] * (1.0 - u));
        }
    }
    return q;
}

/// Optional refinement of data integrals near a point singularity of the
/// integrand (a mesh vertex). Cells and edges touching it get a composite
/// rule with `levels` rounds of dyadic subdivision toward that vertex.
struct DataQuadrature
{
    int                   extra_degree = 4;
    std::optional<Point>  singularity;
    int                   levels = 4;
};

namespace detail {

// Affine image of the reference rule on the parallelogram/triangle spanned by
// origin + s*e1 + t*e2.
inline void
append_mapped(QuadratureRule& out, const QuadratureRule& ref,
              const Point& origin, const Eigen::Vector2d& e1, const Eigen::Vector2d& e2)
{
    double jac = std::abs(e1.x() * e2.y() - e1.y() * e2.x());
    for (std::size_t i = 0; i < ref.size(); i++)
    {
        out.points.push_back(origin + ref.points[i].x() * e1 + ref.points[i].y() * e2);
        out.weights.push_back(ref.weights[i] * jac);
    }
}

inline void
append_graded_triangle(QuadratureRule& out, const QuadratureRule& ref,
                       Point corner, Point p, Point q, int levels)
{
    for (int l = 0; l < levels; l++)
    {
        Point mp = 0.5 * (corner + p), mq = 0.5 * (corner + q);
        append_mapped(out, ref, mp, p - mp, (0.5 * (p + q)) - mp);
        append_mapped(out, ref, mq, (0.5 * (p + q)) - mq, q - mq);
        append_mapped(out, ref, 0.5 * (p + q), mq - 0.5 * (p + q), mp - 0.5 * (p + q));
        p = mp;
        q = mq;
    }
    // Reference vertex (1,0) is the collapsed one; send it to the corner.
    append_mapped(out, ref, p, corner - p, q - p);
}

// Parallelogram corner + s*a + t*b, s,t in [0,1], graded toward `corner`.
inline void
append_graded_parallelogram(QuadratureRule& out, const QuadratureRule& ref, const QuadratureRule& tri,
                            Point corner, Eigen::Vector2d a, Eigen::Vector2d b, int levels)
{
    for (int l = 0; l < levels; l++)
    {
        a *= 0.5;
        b *= 0.5;
        append_mapped(out, ref, corner + a, a, b);
        append_mapped(out, ref, corner + b, a, b);
        append_mapped(out, ref, corner + a + b, a, b);
    }
    append_mapped(out, tri, corner + a, -a, b);
    append_mapped(out, tri, corner + b, -b, a);
}

} // namespace detail

/// Physical rule on a mesh element exact to `degree` for polynomial integrands.
inline QuadratureRule
element_rule(const Mesh& mesh, std::size_t e, int degree)
{
    auto cyc = mesh.element(e);
    const auto ref = element_quadrature(mesh.shape(), degree);
    QuadratureRule out;
    out.degree = degree;
    const Point& p0 = mesh.vertex(cyc[0]);
    if (mesh.shape() == CellShape::triangle)
        detail::append_mapped(out, ref, p0, mesh.vertex(cyc[1]) - p0, mesh.vertex(cyc[2]) - p0);
    else
        detail::append_mapped(out, ref, p0, mesh.vertex(cyc[1]) - p0, mesh.vertex(cyc[3]) - p0);
    return out;
}

/// Element rule for non-polynomial data, graded toward a singular vertex when
/// the element touches it.
inline QuadratureRule
element_data_rule(const Mesh& mesh, std::size_t e, int degree, const DataQuadrature& dq)
{
    if (dq.singularity)
    {
        auto cyc = mesh.element(e);
        const std::size_t nv = cyc.size();
        for (std::size_t i = 0; i < nv; i++)
        {
            const Point& c = mesh.vertex(cyc[i]);
            if ((c - *dq.singularity).norm() > 1e-14)
                continue;
            const auto ref = element_quadrature(mesh.shape(), degree);
            QuadratureRule out;
            out.degree = degree;
            const Point& next = mesh.vertex(cyc[(i + 1) % nv]);
            const Point& prev = mesh.vertex(cyc[(i + nv - 1) % nv]);
            if (mesh.shape() == CellShape::triangle)
                detail::append_graded_triangle(out, ref, c, next, prev, dq.levels);
            else
                detail::append_graded_parallelogram(out, ref, element_quadrature(CellShape::triangle, degree), c,
                                                    next - c, prev - c, dq.levels);
            return out;
        }
    }
    return element_rule(mesh, e, degree);
}

/// Edge rule in canonical parametrization: `params` holds t in [-1,1] for
/// each point, `weights` already include the arc-length factor.
struct EdgeRule
{
    std::vector<Point>  points;
    std::vector<double> params;
    std::vector<double> weights;

    std::size_t size() const { return points.size(); }
};

inline EdgeRule
edge_rule(const Mesh& mesh, std::size_t edge, int degree, const DataQuadrature* dq = nullptr)
{
    const Point a = mesh.edge_start(edge);
    const Point b = mesh.edge_end(edge);
    const double half = 0.5 * (b - a).norm();
    const auto& g = edge_quadrature(degree);

    // Sub-intervals of [-1,1]; graded toward an endpoint at the singularity.
    std::vector<std::array<double, 2>> pieces{{-1.0, 1.0}};
    if (dq && dq->singularity)
    {
        bool at_a = (a - *dq->singularity).norm() < 1e-14;
        bool at_b = (b - *dq->singularity).norm() < 1e-14;
        if (at_a || at_b)
        {
            pieces.clear();
            double lo = -1.0, hi = 1.0;
            for (int l = 0; l < dq->levels; l++)
            {
                double mid = 0.5 * (lo + hi);
                if (at_a)
                {
                    pieces.push_back({mid, hi});
                    hi = mid;
                }
                else
                {
                    pieces.push_back({lo, mid});
                    lo = mid;
                }
            }
            pieces.push_back({lo, hi});
        }
    }

    EdgeRule r;
    for (const auto& [lo, hi] : pieces)
    {
        double c = 0.5 * (lo + hi), w = 0.5 * (hi - lo);
        for (std::size_t i = 0; i < g.size(); i++)
        {
            double t = c + w * g.points[i];
            r.params.push_back(t);
            r.points.push_back(0.5 * (a + b) + 0.5 * t * (b - a));
            r.weights.push_back(g.weights[i] * w * half);
        }
    }
    return r;
}

} // namespace gwg
