// Uniform triangular and rectangular partitions of the unit square.
//
// A Mesh owns vertices, element vertex cycles (counterclockwise), the edge
// skeleton with left/right incidence, and precomputed per-element geometry.
// Edges store their vertex pair in ascending index order; that canonical
// orientation is what edge polynomial coefficients are expressed against.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace gwg {

using Point = Eigen::Vector2d;

enum class CellShape { triangle, rectangle };

struct Edge
{
    std::array<std::size_t, 2>  vertices;   // ascending
    std::size_t                 left;
    std::optional<std::size_t>  right;

    bool boundary() const { return !right.has_value(); }
};

/// Side of an element: global edge index plus +1 when the element traverses
/// the edge along its canonical orientation, -1 otherwise.
struct ElementEdge
{
    std::size_t edge;
    int         sign;
};

struct ElementGeometry
{
    Point                        centroid;
    double                       diameter;
    double                       area;
    std::vector<Eigen::Vector2d> normals;   // outward, one per side
    std::vector<double>          lengths;
};

class Mesh
{
public:
    Mesh(std::vector<Point> vertices,
         std::vector<std::vector<std::size_t>> elements,
         CellShape shape,
         double label)
        : vertices_(std::move(vertices)), elements_(std::move(elements)),
          shape_(shape), label_(label)
    {
        build_edges();
        build_geometry();
    }

    std::size_t num_vertices() const { return vertices_.size(); }
    std::size_t num_elements() const { return elements_.size(); }
    std::size_t num_edges() const { return edges_.size(); }

    const Point& vertex(std::size_t i) const { return vertices_.at(i); }
    std::span<const std::size_t> element(std::size_t e) const { return elements_.at(e); }
    const Edge& edge(std::size_t i) const { return edges_.at(i); }
    std::span<const ElementEdge> element_edges(std::size_t e) const { return element_edges_.at(e); }

    const ElementGeometry& geometry(std::size_t e) const
    {
        if (e >= geometry_.size())
            throw std::out_of_range("element index " + std::to_string(e) + " out of range");
        return geometry_[e];
    }

    CellShape shape() const { return shape_; }

    /// Nominal 1/h used to label table rows. Rates never use it.
    double label() const { return label_; }

    double h_max() const
    {
        double h = 0.0;
        for (const auto& g : geometry_)
            h = std::max(h, g.diameter);
        return h;
    }

    std::size_t num_boundary_edges() const
    {
        return static_cast<std::size_t>(
            std::count_if(edges_.begin(), edges_.end(), [](const Edge& e) { return e.boundary(); }));
    }

    Point edge_start(std::size_t i) const { return vertices_[edges_.at(i).vertices[0]]; }
    Point edge_end(std::size_t i) const { return vertices_[edges_.at(i).vertices[1]]; }
    double edge_length(std::size_t i) const { return (edge_end(i) - edge_start(i)).norm(); }

private:
    void build_edges()
    {
        std::unordered_map<std::uint64_t, std::size_t> lookup;
        lookup.reserve(2 * elements_.size() + vertices_.size());
        element_edges_.resize(elements_.size());

        for (std::size_t e = 0; e < elements_.size(); e++)
        {
            const auto& cyc = elements_[e];
            if (cyc.size() < 3)
                throw std::invalid_argument("element " + std::to_string(e) + " has fewer than 3 vertices");
            for (auto v : cyc)
                if (v >= vertices_.size())
                    throw std::invalid_argument("element " + std::to_string(e) + " references missing vertex");

            for (std::size_t i = 0; i < cyc.size(); i++)
            {
                auto a = cyc[i];
                auto b = cyc[(i + 1) % cyc.size()];
                auto lo = std::min(a, b), hi = std::max(a, b);
                auto key = (static_cast<std::uint64_t>(lo) << 32) | static_cast<std::uint64_t>(hi);
                auto [it, inserted] = lookup.try_emplace(key, edges_.size());
                if (inserted)
                    edges_.push_back(Edge{{lo, hi}, e, std::nullopt});
                else
                {
                    auto& ed = edges_[it->second];
                    if (ed.right)
                        throw std::invalid_argument("edge shared by more than two elements");
                    ed.right = e;
                }
                element_edges_[e].push_back({it->second, a < b ? +1 : -1});
            }
        }
    }

    void build_geometry()
    {
        geometry_.reserve(elements_.size());
        for (std::size_t e = 0; e < elements_.size(); e++)
        {
            const auto& cyc = elements_[e];
            const auto nv = cyc.size();
            ElementGeometry g;

            // Shoelace area and polygon centroid.
            double twice_area = 0.0;
            Point c = Point::Zero();
            for (std::size_t i = 0; i < nv; i++)
            {
                const Point& p = vertices_[cyc[i]];
                const Point& q = vertices_[cyc[(i + 1) % nv]];
                double cross = p.x() * q.y() - q.x() * p.y();
                twice_area += cross;
                c += cross * (p + q);
            }
            if (twice_area <= 0.0)
                throw std::invalid_argument("element " + std::to_string(e) + " is not counterclockwise");
            if (nv != (shape_ == CellShape::triangle ? 3u : 4u))
                throw std::invalid_argument("element " + std::to_string(e) + " has the wrong vertex count");
            if (shape_ == CellShape::rectangle)
            {
                const Point gap = vertices_[cyc[0]] + vertices_[cyc[2]] - vertices_[cyc[1]] - vertices_[cyc[3]];
                double size = 0.0;
                for (auto v : cyc)
                    size = std::max(size, (vertices_[v] - vertices_[cyc[0]]).norm());
                if (gap.norm() > 1e-12 * size)
                    throw std::invalid_argument("element " + std::to_string(e) + " is not a parallelogram");
            }
            g.area = 0.5 * twice_area;
            g.centroid = c / (3.0 * twice_area);

            g.diameter = 0.0;
            for (std::size_t i = 0; i < nv; i++)
                for (std::size_t k = i + 1; k < nv; k++)
                    g.diameter = std::max(g.diameter, (vertices_[cyc[i]] - vertices_[cyc[k]]).norm());

            for (std::size_t i = 0; i < nv; i++)
            {
                Eigen::Vector2d t = vertices_[cyc[(i + 1) % nv]] - vertices_[cyc[i]];
                double len = t.norm();
                g.lengths.push_back(len);
                g.normals.emplace_back(t.y() / len, -t.x() / len);
            }
            geometry_.push_back(std::move(g));
        }
    }

    std::vector<Point>                       vertices_;
    std::vector<std::vector<std::size_t>>    elements_;
    std::vector<Edge>                        edges_;
    std::vector<std::vector<ElementEdge>>    element_edges_;
    std::vector<ElementGeometry>             geometry_;
    CellShape                                shape_;
    double                                   label_;
};

inline const ElementGeometry&
geometry(const Mesh& mesh, std::size_t element)
{
    return mesh.geometry(element);
}

/// n x n squares, each cut by its lower-left to upper-right diagonal.
inline Mesh
build_uniform_triangular(std::size_t n)
{
    if (n == 0)
        throw std::invalid_argument("triangular mesh needs at least one subdivision per side");

    std::vector<Point> vertices;
    vertices.reserve((n + 1) * (n + 1));
    for (std::size_t iy = 0; iy <= n; iy++)
        for (std::size_t ix = 0; ix <= n; ix++)
            vertices.emplace_back(double(ix) / double(n), double(iy) / double(n));

    auto id = [n](std::size_t ix, std::size_t iy) { return iy * (n + 1) + ix; };

    std::vector<std::vector<std::size_t>> elements;
    elements.reserve(2 * n * n);
    for (std::size_t iy = 0; iy < n; iy++)
        for (std::size_t ix = 0; ix < n; ix++)
        {
            auto p00 = id(ix, iy), p10 = id(ix + 1, iy);
            auto p01 = id(ix, iy + 1), p11 = id(ix + 1, iy + 1);
            elements.push_back({p00, p10, p11});
            elements.push_back({p00, p11, p01});
        }

    return Mesh(std::move(vertices), std::move(elements), CellShape::triangle, double(n));
}

/// Level 0 is the 3x2 grid; every further level quarters each rectangle.
/// The row label is the number of rectangles along y, 2^(level+1).
inline Mesh
build_uniform_rectangular(unsigned level)
{
    if (level > 20)
        throw std::invalid_argument("rectangular refinement level too large");

    const std::size_t nx = std::size_t{3} << level;
    const std::size_t ny = std::size_t{2} << level;

    std::vector<Point> vertices;
    vertices.reserve((nx + 1) * (ny + 1));
    for (std::size_t iy = 0; iy <= ny; iy++)
        for (std::size_t ix = 0; ix <= nx; ix++)
            vertices.emplace_back(double(ix) / double(nx), double(iy) / double(ny));

    auto id = [nx](std::size_t ix, std::size_t iy) { return iy * (nx + 1) + ix; };

    std::vector<std::vector<std::size_t>> elements;
    elements.reserve(nx * ny);
    for (std::size_t iy = 0; iy < ny; iy++)
        for (std::size_t ix = 0; ix < nx; ix++)
            elements.push_back({id(ix, iy), id(ix + 1, iy), id(ix + 1, iy + 1), id(ix, iy + 1)});

    return Mesh(std::move(vertices), std::move(elements), CellShape::rectangle,
                double(std::size_t{2} << level));
}

/// Text dump: `v x y`, `t i j k` or `q i j k l`, then `e a b left right|-1`.
inline void
write_mesh(std::ostream& os, const Mesh& mesh)
{
    auto old_prec = os.precision(17);
    for (std::size_t i = 0; i < mesh.num_vertices(); i++)
        os << "v " << mesh.vertex(i).x() << ' ' << mesh.vertex(i).y() << '\n';
    for (std::size_t e = 0; e < mesh.num_elements(); e++)
    {
        auto cyc = mesh.element(e);
        os << (cyc.size() == 3 ? 't' : 'q');
        for (auto v : cyc)
            os << ' ' << v;
        os << '\n';
    }
    for (std::size_t i = 0; i < mesh.num_edges(); i++)
    {
        const auto& ed = mesh.edge(i);
        os << "e " << ed.vertices[0] << ' ' << ed.vertices[1] << ' ' << ed.left << ' ';
        if (ed.right)
            os << *ed.right;
        else
            os << -1;
        os << '\n';
    }
    os.precision(old_prec);
}

} // namespace gwg
