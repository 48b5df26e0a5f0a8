#include <cmath>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include <gwg/mesh.hpp>

using gwg::Mesh;
using gwg::Point;

namespace {

Mesh
unit_right_triangle()
{
    return Mesh({Point(0, 0), Point(1, 0), Point(0, 1)}, {{0, 1, 2}}, gwg::CellShape::triangle, 1.0);
}

std::size_t
interior_edges(const Mesh& m)
{
    return m.num_edges() - m.num_boundary_edges();
}

double
total_area(const Mesh& m)
{
    double a = 0.0;
    for (std::size_t e = 0; e < m.num_elements(); e++)
        a += m.geometry(e).area;
    return a;
}

} // namespace

TEST(TriangularMesh, SingleSquareCounts)
{
    auto m = gwg::build_uniform_triangular(1);
    EXPECT_EQ(m.num_elements(), 2u);
    EXPECT_EQ(m.num_edges(), 5u);
    EXPECT_EQ(interior_edges(m), 1u);
}

TEST(TriangularMesh, TwoByTwoCounts)
{
    // 12 grid segments on the 3x3 vertex lattice plus 4 diagonals; 8 boundary segments.
    auto m = gwg::build_uniform_triangular(2);
    EXPECT_EQ(m.num_elements(), 8u);
    EXPECT_EQ(m.num_edges(), 16u);
    EXPECT_EQ(interior_edges(m), 8u);
}

TEST(TriangularMesh, AreaConservation)
{
    auto m = gwg::build_uniform_triangular(16);
    EXPECT_EQ(m.num_elements(), 512u);
    EXPECT_NEAR(total_area(m), 1.0, 1e-12);
}

TEST(TriangularMesh, RejectsZeroSubdivisions)
{
    EXPECT_THROW(gwg::build_uniform_triangular(0), std::invalid_argument);
}

TEST(TriangularMesh, CoarseVerticesAppearInRefinedMesh)
{
    for (std::size_t n : {1, 3, 5})
    {
        auto coarse = gwg::build_uniform_triangular(n);
        auto fine = gwg::build_uniform_triangular(2 * n);
        for (std::size_t i = 0; i < coarse.num_vertices(); i++)
        {
            bool found = false;
            for (std::size_t k = 0; k < fine.num_vertices() && !found; k++)
                found = (fine.vertex(k) - coarse.vertex(i)).norm() < 1e-15;
            EXPECT_TRUE(found) << "vertex " << i << " of n=" << n;
        }
    }
}

TEST(RectangularMesh, LevelZero)
{
    auto m = gwg::build_uniform_rectangular(0);
    ASSERT_EQ(m.num_elements(), 6u);
    for (std::size_t e = 0; e < 6; e++)
    {
        auto cyc = m.element(e);
        ASSERT_EQ(cyc.size(), 4u);
        EXPECT_NEAR(m.vertex(cyc[1]).x() - m.vertex(cyc[0]).x(), 1.0 / 3.0, 1e-15);
        EXPECT_NEAR(m.vertex(cyc[3]).y() - m.vertex(cyc[0]).y(), 0.5, 1e-15);
    }
}

TEST(RectangularMesh, LevelOneBoundaryAlongHorizontalSides)
{
    auto m = gwg::build_uniform_rectangular(1);
    EXPECT_EQ(m.num_elements(), 24u);
    std::size_t horizontal = 0;
    for (std::size_t i = 0; i < m.num_edges(); i++)
    {
        if (!m.edge(i).boundary())
            continue;
        double y0 = m.edge_start(i).y(), y1 = m.edge_end(i).y();
        if ((y0 == 0.0 && y1 == 0.0) || (y0 == 1.0 && y1 == 1.0))
            horizontal++;
    }
    EXPECT_EQ(horizontal, 12u);
}

TEST(RectangularMesh, AreaAndLabels)
{
    for (unsigned level = 0; level < 5; level++)
    {
        auto m = gwg::build_uniform_rectangular(level);
        EXPECT_NEAR(total_area(m), 1.0, 1e-12);
        EXPECT_EQ(m.label(), double(2u << level));
    }
}

TEST(Geometry, UnitRightTriangle)
{
    auto m = unit_right_triangle();
    const auto& g = m.geometry(0);
    EXPECT_NEAR(g.area, 0.5, 1e-15);
    EXPECT_NEAR(g.diameter, std::sqrt(2.0), 1e-15);
    // Side 1 runs (1,0) -> (0,1): the hypotenuse.
    EXPECT_NEAR(g.normals[1].x(), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(g.normals[1].y(), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(g.centroid.x(), 1.0 / 3.0, 1e-15);
}

TEST(Geometry, Rectangle)
{
    auto m = gwg::build_uniform_rectangular(0);
    const auto& g = m.geometry(0);
    EXPECT_NEAR(g.centroid.x(), 1.0 / 6.0, 1e-15);
    EXPECT_NEAR(g.centroid.y(), 0.25, 1e-15);
    EXPECT_NEAR(g.diameter, std::sqrt(1.0 / 9.0 + 0.25), 1e-15);
}

TEST(Geometry, ThrowsOnBadElementIndex)
{
    auto m = unit_right_triangle();
    EXPECT_THROW(m.geometry(1), std::out_of_range);
    EXPECT_THROW(gwg::geometry(m, 5), std::out_of_range);
}

class MeshInvariants : public ::testing::TestWithParam<int>
{
protected:
    Mesh mesh() const
    {
        int p = GetParam();
        return p > 0 ? gwg::build_uniform_triangular(std::size_t(p)) : gwg::build_uniform_rectangular(unsigned(-p));
    }
};

TEST_P(MeshInvariants, EdgeIncidence)
{
    auto m = mesh();
    std::vector<int> count(m.num_edges(), 0);
    for (std::size_t e = 0; e < m.num_elements(); e++)
        for (const auto& s : m.element_edges(e))
            count[s.edge]++;
    for (std::size_t i = 0; i < m.num_edges(); i++)
        EXPECT_EQ(count[i], m.edge(i).boundary() ? 1 : 2);
}

TEST_P(MeshInvariants, EulerFormula)
{
    auto m = mesh();
    EXPECT_EQ(long(m.num_vertices()) - long(m.num_edges()) + long(m.num_elements()), 1);
    EXPECT_EQ(interior_edges(m) + m.num_boundary_edges(), m.num_edges());
}

TEST_P(MeshInvariants, CounterclockwiseAndSidesMatchEdges)
{
    auto m = mesh();
    for (std::size_t e = 0; e < m.num_elements(); e++)
    {
        auto cyc = m.element(e);
        auto sides = m.element_edges(e);
        ASSERT_EQ(cyc.size(), sides.size());
        double twice = 0.0;
        for (std::size_t i = 0; i < cyc.size(); i++)
        {
            auto a = cyc[i], b = cyc[(i + 1) % cyc.size()];
            const auto& ed = m.edge(sides[i].edge);
            EXPECT_EQ(ed.vertices[0], std::min(a, b));
            EXPECT_EQ(ed.vertices[1], std::max(a, b));
            EXPECT_EQ(sides[i].sign, a < b ? 1 : -1);
            twice += m.vertex(a).x() * m.vertex(b).y() - m.vertex(b).x() * m.vertex(a).y();
        }
        EXPECT_GT(twice, 0.0);
    }
}

TEST_P(MeshInvariants, NormalsAndDivergence)
{
    auto m = mesh();
    for (std::size_t e = 0; e < m.num_elements(); e++)
    {
        const auto& g = m.geometry(e);
        Eigen::Vector2d sum = Eigen::Vector2d::Zero();
        for (std::size_t s = 0; s < g.normals.size(); s++)
        {
            EXPECT_NEAR(g.normals[s].norm(), 1.0, 1e-14);
            sum += g.lengths[s] * g.normals[s];
        }
        EXPECT_LE(sum.norm(), 1e-12);

        double h = 0.0;
        auto cyc = m.element(e);
        for (auto a : cyc)
            for (auto b : cyc)
                h = std::max(h, (m.vertex(a) - m.vertex(b)).norm());
        EXPECT_DOUBLE_EQ(g.diameter, h);
    }
}

TEST_P(MeshInvariants, NeighbourNormalsAreNegations)
{
    auto m = mesh();
    auto normal_on = [&](std::size_t e, std::size_t edge) {
        auto sides = m.element_edges(e);
        for (std::size_t s = 0; s < sides.size(); s++)
            if (sides[s].edge == edge)
                return m.geometry(e).normals[s];
        ADD_FAILURE() << "edge not found on element";
        return Eigen::Vector2d(Eigen::Vector2d::Zero());
    };
    for (std::size_t i = 0; i < m.num_edges(); i++)
    {
        const auto& ed = m.edge(i);
        if (ed.boundary())
            continue;
        Eigen::Vector2d sum = normal_on(ed.left, i) + normal_on(*ed.right, i);
        EXPECT_LE(sum.cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST_P(MeshInvariants, BoundaryEdgesLieOnTheSquareBoundary)
{
    auto m = mesh();
    auto on_boundary = [](const Point& p) {
        return p.x() == 0.0 || p.x() == 1.0 || p.y() == 0.0 || p.y() == 1.0;
    };
    for (std::size_t i = 0; i < m.num_edges(); i++)
    {
        Point mid = 0.5 * (m.edge_start(i) + m.edge_end(i));
        EXPECT_EQ(m.edge(i).boundary(), on_boundary(mid));
    }
}

INSTANTIATE_TEST_SUITE_P(TriangularAndRectangular, MeshInvariants, ::testing::Values(1, 2, 3, 7, 0, -1, -2));

TEST(MeshValidation, RejectsClockwiseElement)
{
    EXPECT_THROW(Mesh({Point(0, 0), Point(1, 0), Point(0, 1)}, {{0, 2, 1}}, gwg::CellShape::triangle, 1.0),
                 std::invalid_argument);
}

TEST(MeshValidation, RejectsMissingVertex)
{
    EXPECT_THROW(Mesh({Point(0, 0), Point(1, 0)}, {{0, 1, 2}}, gwg::CellShape::triangle, 1.0),
                 std::invalid_argument);
}

TEST(MeshValidation, RejectsEdgeSharedByThreeElements)
{
    std::vector<Point> v{Point(0, 0), Point(1, 0), Point(0.5, 1), Point(0.5, -1), Point(0.5, 2)};
    EXPECT_THROW(Mesh(v, {{0, 1, 2}, {1, 0, 3}, {0, 1, 4}}, gwg::CellShape::triangle, 1.0),
                 std::invalid_argument);
}

TEST(MeshOutput, WritesVerticesElementsEdges)
{
    auto m = gwg::build_uniform_triangular(1);
    std::ostringstream os;
    gwg::write_mesh(os, m);
    std::istringstream in(os.str());
    std::string line;
    int v = 0, t = 0, e = 0, boundary = 0;
    while (std::getline(in, line))
    {
        if (line[0] == 'v')
            v++;
        else if (line[0] == 't')
            t++;
        else if (line[0] == 'e')
        {
            e++;
            boundary += line.ends_with(" -1");
        }
    }
    EXPECT_EQ(v, 4);
    EXPECT_EQ(t, 2);
    EXPECT_EQ(e, 5);
    EXPECT_EQ(boundary, 4);
}
