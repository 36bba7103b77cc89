#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace fracadapt {

struct Point
{
    double x = 0.0;
    double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double c, Point a) { return {c * a.x, c * a.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
double norm(Point a);

using Element = std::array<int, 3>;

enum class DomainKind { unit_circle, l_shape };

struct DomainSpec
{
    DomainKind kind = DomainKind::l_shape;
    int circle_segments = 8;

    static DomainSpec circle(int segments = 8) { return {DomainKind::unit_circle, segments}; }
    static DomainSpec l_shape() { return {DomainKind::l_shape, 8}; }
};

/// Conforming triangulation. Local vertex order of an element is counter-clockwise
/// and the refinement edge joins local vertices 0 and 1.
class Triangulation
{
public:
    Triangulation() = default;
    Triangulation(std::vector<Point> vertices, std::vector<Element> elements, int level = 0,
                  bool snap_to_unit_circle = false);

    const std::vector<Point> &vertices() const { return vertices_; }
    const std::vector<Element> &elements() const { return elements_; }
    const std::vector<char> &boundary_vertex() const { return boundary_; }
    int level() const { return level_; }
    bool snaps_to_unit_circle() const { return snap_; }

    int num_vertices() const { return static_cast<int>(vertices_.size()); }
    int num_elements() const { return static_cast<int>(elements_.size()); }

    /// Interior vertices are the degrees of freedom, numbered in vertex order.
    int num_dofs() const { return static_cast<int>(vertex_of_dof_.size()); }
    int dof_of_vertex(int v) const { return dof_of_vertex_[v]; }
    const std::vector<int> &dof_map() const { return dof_of_vertex_; }
    const std::vector<int> &vertex_of_dof() const { return vertex_of_dof_; }

    /// Content hash of vertices and elements; used to detect mismatched operands.
    std::uint64_t id() const { return id_; }

    std::array<Point, 3> corners(int element) const;
    double area(int element) const;
    double diameter(int element) const;
    Point centroid(int element) const;

    /// Boundary edges oriented with the domain on their left.
    std::vector<std::array<int, 2>> boundary_edges() const;

private:
    std::vector<Point> vertices_;
    std::vector<Element> elements_;
    std::vector<char> boundary_;
    std::vector<int> dof_of_vertex_;
    std::vector<int> vertex_of_dof_;
    int level_ = 0;
    bool snap_ = false;
    std::uint64_t id_ = 0;
};

/// Fine-vertex transfer table: every fine vertex has one or two coarse parent vertices
/// with weights summing to one (coarse vertices map to themselves).
class Prolongation
{
public:
    Prolongation() = default;
    Prolongation(const Triangulation &coarse, const Triangulation &fine,
                 std::vector<std::array<int, 2>> parents);

    std::uint64_t coarse_id() const { return coarse_id_; }
    std::uint64_t fine_id() const { return fine_id_; }
    int coarse_dofs() const { return coarse_dofs_; }
    int fine_dofs() const { return fine_dofs_; }

    /// Parent vertices of fine vertex v; parents[1] == parents[0] for inherited vertices.
    const std::array<int, 2> &parents(int v) const { return parents_[v]; }
    int num_fine_vertices() const { return static_cast<int>(parents_.size()); }
    int num_coarse_vertices() const { return coarse_vertices_; }

    Eigen::VectorXd apply(const Eigen::VectorXd &coarse) const;
    Eigen::VectorXd apply_transpose(const Eigen::VectorXd &fine) const;

    /// Coarse dof contributions to fine dof z as (coarse dof, weight) pairs.
    std::vector<std::pair<int, double>> row(int fine_dof) const;

private:
    std::vector<std::array<int, 2>> parents_;
    std::vector<int> coarse_dof_of_vertex_;
    std::vector<int> fine_vertex_of_dof_;
    std::uint64_t coarse_id_ = 0;
    std::uint64_t fine_id_ = 0;
    int coarse_dofs_ = 0;
    int fine_dofs_ = 0;
    int coarse_vertices_ = 0;
};

struct Refinement
{
    Triangulation mesh;
    Prolongation prolongation;
    /// Coarse element containing each fine element.
    std::vector<int> parent;
};

Triangulation build_initial_mesh(const DomainSpec &spec);

Refinement refine(const Triangulation &mesh, std::span<const int> marked);
Refinement uniform_refine(const Triangulation &mesh);

/// Sons of each coarse element as fine element ids.
std::vector<std::vector<int>> sons_of(const Triangulation &coarse, const Refinement &fine);

/// Fine vertices lying on each coarse element that are neither coarse vertices nor on the boundary.
std::vector<std::vector<int>> new_interior_nodes(const Triangulation &coarse, const Refinement &fine);

/// max_T diam(T)^2 / |T|
double shape_regularity(const Triangulation &mesh);
/// Elements sharing at least one vertex with the given element, sorted by id.
std::vector<int> element_patch(const Triangulation &mesh, int element);
/// |T|^{1/2}
double mesh_size(const Triangulation &mesh, int element);
/// Distance of x to the boundary of its containing element.
double skeleton_distance(const Triangulation &mesh, Point x, int element);

/// Throws InputError when an edge is shared by more than two elements, hanging nodes exist,
/// or an element is degenerate or clockwise.
void check_conforming(const Triangulation &mesh);
bool is_conforming(const Triangulation &mesh);

void write_mesh(std::ostream &out, const Triangulation &mesh);
Triangulation read_mesh(std::istream &in);

} // namespace fracadapt
