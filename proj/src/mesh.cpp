#include "fracadapt/mesh.hpp"
#include "fracadapt/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>

namespace fracadapt {

namespace {

std::uint64_t edge_key(int a, int b)
{
    auto lo = static_cast<std::uint64_t>(std::min(a, b));
    auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (hi << 32) | lo;
}

void fnv_mix(std::uint64_t &h, std::uint64_t word)
{
    for (int i = 0; i < 8; ++i) {
        h ^= (word >> (8 * i)) & 0xffu;
        h *= 0x100000001b3ull;
    }
}

// Edges with their one or two adjacent elements. Local edge k of an element
// joins local vertices k and k+1, so local edge 0 is the refinement edge.
struct EdgeTable
{
    std::vector<std::array<int, 2>> vertices;
    std::vector<std::array<int, 2>> elements;
    std::vector<std::array<int, 3>> of_element;

    explicit EdgeTable(const std::vector<Element> &elems)
    {
        std::unordered_map<std::uint64_t, int> index;
        index.reserve(elems.size() * 2);
        of_element.resize(elems.size());
        for (int t = 0; t < static_cast<int>(elems.size()); ++t) {
            for (int k = 0; k < 3; ++k) {
                int a = elems[t][k];
                int b = elems[t][(k + 1) % 3];
                auto [it, inserted] = index.try_emplace(edge_key(a, b), static_cast<int>(vertices.size()));
                if (inserted) {
                    vertices.push_back({a, b});
                    elements.push_back({t, -1});
                } else {
                    auto &adj = elements[it->second];
                    if (adj[1] != -1)
                        throw InputError("edge shared by more than two elements");
                    adj[1] = t;
                }
                of_element[t][k] = it->second;
            }
        }
    }

    bool on_boundary(int e) const { return elements[e][1] == -1; }
};

double signed_area(Point a, Point b, Point c) { return 0.5 * cross(b - a, c - a); }

} // namespace

double norm(Point a) { return std::hypot(a.x, a.y); }

Triangulation::Triangulation(std::vector<Point> vertices, std::vector<Element> elements, int level,
                             bool snap_to_unit_circle)
    : vertices_(std::move(vertices)), elements_(std::move(elements)), level_(level),
      snap_(snap_to_unit_circle)
{
    const int nv = num_vertices();
    for (const auto &el : elements_) {
        for (int v : el) {
            if (v < 0 || v >= nv)
                throw InputError("element references unknown vertex " + std::to_string(v));
        }
        if (el[0] == el[1] || el[1] == el[2] || el[0] == el[2])
            throw InputError("element with repeated vertex");
    }
    boundary_.assign(nv, 0);
    EdgeTable edges(elements_);
    for (std::size_t e = 0; e < edges.vertices.size(); ++e) {
        if (edges.on_boundary(static_cast<int>(e))) {
            boundary_[edges.vertices[e][0]] = 1;
            boundary_[edges.vertices[e][1]] = 1;
        }
    }
    dof_of_vertex_.assign(nv, -1);
    for (int v = 0; v < nv; ++v) {
        if (!boundary_[v]) {
            dof_of_vertex_[v] = static_cast<int>(vertex_of_dof_.size());
            vertex_of_dof_.push_back(v);
        }
    }
    std::uint64_t h = 0xcbf29ce484222325ull;
    fnv_mix(h, static_cast<std::uint64_t>(nv));
    for (const auto &p : vertices_) {
        fnv_mix(h, std::bit_cast<std::uint64_t>(p.x));
        fnv_mix(h, std::bit_cast<std::uint64_t>(p.y));
    }
    for (const auto &el : elements_) {
        for (int v : el)
            fnv_mix(h, static_cast<std::uint64_t>(v));
    }
    id_ = h;
}

std::array<Point, 3> Triangulation::corners(int element) const
{
    const auto &el = elements_[element];
    return {vertices_[el[0]], vertices_[el[1]], vertices_[el[2]]};
}

double Triangulation::area(int element) const
{
    auto c = corners(element);
    return signed_area(c[0], c[1], c[2]);
}

double Triangulation::diameter(int element) const
{
    auto c = corners(element);
    return std::max({norm(c[1] - c[0]), norm(c[2] - c[1]), norm(c[0] - c[2])});
}

Point Triangulation::centroid(int element) const
{
    auto c = corners(element);
    return (1.0 / 3.0) * (c[0] + c[1] + c[2]);
}

std::vector<std::array<int, 2>> Triangulation::boundary_edges() const
{
    EdgeTable edges(elements_);
    std::vector<std::array<int, 2>> out;
    for (int t = 0; t < num_elements(); ++t) {
        for (int k = 0; k < 3; ++k) {
            if (edges.on_boundary(edges.of_element[t][k]))
                out.push_back({elements_[t][k], elements_[t][(k + 1) % 3]});
        }
    }
    return out;
}

Prolongation::Prolongation(const Triangulation &coarse, const Triangulation &fine,
                           std::vector<std::array<int, 2>> parents)
    : parents_(std::move(parents)), coarse_dof_of_vertex_(coarse.dof_map()),
      fine_vertex_of_dof_(fine.vertex_of_dof()), coarse_id_(coarse.id()), fine_id_(fine.id()),
      coarse_dofs_(coarse.num_dofs()), fine_dofs_(fine.num_dofs()),
      coarse_vertices_(coarse.num_vertices())
{
    if (static_cast<int>(parents_.size()) != fine.num_vertices())
        throw InputError("prolongation needs one parent pair per fine vertex");
}

Eigen::VectorXd Prolongation::apply(const Eigen::VectorXd &coarse) const
{
    if (coarse.size() != coarse_dofs_)
        throw InputError("prolongation: coarse vector has wrong length");
    Eigen::VectorXd fine(fine_dofs_);
    for (int z = 0; z < fine_dofs_; ++z) {
        const auto &p = parents_[fine_vertex_of_dof_[z]];
        int d0 = coarse_dof_of_vertex_[p[0]];
        int d1 = coarse_dof_of_vertex_[p[1]];
        double v0 = d0 >= 0 ? coarse[d0] : 0.0;
        double v1 = d1 >= 0 ? coarse[d1] : 0.0;
        fine[z] = p[0] == p[1] ? v0 : 0.5 * (v0 + v1);
    }
    return fine;
}

Eigen::VectorXd Prolongation::apply_transpose(const Eigen::VectorXd &fine) const
{
    if (fine.size() != fine_dofs_)
        throw InputError("prolongation: fine vector has wrong length");
    Eigen::VectorXd coarse = Eigen::VectorXd::Zero(coarse_dofs_);
    for (int z = 0; z < fine_dofs_; ++z) {
        for (auto [d, w] : row(z))
            coarse[d] += w * fine[z];
    }
    return coarse;
}

std::vector<std::pair<int, double>> Prolongation::row(int fine_dof) const
{
    std::vector<std::pair<int, double>> out;
    const auto &p = parents_[fine_vertex_of_dof_[fine_dof]];
    if (p[0] == p[1]) {
        int d = coarse_dof_of_vertex_[p[0]];
        if (d >= 0)
            out.emplace_back(d, 1.0);
        return out;
    }
    for (int v : p) {
        int d = coarse_dof_of_vertex_[v];
        if (d >= 0)
            out.emplace_back(d, 0.5);
    }
    return out;
}

namespace {

// Rotates each element so that its longest edge joins local vertices 0 and 1; ties go
// to the edge whose opposite vertex has the smallest id.
std::vector<Element> assign_refinement_edges(const std::vector<Point> &v, std::vector<Element> elems)
{
    for (auto &el : elems) {
        double len[3];
        for (int k = 0; k < 3; ++k)
            len[k] = norm(v[el[(k + 1) % 3]] - v[el[k]]);
        double longest = std::max({len[0], len[1], len[2]});
        int best = -1;
        for (int k = 0; k < 3; ++k) {
            if (len[k] < longest * (1.0 - 1e-12))
                continue;
            if (best < 0 || el[(k + 2) % 3] < el[(best + 2) % 3])
                best = k;
        }
        el = {el[best], el[(best + 1) % 3], el[(best + 2) % 3]};
    }
    return elems;
}

} // namespace

Triangulation build_initial_mesh(const DomainSpec &spec)
{
    if (spec.kind == DomainKind::l_shape) {
        std::vector<Point> v{{-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {0, 0}, {1, 0}, {-1, 1}, {0, 1}};
        std::vector<Element> e{{0, 1, 4}, {0, 4, 3}, {1, 2, 4}, {2, 5, 4}, {3, 4, 6}, {4, 7, 6}};
        return Triangulation(v, assign_refinement_edges(v, e), 0, false);
    }
    const int n = spec.circle_segments;
    if (n < 3)
        throw InputError("circle needs at least 3 segments");
    std::vector<Point> v{{0.0, 0.0}};
    for (int k = 0; k < n; ++k) {
        double phi = 2.0 * std::numbers::pi * k / n;
        v.push_back({std::cos(phi), std::sin(phi)});
    }
    std::vector<Element> e;
    for (int k = 0; k < n; ++k)
        e.push_back({0, 1 + k, 1 + (k + 1) % n});
    return Triangulation(v, assign_refinement_edges(v, e), 0, true);
}

Refinement refine(const Triangulation &mesh, std::span<const int> marked)
{
    const int ne = mesh.num_elements();
    const auto &elems = mesh.elements();
    EdgeTable edges(elems);
    const int n_edges = static_cast<int>(edges.vertices.size());
    std::vector<char> bisect(n_edges, 0);

    for (int t : marked) {
        if (t < 0 || t >= ne)
            throw InputError("refine: unknown element id " + std::to_string(t));
        for (int e : edges.of_element[t])
            bisect[e] = 1;
    }

    // Closure: an element with any bisected edge must bisect its refinement edge.
    std::vector<int> work(ne);
    for (int t = 0; t < ne; ++t)
        work[t] = ne - 1 - t;
    long fuel = 10L * ne + 10;
    while (!work.empty()) {
        if (--fuel < 0)
            throw NumericalError("refine: closure did not terminate");
        int t = work.back();
        work.pop_back();
        const auto &oe = edges.of_element[t];
        if (bisect[oe[0]] || !(bisect[oe[1]] || bisect[oe[2]]))
            continue;
        bisect[oe[0]] = 1;
        for (int nb : edges.elements[oe[0]]) {
            if (nb >= 0 && nb != t)
                work.push_back(nb);
        }
    }

    std::vector<Point> verts = mesh.vertices();
    std::vector<std::array<int, 2>> parents;
    parents.reserve(verts.size() + n_edges);
    for (int v = 0; v < mesh.num_vertices(); ++v)
        parents.push_back({v, v});

    std::vector<int> midpoint(n_edges, -1);
    for (int t = 0; t < ne; ++t) {
        for (int e : edges.of_element[t]) {
            if (!bisect[e] || midpoint[e] >= 0)
                continue;
            auto [a, b] = edges.vertices[e];
            Point m = 0.5 * (verts[a] + verts[b]);
            if (mesh.snaps_to_unit_circle() && edges.on_boundary(e))
                m = (1.0 / norm(m)) * m;
            midpoint[e] = static_cast<int>(verts.size());
            verts.push_back(m);
            parents.push_back({a, b});
        }
    }

    std::vector<Element> fine;
    std::vector<int> parent;
    fine.reserve(ne + 3 * marked.size() + n_edges);
    for (int t = 0; t < ne; ++t) {
        const auto &el = elems[t];
        const auto &oe = edges.of_element[t];
        auto push = [&](int a, int b, int c) {
            fine.push_back({a, b, c});
            parent.push_back(t);
        };
        if (!bisect[oe[0]]) {
            push(el[0], el[1], el[2]);
            continue;
        }
        int v0 = el[0], v1 = el[1], v2 = el[2];
        int m = midpoint[oe[0]];
        if (bisect[oe[2]]) {
            int mb = midpoint[oe[2]];
            push(m, v2, mb);
            push(v0, m, mb);
        } else {
            push(v2, v0, m);
        }
        if (bisect[oe[1]]) {
            int ma = midpoint[oe[1]];
            push(m, v1, ma);
            push(v2, m, ma);
        } else {
            push(v1, v2, m);
        }
    }

    Refinement out;
    out.mesh = Triangulation(std::move(verts), std::move(fine), mesh.level() + 1,
                             mesh.snaps_to_unit_circle());
    out.prolongation = Prolongation(mesh, out.mesh, std::move(parents));
    out.parent = std::move(parent);
    return out;
}

Refinement uniform_refine(const Triangulation &mesh)
{
    std::vector<int> all(mesh.num_elements());
    for (int t = 0; t < mesh.num_elements(); ++t)
        all[t] = t;
    return refine(mesh, all);
}

std::vector<std::vector<int>> sons_of(const Triangulation &coarse, const Refinement &fine)
{
    if (fine.prolongation.coarse_id() != coarse.id())
        throw InputError("sons_of: refinement does not belong to this mesh");
    std::vector<std::vector<int>> sons(coarse.num_elements());
    for (int f = 0; f < static_cast<int>(fine.parent.size()); ++f)
        sons[fine.parent[f]].push_back(f);
    return sons;
}

std::vector<std::vector<int>> new_interior_nodes(const Triangulation &coarse, const Refinement &fine)
{
    if (fine.prolongation.coarse_id() != coarse.id() ||
        fine.prolongation.fine_id() != fine.mesh.id())
        throw InputError("new_interior_nodes: meshes are unrelated");
    std::vector<std::vector<int>> nodes(coarse.num_elements());
    const int nvc = coarse.num_vertices();
    const auto &bnd = fine.mesh.boundary_vertex();
    for (int f = 0; f < fine.mesh.num_elements(); ++f) {
        auto &set = nodes[fine.parent[f]];
        for (int v : fine.mesh.elements()[f]) {
            if (v >= nvc && !bnd[v] && std::find(set.begin(), set.end(), v) == set.end())
                set.push_back(v);
        }
    }
    for (auto &set : nodes)
        std::sort(set.begin(), set.end());
    return nodes;
}

double shape_regularity(const Triangulation &mesh)
{
    double gamma = 0.0;
    for (int t = 0; t < mesh.num_elements(); ++t) {
        double d = mesh.diameter(t);
        gamma = std::max(gamma, d * d / mesh.area(t));
    }
    return gamma;
}

std::vector<int> element_patch(const Triangulation &mesh, int element)
{
    if (element < 0 || element >= mesh.num_elements())
        throw InputError("element_patch: unknown element id");
    const auto &el = mesh.elements()[element];
    std::vector<int> out;
    for (int t = 0; t < mesh.num_elements(); ++t) {
        for (int v : mesh.elements()[t]) {
            if (v == el[0] || v == el[1] || v == el[2]) {
                out.push_back(t);
                break;
            }
        }
    }
    return out;
}

double mesh_size(const Triangulation &mesh, int element)
{
    if (element < 0 || element >= mesh.num_elements())
        throw InputError("mesh_size: unknown element id");
    return std::sqrt(mesh.area(element));
}

double skeleton_distance(const Triangulation &mesh, Point x, int element)
{
    if (element < 0 || element >= mesh.num_elements())
        throw InputError("skeleton_distance: unknown element id");
    auto c = mesh.corners(element);
    double tol = 1e-12 * mesh.diameter(element);
    double dist = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
        Point a = c[k];
        Point b = c[(k + 1) % 3];
        double d = cross(b - a, x - a) / norm(b - a);
        if (d < -tol)
            throw InputError("skeleton_distance: point outside element");
        dist = std::min(dist, std::max(d, 0.0));
    }
    return dist;
}

void check_conforming(const Triangulation &mesh)
{
    for (int t = 0; t < mesh.num_elements(); ++t) {
        double d = mesh.diameter(t);
        if (!(mesh.area(t) > 1e-14 * d * d))
            throw InputError("element " + std::to_string(t) + " is degenerate or clockwise");
    }
    EdgeTable edges(mesh.elements());
    auto coord_key = [](Point p) {
        return std::bit_cast<std::uint64_t>(p.x) * 0x9e3779b97f4a7c15ull ^ std::bit_cast<std::uint64_t>(p.y);
    };
    std::unordered_map<std::uint64_t, Point> by_key;
    for (const auto &p : mesh.vertices())
        by_key.emplace(coord_key(p), p);
    for (std::size_t e = 0; e < edges.vertices.size(); ++e) {
        auto [a, b] = edges.vertices[e];
        auto [t0, t1] = edges.elements[e];
        if (t1 >= 0) {
            // The two neighbours must traverse the edge in opposite directions.
            auto dir = [&](int t) {
                const auto &el = mesh.elements()[t];
                for (int k = 0; k < 3; ++k) {
                    if (el[k] == a && el[(k + 1) % 3] == b)
                        return 1;
                }
                return -1;
            };
            if (dir(t0) == dir(t1))
                throw InputError("inconsistent orientation across an edge");
            continue;
        }
        Point m = 0.5 * (mesh.vertices()[a] + mesh.vertices()[b]);
        auto it = by_key.find(coord_key(m));
        if (it != by_key.end() && it->second.x == m.x && it->second.y == m.y)
            throw InputError("hanging node on edge " + std::to_string(a) + "-" + std::to_string(b));
    }
}

bool is_conforming(const Triangulation &mesh)
{
    try {
        check_conforming(mesh);
    } catch (const InputError &) {
        return false;
    }
    return true;
}

void write_mesh(std::ostream &out, const Triangulation &mesh)
{
    char buf[128];
    out << mesh.num_vertices() << ' ' << mesh.num_elements() << '\n';
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        const auto &p = mesh.vertices()[v];
        std::snprintf(buf, sizeof buf, "%.17g %.17g %d\n", p.x, p.y, mesh.boundary_vertex()[v] ? 1 : 0);
        out << buf;
    }
    for (const auto &el : mesh.elements())
        out << el[0] << ' ' << el[1] << ' ' << el[2] << '\n';
}

Triangulation read_mesh(std::istream &in)
{
    int nv = 0, ne = 0;
    if (!(in >> nv >> ne) || nv < 0 || ne < 0)
        throw InputError("mesh file: bad header");
    std::vector<Point> v(nv);
    for (auto &p : v) {
        int b = 0;
        if (!(in >> p.x >> p.y >> b))
            throw InputError("mesh file: truncated vertex list");
    }
    std::vector<Element> e(ne);
    for (auto &el : e) {
        if (!(in >> el[0] >> el[1] >> el[2]))
            throw InputError("mesh file: truncated element list");
    }
    return Triangulation(std::move(v), std::move(e));
}

} // namespace fracadapt
