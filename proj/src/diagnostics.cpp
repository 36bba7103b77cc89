#include "fracadapt/diagnostics.hpp"
#include "fracadapt/error.hpp"
#include "fracadapt/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace fracadapt {

namespace {

double signed_area(Point a, Point b, Point c) { return 0.5 * cross(b - a, c - a); }

std::array<double, 3> barycentric(const std::array<Point, 3> &t, Point x)
{
    double area = signed_area(t[0], t[1], t[2]);
    return {signed_area(x, t[1], t[2]) / area, signed_area(t[0], x, t[2]) / area,
            signed_area(t[0], t[1], x) / area};
}

// Clip a convex polygon against the half-plane left of a->b.
std::vector<Point> clip(const std::vector<Point> &poly, Point a, Point b)
{
    std::vector<Point> out;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        Point p = poly[i], q = poly[(i + 1) % n];
        double dp = cross(b - a, p - a), dq = cross(b - a, q - a);
        if (dp >= 0.0)
            out.push_back(p);
        if ((dp > 0.0 && dq < 0.0) || (dp < 0.0 && dq > 0.0))
            out.push_back(p + (dp / (dp - dq)) * (q - p));
    }
    return out;
}

void check_refinement(const Triangulation &coarse, const Refinement &fine, const FemFunction &g)
{
    if (fine.prolongation.coarse_id() != coarse.id() || fine.prolongation.fine_id() != fine.mesh.id())
        throw InputError("diagnostics: refinement does not belong to the coarse mesh");
    if (g.mesh_id != fine.mesh.id() || g.coefficients.size() != fine.mesh.num_dofs())
        throw InputError("diagnostics: function does not belong to the refined mesh");
}

// Nodal values over all fine vertices, zero on the boundary.
std::vector<double> vertex_values(const Triangulation &mesh, const Eigen::VectorXd &c)
{
    std::vector<double> v(mesh.num_vertices(), 0.0);
    for (int z = 0; z < mesh.num_dofs(); ++z)
        v[mesh.vertex_of_dof()[z]] = c[z];
    return v;
}

// Sum over the listed fine elements of int w^sign g^2 with w = h~^{2s} of the coarse mesh.
double weighted_sq(const Triangulation &coarse, double s, const Refinement &fine,
                   const std::vector<double> &values, std::span<const int> elements, int sign)
{
    const Triangulation &fm = fine.mesh;
    double total = 0.0;
    for (int f : elements) {
        const auto &el = fm.elements()[f];
        std::array<Point, 3> ft = fm.corners(f);
        std::array<double, 3> gv{values[el[0]], values[el[1]], values[el[2]]};
        if (gv[0] == 0.0 && gv[1] == 0.0 && gv[2] == 0.0)
            continue;
        auto g2 = [&](Point x) {
            auto b = barycentric(ft, x);
            double v = b[0] * gv[0] + b[1] * gv[1] + b[2] * gv[2];
            return v * v;
        };
        const int t = fine.parent[f];
        const double h = mesh_size(coarse, t);
        if (s <= 0.5) {
            // Elementwise constant weight: exact mass-matrix integral.
            double m = (gv[0] * gv[0] + gv[1] * gv[1] + gv[2] * gv[2] + gv[0] * gv[1] + gv[1] * gv[2] +
                        gv[2] * gv[0]) *
                       fm.area(f) / 6.0;
            total += std::pow(h, 2.0 * s * sign) * m;
            continue;
        }
        // h omega^{2s-1} to the power sign; on each incenter piece omega is affine.
        const double alpha = sign * (2.0 * s - 1.0);
        std::array<Point, 3> ct = coarse.corners(t);
        const double la = norm(ct[2] - ct[1]), lb = norm(ct[0] - ct[2]), lc = norm(ct[1] - ct[0]);
        const double perim = la + lb + lc;
        const Point inc = (1.0 / perim) * (la * ct[0] + lb * ct[1] + lc * ct[2]);
        const double son_area = fm.area(f);
        double sum = 0.0;
        for (int k = 0; k < 3; ++k) {
            Point a = ct[k], b = ct[(k + 1) % 3];
            std::vector<Point> poly{ft[0], ft[1], ft[2]};
            poly = clip(poly, a, b);
            poly = clip(poly, b, inc);
            poly = clip(poly, inc, a);
            if (poly.size() < 3)
                continue;
            const double len = norm(b - a);
            auto dist = [&](Point x) { return std::max(0.0, cross(b - a, x - a) / len); };
            for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
                std::array<Point, 3> tri{poly[0], poly[i], poly[i + 1]};
                if (std::abs(signed_area(tri[0], tri[1], tri[2])) <= 1e-14 * son_area)
                    continue;
                sum += affine_power_integral(tri, {dist(tri[0]), dist(tri[1]), dist(tri[2])}, alpha, g2, 2);
            }
        }
        total += std::pow(h, static_cast<double>(sign)) * sum;
    }
    return total;
}

} // namespace

WeightFunction::WeightFunction(const Triangulation &mesh, double s) : mesh_(&mesh), s_(s), mesh_id_(mesh.id())
{
    if (!(s > 0.0 && s < 1.0))
        throw InputError("weight function: s must lie in (0,1)");
}

double WeightFunction::operator()(Point x, int element) const
{
    double h = mesh_size(*mesh_, element);
    if (s_ <= 0.5)
        return std::pow(h, 2.0 * s_);
    return h * std::pow(skeleton_distance(*mesh_, x, element), 2.0 * s_ - 1.0);
}

double weighted_l2_norm(const Triangulation &coarse, double s, const Refinement &fine, const FemFunction &g,
                        int sign)
{
    if (!(s > 0.0 && s < 1.0))
        throw InputError("weighted_l2_norm: s must lie in (0,1)");
    if (sign != 1 && sign != -1)
        throw InputError("weighted_l2_norm: sign must be +1 or -1");
    check_refinement(coarse, fine, g);
    std::vector<int> all(fine.mesh.num_elements());
    for (int f = 0; f < fine.mesh.num_elements(); ++f)
        all[f] = f;
    double sq = weighted_sq(coarse, s, fine, vertex_values(fine.mesh, g.coefficients), all, sign);
    if (!std::isfinite(sq))
        throw NumericalError("weighted_l2_norm: integral is not finite", sq);
    return std::sqrt(sq);
}

FemFunction nodal_interpolation(const Triangulation &coarse, const Refinement &fine, const FemFunction &g)
{
    check_refinement(coarse, fine, g);
    FemFunction out;
    out.mesh_id = coarse.id();
    out.coefficients.resize(coarse.num_dofs());
    for (int z = 0; z < coarse.num_dofs(); ++z)
        out.coefficients[z] = g.coefficients[fine.mesh.dof_of_vertex(coarse.vertex_of_dof()[z])];
    return out;
}

std::vector<int> averaging_elements(const Triangulation &mesh)
{
    std::vector<int> out(mesh.num_vertices(), std::numeric_limits<int>::max());
    for (int t = 0; t < mesh.num_elements(); ++t)
        for (int v : mesh.elements()[t])
            out[v] = std::min(out[v], t);
    for (int &t : out)
        if (t == std::numeric_limits<int>::max())
            t = -1;
    return out;
}

FemFunction scott_zhang(const Triangulation &coarse, const Refinement &fine, const FemFunction &g)
{
    check_refinement(coarse, fine, g);
    const Triangulation &fm = fine.mesh;
    std::vector<double> values = vertex_values(fm, g.coefficients);
    std::vector<int> avg = averaging_elements(coarse);
    auto sons = sons_of(coarse, fine);

    FemFunction out;
    out.mesh_id = coarse.id();
    out.coefficients.resize(coarse.num_dofs());
    for (int z = 0; z < coarse.num_dofs(); ++z) {
        int v = coarse.vertex_of_dof()[z];
        int t = avg[v];
        const auto &el = coarse.elements()[t];
        int i = static_cast<int>(std::find(el.begin(), el.end(), v) - el.begin());
        std::array<Point, 3> ct = coarse.corners(t);
        const double scale = 3.0 / coarse.area(t);
        double sum = 0.0;
        for (int f : sons[t]) {
            const auto &fe = fm.elements()[f];
            std::array<Point, 3> ft = fm.corners(f);
            // Edge-midpoint rule, exact for quadratics.
            for (int k = 0; k < 3; ++k) {
                int a = k, b = (k + 1) % 3;
                Point x = 0.5 * (ft[a] + ft[b]);
                double gx = 0.5 * (values[fe[a]] + values[fe[b]]);
                auto lam = barycentric(ct, x);
                double dual = scale * (4.0 * lam[i] - 1.0);
                sum += fm.area(f) / 3.0 * dual * gx;
            }
        }
        out.coefficients[z] = sum;
    }
    return out;
}

double SampleGenerator::next()
{
    state_ = 6364136223846793005ULL * state_ + 1442695040888963407ULL;
    return static_cast<double>(state_ >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

EquivalenceReport equivalence_report(const Triangulation &coarse, double s, int sample_count, int quad_order)
{
    if (sample_count < 1)
        throw InputError("equivalence_report: need at least one sample");
    if (!(s > 0.0 && s < 1.0))
        throw InputError("equivalence_report: s must lie in (0,1)");
    Refinement fine = uniform_refine(coarse);
    const Triangulation &fm = fine.mesh;
    std::vector<int> all(fm.num_elements());
    for (int f = 0; f < fm.num_elements(); ++f)
        all[f] = f;

    EquivalenceReport rep;
    rep.r_min = std::numeric_limits<double>::infinity();
    rep.r_max = 0.0;
    SampleGenerator gen;
    for (int k = 0; k < sample_count; ++k) {
        FemFunction v;
        v.mesh_id = fm.id();
        v.coefficients.resize(fm.num_dofs());
        for (int z = 0; z < fm.num_dofs(); ++z)
            v.coefficients[z] = gen.next();
        Eigen::VectorXd iv = fine.prolongation.apply(nodal_interpolation(coarse, fine, v).coefficients);
        Eigen::VectorXd jv = fine.prolongation.apply(scott_zhang(coarse, fine, v).coefficients);
        double num = std::sqrt(weighted_sq(coarse, s, fine, vertex_values(fm, v.coefficients - iv), all, -1));
        double den = std::sqrt(weighted_sq(coarse, s, fine, vertex_values(fm, v.coefficients - jv), all, -1));
        if (num < 1e-14 && den < 1e-14) {
            ++rep.samples_skipped;
            continue;
        }
        double r = num / den;
        rep.r_min = std::min(rep.r_min, r);
        rep.r_max = std::max(rep.r_max, r);
        ++rep.samples_used;
    }
    if (rep.samples_used == 0)
        throw NumericalError("equivalence_report: all samples are degenerate", 0.0);

    AssemblyOptions opt;
    opt.quad_order = quad_order;
    EnergyMatrix a = assemble_stiffness(fm, s, opt);
    auto nodes = new_interior_nodes(coarse, fine);
    std::vector<char> seen(fm.num_vertices(), 0);
    // Fine elements around each vertex.
    std::vector<std::vector<int>> star(fm.num_vertices());
    for (int f = 0; f < fm.num_elements(); ++f)
        for (int v : fm.elements()[f])
            star[v].push_back(f);
    rep.q_min = std::numeric_limits<double>::infinity();
    rep.q_max = 0.0;
    std::vector<double> values(fm.num_vertices(), 0.0);
    for (const auto &list : nodes) {
        for (int v : list) {
            if (seen[v])
                continue;
            seen[v] = 1;
            values[v] = 1.0;
            double weighted = std::sqrt(weighted_sq(coarse, s, fine, values, star[v], -1));
            values[v] = 0.0;
            int z = fm.dof_of_vertex(v);
            double q = std::sqrt(a.values(z, z)) / weighted;
            rep.q_min = std::min(rep.q_min, q);
            rep.q_max = std::max(rep.q_max, q);
        }
    }
    if (rep.q_max == 0.0)
        rep.q_min = 0.0;
    return rep;
}

void write_diagnostics(std::ostream &out, const std::vector<DiagnosticRow> &rows)
{
    out << "quantity,min,max,mesh_level\n";
    char buf[128];
    for (const auto &r : rows) {
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%d\n", r.min, r.max, r.mesh_level);
        out << r.quantity << buf;
    }
}

} // namespace fracadapt
