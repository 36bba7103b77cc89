#include "fracadapt/assembly.hpp"
#include "fracadapt/error.hpp"
#include "fracadapt/quadrature.hpp"
#include "internal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fracadapt {

double fractional_constant(double s)
{
    if (!(s > 0.0 && s < 1.0))
        throw InputError("fractional_constant: s must lie in (0,1)");
    return std::pow(2.0, 2.0 * s) * s * std::tgamma(1.0 + s) / (std::numbers::pi * std::tgamma(1.0 - s));
}

namespace {

struct ElementData
{
    std::array<Point, 3> corner;
    Point centroid;
    double area = 0.0;
    double diam = 0.0;
    std::array<int, 3> dof{-1, -1, -1};
    bool has_dof = false;
};

// Quadrature points of one element for a far-field tier: positions, absolute weights
// and barycentric coordinates.
struct PointSet
{
    int count = 0;
    std::vector<Point> x;
    std::vector<double> w;
    std::vector<std::array<double, 3>> phi;
};

PointSet make_points(const ElementData &e, const TriangleRule &rule)
{
    PointSet ps;
    ps.count = static_cast<int>(rule.weights.size());
    for (int i = 0; i < ps.count; ++i) {
        double u = rule.points[i][0], v = rule.points[i][1];
        ps.x.push_back(detail::map_point(e.corner, u, v));
        ps.w.push_back(2.0 * e.area * rule.weights[i]);
        ps.phi.push_back({1.0 - u - v, u, v});
    }
    return ps;
}

// A <- A + A^T, blockwise.
void symmetrize_sum(Eigen::MatrixXd &a)
{
    const Eigen::Index n = a.rows();
    const Eigen::Index bs = 64;
    for (Eigen::Index jb = 0; jb < n; jb += bs) {
        for (Eigen::Index ib = jb; ib < n; ib += bs) {
            Eigen::Index jend = std::min(n, jb + bs), iend = std::min(n, ib + bs);
            for (Eigen::Index j = jb; j < jend; ++j) {
                for (Eigen::Index i = std::max(ib, j); i < iend; ++i) {
                    double v = a(i, j) + a(j, i);
                    a(i, j) = v;
                    a(j, i) = v;
                }
            }
        }
    }
}

// C int_T phi_a phi_b psi for the vertices of T, with grading toward boundary vertices.
std::array<std::array<double, 3>, 3> complement_block(const ElementData &e,
                                                      const std::array<char, 3> &on_boundary,
                                                      const ComplementPotential &psi)
{
    std::array<std::array<double, 3>, 3> out{};
    std::vector<Point> pts;
    std::vector<double> wts;
    std::vector<std::array<double, 3>> lam;
    const int nb = on_boundary[0] + on_boundary[1] + on_boundary[2];

    if (nb == 0) {
        double ratio = psi.boundary_distance(e.centroid) / e.diam;
        TriangleRule rule = ratio >= 3.0 ? triangle_rule(5) : ratio >= 1.0 ? collapsed_rule(6) : collapsed_rule(10);
        for (std::size_t i = 0; i < rule.weights.size(); ++i) {
            double u = rule.points[i][0], v = rule.points[i][1];
            pts.push_back(detail::map_point(e.corner, u, v));
            wts.push_back(2.0 * e.area * rule.weights[i]);
            lam.push_back({1.0 - u - v, u, v});
        }
    } else if (nb == 1) {
        // Collapse at the boundary vertex with u = w^2.
        int k = on_boundary[0] ? 0 : on_boundary[1] ? 1 : 2;
        int kp = (k + 1) % 3, kq = (k + 2) % 3;
        Point b = e.corner[k], p = e.corner[kp], q = e.corner[kq];
        QuadRule1D g = gauss_legendre(10);
        for (std::size_t i = 0; i < g.points.size(); ++i) {
            double w = g.points[i], u = w * w;
            for (std::size_t j = 0; j < g.points.size(); ++j) {
                double v = g.points[j];
                Point base = p + v * (q - p);
                pts.push_back(b + u * (base - b));
                wts.push_back(g.weights[i] * g.weights[j] * 2.0 * e.area * u * 2.0 * w);
                std::array<double, 3> l{};
                l[k] = 1.0 - u;
                l[kp] = u * (1.0 - v);
                l[kq] = u * v;
                lam.push_back(l);
            }
        }
    } else if (nb == 2) {
        // Collapse at the interior vertex; grade toward the opposite edge and its ends.
        int k = !on_boundary[0] ? 0 : !on_boundary[1] ? 1 : 2;
        int k1 = (k + 1) % 3, k2 = (k + 2) % 3;
        Point p = e.corner[k], b1 = e.corner[k1], b2 = e.corner[k2];
        QuadRule1D gu = gauss_legendre(10);
        QuadRule1D gv = gauss_legendre(8);
        for (std::size_t i = 0; i < gu.points.size(); ++i) {
            double w = gu.points[i], u = 1.0 - w * w;
            for (int half = 0; half < 2; ++half) {
                for (std::size_t j = 0; j < gv.points.size(); ++j) {
                    double t = gv.points[j];
                    double v = half == 0 ? 0.5 * t * t : 1.0 - 0.5 * t * t;
                    Point base = b1 + v * (b2 - b1);
                    pts.push_back(p + u * (base - p));
                    wts.push_back(gu.weights[i] * gv.weights[j] * 2.0 * e.area * u * 2.0 * w * t);
                    std::array<double, 3> l{};
                    l[k] = 1.0 - u;
                    l[k1] = u * (1.0 - v);
                    l[k2] = u * v;
                    lam.push_back(l);
                }
            }
        }
    } else {
        return out;
    }

    std::vector<double> val(pts.size());
    psi.evaluate(pts, val);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double wv = wts[i] * val[i];
        for (int a = 0; a < 3; ++a) {
            if (on_boundary[a])
                continue;
            for (int b = 0; b <= a; ++b) {
                if (!on_boundary[b])
                    out[a][b] += wv * lam[i][a] * lam[i][b];
            }
        }
    }
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < a; ++b)
            out[b][a] = out[a][b];
    }
    return out;
}

} // namespace

EnergyMatrix assemble_stiffness(const Triangulation &mesh, double s, const AssemblyOptions &options)
{
    if (!(s > 0.0 && s < 1.0))
        throw InputError("assemble_stiffness: s must lie in (0,1)");
    check_conforming(mesh);
    const int n_pts = points_per_axis(options.quad_order);
    const double c = fractional_constant(s);
    const int ne = mesh.num_elements();
    const int nd = mesh.num_dofs();

    EnergyMatrix result;
    result.mesh_id = mesh.id();
    result.s = s;
    result.values = Eigen::MatrixXd::Zero(nd, nd);
    if (nd == 0)
        return result;
    Eigen::MatrixXd &a = result.values;

    std::vector<ElementData> data(ne);
    for (int t = 0; t < ne; ++t) {
        auto &d = data[t];
        d.corner = mesh.corners(t);
        d.centroid = mesh.centroid(t);
        d.area = mesh.area(t);
        d.diam = mesh.diameter(t);
        for (int k = 0; k < 3; ++k) {
            d.dof[k] = mesh.dof_of_vertex(mesh.elements()[t][k]);
            d.has_dof = d.has_dof || d.dof[k] >= 0;
        }
    }

    // Elements sharing a vertex.
    const int nv = mesh.num_vertices();
    std::vector<int> vstart(nv + 1, 0);
    for (const auto &el : mesh.elements()) {
        for (int v : el)
            ++vstart[v + 1];
    }
    for (int v = 0; v < nv; ++v)
        vstart[v + 1] += vstart[v];
    std::vector<int> vfill(vstart.begin(), vstart.end() - 1), velem(vstart[nv]);
    for (int t = 0; t < ne; ++t) {
        for (int v : mesh.elements()[t])
            velem[vfill[v]++] = t;
    }
    std::vector<std::vector<int>> touching(ne);
    for (int t = 0; t < ne; ++t) {
        auto &list = touching[t];
        for (int v : mesh.elements()[t])
            list.insert(list.end(), velem.begin() + vstart[v], velem.begin() + vstart[v + 1]);
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }

    // Far field: element pairs that share no vertex. Cross terms go to the columns of the
    // lower-numbered element and are mirrored afterwards; the diagonal blocks collect the
    // potential of every partner with the same quadrature.
    const TriangleRule mid_rule = triangle_rule(5);
    const TriangleRule near_rule = collapsed_rule(std::max(2, n_pts / 2));
    std::vector<PointSet> mid_pts(ne), near_pts(ne);
    for (int t = 0; t < ne; ++t) {
        mid_pts[t] = make_points(data[t], mid_rule);
        near_pts[t] = make_points(data[t], near_rule);
    }
    std::vector<double> f_far(ne, 0.0);
    std::vector<Point> g_far(ne);
    std::vector<std::vector<double>> f_mid(ne, std::vector<double>(mid_rule.weights.size(), 0.0));
    std::vector<std::vector<double>> f_near(ne, std::vector<double>(near_rule.weights.size(), 0.0));

    const double far2 = options.far_ratio * options.far_ratio;
    const double near2 = options.near_ratio * options.near_ratio;
    std::vector<int> stamp(ne, -1);
    std::vector<double> d2(ne), k0(ne);
    std::vector<std::array<double, 3>> column(nd, {0.0, 0.0, 0.0});
    std::vector<double> pd2, pk, g;
    std::vector<int> mid_pairs, near_pairs;

    auto pair_tier = [&](int t, int t2, const PointSet &p1, const PointSet &p2,
                         std::vector<double> &f1, std::vector<double> &f2) {
        const int m1 = p1.count, m2 = p2.count;
        pd2.resize(static_cast<std::size_t>(m1) * m2);
        pk.resize(pd2.size());
        for (int i = 0; i < m1; ++i) {
            for (int j = 0; j < m2; ++j) {
                Point z = p1.x[i] - p2.x[j];
                pd2[i * m2 + j] = z.x * z.x + z.y * z.y;
            }
        }
        detail::pow_batch(pd2.data(), pk.data(), pd2.size(), -1.0 - s);
        const bool cross = data[t].has_dof && data[t2].has_dof;
        double q[3][3] = {};
        for (int i = 0; i < m1; ++i) {
            const double *ki = pk.data() + static_cast<std::size_t>(i) * m2;
            double row = 0.0, gb[3] = {0.0, 0.0, 0.0};
            for (int j = 0; j < m2; ++j) {
                double kw = ki[j] * p2.w[j];
                row += kw;
                gb[0] += kw * p2.phi[j][0];
                gb[1] += kw * p2.phi[j][1];
                gb[2] += kw * p2.phi[j][2];
                f2[j] += p1.w[i] * ki[j];
            }
            f1[i] += row;
            if (cross) {
                for (int aa = 0; aa < 3; ++aa) {
                    double wa = p1.w[i] * p1.phi[i][aa];
                    for (int bb = 0; bb < 3; ++bb)
                        q[aa][bb] += wa * gb[bb];
                }
            }
        }
        if (!cross)
            return;
        for (int aa = 0; aa < 3; ++aa) {
            int da = data[t].dof[aa];
            if (da < 0)
                continue;
            for (int bb = 0; bb < 3; ++bb) {
                int db = data[t2].dof[bb];
                if (db >= 0)
                    a(db, da) -= c * q[aa][bb];
            }
        }
    };

    for (int t = 0; t < ne; ++t) {
        for (int t2 : touching[t])
            stamp[t2] = t;
        const int m = ne - t - 1;
        if (m == 0)
            continue;
        const Point ct = data[t].centroid;
        for (int j = 0; j < m; ++j) {
            Point z = ct - data[t + 1 + j].centroid;
            d2[j] = z.x * z.x + z.y * z.y;
        }
        detail::pow_batch(d2.data(), k0.data(), m, -1.0 - s);

        const ElementData &et = data[t];
        const double wt = et.area;
        int lo = nd, hi = -1;
        double ft = 0.0;
        Point gt{};
        mid_pairs.clear();
        near_pairs.clear();
        for (int j = 0; j < m; ++j) {
            const int t2 = t + 1 + j;
            if (stamp[t2] == t)
                continue;
            const ElementData &e2 = data[t2];
            double dm = std::max(et.diam, e2.diam);
            double r2 = d2[j] / (dm * dm);
            if (r2 >= far2) {
                // Centroid value plus the gradient term, which integrates the hats' first moments exactly.
                double k = k0[j];
                Point z = ct - e2.centroid;
                Point grad = (-(2.0 + 2.0 * s) * k / d2[j]) * z;
                ft += e2.area * k;
                gt = gt + e2.area * grad;
                f_far[t2] += wt * k;
                g_far[t2] = g_far[t2] - wt * grad;
                if (et.has_dof && e2.has_dof) {
                    double v = -c * wt * e2.area / 9.0;
                    double ga[3];
                    for (int aa = 0; aa < 3; ++aa)
                        ga[aa] = 0.25 * dot(grad, et.corner[aa] - ct);
                    for (int bb = 0; bb < 3; ++bb) {
                        int db = e2.dof[bb];
                        if (db < 0)
                            continue;
                        double base = k - 0.25 * dot(grad, e2.corner[bb] - e2.centroid);
                        auto &cl = column[db];
                        cl[0] += v * (base + ga[0]);
                        cl[1] += v * (base + ga[1]);
                        cl[2] += v * (base + ga[2]);
                        lo = std::min(lo, db);
                        hi = std::max(hi, db);
                    }
                }
            } else if (r2 >= near2) {
                mid_pairs.push_back(t2);
            } else {
                near_pairs.push_back(t2);
            }
        }
        f_far[t] += ft;
        g_far[t] = g_far[t] + gt;
        if (hi >= lo) {
            for (int aa = 0; aa < 3; ++aa) {
                int da = et.dof[aa];
                if (da < 0)
                    continue;
                double *col = a.col(da).data();
                for (int i = lo; i <= hi; ++i)
                    col[i] += column[i][aa];
            }
            std::fill(column.begin() + lo, column.begin() + hi + 1, std::array<double, 3>{0.0, 0.0, 0.0});
        }
        for (int t2 : mid_pairs)
            pair_tier(t, t2, mid_pts[t], mid_pts[t2], f_mid[t], f_mid[t2]);
        for (int t2 : near_pairs)
            pair_tier(t, t2, near_pts[t], near_pts[t2], f_near[t], f_near[t2]);
    }
    symmetrize_sum(a);

    // Diagonal blocks from the far field and the complement of the domain.
    ComplementPotential psi(mesh, s);
    const auto &bnd = mesh.boundary_vertex();
    for (int t = 0; t < ne; ++t) {
        const ElementData &e = data[t];
        if (!e.has_dof)
            continue;
        // Far potential F0 + G.(x - c): mass matrix and first moments of phi_a phi_b.
        double blk[3][3] = {};
        double gv[3];
        for (int k = 0; k < 3; ++k)
            gv[k] = dot(g_far[t], e.corner[k] - e.centroid);
        for (int aa = 0; aa < 3; ++aa) {
            for (int bb = 0; bb <= aa; ++bb) {
                double moment;
                if (aa == bb) {
                    moment = e.area * (gv[aa] / 10.0 + (gv[(aa + 1) % 3] + gv[(aa + 2) % 3]) / 30.0);
                } else {
                    int cc = 3 - aa - bb;
                    moment = e.area * ((gv[aa] + gv[bb]) / 30.0 + gv[cc] / 60.0);
                }
                blk[aa][bb] = f_far[t] * e.area * (aa == bb ? 2.0 : 1.0) / 12.0 + moment;
            }
        }
        auto add_points = [&](const PointSet &ps, const std::vector<double> &f) {
            for (int i = 0; i < ps.count; ++i) {
                double wf = ps.w[i] * f[i];
                for (int aa = 0; aa < 3; ++aa) {
                    for (int bb = 0; bb <= aa; ++bb)
                        blk[aa][bb] += wf * ps.phi[i][aa] * ps.phi[i][bb];
                }
            }
        };
        add_points(mid_pts[t], f_mid[t]);
        add_points(near_pts[t], f_near[t]);
        const auto &el = mesh.elements()[t];
        auto comp = complement_block(e, {bnd[el[0]], bnd[el[1]], bnd[el[2]]}, psi);
        for (int aa = 0; aa < 3; ++aa) {
            int da = e.dof[aa];
            if (da < 0)
                continue;
            for (int bb = 0; bb <= aa; ++bb) {
                int db = e.dof[bb];
                if (db < 0)
                    continue;
                double v = c * (blk[aa][bb] + comp[aa][bb]);
                a(da, db) += v;
                if (da != db)
                    a(db, da) += v;
            }
        }
    }

    // Touching pairs with Sauter-Schwab quadrature; both orders of a distinct pair coincide.
    std::vector<double> scratch;
    for (int t = 0; t < ne; ++t) {
        const auto &el = mesh.elements()[t];
        for (int t2 : touching[t]) {
            if (t2 < t || (!data[t].has_dof && !data[t2].has_dof))
                continue;
            const auto &el2 = mesh.elements()[t2];
            PairConfig cfg = classify_pair(el, t, el2, t2);
            detail::PairBasis basis = detail::pair_basis(el, el2, cfg);
            std::array<Point, 3> p{data[t].corner[cfg.first[0]], data[t].corner[cfg.first[1]],
                                   data[t].corner[cfg.first[2]]};
            std::array<Point, 3> q = p;
            if (cfg.kind != PairKind::identical) {
                q = {data[t2].corner[cfg.second[0]], data[t2].corner[cfg.second[1]],
                     data[t2].corner[cfg.second[2]]};
            }
            double scale = 0.5 * c * (2.0 * data[t].area) * (2.0 * data[t2].area) *
                           detail::singular_factor(cfg.kind, s) * (t == t2 ? 1.0 : 2.0);
            double local[36] = {};
            detail::touching_pair(detail::singular_rule(cfg.kind, n_pts), p, q, s, scale, basis,
                                  local, scratch);
            int dofs[6];
            for (int u = 0; u < basis.size; ++u)
                dofs[u] = mesh.dof_of_vertex(basis.vertex[u]);
            for (int u = 0; u < basis.size; ++u) {
                if (dofs[u] < 0)
                    continue;
                for (int v = 0; v <= u; ++v) {
                    if (dofs[v] < 0)
                        continue;
                    double val = local[u + 6 * v];
                    a(dofs[u], dofs[v]) += val;
                    if (dofs[u] != dofs[v])
                        a(dofs[v], dofs[u]) += val;
                }
            }
        }
    }
    return result;
}

Eigen::VectorXd assemble_load(const Triangulation &mesh, const std::function<double(Point)> &f, int order)
{
    TriangleRule rule = triangle_rule(order);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh.num_dofs());
    for (int t = 0; t < mesh.num_elements(); ++t) {
        auto corner = mesh.corners(t);
        double area = mesh.area(t);
        const auto &el = mesh.elements()[t];
        for (std::size_t i = 0; i < rule.weights.size(); ++i) {
            double u = rule.points[i][0], v = rule.points[i][1];
            double w = 2.0 * area * rule.weights[i] * f(detail::map_point(corner, u, v));
            double lam[3] = {1.0 - u - v, u, v};
            for (int k = 0; k < 3; ++k) {
                int d = mesh.dof_of_vertex(el[k]);
                if (d >= 0)
                    b[d] += w * lam[k];
            }
        }
    }
    return b;
}

Eigen::VectorXd assemble_load(const Triangulation &mesh, double value)
{
    Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh.num_dofs());
    for (int t = 0; t < mesh.num_elements(); ++t) {
        double w = value * mesh.area(t) / 3.0;
        for (int v : mesh.elements()[t]) {
            int d = mesh.dof_of_vertex(v);
            if (d >= 0)
                b[d] += w;
        }
    }
    return b;
}

double energy_norm_sq(const EnergyMatrix &a, const FemFunction &v)
{
    if (a.mesh_id != v.mesh_id)
        throw InputError("energy_norm_sq: function and matrix live on different meshes");
    if (v.coefficients.size() != a.size())
        throw InputError("energy_norm_sq: dimension mismatch");
    return v.coefficients.dot(a.values * v.coefficients);
}

double cross_pairing(const EnergyMatrix &a_fine, const Prolongation &p, const FemFunction &v, int fine_dof)
{
    if (p.fine_id() != a_fine.mesh_id || p.coarse_id() != v.mesh_id)
        throw InputError("cross_pairing: prolongation does not connect the operands");
    if (v.coefficients.size() != p.coarse_dofs() || a_fine.size() != p.fine_dofs())
        throw InputError("cross_pairing: dimension mismatch");
    if (fine_dof < 0 || fine_dof >= a_fine.size())
        throw InputError("cross_pairing: unknown fine node");
    Eigen::VectorXd pv = p.apply(v.coefficients);
    return a_fine.values.row(fine_dof).dot(pv);
}

} // namespace fracadapt
