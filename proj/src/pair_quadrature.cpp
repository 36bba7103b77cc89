#include "fracadapt/assembly.hpp"
#include "fracadapt/error.hpp"
#include "fracadapt/quadrature.hpp"
#include "internal.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace fracadapt {

PairConfig classify_pair(const Element &a, int id_a, const Element &b, int id_b)
{
    PairConfig cfg;
    if (id_a == id_b) {
        cfg.kind = PairKind::identical;
        cfg.common = 3;
        return cfg;
    }
    std::array<int, 3> ca{}, cb{};
    int c = 0;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            if (a[i] == b[j]) {
                ca[c] = i;
                cb[c] = j;
                ++c;
            }
        }
    }
    if (c == 3)
        throw InputError("classify_pair: distinct elements with identical vertices");
    cfg.common = c;
    cfg.kind = c == 2 ? PairKind::shared_edge : c == 1 ? PairKind::shared_vertex : PairKind::disjoint;
    auto fill = [c](const std::array<int, 3> &common, std::array<int, 3> &perm) {
        int k = 0;
        for (int i = 0; i < c; ++i)
            perm[k++] = common[i];
        for (int i = 0; i < 3; ++i) {
            bool used = false;
            for (int j = 0; j < c; ++j)
                used = used || common[j] == i;
            if (!used)
                perm[k++] = i;
        }
    };
    fill(ca, cfg.first);
    fill(cb, cfg.second);
    return cfg;
}

namespace detail {

namespace {

SingularRule build_rule(PairKind kind, int n)
{
    SingularRule r;
    auto push = [&r](double a1, double b1, double a2, double b2, double w) {
        r.a1.push_back(a1);
        r.b1.push_back(b1);
        r.a2.push_back(a2);
        r.b2.push_back(b2);
        r.w.push_back(w);
    };
    if (kind == PairKind::identical) {
        // The integrand depends on the difference of the two points only; three
        // directions cover the difference hexagon, the other three are their negatives.
        QuadRule1D g = gauss_legendre(2 * n);
        for (std::size_t i = 0; i < g.points.size(); ++i) {
            double e = g.points[i], w = 2.0 * g.weights[i];
            push(e, 1.0, 0.0, 0.0, w);
            push(1.0, e, 0.0, 0.0, w);
            push(-e, 1.0 - e, 0.0, 0.0, w);
        }
    } else if (kind == PairKind::shared_edge) {
        QuadRule1D g = gauss_legendre(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                double e2 = g.points[i], e3 = g.points[j];
                double w = g.weights[i] * g.weights[j];
                push(e2, e3, 0.0, 1.0 - e2, w);
                push(e2 * e3, 1.0, 0.0, e2 * (1.0 - e3), w * e2);
                push(-e2, 1.0 - e2, 0.0, e2 * e3, w * e2);
                push(-e2 * e3, e2 * (1.0 - e3), 0.0, 1.0, w * e2);
                push(-e2 * e3, 1.0 - e2 * e3, 0.0, e2, w * e2);
            }
        }
    } else if (kind == PairKind::shared_vertex) {
        QuadRule1D g = gauss_legendre(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                for (int k = 0; k < n; ++k) {
                    double e1 = g.points[i], e2 = g.points[j], e3 = g.points[k];
                    double w = g.weights[i] * g.weights[j] * g.weights[k] * e2;
                    push(1.0, e1, e2, e2 * e3, w);
                    push(e2, e2 * e3, 1.0, e1, w);
                }
            }
        }
    } else {
        throw InputError("singular_rule: disjoint pairs have no singular rule");
    }
    return r;
}

} // namespace

const SingularRule &singular_rule(PairKind kind, int n)
{
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::unique_ptr<SingularRule>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto &slot = cache[{static_cast<int>(kind), n}];
    if (!slot)
        slot = std::make_unique<SingularRule>(build_rule(kind, n));
    return *slot;
}

double singular_factor(PairKind kind, double s)
{
    switch (kind) {
    case PairKind::identical:
        return 1.0 / ((4.0 - 2.0 * s) * (3.0 - 2.0 * s) * (2.0 - 2.0 * s));
    case PairKind::shared_edge:
        return 1.0 / ((4.0 - 2.0 * s) * (3.0 - 2.0 * s));
    case PairKind::shared_vertex:
        return 1.0 / (4.0 - 2.0 * s);
    default:
        return 1.0;
    }
}

PairBasis pair_basis(const Element &a, const Element &b, const PairConfig &config)
{
    PairBasis basis;
    for (int k = 0; k < 3; ++k)
        basis.vertex[basis.size++] = a[config.first[k]];
    if (config.kind != PairKind::identical) {
        for (int k = config.common; k < 3; ++k)
            basis.vertex[basis.size++] = b[config.second[k]];
    }
    for (int u = 0; u < basis.size; ++u) {
        double f[3], g[3];
        for (int k = 0; k < 3; ++k) {
            f[k] = a[config.first[k]] == basis.vertex[u] ? 1.0 : 0.0;
            g[k] = config.kind == PairKind::identical ? f[k]
                                                      : (b[config.second[k]] == basis.vertex[u] ? 1.0 : 0.0);
        }
        basis.coeff[u] = {f[1] - f[0], f[2] - f[1], -(g[1] - g[0]), -(g[2] - g[1])};
    }
    return basis;
}

void touching_pair(const SingularRule &rule, const std::array<Point, 3> &p,
                   const std::array<Point, 3> &q, double s, double scale, const PairBasis &basis,
                   double *out, std::vector<double> &scratch)
{
    const std::size_t nq = rule.size();
    scratch.resize(2 * nq);
    double *d2 = scratch.data();
    double *k = d2 + nq;
    const Point e1 = p[1] - p[0], f1 = p[2] - p[1];
    const Point e2 = q[1] - q[0], f2 = q[2] - q[1];
    for (std::size_t i = 0; i < nq; ++i) {
        double zx = rule.a1[i] * e1.x + rule.b1[i] * f1.x - rule.a2[i] * e2.x - rule.b2[i] * f2.x;
        double zy = rule.a1[i] * e1.y + rule.b1[i] * f1.y - rule.a2[i] * e2.y - rule.b2[i] * f2.y;
        d2[i] = zx * zx + zy * zy;
    }
    pow_batch(d2, k, nq, -1.0 - s);

    const int nb = basis.size;
    double acc[6][6] = {};
    for (std::size_t i = 0; i < nq; ++i) {
        double n[6];
        for (int u = 0; u < nb; ++u) {
            const auto &c = basis.coeff[u];
            n[u] = c[0] * rule.a1[i] + c[1] * rule.b1[i] + c[2] * rule.a2[i] + c[3] * rule.b2[i];
        }
        double wk = rule.w[i] * k[i];
        for (int u = 0; u < nb; ++u) {
            double t = wk * n[u];
            for (int v = 0; v <= u; ++v)
                acc[u][v] += t * n[v];
        }
    }
    for (int u = 0; u < nb; ++u) {
        for (int v = 0; v <= u; ++v) {
            double val = scale * acc[u][v];
            out[u + 6 * v] += val;
            if (u != v)
                out[v + 6 * u] += val;
        }
    }
}

} // namespace detail

LocalPairMatrix local_pair_matrix(const std::array<Point, 3> &a, const Element &ida,
                                  const std::array<Point, 3> &b, const Element &idb, bool same,
                                  double s, int order)
{
    if (!(s > 0.0 && s < 1.0))
        throw InputError("local_pair_matrix: s must lie in (0,1)");
    const double area_a = std::abs(detail::triangle_area(a));
    const double area_b = std::abs(detail::triangle_area(b));
    auto diam = [](const std::array<Point, 3> &t) {
        return std::max({norm(t[1] - t[0]), norm(t[2] - t[1]), norm(t[0] - t[2])});
    };
    if (!(area_a > 1e-14 * diam(a) * diam(a)) || !(area_b > 1e-14 * diam(b) * diam(b)))
        throw InputError("local_pair_matrix: degenerate element");
    const int n = points_per_axis(order);
    const double c = fractional_constant(s);

    PairConfig cfg = classify_pair(ida, 0, idb, same ? 0 : 1);
    LocalPairMatrix out;
    std::vector<double> scratch;

    if (cfg.kind != PairKind::disjoint) {
        detail::PairBasis basis = detail::pair_basis(ida, idb, cfg);
        std::array<Point, 3> p{a[cfg.first[0]], a[cfg.first[1]], a[cfg.first[2]]};
        std::array<Point, 3> q{b[cfg.second[0]], b[cfg.second[1]], b[cfg.second[2]]};
        if (cfg.kind == PairKind::identical)
            q = p;
        double scale = 0.5 * c * (2.0 * area_a) * (2.0 * area_b) * detail::singular_factor(cfg.kind, s);
        detail::touching_pair(detail::singular_rule(cfg.kind, n), p, q, s, scale, basis,
                              out.values.data(), scratch);
        out.size = basis.size;
        out.vertex = basis.vertex;
        return out;
    }

    // Disjoint: collapsed Gauss product on both elements.
    out.size = 6;
    for (int k = 0; k < 3; ++k) {
        out.vertex[k] = ida[k];
        out.vertex[3 + k] = idb[k];
    }
    TriangleRule rule = collapsed_rule(n);
    const std::size_t m = rule.weights.size();
    std::vector<Point> xa(m), xb(m);
    for (std::size_t i = 0; i < m; ++i) {
        xa[i] = detail::map_point(a, rule.points[i][0], rule.points[i][1]);
        xb[i] = detail::map_point(b, rule.points[i][0], rule.points[i][1]);
    }
    std::vector<double> d2(m * m), k(m * m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            Point z = xa[i] - xb[j];
            d2[i * m + j] = dot(z, z);
        }
    }
    detail::pow_batch(d2.data(), k.data(), d2.size(), -1.0 - s);
    double acc[6][6] = {};
    for (std::size_t i = 0; i < m; ++i) {
        double u = rule.points[i][0], v = rule.points[i][1];
        double la[3] = {1.0 - u - v, u, v};
        for (std::size_t j = 0; j < m; ++j) {
            double uu = rule.points[j][0], vv = rule.points[j][1];
            double lb[3] = {1.0 - uu - vv, uu, vv};
            double nvec[6] = {la[0], la[1], la[2], -lb[0], -lb[1], -lb[2]};
            double w = rule.weights[i] * rule.weights[j] * k[i * m + j];
            for (int r = 0; r < 6; ++r) {
                for (int t = 0; t <= r; ++t)
                    acc[r][t] += w * nvec[r] * nvec[t];
            }
        }
    }
    const double scale = 0.5 * c * (2.0 * area_a) * (2.0 * area_b);
    for (int r = 0; r < 6; ++r) {
        for (int t = 0; t <= r; ++t) {
            out.values(r, t) = scale * acc[r][t];
            out.values(t, r) = scale * acc[r][t];
        }
    }
    return out;
}

LocalPairMatrix local_pair_matrix(const Triangulation &mesh, int t, int t2, double s, int order)
{
    if (t < 0 || t >= mesh.num_elements() || t2 < 0 || t2 >= mesh.num_elements())
        throw InputError("local_pair_matrix: unknown element id");
    return local_pair_matrix(mesh.corners(t), mesh.elements()[t], mesh.corners(t2),
                             mesh.elements()[t2], t == t2, s, order);
}

} // namespace fracadapt
