#include "fracadapt/error.hpp"
#include "fracadapt/quadrature.hpp"
#include "internal.hpp"

#include <algorithm>
#include <cmath>

namespace fracadapt {

namespace {

// int_0^1 f(v) dv for f smooth except for a near-singularity close to v = 0 at relative
// distance eps; geometric panels toward zero.
template <class F>
double graded_integral(F f, double eps, int n)
{
    QuadRule1D g = gauss_legendre(n);
    double sum = 0.0;
    double lo = 0.0;
    double hi = std::min(1.0, std::max(eps, 1e-14));
    while (true) {
        for (std::size_t i = 0; i < g.points.size(); ++i)
            sum += (hi - lo) * g.weights[i] * f(lo + (hi - lo) * g.points[i]);
        if (hi >= 1.0)
            break;
        lo = hi;
        hi = std::min(1.0, 4.0 * hi);
    }
    return sum;
}

double power_integral_impl(const std::array<Point, 3> &tri, std::array<double, 3> l, double alpha,
                           const std::function<double(Point)> &g, int g_degree, int depth)
{
    const double area = std::abs(detail::triangle_area(tri));
    if (area == 0.0)
        return 0.0;
    const double lmax = std::max({l[0], l[1], l[2]});
    if (!(lmax > 0.0))
        return 0.0;
    int zeros = 0;
    for (double &v : l) {
        if (v < 1e-12 * lmax)
            v = 0.0;
        zeros += v == 0.0;
    }
    const int n = std::max(2, g_degree / 2 + 2);

    if (zeros == 2) {
        int a = l[0] > 0.0 ? 0 : l[1] > 0.0 ? 1 : 2;
        Point pa = tri[a], pb = tri[(a + 1) % 3], pc = tri[(a + 2) % 3];
        QuadRule1D gu = gauss_jacobi(n, alpha, 1.0);
        QuadRule1D gv = gauss_legendre(n);
        double sum = 0.0;
        for (std::size_t i = 0; i < gu.points.size(); ++i) {
            double u = gu.points[i];
            for (std::size_t j = 0; j < gv.points.size(); ++j) {
                Point base = pb + gv.points[j] * (pc - pb);
                sum += gu.weights[i] * gv.weights[j] * g(pa + u * (base - pa));
            }
        }
        return 2.0 * area * std::pow(l[a], alpha) * sum;
    }
    if (zeros == 1) {
        int z = l[0] == 0.0 ? 0 : l[1] == 0.0 ? 1 : 2;
        int b = (z + 1) % 3, c = (z + 2) % 3;
        Point pz = tri[z], pb = tri[b], pc = tri[c];
        double lb = l[b], lc = l[c];
        // Grade toward the endpoint with the smaller value of l.
        bool flip = lb > lc;
        if (flip) {
            std::swap(pb, pc);
            std::swap(lb, lc);
        }
        QuadRule1D gu = gauss_jacobi(n, 0.0, alpha + 1.0);
        auto inner = [&](double u) {
            auto f = [&](double v) {
                double m = lb + v * (lc - lb);
                Point base = pb + v * (pc - pb);
                return std::pow(m, alpha) * g(pz + u * (base - pz));
            };
            return graded_integral(f, lb / lc, n + 4);
        };
        double sum = 0.0;
        for (std::size_t i = 0; i < gu.points.size(); ++i)
            sum += gu.weights[i] * inner(gu.points[i]);
        return 2.0 * area * sum;
    }
    const double lmin = std::min({l[0], l[1], l[2]});
    if (lmin >= 0.25 * lmax || depth >= 12) {
        TriangleRule rule = collapsed_rule(n + 4);
        double sum = 0.0;
        for (std::size_t i = 0; i < rule.weights.size(); ++i) {
            double u = rule.points[i][0], v = rule.points[i][1];
            double lv = (1.0 - u - v) * l[0] + u * l[1] + v * l[2];
            sum += rule.weights[i] * std::pow(lv, alpha) * g(detail::map_point(tri, u, v));
        }
        return 2.0 * area * sum;
    }
    Point m01 = 0.5 * (tri[0] + tri[1]), m12 = 0.5 * (tri[1] + tri[2]), m20 = 0.5 * (tri[2] + tri[0]);
    double l01 = 0.5 * (l[0] + l[1]), l12 = 0.5 * (l[1] + l[2]), l20 = 0.5 * (l[2] + l[0]);
    return power_integral_impl({tri[0], m01, m20}, {l[0], l01, l20}, alpha, g, g_degree, depth + 1) +
           power_integral_impl({m01, tri[1], m12}, {l01, l[1], l12}, alpha, g, g_degree, depth + 1) +
           power_integral_impl({m20, m12, tri[2]}, {l20, l12, l[2]}, alpha, g, g_degree, depth + 1) +
           power_integral_impl({m12, m20, m01}, {l12, l20, l01}, alpha, g, g_degree, depth + 1);
}

} // namespace

double affine_power_integral(const std::array<Point, 3> &tri, const std::array<double, 3> &l,
                             double alpha, const std::function<double(Point)> &g, int g_degree)
{
    if (!(alpha > -1.0))
        throw InputError("affine_power_integral: exponent must exceed -1");
    for (double v : l) {
        if (v < 0.0)
            throw InputError("affine_power_integral: affine factor must be nonnegative");
    }
    return power_integral_impl(tri, l, alpha, g, std::max(0, g_degree), 0);
}

double weighted_element_integral(const std::array<Point, 3> &tri,
                                 const std::function<double(Point)> &g, double alpha,
                                 double rel_tol)
{
    if (!(alpha > -1.0))
        throw InputError("weighted_element_integral: exponent must exceed -1");
    const double a = norm(tri[2] - tri[1]), b = norm(tri[0] - tri[2]), c = norm(tri[1] - tri[0]);
    const double area = std::abs(detail::triangle_area(tri));
    if (!(area > 0.0))
        throw InputError("weighted_element_integral: degenerate element");
    const double perim = a + b + c;
    const Point incenter = (1.0 / perim) * (a * tri[0] + b * tri[1] + c * tri[2]);
    const double r = 2.0 * area / perim;

    // In the sub-triangle over edge k the distance to the boundary is the distance to edge k.
    auto evaluate = [&](int degree) {
        double sum = 0.0;
        for (int k = 0; k < 3; ++k) {
            std::array<Point, 3> sub{tri[k], tri[(k + 1) % 3], incenter};
            sum += affine_power_integral(sub, {0.0, 0.0, r}, alpha, g, degree);
        }
        return sum;
    };
    double prev = evaluate(4);
    for (int degree = 8; degree <= 64; degree *= 2) {
        double cur = evaluate(degree);
        if (std::abs(cur - prev) <= rel_tol * std::abs(cur))
            return cur;
        prev = cur;
    }
    return prev;
}

} // namespace fracadapt
