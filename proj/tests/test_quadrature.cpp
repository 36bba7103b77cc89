#include "fracadapt/assembly.hpp"
#include "fracadapt/error.hpp"
#include "fracadapt/mesh.hpp"
#include "fracadapt/quadrature.hpp"

#include "oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

using namespace fracadapt;

namespace {

constexpr double pi = std::numbers::pi;

double factorial(int n) { return std::tgamma(n + 1.0); }

// Dirichlet integral of l0^a l1^b l2^c over a triangle of the given area.
double dirichlet(double area, double a, double b, double c)
{
    return 2.0 * area * std::tgamma(a + 1.0) * std::tgamma(b + 1.0) * std::tgamma(c + 1.0) /
           std::tgamma(a + b + c + 3.0);
}

double tri_area(Point a, Point b, Point c) { return 0.5 * std::abs(cross(b - a, c - a)); }

// int_T dist^alpha g for affine g, from the incenter split: on the piece over an edge the
// distance is r times the barycentric coordinate of the incenter.
double weighted_closed_form(const std::array<Point, 3> &t, double alpha, double g0, Point grad)
{
    double l[3];
    for (int i = 0; i < 3; ++i)
        l[i] = norm(t[(i + 2) % 3] - t[(i + 1) % 3]);
    double p = l[0] + l[1] + l[2];
    Point inc = (1.0 / p) * (l[0] * t[0] + l[1] * t[1] + l[2] * t[2]);
    double r = 2.0 * tri_area(t[0], t[1], t[2]) / p;
    auto g = [&](Point x) { return g0 + dot(grad, x); };
    double total = 0.0;
    for (int e = 0; e < 3; ++e) {
        Point a = t[e], b = t[(e + 1) % 3];
        double area = tri_area(inc, a, b);
        double sum = g(inc) * dirichlet(area, alpha + 1.0, 0.0, 0.0) +
                     (g(a) + g(b)) * dirichlet(area, alpha, 1.0, 0.0);
        total += std::pow(r, alpha) * sum;
    }
    return total;
}

const std::array<Point, 3> ref_tri{Point{0.0, 0.0}, Point{1.0, 0.0}, Point{0.0, 1.0}};

double entry(const LocalPairMatrix &m, int vi, int vj)
{
    int a = -1, b = -1;
    for (int k = 0; k < m.size; ++k) {
        if (m.vertex[k] == vi)
            a = k;
        if (m.vertex[k] == vj)
            b = k;
    }
    REQUIRE(a >= 0);
    REQUIRE(b >= 0);
    return m.values(a, b);
}

} // namespace

TEST_CASE("gauss-legendre and gauss-jacobi integrate polynomials exactly")
{
    for (int n : {1, 3, 6, 12}) {
        QuadRule1D r = gauss_legendre(n);
        CHECK(r.points.size() == static_cast<std::size_t>(n));
        for (int k = 0; k < 2 * n; ++k) {
            double sum = 0.0;
            for (int i = 0; i < n; ++i)
                sum += r.weights[i] * std::pow(r.points[i], k);
            CHECK(sum == doctest::Approx(1.0 / (k + 1)).epsilon(1e-13));
        }
    }
    for (double alpha : {0.0, -0.5, 0.7})
        for (double beta : {0.0, 1.0, -0.25}) {
            QuadRule1D r = gauss_jacobi(8, alpha, beta);
            for (int k = 0; k < 16; ++k) {
                double sum = 0.0;
                for (std::size_t i = 0; i < r.points.size(); ++i)
                    sum += r.weights[i] * std::pow(r.points[i], k);
                double exact = std::exp(std::lgamma(alpha + 1.0) + std::lgamma(beta + k + 1.0) -
                                        std::lgamma(alpha + beta + k + 2.0));
                CHECK(sum == doctest::Approx(exact).epsilon(1e-12));
            }
        }
}

TEST_CASE("triangle rules reproduce monomial integrals")
{
    for (int degree = 1; degree <= 12; ++degree) {
        TriangleRule r = triangle_rule(degree);
        CHECK(r.degree >= degree);
        for (int a = 0; a <= degree; ++a)
            for (int b = 0; a + b <= degree; ++b) {
                double sum = 0.0;
                for (std::size_t i = 0; i < r.points.size(); ++i)
                    sum += r.weights[i] * std::pow(r.points[i][0], a) * std::pow(r.points[i][1], b);
                CHECK(sum == doctest::Approx(factorial(a) * factorial(b) / factorial(a + b + 2)).epsilon(1e-13));
            }
    }
    TriangleRule c = collapsed_rule(5);
    double sum = 0.0;
    for (std::size_t i = 0; i < c.points.size(); ++i)
        sum += c.weights[i] * std::pow(c.points[i][0], 4) * std::pow(c.points[i][1], 5);
    CHECK(sum == doctest::Approx(factorial(4) * factorial(5) / factorial(11)).epsilon(1e-13));
}

TEST_CASE("pair classification")
{
    Element a{0, 1, 2};
    CHECK(classify_pair(a, 0, a, 0).kind == PairKind::identical);
    PairConfig e = classify_pair(a, 0, Element{1, 3, 2}, 1);
    CHECK(e.kind == PairKind::shared_edge);
    CHECK(e.common == 2);
    PairConfig v = classify_pair(a, 0, Element{2, 3, 4}, 1);
    CHECK(v.kind == PairKind::shared_vertex);
    CHECK(v.common == 1);
    CHECK(a[v.first[0]] == 2);

    // Every initial L-shape element touches the reentrant corner; opposite corners are
    // disjoint after one refinement.
    Triangulation l = uniform_refine(build_initial_mesh(DomainSpec::l_shape())).mesh;
    int disjoint = 0;
    for (int i = 0; i < l.num_elements(); ++i)
        for (int j = 0; j < l.num_elements(); ++j) {
            std::set<int> sa(l.elements()[i].begin(), l.elements()[i].end());
            int shared = 0;
            for (int v : l.elements()[j])
                shared += static_cast<int>(sa.count(v));
            PairKind k = classify_pair(l.elements()[i], i, l.elements()[j], j).kind;
            if (i == j)
                CHECK(k == PairKind::identical);
            else if (shared == 2)
                CHECK(k == PairKind::shared_edge);
            else if (shared == 1)
                CHECK(k == PairKind::shared_vertex);
            else {
                CHECK(k == PairKind::disjoint);
                ++disjoint;
            }
        }
    CHECK(disjoint > 0);
}

TEST_CASE("local pair matrices are symmetric with zero row sums")
{
    Triangulation l = build_initial_mesh(DomainSpec::l_shape());
    for (int i = 0; i < l.num_elements(); ++i)
        for (int j = 0; j < l.num_elements(); ++j) {
            LocalPairMatrix m = local_pair_matrix(l, i, j, 0.4, 7);
            auto block = m.values.topLeftCorner(m.size, m.size);
            double scale = block.cwiseAbs().maxCoeff();
            CHECK(scale > 0.0);
            CHECK((block - block.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * scale);
            CHECK(block.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-12 * scale);
            for (int k = 0; k < m.size; ++k)
                CHECK(block(k, k) > 0.0);
        }
}

TEST_CASE("identical pair is invariant under relabeling")
{
    const Element ids{0, 1, 2};
    LocalPairMatrix base = local_pair_matrix(ref_tri, ids, ref_tri, ids, true, 0.6, 7);
    std::array<Point, 3> rotated{ref_tri[1], ref_tri[2], ref_tri[0]};
    const Element rids{1, 2, 0};
    LocalPairMatrix rot = local_pair_matrix(rotated, rids, rotated, rids, true, 0.6, 7);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(entry(rot, i, j) == doctest::Approx(entry(base, i, j)).epsilon(1e-12));
}

TEST_CASE("touching pair entries converge in the quadrature order")
{
    std::array<Point, 3> b{Point{1.0, 0.0}, Point{2.0, 0.5}, Point{1.2, 1.1}};
    const Element ia{0, 1, 2}, ib{1, 3, 4};
    for (double s : {0.25, 0.75}) {
        std::vector<double> values;
        for (int order = 2; order <= 14; order += 2)
            values.push_back(local_pair_matrix(ref_tri, ia, b, ib, false, s, order).values(0, 0));
        double prev = std::abs(values[1] - values[0]);
        for (std::size_t k = 2; k < values.size(); ++k) {
            double d = std::abs(values[k] - values[k - 1]);
            if (k >= 3)
                CHECK(d <= prev);
            prev = d;
        }
        CHECK(prev <= 1e-9 * std::abs(values.back()));
    }
}

TEST_CASE("identical pair matches the subdivision oracle")
{
    const Element ids{0, 1, 2};
    for (double s : {0.25, 0.5, 0.75}) {
        LocalPairMatrix m = local_pair_matrix(ref_tri, ids, ref_tri, ids, true, s, 7);
        double scale = 0.5 * fractional_constant(s);
        double o00 = scale * oracle::identical_pair(s, 0, 0, 5);
        double o12 = scale * oracle::identical_pair(s, 1, 2, 5);
        CHECK(std::abs(m.values(0, 0) - o00) <= 1e-3 * std::abs(o00));
        CHECK(std::abs(entry(m, 1, 2) - o12) <= 1e-3 * std::abs(o12));
    }
}

TEST_CASE("far pairs decay like the kernel")
{
    for (double s : {0.25, 0.75}) {
        auto shifted = [](double d) {
            return std::array<Point, 3>{Point{d, 0.0}, Point{d + 1.0, 0.0}, Point{d, 1.0}};
        };
        const Element ia{0, 1, 2}, ib{3, 4, 5};
        double near = local_pair_matrix(ref_tri, ia, shifted(40.0), ib, false, s, 7).values(0, 1);
        double far = local_pair_matrix(ref_tri, ia, shifted(80.0), ib, false, s, 7).values(0, 1);
        CHECK(far / near == doctest::Approx(std::pow(2.0, -2.0 - 2.0 * s)).epsilon(0.01));
    }
}

TEST_CASE("exterior tail of a ball")
{
    CHECK(exterior_tail({0.0, 0.0}, {0.0, 0.0}, 1.0, 0.5) == doctest::Approx(2.0 * pi).epsilon(1e-12));
    CHECK(exterior_tail({0.0, 0.0}, {0.0, 0.0}, 1.0, 0.25) == doctest::Approx(pi / 0.25).epsilon(1e-12));
    CHECK(exterior_tail({0.0, 0.0}, {0.0, 0.0}, 2.0, 0.5) == doctest::Approx(pi).epsilon(1e-12));
    double prev = exterior_tail({0.1, 0.2}, {0.0, 0.0}, 1.0, 0.5);
    for (double r : {1.5, 2.0, 4.0}) {
        double v = exterior_tail({0.1, 0.2}, {0.0, 0.0}, r, 0.5);
        CHECK(v < prev);
        prev = v;
    }
    for (double s : {0.25, 0.5, 0.75}) {
        double v = exterior_tail({0.3, 0.2}, {0.1, -0.1}, 1.5, s);
        double o = oracle::annulus_tail({0.3, 0.2}, {0.1, -0.1}, 1.5, s);
        CHECK(std::abs(v - o) <= 1e-6 * o);
    }
    CHECK_THROWS_AS(exterior_tail({1.0, 0.0}, {0.0, 0.0}, 1.0, 0.5), InputError);
    CHECK_THROWS_AS(exterior_tail({2.0, 0.0}, {0.0, 0.0}, 1.0, 0.5), InputError);
}

TEST_CASE("complement potential of convex polygons")
{
    std::vector<oracle::Vec> square{{-1.0, -1.0}, {1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}};
    std::vector<std::array<Point, 2>> edges;
    for (std::size_t i = 0; i < square.size(); ++i) {
        auto &a = square[i];
        auto &b = square[(i + 1) % square.size()];
        edges.push_back({Point{a.x, a.y}, Point{b.x, b.y}});
    }
    for (double s : {0.25, 0.5, 0.75}) {
        ComplementPotential psi(edges, s);
        for (Point x : {Point{0.0, 0.0}, Point{0.3, -0.5}, Point{0.9, 0.95}, Point{-0.999, 0.2}}) {
            double o = oracle::convex_complement(square, {x.x, x.y}, s);
            CHECK(std::abs(psi(x) - o) <= 1e-8 * o);
        }
    }

    Triangulation disc = build_initial_mesh(DomainSpec::circle(8));
    std::vector<oracle::Vec> octagon;
    for (int k = 0; k < 8; ++k)
        octagon.push_back({std::cos(2.0 * pi * k / 8), std::sin(2.0 * pi * k / 8)});
    ComplementPotential psi(disc, 0.5);
    for (Point x : {Point{0.0, 0.0}, Point{0.5, 0.1}, Point{-0.2, -0.85}}) {
        double o = oracle::convex_complement(octagon, {x.x, x.y}, 0.5);
        CHECK(std::abs(psi(x) - o) <= 1e-8 * o);
    }
    std::vector<Point> xs{{0.0, 0.0}, {0.5, 0.1}};
    std::vector<double> out(2);
    psi.evaluate(xs, out);
    CHECK(out[0] == doctest::Approx(psi(xs[0])).epsilon(1e-14));
    CHECK(out[1] == doctest::Approx(psi(xs[1])).epsilon(1e-14));
    CHECK(psi.boundary_distance({0.0, 0.0}) == doctest::Approx(std::cos(pi / 8)).epsilon(1e-14));
}

TEST_CASE("weighted element integrals")
{
    auto one = [](Point) { return 1.0; };
    auto xfun = [](Point p) { return p.x; };
    CHECK(weighted_element_integral(ref_tri, one, 0.0) == doctest::Approx(0.5).epsilon(1e-6));
    double r = (2.0 - std::sqrt(2.0)) / 2.0;
    CHECK(weighted_element_integral(ref_tri, one, 1.0) == doctest::Approx(0.5 * r / 3.0).epsilon(1e-6));

    std::array<Point, 3> skew{Point{0.2, -0.1}, Point{1.7, 0.3}, Point{0.4, 0.9}};
    for (const auto &t : {ref_tri, skew})
        for (double alpha : {0.0, 1.0, -0.5, 0.5, -0.9}) {
            double e1 = weighted_closed_form(t, alpha, 1.0, {0.0, 0.0});
            double ex = weighted_closed_form(t, alpha, 0.0, {1.0, 0.0});
            CHECK(std::abs(weighted_element_integral(t, one, alpha) - e1) <= 1e-6 * e1);
            CHECK(std::abs(weighted_element_integral(t, xfun, alpha) - ex) <= 1e-6 * std::abs(ex));
        }
    CHECK_THROWS_AS(weighted_element_integral(ref_tri, one, -1.0), InputError);
}

TEST_CASE("affine power integrals")
{
    // l = barycentric coordinate of the first vertex.
    for (double alpha : {-0.5, 0.0, 0.3, 2.0}) {
        double v = affine_power_integral(ref_tri, {1.0, 0.0, 0.0}, alpha, [](Point) { return 1.0; }, 0);
        CHECK(v == doctest::Approx(dirichlet(0.5, alpha, 0.0, 0.0)).epsilon(1e-12));
        double w = affine_power_integral(ref_tri, {1.0, 0.0, 0.0}, alpha, [](Point p) { return p.x * p.y; }, 2);
        CHECK(w == doctest::Approx(dirichlet(0.5, alpha, 1.0, 1.0)).epsilon(1e-12));
    }
}
