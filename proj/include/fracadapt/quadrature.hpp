#pragma once

#include "fracadapt/mesh.hpp"

#include <Eigen/Core>

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace fracadapt {

/// Rule on [0,1] for the weight (1-t)^alpha t^beta.
struct QuadRule1D
{
    std::vector<double> points;
    std::vector<double> weights;
    int degree = 0;
};

QuadRule1D gauss_legendre(int n);
QuadRule1D gauss_jacobi(int n, double alpha, double beta);

/// Rule on the reference triangle (0,0),(1,0),(0,1); weights sum to 1/2.
struct TriangleRule
{
    std::vector<std::array<double, 2>> points;
    std::vector<double> weights;
    int degree = 0;
};

/// Smallest built-in rule of at least the given degree (symmetric rules up to degree 5,
/// collapsed Gauss products beyond).
TriangleRule triangle_rule(int degree);
/// Collapsed n x n Gauss product rule, exact to degree 2n-1.
TriangleRule collapsed_rule(int n);

enum class PairKind { identical, shared_edge, shared_vertex, disjoint };

/// Vertex correspondence: local indices of the first and second element with the
/// common vertices listed first, in matching order.
struct PairConfig
{
    PairKind kind = PairKind::disjoint;
    int common = 0;
    std::array<int, 3> first{0, 1, 2};
    std::array<int, 3> second{0, 1, 2};
};

PairConfig classify_pair(const Element &a, int id_a, const Element &b, int id_b);

/// Interaction of the hat functions of the union of two elements.
struct LocalPairMatrix
{
    int size = 0;
    std::array<int, 6> vertex{};
    Eigen::Matrix<double, 6, 6> values = Eigen::Matrix<double, 6, 6>::Zero();
};

/// C(2,s)/2 * int_T int_T' (phi_i(x)-phi_i(y))(phi_j(x)-phi_j(y)) |x-y|^{-2-2s}.
/// Touching pairs use Sauter-Schwab coordinates, disjoint pairs a collapsed Gauss product.
LocalPairMatrix local_pair_matrix(const Triangulation &mesh, int t, int t2, double s, int order);

/// Geometry-level variant; vertex ids only decide the configuration.
LocalPairMatrix local_pair_matrix(const std::array<Point, 3> &a, const Element &ida,
                                  const std::array<Point, 3> &b, const Element &idb, bool same,
                                  double s, int order);

/// Points per axis used for a given quadrature order.
int points_per_axis(int order);

/// int over the complement of the ball of |x-y|^{-2-2s} dy.
double exterior_tail(Point x, Point center, double radius, double s, int n_angles = 64);

/// int over the complement of a polygonal domain of |x-y|^{-2-2s} dy, from its
/// counter-clockwise oriented boundary edges.
class ComplementPotential
{
public:
    ComplementPotential(std::vector<std::array<Point, 2>> edges, double s);
    ComplementPotential(const Triangulation &mesh, double s);

    double operator()(Point x) const;
    void evaluate(std::span<const Point> xs, std::span<double> out) const;
    /// Distance from x to the polygon boundary.
    double boundary_distance(Point x) const;
    double s() const { return s_; }

private:
    double edge_term(Point x, const std::array<Point, 2> &e, std::vector<double> &args,
                     std::vector<double> &coefs) const;

    std::vector<std::array<Point, 2>> edges_;
    double s_;
    double g_half_;
    QuadRule1D tiny_rule_;
    QuadRule1D short_rule_;
    QuadRule1D medium_rule_;
    QuadRule1D long_rule_;
    QuadRule1D angle_rule_;
    QuadRule1D tail_rule_;
};

/// int_T dist(x, dT)^alpha g(x) dx, alpha > -1, by graded quadrature on the incenter split.
double weighted_element_integral(const std::array<Point, 3> &tri,
                                 const std::function<double(Point)> &g, double alpha,
                                 double rel_tol = 1e-6);

/// int_P l(x)^alpha g(x) dx on a triangle P for an affine l >= 0 on P, where g is a
/// polynomial of degree <= g_degree. Exact up to quadrature of g.
double affine_power_integral(const std::array<Point, 3> &tri, const std::array<double, 3> &l,
                             double alpha, const std::function<double(Point)> &g, int g_degree);

} // namespace fracadapt
