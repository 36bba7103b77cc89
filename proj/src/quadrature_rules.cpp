#include "fracadapt/error.hpp"
#include "fracadapt/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fracadapt {

QuadRule1D gauss_jacobi(int n, double alpha, double beta)
{
    if (n < 1)
        throw InputError("gauss_jacobi: need at least one point");
    if (!(alpha > -1.0) || !(beta > -1.0))
        throw InputError("gauss_jacobi: exponents must exceed -1");

    // Golub-Welsch on [-1,1] for (1-x)^alpha (1+x)^beta, then t = (1+x)/2.
    const double ab = alpha + beta;
    Eigen::VectorXd diag(n), sub(std::max(n - 1, 1));
    for (int k = 0; k < n; ++k) {
        double den = (2.0 * k + ab) * (2.0 * k + ab + 2.0);
        diag[k] = k == 0 ? (beta - alpha) / (ab + 2.0) : (beta * beta - alpha * alpha) / den;
    }
    for (int k = 1; k < n; ++k) {
        double kk = k;
        double c = 2.0 * kk + ab;
        double num = 4.0 * kk * (kk + alpha) * (kk + beta) * (kk + ab);
        double den = c * c * (c + 1.0) * (c - 1.0);
        sub[k - 1] = std::sqrt(num / den);
    }
    QuadRule1D rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    rule.degree = 2 * n - 1;
    const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(alpha + 1.0) +
                                std::lgamma(beta + 1.0) - std::lgamma(ab + 2.0));
    if (n == 1) {
        rule.points[0] = 0.5 * (1.0 + diag[0]);
        rule.weights[0] = mu0 * std::pow(0.5, ab + 1.0);
        return rule;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    eig.computeFromTridiagonal(diag, sub.head(n - 1), Eigen::ComputeEigenvectors);
    if (eig.info() != Eigen::Success)
        throw NumericalError("gauss_jacobi: eigenvalue iteration failed");
    const double scale = std::pow(0.5, ab + 1.0);
    for (int k = 0; k < n; ++k) {
        double v0 = eig.eigenvectors()(0, k);
        rule.points[k] = 0.5 * (1.0 + eig.eigenvalues()[k]);
        rule.weights[k] = mu0 * v0 * v0 * scale;
    }
    return rule;
}

QuadRule1D gauss_legendre(int n)
{
    QuadRule1D rule = gauss_jacobi(n, 0.0, 0.0);
    // Enforce exact symmetry about 1/2.
    for (int k = 0; k < n / 2; ++k) {
        double x = 0.5 * (rule.points[k] + 1.0 - rule.points[n - 1 - k]);
        double w = 0.5 * (rule.weights[k] + rule.weights[n - 1 - k]);
        rule.points[k] = x;
        rule.points[n - 1 - k] = 1.0 - x;
        rule.weights[k] = rule.weights[n - 1 - k] = w;
    }
    if (n % 2 == 1)
        rule.points[n / 2] = 0.5;
    return rule;
}

TriangleRule collapsed_rule(int n)
{
    // x = u, y = (1-u) v with Jacobian (1-u) absorbed into the Jacobi weight.
    QuadRule1D gu = gauss_jacobi(n, 1.0, 0.0);
    QuadRule1D gv = gauss_legendre(n);
    TriangleRule rule;
    rule.degree = 2 * n - 1;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double u = gu.points[i];
            rule.points.push_back({u, (1.0 - u) * gv.points[j]});
            rule.weights.push_back(gu.weights[i] * gv.weights[j]);
        }
    }
    return rule;
}

TriangleRule triangle_rule(int degree)
{
    TriangleRule rule;
    if (degree <= 1) {
        rule.points = {{1.0 / 3.0, 1.0 / 3.0}};
        rule.weights = {0.5};
        rule.degree = 1;
    } else if (degree == 2) {
        rule.points = {{1.0 / 6.0, 1.0 / 6.0}, {2.0 / 3.0, 1.0 / 6.0}, {1.0 / 6.0, 2.0 / 3.0}};
        rule.weights = {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};
        rule.degree = 2;
    } else if (degree <= 5) {
        // Radon's seven-point rule.
        const double r = std::sqrt(15.0);
        const double a = (6.0 - r) / 21.0, wa = (155.0 - r) / 2400.0;
        const double b = (6.0 + r) / 21.0, wb = (155.0 + r) / 2400.0;
        rule.points = {{1.0 / 3.0, 1.0 / 3.0}, {a, a}, {1.0 - 2.0 * a, a}, {a, 1.0 - 2.0 * a},
                       {b, b}, {1.0 - 2.0 * b, b}, {b, 1.0 - 2.0 * b}};
        rule.weights = {9.0 / 80.0, wa, wa, wa, wb, wb, wb};
        rule.degree = 5;
    } else {
        rule = collapsed_rule((degree + 2) / 2);
    }
    return rule;
}

int points_per_axis(int order)
{
    if (order < 1)
        throw InputError("quadrature order must be at least 1");
    return 2 * ((order + 1) / 2);
}

} // namespace fracadapt
