#pragma once

#include "fracadapt/quadrature.hpp"

#include <array>
#include <cstddef>
#include <vector>

namespace fracadapt::detail {

/// out[i] = x[i]^exponent for positive finite x.
void pow_batch(const double *x, double *out, std::size_t n, double exponent);

/// Sauter-Schwab points at xi = 1 (and eta1 = 1 where the integrand is homogeneous in it):
/// first point a1 (P1-P0) + b1 (P2-P1), second point a2 (Q1-Q0) + b2 (Q2-Q1), P0 = Q0.
struct SingularRule
{
    std::vector<double> a1, b1, a2, b2, w;
    std::size_t size() const { return w.size(); }
};

const SingularRule &singular_rule(PairKind kind, int n);

/// Analytic factor left over after integrating the homogeneous directions.
double singular_factor(PairKind kind, double s);

/// Hat-function differences along the pair: for basis u, coefficient of (a1, b1, a2, b2).
struct PairBasis
{
    int size = 0;
    std::array<int, 6> vertex{};
    std::array<std::array<double, 4>, 6> coeff{};
};

PairBasis pair_basis(const Element &a, const Element &b, const PairConfig &config);

/// Accumulates scale * sum_q w_q k_q N_u N_v into out (6x6, column-major) for a touching pair
/// with permuted corners p and q.
void touching_pair(const SingularRule &rule, const std::array<Point, 3> &p,
                   const std::array<Point, 3> &q, double s, double scale, const PairBasis &basis,
                   double *out, std::vector<double> &scratch);

/// Affine images of reference-triangle rule points.
inline Point map_point(const std::array<Point, 3> &t, double u, double v)
{
    return {t[0].x + u * (t[1].x - t[0].x) + v * (t[2].x - t[0].x),
            t[0].y + u * (t[1].y - t[0].y) + v * (t[2].y - t[0].y)};
}

inline double triangle_area(const std::array<Point, 3> &t)
{
    return 0.5 * cross(t[1] - t[0], t[2] - t[0]);
}

} // namespace fracadapt::detail
