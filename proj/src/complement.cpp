#include "fracadapt/error.hpp"
#include "fracadapt/quadrature.hpp"
#include "internal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace fracadapt {

double exterior_tail(Point x, Point center, double radius, double s, int n_angles)
{
    if (!(s > 0.0 && s < 1.0))
        throw InputError("exterior_tail: s must lie in (0,1)");
    if (!(radius > 0.0))
        throw InputError("exterior_tail: radius must be positive");
    Point d = x - center;
    double dd = dot(d, d);
    if (!(dd < radius * radius))
        throw InputError("exterior_tail: point is not inside the ball");
    if (n_angles < 1)
        throw InputError("exterior_tail: need at least one angle");

    // Composite Gauss in the angle; panels shrink near the closest boundary point.
    QuadRule1D g = gauss_legendre(16);
    const int panels = std::max(1, (n_angles + 15) / 16);
    const double phi0 = std::atan2(d.y, d.x);
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        double lo = phi0 + 2.0 * std::numbers::pi * p / panels;
        double hi = phi0 + 2.0 * std::numbers::pi * (p + 1) / panels;
        for (std::size_t i = 0; i < g.points.size(); ++i) {
            double th = lo + (hi - lo) * g.points[i];
            double c = d.x * std::cos(th) + d.y * std::sin(th);
            double r = -c + std::sqrt(radius * radius - dd + c * c);
            sum += (hi - lo) * g.weights[i] * std::pow(r, -2.0 * s);
        }
    }
    return sum / (2.0 * s);
}

ComplementPotential::ComplementPotential(std::vector<std::array<Point, 2>> edges, double s)
    : edges_(std::move(edges)), s_(s)
{
    if (!(s > 0.0 && s < 1.0))
        throw InputError("complement potential: s must lie in (0,1)");
    if (edges_.empty())
        throw InputError("complement potential: empty boundary");
    // int_0^{pi/2} cos^{2s}
    g_half_ = 0.5 * std::sqrt(std::numbers::pi) * std::exp(std::lgamma(s + 0.5) - std::lgamma(s + 1.0));
    tiny_rule_ = gauss_legendre(2);
    short_rule_ = gauss_legendre(3);
    medium_rule_ = gauss_legendre(8);
    long_rule_ = gauss_legendre(16);
    angle_rule_ = gauss_legendre(12);
    tail_rule_ = gauss_jacobi(12, 0.0, 2.0 * s);
}

namespace {

std::vector<std::array<Point, 2>> edges_of(const Triangulation &mesh)
{
    std::vector<std::array<Point, 2>> out;
    for (auto [a, b] : mesh.boundary_edges())
        out.push_back({mesh.vertices()[a], mesh.vertices()[b]});
    return out;
}

} // namespace

ComplementPotential::ComplementPotential(const Triangulation &mesh, double s)
    : ComplementPotential(edges_of(mesh), s)
{
}

double ComplementPotential::boundary_distance(Point x) const
{
    double best = std::numeric_limits<double>::infinity();
    for (const auto &e : edges_) {
        Point d = e[1] - e[0];
        double t = std::clamp(dot(x - e[0], d) / dot(d, d), 0.0, 1.0);
        best = std::min(best, norm(x - (e[0] + t * d)));
    }
    return best;
}

// delta * int_{t0}^{t1} (delta^2 + t^2)^{-1-s} dt, the flux of the kernel through one edge.
// Short-range Gauss terms are appended to the buffers (argument, coefficient) for a batched
// power evaluation; the returned value holds the remaining closed-form part.
double ComplementPotential::edge_term(Point x, const std::array<Point, 2> &e,
                                      std::vector<double> &args, std::vector<double> &coefs) const
{
    Point d = e[1] - e[0];
    double len = norm(d);
    Point tau{d.x / len, d.y / len};
    Point nrm{tau.y, -tau.x};
    Point ax = e[0] - x;
    double delta = dot(ax, nrm);
    double t0 = dot(ax, tau);
    double t1 = t0 + len;
    double tc = t0 > 0.0 ? t0 : (t1 < 0.0 ? t1 : 0.0);
    double dist2 = delta * delta + tc * tc;
    if (dist2 == 0.0)
        return std::numeric_limits<double>::infinity();
    if (delta == 0.0)
        return 0.0;

    double ratio2 = len * len / dist2;
    if (ratio2 < 1.5 * 1.5) {
        const QuadRule1D &g = ratio2 < 0.03 * 0.03 ? tiny_rule_
                              : ratio2 < 0.1 * 0.1 ? short_rule_
                              : ratio2 < 0.5 * 0.5 ? medium_rule_
                                                   : long_rule_;
        for (std::size_t i = 0; i < g.points.size(); ++i) {
            double t = t0 + len * g.points[i];
            args.push_back(delta * delta + t * t);
            coefs.push_back(delta * len * g.weights[i]);
        }
        return 0.0;
    }

    // Angular form: sgn(delta) |delta|^{-2s} (G(phi1) - G(phi0)), G(phi) = int_0^phi cos^{2s}.
    // Endpoints with |t| > |delta| go through the complementary angle to keep the tail accurate.
    const double ad = std::abs(delta);
    auto g_small = [&](double phi) {
        double sum = 0.0;
        for (std::size_t i = 0; i < angle_rule_.points.size(); ++i)
            sum += angle_rule_.weights[i] * std::pow(std::cos(phi * angle_rule_.points[i]), 2.0 * s_);
        return phi * sum;
    };
    auto tail = [&](double v) {
        // int_0^v sin^{2s} = v^{2s+1} int_0^1 r^{2s} (sin(v r)/(v r))^{2s} dr
        if (v == 0.0)
            return 0.0;
        double sum = 0.0;
        for (std::size_t i = 0; i < tail_rule_.points.size(); ++i) {
            double a = v * tail_rule_.points[i];
            sum += tail_rule_.weights[i] * std::pow(std::sin(a) / a, 2.0 * s_);
        }
        return std::pow(v, 2.0 * s_ + 1.0) * sum;
    };
    double diff;
    bool far0 = std::abs(t0) > ad, far1 = std::abs(t1) > ad;
    if (far0 && far1 && (t0 > 0.0) == (t1 > 0.0)) {
        double v0 = std::atan(ad / std::abs(t0));
        double v1 = std::atan(ad / std::abs(t1));
        diff = (t1 > 0.0 ? 1.0 : -1.0) * (tail(v0) - tail(v1));
    } else {
        auto g = [&](double t, bool far) {
            if (!far)
                return g_small(std::atan(t / ad));
            double sg = t > 0.0 ? 1.0 : -1.0;
            return sg * (g_half_ - tail(std::atan(ad / std::abs(t))));
        };
        diff = g(t1, far1) - g(t0, far0);
    }
    return (delta > 0.0 ? 1.0 : -1.0) * std::pow(ad, -2.0 * s_) * diff;
}

void ComplementPotential::evaluate(std::span<const Point> xs, std::span<double> out) const
{
    if (xs.size() != out.size())
        throw InputError("complement potential: output size mismatch");
    std::vector<double> args, coefs, pows;
    args.reserve(4 * edges_.size());
    coefs.reserve(4 * edges_.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        args.clear();
        coefs.clear();
        double sum = 0.0;
        for (const auto &e : edges_)
            sum += edge_term(xs[i], e, args, coefs);
        pows.resize(args.size());
        detail::pow_batch(args.data(), pows.data(), args.size(), -1.0 - s_);
        for (std::size_t k = 0; k < args.size(); ++k)
            sum += coefs[k] * pows[k];
        out[i] = sum / (2.0 * s_);
    }
}

double ComplementPotential::operator()(Point x) const
{
    double v = 0.0;
    evaluate(std::span<const Point>(&x, 1), std::span<double>(&v, 1));
    return v;
}

} // namespace fracadapt
