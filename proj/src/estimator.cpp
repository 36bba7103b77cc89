#include "fracadapt/estimator.hpp"
#include "fracadapt/error.hpp"
#include "fracadapt/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

namespace fracadapt {

TwoLevelEstimate estimate_two_level(const Triangulation &coarse, const FemFunction &u,
                                    const std::function<Eigen::VectorXd(const Triangulation &)> &load,
                                    double s, const AssemblyOptions &options)
{
    if (u.mesh_id != coarse.id() || u.coefficients.size() != coarse.num_dofs())
        throw InputError("estimate_two_level: function does not belong to the mesh");
    TwoLevelEstimate est;
    est.fine = uniform_refine(coarse);
    const Triangulation &fine = est.fine.mesh;
    est.a_fine = assemble_stiffness(fine, s, options);
    est.b_fine = load(fine);
    if (est.b_fine.size() != fine.num_dofs())
        throw InputError("estimate_two_level: load vector has the wrong size");
    Eigen::VectorXd pu = est.fine.prolongation.apply(u.coefficients);
    est.a_prolonged = est.a_fine.values.selfadjointView<Eigen::Lower>() * pu;

    auto nodes = new_interior_nodes(coarse, est.fine);
    IndicatorSet &ind = est.indicators;
    std::vector<double> tau_of_vertex(fine.num_vertices(), -1.0);
    for (const auto &list : nodes) {
        for (int v : list) {
            if (tau_of_vertex[v] >= 0.0)
                continue;
            int z = fine.dof_of_vertex(v);
            double azz = est.a_fine.values(z, z);
            if (!(azz > 0.0))
                throw NumericalError("estimate_two_level: nonpositive diagonal entry", azz);
            tau_of_vertex[v] = std::abs(est.b_fine[z] - est.a_prolonged[z]) / std::sqrt(azz);
        }
    }
    for (int v = 0; v < fine.num_vertices(); ++v) {
        if (tau_of_vertex[v] >= 0.0) {
            ind.node_dof.push_back(fine.dof_of_vertex(v));
            ind.node_tau.push_back(tau_of_vertex[v]);
        }
    }
    ind.element_tau_sq.assign(coarse.num_elements(), 0.0);
    for (int t = 0; t < coarse.num_elements(); ++t) {
        for (int v : nodes[t])
            ind.element_tau_sq[t] += tau_of_vertex[v] * tau_of_vertex[v];
        ind.total_sq += ind.element_tau_sq[t];
    }
    return est;
}

IndicatorSet two_level_indicators(const Triangulation &coarse, const FemFunction &u,
                                  const std::function<double(Point)> &f, double s, int quad_order)
{
    AssemblyOptions options;
    options.quad_order = quad_order;
    auto load = [&](const Triangulation &mesh) { return assemble_load(mesh, f); };
    return estimate_two_level(coarse, u, load, s, options).indicators;
}

double projection_identity_deviation(TwoLevelEstimate &estimate, double tol)
{
    const IndicatorSet &ind = estimate.indicators;
    double tau_max = 0.0;
    for (double t : ind.node_tau)
        tau_max = std::max(tau_max, t);
    if (ind.node_tau.empty() || tau_max == 0.0)
        return 0.0;

    Eigen::MatrixXd &a = estimate.a_fine.values;
    Eigen::VectorXd diag = factor_in_place(a);
    SolveReport report;
    Eigen::VectorXd u_fine = solve_factored(a, diag, estimate.b_fine, tol, &report);
    Eigen::VectorXd a_u = upper_product(a, diag, u_fine);
    estimate.a_fine.mesh_id = 0; // matrix no longer usable

    double worst = 0.0;
    for (std::size_t k = 0; k < ind.node_dof.size(); ++k) {
        int z = ind.node_dof[k];
        double projected = std::abs(a_u[z] - estimate.a_prolonged[z]) / std::sqrt(diag[z]);
        worst = std::max(worst, std::abs(ind.node_tau[k] - projected));
    }
    return worst / tau_max;
}

double subset_total(const IndicatorSet &ind, std::span<const int> elements)
{
    double sum = 0.0;
    for (int t : elements) {
        if (t < 0 || t >= static_cast<int>(ind.element_tau_sq.size()))
            throw InputError("subset_total: unknown element id " + std::to_string(t));
        sum += ind.element_tau_sq[t];
    }
    return std::sqrt(sum);
}

MarkResult doerfler_mark(std::span<const double> element_tau_sq, double theta)
{
    if (!(theta > 0.0 && theta <= 1.0))
        throw InputError("doerfler_mark: theta must lie in (0,1]");
    for (double v : element_tau_sq)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw InputError("doerfler_mark: indicators must be finite and nonnegative");
    std::vector<int> order(element_tau_sq.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return element_tau_sq[a] > element_tau_sq[b]; });
    double total = 0.0;
    for (int t : order)
        total += element_tau_sq[t];
    MarkResult result;
    if (total == 0.0) {
        result.converged = true;
        return result;
    }
    const double target = theta * total;
    double sum = 0.0;
    for (int t : order) {
        if (sum >= target || element_tau_sq[t] == 0.0)
            break;
        result.marked.push_back(t);
        sum += element_tau_sq[t];
    }
    return result;
}

MarkResult doerfler_mark(const IndicatorSet &ind, double theta)
{
    return doerfler_mark(std::span<const double>(ind.element_tau_sq), theta);
}

void write_indicators(std::ostream &out, const IndicatorSet &ind)
{
    out << "element_id,tau_sq\n";
    char buf[64];
    for (std::size_t t = 0; t < ind.element_tau_sq.size(); ++t) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", t, ind.element_tau_sq[t]);
        out << buf;
    }
}

} // namespace fracadapt
