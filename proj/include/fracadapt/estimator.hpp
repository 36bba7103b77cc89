#pragma once

#include "fracadapt/assembly.hpp"
#include "fracadapt/mesh.hpp"

#include <Eigen/Core>

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace fracadapt {

struct IndicatorSet
{
    /// Fine dof and value tau(phi_z) for every new interior node of the uniform refinement.
    std::vector<int> node_dof;
    std::vector<double> node_tau;
    /// tau(T)^2 per coarse element; shared midpoints count in both neighbours.
    std::vector<double> element_tau_sq;
    double total_sq = 0.0;
};

/// Everything the estimator built on the uniform refinement, kept for reuse.
struct TwoLevelEstimate
{
    IndicatorSet indicators;
    Refinement fine;
    EnergyMatrix a_fine;
    Eigen::VectorXd b_fine;
    /// A_fine P u
    Eigen::VectorXd a_prolonged;
};

TwoLevelEstimate estimate_two_level(const Triangulation &coarse, const FemFunction &u,
                                    const std::function<Eigen::VectorXd(const Triangulation &)> &load,
                                    double s, const AssemblyOptions &options = {});

IndicatorSet two_level_indicators(const Triangulation &coarse, const FemFunction &u,
                                  const std::function<double(Point)> &f, double s,
                                  int quad_order = 7);

/// Solves the fine system (destroying a_fine) and returns
/// max_z | tau(phi_z) - |a(u_fine - P u, phi_z)| / |||phi_z||| | / max_z tau(phi_z).
double projection_identity_deviation(TwoLevelEstimate &estimate, double tol = 1e-12);

double subset_total(const IndicatorSet &ind, std::span<const int> elements);

struct MarkResult
{
    std::vector<int> marked;
    bool converged = false;
};

/// Minimal set with tau(M)^2 >= theta tau^2: indicators sorted descending, ties by id.
MarkResult doerfler_mark(std::span<const double> element_tau_sq, double theta);
MarkResult doerfler_mark(const IndicatorSet &ind, double theta);

void write_indicators(std::ostream &out, const IndicatorSet &ind);

} // namespace fracadapt
