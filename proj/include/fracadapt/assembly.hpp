#pragma once

#include "fracadapt/mesh.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>

namespace fracadapt {

/// C(2,s) = 2^{2s} s Gamma(1+s) / (pi Gamma(1-s))
double fractional_constant(double s);

/// Dense Galerkin matrix on the interior vertices of a mesh.
struct EnergyMatrix
{
    Eigen::MatrixXd values;
    std::uint64_t mesh_id = 0;
    double s = 0.0;

    int size() const { return static_cast<int>(values.rows()); }
};

/// Coefficients on the interior vertices of a mesh; boundary values are zero.
struct FemFunction
{
    std::uint64_t mesh_id = 0;
    Eigen::VectorXd coefficients;
};

struct AssemblyOptions
{
    int quad_order = 7;
    /// Centroid distance over larger diameter above which a pair uses one point per element.
    double far_ratio = 12.0;
    /// Ratio below which a pair uses the collapsed product rule.
    double near_ratio = 2.0;
};

EnergyMatrix assemble_stiffness(const Triangulation &mesh, double s,
                                const AssemblyOptions &options = {});

Eigen::VectorXd assemble_load(const Triangulation &mesh, const std::function<double(Point)> &f,
                              int order = 4);
/// Constant right-hand side, integrated exactly.
Eigen::VectorXd assemble_load(const Triangulation &mesh, double c);

double energy_norm_sq(const EnergyMatrix &a, const FemFunction &v);

/// Row z of the fine matrix applied to the prolongation of v.
double cross_pairing(const EnergyMatrix &a_fine, const Prolongation &p, const FemFunction &v,
                     int fine_dof);

} // namespace fracadapt
