#pragma once

#include "fracadapt/assembly.hpp"

#include <Eigen/Core>

namespace fracadapt {

struct SolverOptions
{
    double tol = 1e-10;
    /// Dense Cholesky up to this dimension, Jacobi-preconditioned CG above.
    int direct_limit = 6000;
    int max_iterations = 10000;
};

struct SolveReport
{
    double residual = 0.0;
    int iterations = 0;
    bool direct = true;
};

/// Solves A u = b with ||A u - b|| <= tol ||b||; throws NumericalError otherwise.
FemFunction solve_spd(const EnergyMatrix &a, const Eigen::VectorXd &b,
                      const SolverOptions &options = {}, SolveReport *report = nullptr);

Eigen::VectorXd solve_spd(const Eigen::MatrixXd &a, const Eigen::VectorXd &b,
                          const SolverOptions &options = {}, SolveReport *report = nullptr);

/// Overwrites the lower triangle of a with its Cholesky factor; the strict upper triangle
/// keeps the matrix and the diagonal is returned. Throws NumericalError if not positive definite.
Eigen::VectorXd factor_in_place(Eigen::MatrixXd &a);

/// Solves with a matrix prepared by factor_in_place, refining until tol is met.
Eigen::VectorXd solve_factored(const Eigen::MatrixXd &a, const Eigen::VectorXd &diagonal,
                               const Eigen::VectorXd &b, double tol, SolveReport *report = nullptr);

/// Product of the matrix stored in the upper triangle plus the saved diagonal.
Eigen::VectorXd upper_product(const Eigen::MatrixXd &a, const Eigen::VectorXd &diagonal,
                              const Eigen::VectorXd &x);

} // namespace fracadapt
