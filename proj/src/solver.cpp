#include "fracadapt/solver.hpp"
#include "fracadapt/error.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <string>

namespace fracadapt {

namespace {

double relative_residual(const Eigen::VectorXd &r, const Eigen::VectorXd &b)
{
    double nb = b.norm();
    return nb > 0.0 ? r.norm() / nb : r.norm();
}

Eigen::VectorXd conjugate_gradient(const Eigen::MatrixXd &a, const Eigen::VectorXd &b,
                                   const SolverOptions &options, SolveReport &report)
{
    const Eigen::Index n = a.rows();
    Eigen::VectorXd inv_diag(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(a(i, i) > 0.0))
            throw NumericalError("solve_spd: nonpositive diagonal entry", 1.0);
        inv_diag[i] = 1.0 / a(i, i);
    }
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd r = b;
    Eigen::VectorXd z = inv_diag.cwiseProduct(r);
    Eigen::VectorXd p = z;
    double rz = r.dot(z);
    const double target = options.tol * b.norm();
    report.direct = false;
    for (int it = 0; it < options.max_iterations; ++it) {
        if (r.norm() <= target) {
            report.iterations = it;
            break;
        }
        Eigen::VectorXd ap = a.selfadjointView<Eigen::Lower>() * p;
        double alpha = rz / p.dot(ap);
        x += alpha * p;
        r -= alpha * ap;
        z = inv_diag.cwiseProduct(r);
        double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
        report.iterations = it + 1;
    }
    Eigen::VectorXd res = b - a.selfadjointView<Eigen::Lower>() * x;
    report.residual = relative_residual(res, b);
    if (!(report.residual <= options.tol))
        throw NumericalError("solve_spd: conjugate gradients did not converge (residual " +
                                 std::to_string(report.residual) + ")",
                             report.residual);
    return x;
}

} // namespace

Eigen::VectorXd solve_spd(const Eigen::MatrixXd &a, const Eigen::VectorXd &b, const SolverOptions &options,
                          SolveReport *report)
{
    if (a.rows() != a.cols() || a.rows() != b.size())
        throw InputError("solve_spd: dimension mismatch");
    SolveReport local;
    SolveReport &rep = report ? *report : local;
    rep = SolveReport{};
    const Eigen::Index n = a.rows();
    if (n == 0)
        return Eigen::VectorXd();
    if (b.norm() == 0.0)
        return Eigen::VectorXd::Zero(n);
    if (n > options.direct_limit)
        return conjugate_gradient(a, b, options, rep);

    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success)
        throw NumericalError("solve_spd: Cholesky factorization failed (matrix not positive definite)", 1.0);
    Eigen::VectorXd x = llt.solve(b);
    Eigen::VectorXd r = b - a * x;
    rep.residual = relative_residual(r, b);
    for (int step = 0; step < 3 && rep.residual > 0.1 * options.tol; ++step) {
        x += llt.solve(r);
        r = b - a * x;
        rep.residual = relative_residual(r, b);
        rep.iterations = step + 1;
    }
    if (!(rep.residual <= options.tol))
        throw NumericalError("solve_spd: residual " + std::to_string(rep.residual) + " above tolerance",
                             rep.residual);
    return x;
}

FemFunction solve_spd(const EnergyMatrix &a, const Eigen::VectorXd &b, const SolverOptions &options,
                      SolveReport *report)
{
    FemFunction u;
    u.mesh_id = a.mesh_id;
    u.coefficients = solve_spd(a.values, b, options, report);
    return u;
}

Eigen::VectorXd factor_in_place(Eigen::MatrixXd &a)
{
    Eigen::VectorXd diag = a.diagonal();
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>, Eigen::Lower> llt(a);
    if (llt.info() != Eigen::Success)
        throw NumericalError("factor_in_place: matrix not positive definite", 1.0);
    return diag;
}

Eigen::VectorXd upper_product(const Eigen::MatrixXd &a, const Eigen::VectorXd &diagonal, const Eigen::VectorXd &x)
{
    // Strict upper triangle plus saved diagonal.
    Eigen::VectorXd y = a.triangularView<Eigen::StrictlyUpper>() * x;
    y.noalias() += a.triangularView<Eigen::StrictlyUpper>().transpose() * x;
    y += diagonal.cwiseProduct(x);
    return y;
}

Eigen::VectorXd solve_factored(const Eigen::MatrixXd &a, const Eigen::VectorXd &diagonal, const Eigen::VectorXd &b,
                               double tol, SolveReport *report)
{
    SolveReport local;
    SolveReport &rep = report ? *report : local;
    rep = SolveReport{};
    auto solve = [&](const Eigen::VectorXd &rhs) {
        Eigen::VectorXd y = a.triangularView<Eigen::Lower>().solve(rhs);
        a.triangularView<Eigen::Lower>().transpose().solveInPlace(y);
        return y;
    };
    Eigen::VectorXd x = solve(b);
    Eigen::VectorXd r = b - upper_product(a, diagonal, x);
    rep.residual = relative_residual(r, b);
    for (int step = 0; step < 5 && rep.residual > tol; ++step) {
        x += solve(r);
        r = b - upper_product(a, diagonal, x);
        rep.residual = relative_residual(r, b);
        rep.iterations = step + 1;
    }
    return x;
}

} // namespace fracadapt
