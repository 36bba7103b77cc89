#include "fracadapt/assembly.hpp"
#include "fracadapt/error.hpp"
#include "fracadapt/solver.hpp"

#include <doctest.h>

#include <Eigen/Dense>

using namespace fracadapt;

namespace {

Eigen::MatrixXd spd(int n)
{
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m(i, j) = 1.0 / (1.0 + std::abs(i - j));
    return m + n * Eigen::MatrixXd::Identity(n, n);
}

} // namespace

TEST_CASE("small systems")
{
    Eigen::VectorXd b(3);
    b << 1.0, -2.0, 0.5;
    CHECK((solve_spd(Eigen::MatrixXd::Identity(3, 3), b) - b).norm() <= 1e-15);
    CHECK(solve_spd(Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Zero(3)).isZero(0.0));

    Eigen::MatrixXd a(2, 2);
    a << 2.0, 1.0, 1.0, 2.0;
    Eigen::VectorXd u = solve_spd(a, Eigen::VectorXd::Ones(2));
    CHECK(u[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(u[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("direct and iterative paths agree")
{
    Eigen::MatrixXd a = spd(60);
    Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(60, -1.0, 2.0);
    SolveReport direct, cg;
    Eigen::VectorXd u1 = solve_spd(a, b, {1e-12, 100}, &direct);
    Eigen::VectorXd u2 = solve_spd(a, b, {1e-12, 10}, &cg);
    CHECK(direct.direct);
    CHECK_FALSE(cg.direct);
    CHECK(cg.iterations > 0);
    CHECK(cg.residual <= 1e-12);
    CHECK((u1 - u2).norm() <= 1e-10 * u1.norm());
    CHECK((a * u1 - b).norm() <= 1e-12 * b.norm());
}

TEST_CASE("scaling the system leaves the solution unchanged")
{
    Eigen::MatrixXd a = spd(20);
    Eigen::VectorXd b = Eigen::VectorXd::Ones(20);
    Eigen::VectorXd u = solve_spd(a, b);
    for (double c : {1e-6, 3.0, 1e5}) {
        CHECK((solve_spd(c * a, c * b) - u).norm() <= 1e-10 * u.norm());
        CHECK((solve_spd(c * a, c * b, {1e-12, 5}) - u).norm() <= 1e-10 * u.norm());
    }
}

TEST_CASE("failures carry the residual")
{
    Eigen::MatrixXd a(2, 2);
    a << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(solve_spd(a, Eigen::VectorXd::Ones(2)), NumericalError);
    try {
        solve_spd(spd(50), Eigen::VectorXd::Ones(50), {1e-14, 5, 1});
        FAIL("expected the iteration cap to trigger");
    } catch (const NumericalError &e) {
        CHECK(e.residual() > 1e-14);
    }
    CHECK_THROWS_AS(solve_spd(spd(3), Eigen::VectorXd::Ones(2)), InputError);
}

TEST_CASE("energy matrix overload keeps the mesh id")
{
    EnergyMatrix a;
    a.values = spd(5);
    a.mesh_id = 42;
    FemFunction u = solve_spd(a, Eigen::VectorXd::Ones(5));
    CHECK(u.mesh_id == 42);
    CHECK((a.values * u.coefficients - Eigen::VectorXd::Ones(5)).norm() <= 1e-10);
}

TEST_CASE("in-place factorization")
{
    Eigen::MatrixXd a = spd(30);
    Eigen::MatrixXd work = a;
    Eigen::VectorXd diag = factor_in_place(work);
    CHECK((diag - a.diagonal()).norm() == 0.0);
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(30, 0.0, 1.0);
    CHECK((upper_product(work, diag, x) - a * x).norm() <= 1e-13 * (a * x).norm());
    Eigen::VectorXd b = a * x;
    Eigen::VectorXd y = solve_factored(work, diag, b, 1e-14);
    CHECK((y - x).norm() <= 1e-12);

    Eigen::MatrixXd bad = -Eigen::MatrixXd::Identity(3, 3);
    CHECK_THROWS_AS(factor_in_place(bad), NumericalError);
}
