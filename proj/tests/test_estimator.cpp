#include "fracadapt/assembly.hpp"
#include "fracadapt/error.hpp"
#include "fracadapt/estimator.hpp"
#include "fracadapt/mesh.hpp"
#include "fracadapt/solver.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>
#include <vector>

using namespace fracadapt;

namespace {

struct Solved
{
    Triangulation mesh;
    FemFunction u;
};

Solved solve_on(const Triangulation &mesh, double s, double f)
{
    EnergyMatrix a = assemble_stiffness(mesh, s);
    return {mesh, solve_spd(a, assemble_load(mesh, f), {1e-13})};
}

// Smallest subset size reaching theta of the total, by enumeration.
int exhaustive_minimum(const std::vector<double> &v, double theta)
{
    const int n = static_cast<int>(v.size());
    double total = 0.0;
    for (double x : v)
        total += x;
    int best = n + 1;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        double sum = 0.0;
        int count = 0;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) {
                sum += v[i];
                ++count;
            }
        if (sum >= theta * total)
            best = std::min(best, count);
    }
    return best;
}

} // namespace

TEST_CASE("doerfler examples")
{
    std::vector<double> v{4.0, 3.0, 2.0, 1.0};
    CHECK(doerfler_mark(v, 0.5).marked == std::vector<int>{0, 1});
    CHECK(doerfler_mark(v, 0.3).marked == std::vector<int>{0});
    std::vector<double> w{0.0, 2.0, 0.0, 1.0};
    CHECK(doerfler_mark(w, 1.0).marked == std::vector<int>{1, 3});
    std::vector<double> ties{1.0, 1.0, 1.0};
    CHECK(doerfler_mark(ties, 0.5).marked == std::vector<int>{0, 1});

    std::vector<double> zero{0.0, 0.0};
    MarkResult z = doerfler_mark(zero, 0.5);
    CHECK(z.marked.empty());
    CHECK(z.converged);

    CHECK_THROWS_AS(doerfler_mark(v, 0.0), InputError);
    CHECK_THROWS_AS(doerfler_mark(v, 1.5), InputError);
    std::vector<double> neg{1.0, -1.0};
    CHECK_THROWS_AS(doerfler_mark(neg, 0.5), InputError);
}

TEST_CASE("doerfler marking is minimal")
{
    std::mt19937_64 gen(7);
    std::uniform_int_distribution<int> len(1, 12);
    std::uniform_real_distribution<double> val(0.0, 1.0);
    std::uniform_int_distribution<int> small(0, 3);
    for (int trial = 0; trial < 400; ++trial) {
        std::vector<double> v(len(gen));
        for (double &x : v)
            x = trial % 2 ? val(gen) : static_cast<double>(small(gen));
        for (double theta : {0.1, 0.3, 0.5, 0.9}) {
            MarkResult m = doerfler_mark(v, theta);
            if (m.converged) {
                CHECK(std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; }));
                continue;
            }
            CHECK(static_cast<int>(m.marked.size()) == exhaustive_minimum(v, theta));
        }
    }
}

TEST_CASE("subset totals")
{
    IndicatorSet ind;
    ind.element_tau_sq = {1.0, 4.0, 9.0};
    ind.total_sq = 14.0;
    CHECK(subset_total(ind, std::vector<int>{}) == 0.0);
    CHECK(subset_total(ind, std::vector<int>{0, 1, 2}) == doctest::Approx(std::sqrt(14.0)));
    double u = subset_total(ind, std::vector<int>{0}), v = subset_total(ind, std::vector<int>{1, 2});
    CHECK(u * u + v * v == doctest::Approx(14.0));
    CHECK_THROWS_AS(subset_total(ind, std::vector<int>{3}), InputError);
}

TEST_CASE("two-level indicators")
{
    Triangulation mesh = uniform_refine(build_initial_mesh(DomainSpec::l_shape())).mesh;
    Solved zero = solve_on(mesh, 0.5, 0.0);
    IndicatorSet z = two_level_indicators(mesh, zero.u, [](Point) { return 0.0; }, 0.5);
    CHECK(z.total_sq == 0.0);

    Solved one = solve_on(mesh, 0.5, 1.0);
    IndicatorSet a = two_level_indicators(mesh, one.u, [](Point) { return 1.0; }, 0.5);
    Solved three = solve_on(mesh, 0.5, -3.0);
    IndicatorSet b = two_level_indicators(mesh, three.u, [](Point) { return -3.0; }, 0.5);
    REQUIRE(a.node_tau.size() == b.node_tau.size());
    for (std::size_t k = 0; k < a.node_tau.size(); ++k)
        CHECK(b.node_tau[k] == doctest::Approx(3.0 * a.node_tau[k]).epsilon(1e-9));

    // Per-element sums over the new interior nodes, shared midpoints in both neighbours.
    Refinement fine = uniform_refine(mesh);
    auto nodes = new_interior_nodes(mesh, fine);
    std::vector<double> by_dof(fine.mesh.num_dofs(), -1.0);
    for (std::size_t k = 0; k < a.node_dof.size(); ++k)
        by_dof[a.node_dof[k]] = a.node_tau[k];
    double total = 0.0;
    for (int t = 0; t < mesh.num_elements(); ++t) {
        double sum = 0.0;
        for (int v : nodes[t]) {
            double tau = by_dof[fine.mesh.dof_of_vertex(v)];
            REQUIRE(tau >= 0.0);
            sum += tau * tau;
        }
        CHECK(a.element_tau_sq[t] == doctest::Approx(sum).epsilon(1e-14));
        total += a.element_tau_sq[t];
    }
    CHECK(a.total_sq == doctest::Approx(total).epsilon(1e-14));

    std::ostringstream csv;
    write_indicators(csv, a);
    CHECK(csv.str().rfind("element_id,tau_sq\n", 0) == 0);
}

TEST_CASE("indicators equal the one-dimensional projections")
{
    for (double s : {0.25, 0.75}) {
        Triangulation mesh = uniform_refine(build_initial_mesh(DomainSpec::circle(8))).mesh;
        Solved sol = solve_on(mesh, s, 1.0);
        auto load = [](const Triangulation &m) { return assemble_load(m, 1.0); };
        TwoLevelEstimate est = estimate_two_level(mesh, sol.u, load, s);
        CHECK(est.indicators.total_sq > 0.0);
        CHECK(projection_identity_deviation(est) <= 1e-10);
    }
}

TEST_CASE("estimator errors")
{
    Triangulation mesh = build_initial_mesh(DomainSpec::circle(8));
    FemFunction wrong{mesh.id() + 1, Eigen::VectorXd::Zero(mesh.num_dofs())};
    CHECK_THROWS_AS(two_level_indicators(mesh, wrong, [](Point) { return 1.0; }, 0.5), InputError);
}
