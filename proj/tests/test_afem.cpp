#include "fracadapt/afem.hpp"
#include "fracadapt/error.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>

using namespace fracadapt;

namespace {

LevelRecord record(int dofs, double error)
{
    LevelRecord r;
    r.dofs = dofs;
    r.error = error;
    return r;
}

} // namespace

TEST_CASE("exact disc energy")
{
    // Gamma(3/2)^2 = pi/4, so the s = 1/2 value is 2 (pi/4) 2 pi / 3.
    CHECK(exact_energy_disc(0.5) == doctest::Approx(std::numbers::pi * std::numbers::pi / 3.0).epsilon(1e-14));
    CHECK_THROWS_AS(exact_energy_disc(1.0), InputError);
}

TEST_CASE("right-hand side parsing")
{
    CHECK(RightHandSide::parse("disc-exact").kind == RightHandSide::Kind::disc_exact);
    RightHandSide c = RightHandSide::parse("constant:2.5");
    CHECK(c.kind == RightHandSide::Kind::constant);
    CHECK(c.value == 2.5);
    CHECK(c.evaluate(0.3) == 2.5);
    CHECK(RightHandSide{}.evaluate(0.5) == doctest::Approx(2.0 * std::numbers::pi / 4.0).epsilon(1e-14));
    CHECK_THROWS_AS(RightHandSide::parse("constant:"), InputError);
    CHECK_THROWS_AS(RightHandSide::parse("constant:1x"), InputError);
    CHECK_THROWS_AS(RightHandSide::parse("gaussian"), InputError);
}

TEST_CASE("energy errors")
{
    CHECK(energy_error(3.0, 4.0) == doctest::Approx(1.0));
    CHECK(energy_error(4.0 + 1e-12, 4.0) == 0.0);
    CHECK_THROWS_AS(energy_error(4.1, 4.0), NumericalError);
}

TEST_CASE("aitken extrapolation")
{
    std::vector<double> geometric;
    for (int k = 0; k < 5; ++k)
        geometric.push_back(2.0 - 0.5 * std::pow(0.25, k));
    CHECK(extrapolate_energy(geometric).limit == doctest::Approx(2.0).epsilon(1e-14));
    std::vector<double> constant{1.5, 1.5, 1.5};
    Extrapolation c = extrapolate_energy(constant);
    CHECK(c.limit == 1.5);
    CHECK(c.uncertainty == 0.0);
    std::vector<double> two{1.0, 2.0};
    CHECK_THROWS_AS(extrapolate_energy(two), InputError);
    std::vector<double> zigzag{1.0, 2.0, 1.5};
    CHECK_THROWS_AS(extrapolate_energy(zigzag), NumericalError);
}

TEST_CASE("rate fitting")
{
    std::vector<LevelRecord> half, quarter;
    for (int n : {10, 40, 160, 640, 2560}) {
        half.push_back(record(n, std::pow(n, -0.5)));
        quarter.push_back(record(n, 3.0 * std::pow(n, -0.25)));
    }
    CHECK(fit_rate(half, 4) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(fit_rate(quarter, 4) == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK_THROWS_AS(fit_rate(half, 6), InputError);
    CHECK_THROWS_AS(fit_rate(half, 1), InputError);
}

TEST_CASE("csv round trip")
{
    std::vector<LevelRecord> in(2);
    in[0].level = 0;
    in[0].dofs = 1;
    in[0].n_elements = 8;
    in[0].energy_sq = 1.0 / 3.0;
    in[0].estimator = 0.125;
    in[0].error = std::sqrt(2.0);
    in[0].n_marked = 3;
    in[1].level = 1;
    in[1].dofs = 5;
    in[1].energy_sq = 0.4;
    std::ostringstream out;
    write_csv(out, in);
    CHECK(out.str().rfind("level,dofs,n_elements,energy_sq,estimator,error,n_marked\n", 0) == 0);
    std::istringstream back(out.str());
    std::vector<LevelRecord> got = read_csv(back);
    REQUIRE(got.size() == 2);
    CHECK(got[0].energy_sq == in[0].energy_sq);
    CHECK(*got[0].error == *in[0].error);
    CHECK(got[0].n_marked == 3);
    CHECK_FALSE(got[1].estimator.has_value());
    CHECK_FALSE(got[1].error.has_value());
    std::istringstream bad("level,dofs\n");
    CHECK_THROWS_AS(read_csv(bad), InputError);
}

TEST_CASE("configuration validation")
{
    AfemConfig c;
    CHECK_NOTHROW(c.validate());
    auto invalid = [](auto change) {
        AfemConfig x;
        change(x);
        CHECK_THROWS_AS(x.validate(), InputError);
    };
    invalid([](AfemConfig &x) { x.s = 0.0; });
    invalid([](AfemConfig &x) { x.s = 1.0; });
    invalid([](AfemConfig &x) { x.theta = 0.0; });
    invalid([](AfemConfig &x) { x.theta = 1.01; });
    invalid([](AfemConfig &x) { x.max_dofs = x.dof_cap + 1; });
    invalid([](AfemConfig &x) { x.quad_order = 0; });
    invalid([](AfemConfig &x) { x.solver_tol = 0.0; });
    invalid([](AfemConfig &x) { x.reference_energy = -1.0; });
    invalid([](AfemConfig &x) { x.domain = DomainSpec::circle(2); });
}

TEST_CASE("small adaptive disc run")
{
    AfemConfig c;
    c.s = 0.5;
    c.max_dofs = 60;
    c.verify = true;
    int seen = 0;
    RunResult r = run(c, [&](const LevelRecord &) { ++seen; });
    REQUIRE(r.records.size() >= 3);
    CHECK(seen == static_cast<int>(r.records.size()));
    CHECK(r.records.back().dofs > c.max_dofs);
    CHECK_FALSE(r.records.back().estimator.has_value());
    for (std::size_t k = 0; k < r.records.size(); ++k) {
        const LevelRecord &rec = r.records[k];
        CHECK(rec.level == static_cast<int>(k));
        CHECK(rec.energy_sq > 0.0);
        CHECK(rec.error.has_value());
        if (k > 0) {
            CHECK(rec.dofs >= r.records[k - 1].dofs);
            CHECK(rec.energy_sq >= r.records[k - 1].energy_sq);
        }
        if (k + 1 < r.records.size()) {
            CHECK(rec.estimator.has_value());
            CHECK(rec.n_marked > 0);
            CHECK(r.trace[k].identity_deviation <= 1e-9);
            CHECK(r.trace[k].refinement.conforming);
            CHECK(r.trace[k].refinement.marked_have_four_sons);
        }
    }
    CHECK(r.records.back().error.value() < r.records.front().error.value());

    RunResult again = run(c);
    std::ostringstream a, b;
    write_csv(a, r.records);
    write_csv(b, again.records);
    CHECK(a.str() == b.str());
}

TEST_CASE("uniform run marks every element")
{
    AfemConfig c;
    c.strategy = Strategy::uniform;
    c.s = 0.25;
    c.max_dofs = 40;
    RunResult r = run(c);
    for (std::size_t k = 0; k + 1 < r.records.size(); ++k) {
        CHECK(r.records[k].n_marked == r.records[k].n_elements);
        CHECK(r.records[k + 1].n_elements == 4 * r.records[k].n_elements);
    }
}

TEST_CASE("max_dofs below the initial mesh gives one level")
{
    AfemConfig c;
    c.max_dofs = 0;
    RunResult r = run(c);
    REQUIRE(r.records.size() == 1);
    CHECK(r.records[0].dofs == 1);
    CHECK(r.records[0].n_elements == 8);
}

TEST_CASE("l-shape run with a constant source and mesh dumps")
{
    AfemConfig c;
    c.domain = DomainSpec::l_shape();
    c.rhs = RightHandSide::parse("constant:1");
    c.max_dofs = 30;
    auto dir = std::filesystem::temp_directory_path() / "fracadapt_dump_test";
    std::filesystem::remove_all(dir);
    c.mesh_dump_dir = dir.string();
    RunResult r = run(c);
    REQUIRE(r.records.size() >= 2);
    CHECK(r.records[0].dofs == 0);
    CHECK_FALSE(r.records[0].error.has_value());
    CHECK(std::filesystem::exists(dir / "mesh_000.txt"));
    CHECK(std::filesystem::exists(dir / "mesh_001.txt"));
    std::filesystem::remove_all(dir);
}
