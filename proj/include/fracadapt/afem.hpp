#pragma once

#include "fracadapt/assembly.hpp"
#include "fracadapt/mesh.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fracadapt {

enum class Strategy { adaptive, uniform };

struct RightHandSide
{
    enum class Kind { disc_exact, constant } kind = Kind::disc_exact;
    double value = 1.0;

    /// Value of the constant source for the given s.
    double evaluate(double s) const;
    /// Parses "disc-exact" or "constant:<c>".
    static RightHandSide parse(const std::string &text);
};

struct AfemConfig
{
    DomainSpec domain = DomainSpec::circle();
    double s = 0.5;
    double theta = 0.3;
    Strategy strategy = Strategy::adaptive;
    int max_dofs = 1000;
    int dof_cap = 6000;
    int quad_order = 7;
    double solver_tol = 1e-10;
    RightHandSide rhs;
    /// Exact or extrapolated |||u|||^2; the disc with its exact source uses the closed form.
    std::optional<double> reference_energy;
    std::string mesh_dump_dir;
    /// Solve each fine system to check the estimator identity and record the efficiency and reliability ratios.
    bool verify = false;

    /// Throws InputError for out-of-range values.
    void validate() const;
};

struct LevelRecord
{
    int level = 0;
    int dofs = 0;
    int n_elements = 0;
    double energy_sq = 0.0;
    std::optional<double> estimator;
    std::optional<double> error;
    int n_marked = 0;
};

struct RefinementCheck
{
    bool conforming = true;
    double min_size_ratio = 1.0;
    double max_size_ratio = 1.0;
    double shape_regularity = 0.0;
    bool marked_have_four_sons = true;
};

struct StabilityCheck
{
    int level = 0;
    int other = 0;
    double estimator_gap = 0.0;
    double energy_difference = 0.0;
};

/// Per-level quantities beyond the CSV record.
struct LevelTrace
{
    double identity_deviation = -1.0;
    /// tau_l(M_l) / |||u_{l+1} - u_l|||
    double efficiency = -1.0;
    /// |||u_{l+1} - u_l||| / tau_l(T_l \ T_{l+1})
    double reliability = -1.0;
    double energy_difference = -1.0;
    double solver_residual = 0.0;
    double symmetry_defect = 0.0;
    RefinementCheck refinement;
};

struct RunResult
{
    std::vector<LevelRecord> records;
    std::vector<LevelTrace> trace;
    std::vector<StabilityCheck> stability;
    double initial_shape_regularity = 0.0;
    bool converged = false;
};

using LevelObserver = std::function<void(const LevelRecord &)>;

RunResult run(const AfemConfig &config, const LevelObserver &observer = {});

/// 2^{2s} Gamma(1+s)^2 2 pi / (2s+2)
double exact_energy_disc(double s);

/// sqrt(reference - energy), clamping radicands in [-1e-10, 0) to zero.
double energy_error(double energy_sq, double reference_energy_sq);
double energy_error(const LevelRecord &record, double reference_energy_sq);

struct Extrapolation
{
    double limit = 0.0;
    double uncertainty = 0.0;
};

/// Aitken delta-squared limit of the last three energies.
Extrapolation extrapolate_energy(std::span<const LevelRecord> records);
Extrapolation extrapolate_energy(std::span<const double> energies);

/// Least-squares slope of log(error) against log(dofs) over the last window levels.
double fit_rate(std::span<const LevelRecord> records, int window);

void write_csv(std::ostream &out, std::span<const LevelRecord> records);
std::vector<LevelRecord> read_csv(std::istream &in);

} // namespace fracadapt
