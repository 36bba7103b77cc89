#include "fracadapt/afem.hpp"
#include "fracadapt/error.hpp"
#include "fracadapt/estimator.hpp"
#include "fracadapt/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

namespace fracadapt {

double RightHandSide::evaluate(double s) const
{
    if (kind == Kind::constant)
        return value;
    return std::pow(2.0, 2.0 * s) * std::pow(std::tgamma(1.0 + s), 2);
}

RightHandSide RightHandSide::parse(const std::string &text)
{
    RightHandSide rhs;
    if (text == "disc-exact")
        return rhs;
    const std::string prefix = "constant:";
    if (text.rfind(prefix, 0) == 0) {
        std::string num = text.substr(prefix.size());
        std::size_t used = 0;
        double c = 0.0;
        try {
            c = std::stod(num, &used);
        } catch (const std::exception &) {
            used = 0;
        }
        if (used == 0 || used != num.size() || !std::isfinite(c))
            throw InputError("invalid right-hand side constant '" + num + "'");
        rhs.kind = Kind::constant;
        rhs.value = c;
        return rhs;
    }
    throw InputError("unknown right-hand side '" + text + "' (expected disc-exact or constant:<c>)");
}

void AfemConfig::validate() const
{
    if (domain.kind == DomainKind::unit_circle && domain.circle_segments < 3)
        throw InputError("circle needs at least 3 boundary segments");
    if (!(s > 0.0 && s < 1.0))
        throw InputError("s must lie in (0,1)");
    if (!(theta > 0.0 && theta <= 1.0))
        throw InputError("theta must lie in (0,1]");
    if (max_dofs < 0)
        throw InputError("max_dofs must be nonnegative");
    if (max_dofs > dof_cap)
        throw InputError("max_dofs " + std::to_string(max_dofs) + " exceeds the cap " + std::to_string(dof_cap));
    if (quad_order < 1 || quad_order > 40)
        throw InputError("quad_order must lie in [1,40]");
    if (!(solver_tol > 0.0 && solver_tol < 1.0))
        throw InputError("solver_tol must lie in (0,1)");
    if (reference_energy && !(*reference_energy > 0.0))
        throw InputError("reference energy must be positive");
}

double exact_energy_disc(double s)
{
    if (!(s > 0.0 && s < 1.0))
        throw InputError("exact_energy_disc: s must lie in (0,1)");
    double f = std::pow(2.0, 2.0 * s) * std::pow(std::tgamma(1.0 + s), 2);
    return f * 2.0 * std::numbers::pi / (2.0 * s + 2.0);
}

double energy_error(double energy_sq, double reference_energy_sq)
{
    double r = reference_energy_sq - energy_sq;
    if (r < -1e-10)
        throw NumericalError("energy_error: discrete energy exceeds the reference energy", r);
    return r > 0.0 ? std::sqrt(r) : 0.0;
}

double energy_error(const LevelRecord &record, double reference_energy_sq)
{
    return energy_error(record.energy_sq, reference_energy_sq);
}

Extrapolation extrapolate_energy(std::span<const double> e)
{
    if (e.size() < 3)
        throw InputError("extrapolate_energy: need at least three levels");
    for (std::size_t k = 2; k < e.size(); ++k) {
        double d1 = e[k - 1] - e[k - 2], d2 = e[k] - e[k - 1];
        if (d1 * d2 < 0.0)
            throw NumericalError("extrapolate_energy: energies are not monotone", d2);
    }
    std::size_t n = e.size();
    double d1 = e[n - 2] - e[n - 3], d2 = e[n - 1] - e[n - 2];
    Extrapolation out;
    out.uncertainty = std::abs(d2);
    double denom = d2 - d1;
    if (d2 == 0.0 || denom == 0.0)
        out.limit = e[n - 1];
    else
        out.limit = e[n - 1] - d2 * d2 / denom;
    return out;
}

Extrapolation extrapolate_energy(std::span<const LevelRecord> records)
{
    std::vector<double> e;
    for (const auto &r : records)
        e.push_back(r.energy_sq);
    return extrapolate_energy(e);
}

double fit_rate(std::span<const LevelRecord> records, int window)
{
    if (window < 2)
        throw InputError("fit_rate: window must be at least 2");
    std::vector<std::pair<double, double>> pts;
    for (const auto &r : records)
        if (r.error && *r.error > 0.0 && r.dofs > 0)
            pts.emplace_back(std::log(static_cast<double>(r.dofs)), std::log(*r.error));
    if (static_cast<int>(pts.size()) < window)
        throw InputError("fit_rate: fewer than " + std::to_string(window) + " levels with positive error");
    pts.erase(pts.begin(), pts.end() - window);
    double mx = 0.0, my = 0.0;
    for (auto [x, y] : pts) {
        mx += x;
        my += y;
    }
    mx /= window;
    my /= window;
    double sxy = 0.0, sxx = 0.0;
    for (auto [x, y] : pts) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if (sxx == 0.0)
        throw InputError("fit_rate: all levels have the same dof count");
    return sxy / sxx;
}

namespace {

const char *csv_header = "level,dofs,n_elements,energy_sq,estimator,error,n_marked";

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::array<int, 3> element_key(const Element &e)
{
    std::array<int, 3> k = e;
    std::sort(k.begin(), k.end());
    return k;
}

// Level data kept for the stability check.
struct History
{
    int level = 0;
    Eigen::VectorXd u;
    std::map<std::array<int, 3>, double> tau_sq;
    // Prolongation to the next level.
    Prolongation to_next;
};

double symmetry_defect(const Eigen::MatrixXd &a)
{
    double amax = a.cwiseAbs().maxCoeff();
    double dmax = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = j + 1; i < a.rows(); ++i)
            dmax = std::max(dmax, std::abs(a(i, j) - a(j, i)));
    return amax > 0.0 ? dmax / amax : 0.0;
}

double energy_of_difference(const Eigen::MatrixXd &a, const Eigen::VectorXd &d)
{
    if (d.size() == 0)
        return 0.0;
    double v = d.dot(a.selfadjointView<Eigen::Lower>() * d);
    return std::sqrt(std::max(0.0, v));
}

RefinementCheck check_refinement(const Triangulation &coarse, const Refinement &fine,
                                 std::span<const int> marked)
{
    RefinementCheck c;
    c.conforming = is_conforming(fine.mesh);
    c.shape_regularity = shape_regularity(fine.mesh);
    c.min_size_ratio = std::numeric_limits<double>::infinity();
    c.max_size_ratio = 0.0;
    for (int f = 0; f < fine.mesh.num_elements(); ++f) {
        double r = mesh_size(coarse, fine.parent[f]) / mesh_size(fine.mesh, f);
        c.min_size_ratio = std::min(c.min_size_ratio, r);
        c.max_size_ratio = std::max(c.max_size_ratio, r);
    }
    auto sons = sons_of(coarse, fine);
    for (int t : marked)
        if (sons[t].size() != 4)
            c.marked_have_four_sons = false;
    return c;
}

} // namespace

RunResult run(const AfemConfig &config, const LevelObserver &observer)
{
    config.validate();
    const double s = config.s;
    const double f = config.rhs.evaluate(s);
    std::optional<double> reference = config.reference_energy;
    if (!reference && config.domain.kind == DomainKind::unit_circle) {
        // u = (c/f0)(1-|x|^2)^s for a constant source c.
        double f0 = RightHandSide{}.evaluate(s);
        reference = f * f / f0 * std::numbers::pi / (s + 1.0);
    }
    if (!config.mesh_dump_dir.empty())
        std::filesystem::create_directories(config.mesh_dump_dir);

    AssemblyOptions aopt;
    aopt.quad_order = config.quad_order;
    SolverOptions sopt;
    sopt.tol = config.solver_tol;
    auto load = [f](const Triangulation &m) { return assemble_load(m, f); };

    RunResult result;
    Triangulation mesh = build_initial_mesh(config.domain);
    result.initial_shape_regularity = shape_regularity(mesh);
    std::vector<History> history;

    for (int level = 0;; ++level) {
        LevelRecord rec;
        LevelTrace trace;
        rec.level = level;
        rec.dofs = mesh.num_dofs();
        rec.n_elements = mesh.num_elements();
        if (rec.dofs > config.dof_cap)
            throw InputError("mesh has " + std::to_string(rec.dofs) + " dofs, above the cap " +
                             std::to_string(config.dof_cap));

        FemFunction u;
        u.mesh_id = mesh.id();
        std::vector<std::pair<std::size_t, StabilityCheck>> pending;
        {
            EnergyMatrix a = assemble_stiffness(mesh, s, aopt);
            trace.symmetry_defect = a.size() > 0 ? symmetry_defect(a.values) : 0.0;
            Eigen::VectorXd b = load(mesh);
            SolveReport report;
            u = solve_spd(a, b, sopt, &report);
            trace.solver_residual = report.residual;
            rec.energy_sq = energy_norm_sq(a, u);
            if (reference)
                rec.error = energy_error(rec.energy_sq, *reference);

            // Differences to earlier levels, measured on this mesh.
            for (std::size_t k = 0; k < history.size(); ++k) {
                Eigen::VectorXd cur = history[k].u;
                for (std::size_t j = k; j < history.size(); ++j)
                    cur = history[j].to_next.apply(cur);
                double diff = energy_of_difference(a.values, cur - u.coefficients);
                if (history[k].level == level - 1)
                    result.trace.back().energy_difference = diff;
                StabilityCheck sc;
                sc.level = history[k].level;
                sc.other = level;
                sc.energy_difference = diff;
                pending.push_back({k, sc});
            }
        }

        if (!config.mesh_dump_dir.empty()) {
            char name[32];
            std::snprintf(name, sizeof name, "mesh_%03d.txt", level);
            std::ofstream out(std::filesystem::path(config.mesh_dump_dir) / name);
            if (!out)
                throw InputError("cannot write mesh dump in " + config.mesh_dump_dir);
            write_mesh(out, mesh);
        }

        const bool last = rec.dofs > config.max_dofs;
        std::map<std::array<int, 3>, double> tau_map;
        if (!last) {
            TwoLevelEstimate est = estimate_two_level(mesh, u, load, s, aopt);
            const IndicatorSet &ind = est.indicators;
            rec.estimator = std::sqrt(ind.total_sq);
            if (config.verify)
                trace.identity_deviation = projection_identity_deviation(est);
            for (int t = 0; t < mesh.num_elements(); ++t)
                tau_map[element_key(mesh.elements()[t])] = ind.element_tau_sq[t];
            for (auto &[k, sc] : pending) {
                double own = 0.0, other = 0.0;
                for (const auto &[key, v] : history[k].tau_sq) {
                    auto it = tau_map.find(key);
                    if (it != tau_map.end()) {
                        own += v;
                        other += it->second;
                    }
                }
                sc.estimator_gap = std::abs(std::sqrt(own) - std::sqrt(other));
                result.stability.push_back(sc);
            }

            MarkResult mark;
            if (config.strategy == Strategy::uniform) {
                mark.marked.resize(mesh.num_elements());
                for (int t = 0; t < mesh.num_elements(); ++t)
                    mark.marked[t] = t;
                mark.converged = ind.total_sq == 0.0;
            } else {
                mark = doerfler_mark(ind, config.theta);
            }
            if (mark.converged) {
                result.converged = true;
                result.records.push_back(rec);
                result.trace.push_back(trace);
                if (observer)
                    observer(rec);
                break;
            }
            rec.n_marked = static_cast<int>(mark.marked.size());
            Refinement next = refine(mesh, mark.marked);
            trace.refinement = check_refinement(mesh, next, mark.marked);

            // Efficiency and reliability need |||u_{l+1} - u_l|||, filled in at the next level.
            auto sons = sons_of(mesh, next);
            std::vector<int> refined;
            for (int t = 0; t < mesh.num_elements(); ++t)
                if (sons[t].size() > 1)
                    refined.push_back(t);
            trace.efficiency = subset_total(ind, mark.marked);
            trace.reliability = subset_total(ind, refined);

            History h;
            h.level = level;
            h.u = u.coefficients;
            h.tau_sq = std::move(tau_map);
            h.to_next = next.prolongation;
            history.push_back(std::move(h));
            if (history.size() > 3)
                history.erase(history.begin());

            result.records.push_back(rec);
            result.trace.push_back(trace);
            if (observer)
                observer(rec);
            mesh = std::move(next.mesh);
            continue;
        }
        result.records.push_back(rec);
        result.trace.push_back(trace);
        if (observer)
            observer(rec);
        break;
    }

    // Turn stored estimator pieces into ratios.
    for (std::size_t l = 0; l + 1 < result.trace.size(); ++l) {
        LevelTrace &t = result.trace[l];
        if (t.energy_difference < 0.0 || t.efficiency < 0.0)
            continue;
        double tau_marked = t.efficiency, tau_refined = t.reliability, diff = t.energy_difference;
        t.efficiency = diff > 0.0 ? tau_marked / diff : -1.0;
        t.reliability = tau_refined > 0.0 ? diff / tau_refined : -1.0;
    }
    return result;
}

void write_csv(std::ostream &out, std::span<const LevelRecord> records)
{
    out << csv_header << '\n';
    for (const auto &r : records) {
        out << r.level << ',' << r.dofs << ',' << r.n_elements << ',' << format_double(r.energy_sq) << ','
            << (r.estimator ? format_double(*r.estimator) : "") << ','
            << (r.error ? format_double(*r.error) : "") << ',' << r.n_marked << '\n';
    }
}

std::vector<LevelRecord> read_csv(std::istream &in)
{
    std::string line;
    if (!std::getline(in, line) || line != csv_header)
        throw InputError("read_csv: missing or unexpected header");
    std::vector<LevelRecord> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ','))
            fields.push_back(field);
        if (!line.empty() && line.back() == ',')
            fields.emplace_back();
        if (fields.size() != 7)
            throw InputError("read_csv: line " + std::to_string(lineno) + " has " +
                             std::to_string(fields.size()) + " fields");
        try {
            LevelRecord r;
            r.level = std::stoi(fields[0]);
            r.dofs = std::stoi(fields[1]);
            r.n_elements = std::stoi(fields[2]);
            r.energy_sq = std::stod(fields[3]);
            if (!fields[4].empty())
                r.estimator = std::stod(fields[4]);
            if (!fields[5].empty())
                r.error = std::stod(fields[5]);
            r.n_marked = std::stoi(fields[6]);
            out.push_back(r);
        } catch (const std::exception &) {
            throw InputError("read_csv: malformed number on line " + std::to_string(lineno));
        }
    }
    return out;
}

} // namespace fracadapt
