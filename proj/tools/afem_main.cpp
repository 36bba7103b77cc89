// Command-line driver: adaptive runs and norm-equivalence diagnostics.
#include "fracadapt/fracadapt.h"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <string>

namespace {

int exit_code(fa_status st)
{
    switch (st) {
    case FA_OK:
        return 0;
    case FA_NUMERICAL_ERROR:
    case FA_INTERNAL_ERROR:
        return 3;
    default:
        return 2;
    }
}

int report(fa_status st)
{
    if (st != FA_OK)
        std::fprintf(stderr, "afem: %s\n", fa_last_error());
    return exit_code(st);
}

void print_level(const fa_level_record *r, void *)
{
    std::fprintf(stderr, "level %3d  dofs %6d  elements %6d  energy %.10g", r->level, r->dofs, r->n_elements,
                 r->energy_sq);
    if (r->has_estimator)
        std::fprintf(stderr, "  est %.4e", r->estimator);
    if (r->has_error)
        std::fprintf(stderr, "  err %.4e", r->error);
    std::fprintf(stderr, "\n");
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Adaptive FEM for the integral fractional Laplacian"};
    app.require_subcommand(1);

    fa_config cfg;
    fa_config_default(&cfg);
    std::string domain = "circle", strategy = "adaptive", rhs = "disc-exact", out, dump_dir;
    double reference = 0.0;
    bool quiet = false;

    auto *run = app.add_subcommand("run", "Run the adaptive loop and write a CSV of levels");
    run->add_option("--domain", domain, "circle or lshape")->check(CLI::IsMember({"circle", "lshape"}));
    run->add_option("--segments", cfg.circle_segments, "Boundary segments of the initial circle mesh");
    run->add_option("--s", cfg.s, "Fractional order in (0,1)")->required();
    run->add_option("--theta", cfg.theta, "Marking parameter in (0,1]");
    run->add_option("--strategy", strategy, "adaptive or uniform")->check(CLI::IsMember({"adaptive", "uniform"}));
    run->add_option("--max-dofs", cfg.max_dofs, "Stop once the mesh has more dofs");
    run->add_option("--dof-cap", cfg.dof_cap, "Hard limit on dofs");
    run->add_option("--quad-order", cfg.quad_order, "Quadrature order");
    run->add_option("--solver-tol", cfg.solver_tol, "Relative residual tolerance");
    run->add_option("--rhs", rhs, "disc-exact or constant:<c>");
    auto *ref_opt = run->add_option("--reference-energy", reference, "Reference value of the energy");
    run->add_option("--out", out, "CSV output path")->required();
    run->add_option("--dump-mesh", dump_dir, "Directory for per-level mesh files");
    run->add_flag("--verify", cfg.verify, "Solve each fine system and check the estimator identity");
    run->add_flag("--quiet", quiet, "No progress output");

    std::string diag_domain = "lshape", diag_out;
    double diag_s = 0.5;
    int samples = 20, levels = 3, diag_order = 7;
    auto *diag = app.add_subcommand("diag", "Norm-equivalence ratios on uniformly refined meshes");
    diag->add_option("--domain", diag_domain, "circle or lshape")->check(CLI::IsMember({"circle", "lshape"}));
    diag->add_option("--s", diag_s, "Fractional order in (0,1)")->required();
    diag->add_option("--samples", samples, "Random samples per mesh");
    diag->add_option("--levels", levels, "Number of mesh levels starting at the initial mesh");
    diag->add_option("--quad-order", diag_order, "Quadrature order");
    diag->add_option("--out", diag_out, "CSV output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (*run) {
        cfg.domain = domain == "lshape" ? FA_DOMAIN_LSHAPE : FA_DOMAIN_CIRCLE;
        cfg.strategy = strategy == "uniform" ? FA_UNIFORM : FA_ADAPTIVE;
        if (fa_status st = fa_parse_rhs(rhs.c_str(), &cfg.rhs_kind, &cfg.rhs_value); st != FA_OK)
            return report(st);
        if (ref_opt->count() > 0) {
            cfg.has_reference_energy = 1;
            cfg.reference_energy = reference;
        }
        cfg.mesh_dump_dir = dump_dir.empty() ? nullptr : dump_dir.c_str();
        fa_run *result = nullptr;
        fa_status st = fa_run_afem(&cfg, quiet ? nullptr : print_level, nullptr, &result);
        if (st != FA_OK)
            return report(st);
        st = fa_run_write_csv(result, out.c_str());
        fa_run_free(result);
        return report(st);
    }

    if (levels < 1) {
        std::fprintf(stderr, "afem: --levels must be positive\n");
        return 2;
    }
    fa_mesh *mesh = nullptr;
    fa_status st = fa_mesh_create(diag_domain == "lshape" ? FA_DOMAIN_LSHAPE : FA_DOMAIN_CIRCLE, 8, &mesh);
    if (st != FA_OK)
        return report(st);
    std::ofstream csv(diag_out);
    if (!csv) {
        fa_mesh_free(mesh);
        std::fprintf(stderr, "afem: cannot open %s\n", diag_out.c_str());
        return 2;
    }
    csv << "quantity,min,max,mesh_level\n";
    for (int level = 0; level < levels && st == FA_OK; ++level) {
        if (level > 0)
            st = fa_mesh_refine_uniform(mesh);
        fa_equivalence eq{};
        if (st == FA_OK)
            st = fa_equivalence_report(mesh, diag_s, samples, diag_order, &eq);
        if (st != FA_OK)
            break;
        char line[256];
        std::snprintf(line, sizeof line, "r,%.17g,%.17g,%d\nq,%.17g,%.17g,%d\n", eq.r_min, eq.r_max, level, eq.q_min,
                      eq.q_max, level);
        csv << line;
        if (!quiet)
            std::fprintf(stderr, "level %d  r in [%.4g, %.4g]  q in [%.4g, %.4g]\n", level, eq.r_min, eq.r_max,
                         eq.q_min, eq.q_max);
    }
    fa_mesh_free(mesh);
    return report(st);
}
