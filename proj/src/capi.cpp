#include "fracadapt/fracadapt.h"

#include "fracadapt/afem.hpp"
#include "fracadapt/diagnostics.hpp"
#include "fracadapt/error.hpp"
#include "fracadapt/mesh.hpp"

#include <fstream>
#include <memory>
#include <new>
#include <span>
#include <string>

using namespace fracadapt;

struct fa_mesh
{
    Triangulation mesh;
};

struct fa_run
{
    RunResult result;
};

namespace {

thread_local std::string last_error;

fa_status fail(fa_status status, const std::string &message)
{
    last_error = message;
    return status;
}

template <class F>
fa_status guarded(F &&body)
{
    try {
        last_error.clear();
        return body();
    } catch (const InputError &e) {
        return fail(FA_INPUT_ERROR, e.what());
    } catch (const NumericalError &e) {
        return fail(FA_NUMERICAL_ERROR, e.what());
    } catch (const std::bad_alloc &) {
        return fail(FA_NUMERICAL_ERROR, "out of memory");
    } catch (const std::exception &e) {
        return fail(FA_INTERNAL_ERROR, e.what());
    } catch (...) {
        return fail(FA_INTERNAL_ERROR, "unknown error");
    }
}

fa_level_record to_c(const LevelRecord &r)
{
    fa_level_record c{};
    c.level = r.level;
    c.dofs = r.dofs;
    c.n_elements = r.n_elements;
    c.energy_sq = r.energy_sq;
    c.has_estimator = r.estimator.has_value();
    c.estimator = r.estimator.value_or(0.0);
    c.has_error = r.error.has_value();
    c.error = r.error.value_or(0.0);
    c.n_marked = r.n_marked;
    return c;
}

DomainSpec domain_of(fa_domain d, int segments)
{
    if (d == FA_DOMAIN_CIRCLE)
        return DomainSpec::circle(segments);
    if (d == FA_DOMAIN_LSHAPE)
        return DomainSpec::l_shape();
    throw InputError("unknown domain");
}

} // namespace

extern "C" {

const char *fa_last_error(void) { return last_error.c_str(); }

const char *fa_version(void) { return "1.0.0"; }

void fa_config_default(fa_config *config)
{
    if (!config)
        return;
    AfemConfig d;
    *config = fa_config{};
    config->domain = FA_DOMAIN_CIRCLE;
    config->circle_segments = d.domain.circle_segments;
    config->s = d.s;
    config->theta = d.theta;
    config->strategy = FA_ADAPTIVE;
    config->max_dofs = d.max_dofs;
    config->dof_cap = d.dof_cap;
    config->quad_order = d.quad_order;
    config->solver_tol = d.solver_tol;
    config->rhs_kind = FA_RHS_DISC_EXACT;
    config->rhs_value = 1.0;
    config->has_reference_energy = 0;
    config->reference_energy = 0.0;
    config->mesh_dump_dir = nullptr;
    config->verify = 0;
}

fa_status fa_parse_rhs(const char *text, fa_rhs_kind *kind, double *value)
{
    if (!text || !kind || !value)
        return fail(FA_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        RightHandSide r = RightHandSide::parse(text);
        *kind = r.kind == RightHandSide::Kind::constant ? FA_RHS_CONSTANT : FA_RHS_DISC_EXACT;
        *value = r.value;
        return FA_OK;
    });
}

fa_status fa_run_afem(const fa_config *config, fa_level_callback callback, void *user, fa_run **out)
{
    if (!config || !out)
        return fail(FA_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        AfemConfig c;
        c.domain = domain_of(config->domain, config->circle_segments);
        c.s = config->s;
        c.theta = config->theta;
        if (config->strategy != FA_ADAPTIVE && config->strategy != FA_UNIFORM)
            throw InputError("unknown strategy");
        c.strategy = config->strategy == FA_UNIFORM ? Strategy::uniform : Strategy::adaptive;
        c.max_dofs = config->max_dofs;
        c.dof_cap = config->dof_cap;
        c.quad_order = config->quad_order;
        c.solver_tol = config->solver_tol;
        c.rhs.kind = config->rhs_kind == FA_RHS_CONSTANT ? RightHandSide::Kind::constant
                                                         : RightHandSide::Kind::disc_exact;
        c.rhs.value = config->rhs_value;
        if (config->has_reference_energy)
            c.reference_energy = config->reference_energy;
        if (config->mesh_dump_dir)
            c.mesh_dump_dir = config->mesh_dump_dir;
        c.verify = config->verify != 0;
        LevelObserver obs;
        if (callback)
            obs = [&](const LevelRecord &r) {
                fa_level_record rec = to_c(r);
                callback(&rec, user);
            };
        auto run_handle = std::make_unique<fa_run>();
        run_handle->result = run(c, obs);
        *out = run_handle.release();
        return FA_OK;
    });
}

int fa_run_levels(const fa_run *run) { return run ? static_cast<int>(run->result.records.size()) : 0; }

fa_status fa_run_record(const fa_run *run, int index, fa_level_record *out)
{
    if (!run || !out)
        return fail(FA_INVALID_ARGUMENT, "null argument");
    if (index < 0 || index >= static_cast<int>(run->result.records.size()))
        return fail(FA_INVALID_ARGUMENT, "level index out of range");
    *out = to_c(run->result.records[index]);
    return FA_OK;
}

fa_status fa_run_write_csv(const fa_run *run, const char *path)
{
    if (!run || !path)
        return fail(FA_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        std::ofstream out(path, std::ios::binary);
        if (!out)
            return fail(FA_IO_ERROR, std::string("cannot open ") + path);
        write_csv(out, run->result.records);
        out.flush();
        if (!out)
            return fail(FA_IO_ERROR, std::string("write failed for ") + path);
        return FA_OK;
    });
}

fa_status fa_run_fit_rate(const fa_run *run, int window, double *slope)
{
    if (!run || !slope)
        return fail(FA_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        *slope = fit_rate(run->result.records, window);
        return FA_OK;
    });
}

fa_status fa_run_extrapolate(const fa_run *run, double *limit, double *uncertainty)
{
    if (!run || !limit || !uncertainty)
        return fail(FA_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        Extrapolation e = extrapolate_energy(std::span<const LevelRecord>(run->result.records));
        *limit = e.limit;
        *uncertainty = e.uncertainty;
        return FA_OK;
    });
}

void fa_run_free(fa_run *run) { delete run; }

fa_status fa_exact_energy_disc(double s, double *out)
{
    if (!out)
        return fail(FA_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        *out = exact_energy_disc(s);
        return FA_OK;
    });
}

fa_status fa_mesh_create(fa_domain domain, int circle_segments, fa_mesh **out)
{
    if (!out)
        return fail(FA_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        auto m = std::make_unique<fa_mesh>();
        m->mesh = build_initial_mesh(domain_of(domain, circle_segments));
        *out = m.release();
        return FA_OK;
    });
}

fa_status fa_mesh_refine_uniform(fa_mesh *mesh)
{
    if (!mesh)
        return fail(FA_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        mesh->mesh = uniform_refine(mesh->mesh).mesh;
        return FA_OK;
    });
}

fa_status fa_mesh_counts(const fa_mesh *mesh, int *vertices, int *elements, int *dofs)
{
    if (!mesh)
        return fail(FA_INVALID_ARGUMENT, "null argument");
    if (vertices)
        *vertices = mesh->mesh.num_vertices();
    if (elements)
        *elements = mesh->mesh.num_elements();
    if (dofs)
        *dofs = mesh->mesh.num_dofs();
    return FA_OK;
}

fa_status fa_mesh_write(const fa_mesh *mesh, const char *path)
{
    if (!mesh || !path)
        return fail(FA_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        std::ofstream out(path);
        if (!out)
            return fail(FA_IO_ERROR, std::string("cannot open ") + path);
        write_mesh(out, mesh->mesh);
        return FA_OK;
    });
}

void fa_mesh_free(fa_mesh *mesh) { delete mesh; }

fa_status fa_equivalence_report(const fa_mesh *mesh, double s, int samples, int quad_order, fa_equivalence *out)
{
    if (!mesh || !out)
        return fail(FA_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        EquivalenceReport r = equivalence_report(mesh->mesh, s, samples, quad_order);
        out->r_min = r.r_min;
        out->r_max = r.r_max;
        out->q_min = r.q_min;
        out->q_max = r.q_max;
        out->samples_used = r.samples_used;
        out->samples_skipped = r.samples_skipped;
        return FA_OK;
    });
}

} // extern "C"
