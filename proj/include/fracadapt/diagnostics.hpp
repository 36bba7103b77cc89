#pragma once

#include "fracadapt/assembly.hpp"
#include "fracadapt/mesh.hpp"

#include <cstdint>
#include <string>
#include <iosfwd>
#include <vector>

namespace fracadapt {

/// Squared weight h~^{2s} on a coarse mesh: h^{2s} for s <= 1/2, h omega^{2s-1} above.
class WeightFunction
{
public:
    WeightFunction(const Triangulation &mesh, double s);

    double operator()(Point x, int element) const;
    double s() const { return s_; }
    std::uint64_t mesh_id() const { return mesh_id_; }

private:
    const Triangulation *mesh_;
    double s_;
    std::uint64_t mesh_id_;
};

/// ||h~^{sign s} g|| for g piecewise linear on the refinement, weights from the coarse mesh.
double weighted_l2_norm(const Triangulation &coarse, double s, const Refinement &fine,
                        const FemFunction &g, int sign);

/// I g: values of g at the coarse interior vertices.
FemFunction nodal_interpolation(const Triangulation &coarse, const Refinement &fine,
                                const FemFunction &g);

/// J g with dual functions on the lowest-id element adjacent to each coarse node.
FemFunction scott_zhang(const Triangulation &coarse, const Refinement &fine, const FemFunction &g);

/// Averaging element of every coarse vertex (lowest adjacent element id).
std::vector<int> averaging_elements(const Triangulation &mesh);

struct EquivalenceReport
{
    double r_min = 0.0;
    double r_max = 0.0;
    double q_min = 0.0;
    double q_max = 0.0;
    int samples_used = 0;
    int samples_skipped = 0;
};

/// Ratios r(v) = ||h~^{-s}(1-I)v|| / ||h~^{-s}(1-J)v|| over pseudo-random fine functions and
/// q(z) = |||phi_z||| / ||h~^{-s} phi_z||| over new fine hats, on the uniform refinement.
EquivalenceReport equivalence_report(const Triangulation &coarse, double s, int sample_count,
                                     int quad_order = 7);

/// Fixed-seed generator for the sample coefficients.
class SampleGenerator
{
public:
    explicit SampleGenerator(std::uint64_t seed = 12345) : state_(seed) {}
    /// Uniform in [-1, 1).
    double next();

private:
    std::uint64_t state_;
};

struct DiagnosticRow
{
    std::string quantity;
    double min = 0.0;
    double max = 0.0;
    int mesh_level = 0;
};

void write_diagnostics(std::ostream &out, const std::vector<DiagnosticRow> &rows);

} // namespace fracadapt
