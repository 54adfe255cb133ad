#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "fermikin/config.hpp"
#include "fermikin/diagnostics.hpp"

namespace fermikin
{

struct RunSummary
{
    SolverState final_state;
    MomentSet initial;
    MomentSet final;
    double max_mass_drift = 0.0;    // relative
    double max_energy_drift = 0.0;  // relative
    double max_clamp_defect = 0.0;
    double max_ratio = 0.0;
    int max_iterations = 0;
    double l1_norm = 0.0;
};

//! Predicate for the |v|^3 monitor region: a ball of `radius` around the domain centre.
std::function<bool(Vec3 const&)> monitor_region(RunSetup const& setup, double radius);

/*!
 * Full simulation with file output in `directory`:
 *
 * - moments.csv: t, mass, px, py, pz, energy, v3_moment, clamp_defect,
 *   q_defect_mass, q_defect_energy (one row per step, plus t = 0)
 * - steps.csv: step, iterations, last_ratio, clamp_defect, max_ratio,
 *   min_before_clamp, max_before_clamp
 * - snapshots/step_NNNNNN.bin every snapshot_stride steps and at the end
 * - weak_residual.csv when the weak-residual diagnostic is enabled
 * - metadata.json: configuration, grids, kernel norm, velocity truncation
 *
 * Progress lines go to `log` when it is non-null.
 */
RunSummary run_simulation(RunConfig const& config, std::string const& directory, std::ostream* log = nullptr);

struct CheckResult
{
    std::string name;
    bool passed = false;
    std::string detail;
};

/*!
 * Invariant and property checks on the grids, kernel and initial data of a
 * configuration: reflection law, trajectory group property and speed
 * preservation, collision-velocity identities, projection, annihilation,
 * bound chain, maximum principle, contraction, conservation drift and the
 * Picard uniqueness proxy.
 */
std::vector<CheckResult> run_verify_suite(RunConfig const& config, std::ostream* log = nullptr);

}  // namespace fermikin
