#pragma once

#include <vector>

#include "phoct/ocp.hpp"
#include "phoct/spectral.hpp"

namespace phoct {

// Default distance threshold for the occupation measure.
inline constexpr double kDefaultTurnpikeEps = 0.1;

// Time measure of the trajectory spent at distance ≥ eps from the
// dissipation kernel: h · #{cells whose midpoint state has dist ≥ eps}.
// A full kernel (R = 0) gives measure 0.
double turnpike_measure(const KernelGeometry& geom, const Trajectory& traj, double eps);

// Dissipation-inequality margin with storage H and penalty c₁²·dist²:
//   margin = ∫ (uᵀy - c₁²·dist(x, ker)²) dt - (H(x_N) - H(x_0)).
// The path integrals are evaluated exactly per ZOH interval (augmented-
// exponential Gramians), so converged optimal trajectories satisfy
// margin ≥ -1e-6·(1+|cost|) up to roundoff.
struct DissipationReport {
    double margin = 0.0;
    bool dynamics_consistent = true;   // recursion defect within tolerance
    bool kernel_degenerate = false;    // R = 0: inequality trivial, margin 0
};

DissipationReport dissipation_check(const PHSystem& sys, const KernelGeometry& geom,
                                    const Trajectory& traj);

// Available storage of the supply rate uᵀy - ‖R^{1/2}Qx‖²; equals the
// Hamiltonian for these systems.
double available_storage(const PHSystem& sys, const Vector& x);

struct TurnpikeEntry {
    double T = 0.0;
    double measure_outside = 0.0;
    double mid_horizon_max_dist = 0.0;
    double dissipation_margin = 0.0;
    SolveStatus status = SolveStatus::max_iter;
};

struct TurnpikeReport {
    std::vector<TurnpikeEntry> entries;  // sorted by T
    double epsilon = kDefaultTurnpikeEps;
    int kernel_dim = 0;
    bool kernel_degenerate = false;
    // Empirical boundedness surrogate: 1.2 × measure at the smallest horizon
    // exceeding twice the slowest oscillation period. NaN when no horizon
    // qualifies (check vacuous).
    double c_emp = 0.0;
    bool bounded_ok = true;
};

struct SweepResult {
    TurnpikeReport report;
    std::vector<OCPSolution> solutions;  // one per entry, same order
};

// Re-solves the template problem for each horizon (grid density preserved)
// and collects kernel-distance statistics and dissipation margins.
SweepResult horizon_sweep(const OCPProblem& base, const std::vector<double>& horizons, double eps,
                          const SolveOptions& opts = {});

}  // namespace phoct
