#pragma once

#include "phoct/system.hpp"
#include "phoct/types.hpp"

namespace phoct {

// Exact zero-order-hold discretization of ẋ = Ax + Bu over one step h:
//   x⁺ = Ad x + Bd u,  Ad = e^{hA},  Bd = ∫₀ʰ e^{sA} ds · B.
struct DiscreteDynamics {
    Matrix Ad;
    Matrix Bd;
    double h = 0.0;
};

DiscreteDynamics discretize_zoh(const PHSystem& sys, double h);
// Same, for an arbitrary (A, B) pair; used for adjoint flows too.
DiscreteDynamics discretize_zoh_pair(const Matrix& A, const Matrix& B, double h);

// Sampled trajectory: states exact at grid points under ZOH controls.
//   t: (N+1) grid, X: n×(N+1), U: m×N (one column per interval), Y: m×(N+1).
struct Trajectory {
    double h = 0.0;
    Vector t;
    Matrix X;
    Matrix U;
    Matrix Y;

    int steps() const { return static_cast<int>(U.cols()); }
};

// Simulates the system under the given piecewise-constant control grid.
// Controls outside the input box (beyond a roundoff allowance) throw.
Trajectory simulate(const PHSystem& sys, const Vector& x0, const Matrix& U, double h);

// Largest one-step recursion defect max_k ‖X_{k+1} - Ad X_k - Bd U_k‖∞.
double dynamics_defect(const PHSystem& sys, const Trajectory& traj);

// Supplied energy ∫ uᵀy dt, trapezoidal in y on each control interval.
double cost_supplied_energy(const Trajectory& traj);

// Energy-balance form of the same cost:
//   H(x_N) - H(x_0) + ∫ ‖R^{1/2}Qx‖² dt  (trapezoidal dissipation integral).
double cost_via_balance(const PHSystem& sys, const Trajectory& traj);

// |H(x_N) - H(x_0) - ∫ (uᵀy - ‖R^{1/2}Qx‖²) dt| on the trajectory grid;
// O(h²) for trajectories that satisfy the dynamics.
double energy_balance_residual(const PHSystem& sys, const Trajectory& traj);

// Default grid density used by the CLI and sweeps: N = max(200, ceil(100·T)).
int default_grid(double T);

}  // namespace phoct
