#pragma once

#include <variant>

#include "phoct/sim.hpp"
#include "phoct/system.hpp"
#include "phoct/types.hpp"

namespace phoct {

// Terminal specification: either a hard endpoint x(T) = x_T or a Mayer term
// φ(x) = ½(x - x_ref)ᵀ W (x - x_ref) (W = 0 gives a free endpoint).
struct TargetState {
    Vector x_T;
};
struct TerminalCost {
    Vector x_ref;
    Matrix W;
};
using Terminal = std::variant<TargetState, TerminalCost>;

// Minimal-energy-supply transfer problem on a ZOH grid:
//   min ∫ uᵀy dt (+ eps_reg·∫‖u‖² dt) (+ φ(x(T)))  s.t. dynamics, u in box.
struct OCPProblem {
    PHSystem sys;
    Vector x0;
    Terminal terminal;
    double T = 0.0;
    int N = 0;
    double eps_reg = 0.0;
};

enum class SolveStatus { converged, max_iter, infeasible, not_reached };

const char* to_string(SolveStatus s);

struct SolveOptions {
    double tol_eq = 1e-6;    // terminal residual tolerance, scaled by (1 + ‖x_T‖)
    double tol_stat = 1e-6;  // projected-gradient stationarity, sup norm
    long max_inner = 50000;  // accelerated projected-gradient iterations per outer pass
    int max_outer = 30;      // multiplier updates
    double penalty_init = 1.0;
    double penalty_growth = 10.0;
    double penalty_cap = 1e8;
    Matrix warm_start;  // m×N initial control guess; empty → zeros
};

struct OCPSolution {
    Trajectory traj;
    double cost_primal = 0.0;  // balance form: H(x_N) - H(x_0) + ∫‖R^{1/2}Qx‖²
    double cost_supply = 0.0;  // ∫ uᵀy
    double objective = 0.0;    // solver objective (includes regularization / Mayer term)
    double terminal_residual = 0.0;
    Vector multiplier_terminal;
    long iterations = 0;
    int outer_iterations = 0;
    double stationarity = 0.0;
    SolveStatus status = SolveStatus::max_iter;
};

// Dense state-eliminated quadratic program over the stacked control vector
// u ∈ R^{mN}:  ½uᵀHu + gᵀu + constant, box bounds, and (hard-endpoint case)
// the terminal map E u = r. Intended for small grids; the solver itself works
// matrix-free.
struct TranscribedQP {
    Matrix H;
    Vector g;
    double constant = 0.0;
    Vector lo;
    Vector hi;
    Matrix E;
    Vector r;
    bool has_terminal_equality = false;
};

TranscribedQP transcribe(const OCPProblem& prob);

// Solves the OCP by an augmented Lagrangian on the terminal equality (hard
// endpoint) around an accelerated projected-gradient inner loop on the box.
OCPSolution solve_ocp(const OCPProblem& prob, const SolveOptions& opts = {});

// Control-regularized variant (eps_reg > 0, terminal-cost mode required):
// strictly convex, unique minimizer.
OCPSolution solve_regularized(const OCPProblem& prob, const SolveOptions& opts = {});

struct TimeOptimalOptions {
    double T_cap = 512.0;
    double coarse_T0 = 0.25;      // coarse scan visits T0·2^k
    int bisection_steps = 12;
    double grid_density = 400.0;  // intervals per unit time
    int min_grid = 1000;
    double tol_eq = 1e-6;  // endpoint tolerance, scaled by (1 + ‖x_T‖)
    long max_inner = 50000;
};

// Free-time transfer for lossless systems: scans a geometric horizon grid,
// solving a box-constrained endpoint-feasibility problem per horizon, then
// tightens the first feasible bracket by bisection. Reported as a bracket
// since reachability is not monotone in the horizon.
struct TimeOptimalResult {
    double T_min = 0.0;
    double T_infeasible_below = 0.0;  // largest probed horizon that failed
    double residual = 0.0;            // endpoint residual at T_min
    Trajectory traj;
    SolveStatus status = SolveStatus::not_reached;
    long iterations = 0;
};

TimeOptimalResult solve_time_optimal(const PHSystem& sys, const Vector& x0, const Vector& x_T,
                                     const TimeOptimalOptions& opts = {});

// Best box-constrained approach to a fixed endpoint on a fixed grid:
// min ½‖x_N(u) - x_T‖². Building block of the time-optimal scan; exposed for
// constructing feasible reference controls.
struct ReachResult {
    Matrix U;
    double residual = 0.0;
    long iterations = 0;
};

ReachResult solve_reach(const PHSystem& sys, const Vector& x0, const Vector& x_T, double T, int N,
                        long max_inner = 50000);

}  // namespace phoct
