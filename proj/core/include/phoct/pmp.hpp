#pragma once

#include <utility>
#include <vector>

#include "phoct/sim.hpp"
#include "phoct/system.hpp"
#include "phoct/types.hpp"

namespace phoct {

// Adjoint samples of the first-order optimality system
//   λ̇ = -λ₀ Q B u + Q(J+R) λ
// integrated backward from λ(T), together with the switching functions
//   s_i(t) = b_iᵀ (λ₀ Q x(t) + λ(t)).
// The sign of s_i selects the bang value: s_i > 0 → u_i at the lower bound,
// s_i < 0 → u_i at the upper bound.
struct AdjointTrajectory {
    double lambda0 = 1.0;
    Matrix L;  // n×(N+1)
    Matrix S;  // m×(N+1)
};

// Backward ZOH-exact integration of the adjoint along a state trajectory.
AdjointTrajectory integrate_adjoint(const PHSystem& sys, const Trajectory& traj, double lambda0,
                                    const Vector& lambda_T);

// Relative switching-zero threshold for singular-arc detection.
inline constexpr double kSwitchTolScale = 1e-4;
// Minimum duration (time units) for an interval to count as a singular arc.
inline constexpr double kMinSingularArc = 0.5;

struct PmpReport {
    long checked = 0;
    long violations = 0;
    double violation_fraction = 0.0;
    double tol_sw = 0.0;
};

// Flags grid cells whose control contradicts the sign of the switching
// function (bang selection). Cells with |s| below the switching threshold are
// unconstrained.
PmpReport pmp_consistency(const PHSystem& sys, const Trajectory& traj,
                          const AdjointTrajectory& adj);

// Maximal index ranges [k_begin, k_end] (grid points, inclusive) on which
// |s_channel| stays below tol_sw for at least min_duration time units.
std::vector<std::pair<int, int>> find_singular_arcs(const AdjointTrajectory& adj, int channel,
                                                    double h, double tol_sw,
                                                    double min_duration = kMinSingularArc);

// Singular control reconstruction on arcs where the switching functions of
// the index set I vanish: with M = B_IᵀQRQB_I and A = (J-R)Q,
//   u_I = M⁻¹ B_Iᵀ [ ½(QA²x + (A²)ᵀλ) - QRQ B_A u_A ].
// Requires M positive definite (im(B) ∩ ker(RQ) = {0} on those columns).
Vector singular_control(const PHSystem& sys, const Vector& x, const Vector& lam,
                        const std::vector<int>& active_singular, const Vector& u_other);

// Per-input-channel normality: channel i is normal when the single-column
// Kalman matrix (b_i, Ab_i, ..., A^{n-1}b_i) has full rank.
std::vector<bool> is_normal(const PHSystem& sys);

// Steady pair minimizing the supplied power ûᵀŷ, with the certifying
// multiplier. Every minimizer satisfies R Q x̂ = 0 and has cost zero; the
// returned representative has ‖x̂‖ = 1 whenever a nonzero optimal steady
// state exists.
struct SteadyStateSolution {
    Vector x_hat;
    Vector u_hat;
    Vector lambda_hat;
    double cost = 0.0;
};

SteadyStateSolution solve_steady_state(const PHSystem& sys);

// Residuals of the steady-state KKT identities:
//   Bᵀ(Qx̂+λ̂) = 0,  J(Qx̂+λ̂) = 0,  Rλ̂ = 0,  RQx̂ = 0,
// steady dynamics ‖(J-R)Qx̂ + Bû‖, and the variational-inequality margin
//   min_{ũ∈box} (ũ-û)ᵀ Bᵀ(Qx̂+λ̂)  (≥ 0 at a KKT point).
struct SteadyKktReport {
    double r_input_stationarity = 0.0;
    double r_conserved = 0.0;
    double r_R_lambda = 0.0;
    double r_RQx = 0.0;
    double r_dynamics = 0.0;
    double vi_margin = 0.0;
    bool pass = false;
};

SteadyKktReport verify_steady_kkt(const PHSystem& sys, const SteadyStateSolution& sss,
                                  double tol = 1e-8);

}  // namespace phoct
