#pragma once

#include "phoct/types.hpp"

namespace phoct {

// Structure tolerances: residual thresholds scale as tol·(1 + ‖M‖∞).
inline constexpr double kDefaultStructTol = 1e-10;
// Smallest admissible eigenvalue of the energy matrix Q.
inline constexpr double kEnergyDefinitenessEps = 1e-12;

// Linear port-Hamiltonian system
//   ẋ = (J - R) Q x + B u,   y = Bᵀ Q x,   u(t) ∈ [u_lo, u_hi]
// with J skew-symmetric, R symmetric PSD, Q symmetric PD, B full column
// rank, and 0 in the interior of the input box. Values are immutable after
// construction; all operations on them are pure.
struct PHSystem {
    Matrix J;
    Matrix R;
    Matrix Q;
    Matrix B;
    Vector u_lo;
    Vector u_hi;

    int n() const { return static_cast<int>(J.rows()); }
    int m() const { return static_cast<int>(B.cols()); }

    // System matrix A = (J - R) Q.
    Matrix dynamics_matrix() const { return (J - R) * Q; }
};

struct ValidationReport {
    double skew_residual = 0.0;        // ‖J + Jᵀ‖∞
    double r_symmetry_residual = 0.0;  // ‖R - Rᵀ‖∞
    double r_psd_violation = 0.0;      // max(0, -λmin((R+Rᵀ)/2))
    double q_symmetry_residual = 0.0;  // ‖Q - Qᵀ‖∞
    double q_min_eigenvalue = 0.0;
    int b_rank = 0;
    double box_interior_margin = 0.0;  // min_i min(-u_lo_i, u_hi_i)
    bool pass = false;
};

// Checks the structural invariants of a pH system. Inconsistent dimensions
// throw std::invalid_argument; everything else is reported as residuals.
ValidationReport validate_system(const PHSystem& sys, double tol_struct = kDefaultStructTol);

// Stored energy H(x) = ½ xᵀQx.
double hamiltonian(const PHSystem& sys, const Vector& x);

// Collocated output y = BᵀQx.
Vector output(const PHSystem& sys, const Vector& x);

// System expressed in energy coordinates x̃ = Q^{1/2}x, where the energy
// matrix becomes the identity and Q-geometry becomes Euclidean.
struct SphericalForm {
    PHSystem sys;
    Matrix sqrt_q;  // the transform Q^{1/2}
};

SphericalForm to_spherical(const PHSystem& sys);

}  // namespace phoct
