#pragma once

#include <stdexcept>
#include <string>

#include "phoct/system.hpp"
#include "phoct/types.hpp"

namespace phoct {

// Threshold (relative to the spectral radius) below which |Re λ| counts as
// zero when classifying conservative modes.
inline constexpr double kDefaultImagTol = 1e-9;

// Q-orthogonal splitting Rⁿ = M1 ⊕_Q M2 of the state space into the
// conservative subspace M1 (flow is a Q-isometry, no dissipation) and the
// dissipative subspace M2 (flow matrix Hurwitz). Columns of V1, V2 are
// Q-orthonormal bases; blocks express JQ, RQ and B in those bases:
//   ẋ1 = J1 x1 + B1 u,   ẋ2 = (J2 - R2) x2 + B2 u.
struct SubspaceDecomposition {
    Matrix V1;
    Matrix V2;
    Matrix J1;
    Matrix J2;
    Matrix R2;
    Matrix B1;
    Matrix B2;
    double hurwitz_margin = 0.0;  // -max Re σ(J2-R2); +inf when M2 = {0}
    ComplexVector eigenvalues;    // spectrum of (J-R)Q

    int d1() const { return static_cast<int>(V1.cols()); }
    int d2() const { return static_cast<int>(V2.cols()); }
};

struct DecompositionError : std::runtime_error {
    explicit DecompositionError(const std::string& what) : std::runtime_error(what) {}
};

SubspaceDecomposition decompose(const PHSystem& sys, double tol_imag = kDefaultImagTol);

// Geometry of the dissipation kernel ker(R^{1/2}Q) = ker(QRQ), with the
// sandwich constants of ‖R^{1/2}Qx‖ against the distance to the kernel:
//   c1·dist(x, ker) ≤ ‖R^{1/2}Qx‖ ≤ c2·dist(x, ker).
struct KernelGeometry {
    Matrix K;                    // orthonormal kernel basis, n×k
    double c1 = 0.0;             // sqrt of smallest positive eigenvalue of QRQ
    double c2 = 0.0;             // sqrt of largest eigenvalue of QRQ
    bool full_kernel = false;    // R = 0: kernel is all of Rⁿ, c1/c2 undefined

    int kernel_dim() const { return static_cast<int>(K.cols()); }
};

KernelGeometry kernel_geometry(const PHSystem& sys);

// Euclidean distance ‖x - KKᵀx‖ to the dissipation kernel.
double dist_to_kernel(const KernelGeometry& geom, const Vector& x);

// Certified exponential envelope ‖e^{tA2}‖ ≤ M e^{-μt} from the Lyapunov
// equation A2ᵀP + PA2 = -I:  μ = 1/(2λmax(P)), M = sqrt(λmax(P)/λmin(P)).
// Throws std::invalid_argument when A2 is not Hurwitz.
struct DecayEnvelope {
    double M = 1.0;
    double mu = 0.0;
};

DecayEnvelope decay_envelope(const Matrix& A2);

// Radius bounding the M2-component of every trajectory driven from x0 by
// box-constrained inputs:  M‖x2⁰‖ + (M/μ)‖B2‖·max_{v∈box}‖v‖.
double reachable_bound(const PHSystem& sys, const SubspaceDecomposition& dec, const Vector& x0);

}  // namespace phoct
