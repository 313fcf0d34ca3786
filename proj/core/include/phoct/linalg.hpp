#pragma once

#include <vector>

#include "phoct/types.hpp"

namespace phoct {

// Symmetric PSD square root via eigendecomposition; eigenvalues below zero
// are clamped so the result is a genuine PSD root even for inputs that are
// PSD only up to roundoff.
Matrix symmetric_sqrt_psd(const Matrix& S);

// Inverse symmetric square root of an SPD matrix. Throws std::invalid_argument
// if the smallest eigenvalue is not strictly positive.
Matrix symmetric_inv_sqrt_spd(const Matrix& S);

// Dense matrix exponential e^M.
Matrix expm(const Matrix& M);

// Solves the continuous Lyapunov equation AᵀP + PA = -W for symmetric W,
// by Kronecker vectorization (dense, intended for small dimensions).
// Throws std::runtime_error if the equation is singular.
Matrix solve_lyapunov(const Matrix& A, const Matrix& W);

// Exact quadratic-form integral over one exponential flow interval:
//   W(h) = ∫₀ʰ e^{Aᵀs} M e^{As} ds
// computed from the upper blocks of exp(h·[[-Aᵀ, M],[0, A]]).
Matrix gramian_quadratic(const Matrix& A, const Matrix& M, double h);

// Numeric rank with a relative singular-value threshold.
int numeric_rank(const Matrix& M, double rel_tol = 1e-10);
int numeric_rank(const ComplexMatrix& M, double rel_tol = 1e-10);

// Orthonormal basis of the null space (columns), relative threshold on
// singular values. Returns an n×0 matrix when M has full column rank.
Matrix nullspace(const Matrix& M, double rel_tol = 1e-10);

// Orthonormal complement of a matrix with orthonormal columns; the returned
// columns complete V to an orthonormal basis of Rⁿ.
Matrix orthonormal_complement(const Matrix& V);

// Modified Gram-Schmidt with re-orthogonalization; vectors whose residual
// after projection falls below drop_tol are discarded.
Matrix orthonormalize_mgs(const std::vector<Vector>& vectors, double drop_tol = 1e-8);

// Largest singular value.
double spectral_norm(const Matrix& M);

// max Re λ(M) and max |λ(M)|.
double spectral_abscissa(const Matrix& M);
double spectral_radius(const Matrix& M);

}  // namespace phoct
