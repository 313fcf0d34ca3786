#include "phoct/spectral.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>

#include "phoct/linalg.hpp"

namespace phoct {

namespace {

Matrix skew_part(const Matrix& M) { return 0.5 * (M - M.transpose()); }
Matrix sym_part(const Matrix& M) { return 0.5 * (M + M.transpose()); }

}  // namespace

SubspaceDecomposition decompose(const PHSystem& sys, double tol_imag) {
    const int n = sys.n();
    const SphericalForm sph = to_spherical(sys);
    // Work on the exactly-skew / exactly-symmetric parts; the parts discarded
    // here are below the validation tolerance.
    const Matrix Jt = skew_part(sph.sys.J);
    const Matrix Rt = sym_part(sph.sys.R);
    const Matrix At = Jt - Rt;

    Eigen::EigenSolver<Matrix> es(At);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("decompose: eigensolver failed");
    }
    const ComplexVector lambda = es.eigenvalues();
    const double rho = lambda.cwiseAbs().maxCoeff();
    const double thr = tol_imag * rho;

    // Conservative modes: real/imaginary parts of eigenvectors whose
    // eigenvalues sit on the imaginary axis (within thr). Conjugate pairs
    // contribute once.
    std::vector<Vector> candidates;
    for (int i = 0; i < n; ++i) {
        if (std::abs(lambda(i).real()) > thr) continue;
        if (lambda(i).imag() < -thr) continue;
        const ComplexVector v = es.eigenvectors().col(i);
        if (std::abs(lambda(i).imag()) <= thr) {
            candidates.push_back(v.real());
        } else {
            candidates.push_back(v.real());
            candidates.push_back(v.imag());
        }
    }
    const Matrix W1 = orthonormalize_mgs(candidates);
    const Matrix V1t = W1.cols() > 0 ? W1 : Matrix::Zero(n, 0);
    const Matrix V2t = orthonormal_complement(V1t);

    const Matrix inv_sqrt_q = symmetric_inv_sqrt_spd(sys.Q);
    const Matrix Bt = sph.sys.B;

    SubspaceDecomposition dec;
    dec.V1 = inv_sqrt_q * V1t;
    dec.V2 = inv_sqrt_q * V2t;
    dec.J1 = V1t.transpose() * Jt * V1t;
    dec.J2 = V2t.transpose() * Jt * V2t;
    dec.R2 = V2t.transpose() * Rt * V2t;
    dec.B1 = V1t.transpose() * Bt;
    dec.B2 = V2t.transpose() * Bt;
    dec.eigenvalues = lambda;
    dec.hurwitz_margin = dec.d2() > 0 ? -spectral_abscissa(dec.J2 - dec.R2)
                                      : std::numeric_limits<double>::infinity();

    // Construction-time invariant checks; failures surface with residuals.
    std::ostringstream bad;
    auto gram_resid = [&](const Matrix& A, const Matrix& B, bool expect_zero) {
        Matrix G = A.transpose() * sys.Q * B;
        if (!expect_zero && A.cols() == B.cols()) G -= Matrix::Identity(A.cols(), B.cols());
        return G.size() == 0 ? 0.0 : G.cwiseAbs().maxCoeff();
    };
    const double orth_tol = 1e-10;
    if (gram_resid(dec.V1, dec.V1, false) > orth_tol) {
        bad << " V1 Q-orthonormality residual " << gram_resid(dec.V1, dec.V1, false) << ";";
    }
    if (gram_resid(dec.V2, dec.V2, false) > orth_tol) {
        bad << " V2 Q-orthonormality residual " << gram_resid(dec.V2, dec.V2, false) << ";";
    }
    if (dec.d1() > 0 && dec.d2() > 0 && gram_resid(dec.V1, dec.V2, true) > orth_tol) {
        bad << " V1ᵀQV2 residual " << gram_resid(dec.V1, dec.V2, true) << ";";
    }
    const Matrix RQ = sys.R * sys.Q;
    if (dec.d1() > 0) {
        const double rq_resid = (RQ * dec.V1).norm();
        if (rq_resid > 1e-8 * std::max(1e-300, RQ.norm())) {
            bad << " M1 not inside ker(RQ), residual " << rq_resid << ";";
        }
    }
    auto skew_resid = [](const Matrix& M) {
        return M.size() == 0 ? 0.0 : (M + M.transpose()).cwiseAbs().maxCoeff();
    };
    if (skew_resid(dec.J1) > orth_tol * (1.0 + dec.J1.norm()) ||
        skew_resid(dec.J2) > orth_tol * (1.0 + dec.J2.norm())) {
        bad << " block skew-symmetry residual " << std::max(skew_resid(dec.J1), skew_resid(dec.J2))
            << ";";
    }
    if (dec.d2() > 0 && !(dec.hurwitz_margin > 0.0)) {
        bad << " dissipative block not Hurwitz (margin " << dec.hurwitz_margin << ");";
    }
    // Block reconstruction JQ·[V1 V2] = [V1 V2]·blkdiag(J1,J2), same for RQ.
    Matrix Vfull(n, n);
    if (dec.d1() > 0) Vfull.leftCols(dec.d1()) = dec.V1;
    if (dec.d2() > 0) Vfull.rightCols(dec.d2()) = dec.V2;
    Matrix Jblk = Matrix::Zero(n, n);
    Matrix Rblk = Matrix::Zero(n, n);
    if (dec.d1() > 0) Jblk.topLeftCorner(dec.d1(), dec.d1()) = dec.J1;
    if (dec.d2() > 0) {
        Jblk.bottomRightCorner(dec.d2(), dec.d2()) = dec.J2;
        Rblk.bottomRightCorner(dec.d2(), dec.d2()) = dec.R2;
    }
    const double rec_j = (sys.J * sys.Q * Vfull - Vfull * Jblk).norm();
    const double rec_r = (RQ * Vfull - Vfull * Rblk).norm();
    const double rec_tol = 1e-8 * (1.0 + (sys.J * sys.Q).norm() + RQ.norm());
    if (rec_j > rec_tol || rec_r > rec_tol) {
        bad << " block reconstruction residuals (J: " << rec_j << ", R: " << rec_r << ");";
    }

    if (!bad.str().empty()) {
        throw DecompositionError("decompose: invariant violation:" + bad.str());
    }
    return dec;
}

KernelGeometry kernel_geometry(const PHSystem& sys) {
    const int n = sys.n();
    const Matrix S = symmetric_sqrt_psd(sys.R);
    const Matrix G = S * sys.Q;
    const Matrix D = G.transpose() * G;  // QRQ, exactly PSD by construction

    Eigen::SelfAdjointEigenSolver<Matrix> es(D);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("kernel_geometry: eigensolver failed");
    }
    const Vector ev = es.eigenvalues();  // ascending
    const double lam_max = ev(n - 1);

    KernelGeometry geom;
    if (lam_max <= 1e-14 * (1.0 + sys.Q.norm() * sys.R.norm())) {
        geom.K = Matrix::Identity(n, n);
        geom.full_kernel = true;
        geom.c1 = geom.c2 = std::numeric_limits<double>::quiet_NaN();
        return geom;
    }
    const double thr = 1e-10 * lam_max;
    int k = 0;
    while (k < n && ev(k) <= thr) ++k;
    geom.K = es.eigenvectors().leftCols(k);
    geom.c1 = std::sqrt(ev(k));
    geom.c2 = std::sqrt(lam_max);
    return geom;
}

double dist_to_kernel(const KernelGeometry& geom, const Vector& x) {
    if (geom.kernel_dim() == 0) return x.norm();
    return (x - geom.K * (geom.K.transpose() * x)).norm();
}

DecayEnvelope decay_envelope(const Matrix& A2) {
    if (A2.rows() == 0 || A2.rows() != A2.cols()) {
        throw std::invalid_argument("decay_envelope: matrix must be square and nonempty");
    }
    if (spectral_abscissa(A2) >= 0.0) {
        throw std::invalid_argument("decay_envelope: matrix is not Hurwitz");
    }
    const Matrix P = solve_lyapunov(A2, Matrix::Identity(A2.rows(), A2.cols()));
    Eigen::SelfAdjointEigenSolver<Matrix> es(P);
    const double lam_min = es.eigenvalues().minCoeff();
    const double lam_max = es.eigenvalues().maxCoeff();
    if (lam_min <= 0.0) {
        throw std::invalid_argument("decay_envelope: Lyapunov solution not positive definite");
    }
    DecayEnvelope env;
    env.mu = 1.0 / (2.0 * lam_max);
    env.M = std::sqrt(lam_max / lam_min);
    return env;
}

double reachable_bound(const PHSystem& sys, const SubspaceDecomposition& dec, const Vector& x0) {
    if (dec.d2() == 0) {
        throw std::invalid_argument("reachable_bound: dissipative subspace is trivial");
    }
    const DecayEnvelope env = decay_envelope(dec.J2 - dec.R2);
    const Vector x2_0 = dec.V2.transpose() * (sys.Q * x0);
    const double box_radius = sys.u_lo.cwiseAbs().cwiseMax(sys.u_hi.cwiseAbs()).norm();
    return env.M * x2_0.norm() + (env.M / env.mu) * spectral_norm(dec.B2) * box_radius;
}

}  // namespace phoct
