#include "phoct/pmp.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "phoct/linalg.hpp"
#include "phoct/spectral.hpp"

namespace phoct {

AdjointTrajectory integrate_adjoint(const PHSystem& sys, const Trajectory& traj, double lambda0,
                                    const Vector& lambda_T) {
    const int n = sys.n();
    const int N = traj.steps();
    if (lambda_T.size() != n) {
        throw std::invalid_argument("integrate_adjoint: terminal multiplier dimension mismatch");
    }
    AdjointTrajectory adj;
    adj.lambda0 = lambda0;
    adj.L.resize(n, N + 1);
    adj.L.col(N) = lambda_T;
    if (N > 0) {
        // λ̇ = Fλ - λ₀QBu with F = Q(J+R); stepping backward in time is the
        // ZOH flow of (-F, QB) applied to the interval control.
        const Matrix F = sys.Q * (sys.J + sys.R);
        const DiscreteDynamics back = discretize_zoh_pair(-F, sys.Q * sys.B, traj.h);
        for (int k = N - 1; k >= 0; --k) {
            adj.L.col(k) = back.Ad * adj.L.col(k + 1) + lambda0 * (back.Bd * traj.U.col(k));
        }
    }
    adj.S = sys.B.transpose() * (lambda0 * (sys.Q * traj.X) + adj.L);
    return adj;
}

PmpReport pmp_consistency(const PHSystem& sys, const Trajectory& traj,
                          const AdjointTrajectory& adj) {
    const int N = traj.steps();
    const int m = sys.m();
    if (adj.S.cols() != N + 1) {
        throw std::invalid_argument("pmp_consistency: grid mismatch between trajectory and adjoint");
    }
    PmpReport rep;
    rep.tol_sw = kSwitchTolScale * adj.S.cwiseAbs().maxCoeff();
    for (int k = 0; k < N; ++k) {
        for (int i = 0; i < m; ++i) {
            const double s_mid = 0.5 * (adj.S(i, k) + adj.S(i, k + 1));
            const double u = traj.U(i, k);
            const double tol_u = 1e-6 * (sys.u_hi(i) - sys.u_lo(i));
            ++rep.checked;
            if (s_mid > rep.tol_sw && std::abs(u - sys.u_lo(i)) > tol_u) ++rep.violations;
            if (s_mid < -rep.tol_sw && std::abs(u - sys.u_hi(i)) > tol_u) ++rep.violations;
        }
    }
    rep.violation_fraction = rep.checked > 0 ? static_cast<double>(rep.violations) / rep.checked : 0.0;
    return rep;
}

std::vector<std::pair<int, int>> find_singular_arcs(const AdjointTrajectory& adj, int channel,
                                                    double h, double tol_sw, double min_duration) {
    std::vector<std::pair<int, int>> arcs;
    const int cols = static_cast<int>(adj.S.cols());
    int start = -1;
    for (int k = 0; k <= cols; ++k) {
        const bool small = k < cols && std::abs(adj.S(channel, k)) < tol_sw;
        if (small && start < 0) start = k;
        if (!small && start >= 0) {
            const int end = k - 1;
            if ((end - start) * h >= min_duration) arcs.emplace_back(start, end);
            start = -1;
        }
    }
    return arcs;
}

Vector singular_control(const PHSystem& sys, const Vector& x, const Vector& lam,
                        const std::vector<int>& active_singular, const Vector& u_other) {
    const int n = sys.n();
    const int m = sys.m();
    if (x.size() != n || lam.size() != n) {
        throw std::invalid_argument("singular_control: state/adjoint dimension mismatch");
    }
    if (static_cast<int>(active_singular.size()) + u_other.size() != m) {
        throw std::invalid_argument("singular_control: index set and complement controls must cover all channels");
    }
    std::vector<bool> in_set(m, false);
    for (int i : active_singular) {
        if (i < 0 || i >= m) throw std::invalid_argument("singular_control: channel index out of range");
        in_set[i] = true;
    }
    const int mi = static_cast<int>(active_singular.size());
    Matrix B_I(n, mi);
    Matrix B_A(n, m - mi);
    int ai = 0;
    for (int i = 0, si = 0; i < m; ++i) {
        if (in_set[i]) {
            B_I.col(si++) = sys.B.col(i);
        } else {
            B_A.col(ai++) = sys.B.col(i);
        }
    }

    const Matrix A = sys.dynamics_matrix();
    const Matrix A2 = A * A;
    const Matrix QRQ = sys.Q * sys.R * sys.Q;
    const Matrix M = B_I.transpose() * QRQ * B_I;

    Eigen::SelfAdjointEigenSolver<Matrix> es(M);
    const double lam_min = es.eigenvalues().minCoeff();
    const double lam_max = es.eigenvalues().maxCoeff();
    if (lam_min <= 1e-12 * std::max(1.0, lam_max)) {
        throw std::invalid_argument(
            "singular_control: B_IᵀQRQB_I is singular (im(B) meets ker(RQ))");
    }

    Vector rhs = 0.5 * (sys.Q * (A2 * x) + A2.transpose() * lam);
    if (B_A.cols() > 0) rhs -= QRQ * (B_A * u_other);
    return M.ldlt().solve(B_I.transpose() * rhs);
}

std::vector<bool> is_normal(const PHSystem& sys) {
    const int n = sys.n();
    const Matrix A = sys.dynamics_matrix();
    std::vector<bool> flags(sys.m());
    for (int i = 0; i < sys.m(); ++i) {
        Matrix K(n, n);
        Vector v = sys.B.col(i);
        for (int k = 0; k < n; ++k) {
            K.col(k) = v;
            v = A * v;
        }
        flags[i] = numeric_rank(K, 1e-10) == n;
    }
    return flags;
}

SteadyStateSolution solve_steady_state(const PHSystem& sys) {
    const int n = sys.n();
    const int m = sys.m();
    SteadyStateSolution sol;
    sol.x_hat = Vector::Zero(n);
    sol.u_hat = Vector::Zero(m);
    sol.lambda_hat = Vector::Zero(n);
    sol.cost = 0.0;

    // Optimal steady pairs are exactly {RQ x̂ = 0, JQ x̂ + B û = 0}: on the
    // steady manifold the cost equals ‖R^{1/2}Qx̂‖², so the optimal value is 0
    // and the origin always attains it. Look for a nonzero representative.
    const KernelGeometry geom = kernel_geometry(sys);
    if (geom.kernel_dim() == 0) return sol;

    Matrix pencil(n, geom.kernel_dim() + m);
    pencil.leftCols(geom.kernel_dim()) = sys.J * sys.Q * geom.K;
    pencil.rightCols(m) = sys.B;
    const Matrix null_basis = nullspace(pencil, 1e-12);
    if (null_basis.cols() == 0) return sol;

    // Prefer the direction with the largest state component.
    int best = 0;
    double best_z = -1.0;
    for (int j = 0; j < null_basis.cols(); ++j) {
        const double zn = null_basis.col(j).head(geom.kernel_dim()).norm();
        if (zn > best_z) {
            best_z = zn;
            best = j;
        }
    }
    if (best_z <= 1e-12) return sol;

    Vector w = null_basis.col(best) / best_z;  // ‖x̂‖ = 1 before box scaling
    Vector u = w.tail(m);
    double scale = 1.0;
    for (int i = 0; i < m; ++i) {
        if (u(i) > sys.u_hi(i)) scale = std::min(scale, sys.u_hi(i) / u(i));
        if (u(i) < sys.u_lo(i)) scale = std::min(scale, sys.u_lo(i) / u(i));
    }
    w *= scale;

    sol.x_hat = geom.K * w.head(geom.kernel_dim());
    sol.u_hat = w.tail(m);
    sol.lambda_hat = -(sys.Q * sol.x_hat);
    sol.cost = sol.u_hat.dot(sys.B.transpose() * (sys.Q * sol.x_hat));
    return sol;
}

SteadyKktReport verify_steady_kkt(const PHSystem& sys, const SteadyStateSolution& sss, double tol) {
    SteadyKktReport rep;
    const Vector z = sys.Q * sss.x_hat + sss.lambda_hat;
    const Vector c = sys.B.transpose() * z;
    rep.r_input_stationarity = c.norm();
    rep.r_conserved = (sys.J * z).norm();
    rep.r_R_lambda = (sys.R * sss.lambda_hat).norm();
    rep.r_RQx = (sys.R * (sys.Q * sss.x_hat)).norm();
    rep.r_dynamics = (sys.dynamics_matrix() * sss.x_hat + sys.B * sss.u_hat).norm();

    // min over the box of (ũ-û)ᵀc, separable per channel.
    double vi = 0.0;
    for (int i = 0; i < sys.m(); ++i) {
        vi += std::min(sys.u_lo(i) * c(i), sys.u_hi(i) * c(i)) - sss.u_hat(i) * c(i);
    }
    rep.vi_margin = vi;
    rep.pass = rep.r_input_stationarity <= tol && rep.r_conserved <= tol &&
               rep.r_R_lambda <= tol && rep.r_RQx <= tol && rep.r_dynamics <= tol &&
               rep.vi_margin >= -tol;
    return rep;
}

}  // namespace phoct
