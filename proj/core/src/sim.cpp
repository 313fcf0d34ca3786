#include "phoct/sim.hpp"

#include <cmath>
#include <stdexcept>

#include "phoct/linalg.hpp"

namespace phoct {

DiscreteDynamics discretize_zoh_pair(const Matrix& A, const Matrix& B, double h) {
    if (h <= 0.0) {
        throw std::invalid_argument("discretize_zoh: step size must be positive");
    }
    const auto n = A.rows();
    const auto m = B.cols();
    Matrix aug = Matrix::Zero(n + m, n + m);
    aug.topLeftCorner(n, n) = A;
    aug.topRightCorner(n, m) = B;
    Matrix F = expm(aug * h);
    DiscreteDynamics dd;
    dd.Ad = F.topLeftCorner(n, n);
    dd.Bd = F.topRightCorner(n, m);
    dd.h = h;
    return dd;
}

DiscreteDynamics discretize_zoh(const PHSystem& sys, double h) {
    return discretize_zoh_pair(sys.dynamics_matrix(), sys.B, h);
}

Trajectory simulate(const PHSystem& sys, const Vector& x0, const Matrix& U, double h) {
    if (x0.size() != sys.n()) {
        throw std::invalid_argument("simulate: initial state dimension mismatch");
    }
    if (U.rows() != sys.m()) {
        throw std::invalid_argument("simulate: control dimension mismatch");
    }
    const int N = static_cast<int>(U.cols());
    const double box_tol = 1e-12 * (1.0 + sys.u_hi.cwiseAbs().maxCoeff() + sys.u_lo.cwiseAbs().maxCoeff());
    for (int k = 0; k < N; ++k) {
        if (((U.col(k) - sys.u_hi).array() > box_tol).any() ||
            ((sys.u_lo - U.col(k)).array() > box_tol).any()) {
            throw std::invalid_argument("simulate: control outside the input box");
        }
    }

    Trajectory traj;
    traj.h = h;
    traj.U = U;
    traj.t = Vector::LinSpaced(N + 1, 0.0, N * h);
    traj.X.resize(sys.n(), N + 1);
    traj.X.col(0) = x0;
    if (N > 0) {
        const DiscreteDynamics dd = discretize_zoh(sys, h);
        for (int k = 0; k < N; ++k) {
            traj.X.col(k + 1) = dd.Ad * traj.X.col(k) + dd.Bd * U.col(k);
        }
    }
    traj.Y = sys.B.transpose() * (sys.Q * traj.X);
    return traj;
}

double dynamics_defect(const PHSystem& sys, const Trajectory& traj) {
    const int N = traj.steps();
    if (N == 0) return 0.0;
    const DiscreteDynamics dd = discretize_zoh(sys, traj.h);
    double worst = 0.0;
    for (int k = 0; k < N; ++k) {
        const Vector defect = traj.X.col(k + 1) - dd.Ad * traj.X.col(k) - dd.Bd * traj.U.col(k);
        worst = std::max(worst, defect.cwiseAbs().maxCoeff());
    }
    return worst;
}

double cost_supplied_energy(const Trajectory& traj) {
    const int N = traj.steps();
    double total = 0.0;
    for (int k = 0; k < N; ++k) {
        total += 0.5 * traj.h * traj.U.col(k).dot(traj.Y.col(k) + traj.Y.col(k + 1));
    }
    return total;
}

double cost_via_balance(const PHSystem& sys, const Trajectory& traj) {
    const int N = traj.steps();
    const Matrix S = symmetric_sqrt_psd(sys.R);
    const Matrix G = S * sys.Q;
    double dissipated = 0.0;
    double prev = (G * traj.X.col(0)).squaredNorm();
    for (int k = 0; k < N; ++k) {
        const double next = (G * traj.X.col(k + 1)).squaredNorm();
        dissipated += 0.5 * traj.h * (prev + next);
        prev = next;
    }
    const double boundary =
        hamiltonian(sys, traj.X.col(N)) - hamiltonian(sys, traj.X.col(0));
    return boundary + dissipated;
}

double energy_balance_residual(const PHSystem& sys, const Trajectory& traj) {
    return std::abs(cost_supplied_energy(traj) - cost_via_balance(sys, traj));
}

int default_grid(double T) {
    return std::max(200, static_cast<int>(std::ceil(100.0 * T)));
}

}  // namespace phoct
