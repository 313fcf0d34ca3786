#include "phoct/system.hpp"

#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "phoct/linalg.hpp"

namespace phoct {

namespace {

double inf_norm(const Matrix& M) { return M.size() == 0 ? 0.0 : M.cwiseAbs().rowwise().sum().maxCoeff(); }

void check_dimensions(const PHSystem& sys) {
    const auto n = sys.J.rows();
    if (sys.J.cols() != n || sys.R.rows() != n || sys.R.cols() != n || sys.Q.rows() != n ||
        sys.Q.cols() != n || sys.B.rows() != n) {
        throw std::invalid_argument("PHSystem: matrix dimensions are inconsistent");
    }
    const auto m = sys.B.cols();
    if (sys.u_lo.size() != m || sys.u_hi.size() != m) {
        throw std::invalid_argument("PHSystem: input box dimension does not match B");
    }
    if (n == 0 || m == 0) {
        throw std::invalid_argument("PHSystem: empty state or input space");
    }
}

}  // namespace

ValidationReport validate_system(const PHSystem& sys, double tol_struct) {
    check_dimensions(sys);
    ValidationReport rep;

    rep.skew_residual = inf_norm(sys.J + sys.J.transpose());
    rep.r_symmetry_residual = inf_norm(sys.R - sys.R.transpose());
    rep.q_symmetry_residual = inf_norm(sys.Q - sys.Q.transpose());

    Eigen::SelfAdjointEigenSolver<Matrix> esR(0.5 * (sys.R + sys.R.transpose()));
    rep.r_psd_violation = std::max(0.0, -esR.eigenvalues().minCoeff());

    Eigen::SelfAdjointEigenSolver<Matrix> esQ(0.5 * (sys.Q + sys.Q.transpose()));
    rep.q_min_eigenvalue = esQ.eigenvalues().minCoeff();

    rep.b_rank = numeric_rank(sys.B);
    rep.box_interior_margin = std::min((-sys.u_lo).minCoeff(), sys.u_hi.minCoeff());

    const double tol_j = tol_struct * (1.0 + inf_norm(sys.J));
    const double tol_r = tol_struct * (1.0 + inf_norm(sys.R));
    const double tol_q = tol_struct * (1.0 + inf_norm(sys.Q));

    rep.pass = rep.skew_residual <= tol_j && rep.r_symmetry_residual <= tol_r &&
               rep.r_psd_violation <= tol_r && rep.q_symmetry_residual <= tol_q &&
               rep.q_min_eigenvalue >= kEnergyDefinitenessEps && rep.b_rank == sys.m() &&
               rep.box_interior_margin > 0.0;
    return rep;
}

double hamiltonian(const PHSystem& sys, const Vector& x) {
    if (x.size() != sys.n()) {
        throw std::invalid_argument("hamiltonian: state dimension mismatch");
    }
    return 0.5 * x.dot(sys.Q * x);
}

Vector output(const PHSystem& sys, const Vector& x) {
    if (x.size() != sys.n()) {
        throw std::invalid_argument("output: state dimension mismatch");
    }
    return sys.B.transpose() * (sys.Q * x);
}

SphericalForm to_spherical(const PHSystem& sys) {
    check_dimensions(sys);
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (sys.Q + sys.Q.transpose()));
    if (es.eigenvalues().minCoeff() <= 0.0) {
        throw std::invalid_argument("to_spherical: Q is not positive definite");
    }
    Matrix sqrt_q =
        es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();

    SphericalForm out;
    out.sqrt_q = sqrt_q;
    out.sys.J = sqrt_q * sys.J * sqrt_q;
    out.sys.R = sqrt_q * sys.R * sqrt_q;
    out.sys.Q = Matrix::Identity(sys.n(), sys.n());
    out.sys.B = sqrt_q * sys.B;
    out.sys.u_lo = sys.u_lo;
    out.sys.u_hi = sys.u_hi;
    return out;
}

}  // namespace phoct
