#include "phoct/linalg.hpp"

#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

namespace phoct {

Matrix symmetric_sqrt_psd(const Matrix& S) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (S + S.transpose()));
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("symmetric_sqrt_psd: eigensolver failed");
    }
    Vector d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

Matrix symmetric_inv_sqrt_spd(const Matrix& S) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (S + S.transpose()));
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("symmetric_inv_sqrt_spd: eigensolver failed");
    }
    if (es.eigenvalues().minCoeff() <= 0.0) {
        throw std::invalid_argument("symmetric_inv_sqrt_spd: matrix is not positive definite");
    }
    Vector d = es.eigenvalues().cwiseSqrt().cwiseInverse();
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

Matrix expm(const Matrix& M) { return M.exp(); }

Matrix solve_lyapunov(const Matrix& A, const Matrix& W) {
    const auto d = A.rows();
    if (A.cols() != d || W.rows() != d || W.cols() != d) {
        throw std::invalid_argument("solve_lyapunov: dimension mismatch");
    }
    // vec(AᵀP + PA) = (I⊗Aᵀ + Aᵀ⊗I) vec(P)
    Matrix K = Matrix::Zero(d * d, d * d);
    const Matrix At = A.transpose();
    for (Eigen::Index i = 0; i < d; ++i) {
        K.block(i * d, i * d, d, d) += At;
        for (Eigen::Index j = 0; j < d; ++j) {
            for (Eigen::Index k = 0; k < d; ++k) {
                K(i * d + j, k * d + j) += At(i, k);
            }
        }
    }
    Eigen::VectorXd w(Eigen::Map<const Eigen::VectorXd>(W.data(), d * d));
    Eigen::FullPivLU<Matrix> lu(K);
    if (!lu.isInvertible()) {
        throw std::runtime_error("solve_lyapunov: singular Lyapunov operator (eigenvalue pair sums to zero)");
    }
    Eigen::VectorXd p = lu.solve(-w);
    Matrix P(Eigen::Map<Matrix>(p.data(), d, d));
    return 0.5 * (P + P.transpose());
}

Matrix gramian_quadratic(const Matrix& A, const Matrix& M, double h) {
    const auto d = A.rows();
    Matrix block = Matrix::Zero(2 * d, 2 * d);
    block.topLeftCorner(d, d) = -A.transpose();
    block.topRightCorner(d, d) = M;
    block.bottomRightCorner(d, d) = A;
    Matrix F = expm(block * h);
    Matrix W = F.bottomRightCorner(d, d).transpose() * F.topRightCorner(d, d);
    return 0.5 * (W + W.transpose());
}

namespace {

template <typename Mat>
int rank_impl(const Mat& M, double rel_tol) {
    if (M.rows() == 0 || M.cols() == 0) return 0;
    Eigen::JacobiSVD<Mat> svd(M);
    const auto& sv = svd.singularValues();
    const double thr = rel_tol * sv(0);
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > thr) ++r;
    }
    return r;
}

}  // namespace

int numeric_rank(const Matrix& M, double rel_tol) { return rank_impl(M, rel_tol); }
int numeric_rank(const ComplexMatrix& M, double rel_tol) { return rank_impl(M, rel_tol); }

Matrix nullspace(const Matrix& M, double rel_tol) {
    if (M.cols() == 0) return Matrix::Zero(0, 0);
    if (M.rows() == 0) return Matrix::Identity(M.cols(), M.cols());
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double thr = rel_tol * (sv.size() > 0 ? sv(0) : 0.0);
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > thr) ++r;
    }
    return svd.matrixV().rightCols(M.cols() - r);
}

Matrix orthonormal_complement(const Matrix& V) {
    const auto n = V.rows();
    const auto d = V.cols();
    if (d == 0) return Matrix::Identity(n, n);
    if (d >= n) return Matrix::Zero(n, 0);
    Eigen::HouseholderQR<Matrix> qr(V);
    Matrix Qfull = qr.householderQ() * Matrix::Identity(n, n);
    return Qfull.rightCols(n - d);
}

Matrix orthonormalize_mgs(const std::vector<Vector>& vectors, double drop_tol) {
    if (vectors.empty()) return Matrix::Zero(0, 0);
    const auto n = vectors.front().size();
    std::vector<Vector> basis;
    for (const Vector& v : vectors) {
        Vector w = v;
        for (int pass = 0; pass < 2; ++pass) {
            for (const Vector& b : basis) {
                w -= b.dot(w) * b;
            }
        }
        const double nrm = w.norm();
        if (nrm > drop_tol * std::max(1.0, v.norm())) {
            basis.push_back(w / nrm);
        }
    }
    Matrix B(n, static_cast<Eigen::Index>(basis.size()));
    for (std::size_t k = 0; k < basis.size(); ++k) {
        B.col(static_cast<Eigen::Index>(k)) = basis[k];
    }
    return B;
}

double spectral_norm(const Matrix& M) {
    if (M.rows() == 0 || M.cols() == 0) return 0.0;
    return Eigen::JacobiSVD<Matrix>(M).singularValues()(0);
}

double spectral_abscissa(const Matrix& M) {
    if (M.rows() == 0) return -std::numeric_limits<double>::infinity();
    return M.eigenvalues().real().maxCoeff();
}

double spectral_radius(const Matrix& M) {
    if (M.rows() == 0) return 0.0;
    return M.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace phoct
