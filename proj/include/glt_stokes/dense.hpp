#pragma once

// Thin LAPACKE wrappers for value-only dense spectra; Eigen's own
// tridiagonalisation is too slow at the 4515-dimensional saddle systems.

#include <Eigen/Dense>
#include <algorithm>
#include <lapacke.h>
#include <stdexcept>
#include <string>

namespace glt_stokes {

inline double max_asymmetry(const Eigen::MatrixXd& S) {
    return (S - S.transpose()).cwiseAbs().maxCoeff();
}

// ascending eigenvalues of a symmetric matrix
inline Eigen::VectorXd eig_sym(const Eigen::MatrixXd& S) {
    if (S.rows() != S.cols()) throw std::invalid_argument("eig_sym: matrix is not square");
    if (S.size() == 0) return {};
    double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
    if (max_asymmetry(S) > 1e-12 * scale) throw std::invalid_argument("eig_sym: matrix is not symmetric");
    Eigen::MatrixXd a = S;
    Eigen::VectorXd w(S.rows());
    lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'U', lapack_int(a.rows()), a.data(),
                                     lapack_int(a.rows()), w.data());
    if (info != 0) throw std::runtime_error("dsyevd failed, info=" + std::to_string(info));
    return w;
}

// ascending eigenvalues of K v = lambda M v with M SPD
inline Eigen::VectorXd eig_sym_generalized(const Eigen::MatrixXd& K, const Eigen::MatrixXd& M) {
    Eigen::MatrixXd a = K, b = M;
    Eigen::VectorXd w(K.rows());
    lapack_int n = lapack_int(K.rows());
    lapack_int info = LAPACKE_dsygvd(LAPACK_COL_MAJOR, 1, 'N', 'U', n, a.data(), n, b.data(), n, w.data());
    if (info != 0) throw std::runtime_error("dsygvd failed, info=" + std::to_string(info));
    return w;
}

// ascending singular values, min(rows, cols) of them
inline Eigen::VectorXd singular_values(const Eigen::MatrixXd& R) {
    const lapack_int m = lapack_int(R.rows()), n = lapack_int(R.cols());
    const lapack_int k = std::min(m, n);
    Eigen::VectorXd s(k);
    if (k == 0) return s;
    Eigen::MatrixXd a = R;
    lapack_int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'N', m, n, a.data(), m, s.data(), nullptr, 1,
                                     nullptr, 1);
    if (info != 0) throw std::runtime_error("dgesdd failed, info=" + std::to_string(info));
    std::sort(s.data(), s.data() + k);
    return s;
}

}  // namespace glt_stokes
