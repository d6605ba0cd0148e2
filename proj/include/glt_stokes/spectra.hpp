#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "dense.hpp"
#include "toeplitz.hpp"
#include "viscosity.hpp"

namespace glt_stokes {

struct SpectrumReport {
    std::vector<double> matrix_values;   // ascending
    std::vector<double> symbol_samples;  // ascending
    double ks_distance = 0.0;
    int n = 0;
    std::string target, group;
    std::array<int, 4> grid{};
};

using SymbolEvaluator = std::function<Eigen::MatrixXcd(double x, double y, double t1, double t2)>;

inline std::vector<double> to_sorted(const Eigen::VectorXd& v) {
    std::vector<double> out(v.data(), v.data() + v.size());
    std::sort(out.begin(), out.end());
    return out;
}

// midpoints of uniform subdivisions of [0,1]^2 x [-pi,pi]^2
inline double grid_point(int i, int n, double lo, double hi) { return lo + (hi - lo) * (i + 0.5) / n; }

// Pooled eigenvalues (hermitian) or min(s1,s2) singular values of f over the grid.
inline std::vector<double> sample_symbol(const SymbolEvaluator& f, bool hermitian, std::array<int, 4> grid) {
    const double pi = std::numbers::pi;
    if (grid[0] * grid[1] * grid[2] * grid[3] < 1) throw std::invalid_argument("sample_symbol: empty grid");
    std::vector<double> out;
    for (int i = 0; i < grid[0]; ++i)
        for (int j = 0; j < grid[1]; ++j)
            for (int a = 0; a < grid[2]; ++a)
                for (int b = 0; b < grid[3]; ++b) {
                    Eigen::MatrixXcd F = f(grid_point(i, grid[0], 0, 1), grid_point(j, grid[1], 0, 1),
                                           grid_point(a, grid[2], -pi, pi), grid_point(b, grid[3], -pi, pi));
                    if (hermitian) {
                        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(F, Eigen::EigenvaluesOnly);
                        for (int k = 0; k < es.eigenvalues().size(); ++k) out.push_back(es.eigenvalues()[k]);
                    } else {
                        Eigen::JacobiSVD<Eigen::MatrixXcd> sv(F);
                        for (int k = 0; k < sv.singularValues().size(); ++k) out.push_back(sv.singularValues()[k]);
                    }
                }
    std::sort(out.begin(), out.end());
    return out;
}

// Samples of mu(x,y) * G(theta): the theta eigenproblems are solved once
// and scaled by the viscosity grid (mu > 0 keeps the ordering per point).
template <class T>
std::vector<double> sample_scaled_symbol(const BlockSymbol<T>& G, const ViscosityField& mu, std::array<int, 4> grid) {
    const double pi = std::numbers::pi;
    std::vector<double> base;
    for (int a = 0; a < grid[2]; ++a)
        for (int b = 0; b < grid[3]; ++b) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
                G.eval(grid_point(a, grid[2], -pi, pi), grid_point(b, grid[3], -pi, pi)), Eigen::EigenvaluesOnly);
            for (int k = 0; k < es.eigenvalues().size(); ++k) base.push_back(es.eigenvalues()[k]);
        }
    std::vector<double> out;
    out.reserve(base.size() * grid[0] * grid[1]);
    for (int i = 0; i < grid[0]; ++i)
        for (int j = 0; j < grid[1]; ++j) {
            double m = mu(grid_point(i, grid[0], 0, 1), grid_point(j, grid[1], 0, 1));
            for (double v : base) out.push_back(m * v);
        }
    std::sort(out.begin(), out.end());
    return out;
}

// Kolmogorov-Smirnov distance of two empirical distributions (sorted inputs)
inline double weyl_distance(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("weyl_distance: empty sample");
    const double na = double(a.size()), nb = double(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() || j < b.size()) {
        double x = (j == b.size() || (i < a.size() && a[i] <= b[j])) ? a[i] : b[j];
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    return d;
}

// symbol sample at the empirical rank of each matrix value
inline std::vector<double> rank_aligned_quantiles(std::size_t m, const std::vector<double>& samples) {
    std::vector<double> q(m);
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t k = std::size_t((i + 0.5) / double(m) * double(samples.size()));
        q[i] = samples[std::min(k, samples.size() - 1)];
    }
    return q;
}

inline bool outlier_check(const std::vector<double>& eigs_mu, const std::vector<double>& eigs_one,
                          const ViscosityField& mu, double slack = 1e-10) {
    if (eigs_mu.size() != eigs_one.size()) throw std::invalid_argument("outlier_check: length mismatch");
    const double lo = mu.essinf(), hi = mu.esssup();
    for (std::size_t j = 0; j < eigs_mu.size(); ++j) {
        double tol = slack * std::max(std::abs(eigs_mu[j]), std::abs(hi * eigs_one[j]));
        if (eigs_mu[j] < lo * eigs_one[j] - tol || eigs_mu[j] > hi * eigs_one[j] + tol) return false;
    }
    return true;
}

struct PreconditionedSpectrum {
    std::vector<double> eigenvalues;
    double condition = 0.0;
};

// eigenvalues of M u = lambda P u through L^{-1} M L^{-T}, P = L L^T; the
// nullspace eigenvalue (magnitude below 1e-8 max) is left out of the ratio
inline PreconditionedSpectrum preconditioned_spectrum(const Eigen::MatrixXd& M, const Eigen::MatrixXd& P) {
    Eigen::LLT<Eigen::MatrixXd> llt(P);
    if (llt.info() != Eigen::Success) throw std::invalid_argument("preconditioned_spectrum: P is not SPD");
    Eigen::MatrixXd X = llt.matrixL().solve(M);
    Eigen::MatrixXd Y = llt.matrixL().solve(X.transpose()).transpose();
    Y = 0.5 * (Y + Y.transpose());
    PreconditionedSpectrum out;
    out.eigenvalues = to_sorted(eig_sym(Y));
    std::vector<double> mags;
    for (double v : out.eigenvalues) mags.push_back(std::abs(v));
    std::sort(mags.begin(), mags.end());
    double mx = mags.back();
    std::size_t first = (mags.size() > 1 && mags[0] < 1e-8 * mx) ? 1 : 0;
    out.condition = mx / mags[first];
    return out;
}

// sorted eigenvalues grouped into clusters of the given width
inline int count_clusters(const std::vector<double>& sorted, double width) {
    if (sorted.empty()) return 0;
    int c = 1;
    double start = sorted[0];
    for (double v : sorted)
        if (v - start > width) {
            ++c;
            start = v;
        }
    return c;
}

}  // namespace glt_stokes
