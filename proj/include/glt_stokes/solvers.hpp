#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

namespace glt_stokes {

using Vec = Eigen::VectorXd;
using LinearOp = std::function<Vec(const Vec&)>;

struct SolveStats {
    int iterations = 0;
    double final_relative_residual = 0.0;  // true ||b - Mx|| / ||b||
    std::vector<double> residual_history;  // preconditioned relative residual per step
    bool converged = false;
    double wall_time = 0.0;
    Vec x;
};

struct GmresOptions {
    int restart = 20;
    double tol = 1e-5;
    int maxit = 1000;
};

namespace detail {
inline Vec project_out(Vec v, const std::optional<Vec>& z) {
    if (z) v -= (*z) * z->dot(v);
    return v;
}
inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}
}  // namespace detail

// Left-preconditioned GMRES(restart) from a zero guess. Stops on the
// preconditioned relative residual, but a run only counts as converged once
// the true relative residual is below tol as well: if it is not, the
// preconditioned target is tightened by the observed gap and iteration
// continues from a restart. With a (unit) nullspace vector z of a symmetric M,
// b is replaced by its consistent part b - z z^T b.
inline SolveStats gmres(const LinearOp& M, const Vec& b_in, const LinearOp& P, GmresOptions opt = {},
                        std::optional<Vec> nullspace = std::nullopt) {
    auto t0 = std::chrono::steady_clock::now();
    if (nullspace) *nullspace /= nullspace->norm();
    const Vec b = detail::project_out(b_in, nullspace);
    const int N = int(b.size());
    SolveStats st;
    st.x = Vec::Zero(N);
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        st.converged = true;
        st.wall_time = detail::seconds_since(t0);
        return st;
    }
    const double pbnorm = P(b).norm();
    const int m = opt.restart;
    Eigen::MatrixXd V(N, m + 1), H = Eigen::MatrixXd::Zero(m + 1, m);
    Vec cs(m), sn(m), g(m + 1);
    double cycle_start = INFINITY;
    double target = opt.tol;
    // true-residual check; tightens the preconditioned target when it fails
    auto accept = [&] {
        double t = (b - M(st.x)).norm() / bnorm;
        if (t <= opt.tol) return true;
        target *= 0.5 * opt.tol / t;
        return false;
    };

    while (st.iterations < opt.maxit) {
        Vec r = P(b - M(st.x));
        double beta = r.norm();
        double rel = beta / pbnorm;
        if (rel <= target) {
            if (accept()) {
                st.converged = true;
                break;
            }
            continue;
        }
        if (std::isfinite(cycle_start) && std::abs(cycle_start - rel) < 1e-14 * cycle_start) break;  // stagnation
        cycle_start = rel;
        V.col(0) = r / beta;
        H.setZero();
        g.setZero();
        g[0] = beta;
        int k = 0;
        bool done = false;
        for (; k < m && st.iterations < opt.maxit; ++k) {
            Vec w = P(M(V.col(k)));
            for (int i = 0; i <= k; ++i) {  // modified Gram-Schmidt
                H(i, k) = w.dot(V.col(i));
                w -= H(i, k) * V.col(i);
            }
            H(k + 1, k) = w.norm();
            bool breakdown = H(k + 1, k) <= 1e-14 * beta;
            if (!breakdown) V.col(k + 1) = w / H(k + 1, k);
            for (int i = 0; i < k; ++i) {
                double t = cs[i] * H(i, k) + sn[i] * H(i + 1, k);
                H(i + 1, k) = -sn[i] * H(i, k) + cs[i] * H(i + 1, k);
                H(i, k) = t;
            }
            double d = std::hypot(H(k, k), H(k + 1, k));
            cs[k] = H(k, k) / d;
            sn[k] = H(k + 1, k) / d;
            H(k, k) = d;
            H(k + 1, k) = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            ++st.iterations;
            double res = std::abs(g[k + 1]) / pbnorm;
            st.residual_history.push_back(res);
            if (res <= target || breakdown) {
                ++k;
                done = true;
                break;
            }
        }
        Vec y = H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
        st.x += V.leftCols(k) * y;
        if (done && accept()) {
            st.converged = true;
            break;
        }
    }
    st.final_relative_residual = (b - M(st.x)).norm() / bnorm;
    st.wall_time = detail::seconds_since(t0);
    return st;
}

// Preconditioned MINRES (Paige-Saunders recurrences) from a zero guess; b and
// every preconditioned vector are kept orthogonal to the nullspace vector.
inline SolveStats minres(const LinearOp& M, const Vec& b_in, const LinearOp& P, Vec nullspace,
                         double tol = 1e-12, int maxit = 10000) {
    auto t0 = std::chrono::steady_clock::now();
    const int N = int(b_in.size());
    {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> U(-1, 1);
        Vec u(N), v(N);
        for (int i = 0; i < N; ++i) u[i] = U(rng), v[i] = U(rng);
        Vec Mu = M(u), Mv = M(v);
        if (std::abs(Mu.dot(v) - u.dot(Mv)) > 1e-10 * Mu.norm() * v.norm())
            throw std::invalid_argument("minres: operator is not symmetric");
    }
    std::optional<Vec> z = nullspace / nullspace.norm();
    auto Pz = [&](const Vec& r) { return detail::project_out(P(detail::project_out(r, z)), z); };
    const Vec b = detail::project_out(b_in, z);
    SolveStats st;
    st.x = Vec::Zero(N);
    Vec r1 = b, y = Pz(r1);
    double beta1 = r1.dot(y);
    if (beta1 < 0) throw std::invalid_argument("minres: preconditioner is not positive definite");
    beta1 = std::sqrt(beta1);
    if (beta1 == 0.0) {
        st.converged = true;
        return st;
    }
    double oldb = 0, beta = beta1, dbar = 0, epsln = 0, phibar = beta1, cs = -1, sn = 0;
    Vec w = Vec::Zero(N), w2 = Vec::Zero(N), r2 = r1;
    const double eps = std::numeric_limits<double>::epsilon();
    while (st.iterations < maxit) {
        ++st.iterations;
        Vec v = y / beta;
        y = M(v);
        if (st.iterations >= 2) y -= (beta / oldb) * r1;
        double alfa = v.dot(y);
        y -= (alfa / beta) * r2;
        r1 = r2;
        r2 = y;
        y = Pz(r2);
        oldb = beta;
        beta = std::sqrt(std::max(r2.dot(y), 0.0));
        double oldeps = epsln;
        double delta = cs * dbar + sn * alfa;
        double gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        double gamma = std::max(std::hypot(gbar, beta), eps);
        cs = gbar / gamma;
        sn = beta / gamma;
        double phi = cs * phibar;
        phibar = sn * phibar;
        Vec w1 = w2;
        w2 = w;
        w = (v - oldeps * w1 - delta * w2) / gamma;
        st.x += phi * w;
        double rel = phibar / beta1;
        st.residual_history.push_back(rel);
        if (rel <= tol) {
            st.converged = true;
            break;
        }
        if (beta == 0.0) {
            st.converged = true;
            break;
        }
    }
    double bn = b.norm();
    st.final_relative_residual = bn > 0 ? (b - M(st.x)).norm() / bn : 0.0;
    st.wall_time = detail::seconds_since(t0);
    return st;
}

}  // namespace glt_stokes
