#pragma once

#include <fftw3.h>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "assembly.hpp"
#include "mesh.hpp"
#include "symbols.hpp"
#include "toeplitz.hpp"
#include "viscosity.hpp"

namespace glt_stokes {

using Vec = Eigen::VectorXd;
using LinearOp = std::function<Vec(const Vec&)>;

enum class PAStrategy { tau_block, frozen_sparse, exact };

inline std::string to_string(PAStrategy s) {
    switch (s) {
    case PAStrategy::tau_block: return "tau_block";
    case PAStrategy::frozen_sparse: return "frozen_sparse";
    case PAStrategy::exact: return "exact";
    }
    return "";
}

inline PAStrategy parse_strategy(const std::string& s) {
    if (s == "tau_block" || s == "tau") return PAStrategy::tau_block;
    if (s == "frozen_sparse" || s == "frozen") return PAStrategy::frozen_sparse;
    if (s == "exact") return PAStrategy::exact;
    throw std::invalid_argument("unknown preconditioner strategy '" + s + "'");
}

// Inverse of the level-symmetrised tau matrix of an 8x8 real symbol on an
// (m1 x m2)-cell frame. Both levels are diagonalised by DST-I, leaving one
// 8x8 SPD solve per frequency pair.
class TauBlockSolver {
public:
    TauBlockSolver(const RatSymbol& G, int m1, int m2) : m1_(m1), m2_(m2), s_(G.s1) {
        const double pi = std::numbers::pi;
        blocks_.reserve(std::size_t(m1) * m2);
        for (int j1 = 0; j1 < m1; ++j1)
            for (int j2 = 0; j2 < m2; ++j2) {
                double t1 = pi * (j1 + 1) / (m1 + 1), t2 = pi * (j2 + 1) / (m2 + 1);
                Eigen::MatrixXd X = Eigen::MatrixXd::Zero(s_, s_);
                for (const auto& [k, C] : G.coeffs) {
                    double w = std::cos(k[0] * t1) * std::cos(k[1] * t2);
                    for (int r = 0; r < s_; ++r)
                        for (int c = 0; c < s_; ++c) X(r, c) += w * boost::rational_cast<double>(C[r * s_ + c]);
                }
                Eigen::LLT<Eigen::MatrixXd> llt(X);
                if (llt.info() != Eigen::Success)
                    throw std::runtime_error("tau block not positive definite at frequency (" + std::to_string(j1) +
                                             "," + std::to_string(j2) + ")");
                blocks_.push_back(std::move(llt));
            }
        const std::size_t N = std::size_t(m1) * m2 * s_;
        in_.reset(fftw_alloc_real(N));
        out_.reset(fftw_alloc_real(N));
        int dims[2] = {m1, m2};
        fftw_r2r_kind kinds[2] = {FFTW_RODFT00, FFTW_RODFT00};
        plan_ = std::shared_ptr<fftw_plan_s>(
            fftw_plan_many_r2r(2, dims, s_, in_.get(), nullptr, s_, 1, out_.get(), nullptr, s_, 1, kinds,
                               FFTW_ESTIMATE),
            fftw_destroy_plan);
        scale_ = 1.0 / (4.0 * (m1 + 1) * (m2 + 1));
    }

    int size() const { return m1_ * m2_ * s_; }

    Vec solve(const Vec& r) const {
        const std::size_t N = std::size_t(size());
        std::copy(r.data(), r.data() + N, in_.get());
        fftw_execute_r2r(plan_.get(), in_.get(), out_.get());
        for (std::size_t f = 0; f < blocks_.size(); ++f) {
            Eigen::Map<Eigen::VectorXd> v(out_.get() + f * s_, s_);
            v = blocks_[f].solve(Eigen::VectorXd(v));
        }
        fftw_execute_r2r(plan_.get(), out_.get(), in_.get());
        Vec z(N);
        for (std::size_t i = 0; i < N; ++i) z[i] = scale_ * in_.get()[i];
        return z;
    }

    // smallest eigenvalue over all frequency blocks
    double min_eigenvalue() const {
        double lo = INFINITY;
        for (const auto& b : blocks_) {
            Eigen::MatrixXd L = b.matrixL();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L * L.transpose(), Eigen::EigenvaluesOnly);
            lo = std::min(lo, es.eigenvalues()[0]);
        }
        return lo;
    }

private:
    struct FftwFree {
        void operator()(double* p) const { fftw_free(p); }
    };
    int m1_, m2_, s_;
    std::vector<Eigen::LLT<Eigen::MatrixXd>> blocks_;
    std::unique_ptr<double, FftwFree> in_, out_;
    std::shared_ptr<fftw_plan_s> plan_;
    double scale_;
};

// SPD approximation of one velocity block, available through its inverse.
struct PASolver {
    PAStrategy strategy{};
    int size = 0;
    LinearOp solve;
    double build_seconds = 0.0;
};

inline Vec node_viscosity(const StructuredMesh& m, const ViscosityField& mu) {
    Vec d(m.velocity_count());
    for (int i = 0; i < m.velocity_count(); ++i) {
        Node p = m.velocity_dofs[i];
        d[i] = mu(m.coord(p.x), m.coord(p.y));
        if (!(d[i] > 0)) throw std::domain_error("non-positive viscosity at velocity dof " + std::to_string(i));
    }
    return d;
}

// tau_block: P_A^{-1} = D^{-1/2} P^T tau(T(G))^{-1} P D^{-1/2} with P the
// compression of the velocity dofs into the n x n cell frame of G.
// frozen_sparse: P_A = D^{1/2} A(1) D^{1/2}. exact: P_A = A(mu).
inline PASolver build_PA(const StructuredMesh& m, const ViscosityField& mu, PAStrategy strategy) {
    auto t0 = std::chrono::steady_clock::now();
    PASolver P;
    P.strategy = strategy;
    P.size = m.velocity_count();
    Vec isd = node_viscosity(m, mu).cwiseSqrt().cwiseInverse();
    switch (strategy) {
    case PAStrategy::tau_block: {
        auto tau = std::make_shared<TauBlockSolver>(symbols().Ghat, m.n, m.n);
        auto map = std::make_shared<IndexMap>(lattice_compression(m.velocity_dofs, layout_A(), {m.n, m.n}));
        P.solve = [tau, map, isd](const Vec& r) -> Vec {
            Vec z = map->scatter(Vec(r.cwiseProduct(isd)));
            return map->gather(tau->solve(z)).cwiseProduct(isd);
        };
        break;
    }
    case PAStrategy::frozen_sparse:
    case PAStrategy::exact: {
        bool frozen = strategy == PAStrategy::frozen_sparse;
        Eigen::SparseMatrix<double> A = frozen ? assemble_A(m, constant_viscosity(1.0)) : assemble_A(m, mu);
        auto llt = std::make_shared<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>>(A);
        if (llt->info() != Eigen::Success) throw std::runtime_error("P_A factorisation failed: not positive definite");
        if (frozen)
            P.solve = [llt, isd](const Vec& r) -> Vec {
                return Vec(llt->solve(Vec(r.cwiseProduct(isd)))).cwiseProduct(isd);
            };
        else
            P.solve = [llt](const Vec& r) -> Vec { return llt->solve(r); };
        break;
    }
    }
    P.build_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return P;
}

// dense P_A^{-1}, column by column
inline Eigen::MatrixXd dense_inverse(const PASolver& P) {
    Eigen::MatrixXd X(P.size, P.size);
    Vec e = Vec::Zero(P.size);
    for (int j = 0; j < P.size; ++j) {
        e[j] = 1.0;
        X.col(j) = P.solve(e);
        e[j] = 0.0;
    }
    return 0.5 * (X + X.transpose());
}

struct SchurComplement {
    Eigen::MatrixXd S;          // -B P_A^{-1} B^T, symmetrised
    double asymmetry = 0.0;     // max |S - S^T| / max |S| before symmetrisation
    Eigen::LLT<Eigen::MatrixXd> deflated;  // factor of -S + e e^T, e = 1/|1|
    Vec e;
    double build_seconds = 0.0;

    Vec solve_negated(const Vec& p) const { return deflated.solve(p); }  // (-S + e e^T)^{-1} p
};

inline SchurComplement build_schur(const SpMat& Bx, const SpMat& By, const PASolver& PA) {
    auto t0 = std::chrono::steady_clock::now();
    const int np = int(Bx.rows());
    SchurComplement sc;
    sc.S.resize(np, np);
    SpMat BxT = Bx.transpose(), ByT = By.transpose();
    for (int j = 0; j < np; ++j) {
        Vec cx = Vec(BxT.col(j)), cy = Vec(ByT.col(j));
        sc.S.col(j) = -(Bx * PA.solve(cx) + By * PA.solve(cy));
    }
    double scale = sc.S.cwiseAbs().maxCoeff();
    sc.asymmetry = scale > 0 ? (sc.S - sc.S.transpose()).cwiseAbs().maxCoeff() / scale : 0.0;
    sc.S = 0.5 * (sc.S + sc.S.transpose());
    sc.e = Vec::Constant(np, 1.0 / std::sqrt(double(np)));
    Eigen::MatrixXd K = -sc.S + sc.e * sc.e.transpose();
    sc.deflated.compute(K);
    if (sc.deflated.info() != Eigen::Success) throw std::runtime_error("deflated Schur factorisation failed");
    sc.build_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return sc;
}

// S_n = diag(P_A, P_A, -S); the pressure part works orthogonally to constants
struct SaddlePreconditioner {
    PASolver PA;
    SchurComplement schur;
    int nu = 0, np = 0;
    bool project_pressure = true;

    Vec apply(const Vec& r) const {
        if (r.size() != 2 * nu + np) throw std::invalid_argument("apply_precond: dimension mismatch");
        Vec z(r.size());
        z.segment(0, nu) = PA.solve(r.segment(0, nu));
        z.segment(nu, nu) = PA.solve(r.segment(nu, nu));
        Vec p = r.tail(np);
        if (project_pressure) p -= schur.e * schur.e.dot(p);
        Vec q = schur.solve_negated(p);
        if (project_pressure) q -= schur.e * schur.e.dot(q);
        z.tail(np) = q;
        return z;
    }
    LinearOp op() const {
        return [this](const Vec& r) { return apply(r); };
    }
};

inline SaddlePreconditioner build_saddle_preconditioner(const StructuredMesh& m, const SaddleSystem& sys,
                                                        const ViscosityField& mu, PAStrategy strategy) {
    SaddlePreconditioner P;
    P.PA = build_PA(m, mu, strategy);
    P.schur = build_schur(sys.Bx, sys.By, P.PA);
    P.nu = sys.nu();
    P.np = sys.np();
    return P;
}

// dense S^{-1} M, for spectra at small n
inline Eigen::MatrixXd preconditioned_dense(const SaddlePreconditioner& P, const SpMat& M) {
    const int N = int(M.rows());
    Eigen::MatrixXd out(N, N);
    Eigen::SparseMatrix<double> Mc = M;
    for (int j = 0; j < N; ++j) out.col(j) = P.apply(Vec(Mc.col(j)));
    return out;
}

}  // namespace glt_stokes
