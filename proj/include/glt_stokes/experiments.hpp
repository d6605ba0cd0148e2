#pragma once

#include <Eigen/SparseCholesky>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "assembly.hpp"
#include "dense.hpp"
#include "mesh.hpp"
#include "precond.hpp"
#include "solvers.hpp"
#include "spectra.hpp"
#include "symbols.hpp"
#include "viscosity.hpp"

namespace glt_stokes {

inline constexpr const char* kArtifactVersion = "glt-stokes 0.1.0";

struct ExperimentConfig {
    int n = 8;
    int group = 1;
    double gamma = 1.0;
    char rhs_case = 'a';
    PAStrategy strategy = PAStrategy::tau_block;
    double tol = 1e-5;
    int restart = 20;
    int maxit = 1000;
    unsigned seed = 42;
    std::array<int, 4> grid{18, 18, 18, 18};
    std::string output_dir = ".";

    void validate() const {
        if (n < 1 || n > 64) throw std::invalid_argument("n must lie in [1, 64], got " + std::to_string(n));
        if (group < 1 || group > 3) throw std::invalid_argument("group must be 1, 2 or 3");
        if (!(gamma > 0)) throw std::invalid_argument("gamma must be positive");
        if (rhs_case != 'a' && rhs_case != 'b' && rhs_case != 'c') throw std::invalid_argument("case must be a, b or c");
        if (!(tol > 0 && tol < 1)) throw std::invalid_argument("tol must lie in (0, 1)");
        if (restart < 1) throw std::invalid_argument("restart must be >= 1");
        if (maxit < 1) throw std::invalid_argument("maxit must be >= 1");
        for (int g : grid)
            if (g < 1) throw std::invalid_argument("grid dimensions must be >= 1");
    }

    ViscosityField viscosity() const { return group_viscosity(group, gamma); }

    std::string group_label() const {
        if (group != 3) return std::to_string(group);
        std::ostringstream os;
        os << "3(gamma=" << gamma << ")";
        return os.str();
    }
};

// Case a: all ones. Case b: x*y at each dof's coordinates. Case c: uniform
// [0,1] entries from mt19937_64(seed).
inline Vec make_rhs(char rhs_case, const StructuredMesh& m, unsigned seed) {
    const int nu = m.velocity_count(), np = m.pressure_count(), N = 2 * nu + np;
    Vec b(N);
    switch (rhs_case) {
    case 'a': b.setOnes(); break;
    case 'b':
        for (int i = 0; i < nu; ++i) {
            Node p = m.velocity_dofs[i];
            b[i] = b[nu + i] = m.coord(p.x) * m.coord(p.y);
        }
        for (int i = 0; i < np; ++i) {
            Node p = m.pressure_dofs[i];
            b[2 * nu + i] = m.coord(p.x) * m.coord(p.y);
        }
        break;
    case 'c': {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        for (int i = 0; i < N; ++i) b[i] = U(rng);
        break;
    }
    default: throw std::invalid_argument("unknown right-hand side case");
    }
    return b;
}

// published PGMRES iteration counts, keyed by (group, gamma, case, n)
inline std::optional<int> published_iterations(int group, double gamma, char c, int n) {
    static const std::map<std::string, std::array<int, 9>> tab = {
        // rows n = 8, 16, 32; columns case a, b, c
        {"1", {57, 98, 88, 90, 218, 167, 154, 625, 444}},
        {"2", {59, 107, 97, 80, 206, 146, 118, 554, 407}},
        {"3:1", {58, 105, 92, 85, 218, 147, 124, 486, 454}},
        {"3:10", {60, 98, 88, 90, 227, 158, 128, 431, 394}},
        {"3:100", {68, 139, 128, 92, 314, 253, 116, 738, 312}},
    };
    std::string key = std::to_string(group);
    if (group == 3) key += ":" + std::to_string(int(std::lround(gamma)));
    auto it = tab.find(key);
    int row = n == 8 ? 0 : n == 16 ? 1 : n == 32 ? 2 : -1;
    if (it == tab.end() || row < 0 || c < 'a' || c > 'c') return std::nullopt;
    return it->second[std::size_t(row * 3 + (c - 'a'))];
}

struct ResultRow {
    std::string group;
    char rhs_case = 'a';
    int n = 0, dim = 0;
    std::string strategy;
    int iterations = 0;
    double final_residual = 0.0;
    bool converged = false;
    unsigned seed = 0;
    double wall_time = 0.0;
    std::optional<int> reference;
};

inline const char* results_header() {
    return "group,case,n,dim,strategy,iterations,final_residual,converged,seed,wall_time_s,published_iterations,"
           "iterations_per_n";
}

inline std::string format_row(const ResultRow& r) {
    std::ostringstream os;
    os << r.group << ',' << r.rhs_case << ',' << r.n << ',' << r.dim << ',' << r.strategy << ',' << r.iterations
       << ',' << r.final_residual << ',' << (r.converged ? "true" : "false") << ',' << r.seed << ','
       << r.wall_time << ',' << (r.reference ? std::to_string(*r.reference) : "") << ','
       << double(r.iterations) / r.n;
    return os.str();
}

// One (group, n) block of the iteration tables: the preconditioner is built
// once and reused for the requested cases.
struct TableBlock {
    StructuredMesh mesh;
    SaddleSystem sys;
    SpMat M;
    std::optional<SaddlePreconditioner> P;
};

inline TableBlock prepare_block(const ExperimentConfig& cfg, bool with_preconditioner = true) {
    cfg.validate();
    TableBlock blk;
    blk.mesh = build_mesh(cfg.n);
    auto mu = cfg.viscosity();
    blk.sys = assemble_saddle(blk.mesh, mu);
    blk.M = blk.sys.full();
    if (with_preconditioner) blk.P = build_saddle_preconditioner(blk.mesh, blk.sys, mu, cfg.strategy);
    return blk;
}

inline ResultRow run_cell(const TableBlock& blk, const ExperimentConfig& cfg, bool preconditioned = true) {
    Vec b = make_rhs(cfg.rhs_case, blk.mesh, cfg.seed);
    const SpMat& M = blk.M;
    LinearOp Mop = [&M](const Vec& v) -> Vec { return M * v; };
    LinearOp Pop = preconditioned ? blk.P->op() : LinearOp([](const Vec& v) { return v; });
    auto st = gmres(Mop, b, Pop, {cfg.restart, cfg.tol, cfg.maxit}, blk.sys.nullspace());
    ResultRow r;
    r.group = cfg.group_label();
    r.rhs_case = cfg.rhs_case;
    r.n = cfg.n;
    r.dim = blk.sys.dim();
    r.strategy = preconditioned ? to_string(cfg.strategy) : "none";
    r.iterations = st.iterations;
    r.final_residual = st.final_relative_residual;
    r.converged = st.converged;
    r.seed = cfg.seed;
    r.wall_time = st.wall_time;
    r.reference = preconditioned ? published_iterations(cfg.group, cfg.gamma, cfg.rhs_case, cfg.n) : std::nullopt;
    return r;
}

// rows in config order; a failing cell becomes a non-converged row
inline std::vector<ResultRow> run_group_table(const std::vector<ExperimentConfig>& configs) {
    std::vector<ResultRow> rows;
    std::optional<TableBlock> blk;
    const ExperimentConfig* built = nullptr;
    for (const auto& cfg : configs) {
        try {
            if (!built || built->n != cfg.n || built->group != cfg.group || built->gamma != cfg.gamma ||
                built->strategy != cfg.strategy) {
                blk = prepare_block(cfg);
                built = &cfg;
            }
            rows.push_back(run_cell(*blk, cfg));
        } catch (const std::exception&) {
            ResultRow r;
            r.group = cfg.group_label();
            r.rhs_case = cfg.rhs_case;
            r.n = cfg.n;
            r.dim = int(saddle_dimension(std::max(cfg.n, 1)));
            r.strategy = to_string(cfg.strategy);
            r.seed = cfg.seed;
            rows.push_back(r);
            built = nullptr;
        }
    }
    return rows;
}

// ---- Weyl adherence -------------------------------------------------------

enum class SpectrumTarget { A, Bx, By, M };

inline SpectrumTarget parse_target(const std::string& s) {
    if (s == "A") return SpectrumTarget::A;
    if (s == "Bx") return SpectrumTarget::Bx;
    if (s == "By") return SpectrumTarget::By;
    if (s == "M") return SpectrumTarget::M;
    throw std::invalid_argument("target must be A, Bx, By or M");
}

inline SpectrumReport adherence(SpectrumTarget target, int n, const ViscosityField& mu, std::array<int, 4> grid) {
    if (saddle_dimension(n) > 20000) throw std::invalid_argument("dense spectra are limited to dimension 20000");
    SpectrumReport rep;
    rep.n = n;
    rep.grid = grid;
    rep.group = mu.describe();
    auto mesh = build_mesh(n);
    const auto& S = symbols();
    switch (target) {
    case SpectrumTarget::A: {
        rep.target = "A";
        rep.matrix_values = to_sorted(eig_sym(Eigen::MatrixXd(assemble_A(mesh, mu))));
        rep.symbol_samples = sample_scaled_symbol(S.Ghat, mu, grid);
        break;
    }
    case SpectrumTarget::Bx:
    case SpectrumTarget::By: {
        bool x = target == SpectrumTarget::Bx;
        rep.target = x ? "Bx" : "By";
        auto [Bx, By] = assemble_B(mesh);
        rep.matrix_values = to_sorted(singular_values(Eigen::MatrixXd(x ? Bx : By)));
        const auto& G = x ? S.Gx : S.Gy;
        // viscosity independent: only the theta grid matters
        rep.symbol_samples = sample_symbol([&G](double, double, double t1, double t2) { return G.eval(t1, t2); },
                                           false, {1, 1, grid[2], grid[3]});
        break;
    }
    case SpectrumTarget::M: {
        rep.target = "M";
        auto sys = assemble_saddle(mesh, mu);
        rep.matrix_values = to_sorted(eig_sym(Eigen::MatrixXd(sys.full())));
        rep.symbol_samples = sample_symbol(
            [&mu](double x, double y, double t1, double t2) { return eval_saddle_symbol(x, y, t1, t2, mu); }, true,
            grid);
        break;
    }
    }
    rep.ks_distance = weyl_distance(rep.matrix_values, rep.symbol_samples);
    return rep;
}

// fraction of singular values of S^{-1} M inside [lo, hi]
inline double clustering_fraction(int n, const ViscosityField& mu, PAStrategy strategy, double lo = 0.5,
                                  double hi = 2.0, std::vector<double>* values = nullptr) {
    auto mesh = build_mesh(n);
    auto sys = assemble_saddle(mesh, mu);
    auto P = build_saddle_preconditioner(mesh, sys, mu, strategy);
    auto sv = to_sorted(singular_values(preconditioned_dense(P, sys.full())));
    std::size_t in = 0;
    for (double s : sv) in += (s >= lo && s <= hi);
    if (values) *values = sv;
    return double(in) / double(sv.size());
}

// ---- Example 1: mass-matrix preconditioned Stokes on (-1,1)^2 ------------

struct Example1Row {
    double mu0 = 1, mu1 = 1, w = 0.1, delta = 0;
    int n = 0;
    double condition = 0;
    int minres_iterations = 0;
    bool minres_converged = false;
};

// conformity of the uniform mesh with x = +-w and x = +-(w+delta), and h < delta
inline std::string example1_conformity_error(int n, double w, double delta) {
    auto on_grid = [n](double X) {  // X in (-1,1) -> x = (X+1)/2 on the n-grid
        double k = n * (X + 1.0) / 2.0;
        return std::abs(k - std::round(k)) < 1e-9;
    };
    std::ostringstream os;
    if (!on_grid(w)) {
        int need = 0;
        for (int k = 1; k <= 10000 && !need; ++k) {
            double v = k * (1.0 - w) / 2.0;
            if (std::abs(v - std::round(v)) < 1e-9) need = k;
        }
        os << "n*(1-w)/2 must be an integer";
        if (need) os << " (n a multiple of " << need << ")";
        os << "; ";
    }
    if (delta > 0) {
        if (!on_grid(w + delta)) os << "n*(1-w-delta)/2 must be an integer; ";
        if (!(2.0 / n < delta)) os << "element size 2/n must be smaller than delta; ";
    }
    std::string msg = os.str();
    if (!msg.empty()) msg.resize(msg.size() - 2);
    return msg;
}

// condition number of the system preconditioned by diag(A, A, M) from the
// eigenvalues sigma of M^{-1} B A^{-1} B^T: the spectrum is {1} together with
// (1 +- sqrt(1 + 4 sigma)) / 2
inline double stokes_mass_condition(const SaddleSystem& sys, const SpMat& Mscaled) {
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt{Eigen::SparseMatrix<double>(sys.A)};
    if (llt.info() != Eigen::Success) throw std::runtime_error("A factorisation failed");
    const int np = sys.np();
    Eigen::MatrixXd K(np, np);
    SpMat BxT = sys.Bx.transpose(), ByT = sys.By.transpose();
    for (int j = 0; j < np; ++j) {
        Vec cx = Vec(BxT.col(j)), cy = Vec(ByT.col(j));
        K.col(j) = sys.Bx * Vec(llt.solve(cx)) + sys.By * Vec(llt.solve(cy));
    }
    K = 0.5 * (K + K.transpose());
    Eigen::VectorXd sig = eig_sym_generalized(K, Eigen::MatrixXd(Mscaled));
    double smax = sig.maxCoeff();
    double lmax = (1 + std::sqrt(1 + 4 * smax)) / 2, lmin = 1.0;
    for (int i = 0; i < sig.size(); ++i)
        if (sig[i] > 1e-8 * smax) lmin = std::min(lmin, (std::sqrt(1 + 4 * sig[i]) - 1) / 2);
    return lmax / lmin;
}

inline Example1Row run_example1_cell(double mu0, double mu1, double w, double delta, int n, bool check_conformity = true,
                                     unsigned seed = 42) {
    if (check_conformity) {
        auto err = example1_conformity_error(n, w, delta);
        if (!err.empty()) throw std::invalid_argument("non-conforming example-1 mesh: " + err);
    }
    auto mu = strip_viscosity(mu0, mu1, w, delta);
    auto mesh = build_mesh(n);
    auto sys = assemble_saddle(mesh, mu);
    // B carries a factor n, so the matching pressure weight is n^2 M_p
    SpMat Ms = double(n) * double(n) * sys.Mp;
    Example1Row row{mu0, mu1, w, delta, n};
    row.condition = stokes_mass_condition(sys, Ms);

    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> la{Eigen::SparseMatrix<double>(sys.A)};
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> lm{Eigen::SparseMatrix<double>(Ms)};
    const int nu = sys.nu(), np = sys.np();
    LinearOp P = [&](const Vec& r) -> Vec {
        Vec z(r.size());
        z.segment(0, nu) = la.solve(Vec(r.segment(0, nu)));
        z.segment(nu, nu) = la.solve(Vec(r.segment(nu, nu)));
        z.tail(np) = lm.solve(Vec(r.tail(np)));
        return z;
    };
    SpMat M = sys.full();
    LinearOp Mop = [&M](const Vec& v) -> Vec { return M * v; };
    Vec b = make_rhs('c', mesh, seed);
    auto st = minres(Mop, b, P, sys.nullspace(), 1e-12, 20000);
    row.minres_iterations = st.iterations;
    row.minres_converged = st.converged;
    return row;
}

}  // namespace glt_stokes
