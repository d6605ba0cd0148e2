#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <cmath>
#include <tuple>
#include <fstream>
#include <iomanip>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "mesh.hpp"
#include "viscosity.hpp"

namespace glt_stokes {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplets = std::vector<Eigen::Triplet<double>>;

namespace detail {

// Element integrals on a triangle given in lattice units. The P2 stiffness is
// scale free in 2D; integrands are degree 2, so the edge-midpoint rule is exact.
struct P2Element {
    std::array<std::array<double, 2>, 3> grad_l;  // gradients of barycentrics
    double area;                                   // lattice units

    explicit P2Element(const std::array<Node, 6>& p) {
        double x0 = p[0].x, y0 = p[0].y, x1 = p[1].x, y1 = p[1].y, x2 = p[2].x, y2 = p[2].y;
        double det = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0);
        area = 0.5 * det;
        grad_l[0] = {(y1 - y2) / det, (x2 - x1) / det};
        grad_l[1] = {(y2 - y0) / det, (x0 - x2) / det};
        grad_l[2] = {(y0 - y1) / det, (x1 - x0) / det};
    }

    // gradients of the six P2 basis functions at barycentric point l
    std::array<std::array<double, 2>, 6> grads(const std::array<double, 3>& l) const {
        std::array<std::array<double, 2>, 6> g{};
        for (int i = 0; i < 3; ++i)
            for (int d = 0; d < 2; ++d) g[i][d] = (4 * l[i] - 1) * grad_l[i][d];
        const int e[3][2] = {{0, 1}, {1, 2}, {2, 0}};
        for (int k = 0; k < 3; ++k) {
            int i = e[k][0], j = e[k][1];
            for (int d = 0; d < 2; ++d) g[3 + k][d] = 4 * (l[i] * grad_l[j][d] + l[j] * grad_l[i][d]);
        }
        return g;
    }

    static constexpr std::array<std::array<double, 3>, 3> midpoints() {
        return {{{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}}};
    }

    std::array<std::array<double, 6>, 6> stiffness() const {
        std::array<std::array<double, 6>, 6> K{};
        for (const auto& l : midpoints()) {
            auto g = grads(l);
            for (int a = 0; a < 6; ++a)
                for (int b = a; b < 6; ++b) K[a][b] += area / 3 * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
        }
        for (int a = 0; a < 6; ++a)
            for (int b = 0; b < a; ++b) K[a][b] = K[b][a];
        return K;
    }

    // D[d][a][b] = integral of lambda_a * d/dx_d phi_b, lattice units
    std::array<std::array<std::array<double, 6>, 3>, 2> divergence() const {
        std::array<std::array<std::array<double, 6>, 3>, 2> D{};
        for (const auto& l : midpoints()) {
            auto g = grads(l);
            for (int d = 0; d < 2; ++d)
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 6; ++b) D[d][a][b] += area / 3 * l[a] * g[b][d];
        }
        return D;
    }
};

inline std::array<double, 2> centroid(const StructuredMesh& m, int t) {
    const auto& tri = m.triangles[t];
    double s = 3.0 * m.units();
    return {(m.vertices[tri[0]].x + m.vertices[tri[1]].x + m.vertices[tri[2]].x) / s,
            (m.vertices[tri[0]].y + m.vertices[tri[1]].y + m.vertices[tri[2]].y) / s};
}

inline double sample_mu(const StructuredMesh& m, const ViscosityField& mu, int t) {
    auto c = centroid(m, t);
    double v = mu(c[0], c[1]);
    if (!(v > 0) || !std::isfinite(v))
        throw std::domain_error("non-positive viscosity sample at triangle " + std::to_string(t));
    return v;
}

}  // namespace detail

inline SpMat assemble_A(const StructuredMesh& m, const ViscosityField& mu) {
    Triplets trip;
    trip.reserve(m.triangles.size() * 36);
    for (int t = 0; t < int(m.triangles.size()); ++t) {
        auto nodes = m.p2_nodes(t);
        detail::P2Element el(nodes);
        auto K = el.stiffness();
        double c = detail::sample_mu(m, mu, t);
        std::array<int, 6> id;
        for (int a = 0; a < 6; ++a) id[a] = m.velocity_index(nodes[a]);
        for (int a = 0; a < 6; ++a) {
            if (id[a] < 0) continue;
            for (int b = 0; b < 6; ++b)
                if (id[b] >= 0) trip.emplace_back(id[a], id[b], c * K[a][b]);
        }
    }
    SpMat A(m.velocity_count(), m.velocity_count());
    A.setFromTriplets(trip.begin(), trip.end());
    A.prune(1.0, 1e-13);
    return A;
}

// Returns n * (-div) blocks, i.e. h-free entries in {+-1/6, +-1/12} away from
// the boundary; the plain finite element divergence is B / n.
inline std::pair<SpMat, SpMat> assemble_B(const StructuredMesh& m) {
    Triplets tx, ty;
    for (int t = 0; t < int(m.triangles.size()); ++t) {
        auto nodes = m.p2_nodes(t);
        detail::P2Element el(nodes);
        auto D = el.divergence();
        for (int a = 0; a < 3; ++a) {
            int p = m.pressure_index(nodes[a]);
            for (int b = 0; b < 6; ++b) {
                int u = m.velocity_index(nodes[b]);
                if (u < 0) continue;
                // lattice -> physical: d/dx scales by 4n, area by 1/(16n^2); times n
                tx.emplace_back(p, u, -0.25 * D[0][a][b]);
                ty.emplace_back(p, u, -0.25 * D[1][a][b]);
            }
        }
    }
    SpMat Bx(m.pressure_count(), m.velocity_count()), By(m.pressure_count(), m.velocity_count());
    Bx.setFromTriplets(tx.begin(), tx.end());
    By.setFromTriplets(ty.begin(), ty.end());
    Bx.prune(1.0, 1e-13);
    By.prune(1.0, 1e-13);
    return {Bx, By};
}

// integral of mu^{-1} p q, physical units
inline SpMat assemble_pressure_mass(const StructuredMesh& m, const ViscosityField& mu) {
    Triplets trip;
    const double s = double(m.units()) * m.units();
    for (int t = 0; t < int(m.triangles.size()); ++t) {
        auto nodes = m.p2_nodes(t);
        detail::P2Element el(nodes);
        double w = el.area / s / 12.0 / detail::sample_mu(m, mu, t);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                trip.emplace_back(m.pressure_index(nodes[a]), m.pressure_index(nodes[b]),
                                  (a == b ? 2.0 : 1.0) * w);
    }
    SpMat M(m.pressure_count(), m.pressure_count());
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

struct SaddleSystem {
    int n = 0;
    SpMat A;  // shared by both velocity components
    SpMat Bx, By;
    SpMat Mp;

    int nu() const { return int(A.rows()); }
    int np() const { return int(Bx.rows()); }
    int dim() const { return 2 * nu() + np(); }

    // [[A 0 Bx^T], [0 A By^T], [Bx By 0]]
    SpMat full() const {
        Triplets trip;
        trip.reserve(2 * A.nonZeros() + 4 * Bx.nonZeros() + 4 * By.nonZeros());
        const int u = nu();
        for (int off : {0, u})
            for (int r = 0; r < A.outerSize(); ++r)
                for (SpMat::InnerIterator it(A, r); it; ++it) trip.emplace_back(off + r, off + it.col(), it.value());
        for (int k = 0; k < 2; ++k) {
            const SpMat& B = k ? By : Bx;
            for (int r = 0; r < B.outerSize(); ++r)
                for (SpMat::InnerIterator it(B, r); it; ++it) {
                    trip.emplace_back(2 * u + r, k * u + it.col(), it.value());
                    trip.emplace_back(k * u + it.col(), 2 * u + r, it.value());
                }
        }
        SpMat M(dim(), dim());
        M.setFromTriplets(trip.begin(), trip.end());
        return M;
    }

    // (0, 1) direction: constant pressure
    Eigen::VectorXd nullspace() const {
        Eigen::VectorXd z = Eigen::VectorXd::Zero(dim());
        z.tail(np()).setConstant(1.0 / std::sqrt(double(np())));
        return z;
    }
};

inline SaddleSystem assemble_saddle(const StructuredMesh& m, const ViscosityField& mu) {
    SaddleSystem s;
    s.n = m.n;
    s.A = assemble_A(m, mu);
    std::tie(s.Bx, s.By) = assemble_B(m);
    s.Mp = assemble_pressure_mass(m, mu);
    if (s.dim() != saddle_dimension(m.n))
        throw std::logic_error("assembled saddle dimension " + std::to_string(s.dim()) +
                               " differs from 18n^2-6n+3 = " + std::to_string(saddle_dimension(m.n)));
    return s;
}

inline void write_matrix_market(const SpMat& M, std::ostream& os, bool symmetric = false) {
    os << "%%MatrixMarket matrix coordinate real " << (symmetric ? "symmetric" : "general") << '\n';
    std::size_t nnz = 0;
    for (int r = 0; r < M.outerSize(); ++r)
        for (SpMat::InnerIterator it(M, r); it; ++it)
            if (!symmetric || it.col() <= r) ++nnz;
    os << M.rows() << ' ' << M.cols() << ' ' << nnz << '\n';
    os << std::setprecision(17);
    for (int r = 0; r < M.outerSize(); ++r)
        for (SpMat::InnerIterator it(M, r); it; ++it)
            if (!symmetric || it.col() <= r) os << r + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

}  // namespace glt_stokes
