#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <boost/rational.hpp>
#include <complex>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "assembly.hpp"
#include "dense.hpp"
#include "mesh.hpp"

namespace glt_stokes {

using Rat = boost::rational<long long>;
using Offset = std::array<int, 2>;  // (k1, k2); k1 pairs with theta1, the outer level
using cplx = std::complex<double>;

inline cplx to_complex(const Rat& r) { return {boost::rational_cast<double>(r), 0.0}; }
inline cplx to_complex(double r) { return {r, 0.0}; }
inline cplx to_complex(const cplx& z) { return z; }
inline Rat conj_value(const Rat& r) { return r; }
inline double conj_value(double r) { return r; }
inline cplx conj_value(const cplx& z) { return std::conj(z); }

// Matrix-valued trigonometric polynomial f(theta) = sum_k C_k e^{i k.theta}.
template <class T>
struct BlockSymbol {
    int s1 = 1, s2 = 1, levels = 2;
    bool hermitian = false;
    std::map<Offset, std::vector<T>> coeffs;  // row-major s1 x s2

    BlockSymbol() = default;
    BlockSymbol(int rows, int cols, int lv, bool herm = false) : s1(rows), s2(cols), levels(lv), hermitian(herm) {}

    T& at(Offset k, int r, int c) {
        auto& C = coeffs[k];
        if (C.empty()) C.assign(std::size_t(s1) * s2, T(0));
        return C[std::size_t(r) * s2 + c];
    }
    T get(Offset k, int r, int c) const {
        auto it = coeffs.find(k);
        return it == coeffs.end() ? T(0) : it->second[std::size_t(r) * s2 + c];
    }
    // C_k(r,c) += v and, for Hermitian symbols, the mirrored C_{-k}(c,r)
    void add(Offset k, int r, int c, T v) {
        at(k, r, c) += v;
        if (hermitian && !(k == Offset{0, 0} && r == c)) at({-k[0], -k[1]}, c, r) += conj_value(v);
    }

    Eigen::MatrixXcd eval(double t1, double t2 = 0.0) const {
        Eigen::MatrixXcd F = Eigen::MatrixXcd::Zero(s1, s2);
        for (const auto& [k, C] : coeffs) {
            cplx ph = std::polar(1.0, k[0] * t1 + k[1] * t2);
            for (int r = 0; r < s1; ++r)
                for (int c = 0; c < s2; ++c) F(r, c) += to_complex(C[std::size_t(r) * s2 + c]) * ph;
        }
        return F;
    }

    // C_{-k} = C_k^H, exactly
    bool check_hermitian() const {
        if (s1 != s2) return false;
        for (const auto& [k, C] : coeffs)
            for (int r = 0; r < s1; ++r)
                for (int c = 0; c < s2; ++c)
                    if (get({-k[0], -k[1]}, c, r) != conj_value(C[std::size_t(r) * s2 + c])) return false;
        return true;
    }

    template <class U>
    BlockSymbol<U> cast() const {
        BlockSymbol<U> out(s1, s2, levels, hermitian);
        for (const auto& [k, C] : coeffs) {
            auto& D = out.coeffs[k];
            D.resize(C.size());
            for (std::size_t i = 0; i < C.size(); ++i) D[i] = U(to_complex(C[i]).real());
        }
        return out;
    }
};

namespace detail {
template <class T>
double real_coeff(const T& v) {
    cplx z = to_complex(v);
    if (z.imag() != 0.0) throw std::invalid_argument("toeplitz_from_symbol: complex coefficient");
    return z.real();
}
}  // namespace detail

// Block (r, c) of the d-level Toeplitz matrix holds C_{r-c}; cells are ordered
// with level 1 outermost. Offsets beyond the matrix are dropped.
template <class T>
SpMat toeplitz_from_symbol(const BlockSymbol<T>& sym, Offset dims) {
    if (sym.levels == 1) dims[1] = 1;
    const int n1 = dims[0], n2 = dims[1];
    if (n1 < 1 || n2 < 1) throw std::invalid_argument("toeplitz_from_symbol: dims must be positive");
    Triplets trip;
    for (const auto& [k, C] : sym.coeffs) {
        for (int i1 = 0; i1 < n1; ++i1) {
            int j1 = i1 - k[0];
            if (j1 < 0 || j1 >= n1) continue;
            for (int i2 = 0; i2 < n2; ++i2) {
                int j2 = i2 - k[1];
                if (j2 < 0 || j2 >= n2) continue;
                int rc = i1 * n2 + i2, cc = j1 * n2 + j2;
                for (int r = 0; r < sym.s1; ++r)
                    for (int c = 0; c < sym.s2; ++c) {
                        double v = detail::real_coeff(C[std::size_t(r) * sym.s2 + c]);
                        if (v != 0.0) trip.emplace_back(rc * sym.s1 + r, cc * sym.s2 + c, v);
                    }
            }
        }
    }
    SpMat M(sym.s1 * n1 * n2, sym.s2 * n1 * n2);
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

// Injective assignment [0, source) -> [0, target); as a matrix P (target x
// source) with P(image[j], j) = 1, so P^T P = I.
struct IndexMap {
    int source_size = 0, target_size = 0;
    std::vector<int> image;

    static IndexMap identity(int n) {
        IndexMap m{n, n, std::vector<int>(n)};
        std::iota(m.image.begin(), m.image.end(), 0);
        return m;
    }

    bool is_injective() const {
        std::vector<char> hit(target_size, 0);
        for (int v : image) {
            if (v < 0 || v >= target_size || hit[v]) return false;
            hit[v] = 1;
        }
        return int(image.size()) == source_size;
    }
    bool is_permutation() const { return source_size == target_size && is_injective(); }

    IndexMap inverse() const {
        if (!is_permutation()) throw std::logic_error("IndexMap::inverse needs a permutation");
        IndexMap inv{target_size, source_size, std::vector<int>(source_size)};
        for (int j = 0; j < source_size; ++j) inv.image[image[j]] = j;
        return inv;
    }

    // (this o other)(j) = image[other.image[j]]
    IndexMap compose(const IndexMap& other) const {
        if (other.target_size != source_size) throw std::invalid_argument("IndexMap::compose size mismatch");
        IndexMap m{other.source_size, target_size, std::vector<int>(other.source_size)};
        for (int j = 0; j < other.source_size; ++j) m.image[j] = image[other.image[j]];
        return m;
    }

    // P (x) I_r
    IndexMap kron_identity(int r) const {
        IndexMap m{source_size * r, target_size * r, std::vector<int>(std::size_t(source_size) * r)};
        for (int q = 0; q < source_size; ++q)
            for (int t = 0; t < r; ++t) m.image[std::size_t(q) * r + t] = image[q] * r + t;
        return m;
    }

    // y = P x
    template <class V>
    V scatter(const V& x) const {
        V y = V::Zero(target_size);
        for (int j = 0; j < source_size; ++j) y[image[j]] = x[j];
        return y;
    }
    // x = P^T y
    template <class V>
    V gather(const V& y) const {
        V x(source_size);
        for (int j = 0; j < source_size; ++j) x[j] = y[image[j]];
        return x;
    }

    SpMat matrix() const {
        Triplets trip;
        for (int j = 0; j < source_size; ++j) trip.emplace_back(image[j], j, 1.0);
        SpMat P(target_size, source_size);
        P.setFromTriplets(trip.begin(), trip.end());
        return P;
    }
};

// P_{k1,k2} = sum_i e_i^{(k2)} (x) I_{k1} (x) e_i^{(k2)T}: the perfect shuffle
// sending index a*k2 + i to i*k1 + a.
inline IndexMap perm_block(int k1, int k2) {
    if (k1 < 1 || k2 < 1) throw std::invalid_argument("perm_block: sizes must be positive");
    IndexMap m{k1 * k2, k1 * k2, std::vector<int>(std::size_t(k1) * k2)};
    for (int a = 0; a < k1; ++a)
        for (int i = 0; i < k2; ++i) m.image[std::size_t(a) * k2 + i] = i * k1 + a;
    return m;
}

// Pi_{n,s,r} = P_{s,N(n)} (x) I_r
inline IndexMap perm_Pi(int N, int s, int r) {
    if (N < 1 || s < 1 || r < 1) throw std::invalid_argument("perm_Pi: sizes must be positive");
    return perm_block(s, N).kron_identity(r);
}

// Y = P_rows^T X P_cols: restrict a large matrix to the mapped rows/columns
inline SpMat compress(const SpMat& X, const IndexMap& rows, const IndexMap& cols) {
    if (X.rows() != rows.target_size || X.cols() != cols.target_size)
        throw std::invalid_argument("compress: size mismatch");
    std::vector<int> rinv(rows.target_size, -1), cinv(cols.target_size, -1);
    for (int j = 0; j < rows.source_size; ++j) rinv[rows.image[j]] = j;
    for (int j = 0; j < cols.source_size; ++j) cinv[cols.image[j]] = j;
    Triplets trip;
    for (int r = 0; r < X.outerSize(); ++r) {
        if (rinv[r] < 0) continue;
        for (SpMat::InnerIterator it(X, r); it; ++it)
            if (cinv[it.col()] >= 0) trip.emplace_back(rinv[r], cinv[it.col()], it.value());
    }
    SpMat Y(rows.source_size, cols.source_size);
    Y.setFromTriplets(trip.begin(), trip.end());
    return Y;
}

inline SpMat permute(const SpMat& X, const IndexMap& rows, const IndexMap& cols) {
    return compress(X, rows.inverse(), cols.inverse());
}

// Embed A into the structured frame of T: the mapped block becomes P A P^T,
// every inserted row/column keeps the value T prescribes there.
inline SpMat extend(const SpMat& A, const IndexMap& rows, const IndexMap& cols, const SpMat& T) {
    if (A.rows() != rows.source_size || A.cols() != cols.source_size || T.rows() != rows.target_size ||
        T.cols() != cols.target_size)
        throw std::invalid_argument("extend: size mismatch");
    std::vector<char> rin(T.rows(), 0), cin(T.cols(), 0);
    for (int v : rows.image) rin[v] = 1;
    for (int v : cols.image) cin[v] = 1;
    Triplets trip;
    for (int r = 0; r < T.outerSize(); ++r)
        for (SpMat::InnerIterator it(T, r); it; ++it)
            if (!(rin[r] && cin[it.col()])) trip.emplace_back(r, it.col(), it.value());
    for (int r = 0; r < A.outerSize(); ++r)
        for (SpMat::InnerIterator it(A, r); it; ++it)
            trip.emplace_back(rows.image[r], cols.image[it.col()], it.value());
    SpMat E(T.rows(), T.cols());
    E.setFromTriplets(trip.begin(), trip.end());
    return E;
}

// tau(T) = T - H_NW - H_SE for the banded Toeplitz T(i,j) = t_{i-j},
// band[k + b] = t_k. The Hankel corrections are split by triangle: strictly
// lower entries take t_{+s}, strictly upper t_{-s}, diagonal the average, so
// tau(T^T) = tau(T)^T; for symmetric bands this is the classical corner
// correction diagonalised by DST-I.
inline Eigen::MatrixXd tau_approx(const std::vector<double>& band, int N) {
    if (band.size() % 2 != 1) throw std::invalid_argument("tau_approx: band needs odd length 2b+1");
    const int b = int(band.size()) / 2;
    if (N <= 2 * b) throw std::invalid_argument("tau_approx: need N > 2b, got N=" + std::to_string(N));
    auto t = [&](int k) { return (k < -b || k > b) ? 0.0 : band[std::size_t(k + b)]; };
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = std::max(0, i - b); j <= std::min(N - 1, i + b); ++j) T(i, j) = t(i - j);
    auto hankel = [&](int i, int j, int s) {  // 0-based (i, j), index magnitude s
        if (i > j) return t(s);
        if (i < j) return t(-s);
        return 0.5 * (t(s) + t(-s));
    };
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            int s_nw = (i + 1) + (j + 1);
            if (s_nw <= b) T(i, j) -= hankel(i, j, s_nw);
            int s_se = 2 * N + 2 - s_nw;
            if (s_se <= b) T(i, j) -= hankel(i, j, s_se);
        }
    return T;
}

// tau of the single-diagonal shift Z_k (ones where i - j = k)
inline Eigen::MatrixXd tau_shift(int k, int N) {
    int b = std::abs(k);
    std::vector<double> band(2 * b + 1, 0.0);
    band[std::size_t(k + b)] = 1.0;
    return tau_approx(band, std::max(N, 2 * b + 1)).topLeftCorner(N, N);
}

// Level-symmetrised tau of a 2-level block Toeplitz matrix:
// sum_k S(k1) (x) S(k2) (x) C_k with S(k) = (tau(Z_k) + tau(Z_{-k})) / 2.
// Every S(k) lies in the DST-I algebra with eigenvalues cos(k theta_j).
template <class T>
SpMat tau_level_symmetric(const BlockSymbol<T>& sym, Offset dims) {
    const int n1 = dims[0], n2 = dims[1];
    auto S = [](int k, int N) -> SpMat {
        Eigen::MatrixXd M = 0.5 * (tau_shift(k, N) + tau_shift(-k, N));
        return M.sparseView(1.0, 1e-15);
    };
    SpMat out(sym.s1 * n1 * n2, sym.s2 * n1 * n2);
    for (const auto& [k, C] : sym.coeffs) {
        SpMat S1 = S(k[0], n1), S2 = S(k[1], n2);
        Triplets trip;
        for (int a = 0; a < S1.outerSize(); ++a)
            for (SpMat::InnerIterator i1(S1, a); i1; ++i1)
                for (int b = 0; b < S2.outerSize(); ++b)
                    for (SpMat::InnerIterator i2(S2, b); i2; ++i2)
                        for (int r = 0; r < sym.s1; ++r)
                            for (int c = 0; c < sym.s2; ++c) {
                                double v = detail::real_coeff(C[std::size_t(r) * sym.s2 + c]);
                                if (v == 0.0) continue;
                                int rc = a * n2 + b, cc = int(i1.col()) * n2 + int(i2.col());
                                trip.emplace_back(rc * sym.s1 + r, cc * sym.s2 + c, v * i1.value() * i2.value());
                            }
        SpMat term(out.rows(), out.cols());
        term.setFromTriplets(trip.begin(), trip.end());
        out += term;
    }
    out.prune(1.0, 1e-15);
    return out;
}

// number of rows of A differing (any entry, abs tol) from T(sym)
template <class T>
int block_toeplitz_defect(const SpMat& A, const BlockSymbol<T>& sym, Offset dims, double tol = 1e-12) {
    SpMat Tm = toeplitz_from_symbol(sym, dims);
    if (A.rows() != Tm.rows() || A.cols() != Tm.cols())
        throw std::invalid_argument("block_toeplitz_defect: matrix is " + std::to_string(A.rows()) + "x" +
                                    std::to_string(A.cols()) + ", symbol frame is " + std::to_string(Tm.rows()) +
                                    "x" + std::to_string(Tm.cols()));
    SpMat D = A - Tm;
    int rows = 0;
    for (int r = 0; r < D.outerSize(); ++r)
        for (SpMat::InnerIterator it(D, r); it; ++it)
            if (std::abs(it.value()) > tol) {
                ++rows;
                break;
            }
    return rows;
}

// fraction of singular values above eps
inline double zero_distribution_fraction(const Eigen::MatrixXd& M, double eps) {
    if (!(eps > 0)) throw std::invalid_argument("zero_distribution_fraction: eps must be positive");
    Eigen::VectorXd s = singular_values(M);
    if (s.size() == 0) return 0.0;
    return double((s.array() > eps).count()) / double(s.size());
}

// ---- cell layouts -------------------------------------------------------

// Lattice offsets (units 1/(4n)) of the dof classes inside one 4x4 cell.
struct CellLayout {
    std::vector<Node> offsets;
    int size() const { return int(offsets.size()); }
};

// velocity frame of the A symbol
inline CellLayout layout_A() { return {{{1, 1}, {3, 1}, {2, 2}, {4, 2}, {3, 3}, {5, 3}, {2, 4}, {4, 4}}}; }
// velocity frame of the divergence symbols
inline CellLayout layout_B() { return {{{1, 1}, {1, 3}, {2, 2}, {2, 4}, {3, 1}, {3, 3}, {4, 2}, {4, 4}}}; }
inline CellLayout layout_pressure() { return {{{0, 0}, {2, 2}}}; }

// Map lattice dofs into the slots of an (m1 x m2)-cell frame whose cell (0,0)
// starts at `origin`; slot = (cy*m2 + cx)*s + class. Dofs outside the frame
// are parked, when allowed, in the wrapped-around cell of their class.
inline IndexMap lattice_compression(const std::vector<Node>& dofs, const CellLayout& L, Offset grid,
                                    Node origin = {0, 0}, bool park = true) {
    const int m1 = grid[0], m2 = grid[1], s = L.size();
    IndexMap map{int(dofs.size()), m1 * m2 * s, std::vector<int>(dofs.size(), -1)};
    std::vector<char> used(map.target_size, 0);
    std::vector<int> outside;
    auto floordiv = [](int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); };
    auto wrap = [](int a, int m) { return ((a % m) + m) % m; };
    for (int j = 0; j < int(dofs.size()); ++j) {
        Node p = dofs[j];
        for (int a = 0; a < s; ++a) {
            int dx = p.x - origin.x - L.offsets[a].x, dy = p.y - origin.y - L.offsets[a].y;
            if (((dx % 4) + 4) % 4 || ((dy % 4) + 4) % 4) continue;
            int cx = floordiv(dx, 4), cy = floordiv(dy, 4);
            if (cx >= 0 && cx < m2 && cy >= 0 && cy < m1) {
                int slot = (cy * m2 + cx) * s + a;
                map.image[j] = slot;
                used[slot] = 1;
            } else {
                map.image[j] = -(a + 1);
                outside.push_back(j);
            }
            break;
        }
        if (map.image[j] == -1) throw std::invalid_argument("lattice_compression: node fits no dof class");
    }
    for (int j : outside) {
        if (!park) throw std::invalid_argument("lattice_compression: dof outside the cell frame");
        int a = -map.image[j] - 1;
        Node p = dofs[j];
        int cx = wrap(floordiv(p.x - origin.x - L.offsets[a].x, 4), m2);
        int cy = wrap(floordiv(p.y - origin.y - L.offsets[a].y, 4), m1);
        int slot = (cy * m2 + cx) * s + a;
        if (used[slot]) throw std::logic_error("lattice_compression: parking slot already taken");
        map.image[j] = slot;
        used[slot] = 1;
    }
    return map;
}

}  // namespace glt_stokes
