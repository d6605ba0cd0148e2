#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "toeplitz.hpp"
#include "viscosity.hpp"

namespace glt_stokes {

using RatSymbol = BlockSymbol<Rat>;

struct StokesSymbolSet {
    RatSymbol Ghat_pre, Ghat;  // 8x8, 2-level, Hermitian
    RatSymbol g0, g1;          // 8x8, 1-level in theta2
    RatSymbol Gx, Gy;          // 8x2, 2-level, divergence frame
    RatSymbol gx0, gx1, gy0, gy1;
    RatSymbol GxA, GyA;        // Gx, Gy re-indexed into the velocity frame of Ghat
    RatSymbol saddle;          // 18x18 for mu == 1
};

namespace detail {

inline Rat R(long long p, long long q = 1) { return Rat(p, q); }

// Upper triangle of the A symbol in the velocity frame; 1-based (row, col).
// `pre` selects the single-element values, otherwise the assembled ones.
inline RatSymbol a_symbol(bool pre) {
    RatSymbol G(8, 8, 2, true);
    auto put = [&](int r, int c, Offset k, Rat full, Rat single) { G.add(k, r - 1, c - 1, pre ? single : full); };
    const Rat f = R(-4, 3), h = R(-2, 3);
    put(1, 1, {0, 0}, R(16, 3), R(8, 3));
    put(1, 3, {0, 0}, f, h);
    put(1, 4, {0, 1}, f, f);
    put(1, 7, {1, 0}, f, f);
    put(1, 8, {1, 1}, f, h);
    put(2, 2, {0, 0}, R(16, 3), R(8, 3));
    put(2, 3, {0, 0}, f, h);
    put(2, 4, {0, 0}, f, f);
    put(2, 7, {1, 0}, f, f);
    put(2, 8, {1, 0}, f, h);
    put(3, 3, {0, 0}, R(4), R(1));
    put(3, 5, {0, 0}, f, h);
    put(3, 6, {0, 1}, f, h);
    for (Offset k : {Offset{0, 0}, Offset{1, 0}, Offset{0, 1}, Offset{1, 1}})  // h3 = (1+e1)(1+e2)/6
        put(3, 8, k, R(1, 3), R(1, 6));
    put(4, 4, {0, 0}, R(16, 3), R(8, 3));
    put(4, 5, {0, 0}, f, f);
    put(4, 6, {0, 0}, f, f);
    put(5, 5, {0, 0}, R(16, 3), R(8, 3));
    put(5, 7, {0, 0}, f, f);
    put(5, 8, {0, 0}, f, h);
    put(6, 6, {0, 0}, R(16, 3), R(8, 3));
    put(6, 7, {0, -1}, f, f);
    put(6, 8, {0, 0}, f, h);
    put(7, 7, {0, 0}, R(16, 3), R(8, 3));
    put(8, 8, {0, 0}, R(4), R(1, 2));
    return G;
}

// one-level pieces of the pre-redistribution symbol, variable theta2 stored in k[0]
inline RatSymbol g0_symbol() {
    RatSymbol g(8, 8, 1, true);
    auto put = [&](int r, int c, int k, Rat v) { g.add({k, 0}, r - 1, c - 1, v); };
    const Rat f = R(-4, 3), h = R(-2, 3);
    put(1, 1, 0, R(8, 3));
    put(1, 3, 0, h);
    put(1, 4, 1, f);
    put(2, 2, 0, R(8, 3));
    put(2, 3, 0, h);
    put(2, 4, 0, f);
    put(3, 3, 0, R(1));
    put(3, 5, 0, h);
    put(3, 6, 1, h);
    put(3, 8, 0, R(1, 6));
    put(3, 8, 1, R(1, 6));
    put(4, 4, 0, R(8, 3));
    put(4, 5, 0, f);
    put(4, 6, 0, f);
    put(5, 5, 0, R(8, 3));
    put(5, 7, 0, f);
    put(5, 8, 0, h);
    put(6, 6, 0, R(8, 3));
    put(6, 7, -1, f);
    put(6, 8, 0, h);
    put(7, 7, 0, R(8, 3));
    put(8, 8, 0, R(1, 2));
    return g;
}

inline RatSymbol g1_symbol() {
    RatSymbol g(8, 8, 1, false);
    auto put = [&](int r, int c, int k, Rat v) { g.at({k, 0}, r - 1, c - 1) += v; };
    put(1, 7, 0, R(-4, 3));
    put(1, 8, 1, R(-2, 3));
    // not -2/3: this edge pair shares a single element, and only -4/3
    // reproduces both the 2-level symbol and the assembly
    put(2, 7, 0, R(-4, 3));
    put(2, 8, 0, R(-2, 3));
    put(3, 8, 0, R(1, 6));
    put(3, 8, 1, R(1, 6));
    return g;
}

// rows: 8 velocity classes, cols: 2 pressure classes; four coefficient
// matrices at offsets (0,0), (-1,0), (0,-1), (-1,-1)
using Col8x2 = std::array<std::array<Rat, 2>, 8>;

inline RatSymbol divergence_symbol(const std::array<Col8x2, 4>& C) {
    RatSymbol G(8, 2, 2, false);
    const Offset ks[4] = {{0, 0}, {-1, 0}, {0, -1}, {-1, -1}};
    for (int q = 0; q < 4; ++q)
        for (int r = 0; r < 8; ++r)
            for (int c = 0; c < 2; ++c)
                if (C[q][r][c] != Rat(0)) G.at(ks[q], r, c) = C[q][r][c];
    return G;
}

inline RatSymbol divergence_piece(const Col8x2& C0, const Col8x2& C1) {
    RatSymbol g(8, 2, 1, false);
    for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 2; ++c) {
            if (C0[r][c] != Rat(0)) g.at({0, 0}, r, c) = C0[r][c];
            if (C1[r][c] != Rat(0)) g.at({-1, 0}, r, c) = C1[r][c];
        }
    return g;
}

inline std::array<Col8x2, 4> gx_coefficients() {
    const Rat a = R(1, 6), b = R(1, 12), z = 0;
    Col8x2 C0{{{-a, a}, {-b, a}, {z, z}, {z, z}, {-b, -a}, {z, -a}, {z, -a}, {z, z}}};
    Col8x2 C1{{{-b, z}, {-a, z}, {z, z}, {-a, z}, {z, z}, {-b, z}, {z, z}, {z, z}}};
    Col8x2 C2{{{b, z}, {z, z}, {z, z}, {z, z}, {a, z}, {b, z}, {z, a}, {z, z}}};
    Col8x2 C3{{{z, z}, {b, z}, {z, z}, {a, z}, {b, z}, {a, z}, {z, z}, {z, z}}};
    return {C0, C1, C2, C3};
}

inline std::array<Col8x2, 4> gy_coefficients() {
    const Rat a = R(1, 6), b = R(1, 12), z = 0;
    Col8x2 C0{{{-a, a}, {-b, -a}, {z, z}, {z, -a}, {-b, a}, {z, -a}, {z, z}, {z, z}}};
    Col8x2 C1{{{b, z}, {a, z}, {z, z}, {z, a}, {z, z}, {b, z}, {z, z}, {z, z}}};
    Col8x2 C2{{{-b, z}, {z, z}, {z, z}, {z, z}, {-a, z}, {-b, z}, {-a, z}, {z, z}}};
    Col8x2 C3{{{z, z}, {b, z}, {z, z}, {z, z}, {b, z}, {a, z}, {a, z}, {z, z}}};
    return {C0, C1, C2, C3};
}

}  // namespace detail

// Re-index the rows of a symbol from one velocity cell layout to another.
// Each target class is matched with the source class of equal residue mod 4;
// the cell shift d becomes the phase e^{-i d.theta} (level 1 = y, level 2 = x).
inline RatSymbol realign_rows(const RatSymbol& G, const CellLayout& from, const CellLayout& to) {
    RatSymbol out(G.s1, G.s2, G.levels, false);
    for (int a = 0; a < to.size(); ++a) {
        int src = -1;
        Offset d{};
        for (int b = 0; b < from.size(); ++b) {
            int dx = to.offsets[a].x - from.offsets[b].x, dy = to.offsets[a].y - from.offsets[b].y;
            if (dx % 4 == 0 && dy % 4 == 0) {
                src = b;
                d = {dy / 4, dx / 4};
                break;
            }
        }
        if (src < 0) throw std::invalid_argument("realign_rows: layouts have different classes");
        for (const auto& [k, C] : G.coeffs)
            for (int c = 0; c < G.s2; ++c) {
                Rat v = C[std::size_t(src) * G.s2 + c];
                if (v != Rat(0)) out.at({k[0] - d[0], k[1] - d[1]}, a, c) = v;
            }
    }
    return out;
}

// [[G, 0, Gx], [0, G, Gy], [Gx^H, Gy^H, 0]] in one frame
inline RatSymbol saddle_symbol(const RatSymbol& G, const RatSymbol& GxA, const RatSymbol& GyA) {
    RatSymbol S(18, 18, 2, true);
    for (const auto& [k, C] : G.coeffs)
        for (int r = 0; r < 8; ++r)
            for (int c = 0; c < 8; ++c) {
                Rat v = C[std::size_t(r) * 8 + c];
                if (v == Rat(0)) continue;
                S.at(k, r, c) += v;
                S.at(k, 8 + r, 8 + c) += v;
            }
    for (int q = 0; q < 2; ++q)
        for (const auto& [k, C] : (q ? GyA : GxA).coeffs)
            for (int r = 0; r < 8; ++r)
                for (int c = 0; c < 2; ++c) {
                    Rat v = C[std::size_t(r) * 2 + c];
                    if (v != Rat(0)) S.add(k, 8 * q + r, 16 + c, v);
                }
    return S;
}

inline StokesSymbolSet build_symbol_set() {
    StokesSymbolSet s;
    s.Ghat_pre = detail::a_symbol(true);
    s.Ghat = detail::a_symbol(false);
    s.g0 = detail::g0_symbol();
    s.g1 = detail::g1_symbol();
    auto cx = detail::gx_coefficients(), cy = detail::gy_coefficients();
    s.Gx = detail::divergence_symbol(cx);
    s.Gy = detail::divergence_symbol(cy);
    s.gx0 = detail::divergence_piece(cx[0], cx[1]);
    s.gx1 = detail::divergence_piece(cx[2], cx[3]);
    s.gy0 = detail::divergence_piece(cy[0], cy[1]);
    s.gy1 = detail::divergence_piece(cy[2], cy[3]);
    s.GxA = realign_rows(s.Gx, layout_B(), layout_A());
    s.GyA = realign_rows(s.Gy, layout_B(), layout_A());
    s.saddle = saddle_symbol(s.Ghat, s.GxA, s.GyA);
    for (const RatSymbol* h : {&s.Ghat, &s.Ghat_pre, &s.g0, &s.saddle})
        if (!h->check_hermitian()) throw std::logic_error("symbol table fails C_{-k} = C_k^H");
    return s;
}

inline const StokesSymbolSet& symbols() {
    static const StokesSymbolSet s = build_symbol_set();
    return s;
}

// g0(t2) + g1(t2) e^{i t1} + g1(t2)^H e^{-i t1}, lifted to two levels exactly
inline RatSymbol lift_tridiagonal(const RatSymbol& g0, const RatSymbol& g1) {
    RatSymbol out(8, 8, 2, false);
    for (const auto& [k, C] : g0.coeffs)
        for (int r = 0; r < 8; ++r)
            for (int c = 0; c < 8; ++c)
                if (C[r * 8 + c] != Rat(0)) out.at({0, k[0]}, r, c) += C[r * 8 + c];
    for (const auto& [k, C] : g1.coeffs)
        for (int r = 0; r < 8; ++r)
            for (int c = 0; c < 8; ++c) {
                Rat v = C[r * 8 + c];
                if (v == Rat(0)) continue;
                out.at({1, k[0]}, r, c) += v;
                out.at({-1, -k[0]}, c, r) += v;
            }
    return out;
}

// G_x(t1, t2) = gx0(t1) + gx1(t1) e^{-i t2}, lifted exactly
inline RatSymbol lift_divergence(const RatSymbol& p0, const RatSymbol& p1) {
    RatSymbol out(8, 2, 2, false);
    for (int q = 0; q < 2; ++q)
        for (const auto& [k, C] : (q ? p1 : p0).coeffs)
            for (int r = 0; r < 8; ++r)
                for (int c = 0; c < 2; ++c)
                    if (C[r * 2 + c] != Rat(0)) out.at({k[0], -q}, r, c) += C[r * 2 + c];
    return out;
}

template <class T>
bool same_symbol(const BlockSymbol<T>& a, const BlockSymbol<T>& b) {
    if (a.s1 != b.s1 || a.s2 != b.s2) return false;
    auto covers = [](const BlockSymbol<T>& x, const BlockSymbol<T>& y) {
        for (const auto& [k, C] : x.coeffs)
            for (int r = 0; r < x.s1; ++r)
                for (int c = 0; c < x.s2; ++c)
                    if (C[std::size_t(r) * x.s2 + c] != y.get(k, r, c)) return false;
        return true;
    };
    return covers(a, b) && covers(b, a);
}

inline Eigen::MatrixXcd eval_A_symbol(double x, double y, double t1, double t2, const ViscosityField& mu) {
    return mu(x, y) * symbols().Ghat.eval(t1, t2);
}

inline std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> eval_B_symbols(double t1, double t2) {
    return {symbols().Gx.eval(t1, t2), symbols().Gy.eval(t1, t2)};
}

inline Eigen::MatrixXcd eval_saddle_symbol(double x, double y, double t1, double t2, const ViscosityField& mu) {
    Eigen::MatrixXcd S = symbols().saddle.eval(t1, t2);
    S.topLeftCorner(16, 16) *= mu(x, y);
    return S;
}

}  // namespace glt_stokes
