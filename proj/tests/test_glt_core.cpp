#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "glt_stokes/assembly.hpp"
#include "glt_stokes/dense.hpp"
#include "glt_stokes/symbols.hpp"
#include "glt_stokes/toeplitz.hpp"

using namespace glt_stokes;

namespace {

BlockSymbol<double> laplace1d() {
    BlockSymbol<double> f(1, 1, 1, true);
    f.add({0, 0}, 0, 0, 2.0);
    f.add({1, 0}, 0, 0, -1.0);
    return f;
}

Eigen::MatrixXd dst1(int N) {
    Eigen::MatrixXd S(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) S(i, j) = std::sqrt(2.0 / (N + 1)) * std::sin((i + 1) * (j + 1) * std::numbers::pi / (N + 1));
    return S;
}

}  // namespace

TEST(Toeplitz, OneLevelTridiagonal) {
    Eigen::MatrixXd T(toeplitz_from_symbol(laplace1d(), {4, 1}));
    Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(4, 4);
    for (int i = 0; i < 4; ++i) {
        ref(i, i) = 2;
        if (i) ref(i, i - 1) = ref(i - 1, i) = -1;
    }
    EXPECT_EQ(T, ref);
}

TEST(Toeplitz, TwoLevelLayout) {
    // scalar symbol with distinct coefficients on each offset of {-1,0,1}^2
    BlockSymbol<double> f(1, 1, 2);
    for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b) f.at({a, b}, 0, 0) = 10 * a + b + 100;
    Eigen::MatrixXd T(toeplitz_from_symbol(f, {2, 3}));
    ASSERT_EQ(T.rows(), 6);
    for (int i1 = 0; i1 < 2; ++i1)
        for (int i2 = 0; i2 < 3; ++i2)
            for (int j1 = 0; j1 < 2; ++j1)
                for (int j2 = 0; j2 < 3; ++j2) {
                    int k1 = i1 - j1, k2 = i2 - j2;
                    double want = std::abs(k2) <= 1 ? 10 * k1 + k2 + 100 : 0.0;
                    EXPECT_EQ(T(i1 * 3 + i2, j1 * 3 + j2), want);
                }
}

TEST(Toeplitz, HermitianSymbolGivesSymmetricMatrix) {
    for (int m : {2, 3, 5}) {
        Eigen::MatrixXd T(toeplitz_from_symbol(symbols().Ghat, {m, m + 1}));
        EXPECT_EQ((T - T.transpose()).cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(Toeplitz, RejectsBadDims) { EXPECT_THROW(toeplitz_from_symbol(laplace1d(), {0, 1}), std::invalid_argument); }

TEST(IndexMapTest, PerfectShuffle) {
    EXPECT_EQ(perm_block(1, 5).image, IndexMap::identity(5).image);
    EXPECT_EQ(perm_block(2, 2).image, (std::vector<int>{0, 2, 1, 3}));
    auto P = perm_block(3, 4);
    EXPECT_TRUE(P.is_permutation());
    EXPECT_EQ(P.compose(P.inverse()).image, IndexMap::identity(12).image);
    EXPECT_EQ(P.inverse().compose(P).image, IndexMap::identity(12).image);
}

TEST(IndexMapTest, SemiOrthogonal) {
    auto m = build_mesh(4);
    auto P = lattice_compression(m.velocity_dofs, layout_A(), {4, 4});
    EXPECT_TRUE(P.is_injective());
    SpMat M = P.matrix();
    Eigen::MatrixXd PtP = Eigen::MatrixXd(SpMat(M.transpose()) * M);
    EXPECT_TRUE(PtP.isIdentity(0.0));
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(P.source_size, 1, P.source_size);
    EXPECT_EQ(P.gather(P.scatter(x)), x);
}

// Pi_{N,2,1} turns diag(A, A) into the interleaved A (x) I_2
TEST(IndexMapTest, PiInterleavesBlockDiagonal) {
    Eigen::Matrix2d A;
    A << 1, 2, 3, 4;
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(4, 4);
    D.topLeftCorner(2, 2) = A;
    D.bottomRightCorner(2, 2) = A;
    auto Pi = perm_Pi(2, 2, 1);
    Eigen::MatrixXd out(permute(SpMat(D.sparseView()), Pi, Pi));
    Eigen::MatrixXd want = Eigen::MatrixXd::Zero(4, 4);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) want.block(2 * i, 2 * j, 2, 2) = A(i, j) * Eigen::Matrix2d::Identity();
    EXPECT_EQ(out, want);
}

TEST(IndexMapTest, ExtendThenCompressRoundTrip) {
    auto m = build_mesh(3);
    SpMat A = assemble_A(m, constant_viscosity());
    auto P = lattice_compression(m.velocity_dofs, layout_A(), {3, 3});
    SpMat T = toeplitz_from_symbol(symbols().Ghat, {3, 3});
    SpMat back = compress(extend(A, P, P, T), P, P);
    EXPECT_EQ((Eigen::MatrixXd(back) - Eigen::MatrixXd(A)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Tau, TridiagonalUnchangedAndSineSpectrum) {
    for (int N : {5, 50, 500}) {
        Eigen::MatrixXd T = tau_approx({-1, 2, -1}, N);
        Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(N, N);
        for (int i = 0; i < N; ++i) {
            ref(i, i) = 2;
            if (i) ref(i, i - 1) = ref(i - 1, i) = -1;
        }
        EXPECT_EQ(T, ref);
        Eigen::VectorXd e = eig_sym(T);
        std::sort(e.data(), e.data() + N);
        for (int j = 1; j <= N; ++j) EXPECT_NEAR(e[j - 1], 2 - 2 * std::cos(j * std::numbers::pi / (N + 1)), 1e-12);
    }
}

TEST(Tau, PentadiagonalCorners) {
    Eigen::MatrixXd T = tau_approx({1, -4, 6, -4, 1}, 6);
    EXPECT_EQ(T(0, 0), 5.0);
    EXPECT_EQ(T(5, 5), 5.0);
    EXPECT_EQ(T(1, 1), 6.0);
    Eigen::VectorXd e = eig_sym(T);
    std::sort(e.data(), e.data() + 6);
    std::vector<double> want;
    for (int j = 1; j <= 6; ++j) {
        double t = j * std::numbers::pi / 7;
        want.push_back(6 - 8 * std::cos(t) + 2 * std::cos(2 * t));
    }
    std::sort(want.begin(), want.end());
    for (int j = 0; j < 6; ++j) EXPECT_NEAR(e[j], want[j], 1e-12);
}

TEST(Tau, SymmetricBandsAreSineDiagonal) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int trial = 0; trial < 10; ++trial) {
        int b = 1 + trial % 4, N = 2 * b + 1 + 3 * trial;
        std::vector<double> band(2 * b + 1);
        for (int k = 0; k <= b; ++k) band[b + k] = band[b - k] = U(rng);
        Eigen::MatrixXd S = dst1(N);
        Eigen::VectorXd g(N);
        for (int j = 0; j < N; ++j) {
            double t = (j + 1) * std::numbers::pi / (N + 1);
            g[j] = band[b];
            for (int k = 1; k <= b; ++k) g[j] += 2 * band[b + k] * std::cos(k * t);
        }
        Eigen::MatrixXd R = S * g.asDiagonal() * S;
        EXPECT_LE((tau_approx(band, N) - R).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Tau, TransposeCompatibleForRandomBands) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-1, 1);
    std::uniform_int_distribution<int> B(1, 5);
    EXPECT_EQ(tau_approx({-1, 2, 0}, 4).transpose(), tau_approx({0, 2, -1}, 4));
    for (int trial = 0; trial < 100; ++trial) {
        int b = B(rng), N = 2 * b + 1 + trial % 7;
        std::vector<double> band(2 * b + 1);
        for (double& v : band) v = U(rng);
        std::vector<double> rev(band.rbegin(), band.rend());  // band of T^T
        EXPECT_EQ(tau_approx(band, N).transpose(), tau_approx(rev, N));
    }
}

TEST(Tau, RejectsOverlappingCorners) {
    EXPECT_THROW(tau_approx({1, -4, 6, -4, 1}, 4), std::invalid_argument);
    EXPECT_THROW(tau_approx({1, 2}, 4), std::invalid_argument);
}

// for a one-level symmetric scalar symbol the level-symmetrised tau is the
// plain tau matrix
TEST(Tau, LevelSymmetricMatchesScalarTau) {
    BlockSymbol<double> f(1, 1, 2, true);
    f.add({0, 0}, 0, 0, 6);
    f.add({0, 1}, 0, 0, -4);
    f.add({0, 2}, 0, 0, 1);
    Eigen::MatrixXd L(tau_level_symmetric(f, {1, 9}));
    EXPECT_LE((L - tau_approx({1, -4, 6, -4, 1}, 9)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Defect, ExactAndCorrupted) {
    SpMat T = toeplitz_from_symbol(symbols().Ghat, {3, 3});
    EXPECT_EQ(block_toeplitz_defect(T, symbols().Ghat, {3, 3}), 0);
    SpMat C = T;
    C.coeffRef(17, 17) += 1.0;
    EXPECT_EQ(block_toeplitz_defect(C, symbols().Ghat, {3, 3}), 1);
    EXPECT_THROW(block_toeplitz_defect(T, symbols().Ghat, {3, 4}), std::invalid_argument);
}

// On the n x n cell frame the boundary column x = 1/(4n) does not fit and is
// parked; the measured defect is 3n - 1 rows.
TEST(Defect, StiffnessOnCellFrame) {
    for (int n : {4, 8}) {
        auto m = build_mesh(n);
        SpMat A = assemble_A(m, constant_viscosity());
        auto P = lattice_compression(m.velocity_dofs, layout_A(), {n, n});
        SpMat T = toeplitz_from_symbol(symbols().Ghat, {n, n});
        int d = block_toeplitz_defect(extend(A, P, P, T), symbols().Ghat, {n, n});
        EXPECT_EQ(d, 3 * n - 1);
        EXPECT_LE(d, 16 * n);
    }
}

// one extra cell column on each side absorbs every boundary dof
TEST(Defect, StiffnessOnPaddedFrameIsExact) {
    for (int n : {2, 4, 8}) {
        auto m = build_mesh(n);
        SpMat A = assemble_A(m, constant_viscosity());
        Offset g{n + 1, n + 2};
        auto P = lattice_compression(m.velocity_dofs, layout_A(), g, {-4, 0}, false);
        SpMat T = toeplitz_from_symbol(symbols().Ghat, g);
        EXPECT_EQ(block_toeplitz_defect(extend(A, P, P, T), symbols().Ghat, g), 0);
    }
}

TEST(Defect, DivergenceCompressesExactly) {
    for (int n : {2, 4, 8}) {
        auto m = build_mesh(n);
        auto [Bx, By] = assemble_B(m);
        Offset g{n + 1, n + 1};
        auto Pu = lattice_compression(m.velocity_dofs, layout_B(), g, {0, 0}, false);
        auto Pp = lattice_compression(m.pressure_dofs, layout_pressure(), g, {0, 0}, false);
        Eigen::MatrixXd ex = Eigen::MatrixXd(compress(toeplitz_from_symbol(symbols().Gx, g), Pu, Pp)) - Eigen::MatrixXd(SpMat(Bx.transpose()));
        Eigen::MatrixXd ey = Eigen::MatrixXd(compress(toeplitz_from_symbol(symbols().Gy, g), Pu, Pp)) - Eigen::MatrixXd(SpMat(By.transpose()));
        EXPECT_LE(ex.cwiseAbs().maxCoeff(), 1e-15);
        EXPECT_LE(ey.cwiseAbs().maxCoeff(), 1e-15);
    }
}

TEST(ZeroDistribution, TrivialCases) {
    EXPECT_EQ(zero_distribution_fraction(Eigen::MatrixXd::Zero(5, 5), 1e-3), 0.0);
    EXPECT_EQ(zero_distribution_fraction(Eigen::MatrixXd::Identity(7, 7), 0.5), 1.0);
    EXPECT_THROW(zero_distribution_fraction(Eigen::MatrixXd::Identity(2, 2), 0.0), std::invalid_argument);
}

TEST(Layout, ParkingRefusedWhenDisallowed) {
    auto m = build_mesh(3);
    EXPECT_THROW(lattice_compression(m.velocity_dofs, layout_A(), {3, 3}, {0, 0}, false), std::invalid_argument);
}
