#include "test_support.hpp"

#include <gtest/gtest.h>

#include <complex>
#include <numbers>

using namespace gyrering;
using namespace gyrering::testing;

namespace {

RingConfig bidir(int n, double lambda) { return {n, Topology::Bidirectional, lambda}; }

}  // namespace

TEST(Symmetry, GeneratorOrders) {
    for (int n = 3; n <= 9; ++n) {
        const GroupGenerators g = generators(n);
        MatrixXd power = MatrixXd::Identity(4 * n, 4 * n);
        for (int k = 0; k < n; ++k) power = power * g.gamma;
        EXPECT_EQ(max_abs(power - MatrixXd::Identity(4 * n, 4 * n)), 0.0);
        EXPECT_EQ(max_abs(g.kappa_refl * g.kappa_refl - MatrixXd::Identity(4 * n, 4 * n)), 0.0);
        // Dihedral relation kappa gamma kappa = gamma^{-1}.
        EXPECT_EQ(max_abs(g.kappa_refl * g.gamma * g.kappa_refl - g.gamma.transpose()), 0.0);
    }
}

TEST(Symmetry, Equivariance) {
    const GyroParams p = d3_params();
    const GroupGenerators g3 = generators(3);
    const RingSystem bi = build_ring(p, bidir(3, -0.4));
    EXPECT_LE(max_abs(g3.gamma * bi.m_full - bi.m_full * g3.gamma), 1e-12);
    EXPECT_LE(max_abs(g3.kappa_refl * bi.m_full - bi.m_full * g3.kappa_refl), 1e-12);

    const GroupGenerators g4 = generators(4);
    const RingSystem uni = build_ring(p, {4, Topology::Unidirectional, 0.5});
    EXPECT_LE(max_abs(g4.gamma * uni.m_full - uni.m_full * g4.gamma), 1e-12);
    EXPECT_GT(max_abs(g4.kappa_refl * uni.m_full - uni.m_full * g4.kappa_refl), 0.1);
}

TEST(Symmetry, TransitionMatrixOrthogonalAndSymplectic) {
    for (int n = 3; n <= 32; ++n) {
        const IsotypicBasis b = transition_matrix(n);
        const MatrixXd& p = b.p_matrix;
        const MatrixXd id = MatrixXd::Identity(4 * n, 4 * n);
        EXPECT_LE(max_abs(p.transpose() * p - id), 1e-12) << "n=" << n;
        const MatrixXd j = symplectic_form(n);
        EXPECT_LE(max_abs(p.transpose() * j * p - j), 1e-10) << "n=" << n;
        EXPECT_EQ(b.blocks(), n);
    }
}

TEST(Symmetry, BlockLayout) {
    auto kinds = [](int n) {
        std::vector<int> js;
        for (const ColumnBlock& c : transition_matrix(n).block_index) js.push_back(c.j);
        return js;
    };
    EXPECT_EQ(kinds(3), (std::vector<int>{0, 1, 1}));
    EXPECT_EQ(kinds(4), (std::vector<int>{0, 1, 1, 2}));
    EXPECT_EQ(kinds(6), (std::vector<int>{0, 1, 1, 2, 2, 3}));
    const IsotypicBasis b = transition_matrix(6);
    EXPECT_EQ(b.block_index.back().kind, ColumnKind::Alternating);
    EXPECT_EQ(b.block_index[1].kind, ColumnKind::Imag);
    EXPECT_EQ(b.block_index[2].kind, ColumnKind::Real);
}

TEST(Symmetry, FourierPairingVanishes) {
    // Complex Fourier vectors zeta^{j s}: the bilinear pairing sum_s zeta^{s(j + l)} vanishes off j + l = 0 mod N.
    for (int n = 3; n <= 10; ++n)
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l) {
                std::complex<double> sum = 0.0;
                for (int s = 0; s < n; ++s)
                    sum += std::polar(1.0, 2.0 * std::numbers::pi * s * (j + l) / n);
                if ((j + l) % n != 0) EXPECT_LE(std::abs(sum), 1e-12);
                else EXPECT_NEAR(sum.real(), n, 1e-12);
            }
}

TEST(Symmetry, BlocksAreHamiltonianAndMatchCosineFormula) {
    const GyroParams p = d3_params();
    for (int n = 3; n <= 8; ++n) {
        const RingSystem sys = build_ring(p, bidir(n, 0.21));
        EXPECT_LE(max_abs(block(0, p, bidir(n, 0.21)) - (sys.m1 + 2.0 * sys.m2)), 1e-12);
        if (n % 2 == 0) EXPECT_LE(max_abs(block(n / 2, p, bidir(n, 0.21)) - (sys.m1 - 2.0 * sys.m2)), 1e-12);
    }
    const Matrix4d b52 = block(2, p, bidir(5, -0.3));
    EXPECT_LE(max_abs(b52.transpose() * j4() + j4() * b52), 1e-12);
    EXPECT_THROW(block(3, p, bidir(5, 0.1)), InputError);
    EXPECT_THROW(block(0, p, {5, Topology::Unidirectional, 0.1}), InputError);
}

TEST(Symmetry, ThreeGyroBlockDiagonal) {
    const GyroParams p = d3_params();
    const RingSystem sys = build_ring(p, bidir(3, -0.5));
    const MatrixXd& pm = transition_matrix(3).p_matrix;
    const MatrixXd d = pm.transpose() * sys.m_full * pm;
    EXPECT_LE(max_abs(d.block<4, 4>(0, 0) - (sys.m1 + 2.0 * sys.m2)), 1e-9);
    EXPECT_LE(max_abs(d.block<4, 4>(4, 4) - (sys.m1 - sys.m2)), 1e-9);
    EXPECT_LE(max_abs(d.block<4, 4>(8, 8) - (sys.m1 - sys.m2)), 1e-9);
}

TEST(Symmetry, BlockDiagonalizationRandomCouplings) {
    std::mt19937_64 rng(41);
    const GyroParams p = GyroParams::physical(1.4, 2.0, 1.0, 3.0);
    for (int n = 3; n <= 32; ++n)
        for (int trial = 0; trial < 20; ++trial) {
            const double lam = uniform(rng, -2.0, 2.0);
            const RingSystem sys = build_ring(p, bidir(n, lam));
            const IsotypicBasis b = transition_matrix(n);
            const MatrixXd d = b.p_matrix.transpose() * sys.m_full * b.p_matrix;
            const MatrixXd expected = block_diagonal_matrix(b, p, bidir(n, lam));
            EXPECT_LE(max_abs(d - expected) / max_abs(sys.m_full), 1e-10) << "n=" << n;
        }
}

TEST(Symmetry, BlockSpectrumUnionMatchesDense) {
    const GyroParams p = d3_params();
    for (int n : {3, 4, 7, 10}) {
        const RingSystem sys = build_ring(p, bidir(n, -0.2));
        const IsotypicBasis b = transition_matrix(n);
        const MatrixXd d = b.p_matrix.transpose() * sys.m_full * b.p_matrix;
        const std::vector<cplx> full = dense_eigen_oracle(sys.m_full);
        EXPECT_LE(spectrum_mismatch(dense_eigen_oracle(d), full, spectral_scale(full)), 1e-8);
    }
}

TEST(Symmetry, Multiplicities) {
    auto mult = [](int n) {
        std::vector<int> v;
        for (const BlockHamiltonian& b : quadratic_block_hamiltonian(n, d3_params(), -0.1))
            v.push_back(b.multiplicity);
        return v;
    };
    EXPECT_EQ(mult(3), (std::vector<int>{1, 2}));
    EXPECT_EQ(mult(4), (std::vector<int>{1, 2, 1}));
    EXPECT_EQ(mult(7), (std::vector<int>{1, 2, 2, 2}));
}

TEST(Symmetry, BlockEnergyMatchesRingQuadratic) {
    std::mt19937_64 rng(43);
    const GyroParams p = GyroParams::physical(0.8, 1.9, 1.0, 2.1);
    for (int n : {3, 4, 5, 6}) {
        const double lam = -0.3;
        const RingSystem sys = build_ring(p, bidir(n, lam));
        const IsotypicBasis b = transition_matrix(n);
        const auto blocks = quadratic_block_hamiltonian(n, p, lam);
        for (int trial = 0; trial < 100; ++trial) {
            const VectorXd z = random_vector(4 * n, rng, 1e-2);
            // Quadratic part through the loop-built oracle; quartic shrinks with the 1e-2 scale and is subtracted.
            double quartic = 0.0;
            for (int i = 0; i < n; ++i) quartic += std::pow(z(4 * i), 4) + std::pow(z(4 * i + 1), 4);
            const double quad = oracle_energy(p, n, lam, z) - 0.25 * p.mu * quartic;
            EXPECT_NEAR(block_quadratic_energy(b, blocks, z), quad, 1e-12 * std::abs(quad) + 1e-18);
            EXPECT_NEAR(quad, 0.5 * z.dot(sys.s_full() * z), 1e-12 * std::abs(quad) + 1e-18);
        }
    }
}
