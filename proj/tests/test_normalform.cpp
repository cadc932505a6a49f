#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace gyrering;
using namespace gyrering::testing;

namespace {

double symplectic_residual(const MatrixXd& q) {
    const int n = static_cast<int>(q.rows()) / 4;
    const MatrixXd j = symplectic_form(n);
    return max_abs(q.transpose() * j * q - j);
}

}  // namespace

TEST(NormalForm, NormalMatrixPatterns) {
    const Matrix4d g = generic_normal_matrix(0.3, 2.0);
    EXPECT_EQ(g(0, 2), 0.3);
    EXPECT_EQ(g(2, 0), -0.3);
    EXPECT_EQ(g(1, 3), 2.0);
    EXPECT_EQ(g(3, 1), -2.0);
    EXPECT_EQ(g.cwiseAbs().sum(), 4.6);
    const Matrix4d c = critical_normal_matrix(5.0);
    EXPECT_EQ(c(0, 2), 5.0);
    EXPECT_EQ(c(2, 0), -5.0);
    EXPECT_EQ(c(3, 1), -1.0);
    EXPECT_EQ(c.cwiseAbs().sum(), 11.0);
    // Both are Hamiltonian for J4.
    EXPECT_EQ(max_abs(g.transpose() * j4() + j4() * g), 0.0);
    EXPECT_EQ(max_abs(c.transpose() * j4() + j4() * c), 0.0);
}

TEST(NormalForm, BlockNormalizersAreSymplecticConjugations) {
    for (const GyroParams& p : {d3_params(), moderate_params(), GyroParams::physical(2.0, 1.5, 1.0, 0.7)})
        for (int n = 3; n <= 12; ++n)
            for (int j = 0; j <= n / 2; ++j) {
                const BlockNormalizer b = block_normalizer(j, n, p);
                const Matrix4d& q = b.q_matrix;
                EXPECT_LE(max_abs(q.transpose() * j4() * q - j4()), 1e-10) << "n=" << n << " j=" << j;
                const Matrix4d conj = q.inverse() * b.block * q;
                EXPECT_LE(max_abs(conj - b.normal_matrix) / max_abs(b.block), 1e-9) << "n=" << n << " j=" << j;
                EXPECT_EQ(b.critical, j == n / 2);
                // Frequencies of the normal matrix are those of the block.
                const std::vector<cplx> ev = dense_eigen_oracle(b.block);
                if (!b.critical) {
                    EXPECT_LE(worst_nearest({cplx(0, b.nu_minus), cplx(0, b.nu_plus)}, ev, spectral_scale(ev)), 1e-8);
                    EXPECT_LT(b.nu_minus, b.nu_plus);
                } else {
                    EXPECT_LE(worst_nearest({cplx(0, b.psi)}, ev, spectral_scale(ev)), 1e-8);
                }
            }
}

TEST(NormalForm, ThreeGyroFrequencies) {
    const GyroParams p = d3_params();
    const double k = p.kappa, w = p.omega;
    const BlockNormalizer b0 = block_normalizer(0, 3, p);
    const double nu2 = std::sqrt(2 * w * w + k + 2 * w * std::sqrt(w * w + k));
    EXPECT_NEAR(b0.nu_plus, nu2, 1e-10 * nu2);
    EXPECT_NEAR(b0.nu_minus, k / nu2, 1e-10 * k / nu2);
    const BlockNormalizer b1 = block_normalizer(1, 3, p);
    EXPECT_NEAR(b1.psi, std::sqrt(k + 4 * w * w), 1e-12 * b1.psi);
    EXPECT_EQ(b1.source, NormalizerSource::ClosedForm);
    EXPECT_DOUBLE_EQ(b1.lambda_star, -k / 3.0);
}

TEST(NormalForm, ClosedFormCriticalMatchesMassScaling) {
    for (double m : {0.5, 1.0, 3.0}) {
        const GyroParams p = GyroParams::physical(m, 1.7, 1.0, 0.9);
        for (int n : {3, 4, 5, 6}) {
            const BlockNormalizer b = block_normalizer(n / 2, n, p);
            EXPECT_NEAR(b.psi, std::sqrt((p.kappa + 4 * m * p.omega * p.omega) / m), 1e-12);
            const NormalizerCheck c = check_normalizer(closed_form_critical_q(p), b.block, b.normal_matrix);
            EXPECT_TRUE(c.passes(1e-10)) << c.symplectic << " " << c.conjugation;
        }
    }
}

TEST(NormalForm, GenericClosedFormIsRejectedInFavourOfEigenvectors) {
    const GyroParams p = d3_params();
    for (int n : {3, 5, 8}) {
        const BlockNormalizer b = block_normalizer(0, n, p);
        EXPECT_EQ(b.source, NormalizerSource::Eigenvector);
        EXPECT_GT(std::max(b.closed_form_symplectic_residual, b.closed_form_conjugation_residual), 1e-10);
    }
}

TEST(NormalForm, DisplayedThreeGyroVariants) {
    const std::vector<DisplayedVariant> v = d3_displayed_variants(d3_params());
    ASSERT_EQ(v.size(), 4u);
    EXPECT_EQ(v[0].name, "Q0 display");
    EXPECT_FALSE(v[0].accepted);
    // The kappa + 16 Omega^2 variant is symplectic but conjugates to the wrong matrix.
    EXPECT_LE(v[1].check.symplectic, 1e-10);
    EXPECT_GT(v[1].check.conjugation, 1e-3);
    EXPECT_FALSE(v[1].accepted);
    EXPECT_TRUE(v[2].accepted);
    EXPECT_FALSE(v[3].accepted);
}

TEST(NormalForm, TransformIsSymplecticUpToThirtyTwo) {
    for (int n = 3; n <= 32; ++n) {
        const NormalCoordinates nc = normal_coordinates(n, d3_params());
        EXPECT_LE(symplectic_residual(nc.transform), 1e-10) << "n=" << n;
        EXPECT_LE(symplectic_residual(nc.q_full), 1e-10) << "n=" << n;
        const RingSystem sys = build_ring(d3_params(), {n, Topology::Bidirectional, nc.lambda_star});
        const MatrixXd conj = nc.inverse_transform() * sys.m_full * nc.transform;
        EXPECT_LE(max_abs(conj - nc.normal_matrix) / max_abs(sys.m_full), 1e-9) << "n=" << n;
    }
}

TEST(NormalForm, CoordinateNames) {
    const std::vector<CoordinateInfo> c3 = coordinate_layout(3);
    ASSERT_EQ(c3.size(), 12u);
    EXPECT_EQ(c3[0].name, "x01");
    EXPECT_EQ(c3[7].name, "x14");
    EXPECT_EQ(c3[8].name, "y11");
    EXPECT_TRUE(c3[8].y_copy);
    const std::vector<CoordinateInfo> c4 = coordinate_layout(4);
    EXPECT_EQ(c4.back().name, "x24");
    const std::vector<CoordinateInfo> c21 = coordinate_layout(21);
    EXPECT_EQ(c21[coordinate_index(21, 10, true, 3)].name, "y10_3");
    EXPECT_EQ(coordinate_index(3, 1, false, 4), 7);
    EXPECT_THROW(coordinate_index(3, 0, true, 1), InputError);
    EXPECT_THROW(coordinate_index(4, 2, true, 1), InputError);
    EXPECT_THROW(coordinate_index(3, 1, false, 5), InputError);
}

TEST(NormalForm, TorusLayout) {
    const TorusAction t3 = torus_action(3);
    EXPECT_EQ(t3.phases, 3);
    EXPECT_EQ(t3.fixed, (std::vector<int>{5, 7, 9, 11}));
    const TorusAction t4 = torus_action(4);
    EXPECT_EQ(t4.phases, 4);
    EXPECT_EQ(t4.fixed, (std::vector<int>{12, 13, 14, 15}));
    EXPECT_THROW(apply_torus(t3, {0.1}, VectorXd::Zero(12)), InputError);
}

TEST(NormalForm, ThreeGyroQuadraticCoefficients) {
    const GyroParams p = d3_params();
    const QuadraticNormalForm h = quadratic_normal_form(3, p);
    ASSERT_EQ(h.terms.size(), 4u);
    const double k = p.kappa, w = p.omega;
    const double nu2 = std::sqrt(2 * w * w + k + 2 * w * std::sqrt(w * w + k));
    EXPECT_NEAR(h.terms[0].coefficient, 0.5 * k / nu2, 1e-12);
    EXPECT_NEAR(h.terms[1].coefficient, 0.5 * nu2, 1e-9);
    EXPECT_NEAR(h.terms[2].coefficient, 0.5 * std::sqrt(k + 4 * w * w), 1e-9);
    EXPECT_EQ(h.terms[2].coords.size(), 4u);
    EXPECT_EQ(h.terms[3].coefficient, 0.5);
    EXPECT_EQ(h.terms[3].label, "x12^2 + y12^2");
    EXPECT_EQ(h.evaluate(VectorXd::Zero(12)), 0.0);
}

TEST(NormalForm, QuadraticFormMatchesRingEnergy) {
    std::mt19937_64 rng(211);
    for (const GyroParams& p : {d3_params(), moderate_params()})
        for (int n : {3, 4, 5, 6, 9}) {
            const NormalCoordinates nc = normal_coordinates(n, p);
            const QuadraticNormalForm h = quadratic_normal_form(nc);
            for (int trial = 0; trial < 100; ++trial) {
                const VectorXd x = random_vector(4 * n, rng);
                const VectorXd z = nc.transform * x;
                // Ring quadratic straight from the rotating-frame oracle.
                double quartic = 0.0;
                for (int i = 0; i < n; ++i) quartic += std::pow(z(4 * i), 4) + std::pow(z(4 * i + 1), 4);
                const double ring = oracle_energy(p, n, nc.lambda_star, z) - 0.25 * p.mu * quartic;
                const double scale = std::max(std::abs(ring), x.squaredNorm());
                EXPECT_NEAR(h.evaluate(x), ring, 1e-9 * scale) << "n=" << n;
                EXPECT_NEAR(normal_matrix_energy(nc, x), ring, 1e-9 * scale) << "n=" << n;
            }
        }
}

TEST(NormalForm, QuadraticFormIsTorusInvariant) {
    std::mt19937_64 rng(223);
    for (int n : {3, 4, 7, 8}) {
        const NormalCoordinates nc = normal_coordinates(n, moderate_params());
        const QuadraticNormalForm h = quadratic_normal_form(nc);
        const TorusAction t = torus_action(n);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> angles;
            for (int k = 0; k < t.phases; ++k) angles.push_back(uniform(rng, -3.2, 3.2));
            const VectorXd x = random_vector(4 * n, rng);
            EXPECT_NEAR(h.evaluate(apply_torus(t, angles, x)), h.evaluate(x), 1e-12 * h.evaluate(x.cwiseAbs()) + 1e-14);
        }
    }
}

TEST(NormalForm, RejectsBadInput) {
    EXPECT_THROW(block_normalizer(2, 3, d3_params()), InputError);
    EXPECT_THROW(block_normalizer(0, 2, d3_params()), InputError);
    EXPECT_THROW(block_normalizer(0, 3, GyroParams::reference_device(10.0)), InputError);
}
