#include "gyrering/symmetry.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace gyrering {

namespace {

void require_ring_size(int n) {
    if (n < 3) throw InputError("ring size n must be at least 3, got " + std::to_string(n));
}

MatrixXd lift(const MatrixXd& perm) {
    const int n = static_cast<int>(perm.rows());
    MatrixXd out = MatrixXd::Zero(4 * n, 4 * n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            if (perm(r, c) != 0.0) out.block<4, 4>(4 * r, 4 * c) = perm(r, c) * Matrix4d::Identity();
    return out;
}

void place(MatrixXd& p, int offset, const VectorXd& site_weights) {
    const int n = static_cast<int>(site_weights.size());
    for (int l = 0; l < 4; ++l)
        for (int s = 0; s < n; ++s) p(4 * s + l, offset + l) = site_weights(s);
}

}  // namespace

GroupGenerators generators(int n) {
    require_ring_size(n);
    MatrixXd refl = MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) refl((n - i) % n, i) = 1.0;
    return {lift(cyclic_permutation(n)), lift(refl)};
}

int critical_index(int n) {
    return n / 2;
}

IsotypicBasis transition_matrix(int n) {
    require_ring_size(n);
    IsotypicBasis basis;
    basis.n = n;
    basis.p_matrix = MatrixXd::Zero(4 * n, 4 * n);

    const double two_pi = 2.0 * std::numbers::pi;
    const double sym_scale = 1.0 / std::sqrt(static_cast<double>(n));
    const double pair_scale = std::sqrt(2.0 / n);
    int offset = 0;

    place(basis.p_matrix, offset, VectorXd::Constant(n, sym_scale));
    basis.block_index.push_back({0, ColumnKind::Symmetric, offset});
    offset += 4;

    const int pairs = (n % 2 == 1) ? n / 2 : n / 2 - 1;
    for (int j = 1; j <= pairs; ++j) {
        VectorXd im(n), re(n);
        for (int s = 0; s < n; ++s) {
            const double angle = two_pi * static_cast<double>((j * s) % n) / n;
            im(s) = pair_scale * std::sin(angle);
            re(s) = pair_scale * std::cos(angle);
        }
        place(basis.p_matrix, offset, im);
        basis.block_index.push_back({j, ColumnKind::Imag, offset});
        offset += 4;
        place(basis.p_matrix, offset, re);
        basis.block_index.push_back({j, ColumnKind::Real, offset});
        offset += 4;
    }
    if (n % 2 == 0) {
        VectorXd alt(n);
        for (int s = 0; s < n; ++s) alt(s) = (s % 2 == 0 ? 1.0 : -1.0) * sym_scale;
        place(basis.p_matrix, offset, alt);
        basis.block_index.push_back({n / 2, ColumnKind::Alternating, offset});
    }
    return basis;
}

Matrix4d block(int j, const GyroParams& params, const RingConfig& config) {
    config.validate();
    if (config.topology != Topology::Bidirectional)
        throw InputError("isotypic blocks are defined for bidirectional rings");
    if (j < 0 || j > config.n / 2)
        throw InputError("block index j = " + std::to_string(j) + " outside 0.." +
                         std::to_string(config.n / 2));
    const RingSystem sys = build_ring(params, config);
    const double c = std::cos(2.0 * std::numbers::pi * j / config.n);
    return sys.m1 + 2.0 * c * sys.m2;
}

std::vector<BlockHamiltonian> quadratic_block_hamiltonian(int n, const GyroParams& params,
                                                          double lambda) {
    const RingConfig config{n, Topology::Bidirectional, lambda};
    config.validate();
    std::vector<BlockHamiltonian> out;
    const Matrix4d j4t = j4().transpose();
    for (int j = 0; j <= n / 2; ++j) {
        const bool single = j == 0 || (n % 2 == 0 && j == n / 2);
        out.push_back({j, single ? 1 : 2, j4t * block(j, params, config)});
    }
    return out;
}

double block_quadratic_energy(const IsotypicBasis& basis,
                              const std::vector<BlockHamiltonian>& blocks, const VectorXd& z) {
    if (z.size() != basis.p_matrix.rows()) throw InputError("state length does not match 4N");
    const VectorXd u = basis.p_matrix.transpose() * z;
    double e = 0.0;
    for (const ColumnBlock& cb : basis.block_index) {
        const Vector4d ub = u.segment<4>(cb.offset);
        e += 0.5 * ub.dot(blocks.at(cb.j).s_block * ub);
    }
    return e;
}

MatrixXd block_diagonal_matrix(const IsotypicBasis& basis, const GyroParams& params,
                               const RingConfig& config) {
    MatrixXd out = MatrixXd::Zero(4 * basis.n, 4 * basis.n);
    for (const ColumnBlock& cb : basis.block_index)
        out.block<4, 4>(cb.offset, cb.offset) = block(cb.j, params, config);
    return out;
}

}  // namespace gyrering
