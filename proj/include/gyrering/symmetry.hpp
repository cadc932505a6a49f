#pragma once

#include "gyrering/core_model.hpp"

#include <vector>

namespace gyrering {

struct GroupGenerators {
    MatrixXd gamma;       // C (x) I4, rotation of the ring by one site
    MatrixXd kappa_refl;  // reflection site i -> -i (mod N), lifted by I4
};

GroupGenerators generators(int n);

// Kind of a 4-column group of P.
enum class ColumnKind { Symmetric, Imag, Real, Alternating };

struct ColumnBlock {
    int j;           // isotypic index
    ColumnKind kind;
    int offset;      // first column of the group in P
};

struct IsotypicBasis {
    int n = 0;
    MatrixXd p_matrix;                  // orthogonal and symplectic
    std::vector<ColumnBlock> block_index;

    int blocks() const { return static_cast<int>(block_index.size()); }
};

int critical_index(int n);  // floor(N/2)

IsotypicBasis transition_matrix(int n);

// M1 + 2 cos(2 pi j / N) M2 for a bidirectional ring.
Matrix4d block(int j, const GyroParams& params, const RingConfig& config);

struct BlockHamiltonian {
    int j;
    int multiplicity;
    Matrix4d s_block;  // J4^T M_j
};

std::vector<BlockHamiltonian> quadratic_block_hamiltonian(int n, const GyroParams& params,
                                                          double lambda);

// 1/2 U^T S_M U with U = P^{-1} z, evaluated blockwise.
double block_quadratic_energy(const IsotypicBasis& basis,
                              const std::vector<BlockHamiltonian>& blocks, const VectorXd& z);

// P^{-1} M P assembled from the blocks (exact block diagonal).
MatrixXd block_diagonal_matrix(const IsotypicBasis& basis, const GyroParams& params,
                               const RingConfig& config);

}  // namespace gyrering
