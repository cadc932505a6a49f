#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace gyrering {

using Eigen::Matrix2d;
using Eigen::Matrix4d;
using Eigen::MatrixXd;
using Eigen::Vector4d;
using Eigen::VectorXd;

// Bad parameters, sizes, indices or configuration values.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numerical procedure did not meet its contract (non-convergence, failed certificate).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what, long step = -1)
        : std::runtime_error(what), step_(step) {}
    long step() const { return step_; }

private:
    long step_;
};

enum class Units { Physical, Nondimensional };
enum class Topology { Unidirectional, Bidirectional };

const char* to_string(Units u);
const char* to_string(Topology t);

// Constants of one gyroscope. Stiffness and cubic stiffness are isotropic.
struct GyroParams {
    double m = 1.0;
    double kappa = 1.0;
    double mu = 1.0;
    double omega = 0.0;
    double c_x = 0.0;
    double c_y = 0.0;
    double a_d = 0.0;
    double w_d = 0.0;
    Units units = Units::Physical;

    // m = 1; kappa, mu, omega are read directly.
    static GyroParams nondimensional(double kappa, double mu, double omega,
                                     double a_d = 0.0, double w_d = 0.0);
    static GyroParams physical(double m, double kappa, double mu, double omega,
                               double a_d = 0.0, double w_d = 0.0);
    // Reference MEMS device, damping included. Rotation rate is a free input.
    static GyroParams reference_device(double omega);

    void validate() const;
    bool undamped() const { return c_x == 0.0 && c_y == 0.0; }
    // Throws unless validate() passes and both damping coefficients vanish.
    void require_hamiltonian() const;
};

struct RingConfig {
    int n = 3;
    Topology topology = Topology::Bidirectional;
    double lambda = 0.0;

    void validate() const;
};

// Assembled linear system of the ring. State layout per gyro: (q1, q2, p1, p2).
struct RingSystem {
    GyroParams params;
    RingConfig config;
    MatrixXd m_full;
    MatrixXd j_full;
    Matrix4d m1;
    Matrix4d m2;
    Matrix2d g;
    Matrix2d k;
    Matrix2d gamma;

    int n() const { return config.n; }
    int dim() const { return 4 * config.n; }
    // S = J^{-1} M. Symmetric exactly when the ring is Hamiltonian.
    MatrixXd s_full() const;
};

Matrix4d j4();
MatrixXd symplectic_form(int n);
// C with C(i, i+1 mod n) = 1.
MatrixXd cyclic_permutation(int n);

RingSystem build_ring(const GyroParams& params, const RingConfig& config);

// M z - F(z), plus A_d cos(w_d t) in every p1 row when forced.
VectorXd vector_field(const RingSystem& sys, const VectorXd& z, double t, bool forced);
// Same field on raw buffers of length 4N; no allocation.
void vector_field_into(const RingSystem& sys, const double* z, double t, bool forced,
                       double* out);
// d(vector_field)/dz = M - dF(z).
MatrixXd vector_field_jacobian(const RingSystem& sys, const VectorXd& z);

// 1/2 z^T S z + (mu/4) sum(q1^4 + q2^4). Bidirectional rings only.
double hamiltonian_energy(const RingSystem& sys, const VectorXd& z);
VectorXd hamiltonian_gradient(const RingSystem& sys, const VectorXd& z);

double hamiltonian_defect(const MatrixXd& m_full, const MatrixXd& j_full);
bool is_hamiltonian_matrix(const MatrixXd& m_full, const MatrixXd& j_full, double tol = 1e-10);

// S - S^T, nonzero only on the coupling entries for a unidirectional ring.
MatrixXd symmetric_defect(const RingSystem& sys);

}  // namespace gyrering
