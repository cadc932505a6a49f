#include "gyrering/core_model.hpp"

#include <cmath>
#include <string>

namespace gyrering {

const char* to_string(Units u) {
    return u == Units::Physical ? "physical" : "nondimensional";
}

const char* to_string(Topology t) {
    return t == Topology::Bidirectional ? "bidirectional" : "unidirectional";
}

GyroParams GyroParams::nondimensional(double kappa, double mu, double omega, double a_d,
                                      double w_d) {
    GyroParams p;
    p.m = 1.0;
    p.kappa = kappa;
    p.mu = mu;
    p.omega = omega;
    p.a_d = a_d;
    p.w_d = w_d;
    p.units = Units::Nondimensional;
    p.validate();
    return p;
}

GyroParams GyroParams::physical(double m, double kappa, double mu, double omega, double a_d,
                                double w_d) {
    GyroParams p;
    p.m = m;
    p.kappa = kappa;
    p.mu = mu;
    p.omega = omega;
    p.a_d = a_d;
    p.w_d = w_d;
    p.units = Units::Physical;
    p.validate();
    return p;
}

GyroParams GyroParams::reference_device(double omega) {
    GyroParams p = physical(1.0e-9, 2.6494, 2.933, omega, 1.0e-3, 5.165e4);
    p.c_x = 5.1472e-7;
    p.c_y = 5.1472e-7;
    return p;
}

void GyroParams::validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!(finite(m) && finite(kappa) && finite(mu) && finite(omega) && finite(c_x) &&
          finite(c_y) && finite(a_d) && finite(w_d)))
        throw InputError("gyro parameters must be finite");
    if (!(m > 0.0)) throw InputError("mass m must be positive");
    if (!(kappa > 0.0)) throw InputError("stiffness kappa must be positive");
    if (!(mu > 0.0)) throw InputError("cubic stiffness mu must be positive");
    if (omega < 0.0) throw InputError("rotation rate omega must be non-negative");
    if (c_x < 0.0 || c_y < 0.0) throw InputError("damping must be non-negative");
    if (units == Units::Nondimensional && m != 1.0)
        throw InputError("nondimensional parameters require m = 1");
}

void GyroParams::require_hamiltonian() const {
    validate();
    if (!undamped())
        throw InputError("Hamiltonian analysis requires c_x = c_y = 0");
}

void RingConfig::validate() const {
    if (n < 3) throw InputError("ring size n must be at least 3, got " + std::to_string(n));
    if (!std::isfinite(lambda)) throw InputError("coupling lambda must be finite");
}

MatrixXd RingSystem::s_full() const {
    return -j_full * m_full;
}

Matrix4d j4() {
    Matrix4d j = Matrix4d::Zero();
    j.topRightCorner<2, 2>() = Matrix2d::Identity();
    j.bottomLeftCorner<2, 2>() = -Matrix2d::Identity();
    return j;
}

MatrixXd symplectic_form(int n) {
    MatrixXd j = MatrixXd::Zero(4 * n, 4 * n);
    const Matrix4d b = j4();
    for (int i = 0; i < n; ++i) j.block<4, 4>(4 * i, 4 * i) = b;
    return j;
}

MatrixXd cyclic_permutation(int n) {
    MatrixXd c = MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) c(i, (i + 1) % n) = 1.0;
    return c;
}

RingSystem build_ring(const GyroParams& params, const RingConfig& config) {
    params.require_hamiltonian();
    config.validate();

    RingSystem sys;
    sys.params = params;
    sys.config = config;

    const double m = params.m;
    const double lam = config.lambda;
    sys.g << 0.0, -m * params.omega, m * params.omega, 0.0;
    sys.k = params.kappa * Matrix2d::Identity();
    sys.gamma << 1.0, 0.0, 0.0, 0.0;

    const double couplings = config.topology == Topology::Bidirectional ? 2.0 : 1.0;
    sys.m1.setZero();
    sys.m1.topLeftCorner<2, 2>() = -sys.g / m;
    sys.m1.topRightCorner<2, 2>() = Matrix2d::Identity() / m;
    sys.m1.bottomLeftCorner<2, 2>() = -(sys.k - sys.g * sys.g / m + couplings * lam * sys.gamma);
    sys.m1.bottomRightCorner<2, 2>() = -sys.g / m;

    sys.m2.setZero();
    sys.m2.bottomLeftCorner<2, 2>() = lam * sys.gamma;

    const int n = config.n;
    sys.m_full = MatrixXd::Zero(4 * n, 4 * n);
    for (int i = 0; i < n; ++i) {
        const int next = (i + 1) % n;
        sys.m_full.block<4, 4>(4 * i, 4 * i) = sys.m1;
        sys.m_full.block<4, 4>(4 * i, 4 * next) += sys.m2;
        if (config.topology == Topology::Bidirectional) {
            const int prev = (i + n - 1) % n;
            sys.m_full.block<4, 4>(4 * i, 4 * prev) += sys.m2;
        }
    }
    sys.j_full = symplectic_form(n);
    return sys;
}

void vector_field_into(const RingSystem& sys, const double* z, double t, bool forced,
                       double* out) {
    const GyroParams& p = sys.params;
    const int n = sys.config.n;
    const double w = p.omega;
    const double inv_m = 1.0 / p.m;
    const double lam = sys.config.lambda;
    const bool bidir = sys.config.topology == Topology::Bidirectional;
    const double k1 = p.kappa + p.m * w * w + (bidir ? 2.0 : 1.0) * lam;
    const double k2 = p.kappa + p.m * w * w;
    const double fe = forced ? p.a_d * std::cos(p.w_d * t) : 0.0;

    for (int i = 0; i < n; ++i) {
        const double* zi = z + 4 * i;
        double* oi = out + 4 * i;
        const double q1 = zi[0], q2 = zi[1], p1 = zi[2], p2 = zi[3];
        double coupling = z[4 * ((i + 1) % n)];
        if (bidir) coupling += z[4 * ((i + n - 1) % n)];
        oi[0] = w * q2 + inv_m * p1;
        oi[1] = -w * q1 + inv_m * p2;
        oi[2] = -k1 * q1 + w * p2 + lam * coupling - p.mu * q1 * q1 * q1 + fe;
        oi[3] = -k2 * q2 - w * p1 - p.mu * q2 * q2 * q2;
    }
}

VectorXd vector_field(const RingSystem& sys, const VectorXd& z, double t, bool forced) {
    if (z.size() != sys.dim())
        throw InputError("state length " + std::to_string(z.size()) + " does not match 4N = " +
                         std::to_string(sys.dim()));
    VectorXd out(sys.dim());
    vector_field_into(sys, z.data(), t, forced, out.data());
    return out;
}

MatrixXd vector_field_jacobian(const RingSystem& sys, const VectorXd& z) {
    if (z.size() != sys.dim()) throw InputError("state length does not match 4N");
    MatrixXd jac = sys.m_full;
    const double mu = sys.params.mu;
    for (int i = 0; i < sys.n(); ++i) {
        jac(4 * i + 2, 4 * i) -= 3.0 * mu * z(4 * i) * z(4 * i);
        jac(4 * i + 3, 4 * i + 1) -= 3.0 * mu * z(4 * i + 1) * z(4 * i + 1);
    }
    return jac;
}

static void require_bidirectional(const RingSystem& sys) {
    if (sys.config.topology != Topology::Bidirectional)
        throw InputError("a unidirectional ring has no Hamiltonian for the standard form J");
}

double hamiltonian_energy(const RingSystem& sys, const VectorXd& z) {
    require_bidirectional(sys);
    if (z.size() != sys.dim()) throw InputError("state length does not match 4N");
    const double quadratic = 0.5 * z.dot(sys.s_full() * z);
    double quartic = 0.0;
    for (int i = 0; i < sys.n(); ++i) {
        const double a = z(4 * i) * z(4 * i);
        const double b = z(4 * i + 1) * z(4 * i + 1);
        quartic += a * a + b * b;
    }
    return quadratic + 0.25 * sys.params.mu * quartic;
}

VectorXd hamiltonian_gradient(const RingSystem& sys, const VectorXd& z) {
    require_bidirectional(sys);
    if (z.size() != sys.dim()) throw InputError("state length does not match 4N");
    VectorXd grad = sys.s_full() * z;
    const double mu = sys.params.mu;
    for (int i = 0; i < sys.n(); ++i) {
        grad(4 * i) += mu * std::pow(z(4 * i), 3);
        grad(4 * i + 1) += mu * std::pow(z(4 * i + 1), 3);
    }
    return grad;
}

double hamiltonian_defect(const MatrixXd& m_full, const MatrixXd& j_full) {
    if (m_full.rows() != m_full.cols() || j_full.rows() != j_full.cols())
        throw InputError("Hamiltonian test needs square matrices");
    if (m_full.rows() != j_full.rows()) throw InputError("matrix and form sizes differ");
    if (m_full.rows() % 2 != 0) throw InputError("Hamiltonian test needs even dimension");
    if (m_full.size() == 0) return 0.0;
    return (m_full.transpose() * j_full + j_full * m_full).cwiseAbs().maxCoeff();
}

bool is_hamiltonian_matrix(const MatrixXd& m_full, const MatrixXd& j_full, double tol) {
    return hamiltonian_defect(m_full, j_full) <= tol;
}

MatrixXd symmetric_defect(const RingSystem& sys) {
    const MatrixXd s = sys.s_full();
    return s - s.transpose();
}

}  // namespace gyrering
