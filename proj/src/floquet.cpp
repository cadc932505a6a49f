#include "gyrering/dynamics.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gyrering {

namespace {

RingSystem with_forcing(const RingSystem& sys, double a_d) {
    RingSystem out = sys;
    out.params.a_d = a_d;
    return out;
}

std::vector<cplx> eigenvalues_of(const MatrixXd& m) {
    Eigen::EigenSolver<MatrixXd> es(m, false);
    if (es.info() != Eigen::Success) throw NumericalError("monodromy eigensolver did not converge");
    std::vector<cplx> out(es.eigenvalues().data(), es.eigenvalues().data() + m.rows());
    std::sort(out.begin(), out.end(), [](const cplx& a, const cplx& b) {
        if (std::arg(a) != std::arg(b)) return std::arg(a) < std::arg(b);
        return std::abs(a) < std::abs(b);
    });
    return out;
}

// One period of the forced ring with its variational matrix, RK4.
void period_map(const RingSystem& sys, const VectorXd& z0, double period, long steps, VectorXd& z_end,
                MatrixXd& phi) {
    const int d = sys.dim();
    const double h = period / steps;
    VectorXd z = z0;
    phi = MatrixXd::Identity(d, d);
    VectorXd k1(d), k2(d), k3(d), k4(d), tmp(d);
    MatrixXd p1(d, d), p2(d, d), p3(d, d), p4(d, d);
    for (long s = 0; s < steps; ++s) {
        const double t = s * h;
        vector_field_into(sys, z.data(), t, true, k1.data());
        p1 = vector_field_jacobian(sys, z) * phi;
        tmp = z + 0.5 * h * k1;
        vector_field_into(sys, tmp.data(), t + 0.5 * h, true, k2.data());
        p2 = vector_field_jacobian(sys, tmp) * (phi + 0.5 * h * p1);
        tmp = z + 0.5 * h * k2;
        vector_field_into(sys, tmp.data(), t + 0.5 * h, true, k3.data());
        p3 = vector_field_jacobian(sys, tmp) * (phi + 0.5 * h * p2);
        tmp = z + h * k3;
        vector_field_into(sys, tmp.data(), t + h, true, k4.data());
        p4 = vector_field_jacobian(sys, tmp) * (phi + h * p3);
        z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        phi += h / 6.0 * (p1 + 2.0 * p2 + 2.0 * p3 + p4);
    }
    z_end = z;
}

}  // namespace

double FloquetResult::max_unit_circle_distance() const {
    double worst = 0.0;
    for (size_t i = 0; i + 1 < multipliers.size(); ++i)
        worst = std::max(worst, std::abs(std::abs(multipliers[i]) - 1.0));
    return worst;
}

bool is_resonant(const RingSystem& sys, double w_d) {
    if (!(w_d > 0.0)) throw InputError("forcing frequency w_d must be positive");
    for (const cplx& e : dense_eigen_oracle(sys.m_full)) {
        const double k = std::round(e.imag() / w_d);
        if (std::abs(e - cplx(0.0, k * w_d)) <= 1e-6 * w_d) return true;
    }
    return false;
}

VectorXd linear_response_start(const RingSystem& sys, double a_d) {
    const int d = sys.dim();
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(d);
    for (int i = 0; i < sys.n(); ++i) rhs(4 * i + 2) = a_d;
    const Eigen::MatrixXcd a =
        cplx(0.0, sys.params.w_d) * Eigen::MatrixXcd::Identity(d, d) - sys.m_full.cast<cplx>();
    return a.partialPivLu().solve(rhs).real();
}

FloquetResult floquet(const RingSystem& sys, double a_d, const FloquetOptions& opts) {
    sys.params.require_hamiltonian();
    const double w_d = sys.params.w_d;
    if (!(w_d > 0.0)) throw InputError("forcing frequency w_d must be positive");
    if (opts.steps_per_period < 1) throw InputError("steps_per_period must be positive");

    FloquetResult out;
    out.period = 2.0 * std::numbers::pi / w_d;
    out.resonant = is_resonant(sys, w_d);
    const int d = sys.dim();
    MatrixXd mono;

    if (a_d == 0.0) {
        mono = (out.period * sys.m_full).exp();
        out.orbit_start = VectorXd::Zero(d);
    } else {
        if (out.resonant)
            throw NumericalError("forcing frequency is resonant with the linearization at the origin");
        const RingSystem forced = with_forcing(sys, a_d);
        VectorXd z = linear_response_start(sys, a_d);
        const double scale = std::max(z.cwiseAbs().maxCoeff(), 1e-300);
        VectorXd z_end;
        bool converged = false;
        for (int it = 0; it < opts.max_shooting; ++it) {
            period_map(forced, z, out.period, opts.steps_per_period, z_end, mono);
            const VectorXd r = z_end - z;
            out.shooting_residual = r.cwiseAbs().maxCoeff() / scale;
            out.shooting_iterations = it + 1;
            if (out.shooting_residual <= opts.shooting_tol) {
                converged = true;
                break;
            }
            const MatrixXd a = mono - MatrixXd::Identity(d, d);
            z -= a.partialPivLu().solve(r);
            if (!z.allFinite()) break;
        }
        if (!converged)
            throw NumericalError("shooting did not converge: residual " +
                                 std::to_string(out.shooting_residual));
        out.orbit_start = z;
    }

    out.multipliers = eigenvalues_of(mono);
    out.multipliers.push_back(cplx(1.0, 0.0));
    out.trivial_unit = true;
    for (const cplx& m : out.multipliers) out.exponents.push_back(std::log(m) / out.period);
    return out;
}

}  // namespace gyrering
