#pragma once

#include "gyrering/dynamics.hpp"

#include <cmath>
#include <functional>
#include <random>

namespace gyrering::testing {

// Nondimensional three-gyro reference values (m = 1).
inline GyroParams d3_params() { return GyroParams::nondimensional(2.6494, 2.933, 308.0); }

// Moderate rotation rate; keeps slow and fast frequencies within two decades.
inline GyroParams moderate_params() { return GyroParams::nondimensional(1.0, 0.5, 1.3); }

inline VectorXd random_vector(int dim, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = scale * u(rng);
    return v;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double max_abs(const MatrixXd& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

// Ring energy written directly in rotating-frame variables:
// |p - G q|^2 / (2m) + kappa |q|^2 / 2 + mu/4 (q1^4 + q2^4) + lambda/2 sum_i (q1_i - q1_{i+1})^2.
// The coupling potential is the bidirectional one.
inline double oracle_energy(const GyroParams& p, int n, double lambda, const VectorXd& z) {
    double h = 0.0;
    for (int i = 0; i < n; ++i) {
        const double q1 = z(4 * i), q2 = z(4 * i + 1), p1 = z(4 * i + 2), p2 = z(4 * i + 3);
        // G q = (-m Omega q2, m Omega q1)
        const double v1 = p1 + p.m * p.omega * q2;
        const double v2 = p2 - p.m * p.omega * q1;
        h += (v1 * v1 + v2 * v2) / (2.0 * p.m);
        h += 0.5 * p.kappa * (q1 * q1 + q2 * q2);
        h += 0.25 * p.mu * (std::pow(q1, 4) + std::pow(q2, 4));
        const double d = q1 - z(4 * ((i + 1) % n));
        h += 0.5 * lambda * d * d;
    }
    return h;
}

inline VectorXd fd_gradient(const std::function<double(const VectorXd&)>& f, const VectorXd& z,
                            double h) {
    VectorXd g(z.size());
    for (int i = 0; i < z.size(); ++i) {
        VectorXd a = z, b = z;
        a(i) += h;
        b(i) -= h;
        g(i) = (f(a) - f(b)) / (2.0 * h);
    }
    return g;
}

// Loop-built linear matrix: per-gyro equations coded entry by entry.
inline MatrixXd oracle_linear_matrix(const GyroParams& p, int n, Topology topo, double lambda) {
    MatrixXd m = MatrixXd::Zero(4 * n, 4 * n);
    const double w = p.omega;
    const double couplings = topo == Topology::Bidirectional ? 2.0 : 1.0;
    for (int i = 0; i < n; ++i) {
        const int r = 4 * i;
        m(r, r + 1) = w;
        m(r, r + 2) = 1.0 / p.m;
        m(r + 1, r) = -w;
        m(r + 1, r + 3) = 1.0 / p.m;
        m(r + 2, r) = -(p.kappa + p.m * w * w + couplings * lambda);
        m(r + 2, r + 3) = w;
        m(r + 3, r + 1) = -(p.kappa + p.m * w * w);
        m(r + 3, r + 2) = -w;
        m(r + 2, 4 * ((i + 1) % n)) += lambda;
        if (topo == Topology::Bidirectional) m(r + 2, 4 * ((i + n - 1) % n)) += lambda;
    }
    return m;
}

}  // namespace gyrering::testing
