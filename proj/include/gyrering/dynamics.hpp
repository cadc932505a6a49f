#pragma once

#include "gyrering/normalform.hpp"

#include <vector>

namespace gyrering {

enum class TrajectoryKind { Full, Reduced };

// Uniform step; states.size() == times.size(). energies is empty for forced runs.
struct Trajectory {
    TrajectoryKind kind = TrajectoryKind::Full;
    int n = 0;
    double dt = 0.0;
    std::vector<double> times;
    std::vector<VectorXd> states;
    std::vector<double> energies;
};

struct IntegratorOptions {
    long record_every = 1;
    double newton_tol = 1e-12;
    int max_newton = 50;
};

// (2 pi / fastest linear frequency) / 1000.
double default_timestep(const RingSystem& sys);

// Implicit midpoint with Newton on the midpoint equation.
Trajectory integrate_unforced(const RingSystem& sys, const VectorXd& z0, double dt, long steps,
                              const IntegratorOptions& opts = {});
// Classical RK4 on the time-extended system.
Trajectory integrate_forced(const RingSystem& sys, const VectorXd& z0, double dt, long steps,
                            long record_every = 1);

// diag(1, -1, -1, 1) on every gyro; reverses the unforced flow.
MatrixXd reversor(int n);
// Forward n steps, reflect by the reversor, forward n steps, reflect; relative distance to z0.
double reversibility_error(const RingSystem& sys, const VectorXd& z0, double dt, long steps);

// Final-quarter average of max_i |(q_i, p_i) - mean_j (q_j, p_j)|.
double sync_error(const Trajectory& traj);
// Final-quarter RMS of |(q_i, p_i)| over gyros.
double rms_amplitude(const Trajectory& traj);

// Four-dimensional reduction on (x13, x14, y13, y14):
// h = lin13/2 (x13^2 + y13^2) + lin14/2 (x14^2 + y14^2) + cubic/4 (x14^2 + y14^2)^2.
struct ReducedSystem {
    double eta = 0.0;
    double lin13 = 0.0;
    double lin14 = 0.0;
    double cubic = 0.0;

    // lin13 = psi + 2 eta Omega^2/psi^3, lin14 = eta kappa/(2 psi^2), cubic = mu kappa^2/(2 psi^4).
    static ReducedSystem d3(const GyroParams& params, double eta);

    double energy(const Vector4d& x) const;
    Vector4d gradient(const Vector4d& x) const;
    // x14' = dh/dx13, x13' = -dh/dx14, y14' = dh/dy13, y13' = -dh/dy14.
    Vector4d vector_field(const Vector4d& x) const;
    Matrix4d jacobian(const Vector4d& x) const;
};

enum class EquilibriumType { Center, Saddle, Degenerate };
const char* to_string(EquilibriumType t);

struct Equilibrium {
    Vector4d point;
    EquilibriumType type = EquilibriumType::Degenerate;
};

struct EquilibriumSet {
    std::vector<Equilibrium> points;  // origin first, then (+r, 0), (-r, 0) in (x14, y14)
    double branch_radius = 0.0;       // root of lin14 + cubic r^2
    double closed_form_radius = 0.0;  // sqrt(-eta (kappa + 4 Omega^2)/(mu kappa))
    int centers() const;
};

EquilibriumSet reduced_equilibria(const GyroParams& params, double eta);
EquilibriumSet reduced_equilibria(const ReducedSystem& rs, const GyroParams& params);

Trajectory simulate_reduced(const GyroParams& params, double eta, const Vector4d& x0, double dt,
                            long steps, const IntegratorOptions& opts = {});
Trajectory simulate_reduced(const ReducedSystem& rs, const Vector4d& x0, double dt, long steps,
                            const IntegratorOptions& opts = {});

struct PitchforkRecord {
    double eta = 0.0;
    int equilibria = 0;
    int centers = 0;
    double radius = 0.0;
};

struct PitchforkScan {
    std::vector<PitchforkRecord> records;  // grid order
    double exponent = 0.0;                 // log-log slope of radius over the eta < 0 points
    int fit_points = 0;
};

PitchforkScan pitchfork_scan(const GyroParams& params, const std::vector<double>& eta_grid);
// Least-squares slope of log r against log |eta|.
double fit_scaling_exponent(const std::vector<double>& eta, const std::vector<double>& radius);

struct FloquetOptions {
    long steps_per_period = 4000;
    double shooting_tol = 1e-10;
    int max_shooting = 25;
};

struct FloquetResult {
    double period = 0.0;
    std::vector<cplx> multipliers;  // monodromy eigenvalues, then the trivial +1
    std::vector<cplx> exponents;    // principal log / period
    bool trivial_unit = false;
    bool resonant = false;
    int shooting_iterations = 0;
    double shooting_residual = 0.0;
    VectorXd orbit_start;

    double max_unit_circle_distance() const;  // excluding the trivial multiplier
};

// Periodic orbit of the forced ring near the origin and its monodromy over 2 pi / w_d.
FloquetResult floquet(const RingSystem& sys, double a_d, const FloquetOptions& opts = {});
// Eigenvalue of M within 1e-6 w_d of i k w_d.
bool is_resonant(const RingSystem& sys, double w_d);
// Periodic response of the linearized forced ring at t = 0.
VectorXd linear_response_start(const RingSystem& sys, double a_d);

}  // namespace gyrering
