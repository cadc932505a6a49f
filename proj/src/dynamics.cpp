#include "gyrering/dynamics.hpp"

#include "gyrering/parallel.hpp"

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gyrering {

const char* to_string(EquilibriumType t) {
    switch (t) {
    case EquilibriumType::Center: return "center";
    case EquilibriumType::Saddle: return "saddle";
    case EquilibriumType::Degenerate: return "degenerate";
    }
    return "?";
}

namespace {

void require_step(double dt, long steps) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InputError("time step dt must be positive");
    if (steps < 0) throw InputError("step count must be non-negative");
}

double quartic_energy(const RingSystem& sys, const VectorXd& z) {
    double e = 0.0;
    for (int i = 0; i < sys.n(); ++i) {
        const double a = z(4 * i) * z(4 * i);
        const double b = z(4 * i + 1) * z(4 * i + 1);
        e += a * a + b * b;
    }
    return 0.25 * sys.params.mu * e;
}

// Solves w = z + (dt/2) f(w) by Newton; returns the converged midpoint.
template <class Field, class Jac, class Vec, class Mat>
Vec midpoint_solve(const Vec& z, double dt, const Field& f, const Jac& df, const IntegratorOptions& o,
                   long step) {
    Vec w = z + 0.5 * dt * f(z);
    const double scale = std::max({z.cwiseAbs().maxCoeff(), w.cwiseAbs().maxCoeff(), 1e-300});
    double prev = std::numeric_limits<double>::infinity();
    double upd = prev;
    for (int it = 0; it < o.max_newton; ++it) {
        const Vec r = w - z - 0.5 * dt * f(w);
        Mat a = Mat::Identity(z.size(), z.size()) - 0.5 * dt * df(w);
        const Vec delta = a.partialPivLu().solve(r);
        w -= delta;
        upd = delta.cwiseAbs().maxCoeff();
        if (upd <= 1e-14 * scale) return w;
        if (it >= 2 && upd >= prev) break;
        prev = upd;
    }
    if (upd <= o.newton_tol * scale) return w;
    throw NumericalError("implicit midpoint: Newton did not converge at step " + std::to_string(step) +
                             " (update " + std::to_string(upd / scale) + ")",
                         step);
}

}  // namespace

double default_timestep(const RingSystem& sys) {
    double fastest = 0.0;
    if (sys.config.topology == Topology::Bidirectional) {
        for (int j = 0; j <= sys.n() / 2; ++j) {
            const BlockSpectrum b = block_eigenvalues(j, sys.n(), sys.params, sys.config.lambda);
            fastest = std::max({fastest, std::abs(b.rho_plus.imag()), std::abs(b.rho_minus.imag())});
        }
    } else {
        for (const cplx& e : dense_eigen_oracle(sys.m_full)) fastest = std::max(fastest, std::abs(e.imag()));
    }
    if (!(fastest > 0.0)) throw InputError("no oscillatory mode to set a default time step");
    return 2.0 * std::numbers::pi / fastest / 1000.0;
}

Trajectory integrate_unforced(const RingSystem& sys, const VectorXd& z0, double dt, long steps,
                              const IntegratorOptions& opts) {
    require_step(dt, steps);
    sys.params.require_hamiltonian();
    if (sys.config.topology != Topology::Bidirectional)
        throw InputError("unforced energy-conserving run needs a bidirectional ring");
    if (z0.size() != sys.dim()) throw InputError("initial state length does not match 4N");
    if (opts.record_every < 1) throw InputError("record_every must be at least 1");

    const MatrixXd s = sys.s_full();
    auto energy = [&](const VectorXd& z) { return 0.5 * z.dot(s * z) + quartic_energy(sys, z); };
    auto f = [&](const VectorXd& z) { return vector_field(sys, z, 0.0, false); };
    auto df = [&](const VectorXd& z) { return vector_field_jacobian(sys, z); };

    Trajectory tr;
    tr.kind = TrajectoryKind::Full;
    tr.n = sys.n();
    tr.dt = dt;
    VectorXd z = z0;
    tr.times.push_back(0.0);
    tr.states.push_back(z);
    tr.energies.push_back(energy(z));
    for (long k = 1; k <= steps; ++k) {
        const VectorXd w = midpoint_solve<decltype(f), decltype(df), VectorXd, MatrixXd>(z, dt, f, df, opts, k);
        z = 2.0 * w - z;
        if (!z.allFinite()) throw NumericalError("state became non-finite at step " + std::to_string(k), k);
        if (k % opts.record_every == 0 || k == steps) {
            tr.times.push_back(k * dt);
            tr.states.push_back(z);
            tr.energies.push_back(energy(z));
        }
    }
    return tr;
}

Trajectory integrate_forced(const RingSystem& sys, const VectorXd& z0, double dt, long steps,
                            long record_every) {
    require_step(dt, steps);
    if (z0.size() != sys.dim()) throw InputError("initial state length does not match 4N");
    if (record_every < 1) throw InputError("record_every must be at least 1");
    const int d = sys.dim();
    std::vector<double> z(z0.data(), z0.data() + d), k1(d), k2(d), k3(d), k4(d), tmp(d);

    Trajectory tr;
    tr.kind = TrajectoryKind::Full;
    tr.n = sys.n();
    tr.dt = dt;
    tr.times.push_back(0.0);
    tr.states.push_back(z0);
    for (long k = 1; k <= steps; ++k) {
        const double t = (k - 1) * dt;
        vector_field_into(sys, z.data(), t, true, k1.data());
        for (int i = 0; i < d; ++i) tmp[i] = z[i] + 0.5 * dt * k1[i];
        vector_field_into(sys, tmp.data(), t + 0.5 * dt, true, k2.data());
        for (int i = 0; i < d; ++i) tmp[i] = z[i] + 0.5 * dt * k2[i];
        vector_field_into(sys, tmp.data(), t + 0.5 * dt, true, k3.data());
        for (int i = 0; i < d; ++i) tmp[i] = z[i] + dt * k3[i];
        vector_field_into(sys, tmp.data(), t + dt, true, k4.data());
        for (int i = 0; i < d; ++i) z[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if (k % record_every == 0 || k == steps) {
            if (!std::isfinite(z[0])) throw NumericalError("state became non-finite at step " + std::to_string(k), k);
            tr.times.push_back(k * dt);
            tr.states.push_back(Eigen::Map<const VectorXd>(z.data(), d));
        }
    }
    return tr;
}

MatrixXd reversor(int n) {
    MatrixXd r = MatrixXd::Zero(4 * n, 4 * n);
    for (int i = 0; i < n; ++i) {
        r(4 * i, 4 * i) = 1.0;
        r(4 * i + 1, 4 * i + 1) = -1.0;
        r(4 * i + 2, 4 * i + 2) = -1.0;
        r(4 * i + 3, 4 * i + 3) = 1.0;
    }
    return r;
}

double reversibility_error(const RingSystem& sys, const VectorXd& z0, double dt, long steps) {
    IntegratorOptions opts;
    opts.record_every = std::max<long>(steps, 1);
    const MatrixXd r = reversor(sys.n());
    const VectorXd mid = integrate_unforced(sys, z0, dt, steps, opts).states.back();
    const VectorXd back = r * integrate_unforced(sys, r * mid, dt, steps, opts).states.back();
    return (back - z0).norm() / std::max(z0.norm(), 1e-300);
}

namespace {

size_t window_start(const Trajectory& tr) {
    if (tr.kind != TrajectoryKind::Full) throw InputError("synchronization metrics need a full-ring trajectory");
    if (tr.states.empty()) throw InputError("empty trajectory");
    return tr.states.size() - std::max<size_t>(tr.states.size() / 4, 1);
}

}  // namespace

double sync_error(const Trajectory& tr) {
    const size_t first = window_start(tr);
    const int n = tr.n;
    double acc = 0.0;
    for (size_t s = first; s < tr.states.size(); ++s) {
        const VectorXd& z = tr.states[s];
        Vector4d mean = Vector4d::Zero();
        for (int i = 0; i < n; ++i) mean += z.segment<4>(4 * i);
        mean /= n;
        double worst = 0.0;
        for (int i = 0; i < n; ++i) worst = std::max(worst, (z.segment<4>(4 * i) - mean).norm());
        acc += worst;
    }
    return acc / static_cast<double>(tr.states.size() - first);
}

double rms_amplitude(const Trajectory& tr) {
    const size_t first = window_start(tr);
    double acc = 0.0;
    for (size_t s = first; s < tr.states.size(); ++s) acc += tr.states[s].squaredNorm() / tr.n;
    return std::sqrt(acc / static_cast<double>(tr.states.size() - first));
}

ReducedSystem ReducedSystem::d3(const GyroParams& params, double eta) {
    params.validate();
    const double k = params.kappa;
    const double w2 = params.omega * params.omega;
    const double p2 = k + 4.0 * w2;
    const double p = std::sqrt(p2);
    ReducedSystem rs;
    rs.eta = eta;
    rs.lin13 = p + 2.0 * eta * w2 / (p2 * p);
    rs.lin14 = eta * k / (2.0 * p2);
    rs.cubic = params.mu * k * k / (2.0 * p2 * p2);
    return rs;
}

double ReducedSystem::energy(const Vector4d& x) const {
    const double r13 = x(0) * x(0) + x(2) * x(2);
    const double r14 = x(1) * x(1) + x(3) * x(3);
    return 0.5 * lin13 * r13 + 0.5 * lin14 * r14 + 0.25 * cubic * r14 * r14;
}

Vector4d ReducedSystem::gradient(const Vector4d& x) const {
    const double r14 = x(1) * x(1) + x(3) * x(3);
    const double g = lin14 + cubic * r14;
    return Vector4d(lin13 * x(0), g * x(1), lin13 * x(2), g * x(3));
}

Vector4d ReducedSystem::vector_field(const Vector4d& x) const {
    const Vector4d g = gradient(x);
    return Vector4d(-g(1), g(0), -g(3), g(2));
}

Matrix4d ReducedSystem::jacobian(const Vector4d& x) const {
    const double r14 = x(1) * x(1) + x(3) * x(3);
    const double g = lin14 + cubic * r14;
    Matrix4d hess = Matrix4d::Zero();
    hess(0, 0) = lin13;
    hess(2, 2) = lin13;
    hess(1, 1) = g + 2.0 * cubic * x(1) * x(1);
    hess(3, 3) = g + 2.0 * cubic * x(3) * x(3);
    hess(1, 3) = hess(3, 1) = 2.0 * cubic * x(1) * x(3);
    Matrix4d out;
    out.row(0) = -hess.row(1);
    out.row(1) = hess.row(0);
    out.row(2) = -hess.row(3);
    out.row(3) = hess.row(2);
    return out;
}

int EquilibriumSet::centers() const {
    return static_cast<int>(std::count_if(points.begin(), points.end(), [](const Equilibrium& e) {
        return e.type == EquilibriumType::Center;
    }));
}

namespace {

// In-plane (x13, x14) linearization: the y directions repeat it or are tangent to the circle.
EquilibriumType classify(const ReducedSystem& rs, const Vector4d& x) {
    const double r14 = x(1) * x(1) + x(3) * x(3);
    const double v2 = rs.lin14 + 3.0 * rs.cubic * r14;
    const double prod = rs.lin13 * v2;
    const double tol = 1e-14 * std::max(std::abs(rs.lin13) * (std::abs(rs.lin14) + rs.cubic * r14), 1e-300);
    if (std::abs(prod) <= tol || v2 == 0.0) return EquilibriumType::Degenerate;
    return prod > 0.0 ? EquilibriumType::Center : EquilibriumType::Saddle;
}

}  // namespace

EquilibriumSet reduced_equilibria(const ReducedSystem& rs, const GyroParams& params) {
    if (!(params.mu > 0.0 && params.kappa > 0.0))
        throw InputError("reduced equilibria need mu > 0 and kappa > 0");
    EquilibriumSet out;
    out.points.push_back({Vector4d::Zero(), classify(rs, Vector4d::Zero())});
    const double p2 = params.kappa + 4.0 * params.omega * params.omega;
    const double target = -rs.eta * p2 / (params.mu * params.kappa);
    out.closed_form_radius = target > 0.0 ? std::sqrt(target) : 0.0;
    if (rs.lin14 < 0.0) {
        // g(r) = lin14 r + cubic r^3 changes sign on (0, hi].
        auto g = [&](double r) { return rs.lin14 * r + rs.cubic * r * r * r; };
        double hi = 1.0;
        while (g(hi) <= 0.0) hi *= 2.0;
        const double lo = hi * 1e-12;
        std::uintmax_t iters = 200;
        const auto [a, b] = boost::math::tools::toms748_solve(
            g, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
        out.branch_radius = 0.5 * (a + b);
        for (double sgn : {1.0, -1.0}) {
            const Vector4d x(0.0, sgn * out.branch_radius, 0.0, 0.0);
            out.points.push_back({x, classify(rs, x)});
        }
    }
    return out;
}

EquilibriumSet reduced_equilibria(const GyroParams& params, double eta) {
    return reduced_equilibria(ReducedSystem::d3(params, eta), params);
}

Trajectory simulate_reduced(const ReducedSystem& rs, const Vector4d& x0, double dt, long steps,
                            const IntegratorOptions& opts) {
    require_step(dt, steps);
    if (opts.record_every < 1) throw InputError("record_every must be at least 1");
    auto f = [&](const Vector4d& x) { return rs.vector_field(x); };
    auto df = [&](const Vector4d& x) { return rs.jacobian(x); };
    Trajectory tr;
    tr.kind = TrajectoryKind::Reduced;
    tr.n = 3;
    tr.dt = dt;
    Vector4d x = x0;
    tr.times.push_back(0.0);
    tr.states.push_back(x);
    tr.energies.push_back(rs.energy(x));
    for (long k = 1; k <= steps; ++k) {
        const Vector4d w = midpoint_solve<decltype(f), decltype(df), Vector4d, Matrix4d>(x, dt, f, df, opts, k);
        x = 2.0 * w - x;
        if (!x.allFinite()) throw NumericalError("reduced state became non-finite at step " + std::to_string(k), k);
        if (k % opts.record_every == 0 || k == steps) {
            tr.times.push_back(k * dt);
            tr.states.push_back(x);
            tr.energies.push_back(rs.energy(x));
        }
    }
    return tr;
}

Trajectory simulate_reduced(const GyroParams& params, double eta, const Vector4d& x0, double dt,
                            long steps, const IntegratorOptions& opts) {
    return simulate_reduced(ReducedSystem::d3(params, eta), x0, dt, steps, opts);
}

double fit_scaling_exponent(const std::vector<double>& eta, const std::vector<double>& radius) {
    if (eta.size() != radius.size() || eta.size() < 2)
        throw InputError("exponent fit needs at least two (eta, radius) pairs");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(eta.size());
    for (size_t i = 0; i < eta.size(); ++i) {
        const double x = std::log(std::abs(eta[i]));
        const double y = std::log(radius[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double den = n * sxx - sx * sx;
    if (!(std::abs(den) > 0.0)) throw InputError("exponent fit needs distinct |eta| values");
    return (n * sxy - sx * sy) / den;
}

PitchforkScan pitchfork_scan(const GyroParams& params, const std::vector<double>& eta_grid) {
    if (eta_grid.size() < 2) throw InputError("eta grid needs at least two points");
    for (size_t i = 1; i < eta_grid.size(); ++i)
        if (!(eta_grid[i] > eta_grid[i - 1])) throw InputError("eta grid must be strictly increasing");
    if (!(eta_grid.front() < 0.0 && eta_grid.back() > 0.0)) throw InputError("eta grid must straddle 0");

    PitchforkScan scan;
    scan.records = parallel_map(eta_grid.size(), [&](std::size_t i) {
        const EquilibriumSet eq = reduced_equilibria(params, eta_grid[i]);
        return PitchforkRecord{eta_grid[i], static_cast<int>(eq.points.size()), eq.centers(),
                               eq.branch_radius};
    });
    std::vector<double> e, r;
    for (const PitchforkRecord& rec : scan.records)
        if (rec.eta < 0.0 && rec.radius > 0.0) {
            e.push_back(rec.eta);
            r.push_back(rec.radius);
        }
    scan.fit_points = static_cast<int>(e.size());
    if (e.size() >= 2) scan.exponent = fit_scaling_exponent(e, r);
    return scan;
}

}  // namespace gyrering
