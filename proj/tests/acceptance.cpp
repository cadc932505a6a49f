// One pass/fail line per acceptance criterion; exit status 1 if any criterion fails.

#include "test_support.hpp"

#include <chrono>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>

using namespace gyrering;
using namespace gyrering::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool passed = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) passed = false;
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [fails]");
    }
};

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

RingSystem bidir_ring(const GyroParams& p, int n, double lambda) {
    return build_ring(p, {n, Topology::Bidirectional, lambda});
}

Outcome hamiltonian_dichotomy() {
    const auto t0 = Clock::now();
    Outcome o;
    std::mt19937_64 rng(1001);
    const GyroParams p = d3_params();
    double worst_bi = 0.0, worst_pattern = 0.0, least_uni = 1e300;
    for (int n = 3; n <= 10; ++n)
        for (int trial = 0; trial < 5; ++trial) {
            double lam = 0.0;
            while (std::abs(lam) < 1e-3) lam = uniform(rng, -2.0, 2.0);
            const RingSystem bi = bidir_ring(p, n, lam);
            worst_bi = std::max(worst_bi, hamiltonian_defect(bi.m_full, bi.j_full) / max_abs(bi.m_full));
            const RingSystem uni = build_ring(p, {n, Topology::Unidirectional, lam});
            least_uni = std::min(least_uni, hamiltonian_defect(uni.m_full, uni.j_full) / max_abs(uni.m_full));
            // Predicted S - S^T: -lambda at (q1_i, q1_{i+1}), +lambda at the transposed corner.
            MatrixXd expected = MatrixXd::Zero(4 * n, 4 * n);
            for (int i = 0; i < n; ++i) {
                expected(4 * i, 4 * ((i + 1) % n)) -= lam;
                expected(4 * ((i + 1) % n), 4 * i) += lam;
            }
            worst_pattern = std::max(worst_pattern, max_abs(symmetric_defect(uni) - expected) / std::abs(lam));
        }
    const double t = seconds_since(t0);
    o.require(worst_bi <= 1e-12, "bidirectional relative residual " + num(worst_bi) + " <= 1e-12");
    o.require(least_uni > 1e-12, "unidirectional smallest residual " + num(least_uni) + " > 1e-12");
    o.require(worst_pattern <= 1e-12, "S - S^T corner pattern error " + num(worst_pattern));
    o.require(t < 1.0, "runtime " + num(t) + " s < 1 s");
    return o;
}

Outcome critical_coupling_check() {
    Outcome o;
    const GyroParams p = moderate_params();
    const double k = p.kappa;
    const double eps = std::numeric_limits<double>::epsilon();
    double worst_ulp = std::abs(*critical_coupling(1, 3, k).lambda_star + k / 3.0) / (eps * k / 3.0);
    for (int n = 4; n <= 16; n += 2)
        worst_ulp = std::max(worst_ulp, std::abs(stability_threshold(n, k) + k / 4.0) / (eps * k / 4.0));
    o.require(worst_ulp <= 4.0, "closed form vs -kappa/3 (N=3) and -kappa/4 (even N): " + num(worst_ulp) + " eps");
    bool crosses = true;
    for (int n = 3; n <= 10; ++n) {
        const int c = n / 2;
        const double star = stability_threshold(n, k);
        for (double side : {-1.0, 1.0}) {
            const double lam = star + side * 1e-10 * k;
            const std::vector<cplx> ev = dense_eigen_oracle(block(c, p, {n, Topology::Bidirectional, lam}));
            cplx small = ev.front();
            for (const cplx& e : ev)
                if (std::abs(e) < std::abs(small)) small = e;
            // Below the threshold the small pair is real, above it is imaginary.
            const bool real_pair = std::abs(small.real()) > std::abs(small.imag());
            crosses = crosses && (side < 0 ? real_pair : !real_pair);
        }
    }
    o.require(crosses, "dense critical-block pair switches real/imaginary across lambda* +- 1e-10 kappa, N=3..10");
    return o;
}

Outcome block_vs_dense() {
    const auto t0 = Clock::now();
    Outcome o;
    std::mt19937_64 rng(1003);
    double worst_block = 0.0, worst_union = 0.0;
    for (int n = 3; n <= 16; ++n)
        for (int trial = 0; trial < 25; ++trial) {
            const GyroParams p = GyroParams::physical(uniform(rng, 0.2, 5.0), uniform(rng, 0.2, 5.0), 1.0,
                                                      uniform(rng, 0.0, 10.0));
            const double lam = uniform(rng, -3.0, 3.0);
            std::vector<cplx> pooled;
            for (const BlockHamiltonian& bh : quadratic_block_hamiltonian(n, p, lam)) {
                const BlockSpectrum b = block_eigenvalues(bh.j, n, p, lam);
                const std::vector<cplx> dense = dense_eigen_oracle(block(bh.j, p, {n, Topology::Bidirectional, lam}));
                worst_block = std::max(worst_block, worst_nearest(b.all(), dense, spectral_scale(dense)));
                for (int m = 0; m < bh.multiplicity; ++m)
                    for (const cplx& e : b.all()) pooled.push_back(e);
            }
            const std::vector<cplx> full = dense_eigen_oracle(bidir_ring(p, n, lam).m_full);
            worst_union = std::max(worst_union, spectrum_mismatch(pooled, full, spectral_scale(full)));
        }
    const double t = seconds_since(t0);
    o.require(worst_block <= 1e-8, "closed form vs dense block " + num(worst_block));
    o.require(worst_union <= 1e-8, "block union vs dense M " + num(worst_union));
    o.require(t < 30.0, "runtime " + num(t) + " s < 30 s");
    return o;
}

Outcome symplecticity_suite() {
    Outcome o;
    double worst_p = 0.0, worst_q = 0.0, worst_conj = 0.0;
    for (const GyroParams& p : {d3_params(), moderate_params()})
        for (int n = 3; n <= 32; ++n) {
            const MatrixXd& pm = transition_matrix(n).p_matrix;
            const MatrixXd j = symplectic_form(n);
            worst_p = std::max(worst_p, max_abs(pm.transpose() * j * pm - j));
            for (int b = 0; b <= n / 2; ++b) {
                const BlockNormalizer bn = block_normalizer(b, n, p);
                const Matrix4d& q = bn.q_matrix;
                worst_q = std::max(worst_q, max_abs(q.transpose() * j4() * q - j4()));
                worst_conj = std::max(worst_conj, max_abs(q.inverse() * bn.block * q - bn.normal_matrix) /
                                                      max_abs(bn.block));
            }
        }
    o.require(worst_p <= 1e-10, "P^T J P - J " + num(worst_p));
    o.require(worst_q <= 1e-10, "Q^T J4 Q - J4 " + num(worst_q));
    o.require(worst_conj <= 1e-9, "Q^{-1} M Q vs normal pattern " + num(worst_conj));
    return o;
}

Outcome stability_threshold_check() {
    Outcome o;
    const GyroParams p = d3_params();
    bool flips = true;
    for (int n = 3; n <= 12; ++n) {
        const double star = stability_threshold(n, p.kappa);
        flips = flips && classify_origin(n, p, star + 1e-8 * p.kappa) == OriginClass::SpectrallyStable &&
                classify_origin(n, p, star - 1e-8 * p.kappa) == OriginClass::Unstable;
    }
    o.require(flips, "classification flips at lambda* +- 1e-8 kappa, N=3..12");
    const MonotonicityResult up = imag_part_monotonicity(8, p, 0.3);
    const MonotonicityResult down = imag_part_monotonicity(8, p, -0.3);
    o.require(up.holds, "N=8 lambda=+0.3: " + up.detail);
    o.require(down.holds, "N=8 lambda=-0.3: " + down.detail);
    return o;
}

Outcome pitchfork_check() {
    const auto t0 = Clock::now();
    Outcome o;
    const GyroParams p = GyroParams::nondimensional(2.6494, 2.933, 308.0);
    const ReducedSystem rs = ReducedSystem::d3(p, -0.1);
    const EquilibriumSet below = reduced_equilibria(rs, p);
    const double rel = std::abs(below.branch_radius - below.closed_form_radius) / below.closed_form_radius;
    o.require(below.points.size() == 3 && below.centers() == 2,
              "eta=-0.1: " + std::to_string(below.points.size()) + " equilibria, " +
                  std::to_string(below.centers()) + " centers");
    o.require(rel <= 1e-10 && std::abs(below.branch_radius - 69.88) < 0.01,
              "radius " + num(below.branch_radius) + " vs closed form, rel " + num(rel));
    // One revolution around the off-origin center closes up.
    const double w = std::sqrt(rs.lin13 * 2.0 * std::abs(rs.lin14));
    const double period = 2.0 * std::numbers::pi / w;
    const int steps = 4000;
    const Vector4d x0(0.0, 1.05 * below.branch_radius, 0.0, 0.0);
    const Trajectory tr = simulate_reduced(rs, x0, period / steps, steps * 2);
    double closest = 1e300, min_x14 = 1e300;
    for (size_t k = steps / 2; k < tr.states.size(); ++k) closest = std::min(closest, (tr.states[k] - VectorXd(x0)).norm());
    for (const VectorXd& x : tr.states) min_x14 = std::min(min_x14, x(1));
    o.require(min_x14 > 0.0 && closest < 0.01 * below.branch_radius,
              "closed orbit around center, return distance " + num(closest / below.branch_radius) + " r");
    const EquilibriumSet above = reduced_equilibria(p, 0.1);
    o.require(above.points.size() == 1 && above.centers() == 1, "eta=+0.1: single center");
    std::vector<double> grid;
    for (int i = 0; i <= 40; ++i) grid.push_back(i == 20 ? 0.0 : -0.1 + 0.005 * i);
    const PitchforkScan scan = pitchfork_scan(p, grid);
    o.require(std::abs(scan.exponent - 0.5) <= 0.01, "scaling exponent " + num(scan.exponent));
    const double t = seconds_since(t0);
    o.require(t < 10.0, "runtime " + num(t) + " s < 10 s");
    return o;
}

Outcome energy_conservation() {
    Outcome o;
    const GyroParams p = d3_params();
    const RingSystem sys = bidir_ring(p, 3, stability_threshold(3, p.kappa) + 0.05 * p.kappa);
    std::mt19937_64 rng(1007);
    const VectorXd z0 = random_vector(12, rng, 0.1);
    const double dt = default_timestep(sys);
    IntegratorOptions opts;
    opts.record_every = 10;
    const Trajectory tr = integrate_unforced(sys, z0, dt, 100000, opts);
    double drift = 0.0;
    for (double e : tr.energies) drift = std::max(drift, std::abs(e - tr.energies.front()));
    drift /= std::abs(tr.energies.front());
    o.require(drift <= 1e-7, "relative energy drift over 1e5 steps " + num(drift));
    const double back = reversibility_error(sys, z0, dt, 10000);
    o.require(back <= 1e-8, "time-reversal return error " + num(back));
    return o;
}

Outcome floquet_check() {
    Outcome o;
    GyroParams p = d3_params();
    p.w_d = 1000.0;
    const double lam = stability_threshold(3, p.kappa) + 0.05 * p.kappa;
    const RingSystem sys = bidir_ring(p, 3, lam);
    const FloquetResult lin = floquet(sys, 0.0);
    std::vector<cplx> expected;
    for (const BlockHamiltonian& b : quadratic_block_hamiltonian(3, p, lam))
        for (int m = 0; m < b.multiplicity; ++m)
            for (const cplx& rho : block_eigenvalues(b.j, 3, p, lam).all()) expected.push_back(std::exp(lin.period * rho));
    const std::vector<cplx> got(lin.multipliers.begin(), lin.multipliers.end() - 1);
    const double mismatch = spectrum_mismatch(got, expected, 1.0);
    o.require(mismatch <= 1e-10, "a_d=0 multipliers vs exp(T rho) " + num(mismatch));

    p.a_d = 1e-4;
    const RingSystem forced = bidir_ring(p, 3, lam);
    const FloquetResult f = floquet(forced, p.a_d);
    o.require(f.shooting_residual <= 1e-10,
              "shooting converged in " + std::to_string(f.shooting_iterations) + " iterations, residual " +
                  num(f.shooting_residual));
    o.require(f.max_unit_circle_distance() <= 1e-6, "max distance to unit circle " + num(f.max_unit_circle_distance()));
    o.require(f.trivial_unit && f.multipliers.size() == 13, "trivial +1 of the extended system present");
    return o;
}

// Linear-response synchronous orbit plus a small antisymmetric momentum offset between gyros 1 and 2.
double desync_ratio(const GyroParams& p, double lambda, double t_end, double dt, double& rms) {
    const RingSystem sys = bidir_ring(p, 3, lambda);
    const VectorXd sync = linear_response_start(sys, p.a_d);
    VectorXd z0 = sync;
    const double delta = 1e-5 * sync.norm();
    z0(2) += delta;
    z0(6) -= delta;
    z0(3) += delta;
    z0(7) -= delta;
    const long steps = static_cast<long>(t_end / dt);
    const Trajectory tr = integrate_forced(sys, z0, dt, steps, 200);
    rms = rms_amplitude(tr);
    return sync_error(tr) / rms;
}

Outcome synchronization_threshold() {
    const auto t0 = Clock::now();
    Outcome o;
    GyroParams p = d3_params();
    p.a_d = 1e-4;
    p.w_d = 1000.0;
    const double lc = stability_threshold(3, p.kappa);
    const double dt = 2.0 * std::numbers::pi / 616.0 / 40.0;
    const double t_end = 6000.0;
    double rms_hi = 0.0, rms_lo = 0.0;
    const double above = desync_ratio(p, lc + 0.05 * p.kappa, t_end, dt, rms_hi);
    const double below = desync_ratio(p, lc - 0.05 * p.kappa, t_end, dt, rms_lo);
    o.require(above < 1e-3, "lambda_c + 0.05 kappa: sync_error/RMS " + num(above) + " < 1e-3");
    o.require(below > 1e-3, "lambda_c - 0.05 kappa: sync_error/RMS " + num(below) + " > 1e-3");
    const double t = seconds_since(t0);
    o.require(t < 60.0, "runtime " + num(t) + " s < 60 s");
    return o;
}

Outcome quartic_projection() {
    Outcome o;
    const GyroParams p = d3_params();
    for (int n : {3, 4, 5}) {
        const QuarticProjection pr = project_quartic(normal_coordinates(n, p));
        o.require(pr.full_space_residual <= 1e-8, "N=" + std::to_string(n) + " residual " + num(pr.full_space_residual));
        o.require(pr.residual <= 1e-8,
                  "N=" + std::to_string(n) + " residual without symmetric block " + num(pr.residual));
    }
    const QuarticProjection pr = project_quartic(normal_coordinates(3, p));
    double worst = 0.0;
    std::string worst_id;
    for (const QuarticTerm& t : d3_quartic_coefficients(p).terms) {
        const QuarticTerm* got = pr.form.find(t.id);
        const double rel = got ? std::abs(got->coefficient - t.coefficient) / std::abs(t.coefficient) : 1e300;
        if (rel > worst) {
            worst = rel;
            worst_id = t.id;
        }
    }
    o.require(worst <= 1e-9, "N=3 a1..a6 worst relative error " + num(worst) + " (" + worst_id + ")");
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        Outcome (*check)();
    };
    const Criterion criteria[] = {
        {"Hamiltonian-structure dichotomy", hamiltonian_dichotomy},
        {"critical coupling", critical_coupling_check},
        {"block-vs-dense spectrum", block_vs_dense},
        {"symplecticity suite", symplecticity_suite},
        {"stability threshold", stability_threshold_check},
        {"pitchfork reproduction", pitchfork_check},
        {"energy conservation", energy_conservation},
        {"Floquet correspondence", floquet_check},
        {"synchronization threshold", synchronization_threshold},
        {"quartic projection", quartic_projection},
    };
    int failed = 0;
    int index = 1;
    for (const Criterion& c : criteria) {
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o.passed = false;
            o.detail = std::string("exception: ") + e.what();
        }
        std::printf("criterion %2d %s: %s (%s)\n", index++, o.passed ? "PASS" : "FAIL", c.name, o.detail.c_str());
        std::fflush(stdout);
        failed += o.passed ? 0 : 1;
    }
    std::printf("%d of 10 criteria passed\n", 10 - failed);
    return failed == 0 ? 0 : 1;
}
