#include "gyrering/spectrum.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace gyrering {

const char* to_string(SpectralClass c) {
    switch (c) {
    case SpectralClass::AllImaginary: return "AllImaginary";
    case SpectralClass::MixedRealPair: return "MixedRealPair";
    case SpectralClass::ZeroPair: return "ZeroPair";
    }
    return "?";
}

const char* to_string(OriginClass c) {
    switch (c) {
    case OriginClass::SpectrallyStable: return "SpectrallyStable";
    case OriginClass::Unstable: return "Unstable";
    case OriginClass::Critical: return "Critical";
    }
    return "?";
}

namespace {

void require_block_index(int j, int n) {
    if (n < 3) throw InputError("ring size n must be at least 3");
    if (j < 0 || j > n / 2)
        throw InputError("block index j = " + std::to_string(j) + " outside 0.." +
                         std::to_string(n / 2));
}

// Class boundary: |kappa + 2L| <= 1e-12 kappa.
constexpr double kZeroPairTol = 1e-12;

}  // namespace

double one_minus_cos(int j, int n) {
    const double s = std::sin(std::numbers::pi * j / n);
    return 2.0 * s * s;
}

BlockSpectrum block_eigenvalues(int j, int n, const GyroParams& params, double lambda) {
    require_block_index(j, n);
    params.validate();
    const double m = params.m;
    const double k = params.kappa;
    const double w2 = params.omega * params.omega;
    const double l = lambda * one_minus_cos(j, n);

    BlockSpectrum out;
    out.j = j;
    out.s_j = 4.0 * m * w2 * (k + m * w2 + l) + l * l;
    out.effective_stiffness = k + 2.0 * l;

    // m rho^2 = -b +- sqrt(s); the product of the roots is kappa (kappa + 2L).
    const double b = k + 2.0 * m * w2 + l;
    const double root = std::sqrt(std::max(out.s_j, 0.0));
    const double product = k * out.effective_stiffness;
    double u_plus, u_minus;
    if (b >= 0.0) {
        u_minus = -(b + root);
        u_plus = u_minus != 0.0 ? product / u_minus : 0.0;
    } else {
        u_plus = root - b;
        u_minus = product / u_plus;
    }
    out.rho_plus = std::sqrt(cplx(u_plus / m, 0.0));
    out.rho_minus = std::sqrt(cplx(u_minus / m, 0.0));

    if (std::abs(out.effective_stiffness) <= kZeroPairTol * k)
        out.cls = SpectralClass::ZeroPair;
    else if (out.effective_stiffness > 0.0)
        out.cls = SpectralClass::AllImaginary;
    else
        out.cls = SpectralClass::MixedRealPair;
    if (out.cls == SpectralClass::ZeroPair) out.rho_plus = 0.0;
    return out;
}

CriticalCoupling critical_coupling(int j, int n, double kappa) {
    require_block_index(j, n);
    CriticalCoupling out;
    out.j = j;
    if (j > 0) out.lambda_star = -kappa / (2.0 * one_minus_cos(j, n));
    return out;
}

double stability_threshold(int n, double kappa) {
    return *critical_coupling(n / 2, n, kappa).lambda_star;
}

OriginClass classify_origin(int n, const GyroParams& params, double lambda) {
    params.validate();
    const double star = stability_threshold(n, params.kappa);
    if (std::abs(lambda - star) <= kZeroPairTol * params.kappa) return OriginClass::Critical;
    return lambda > star ? OriginClass::SpectrallyStable : OriginClass::Unstable;
}

MonotonicityResult imag_part_monotonicity(int n, const GyroParams& params, double lambda) {
    const int top = n / 2;
    std::vector<double> minus, plus;
    for (int j = 0; j <= top; ++j) {
        const BlockSpectrum b = block_eigenvalues(j, n, params, lambda);
        if (b.cls != SpectralClass::AllImaginary)
            throw InputError("branch rho_plus of block j = " + std::to_string(j) +
                             " is not purely imaginary at this lambda");
        minus.push_back(b.rho_minus.imag());
        plus.push_back(b.rho_plus.imag());
    }
    MonotonicityResult r;
    if (lambda == 0.0) {
        r.holds = true;
        r.detail = "lambda = 0: all blocks coincide";
        return r;
    }
    const bool increasing = lambda > 0.0;
    auto monotone = [&](const std::vector<double>& v, const char* name) {
        for (size_t i = 1; i < v.size(); ++i) {
            const bool ok = increasing ? v[i] > v[i - 1] : v[i] < v[i - 1];
            if (!ok) {
                r.detail = std::string("Im ") + name + " not strictly " +
                           (increasing ? "increasing" : "decreasing") + " at j = " +
                           std::to_string(i);
                return false;
            }
        }
        return true;
    };
    r.holds = monotone(minus, "rho_minus") && monotone(plus, "rho_plus");
    if (r.holds) r.detail = increasing ? "increasing in j" : "decreasing in j";
    return r;
}

std::vector<cplx> dense_eigen_oracle(const MatrixXd& mat) {
    if (mat.rows() != mat.cols()) throw InputError("eigen oracle needs a square matrix");
    if (mat.rows() > 256) throw InputError("eigen oracle is limited to dimension 256");
    if (mat.rows() == 0) return {};
    Eigen::EigenSolver<MatrixXd> es(mat, true);
    if (es.info() != Eigen::Success) throw NumericalError("dense eigensolver did not converge");

    const Eigen::MatrixXcd v = es.eigenvectors();
    const Eigen::VectorXcd d = es.eigenvalues();
    const double norm = std::max(mat.norm(), std::numeric_limits<double>::min());
    const double backward =
        (mat.cast<cplx>() * v - v * d.asDiagonal()).norm() / (norm * std::max(v.norm(), 1.0));
    if (!(backward <= 1e-10))
        throw NumericalError("dense eigensolver backward error " + std::to_string(backward));

    std::vector<cplx> out(d.data(), d.data() + d.size());
    std::sort(out.begin(), out.end(), [](const cplx& a, const cplx& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return out;
}

double spectral_scale(const std::vector<cplx>& v) {
    double s = 0.0;
    for (const cplx& z : v) s = std::max(s, std::abs(z));
    return s;
}

double spectrum_mismatch(std::vector<cplx> a, std::vector<cplx> b, double scale) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    if (!(scale > 0.0)) scale = 1.0;
    std::vector<bool> used_a(a.size(), false), used_b(b.size(), false);
    double worst = 0.0;
    for (size_t round = 0; round < a.size(); ++round) {
        double best = std::numeric_limits<double>::infinity();
        size_t bi = 0, bj = 0;
        for (size_t i = 0; i < a.size(); ++i) {
            if (used_a[i]) continue;
            for (size_t j = 0; j < b.size(); ++j) {
                if (used_b[j]) continue;
                const double dist = std::abs(a[i] - b[j]);
                if (dist < best) {
                    best = dist;
                    bi = i;
                    bj = j;
                }
            }
        }
        used_a[bi] = used_b[bj] = true;
        worst = std::max(worst, best);
    }
    return worst / scale;
}

double worst_nearest(const std::vector<cplx>& targets, const std::vector<cplx>& pool,
                     double scale) {
    if (!(scale > 0.0)) scale = 1.0;
    double worst = 0.0;
    for (const cplx& t : targets) {
        double best = std::numeric_limits<double>::infinity();
        for (const cplx& p : pool) best = std::min(best, std::abs(t - p));
        worst = std::max(worst, best);
    }
    return worst / scale;
}

}  // namespace gyrering
