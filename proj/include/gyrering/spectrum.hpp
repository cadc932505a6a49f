#pragma once

#include "gyrering/core_model.hpp"

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace gyrering {

using cplx = std::complex<double>;

enum class SpectralClass { AllImaginary, MixedRealPair, ZeroPair };
enum class OriginClass { SpectrallyStable, Unstable, Critical };

const char* to_string(SpectralClass c);
const char* to_string(OriginClass c);

// Eigenvalues of block j are {rho_plus, -rho_plus, rho_minus, -rho_minus}.
struct BlockSpectrum {
    int j = 0;
    double s_j = 0.0;
    cplx rho_plus;
    cplx rho_minus;
    SpectralClass cls = SpectralClass::AllImaginary;
    double effective_stiffness = 0.0;  // kappa + 2 lambda (1 - cos 2 pi j / N)

    std::vector<cplx> all() const { return {rho_plus, -rho_plus, rho_minus, -rho_minus}; }
};

struct CriticalCoupling {
    int j = 0;
    std::optional<double> lambda_star;
};

// 1 - cos(2 pi j / N), computed as 2 sin^2(pi j / N).
double one_minus_cos(int j, int n);

BlockSpectrum block_eigenvalues(int j, int n, const GyroParams& params, double lambda);
CriticalCoupling critical_coupling(int j, int n, double kappa);
// lambda* of block floor(N/2), the stability threshold of the origin.
double stability_threshold(int n, double kappa);
OriginClass classify_origin(int n, const GyroParams& params, double lambda);

struct MonotonicityResult {
    bool holds = false;
    std::string detail;
};
// Throws InputError naming the first non-imaginary branch.
MonotonicityResult imag_part_monotonicity(int n, const GyroParams& params, double lambda);

// Eigenvalues sorted by real part, then imaginary part.
std::vector<cplx> dense_eigen_oracle(const MatrixXd& mat);

// Largest |a_i - b_pi(i)| / scale over a closest-pair matching of two equal-size multisets.
double spectrum_mismatch(std::vector<cplx> a, std::vector<cplx> b, double scale);
// Smallest distance from each target to the pool, maximised over targets, divided by scale.
double worst_nearest(const std::vector<cplx>& targets, const std::vector<cplx>& pool,
                     double scale);
double spectral_scale(const std::vector<cplx>& v);

}  // namespace gyrering
