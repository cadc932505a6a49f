#pragma once

#include "gyrering/spectrum.hpp"
#include "gyrering/symmetry.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace gyrering {

enum class NormalizerSource { ClosedForm, Eigenvector };
const char* to_string(NormalizerSource s);

// Symplectic Q_j with Q_j^{-1} M_j Q_j equal to the normal matrix, at lambda = lambda*.
struct BlockNormalizer {
    int j = 0;
    int n = 0;
    bool critical = false;
    double lambda_star = 0.0;
    Matrix4d block;          // M_j at lambda*
    Matrix4d q_matrix;
    Matrix4d normal_matrix;  // target pattern built from nu or psi
    // Generic blocks: nu_minus < nu_plus. Critical block: psi.
    double nu_minus = 0.0;
    double nu_plus = 0.0;
    double psi = 0.0;
    // Internals of the generic closed form.
    double omega_int = 0.0;
    double q_int = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    NormalizerSource source = NormalizerSource::Eigenvector;
    std::string formula;
    double symplectic_residual = 0.0;   // max |Q^T J4 Q - J4|
    double conjugation_residual = 0.0;  // max |Q^{-1} M Q - normal| / max |M|
    double closed_form_symplectic_residual = 0.0;
    double closed_form_conjugation_residual = 0.0;
};

struct NormalizerCheck {
    double symplectic = 0.0;
    double conjugation = 0.0;
    bool passes(double tol) const { return symplectic <= tol && conjugation <= tol; }
};

NormalizerCheck check_normalizer(const Matrix4d& q, const Matrix4d& block,
                                 const Matrix4d& normal);

// Normal matrix of a generic block: rotations at nu_minus on (1,3), nu_plus on (2,4).
Matrix4d generic_normal_matrix(double nu_minus, double nu_plus);
// Critical block: rotation at psi on (1,3), nilpotent entry -1 at (4,2).
Matrix4d critical_normal_matrix(double psi);

Matrix4d closed_form_generic_q(int j, int n, const GyroParams& params);
Matrix4d closed_form_critical_q(const GyroParams& params);
Matrix4d eigenvector_generic_q(const Matrix4d& block, double& nu_minus, double& nu_plus);
Matrix4d eigenvector_critical_q(const Matrix4d& block, double& psi);

BlockNormalizer block_normalizer(int j, int n, const GyroParams& params);

// The three-gyro displays: Q_0 and the kappa + 16 Omega^2 variant of Q_1 (m = 1).
struct DisplayedVariant {
    std::string name;
    int j = 0;
    NormalizerCheck check;
    bool accepted = false;
};
std::vector<DisplayedVariant> d3_displayed_variants(const GyroParams& params);

struct CoordinateInfo {
    std::string name;
    int j = 0;
    bool y_copy = false;
    int ell = 1;  // 1..4
};

// Names and order of the normal coordinates X = (X_0, X_1, Y_1, ...).
std::vector<CoordinateInfo> coordinate_layout(int n);
int coordinate_index(int n, int j, bool y_copy, int ell);

// Complex pairs rotated by one torus phase; coordinates absent from every pair are fixed.
struct TorusPair {
    int re = 0;
    int im = 0;
    int phase = 0;
};
struct TorusAction {
    int phases = 0;
    std::vector<TorusPair> pairs;
    std::vector<int> fixed;
};
TorusAction torus_action(int n);
VectorXd apply_torus(const TorusAction& torus, const std::vector<double>& angles,
                     const VectorXd& x);

struct NormalCoordinates {
    int n = 0;
    GyroParams params;
    double lambda_star = 0.0;
    IsotypicBasis basis;
    std::vector<BlockNormalizer> normalizers;  // indexed by j
    MatrixXd q_full;                           // block-diagonal Q
    MatrixXd transform;                        // Z = transform * X
    MatrixXd normal_matrix;                    // full normal matrix
    std::vector<CoordinateInfo> coords;

    int dim() const { return 4 * n; }
    MatrixXd inverse_transform() const;
};

NormalCoordinates normal_coordinates(int n, const GyroParams& params);

struct QuadraticTerm {
    std::vector<int> coords;  // coefficient multiplies the sum of their squares
    double coefficient = 0.0;
    std::string label;
    std::string formula;
};

struct QuadraticNormalForm {
    std::vector<QuadraticTerm> terms;
    double evaluate(const VectorXd& x) const;
};

QuadraticNormalForm quadratic_normal_form(const NormalCoordinates& nc);
QuadraticNormalForm quadratic_normal_form(int n, const GyroParams& params);
// 1/2 X^T J^{-1} N X for the full normal matrix N.
double normal_matrix_energy(const NormalCoordinates& nc, const VectorXd& x);

// sum of c * X_i * X_k.
struct QuadraticInvariant {
    std::string name;
    std::vector<std::tuple<int, int, double>> terms;
    double evaluate(const VectorXd& x) const;
    void add_gradient(const VectorXd& x, double weight, VectorXd& grad) const;
};

struct QuarticInvariant {
    std::string id;      // e.g. "u13*u14"
    std::string family;  // e.g. "U22^2"
    QuadraticInvariant first;
    QuadraticInvariant second;
    double evaluate(const VectorXd& x) const {
        return first.evaluate(x) * second.evaluate(x);
    }
};

// Degree-four invariant products; identical polynomials are listed once.
std::vector<QuarticInvariant> quartic_invariant_basis(int n);

// Torus average of (mu/4) sum (q_{i1}^4 + q_{i2}^4) in normal coordinates.
class AveragedQuartic {
public:
    explicit AveragedQuartic(const NormalCoordinates& nc);
    double value(const VectorXd& x) const;
    VectorXd gradient(const VectorXd& x) const;
    // Raw quartic before averaging.
    double raw_value(const VectorXd& x) const;

private:
    struct Row {
        std::vector<std::pair<int, double>> fixed;
        std::vector<std::vector<std::array<double, 4>>> phase_terms;  // re, im, l_re, l_im
    };
    double mu_ = 0.0;
    int phases_ = 0;
    std::vector<Row> rows_;
    std::vector<VectorXd> linear_rows_;
};

struct QuarticTerm {
    std::string id;
    std::string family;
    double coefficient = 0.0;
    std::string formula;
};

struct QuarticForm {
    std::vector<QuarticTerm> terms;
    const QuarticTerm* find(const std::string& id) const;
};

struct QuarticProjection {
    QuarticForm form;
    double residual = 0.0;             // on the complement of the symmetric block
    double full_space_residual = 0.0;  // all normal coordinates sampled
    int samples = 0;
};

QuarticProjection project_quartic(const NormalCoordinates& nc, unsigned seed = 20240531u);

// Closed forms a_1..a_6 for the three-gyro ring (m = 1). Coefficients carry mu.
QuarticForm d3_quartic_coefficients(const GyroParams& params);
// Ids g1..g6 in the order of d3_quartic_coefficients.
std::vector<std::string> d3_invariant_ids();

struct SplitReduction {
    int n = 0;
    std::vector<std::string> retained_vars;
    std::vector<int> retained_index;
    std::vector<std::string> eliminated;
    double remainder_coeff = 0.0;  // h(u) = alpha |u|^4 at degree four
    std::optional<double> closed_form_coeff;
    double stationarity_residual = 0.0;  // max |grad_chi H(0, u)|
    bool chi_zero_certified = false;
    double rotational_defect = 0.0;  // odd N: spread of h on |u| = 1
};

SplitReduction splitting_remainder(int n, const GyroParams& params, unsigned seed = 7u);

struct DetunedLinearForm {
    double eta = 0.0;
    double lambda = 0.0;
    std::array<double, 6> b{};           // b_1..b_6 closed forms
    std::array<double, 2> b_derived{};   // b_3, b_4 from the averaged perturbation
    std::array<cplx, 4> h_l_eigenvalues{};        // lambda_1..lambda_4 closed forms (one of each pair)
    std::array<cplx, 4> h_l_eigenvalues_derived{};  // from the derived normal form
    std::vector<cplx> exact_eigenvalues;           // T^{-1}(M + eta Phi)T, dense oracle
    std::vector<cplx> oracle_eigenvalues;          // M(lambda* + eta/3), dense oracle
};

DetunedLinearForm detuned_linear_form(const GyroParams& params, double eta);
// Phi in ring coordinates: d M / d lambda times 1/3 for the three-gyro ring.
MatrixXd detuning_matrix(const GyroParams& params);

}  // namespace gyrering
