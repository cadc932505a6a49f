#include "gyrering/normalform.hpp"

#include "gyrering/parallel.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace gyrering {

const char* to_string(NormalizerSource s) {
    switch (s) {
    case NormalizerSource::ClosedForm: return "closed-form";
    case NormalizerSource::Eigenvector: return "eigenvector";
    }
    return "?";
}

namespace {

constexpr double kAcceptTol = 1e-10;
constexpr double kFailTol = 1e-8;

// Fix(R) = span{e1, e4}, Fix(-R) = span{e2, e3} with R = diag(1, -1, -1, 1).
constexpr int kFixR[2] = {0, 3};
constexpr int kFixMinusR[2] = {1, 2};

Vector4d embed(const Eigen::Vector2d& v, const int (&idx)[2]) {
    Vector4d out = Vector4d::Zero();
    out(idx[0]) = v(0);
    out(idx[1]) = v(1);
    return out;
}

Matrix2d restrict_map(const Matrix4d& m, const int (&rows)[2], const int (&cols)[2]) {
    Matrix2d out;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) out(r, c) = m(rows[r], cols[c]);
    return out;
}

// Roots of t^2 - tr t + det, small root from det / large to avoid cancellation.
void real_roots_2x2(const Matrix2d& t, double& small, double& large) {
    const double tr = t.trace();
    const double det = t.determinant();
    const double disc = tr * tr - 4.0 * det;
    if (disc < -1e-12 * tr * tr)
        throw NumericalError("block square has complex eigenvalues on Fix(R)");
    const double root = std::sqrt(std::max(disc, 0.0));
    large = 0.5 * (tr + (tr >= 0.0 ? root : -root));
    small = large != 0.0 ? det / large : 0.0;
}

Eigen::Vector2d null_vector(const Matrix2d& a) {
    const Eigen::Vector2d r0(a(0, 1), -a(0, 0));
    const Eigen::Vector2d r1(a(1, 1), -a(1, 0));
    const Eigen::Vector2d v = r0.norm() >= r1.norm() ? r0 : r1;
    if (v.norm() == 0.0) return Eigen::Vector2d(1.0, 0.0);
    return v.normalized();
}

double omega_form(const Vector4d& a, const Vector4d& b) {
    return a.dot(j4() * b);
}

// Removes roundoff coupling between the (v1, v3) and (v2, v4) pairs, then normalizes (v2, v4).
// Corrections stay inside Fix(R) and Fix(-R).
void symplectic_orthogonalize(const Vector4d& v1, const Vector4d& v3, Vector4d& v2, Vector4d& v4) {
    v4 += omega_form(v3, v4) * v1;
    v2 -= omega_form(v1, v2) * v3;
    const double w24 = omega_form(v2, v4);
    if (!(w24 > 0.0))
        throw NumericalError("block eigenvectors have non-positive symplectic pairing");
    v2 /= std::sqrt(w24);
    v4 /= std::sqrt(w24);
}

double max_abs(const Matrix4d& m) {
    return m.cwiseAbs().maxCoeff();
}

}  // namespace

NormalizerCheck check_normalizer(const Matrix4d& q, const Matrix4d& block,
                                 const Matrix4d& normal) {
    NormalizerCheck c;
    if (!q.allFinite()) {
        c.symplectic = c.conjugation = std::numeric_limits<double>::infinity();
        return c;
    }
    c.symplectic = max_abs(q.transpose() * j4() * q - j4());
    Eigen::FullPivLU<Matrix4d> lu(q);
    if (!lu.isInvertible()) {
        c.conjugation = std::numeric_limits<double>::infinity();
        return c;
    }
    const Matrix4d conj = lu.solve(block * q);
    c.conjugation = max_abs(conj - normal) / std::max(max_abs(block), 1e-300);
    return c;
}

Matrix4d generic_normal_matrix(double nu_minus, double nu_plus) {
    Matrix4d n = Matrix4d::Zero();
    n(0, 2) = nu_minus;
    n(2, 0) = -nu_minus;
    n(1, 3) = nu_plus;
    n(3, 1) = -nu_plus;
    return n;
}

Matrix4d critical_normal_matrix(double psi) {
    Matrix4d n = Matrix4d::Zero();
    n(0, 2) = psi;
    n(2, 0) = -psi;
    n(3, 1) = -1.0;
    return n;
}

Matrix4d closed_form_generic_q(int j, int n, const GyroParams& params) {
    const double m = params.m;
    const double k = params.kappa;
    const double om = params.omega;
    const double om2 = om * om;
    const double lc = stability_threshold(n, k);
    const double omc = 1.0 - std::cos(2.0 * std::numbers::pi * j / n);
    const double w = 2.0 * lc * omc;
    const double q = std::sqrt(16.0 * m * om2 * k + std::pow(k * w - 4.0 * m * om2, 2));
    const BlockSpectrum bs = block_eigenvalues(j, n, params, lc);
    const double num = std::abs(bs.rho_plus.imag());
    const double nup = std::abs(bs.rho_minus.imag());
    const double c1 = (q * q - (4.0 * m * om2 + k * w) * q) / (std::pow(q - k * w, 2) * m);
    const double c2 = (q * q + (4.0 * m * om2 + k * w) * q) / (std::pow(q + k * w, 2) * m);

    Matrix4d out = Matrix4d::Zero();
    out(0, 0) = std::sqrt(num / c1) * (4.0 * om / (q - k * w));
    out(0, 3) = std::sqrt(nup / (2.0 * c2)) * (-4.0 * om / (q + k * w));
    out(1, 1) = (4.0 * om2 / (q + k * w) + 1.0 / m) / std::sqrt(2.0 * c2 * nup);
    out(1, 2) = (-4.0 * om2 / (q - k * w) + 1.0 / m) / std::sqrt(c1 * num);
    out(2, 1) = (4.0 * (k + m * om2 - k * w) * om / (q + k * w) + om) / std::sqrt(2.0 * c2 * nup);
    out(2, 2) = (4.0 * (-k - m * om2 + k * w) * om / (q - k * w) - om) / std::sqrt(c1 * num);
    out(3, 0) = std::sqrt(num / c1);
    out(3, 3) = std::sqrt(nup / (2.0 * c2));
    return out;
}

Matrix4d closed_form_critical_q(const GyroParams& params) {
    const double m = params.m;
    const double k = params.kappa;
    const double om = params.omega;
    const double a = k + 4.0 * m * om * om;
    Matrix4d out = Matrix4d::Zero();
    out(0, 2) = -2.0 * om * std::pow(m, 0.25) / std::pow(a, 0.75);
    out(0, 3) = std::sqrt(k / (m * a));
    out(1, 0) = 1.0 / std::pow(m * a, 0.25);
    out(1, 1) = 2.0 * om * std::sqrt(m) / std::sqrt(k * a);
    out(2, 0) = std::pow(m, 0.75) * om / std::pow(a, 0.25);
    out(2, 1) = -std::sqrt(m) * (k + 2.0 * m * om * om) / std::sqrt(k * a);
    out(3, 2) = (k + 2.0 * m * om * om) * std::pow(m, 0.25) / std::pow(a, 0.75);
    out(3, 3) = std::sqrt(m * k * om * om / a);
    return out;
}

Matrix4d eigenvector_generic_q(const Matrix4d& block, double& nu_minus, double& nu_plus) {
    const Matrix2d c = restrict_map(block, kFixMinusR, kFixR);
    const Matrix2d b = restrict_map(block, kFixR, kFixMinusR);
    const Matrix2d t = b * c;
    double small, large;
    real_roots_2x2(t, small, large);
    if (!(small < 0.0 && large < 0.0))
        throw NumericalError("generic block is not elliptic at the normalization point");
    nu_minus = std::sqrt(-small);
    nu_plus = std::sqrt(-large);

    Vector4d v1 = embed(null_vector(t - small * Matrix2d::Identity()), kFixR);
    Vector4d v4 = embed(null_vector(t - large * Matrix2d::Identity()), kFixR);
    Vector4d v3 = -block * v1 / nu_minus;
    Vector4d v2 = block * v4 / nu_plus;

    const double w13 = omega_form(v1, v3);
    const double w24 = omega_form(v2, v4);
    if (!(w13 > 0.0 && w24 > 0.0))
        throw NumericalError("generic block eigenvectors have non-positive symplectic pairing");
    v1 /= std::sqrt(w13);
    v3 /= std::sqrt(w13);
    v2 /= std::sqrt(w24);
    v4 /= std::sqrt(w24);
    symplectic_orthogonalize(v1, v3, v2, v4);

    Matrix4d q;
    q << v1, v2, v3, v4;
    return q;
}

Matrix4d eigenvector_critical_q(const Matrix4d& block, double& psi) {
    const Matrix2d c = restrict_map(block, kFixMinusR, kFixR);
    const Matrix2d b = restrict_map(block, kFixR, kFixMinusR);
    const Matrix2d t = b * c;
    double small, large;
    real_roots_2x2(t, small, large);
    if (!(large < 0.0)) throw NumericalError("critical block has no elliptic pair");
    psi = std::sqrt(-large);

    Vector4d v3 = embed(null_vector(t - large * Matrix2d::Identity()), kFixR);
    Vector4d v1 = block * v3 / psi;
    Vector4d v4 = embed(null_vector(c), kFixR);
    Eigen::FullPivLU<Matrix2d> lu(b);
    if (!lu.isInvertible())
        throw NumericalError("critical block: restricted map on Fix(-R) is singular");
    const Eigen::Vector2d c4(v4(kFixR[0]), v4(kFixR[1]));
    Vector4d v2 = embed(-lu.solve(c4), kFixMinusR);

    const double w13 = omega_form(v1, v3);
    const double w24 = omega_form(v2, v4);
    if (!(w13 > 0.0 && w24 > 0.0))
        throw NumericalError("critical block eigenvectors have non-positive symplectic pairing");
    v1 /= std::sqrt(w13);
    v3 /= std::sqrt(w13);
    v2 /= std::sqrt(w24);
    v4 /= std::sqrt(w24);
    symplectic_orthogonalize(v1, v3, v2, v4);

    Matrix4d q;
    q << v1, v2, v3, v4;
    return q;
}

BlockNormalizer block_normalizer(int j, int n, const GyroParams& params) {
    if (n < 3) throw InputError("ring size n must be at least 3");
    if (j < 0 || j > n / 2)
        throw InputError("block index j = " + std::to_string(j) + " outside 0.." +
                         std::to_string(n / 2));
    params.require_hamiltonian();
    if (!(params.m > 0.0 && params.kappa > 0.0))
        throw InputError("normalization needs m > 0 and kappa > 0");

    BlockNormalizer out;
    out.j = j;
    out.n = n;
    out.critical = j == n / 2;
    out.lambda_star = stability_threshold(n, params.kappa);
    const RingConfig cfg{n, Topology::Bidirectional, out.lambda_star};
    out.block = block(j, params, cfg);

    const double m = params.m;
    const double om2 = params.omega * params.omega;
    if (out.critical) {
        out.psi = std::sqrt((params.kappa + 4.0 * m * om2) / m);
        out.normal_matrix = critical_normal_matrix(out.psi);
        out.formula = "critical closed form (kappa + 4 m Omega^2)";
        const Matrix4d closed = closed_form_critical_q(params);
        const NormalizerCheck cc = check_normalizer(closed, out.block, out.normal_matrix);
        out.closed_form_symplectic_residual = cc.symplectic;
        out.closed_form_conjugation_residual = cc.conjugation;
        if (cc.passes(kAcceptTol)) {
            out.q_matrix = closed;
            out.source = NormalizerSource::ClosedForm;
        } else {
            double psi = 0.0;
            out.q_matrix = eigenvector_critical_q(out.block, psi);
            out.source = NormalizerSource::Eigenvector;
        }
    } else {
        const BlockSpectrum bs = block_eigenvalues(j, n, params, out.lambda_star);
        out.nu_minus = std::abs(bs.rho_plus.imag());
        out.nu_plus = std::abs(bs.rho_minus.imag());
        const double k = params.kappa;
        out.omega_int = 2.0 * out.lambda_star * one_minus_cos(j, n);
        out.q_int = std::sqrt(16.0 * m * om2 * k + std::pow(k * out.omega_int - 4.0 * m * om2, 2));
        const double kw = k * out.omega_int;
        const double qq = out.q_int;
        out.c1 = (qq * qq - (4.0 * m * om2 + kw) * qq) / (std::pow(qq - kw, 2) * m);
        out.c2 = (qq * qq + (4.0 * m * om2 + kw) * qq) / (std::pow(qq + kw, 2) * m);
        out.normal_matrix = generic_normal_matrix(out.nu_minus, out.nu_plus);
        out.formula = "generic closed form (omega, q, c1, c2)";
        const Matrix4d closed = closed_form_generic_q(j, n, params);
        const NormalizerCheck cc = check_normalizer(closed, out.block, out.normal_matrix);
        out.closed_form_symplectic_residual = cc.symplectic;
        out.closed_form_conjugation_residual = cc.conjugation;
        if (cc.passes(kAcceptTol)) {
            out.q_matrix = closed;
            out.source = NormalizerSource::ClosedForm;
        } else {
            double nm = 0.0, np = 0.0;
            out.q_matrix = eigenvector_generic_q(out.block, nm, np);
            out.source = NormalizerSource::Eigenvector;
        }
    }

    const NormalizerCheck fin = check_normalizer(out.q_matrix, out.block, out.normal_matrix);
    out.symplectic_residual = fin.symplectic;
    out.conjugation_residual = fin.conjugation;
    if (!fin.passes(kFailTol))
        throw NumericalError("normalizer of block j = " + std::to_string(j) +
                             " failed verification: symplectic " +
                             std::to_string(fin.symplectic) + ", conjugation " +
                             std::to_string(fin.conjugation));
    return out;
}

std::vector<DisplayedVariant> d3_displayed_variants(const GyroParams& params) {
    const double k = params.kappa;
    const double om = params.omega;
    const double om2 = om * om;
    const RingConfig cfg{3, Topology::Bidirectional, stability_threshold(3, k)};
    std::vector<DisplayedVariant> out;

    {
        const double r = std::sqrt(om2 + k);
        const double n1 = std::sqrt(2.0 * om2 + k - 2.0 * om * r);
        const double n2 = std::sqrt(2.0 * om2 + k + 2.0 * om * r);
        const double x1 = om2 + k - om * r;
        const double x2 = om2 + k + om * r;
        Matrix4d q = Matrix4d::Zero();
        q(0, 0) = std::sqrt(n1 / (2.0 * x1));
        q(0, 3) = std::sqrt(n2 / (2.0 * x2));
        q(1, 1) = (2.0 * om + r) / std::sqrt(2.0 * x2 * n2);
        q(1, 2) = (2.0 * om - r) / std::sqrt(2.0 * x1 * n1);
        q(2, 1) = std::sqrt(x2 / (2.0 * n2));
        q(2, 2) = std::sqrt(x1 / (2.0 * n1));
        q(3, 0) = std::sqrt((4.0 * om2 + k) * n1 / (2.0 * x1));
        q(3, 3) = std::sqrt((4.0 * om2 + k) * n2 / (2.0 * x2));
        const Matrix4d normal = generic_normal_matrix(n1, n2);
        DisplayedVariant v{"Q0 display", 0, check_normalizer(q, block(0, params, cfg), normal),
                           false};
        v.accepted = v.check.passes(kAcceptTol);
        out.push_back(v);
    }
    const Matrix4d m1 = block(1, params, cfg);
    const Matrix4d crit = critical_normal_matrix(std::sqrt(k + 4.0 * om2));
    {
        const double a = k + 16.0 * om2;
        Matrix4d q = Matrix4d::Zero();
        q(0, 2) = -4.0 * om / std::pow(a, 0.75);
        q(0, 3) = k / std::sqrt(k * a);
        q(1, 0) = 1.0 / std::pow(a, 0.25);
        q(1, 1) = 4.0 * om / std::sqrt(k * a);
        q(2, 0) = 2.0 * om / std::pow(a, 0.25);
        q(2, 1) = -(k + 8.0 * om2) / std::sqrt(k * a);
        q(3, 2) = (k + 8.0 * om2) / std::pow(a, 0.75);
        q(3, 3) = 2.0 * k * om / std::sqrt(k * a);
        DisplayedVariant v{"Q1 display (kappa + 16 Omega^2)", 1, check_normalizer(q, m1, crit),
                           false};
        v.accepted = v.check.passes(kAcceptTol);
        out.push_back(v);
    }
    {
        GyroParams unit = params;
        unit.m = 1.0;
        DisplayedVariant v{"critical formula (kappa + 4 m Omega^2)", 1,
                           check_normalizer(closed_form_critical_q(unit), m1, crit), false};
        v.accepted = v.check.passes(kAcceptTol);
        out.push_back(v);
    }
    {
        GyroParams unit = params;
        unit.m = 1.0;
        const BlockSpectrum bs = block_eigenvalues(0, 3, unit, cfg.lambda);
        const Matrix4d normal =
            generic_normal_matrix(std::abs(bs.rho_plus.imag()), std::abs(bs.rho_minus.imag()));
        DisplayedVariant v{"generic formula at j = 0", 0,
                           check_normalizer(closed_form_generic_q(0, 3, unit),
                                            block(0, unit, cfg), normal),
                           false};
        v.accepted = v.check.passes(kAcceptTol);
        out.push_back(v);
    }
    return out;
}

std::vector<CoordinateInfo> coordinate_layout(int n) {
    if (n < 3) throw InputError("ring size n must be at least 3");
    const IsotypicBasis basis = transition_matrix(n);
    std::vector<CoordinateInfo> out;
    for (const ColumnBlock& cb : basis.block_index) {
        const bool y = cb.kind == ColumnKind::Real;
        for (int l = 1; l <= 4; ++l) {
            std::string name = (y ? "y" : "x") + std::to_string(cb.j);
            if (cb.j >= 10) name += "_";
            name += std::to_string(l);
            out.push_back({name, cb.j, y, l});
        }
    }
    return out;
}

int coordinate_index(int n, int j, bool y_copy, int ell) {
    if (ell < 1 || ell > 4) throw InputError("coordinate slot must be 1..4");
    if (j < 0 || j > n / 2) throw InputError("block index outside 0..N/2");
    const int pairs = (n % 2 == 1) ? n / 2 : n / 2 - 1;
    if (j == 0) {
        if (y_copy) throw InputError("block 0 has no y copy");
        return ell - 1;
    }
    if (j > pairs) {
        if (y_copy) throw InputError("alternating block has no y copy");
        return 4 + 8 * pairs + ell - 1;
    }
    return 4 + 8 * (j - 1) + (y_copy ? 4 : 0) + ell - 1;
}

TorusAction torus_action(int n) {
    if (n < 3) throw InputError("ring size n must be at least 3");
    TorusAction t;
    const int c = n / 2;
    const int pairs = (n % 2 == 1) ? n / 2 : n / 2 - 1;
    t.pairs.push_back({coordinate_index(n, 0, false, 1), coordinate_index(n, 0, false, 3), 0});
    t.pairs.push_back({coordinate_index(n, 0, false, 2), coordinate_index(n, 0, false, 4), 1});
    t.phases = 2;
    for (int j = 1; j <= pairs; ++j) {
        const bool crit = (n % 2 == 1) && j == c;
        const int theta = t.phases++;
        const int psi = crit ? -1 : t.phases++;
        for (int l = 1; l <= 4; ++l) {
            const int xi = coordinate_index(n, j, false, l);
            const int yi = coordinate_index(n, j, true, l);
            const bool rotates_theta = l == 1 || l == 3;
            if (rotates_theta) {
                t.pairs.push_back({xi, yi, theta});
            } else if (!crit) {
                t.pairs.push_back({xi, yi, psi});
            } else {
                t.fixed.push_back(xi);
                t.fixed.push_back(yi);
            }
        }
    }
    if (n % 2 == 0)
        for (int l = 1; l <= 4; ++l) t.fixed.push_back(coordinate_index(n, c, false, l));
    std::sort(t.fixed.begin(), t.fixed.end());
    return t;
}

VectorXd apply_torus(const TorusAction& torus, const std::vector<double>& angles,
                     const VectorXd& x) {
    if (static_cast<int>(angles.size()) != torus.phases)
        throw InputError("torus element needs " + std::to_string(torus.phases) + " angles");
    VectorXd out = x;
    for (const TorusPair& p : torus.pairs) {
        const double c = std::cos(angles[p.phase]);
        const double s = std::sin(angles[p.phase]);
        out(p.re) = c * x(p.re) - s * x(p.im);
        out(p.im) = s * x(p.re) + c * x(p.im);
    }
    return out;
}

MatrixXd NormalCoordinates::inverse_transform() const {
    return transform.partialPivLu().inverse();
}

NormalCoordinates normal_coordinates(int n, const GyroParams& params) {
    NormalCoordinates nc;
    nc.n = n;
    nc.params = params;
    nc.lambda_star = stability_threshold(n, params.kappa);
    nc.basis = transition_matrix(n);
    nc.normalizers = parallel_map(static_cast<std::size_t>(n / 2 + 1), [&](std::size_t j) {
        return block_normalizer(static_cast<int>(j), n, params);
    });
    const int dim = 4 * n;
    nc.q_full = MatrixXd::Zero(dim, dim);
    nc.normal_matrix = MatrixXd::Zero(dim, dim);
    for (const ColumnBlock& cb : nc.basis.block_index) {
        nc.q_full.block<4, 4>(cb.offset, cb.offset) = nc.normalizers[cb.j].q_matrix;
        nc.normal_matrix.block<4, 4>(cb.offset, cb.offset) = nc.normalizers[cb.j].normal_matrix;
    }
    nc.transform = nc.basis.p_matrix * nc.q_full;
    nc.coords = coordinate_layout(n);
    return nc;
}

double QuadraticNormalForm::evaluate(const VectorXd& x) const {
    double e = 0.0;
    for (const QuadraticTerm& t : terms)
        for (int i : t.coords) e += t.coefficient * x(i) * x(i);
    return e;
}

QuadraticNormalForm quadratic_normal_form(const NormalCoordinates& nc) {
    QuadraticNormalForm out;
    const int n = nc.n;
    const int pairs = (n % 2 == 1) ? n / 2 : n / 2 - 1;
    auto idx = [&](int j, bool y, int l) { return coordinate_index(n, j, y, l); };
    auto names = [&](const std::vector<int>& ids) {
        std::string s;
        for (size_t i = 0; i < ids.size(); ++i) {
            if (i) s += " + ";
            s += nc.coords[ids[i]].name + "^2";
        }
        return s;
    };
    auto add = [&](std::vector<int> ids, double coeff, const std::string& formula) {
        out.terms.push_back({ids, coeff, names(ids), formula});
    };
    for (int j = 0; j <= n / 2; ++j) {
        const BlockNormalizer& b = nc.normalizers[j];
        const bool two = j >= 1 && j <= pairs;
        auto slots = [&](int la, int lb) {
            std::vector<int> ids{idx(j, false, la), idx(j, false, lb)};
            if (two) {
                ids.push_back(idx(j, true, la));
                ids.push_back(idx(j, true, lb));
            }
            return ids;
        };
        if (b.critical) {
            add(slots(1, 3), 0.5 * b.psi, "psi/2, psi = sqrt((kappa + 4 m Omega^2)/m)");
            std::vector<int> ids{idx(j, false, 2)};
            if (two) ids.push_back(idx(j, true, 2));
            add(ids, 0.5, "1/2");
        } else {
            add(slots(1, 3), 0.5 * b.nu_minus, "nu_minus/2");
            add(slots(2, 4), 0.5 * b.nu_plus, "nu_plus/2");
        }
    }
    return out;
}

QuadraticNormalForm quadratic_normal_form(int n, const GyroParams& params) {
    return quadratic_normal_form(normal_coordinates(n, params));
}

double normal_matrix_energy(const NormalCoordinates& nc, const VectorXd& x) {
    const MatrixXd jinv = -symplectic_form(nc.n);
    return 0.5 * x.dot(jinv * nc.normal_matrix * x);
}

}  // namespace gyrering
