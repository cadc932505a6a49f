#include "gyrering/normalform.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace gyrering {

namespace {

using Monomial = std::array<int, 4>;
using Polynomial = std::map<Monomial, double>;

QuadraticInvariant circle_invariant(int n, int j, int l) {
    const int xi = coordinate_index(n, j, false, l);
    const int yi = coordinate_index(n, j, true, l);
    QuadraticInvariant q;
    q.name = "u" + std::to_string(j) + (j >= 10 ? "_" : "") + std::to_string(l);
    q.terms = {{xi, xi, 1.0}, {yi, yi, 1.0}};
    return q;
}

QuadraticInvariant product_invariant(int n, int j, int la, int lb) {
    const int a = coordinate_index(n, j, false, la);
    const int b = coordinate_index(n, j, false, lb);
    const auto layout = coordinate_layout(n);
    QuadraticInvariant q;
    q.name = la == lb ? layout[a].name + "^2" : layout[a].name + "*" + layout[b].name;
    q.terms = {{a, b, 1.0}};
    return q;
}

Polynomial expand(const QuadraticInvariant& a, const QuadraticInvariant& b) {
    Polynomial p;
    for (const auto& [i, k, c] : a.terms)
        for (const auto& [r, s, d] : b.terms) {
            Monomial m{i, k, r, s};
            std::sort(m.begin(), m.end());
            p[m] += c * d;
        }
    return p;
}

std::string wrap(const std::string& s) {
    return s.find_first_of("^*") == std::string::npos ? s : "(" + s + ")";
}

// Unordered pairs (with squares) of a family product A*B; A == B gives the symmetric square.
void add_family(std::vector<QuarticInvariant>& out, std::vector<Polynomial>& seen,
                const std::string& family, const std::vector<QuadraticInvariant>& a,
                const std::vector<QuadraticInvariant>& b, bool square) {
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t k = square ? i : 0; k < b.size(); ++k) {
            const Polynomial p = expand(a[i], b[k]);
            if (std::find(seen.begin(), seen.end(), p) != seen.end()) continue;
            seen.push_back(p);
            QuarticInvariant q;
            q.family = family;
            q.first = a[i];
            q.second = b[k];
            q.id = (a[i].name == b[k].name) ? wrap(a[i].name) + "^2"
                                            : wrap(a[i].name) + "*" + wrap(b[k].name);
            out.push_back(q);
        }
}

std::vector<std::string> kD3Ids = {"u11^2", "u11*u12", "u12^2", "u13^2", "u13*u14", "u14^2"};

}  // namespace

double QuadraticInvariant::evaluate(const VectorXd& x) const {
    double v = 0.0;
    for (const auto& [i, k, c] : terms) v += c * x(i) * x(k);
    return v;
}

void QuadraticInvariant::add_gradient(const VectorXd& x, double weight, VectorXd& grad) const {
    for (const auto& [i, k, c] : terms) {
        grad(i) += weight * c * x(k);
        grad(k) += weight * c * x(i);
    }
}

std::vector<QuarticInvariant> quartic_invariant_basis(int n) {
    if (n < 3) throw InputError("ring size n must be at least 3");
    const int c = n / 2;
    std::vector<QuadraticInvariant> u21, u23;
    for (int j = 1; j < c; ++j) {
        for (int l : {1, 4}) u21.push_back(circle_invariant(n, j, l));
        for (int l : {2, 3}) u23.push_back(circle_invariant(n, j, l));
    }
    std::vector<QuarticInvariant> out;
    std::vector<Polynomial> seen;
    if (n % 2 == 1) {
        const std::vector<QuadraticInvariant> u22 = {circle_invariant(n, c, 3),
                                                     circle_invariant(n, c, 4)};
        const std::vector<QuadraticInvariant> u24 = {circle_invariant(n, c, 1),
                                                     circle_invariant(n, c, 2)};
        add_family(out, seen, "U24^2", u24, u24, true);
        add_family(out, seen, "U22^2", u22, u22, true);
        add_family(out, seen, "U21^2", u21, u21, true);
        add_family(out, seen, "U21*U22", u21, u22, false);
        add_family(out, seen, "U23^2", u23, u23, true);
        add_family(out, seen, "U23*U24", u23, u24, false);
    } else {
        const std::vector<QuadraticInvariant> u41 = {product_invariant(n, c, 3, 3),
                                                     product_invariant(n, c, 4, 4)};
        const std::vector<QuadraticInvariant> u42 = {product_invariant(n, c, 3, 4)};
        const std::vector<QuadraticInvariant> u43 = {product_invariant(n, c, 1, 1),
                                                     product_invariant(n, c, 2, 2)};
        const std::vector<QuadraticInvariant> u44 = {product_invariant(n, c, 1, 2)};
        add_family(out, seen, "U21^2", u21, u21, true);
        add_family(out, seen, "U21*U41", u21, u41, false);
        add_family(out, seen, "U21*U42", u21, u42, false);
        // Single-product families first so their squares keep their own family label.
        add_family(out, seen, "U42^2", u42, u42, true);
        add_family(out, seen, "U41^2", u41, u41, true);
        add_family(out, seen, "U41*U42", u41, u42, false);
        add_family(out, seen, "U23^2", u23, u23, true);
        add_family(out, seen, "U23*U43", u23, u43, false);
        add_family(out, seen, "U23*U44", u23, u44, false);
        add_family(out, seen, "U44^2", u44, u44, true);
        add_family(out, seen, "U43^2", u43, u43, true);
        add_family(out, seen, "U43*U44", u43, u44, false);
    }
    return out;
}

AveragedQuartic::AveragedQuartic(const NormalCoordinates& nc) : mu_(nc.params.mu) {
    const TorusAction torus = torus_action(nc.n);
    phases_ = torus.phases;
    std::vector<int> owner(nc.dim(), -1);
    for (size_t p = 0; p < torus.pairs.size(); ++p) {
        owner[torus.pairs[p].re] = static_cast<int>(p);
        owner[torus.pairs[p].im] = static_cast<int>(p);
    }
    for (int i = 0; i < nc.n; ++i)
        for (int slot : {0, 1}) {
            const VectorXd l = nc.transform.row(4 * i + slot).transpose();
            linear_rows_.push_back(l);
            Row row;
            row.phase_terms.resize(phases_);
            for (int k : torus.fixed)
                if (l(k) != 0.0) row.fixed.emplace_back(k, l(k));
            for (const TorusPair& p : torus.pairs)
                row.phase_terms[p.phase].push_back(
                    {static_cast<double>(p.re), static_cast<double>(p.im), l(p.re), l(p.im)});
            rows_.push_back(std::move(row));
        }
}

// E over the torus of (R + sum_phi Re(e^{i phi} A_phi))^4 with a_phi = |A_phi|^2 / 2:
// R^4 + 6 R^2 S + 3 S^2 - (3/2) sum a_phi^2, S = sum a_phi.
double AveragedQuartic::value(const VectorXd& x) const {
    double total = 0.0;
    for (const Row& row : rows_) {
        double r = 0.0;
        for (const auto& [k, l] : row.fixed) r += l * x(k);
        double s = 0.0, s_sq = 0.0;
        for (const auto& terms : row.phase_terms) {
            cplx a = 0.0;
            for (const auto& t : terms)
                a += cplx(t[2], -t[3]) * cplx(x(static_cast<int>(t[0])), x(static_cast<int>(t[1])));
            const double ap = 0.5 * std::norm(a);
            s += ap;
            s_sq += ap * ap;
        }
        const double r2 = r * r;
        total += r2 * r2 + 6.0 * r2 * s + 3.0 * s * s - 1.5 * s_sq;
    }
    return 0.25 * mu_ * total;
}

VectorXd AveragedQuartic::gradient(const VectorXd& x) const {
    VectorXd g = VectorXd::Zero(x.size());
    std::vector<cplx> amps(phases_);
    std::vector<double> as(phases_);
    for (const Row& row : rows_) {
        double r = 0.0;
        for (const auto& [k, l] : row.fixed) r += l * x(k);
        double s = 0.0;
        for (int p = 0; p < phases_; ++p) {
            cplx a = 0.0;
            for (const auto& t : row.phase_terms[p])
                a += cplx(t[2], -t[3]) * cplx(x(static_cast<int>(t[0])), x(static_cast<int>(t[1])));
            amps[p] = a;
            as[p] = 0.5 * std::norm(a);
            s += as[p];
        }
        const double de_dr = 4.0 * r * r * r + 12.0 * r * s;
        for (const auto& [k, l] : row.fixed) g(k) += 0.25 * mu_ * de_dr * l;
        for (int p = 0; p < phases_; ++p) {
            const double de_da = 6.0 * r * r + 6.0 * s - 3.0 * as[p];
            for (const auto& t : row.phase_terms[p]) {
                const cplx h = std::conj(amps[p]) * cplx(t[2], -t[3]);
                g(static_cast<int>(t[0])) += 0.25 * mu_ * de_da * h.real();
                g(static_cast<int>(t[1])) += 0.25 * mu_ * de_da * (-h.imag());
            }
        }
    }
    return g;
}

double AveragedQuartic::raw_value(const VectorXd& x) const {
    double total = 0.0;
    for (const VectorXd& l : linear_rows_) {
        const double q = l.dot(x);
        total += q * q * q * q;
    }
    return 0.25 * mu_ * total;
}

const QuarticTerm* QuarticForm::find(const std::string& id) const {
    for (const QuarticTerm& t : terms)
        if (t.id == id) return &t;
    return nullptr;
}

namespace {

// Least squares of the averaged quartic on the invariant basis; restricted zeroes block 0.
std::pair<VectorXd, double> fit(const AveragedQuartic& f, const std::vector<QuarticInvariant>& basis,
                                int dim, int samples, bool restricted, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    // Coordinate k is sampled at the scale where its axis quartic is 1.
    VectorXd scale = VectorXd::Ones(dim);
    for (int k = 0; k < dim; ++k) {
        VectorXd e = VectorXd::Zero(dim);
        e(k) = 1.0;
        const double v = f.value(e);
        if (v > 0.0) scale(k) = std::pow(v, -0.25);
    }
    MatrixXd a(samples, static_cast<int>(basis.size()));
    VectorXd b(samples);
    for (int s = 0; s < samples; ++s) {
        VectorXd x(dim);
        for (int k = 0; k < dim; ++k) x(k) = scale(k) * gauss(rng);
        if (restricted) x.head<4>().setZero();
        for (size_t c = 0; c < basis.size(); ++c) a(s, static_cast<int>(c)) = basis[c].evaluate(x);
        b(s) = f.value(x);
    }
    const VectorXd coef = a.colPivHouseholderQr().solve(b);
    const double res = (a * coef - b).norm() / std::max(b.norm(), 1e-300);
    return {coef, res};
}

}  // namespace

QuarticProjection project_quartic(const NormalCoordinates& nc, unsigned seed) {
    const AveragedQuartic f(nc);
    const std::vector<QuarticInvariant> basis = quartic_invariant_basis(nc.n);
    QuarticProjection out;
    out.samples = 4 * static_cast<int>(basis.size()) + 64;
    const auto [full_coef, full_res] = fit(f, basis, nc.dim(), out.samples, false, seed);
    const auto [coef, res] = fit(f, basis, nc.dim(), out.samples, true, seed + 1);
    out.full_space_residual = full_res;
    out.residual = res;
    for (size_t c = 0; c < basis.size(); ++c)
        out.form.terms.push_back({basis[c].id, basis[c].family, coef(static_cast<int>(c)),
                                  "least-squares projection"});
    return out;
}

std::vector<std::string> d3_invariant_ids() {
    return kD3Ids;
}

QuarticForm d3_quartic_coefficients(const GyroParams& params) {
    const double k = params.kappa;
    const double w2 = params.omega * params.omega;
    const double w4 = w2 * w2;
    const double p2 = k + 4.0 * w2;
    const double p = std::sqrt(p2);
    const double mu = params.mu;
    QuarticForm f;
    const std::vector<std::pair<double, std::string>> a = {
        {1.0 / (8.0 * p2), "1/(8(kappa+4Omega^2))"},
        {w2 / (k * p2 * p), "Omega^2/(kappa(kappa+4Omega^2)^(3/2))"},
        {2.0 * w4 / (k * k * p2 * p2), "2Omega^4/(kappa^2(kappa+4Omega^2)^2)"},
        {2.0 * w4 / (p2 * p2 * p2), "2Omega^4/(kappa+4Omega^2)^3"},
        {k * w2 / (p2 * p2 * p), "kappa Omega^2/(kappa+4Omega^2)^(5/2)"},
        {k * k / (8.0 * p2 * p2), "kappa^2/(8(kappa+4Omega^2)^2)"},
    };
    const char* families[] = {"U24^2", "U24^2", "U24^2", "U22^2", "U22^2", "U22^2"};
    for (int i = 0; i < 6; ++i)
        f.terms.push_back({kD3Ids[i], families[i], mu * a[i].first, "mu * " + a[i].second});
    return f;
}

SplitReduction splitting_remainder(int n, const GyroParams& params, unsigned seed) {
    const NormalCoordinates nc = normal_coordinates(n, params);
    const AveragedQuartic f(nc);
    const int c = n / 2;
    SplitReduction out;
    out.n = n;
    if (n % 2 == 1) {
        out.retained_index = {coordinate_index(n, c, false, 4), coordinate_index(n, c, true, 4)};
    } else {
        out.retained_index = {coordinate_index(n, c, false, 4)};
    }
    for (int i : out.retained_index) out.retained_vars.push_back(nc.coords[i].name);
    for (int k = 0; k < nc.dim(); ++k)
        if (std::find(out.retained_index.begin(), out.retained_index.end(), k) ==
            out.retained_index.end())
            out.eliminated.push_back(nc.coords[k].name);

    VectorXd unit = VectorXd::Zero(nc.dim());
    unit(out.retained_index[0]) = 1.0;
    out.remainder_coeff = f.value(unit);
    if (n == 3) {
        const double k = params.kappa;
        const double p2 = k + 4.0 * params.omega * params.omega;
        out.closed_form_coeff = params.mu * k * k / (8.0 * p2 * p2);
    }

    if (n % 2 == 1) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (int s = 0; s < 16; ++s) {
            const double t = 2.0 * std::numbers::pi * s / 16.0;
            VectorXd x = VectorXd::Zero(nc.dim());
            x(out.retained_index[0]) = std::cos(t);
            x(out.retained_index[1]) = std::sin(t);
            const double v = f.value(x);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        out.rotational_defect = (hi - lo) / std::max(std::abs(hi), 1e-300);
    }

    // H0 has no retained-coordinate terms, so only the quartic enters grad_chi at chi = 0.
    const QuadraticNormalForm h0 = quadratic_normal_form(nc);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int dof = static_cast<int>(out.retained_index.size());
    double worst = 0.0;
    for (int s = 0; s < 50; ++s) {
        VectorXd dir(dof);
        for (int k = 0; k < dof; ++k) dir(k) = gauss(rng);
        dir.normalize();
        const double radius = 0.1 * std::pow(unif(rng), 1.0 / dof);
        VectorXd x = VectorXd::Zero(nc.dim());
        for (int k = 0; k < dof; ++k) x(out.retained_index[k]) = radius * dir(k);
        VectorXd g = f.gradient(x);
        for (const QuadraticTerm& t : h0.terms)
            for (int i : t.coords) g(i) += 2.0 * t.coefficient * x(i);
        for (int i : out.retained_index) g(i) = 0.0;
        worst = std::max(worst, g.cwiseAbs().maxCoeff());
    }
    out.stationarity_residual = worst;
    out.chi_zero_certified = worst <= 1e-10;
    return out;
}

MatrixXd detuning_matrix(const GyroParams& params) {
    const RingSystem one = build_ring(params, {3, Topology::Bidirectional, 1.0});
    const RingSystem zero = build_ring(params, {3, Topology::Bidirectional, 0.0});
    return (one.m_full - zero.m_full) / 3.0;
}

DetunedLinearForm detuned_linear_form(const GyroParams& params, double eta) {
    params.require_hamiltonian();
    const double k = params.kappa;
    if (!(std::abs(eta) <= 0.1 * k))
        throw InputError("detuning |eta| must not exceed 0.1 kappa");
    DetunedLinearForm out;
    out.eta = eta;
    const double lstar = stability_threshold(3, k);
    out.lambda = lstar + eta / 3.0;

    const double w2 = params.omega * params.omega;
    const double w4 = w2 * w2;
    const double p2 = k + 4.0 * w2;
    const double p = std::sqrt(p2);
    const double sr = std::sqrt(w2 + k);
    const double xi1 = w2 + k - params.omega * sr;
    const double xi2 = w2 + k + params.omega * sr;
    const double nu1 = std::sqrt(2.0 * w2 + k - 2.0 * params.omega * sr);
    const double nu2 = std::sqrt(2.0 * w2 + k + 2.0 * params.omega * sr);
    out.b = {xi2 * nu1 / (6.0 * k * (k + w2)),
             xi1 * nu2 / (6.0 * k * (k + w2)),
             w2 / (p2 * p),
             k / (4.0 * p2),
             (5.0 / 3.0) * w2 / (p2 * p),
             (5.0 / 12.0) * k / p2};
    out.h_l_eigenvalues = {cplx(0.0, nu1), cplx(0.0, nu2),
                           std::sqrt(cplx(-p2 * (k * k + 8.0 * w2 * k + 16.0 * w4 + 2.0 * eta * w2),
                                          0.0)) / p2,
                           std::sqrt(cplx(-(2.0 * k + 8.0 * w2) * eta * k, 0.0)) / p2};

    const NormalCoordinates nc = normal_coordinates(3, params);
    const MatrixXd phi = detuning_matrix(params);
    const MatrixXd s_phi = -symplectic_form(3) * phi;
    const MatrixXd h = nc.transform.transpose() * s_phi * nc.transform;
    auto energy = [&](const VectorXd& x) { return 0.5 * x.dot(h * x); };
    const int x13 = coordinate_index(3, 1, false, 3);
    const int y13 = coordinate_index(3, 1, true, 3);
    const int x14 = coordinate_index(3, 1, false, 4);
    double avg = 0.0;
    for (int s = 0; s < 8; ++s) {
        const double t = 2.0 * std::numbers::pi * s / 8.0;
        VectorXd x = VectorXd::Zero(12);
        x(x13) = std::cos(t);
        x(y13) = std::sin(t);
        avg += energy(x) / 8.0;
    }
    VectorXd e14 = VectorXd::Zero(12);
    e14(x14) = 1.0;
    out.b_derived = {avg, energy(e14)};

    const double psi = nc.normalizers[1].psi;
    const auto& n0 = nc.normalizers[0];
    out.h_l_eigenvalues_derived = {
        cplx(0.0, n0.nu_minus), cplx(0.0, n0.nu_plus),
        std::sqrt(cplx(-psi * (psi + 2.0 * eta * out.b_derived[0]), 0.0)),
        std::sqrt(cplx(-2.0 * eta * out.b_derived[1], 0.0))};

    const RingSystem sys = build_ring(params, {3, Topology::Bidirectional, lstar});
    const MatrixXd pert = sys.m_full + eta * phi;
    out.exact_eigenvalues =
        dense_eigen_oracle(nc.transform.partialPivLu().solve(pert * nc.transform));
    out.oracle_eigenvalues =
        dense_eigen_oracle(build_ring(params, {3, Topology::Bidirectional, out.lambda}).m_full);
    return out;
}

}  // namespace gyrering
