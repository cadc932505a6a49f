#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <random>

namespace gyrering::cli {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

namespace {

// JSON has no inf/nan; non-finite values are written as strings.
Json number(double v) {
    if (std::isfinite(v)) return v;
    return format_number(v);
}

Json matrix_json(const MatrixXd& m) {
    Json rows = Json::array();
    for (int r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(number(m(r, c)));
        rows.push_back(row);
    }
    return rows;
}

Json complex_list(const std::vector<cplx>& v) {
    Json out = Json::array();
    for (const cplx& z : v) out.push_back(Json::array({number(z.real()), number(z.imag())}));
    return out;
}

double max_abs(const MatrixXd& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace

Json quantity(double v, const std::string& formula) {
    Json j;
    j["value"] = number(v);
    j["formula"] = formula;
    return j;
}

Json quantity(const cplx& v, const std::string& formula) {
    Json j;
    j["value"] = Json::array({number(v.real()), number(v.imag())});
    j["formula"] = formula;
    return j;
}

void CheckLedger::add(const std::string& name, bool passed, double residual, double tolerance,
                      const std::string& formula) {
    Json e;
    e["check"] = name;
    e["passed"] = passed;
    e["residual"] = quantity(residual, formula);
    e["tolerance"] = number(tolerance);
    entries.push_back(e);
    all_passed = all_passed && passed;
}

Json config_echo(const AppConfig& cfg) {
    Json j;
    j["source"] = cfg.origin;
    j["units"] = to_string(cfg.params.units);
    Json g;
    g["m"] = cfg.params.m;
    g["kappa"] = cfg.params.kappa;
    g["mu"] = cfg.params.mu;
    g["omega"] = cfg.params.omega;
    g["c_x"] = cfg.params.c_x;
    g["c_y"] = cfg.params.c_y;
    g["a_d"] = cfg.params.a_d;
    g["w_d"] = cfg.params.w_d;
    j["gyro"] = g;
    Json r;
    r["n"] = cfg.ring.n;
    r["topology"] = to_string(cfg.ring.topology);
    r["lambda"] = cfg.ring.lambda;
    j["ring"] = r;
    return j;
}

std::string csv_preamble(const AppConfig& cfg, const std::string& command, const std::string& extra) {
    std::string s = "# gyrering " + command + "; units=" + to_string(cfg.params.units) +
                    "; n=" + std::to_string(cfg.ring.n) +
                    "; topology=" + to_string(cfg.ring.topology) +
                    "; kappa=" + format_number(cfg.params.kappa) +
                    "; mu=" + format_number(cfg.params.mu) +
                    "; omega=" + format_number(cfg.params.omega) +
                    "; m=" + format_number(cfg.params.m);
    if (!extra.empty()) s += "; " + extra;
    return s + "\n";
}

Json verify_report(const AppConfig& cfg, bool& all_passed) {
    const RingSystem sys = build_ring(cfg.params, cfg.ring);
    const int n = cfg.ring.n;
    const bool bidir = cfg.ring.topology == Topology::Bidirectional;
    const bool dense_ok = sys.dim() <= 256;
    CheckLedger ledger;

    Json rep;
    rep["command"] = "verify";
    rep["config"] = config_echo(cfg);

    const double mscale = std::max(max_abs(sys.m_full), 1e-300);
    const double defect = hamiltonian_defect(sys.m_full, sys.j_full) / mscale;
    const bool hamiltonian = defect <= 1e-12;
    Json hs;
    hs["verdict"] = hamiltonian ? "Hamiltonian" : "not Hamiltonian";
    hs["relative_defect"] = quantity(defect, "max|M^T J + J M| / max|M|");
    if (bidir) {
        ledger.add("hamiltonian_structure", hamiltonian, defect, 1e-12, "max|M^T J + J M| / max|M|");
    } else {
        // S - S^T = -lambda at (q1_i, q1_{i+1}) and +lambda at the transposed position.
        MatrixXd predicted = MatrixXd::Zero(sys.dim(), sys.dim());
        for (int i = 0; i < n; ++i) {
            predicted(4 * i, 4 * ((i + 1) % n)) += -cfg.ring.lambda;
            predicted(4 * ((i + 1) % n), 4 * i) += cfg.ring.lambda;
        }
        const double pattern =
            max_abs(symmetric_defect(sys) - predicted) / std::max(std::abs(cfg.ring.lambda), 1e-300);
        hs["coupling_pattern_residual"] =
            quantity(pattern, "max|(S - S^T) - D_pred| / |lambda|, D_pred = -+lambda at (q1_i, q1_i+1)");
        hs["expected"] = cfg.ring.lambda != 0.0 ? "not Hamiltonian" : "Hamiltonian";
        ledger.add("unidirectional_coupling_pattern", pattern <= 1e-12, pattern, 1e-12,
                   "max|(S - S^T) - D_pred| / |lambda|");
    }
    rep["hamiltonian_structure"] = hs;

    if (bidir) {
        const IsotypicBasis basis = transition_matrix(n);
        const MatrixXd& p = basis.p_matrix;
        const double symp = max_abs(p.transpose() * sys.j_full * p - sys.j_full);
        const double orth = max_abs(p.transpose() * p - MatrixXd::Identity(sys.dim(), sys.dim()));
        ledger.add("transition_matrix_symplectic", symp <= 1e-10, symp, 1e-10, "max|P^T J P - J|");
        ledger.add("transition_matrix_orthogonal", orth <= 1e-10, orth, 1e-10, "max|P^T P - I|");
        const double bd =
            max_abs(p.transpose() * sys.m_full * p - block_diagonal_matrix(basis, cfg.params, cfg.ring)) /
            mscale;
        ledger.add("block_diagonalization", bd <= 1e-12, bd, 1e-12, "max|P^T M P - diag(M_j)| / max|M|");

        Json blocks = Json::array();
        std::vector<cplx> union_spec;
        double worst_block = 0.0;
        for (int j = 0; j <= n / 2; ++j) {
            const BlockSpectrum b = block_eigenvalues(j, n, cfg.params, cfg.ring.lambda);
            Json bj;
            bj["j"] = j;
            bj["rho_plus"] = quantity(b.rho_plus, "sqrt((-b + sqrt(s_j))/m), b = kappa + 2 m Omega^2 + L");
            bj["rho_minus"] = quantity(b.rho_minus, "sqrt((-b - sqrt(s_j))/m)");
            bj["s_j"] = quantity(b.s_j, "4 m Omega^2 (kappa + m Omega^2 + L) + L^2, L = lambda(1 - cos 2 pi j/N)");
            bj["effective_stiffness"] = quantity(b.effective_stiffness, "kappa + 2 lambda (1 - cos 2 pi j/N)");
            bj["class"] = to_string(b.cls);
            blocks.push_back(bj);
            const int mult = (j == 0 || (n % 2 == 0 && j == n / 2)) ? 1 : 2;
            for (int r = 0; r < mult; ++r)
                for (const cplx& e : b.all()) union_spec.push_back(e);
            const std::vector<cplx> dense_block = dense_eigen_oracle(block(j, cfg.params, cfg.ring));
            worst_block = std::max(worst_block, worst_nearest(b.all(), dense_block, spectral_scale(dense_block)));
        }
        rep["spectrum"]["blocks"] = blocks;
        ledger.add("block_closed_form_vs_block_dense", worst_block <= 1e-8, worst_block, 1e-8,
                   "max_rho min|rho - eig(M_j)| / max|eig(M_j)|");
        if (dense_ok) {
            const std::vector<cplx> dense = dense_eigen_oracle(sys.m_full);
            const double mm = spectrum_mismatch(union_spec, dense, spectral_scale(dense));
            ledger.add("block_union_vs_dense_spectrum", mm <= 1e-8, mm, 1e-8,
                       "matched max|rho - eig(M)| / max|eig(M)|");
        } else {
            rep["spectrum"]["dense_check"] = "skipped: 4N exceeds the dense oracle limit 256";
        }

        Json crit = Json::array();
        for (int j = 0; j <= n / 2; ++j) {
            const CriticalCoupling c = critical_coupling(j, n, cfg.params.kappa);
            Json cj;
            cj["j"] = j;
            cj["lambda_star"] = c.lambda_star ? quantity(*c.lambda_star, "-kappa / (2 (1 - cos 2 pi j/N))")
                                              : Json(nullptr);
            crit.push_back(cj);
        }
        rep["critical_couplings"] = crit;
        Json st;
        st["class"] = to_string(classify_origin(n, cfg.params, cfg.ring.lambda));
        st["threshold"] = quantity(stability_threshold(n, cfg.params.kappa), "lambda*_{floor(N/2)}");
        rep["stability"] = st;

        for (int j = 0; j <= n / 2; ++j) {
            const BlockNormalizer bn = block_normalizer(j, n, cfg.params);
            ledger.add("normalizer_symplectic_j" + std::to_string(j), bn.symplectic_residual <= 1e-10,
                       bn.symplectic_residual, 1e-10, "max|Q^T J4 Q - J4|");
            ledger.add("normalizer_conjugation_j" + std::to_string(j), bn.conjugation_residual <= 1e-9,
                       bn.conjugation_residual, 1e-9, "max|Q^{-1} M_j Q - normal| / max|M_j|");
        }
    } else if (dense_ok) {
        const std::vector<cplx> dense = dense_eigen_oracle(sys.m_full);
        double max_re = 0.0;
        for (const cplx& e : dense) max_re = std::max(max_re, e.real());
        rep["spectrum"]["dense"] = complex_list(dense);
        rep["spectrum"]["max_real_part"] = quantity(max_re, "max Re eig(M)");
    }

    rep["checks"] = ledger.entries;
    rep["all_checks_passed"] = ledger.all_passed;
    all_passed = ledger.all_passed;
    return rep;
}

Json normalform_report(const AppConfig& cfg, bool& all_passed) {
    if (cfg.ring.topology != Topology::Bidirectional)
        throw InputError("normal forms are defined for bidirectional rings");
    const int n = cfg.ring.n;
    const GyroParams& params = cfg.params;
    if (4 * n > 256) throw InputError("normal-form analysis is limited to n <= 64");
    const NormalCoordinates nc = normal_coordinates(n, params);
    CheckLedger ledger;

    Json rep;
    rep["command"] = "normalform";
    rep["config"] = config_echo(cfg);
    rep["normalization_point"] = quantity(nc.lambda_star, "lambda*_{floor(N/2)} = -kappa / (2 (1 - cos 2 pi floor(N/2)/N))");

    Json blocks = Json::array();
    for (const BlockNormalizer& b : nc.normalizers) {
        Json bj;
        bj["j"] = b.j;
        bj["critical"] = b.critical;
        bj["source"] = to_string(b.source);
        bj["closed_form_tried"] = b.formula;
        if (b.critical) {
            bj["psi"] = quantity(b.psi, "sqrt((kappa + 4 m Omega^2)/m)");
        } else {
            bj["nu_minus"] = quantity(b.nu_minus, "|rho_plus_j| at lambda*");
            bj["nu_plus"] = quantity(b.nu_plus, "|rho_minus_j| at lambda*");
            bj["omega"] = quantity(b.omega_int, "2 lambda* (1 - cos 2 pi j/N)");
            bj["q"] = quantity(b.q_int, "sqrt(16 m Omega^2 kappa + (kappa omega - 4 m Omega^2)^2)");
            bj["c1"] = quantity(b.c1, "(q^2 - (4 m Omega^2 + kappa omega) q) / ((q - kappa omega)^2 m)");
            bj["c2"] = quantity(b.c2, "(q^2 + (4 m Omega^2 + kappa omega) q) / ((q + kappa omega)^2 m)");
        }
        bj["closed_form_symplectic_residual"] = number(b.closed_form_symplectic_residual);
        bj["closed_form_conjugation_residual"] = number(b.closed_form_conjugation_residual);
        bj["symplectic_residual"] = number(b.symplectic_residual);
        bj["conjugation_residual"] = number(b.conjugation_residual);
        bj["q_matrix"] = matrix_json(b.q_matrix);
        blocks.push_back(bj);
        ledger.add("normalizer_symplectic_j" + std::to_string(b.j), b.symplectic_residual <= 1e-10,
                   b.symplectic_residual, 1e-10, "max|Q^T J4 Q - J4|");
        ledger.add("normalizer_conjugation_j" + std::to_string(b.j), b.conjugation_residual <= 1e-9,
                   b.conjugation_residual, 1e-9, "max|Q^{-1} M_j Q - normal| / max|M_j|");
    }
    rep["blocks"] = blocks;

    if (n == 3) {
        Json dv = Json::array();
        for (const DisplayedVariant& v : d3_displayed_variants(params)) {
            Json e;
            e["name"] = v.name;
            e["j"] = v.j;
            e["symplectic_residual"] = number(v.check.symplectic);
            e["conjugation_residual"] = number(v.check.conjugation);
            e["accepted"] = v.accepted;
            dv.push_back(e);
        }
        rep["displayed_variants"] = dv;
    }

    const QuadraticNormalForm h0 = quadratic_normal_form(nc);
    Json h0j = Json::array();
    for (const QuadraticTerm& t : h0.terms) {
        Json e;
        e["coordinates"] = t.label;
        e["coefficient"] = quantity(t.coefficient, t.formula);
        h0j.push_back(e);
    }
    rep["quadratic_normal_form"] = h0j;
    {
        const RingSystem crit = build_ring(params, {n, Topology::Bidirectional, nc.lambda_star});
        const MatrixXd s = crit.s_full();
        std::mt19937_64 rng(11);
        std::normal_distribution<double> gauss(0.0, 1.0);
        double worst_tab = 0.0, worst_cov = 0.0;
        for (int k = 0; k < 100; ++k) {
            VectorXd x(nc.dim());
            for (int i = 0; i < nc.dim(); ++i) x(i) = gauss(rng);
            const double tab = h0.evaluate(x);
            const double mat = normal_matrix_energy(nc, x);
            const VectorXd z = nc.transform * x;
            const double cov = 0.5 * z.dot(s * z);
            const double sc = std::max(std::abs(tab), 1e-300);
            worst_tab = std::max(worst_tab, std::abs(tab - mat) / sc);
            worst_cov = std::max(worst_cov, std::abs(tab - cov) / sc);
        }
        ledger.add("quadratic_table_vs_normal_matrix", worst_tab <= 1e-9, worst_tab, 1e-9,
                   "|H0(X) - X^T J^{-1} N X / 2| / |H0(X)|");
        ledger.add("quadratic_table_vs_ring_energy", worst_cov <= 1e-9, worst_cov, 1e-9,
                   "|H0(X) - (T X)^T S (T X) / 2| / |H0(X)|");
    }

    const QuarticProjection proj = project_quartic(nc);
    Json qj;
    qj["samples"] = proj.samples;
    qj["full_space_residual"] = quantity(proj.full_space_residual, "|A c - f| / |f|, all normal coordinates");
    qj["residual_without_block0"] = quantity(proj.residual, "|A c - f| / |f|, X_0 = 0");
    Json terms = Json::array();
    for (const QuarticTerm& t : proj.form.terms) {
        Json e;
        e["id"] = t.id;
        e["family"] = t.family;
        e["coefficient"] = quantity(t.coefficient, t.formula);
        terms.push_back(e);
    }
    qj["terms"] = terms;
    rep["quartic"] = qj;
    ledger.add("quartic_projection_residual", proj.full_space_residual <= 1e-8, proj.full_space_residual, 1e-8,
               "|A c - f| / |f| over all normal coordinates");

    if (n == 3) {
        const QuarticForm closed = d3_quartic_coefficients(params);
        Json aj = Json::array();
        double worst = 0.0;
        for (const QuarticTerm& t : closed.terms) {
            const QuarticTerm* p = proj.form.find(t.id);
            const double got = p ? p->coefficient : 0.0;
            const double rel = std::abs(got - t.coefficient) / std::abs(t.coefficient);
            worst = std::max(worst, rel);
            Json e;
            e["id"] = t.id;
            e["closed_form"] = quantity(t.coefficient, t.formula);
            e["projected"] = quantity(got, "least-squares projection");
            e["relative_difference"] = number(rel);
            aj.push_back(e);
        }
        rep["d3_quartic_coefficients"] = aj;
        ledger.add("d3_coefficients_vs_closed_form", worst <= 1e-9, worst, 1e-9,
                   "max_i |c_i - mu a_i| / |mu a_i|");
    }

    const SplitReduction sr = splitting_remainder(n, params);
    Json sj;
    sj["retained_vars"] = sr.retained_vars;
    sj["eliminated_count"] = sr.eliminated.size();
    sj["remainder_coeff"] = quantity(sr.remainder_coeff, "averaged quartic at unit retained vector");
    if (sr.closed_form_coeff)
        sj["closed_form_coeff"] = quantity(*sr.closed_form_coeff, "mu kappa^2 / (8 (kappa + 4 Omega^2)^2)");
    sj["stationarity_residual"] = quantity(sr.stationarity_residual, "max |grad_chi H(0, u)|, |u| <= 0.1");
    sj["chi_zero_certified"] = sr.chi_zero_certified;
    if (n % 2 == 1) sj["rotational_defect"] = number(sr.rotational_defect);
    rep["splitting"] = sj;
    ledger.add("splitting_chi_zero_stationary", sr.chi_zero_certified, sr.stationarity_residual, 1e-10,
               "max |grad_chi H(0, u)|");

    if (n == 3) {
        const double eta = cfg.normalform.eta.value_or(-0.01 * params.kappa);
        const DetunedLinearForm d = detuned_linear_form(params, eta);
        Json dj;
        dj["eta"] = number(d.eta);
        dj["lambda"] = quantity(d.lambda, "lambda* + eta/3");
        const char* bf[] = {"xi2 nu1 / (6 kappa (kappa + Omega^2))", "xi1 nu2 / (6 kappa (kappa + Omega^2))",
                            "Omega^2 / psi^3", "kappa / (4 psi^2)", "(5/3) Omega^2 / psi^3",
                            "(5/12) kappa / psi^2"};
        for (int i = 0; i < 6; ++i) dj["b" + std::to_string(i + 1)] = quantity(d.b[i], bf[i]);
        dj["b3_derived"] = quantity(d.b_derived[0], "torus average of the perturbation on (x13, y13)");
        dj["b4_derived"] = quantity(d.b_derived[1], "perturbation energy at unit x14");
        const char* lf[] = {"i nu1", "i nu2", "sqrt(-psi^2 (psi^4 + 2 eta Omega^2)) / psi^2",
                            "sqrt(-(2 kappa + 8 Omega^2) eta kappa) / psi^2"};
        Json ev = Json::array();
        for (int i = 0; i < 4; ++i) {
            Json e;
            e["name"] = "lambda" + std::to_string(i + 1);
            e["closed_form"] = quantity(d.h_l_eigenvalues[i], lf[i]);
            e["derived"] = quantity(d.h_l_eigenvalues_derived[i], "first-order normal form with derived b");
            ev.push_back(e);
        }
        dj["h_l_eigenvalues"] = ev;
        dj["dense_eigenvalues"] = complex_list(d.oracle_eigenvalues);
        const double mm = spectrum_mismatch(d.exact_eigenvalues, d.oracle_eigenvalues,
                                            spectral_scale(d.oracle_eigenvalues));
        dj["normal_coordinates_vs_dense"] = quantity(mm, "matched eig(T^{-1}(M + eta Phi) T) vs eig(M(lambda))");
        rep["detuning"] = dj;
        ledger.add("detuning_transformed_vs_dense", mm <= 1e-8, mm, 1e-8,
                   "matched eig(T^{-1}(M + eta Phi) T) vs eig(M(lambda* + eta/3))");
    }

    rep["checks"] = ledger.entries;
    rep["all_checks_passed"] = ledger.all_passed;
    all_passed = ledger.all_passed;
    return rep;
}

}  // namespace gyrering::cli
