#include "report.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

namespace gyrering::cli {

namespace {

std::vector<double> linspace(double a, double b, int points) {
    std::vector<double> v;
    for (int i = 0; i < points; ++i)
        v.push_back(points == 1 ? a : a + (b - a) * static_cast<double>(i) / (points - 1));
    return v;
}

VectorXd random_state(int dim, double amplitude, unsigned long seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    VectorXd z(dim);
    for (int i = 0; i < dim; ++i) z(i) = amplitude * unif(rng);
    return z;
}

std::string svg_portrait(const std::vector<std::vector<Eigen::Vector2d>>& curves, const std::string& xlabel,
                         const std::string& ylabel) {
    double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
    bool first = true;
    for (const auto& c : curves)
        for (const auto& p : c) {
            if (first) {
                xmin = xmax = p.x();
                ymin = ymax = p.y();
                first = false;
            }
            xmin = std::min(xmin, p.x());
            xmax = std::max(xmax, p.x());
            ymin = std::min(ymin, p.y());
            ymax = std::max(ymax, p.y());
        }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;
    const double w = 480, h = 480, pad = 40;
    auto sx = [&](double x) { return pad + (x - xmin) / (xmax - xmin) * (w - 2 * pad); };
    auto sy = [&](double y) { return h - pad - (y - ymin) / (ymax - ymin) * (h - 2 * pad); };
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<text x=\"" << w / 2 << "\" y=\"" << h - 8 << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
    s << "<text x=\"12\" y=\"" << h / 2 << "\" transform=\"rotate(-90 12 " << h / 2
      << ")\" text-anchor=\"middle\">" << ylabel << "</text>\n";
    for (const auto& c : curves) {
        s << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1\" points=\"";
        for (const auto& p : c) s << format_number(sx(p.x())) << "," << format_number(sy(p.y())) << " ";
        s << "\"/>\n";
    }
    s << "</svg>\n";
    return s.str();
}

}  // namespace

CommandResult cmd_verify(const AppConfig& cfg) {
    bool passed = false;
    const Json rep = verify_report(cfg, passed);
    return {passed ? kExitOk : kExitVerifyFailed, rep.dump(2) + "\n"};
}

CommandResult cmd_normalform(const AppConfig& cfg) {
    bool passed = false;
    const Json rep = normalform_report(cfg, passed);
    return {passed ? kExitOk : kExitVerifyFailed, rep.dump(2) + "\n"};
}

CommandResult cmd_spectrum(const AppConfig& cfg) {
    if (cfg.ring.topology != Topology::Bidirectional)
        throw InputError("block spectra are defined for bidirectional rings");
    const double lo = cfg.spectrum.lambda_min.value_or(-cfg.params.kappa);
    const double hi = cfg.spectrum.lambda_max.value_or(0.0);
    const int points = cfg.spectrum.points;
    if (points < 1) throw InputError("spectrum points must be at least 1");
    if (!(std::isfinite(lo) && std::isfinite(hi)) || hi < lo || (points > 1 && hi == lo))
        throw InputError("spectrum range needs lambda_min < lambda_max");
    const int n = cfg.ring.n;
    std::ostringstream out;
    out << csv_preamble(cfg, "spectrum", "lambda_points=" + std::to_string(points));
    out << "record,lambda,j,re_rho_plus,im_rho_plus,re_rho_minus,im_rho_minus,class\n";
    for (double lam : linspace(lo, hi, points))
        for (int j = 0; j <= n / 2; ++j) {
            const BlockSpectrum b = block_eigenvalues(j, n, cfg.params, lam);
            out << "scan," << format_number(lam) << "," << j << "," << format_number(b.rho_plus.real()) << ","
                << format_number(b.rho_plus.imag()) << "," << format_number(b.rho_minus.real()) << ","
                << format_number(b.rho_minus.imag()) << "," << to_string(b.cls) << "\n";
        }
    for (int j = 0; j <= n / 2; ++j) {
        const CriticalCoupling c = critical_coupling(j, n, cfg.params.kappa);
        out << "critical," << (c.lambda_star ? format_number(*c.lambda_star) : "") << "," << j << ",,,,,"
            << (c.lambda_star ? "ZeroPair" : "none") << "\n";
    }
    return {kExitOk, out.str()};
}

CommandResult cmd_bifurcate(const AppConfig& cfg) {
    const BifurcateControls& b = cfg.bifurcate;
    if (b.points < 3) throw InputError("bifurcation grid needs at least 3 points");
    if (!(b.eta_min < 0.0 && b.eta_max > 0.0)) throw InputError("eta range must straddle 0");
    std::vector<double> grid = linspace(b.eta_min, b.eta_max, b.points);
    for (double& e : grid)
        if (std::abs(e) < 1e-15 * (b.eta_max - b.eta_min)) e = 0.0;
    const PitchforkScan scan = pitchfork_scan(cfg.params, grid);
    std::ostringstream out;
    out << csv_preamble(cfg, "bifurcate", "reduction=three-gyro critical block");
    out << "record,eta,n_equilibria,n_centers,branch_radius,exponent\n";
    for (const PitchforkRecord& r : scan.records)
        out << "branch," << format_number(r.eta) << "," << r.equilibria << "," << r.centers << ","
            << format_number(r.radius) << ",\n";
    // Empty exponent when fewer than two branch points fall below eta = 0.
    out << "fit,,,,," << (scan.fit_points >= 2 ? format_number(scan.exponent) : "") << "\n";
    return {kExitOk, out.str()};
}

CommandResult cmd_simulate(const AppConfig& cfg, std::string* svg) {
    const SimulateControls& sc = cfg.simulate;
    std::ostringstream out;
    std::vector<std::vector<Eigen::Vector2d>> curves;

    if (sc.mode == SimulateMode::Reduced) {
        const ReducedSystem rs = ReducedSystem::d3(cfg.params, sc.eta);
        const EquilibriumSet eq = reduced_equilibria(rs, cfg.params);
        std::vector<Vector4d> starts;
        for (const auto& s : sc.initial_states) {
            if (s.size() != 4) throw InputError("reduced initial states need 4 values (x13, x14, y13, y14)");
            starts.emplace_back(s[0], s[1], s[2], s[3]);
        }
        if (starts.empty()) {
            const double scale = eq.branch_radius > 0.0 ? eq.branch_radius : sc.amplitude;
            for (double f : {-1.3, -1.1, -0.9, -0.6, 0.6, 0.9, 1.1, 1.3})
                starts.emplace_back(0.0, f * scale, 0.0, 0.0);
        }
        // In-plane frequency sqrt(lin13 h''(x14)) near the starting amplitude, 200 steps per period.
        double amp = 0.0;
        for (const Vector4d& s : starts) amp = std::max(amp, std::abs(s(1)));
        const double curvature = std::max(2.0 * std::abs(rs.lin14), 3.0 * rs.cubic * amp * amp);
        const double w_ref = std::sqrt(rs.lin13 * std::max(curvature, 1e-300));
        const double dt = sc.dt.value_or(2.0 * std::numbers::pi / w_ref / 200.0);
        IntegratorOptions opts;
        opts.record_every = sc.record_every;
        out << csv_preamble(cfg, "simulate", "mode=reduced; eta=" + format_number(sc.eta) +
                                                 "; dt=" + format_number(dt));
        out << "orbit,t,x13,x14,y13,y14,H\n";
        for (size_t o = 0; o < starts.size(); ++o) {
            const Trajectory tr = simulate_reduced(rs, starts[o], dt, sc.steps, opts);
            std::vector<Eigen::Vector2d> curve;
            for (size_t k = 0; k < tr.states.size(); ++k) {
                const VectorXd& x = tr.states[k];
                out << o << "," << format_number(tr.times[k]);
                for (int i = 0; i < 4; ++i) out << "," << format_number(x(i));
                out << "," << format_number(tr.energies[k]) << "\n";
                curve.emplace_back(x(1), x(0));
            }
            curves.push_back(curve);
        }
        if (svg) *svg = svg_portrait(curves, "x14", "x13");
        return {kExitOk, out.str()};
    }

    const RingSystem sys = build_ring(cfg.params, cfg.ring);
    VectorXd z0;
    if (!sc.initial_states.empty()) {
        const auto& s = sc.initial_states.front();
        if (static_cast<int>(s.size()) != sys.dim())
            throw InputError("full initial state needs 4N = " + std::to_string(sys.dim()) + " values");
        z0 = Eigen::Map<const VectorXd>(s.data(), sys.dim());
    } else {
        z0 = random_state(sys.dim(), sc.amplitude, sc.seed);
    }
    const double dt = sc.dt.value_or(default_timestep(sys));
    const bool forced = sc.mode == SimulateMode::Forced;
    Trajectory tr;
    if (forced) {
        tr = integrate_forced(sys, z0, dt, sc.steps, sc.record_every);
    } else {
        IntegratorOptions opts;
        opts.record_every = sc.record_every;
        tr = integrate_unforced(sys, z0, dt, sc.steps, opts);
    }
    out << csv_preamble(cfg, "simulate", std::string("mode=") + to_string(sc.mode) + "; dt=" + format_number(dt) +
                                             "; seed=" + std::to_string(sc.seed) +
                                             (forced ? "; a_d=" + format_number(cfg.params.a_d) +
                                                           "; w_d=" + format_number(cfg.params.w_d)
                                                     : ""));
    out << "t";
    for (int i = 1; i <= sys.n(); ++i)
        for (const char* c : {"q1_", "q2_", "p1_", "p2_"}) out << "," << c << i;
    if (!forced) out << ",H";
    out << "\n";
    std::vector<Eigen::Vector2d> curve;
    for (size_t k = 0; k < tr.states.size(); ++k) {
        out << format_number(tr.times[k]);
        for (int i = 0; i < sys.dim(); ++i) out << "," << format_number(tr.states[k](i));
        if (!forced) out << "," << format_number(tr.energies[k]);
        out << "\n";
        curve.emplace_back(tr.states[k](0), tr.states[k](2));
    }
    if (svg) *svg = svg_portrait({curve}, "q1_1", "p1_1");
    return {kExitOk, out.str()};
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Coupled-gyroscope ring analysis", "gyrering"};
    app.require_subcommand(1);
    std::string config_path, out_path, svg_path;
    std::optional<double> lambda_min, lambda_max, eta_min, eta_max, eta;
    std::optional<int> points;
    std::string mode;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config_path, "YAML configuration file")->required();
        sub->add_option("-o,--out", out_path, "Output file (default: stdout)");
    };
    CLI::App* verify = app.add_subcommand("verify", "Structure, symplecticity and spectrum checks");
    add_common(verify);
    CLI::App* spectrum = app.add_subcommand("spectrum", "Block spectra over a coupling range (CSV)");
    add_common(spectrum);
    spectrum->add_option("--lambda-min", lambda_min);
    spectrum->add_option("--lambda-max", lambda_max);
    spectrum->add_option("--points", points);
    CLI::App* simulate = app.add_subcommand("simulate", "Integrate the full, forced or reduced system (CSV)");
    add_common(simulate);
    simulate->add_option("--mode", mode)->check(CLI::IsMember({"full", "forced", "reduced"}));
    simulate->add_option("--eta", eta, "Detuning for reduced mode");
    simulate->add_option("--svg", svg_path, "Write a phase portrait");
    CLI::App* bifurcate = app.add_subcommand("bifurcate", "Pitchfork branch diagram of the reduced system (CSV)");
    add_common(bifurcate);
    bifurcate->add_option("--eta-min", eta_min);
    bifurcate->add_option("--eta-max", eta_max);
    bifurcate->add_option("--points", points);
    CLI::App* normalform = app.add_subcommand("normalform", "Normal-form coefficients and checks (JSON)");
    add_common(normalform);
    normalform->add_option("--eta", eta, "Detuning for the linear perturbation");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, e2;
        const int code = app.exit(e, o, e2);
        out << o.str();
        err << e2.str();
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        AppConfig cfg = load_config(config_path);
        CommandResult res;
        std::string svg;
        if (verify->parsed()) {
            res = cmd_verify(cfg);
        } else if (spectrum->parsed()) {
            if (lambda_min) cfg.spectrum.lambda_min = lambda_min;
            if (lambda_max) cfg.spectrum.lambda_max = lambda_max;
            if (points) cfg.spectrum.points = *points;
            res = cmd_spectrum(cfg);
        } else if (simulate->parsed()) {
            if (mode == "full") cfg.simulate.mode = SimulateMode::Full;
            if (mode == "forced") cfg.simulate.mode = SimulateMode::Forced;
            if (mode == "reduced") cfg.simulate.mode = SimulateMode::Reduced;
            if (eta) cfg.simulate.eta = *eta;
            res = cmd_simulate(cfg, svg_path.empty() ? nullptr : &svg);
        } else if (bifurcate->parsed()) {
            if (eta_min) cfg.bifurcate.eta_min = *eta_min;
            if (eta_max) cfg.bifurcate.eta_max = *eta_max;
            if (points) cfg.bifurcate.points = *points;
            res = cmd_bifurcate(cfg);
        } else {
            if (eta) cfg.normalform.eta = eta;
            res = cmd_normalform(cfg);
        }
        if (out_path.empty()) {
            out << res.output;
        } else {
            std::ofstream f(out_path, std::ios::binary);
            if (!f) throw InputError("cannot write output file '" + out_path + "'");
            f << res.output;
        }
        if (!svg_path.empty()) {
            std::ofstream f(svg_path, std::ios::binary);
            if (!f) throw InputError("cannot write SVG file '" + svg_path + "'");
            f << svg;
        }
        if (res.exit_code == kExitVerifyFailed) err << "gyrering: one or more checks failed\n";
        return res.exit_code;
    } catch (const ConfigError& e) {
        err << "gyrering: config error: " << e.what() << "\n";
        return kExitInput;
    } catch (const InputError& e) {
        err << "gyrering: input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const NumericalError& e) {
        err << "gyrering: runtime failure";
        if (e.step() >= 0) err << " at step " << e.step();
        err << ": " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << "gyrering: runtime failure: " << e.what() << "\n";
        return kExitRuntime;
    }
}

}  // namespace gyrering::cli
