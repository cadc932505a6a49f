#include "gyrering/cli.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

namespace gyrering::cli {

ConfigError::ConfigError(const std::string& what, int line, int column)
    : InputError(line > 0 ? what + " (line " + std::to_string(line) + ", column " +
                                std::to_string(column) + ")"
                          : what),
      line_(line),
      column_(column) {}

const char* to_string(SimulateMode m) {
    switch (m) {
    case SimulateMode::Full: return "full";
    case SimulateMode::Forced: return "forced";
    case SimulateMode::Reduced: return "reduced";
    }
    return "?";
}

namespace {

[[noreturn]] void fail(const YAML::Node& node, const std::string& what) {
    const YAML::Mark mark = node.Mark();
    if (mark.is_null()) throw ConfigError(what);
    throw ConfigError(what, mark.line + 1, mark.column + 1);
}

void require_map(const YAML::Node& node, const std::string& name) {
    if (!node.IsMap()) fail(node, "section '" + name + "' must be a mapping");
}

void reject_unknown(const YAML::Node& node, const std::string& section,
                    const std::set<std::string>& allowed) {
    for (const auto& kv : node) {
        const std::string key = kv.first.as<std::string>();
        if (!allowed.count(key))
            fail(kv.first, "unknown key '" + key + "' in " + section);
    }
}

template <class T>
T scalar(const YAML::Node& node, const std::string& key) {
    if (!node.IsScalar()) fail(node, "'" + key + "' must be a scalar");
    try {
        return node.as<T>();
    } catch (const YAML::BadConversion&) {
        fail(node, "'" + key + "' has an invalid value '" + node.Scalar() + "'");
    }
}

template <class T>
void read(const YAML::Node& map, const std::string& key, T& out) {
    if (const YAML::Node v = map[key]) out = scalar<T>(v, key);
}

template <class T>
void read(const YAML::Node& map, const std::string& key, std::optional<T>& out) {
    if (const YAML::Node v = map[key]) out = scalar<T>(v, key);
}

double positive(const YAML::Node& map, const std::string& key, double value) {
    if (!(value > 0.0)) fail(map[key], "'" + key + "' must be positive");
    return value;
}

}  // namespace

AppConfig parse_config(const std::string& text, const std::string& origin) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError("malformed configuration: " + e.msg, e.mark.line + 1, e.mark.column + 1);
    }
    if (!root.IsMap()) throw ConfigError("configuration must be a mapping at the top level", 1, 1);
    reject_unknown(root, "top level",
                   {"units", "gyro", "ring", "simulate", "spectrum", "bifurcate", "normalform"});

    AppConfig cfg;
    cfg.origin = origin;

    const YAML::Node units = root["units"];
    if (!units) throw ConfigError("missing required key 'units' (nondimensional|physical)", 1, 1);
    const std::string u = scalar<std::string>(units, "units");
    if (u == "nondimensional")
        cfg.params.units = Units::Nondimensional;
    else if (u == "physical")
        cfg.params.units = Units::Physical;
    else
        fail(units, "'units' must be 'nondimensional' or 'physical', got '" + u + "'");

    const YAML::Node gyro = root["gyro"];
    if (!gyro) throw ConfigError("missing required section 'gyro'", 1, 1);
    require_map(gyro, "gyro");
    reject_unknown(gyro, "gyro", {"m", "kappa", "mu", "omega", "c_x", "c_y", "a_d", "w_d"});
    for (const char* key : {"kappa", "mu", "omega"})
        if (!gyro[key]) fail(gyro, std::string("gyro section is missing '") + key + "'");
    read(gyro, "m", cfg.params.m);
    read(gyro, "kappa", cfg.params.kappa);
    read(gyro, "mu", cfg.params.mu);
    read(gyro, "omega", cfg.params.omega);
    read(gyro, "c_x", cfg.params.c_x);
    read(gyro, "c_y", cfg.params.c_y);
    read(gyro, "a_d", cfg.params.a_d);
    read(gyro, "w_d", cfg.params.w_d);
    if (cfg.params.units == Units::Nondimensional && gyro["m"] && cfg.params.m != 1.0)
        fail(gyro["m"], "nondimensional units fix m = 1");
    try {
        cfg.params.validate();
    } catch (const InputError& e) {
        fail(gyro, e.what());
    }

    const YAML::Node ring = root["ring"];
    if (!ring) throw ConfigError("missing required section 'ring'", 1, 1);
    require_map(ring, "ring");
    reject_unknown(ring, "ring", {"n", "topology", "lambda", "lambda_offset"});
    if (!ring["n"]) fail(ring, "ring section is missing 'n'");
    read(ring, "n", cfg.ring.n);
    if (cfg.ring.n < 3) fail(ring["n"], "'n' must be at least 3");
    if (const YAML::Node t = ring["topology"]) {
        const std::string topo = scalar<std::string>(t, "topology");
        if (topo == "bidirectional")
            cfg.ring.topology = Topology::Bidirectional;
        else if (topo == "unidirectional")
            cfg.ring.topology = Topology::Unidirectional;
        else
            fail(t, "'topology' must be 'bidirectional' or 'unidirectional'");
    }
    if (ring["lambda"] && ring["lambda_offset"])
        fail(ring["lambda_offset"], "give either 'lambda' or 'lambda_offset', not both");
    if (ring["lambda"]) {
        read(ring, "lambda", cfg.ring.lambda);
    } else if (ring["lambda_offset"]) {
        double offset = 0.0;
        read(ring, "lambda_offset", offset);
        cfg.ring.lambda = stability_threshold(cfg.ring.n, cfg.params.kappa) + offset;
    } else {
        fail(ring, "ring section needs 'lambda' or 'lambda_offset'");
    }
    if (!std::isfinite(cfg.ring.lambda)) fail(ring, "coupling must be finite");

    if (const YAML::Node sim = root["simulate"]) {
        require_map(sim, "simulate");
        reject_unknown(sim, "simulate",
                       {"mode", "dt", "steps", "record_every", "seed", "amplitude", "eta",
                        "initial_states"});
        if (const YAML::Node m = sim["mode"]) {
            const std::string mode = scalar<std::string>(m, "mode");
            if (mode == "full")
                cfg.simulate.mode = SimulateMode::Full;
            else if (mode == "forced")
                cfg.simulate.mode = SimulateMode::Forced;
            else if (mode == "reduced")
                cfg.simulate.mode = SimulateMode::Reduced;
            else
                fail(m, "'mode' must be full, forced or reduced");
        }
        read(sim, "dt", cfg.simulate.dt);
        if (cfg.simulate.dt) positive(sim, "dt", *cfg.simulate.dt);
        read(sim, "steps", cfg.simulate.steps);
        if (cfg.simulate.steps < 1) fail(sim["steps"], "'steps' must be at least 1");
        read(sim, "record_every", cfg.simulate.record_every);
        if (cfg.simulate.record_every < 1) fail(sim["record_every"], "'record_every' must be at least 1");
        read(sim, "seed", cfg.simulate.seed);
        read(sim, "amplitude", cfg.simulate.amplitude);
        positive(sim, "amplitude", cfg.simulate.amplitude);
        read(sim, "eta", cfg.simulate.eta);
        if (const YAML::Node init = sim["initial_states"]) {
            if (!init.IsSequence()) fail(init, "'initial_states' must be a list of state lists");
            for (const YAML::Node& s : init) {
                if (!s.IsSequence()) fail(s, "each initial state must be a list of numbers");
                std::vector<double> v;
                for (const YAML::Node& x : s) v.push_back(scalar<double>(x, "initial_states"));
                cfg.simulate.initial_states.push_back(v);
            }
        }
    }

    if (const YAML::Node sp = root["spectrum"]) {
        require_map(sp, "spectrum");
        reject_unknown(sp, "spectrum", {"lambda_min", "lambda_max", "points"});
        read(sp, "lambda_min", cfg.spectrum.lambda_min);
        read(sp, "lambda_max", cfg.spectrum.lambda_max);
        read(sp, "points", cfg.spectrum.points);
    }

    if (const YAML::Node bf = root["bifurcate"]) {
        require_map(bf, "bifurcate");
        reject_unknown(bf, "bifurcate", {"eta_min", "eta_max", "points"});
        read(bf, "eta_min", cfg.bifurcate.eta_min);
        read(bf, "eta_max", cfg.bifurcate.eta_max);
        read(bf, "points", cfg.bifurcate.points);
    }

    if (const YAML::Node nf = root["normalform"]) {
        require_map(nf, "normalform");
        reject_unknown(nf, "normalform", {"eta"});
        read(nf, "eta", cfg.normalform.eta);
    }
    return cfg;
}

AppConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

}  // namespace gyrering::cli
