#pragma once

#include "gyrering/dynamics.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gyrering::cli {

// Carries the source position of the offending node; line and column are 1-based, 0 if unknown.
class ConfigError : public InputError {
public:
    ConfigError(const std::string& what, int line = 0, int column = 0);
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

enum class SimulateMode { Full, Forced, Reduced };
const char* to_string(SimulateMode m);

struct SimulateControls {
    SimulateMode mode = SimulateMode::Full;
    std::optional<double> dt;  // default_timestep when absent
    long steps = 10000;
    long record_every = 10;
    unsigned long seed = 1;
    double amplitude = 1e-2;
    double eta = -0.1;
    std::vector<std::vector<double>> initial_states;
};

struct SpectrumControls {
    std::optional<double> lambda_min;  // default -kappa
    std::optional<double> lambda_max;  // default 0
    int points = 101;
};

struct BifurcateControls {
    double eta_min = -0.1;
    double eta_max = 0.1;
    int points = 41;
};

struct NormalformControls {
    std::optional<double> eta;  // default -0.01 kappa
};

struct AppConfig {
    std::string origin;
    GyroParams params;
    RingConfig ring;
    SimulateControls simulate;
    SpectrumControls spectrum;
    BifurcateControls bifurcate;
    NormalformControls normalform;
};

AppConfig parse_config(const std::string& text, const std::string& origin = "<string>");
AppConfig load_config(const std::string& path);

// Exit codes.
constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitInput = 2;
constexpr int kExitRuntime = 3;

struct CommandResult {
    int exit_code = kExitOk;
    std::string output;  // JSON or CSV document
};

CommandResult cmd_verify(const AppConfig& cfg);
CommandResult cmd_normalform(const AppConfig& cfg);
CommandResult cmd_spectrum(const AppConfig& cfg);
CommandResult cmd_bifurcate(const AppConfig& cfg);
// svg receives a phase portrait when non-null.
CommandResult cmd_simulate(const AppConfig& cfg, std::string* svg = nullptr);

// gyrering verify|spectrum|simulate|bifurcate|normalform <config> [flags]
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

// RFC 4180 field quoting.
std::string csv_field(const std::string& s);
std::string format_number(double v);

}  // namespace gyrering::cli
