#pragma once

#include "gyrering/cli.hpp"

#include <json.hpp>

namespace gyrering::cli {

using Json = nlohmann::ordered_json;

// {"value": v, "formula": id}
Json quantity(double v, const std::string& formula);
Json quantity(const cplx& v, const std::string& formula);

struct CheckLedger {
    Json entries = Json::array();
    bool all_passed = true;

    void add(const std::string& name, bool passed, double residual, double tolerance,
             const std::string& formula);
};

Json config_echo(const AppConfig& cfg);

// Metadata line that opens every CSV document.
std::string csv_preamble(const AppConfig& cfg, const std::string& command,
                         const std::string& extra = "");

Json verify_report(const AppConfig& cfg, bool& all_passed);
Json normalform_report(const AppConfig& cfg, bool& all_passed);

}  // namespace gyrering::cli
