#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "syncstab/analysis.hpp"
#include "syncstab/oracle.hpp"

namespace syncstab {

using Json = nlohmann::ordered_json;

/// Analysis document; every real is rounded to 12 significant digits.
Json report_json(const Analyzer& an, const PipelineResult& r, bool eta_complex = false);

Json adjustment_json(const Analyzer& an, const AdjustmentResult& a);

Json modes_json(const ModeSet& ms);

Json crosscheck_json(const CrosscheckRecord& c);

/// `converter,eta,dD_dP,dD_dQ,dominant_flag`.
void write_sensitivity_csv(std::ostream& os, const SystemSpec& spec, const Sensitivities& s);

struct SweepRow {
    double value = 0.0;
    bool ok = false;
    double d_net1 = 0.0;
    double f_c1_hz = 0.0;
    std::string verdict;  // verdict name, or "ERROR:<code>" when !ok
};

/// `value,D_net1,f_c1_hz,verdict`; failed rows leave the numeric cells empty.
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

struct RunManifest {
    std::string command;
    std::string config_path;
    Json options = Json::object();
    std::vector<std::string> outputs;
    std::string tool_version;
    double wall_time_s = 0.0;
};

Json manifest_json(const RunManifest& m);

}  // namespace syncstab
