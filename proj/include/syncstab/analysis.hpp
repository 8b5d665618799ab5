#pragma once

// End-to-end pipeline: steady state, reduced network, curves, criterion,
// modal weights. One Analyzer per system; runs are independent and const.

#include <optional>
#include <string>
#include <vector>

#include "syncstab/config.hpp"
#include "syncstab/frequency_response.hpp"
#include "syncstab/modal.hpp"
#include "syncstab/network.hpp"
#include "syncstab/powerflow.hpp"
#include "syncstab/stability.hpp"

namespace syncstab {

struct AnalyzerSettings {
    bool force_first_pll = false;   // accept mixed PLL gains, using converter 1's
    std::optional<bool> flat_voltage = std::nullopt;  // overrides the config option when set
    std::optional<double> root_tol_hz = std::nullopt;  // overrides the config option when set
};

struct PipelineResult {
    OperatingPoint op;
    SteadyState steady;
    ConverterSide con;
    SubsystemCurves curves;
    StabilityReport report;
    std::optional<ModalWeights> weights;   // present when a critical crossing exists
    std::optional<Sensitivities> sensitivities;
};

class Analyzer {
public:
    /// Validates the system, reduces the network and resolves the common PLL.
    /// Throws CONFIG_INVALID, SINGULAR_INTERIOR, NOT_POSITIVE_DEFINITE or MIXED_PLL_GAINS.
    explicit Analyzer(SystemSpec spec, AnalyzerSettings settings = {});

    [[nodiscard]] const SystemSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] const ReducedNetwork& network() const noexcept { return net_; }
    [[nodiscard]] const PllGains& pll() const noexcept { return pll_; }
    [[nodiscard]] const std::vector<std::string>& warnings() const noexcept { return warnings_; }
    [[nodiscard]] bool flat_voltage() const noexcept { return spec_.options.flat_voltage; }
    [[nodiscard]] double root_tol_hz() const noexcept { return root_tol_hz_; }
    [[nodiscard]] const std::vector<double>& grid() const noexcept { return grid_; }

    [[nodiscard]] SteadyState steady_state(const std::vector<double>& p, const std::vector<double>& q) const;

    /// Solves the steady state for (p, q), then evaluates.
    [[nodiscard]] PipelineResult run(const std::vector<double>& p, const std::vector<double>& q) const;

    /// Evaluates with the voltages of an existing steady state.
    [[nodiscard]] PipelineResult run_frozen(const std::vector<double>& p, const std::vector<double>& q,
                                            const SteadyState& steady) const;

    /// Runs a named operating case.
    [[nodiscard]] PipelineResult run_case(const std::string& label) const;

    [[nodiscard]] ConverterSide converter_side(const Eigen::VectorXd& u) const;

private:
    SystemSpec spec_;
    ReducedNetwork net_;
    PllGains pll_;
    double root_tol_hz_;
    std::vector<double> grid_;
    std::vector<std::string> warnings_;
};

}  // namespace syncstab
