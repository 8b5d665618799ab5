#pragma once

// Declarative system description: network, converters, operating cases and
// analysis options. See docs/config-format.md for the text grammar.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "syncstab/error.hpp"

namespace syncstab {

struct Branch {
    std::string from;
    std::string to;
    double inductance_pu = 0.0;  // reactance at rated frequency; susceptance = 1 / inductance_pu

    bool operator==(const Branch&) const = default;
};

struct PllGains {
    double kp = 0.0;
    double ki = 0.0;

    bool operator==(const PllGains&) const = default;
};

struct ConverterSpec {
    std::string name;
    std::string node;
    PllGains pll;

    bool operator==(const ConverterSpec&) const = default;
};

/// Injection of one converter; positive = power flowing into the network.
struct Injection {
    std::string converter;
    double p_pu = 0.0;
    double q_pu = 0.0;

    bool operator==(const Injection&) const = default;
};

/// A named operating point. The unlabelled block has label "".
struct OperatingCase {
    std::string label;
    std::vector<Injection> injections;

    bool operator==(const OperatingCase&) const = default;
};

struct AnalysisOptions {
    bool flat_voltage = false;
    double scan_fmin_hz = 0.5;
    double scan_fmax_hz = 60.0;
    int scan_points = 1200;
    double root_tol_hz = 1e-4;
    double sim_dt_s = 1e-4;
    double sim_duration_s = 3.0;

    bool operator==(const AnalysisOptions&) const = default;
};

struct SystemSpec {
    double rated_frequency_hz = 50.0;
    std::vector<std::string> nodes;
    std::vector<Branch> branches;
    std::string slack_node;
    std::vector<ConverterSpec> converters;  // file order fixes index i = 0..n-1
    std::vector<OperatingCase> cases;
    AnalysisOptions options;

    bool operator==(const SystemSpec&) const = default;

    [[nodiscard]] double omega0() const noexcept;
    [[nodiscard]] std::size_t converter_count() const noexcept { return converters.size(); }
    [[nodiscard]] std::optional<std::size_t> converter_index(std::string_view name) const;

    /// Case by label. An empty label picks the unlabelled block if present,
    /// otherwise the first case; a spec without cases yields zero injections.
    [[nodiscard]] OperatingCase operating_case(std::string_view label = {}) const;

    /// Injections of a case as dense per-converter vectors in converter order.
    void case_powers(const OperatingCase& oc, std::vector<double>& p, std::vector<double>& q) const;
};

struct Violation {
    std::string code;     // e.g. "GRAPH_DISCONNECTED"
    std::string message;

    bool operator==(const Violation&) const = default;
};

/// Syntax-level failure; `line` and `column` are 1-based.
class ConfigSyntaxError : public Error {
public:
    ConfigSyntaxError(int line, int column, const std::string& what);
    [[nodiscard]] int line() const noexcept { return line_; }
    [[nodiscard]] int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

/// Semantic failure carrying every violated invariant.
class ConfigInvalidError : public Error {
public:
    explicit ConfigInvalidError(std::vector<Violation> violations);
    [[nodiscard]] const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    std::vector<Violation> violations_;
};

/// Grammar only, no semantic checks. Throws ConfigSyntaxError.
SystemSpec parse_document(std::string_view text);

/// Grammar plus validation. Throws ConfigSyntaxError or ConfigInvalidError.
SystemSpec parse_system_spec(std::string_view text);

SystemSpec load_system_spec(const std::string& path);

/// Violations are data: an empty result means the system is valid.
std::vector<Violation> validate(const SystemSpec& spec);

/// Normalized text form; parse_system_spec(serialize(s)) == s.
std::string serialize(const SystemSpec& spec);

}  // namespace syncstab
