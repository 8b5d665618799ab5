#include "syncstab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>

#include "syncstab/numfmt.hpp"

namespace syncstab {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::ConfigSyntax: return "CONFIG_SYNTAX";
        case ErrorCode::ConfigInvalid: return "CONFIG_INVALID";
        case ErrorCode::SingularInterior: return "SINGULAR_INTERIOR";
        case ErrorCode::NotPositiveDefinite: return "NOT_POSITIVE_DEFINITE";
        case ErrorCode::PfDiverged: return "PF_DIVERGED";
        case ErrorCode::PfVoltageOutOfBand: return "PF_VOLTAGE_OUT_OF_BAND";
        case ErrorCode::DegenerateFreq: return "DEGENERATE_FREQ";
        case ErrorCode::EigpairMismatch: return "EIGPAIR_MISMATCH";
        case ErrorCode::AlgebraicLoopSingular: return "ALGEBRAIC_LOOP_SINGULAR";
        case ErrorCode::MixedPllGains: return "MIXED_PLL_GAINS";
        case ErrorCode::UnknownConverter: return "UNKNOWN_CONVERTER";
        case ErrorCode::UnknownCase: return "UNKNOWN_CASE";
        case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    }
    return "UNKNOWN";
}

// ---------------------------------------------------------------------------
// SystemSpec helpers

double SystemSpec::omega0() const noexcept {
    return 2.0 * std::numbers::pi * rated_frequency_hz;
}

std::optional<std::size_t> SystemSpec::converter_index(std::string_view name) const {
    for (std::size_t i = 0; i < converters.size(); ++i) {
        if (converters[i].name == name) return i;
    }
    return std::nullopt;
}

OperatingCase SystemSpec::operating_case(std::string_view label) const {
    if (label.empty()) {
        for (const auto& c : cases) {
            if (c.label.empty()) return c;
        }
        if (!cases.empty()) return cases.front();
        return OperatingCase{};
    }
    for (const auto& c : cases) {
        if (c.label == label) return c;
    }
    throw Error(ErrorCode::UnknownCase, "no operating_point block labelled '" + std::string(label) + "'");
}

void SystemSpec::case_powers(const OperatingCase& oc, std::vector<double>& p, std::vector<double>& q) const {
    p.assign(converters.size(), 0.0);
    q.assign(converters.size(), 0.0);
    for (const auto& inj : oc.injections) {
        auto idx = converter_index(inj.converter);
        if (!idx) throw Error(ErrorCode::UnknownConverter, "operating point names unknown converter '" + inj.converter + "'");
        p[*idx] = inj.p_pu;
        q[*idx] = inj.q_pu;
    }
}

ConfigSyntaxError::ConfigSyntaxError(int line, int column, const std::string& what)
    : Error(ErrorCode::ConfigSyntax,
            "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

namespace {

std::string join_violations(const std::vector<Violation>& v) {
    std::string out;
    for (const auto& item : v) {
        if (!out.empty()) out += "; ";
        out += item.code + ": " + item.message;
    }
    return out;
}

}  // namespace

ConfigInvalidError::ConfigInvalidError(std::vector<Violation> violations)
    : Error(ErrorCode::ConfigInvalid, join_violations(violations)), violations_(std::move(violations)) {}

// ---------------------------------------------------------------------------
// Parser

namespace {

struct Token {
    std::string_view text;
    int column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == ',')) ++i;
        if (i >= line.size()) break;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != ',') ++j;
        out.push_back({line.substr(i, j - i), static_cast<int>(i) + 1});
        i = j;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

enum class Section { None, System, Nodes, Branches, Slack, Converters, OperatingPoint, Options };

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    SystemSpec run() {
        std::size_t pos = 0;
        while (pos <= text_.size()) {
            auto nl = text_.find('\n', pos);
            if (nl == std::string_view::npos) nl = text_.size();
            ++line_no_;
            handle_line(text_.substr(pos, nl - pos));
            pos = nl + 1;
        }
        return std::move(spec_);
    }

private:
    [[noreturn]] void fail(int column, const std::string& what) const {
        throw ConfigSyntaxError(line_no_, column, what);
    }

    double number(const Token& t) const {
        double v = 0.0;
        if (!parse_double(t.text, v)) fail(t.column, "expected a number, got '" + std::string(t.text) + "'");
        return v;
    }

    bool boolean(const Token& t) const {
        if (t.text == "true" || t.text == "yes" || t.text == "1") return true;
        if (t.text == "false" || t.text == "no" || t.text == "0") return false;
        fail(t.column, "expected true/false, got '" + std::string(t.text) + "'");
    }

    void handle_line(std::string_view raw) {
        auto hash = raw.find('#');
        std::string_view line = hash == std::string_view::npos ? raw : raw.substr(0, hash);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (trim(line).empty()) return;

        const auto first = line.find_first_not_of(" \t");
        if (line[first] == '[') {
            open_section(line, static_cast<int>(first) + 1);
            return;
        }
        switch (section_) {
            case Section::None: fail(static_cast<int>(first) + 1, "content before the first [section]");
            case Section::System:
            case Section::Options: key_value(line); break;
            case Section::Nodes:
                for (const auto& t : tokenize(line)) spec_.nodes.emplace_back(t.text);
                break;
            case Section::Branches: branch(line); break;
            case Section::Slack: slack(line); break;
            case Section::Converters: converter(line); break;
            case Section::OperatingPoint: injection(line); break;
        }
    }

    void open_section(std::string_view line, int column) {
        auto close = line.find(']');
        if (close == std::string_view::npos) fail(column, "unterminated section header");
        if (!trim(line.substr(close + 1)).empty()) fail(static_cast<int>(close) + 2, "text after section header");
        auto inner = line.substr(line.find('[') + 1, close - line.find('[') - 1);
        auto toks = tokenize(inner);
        if (toks.empty()) fail(column, "empty section header");
        const auto name = toks[0].text;
        if (toks.size() > 2) fail(column + toks[2].column, "section header takes at most one label");

        static const std::unordered_map<std::string_view, Section> names = {
            {"system", Section::System},          {"nodes", Section::Nodes},
            {"branches", Section::Branches},      {"slack", Section::Slack},
            {"converters", Section::Converters},  {"operating_point", Section::OperatingPoint},
            {"options", Section::Options},
        };
        auto it = names.find(name);
        if (it == names.end()) fail(column + toks[0].column, "unknown section '" + std::string(name) + "'");
        section_ = it->second;

        std::string key(name);
        if (section_ == Section::OperatingPoint) {
            std::string label = toks.size() == 2 ? std::string(toks[1].text) : std::string();
            key += " " + label;
            spec_.cases.push_back(OperatingCase{label, {}});
        } else if (toks.size() == 2) {
            fail(column + toks[1].column, "only [operating_point] takes a label");
        }
        if (!seen_.insert(key).second) fail(column, "duplicate section [" + key + "]");
    }

    void key_value(std::string_view line) {
        auto eq = line.find('=');
        if (eq == std::string_view::npos) fail(1, "expected 'key = value'");
        auto key_toks = tokenize(line.substr(0, eq));
        auto val_toks = tokenize(line.substr(eq + 1));
        if (key_toks.size() != 1) fail(1, "expected a single key before '='");
        if (val_toks.size() != 1) fail(static_cast<int>(eq) + 2, "expected a single value after '='");
        Token val = val_toks[0];
        val.column += static_cast<int>(eq) + 1;
        const auto key = key_toks[0].text;

        if (section_ == Section::System) {
            if (key == "rated_frequency_hz") spec_.rated_frequency_hz = number(val);
            else fail(key_toks[0].column, "unknown [system] key '" + std::string(key) + "'");
            return;
        }
        auto& o = spec_.options;
        if (key == "flat_voltage") o.flat_voltage = boolean(val);
        else if (key == "scan_fmin_hz") o.scan_fmin_hz = number(val);
        else if (key == "scan_fmax_hz") o.scan_fmax_hz = number(val);
        else if (key == "scan_points") {
            double v = number(val);
            if (v != std::floor(v) || std::abs(v) > 1e9) fail(val.column, "scan_points must be an integer");
            o.scan_points = static_cast<int>(v);
        }
        else if (key == "root_tol_hz") o.root_tol_hz = number(val);
        else if (key == "sim_dt_s") o.sim_dt_s = number(val);
        else if (key == "sim_duration_s") o.sim_duration_s = number(val);
        else fail(key_toks[0].column, "unknown [options] key '" + std::string(key) + "'");
    }

    std::vector<Token> record(std::string_view line, std::size_t arity, const char* shape) const {
        auto toks = tokenize(line);
        if (toks.size() != arity) {
            int col = toks.size() > arity ? toks[arity].column : 1;
            fail(col, std::string("expected ") + shape);
        }
        return toks;
    }

    void branch(std::string_view line) {
        auto t = record(line, 3, "'from to inductance_pu'");
        spec_.branches.push_back({std::string(t[0].text), std::string(t[1].text), number(t[2])});
    }

    void slack(std::string_view line) {
        auto toks = tokenize(line);
        if (toks.size() != 1 || !spec_.slack_node.empty()) fail(toks.size() > 1 ? toks[1].column : 1, "[slack] holds exactly one node id");
        spec_.slack_node = std::string(toks[0].text);
    }

    void converter(std::string_view line) {
        auto t = record(line, 4, "'name node pll_kp pll_ki'");
        spec_.converters.push_back({std::string(t[0].text), std::string(t[1].text), {number(t[2]), number(t[3])}});
    }

    void injection(std::string_view line) {
        auto t = record(line, 3, "'name p_pu q_pu'");
        spec_.cases.back().injections.push_back({std::string(t[0].text), number(t[1]), number(t[2])});
    }

    std::string_view text_;
    int line_no_ = 0;
    Section section_ = Section::None;
    std::set<std::string> seen_;
    SystemSpec spec_;
};

}  // namespace

SystemSpec parse_document(std::string_view text) {
    return Parser(text).run();
}

SystemSpec parse_system_spec(std::string_view text) {
    SystemSpec spec = parse_document(text);
    auto violations = validate(spec);
    if (!violations.empty()) throw ConfigInvalidError(std::move(violations));
    return spec;
}

SystemSpec load_system_spec(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_system_spec(ss.str());
}

// ---------------------------------------------------------------------------
// Validation

std::vector<Violation> validate(const SystemSpec& spec) {
    std::vector<Violation> out;
    auto add = [&](std::string code, std::string msg) { out.push_back({std::move(code), std::move(msg)}); };

    if (!(spec.rated_frequency_hz > 0.0) || !std::isfinite(spec.rated_frequency_hz))
        add("RATED_FREQUENCY_NONPOSITIVE", "system.rated_frequency_hz must be positive");

    std::unordered_map<std::string, std::size_t> node_id;
    for (const auto& n : spec.nodes) {
        if (!node_id.emplace(n, node_id.size()).second) add("DUPLICATE_NODE", "node '" + n + "' declared twice");
    }

    for (std::size_t k = 0; k < spec.branches.size(); ++k) {
        const auto& b = spec.branches[k];
        const std::string where = "branches[" + std::to_string(k) + "] (" + b.from + "-" + b.to + ")";
        for (const auto* end : {&b.from, &b.to}) {
            if (!node_id.contains(*end)) add("BRANCH_UNKNOWN_NODE", where + " references undeclared node '" + *end + "'");
        }
        if (b.from == b.to) add("BRANCH_SELF_LOOP", where + " connects a node to itself");
        if (!(b.inductance_pu > 0.0) || !std::isfinite(b.inductance_pu))
            add("BRANCH_NONPOSITIVE_L", where + " inductance_pu must be strictly positive");
    }

    if (spec.slack_node.empty()) add("SLACK_MISSING", "no [slack] node given");
    else if (!node_id.contains(spec.slack_node)) add("SLACK_UNKNOWN_NODE", "slack node '" + spec.slack_node + "' is not declared");

    if (spec.converters.empty()) add("NO_CONVERTERS", "at least one converter is required");
    std::set<std::string> names, conv_nodes;
    for (const auto& c : spec.converters) {
        if (!names.insert(c.name).second) add("DUPLICATE_CONVERTER_NAME", "converter name '" + c.name + "' used twice");
        if (!node_id.contains(c.node)) add("CONVERTER_UNKNOWN_NODE", "converter '" + c.name + "' sits on undeclared node '" + c.node + "'");
        if (c.node == spec.slack_node) add("CONVERTER_ON_SLACK", "converter may not attach to slack ('" + c.name + "')");
        if (!conv_nodes.insert(c.node).second) add("DUPLICATE_CONVERTER_NODE", "node '" + c.node + "' hosts more than one converter");
        if (!(c.pll.kp > 0.0) || !(c.pll.ki > 0.0) || !std::isfinite(c.pll.kp) || !std::isfinite(c.pll.ki))
            add("PLL_NONPOSITIVE_GAIN", "converter '" + c.name + "' PLL gains must be strictly positive");
    }

    // Connectivity: every declared node must reach the slack.
    if (node_id.contains(spec.slack_node)) {
        std::vector<std::vector<std::size_t>> adj(node_id.size());
        for (const auto& b : spec.branches) {
            auto f = node_id.find(b.from), t = node_id.find(b.to);
            if (f == node_id.end() || t == node_id.end()) continue;
            adj[f->second].push_back(t->second);
            adj[t->second].push_back(f->second);
        }
        std::vector<bool> seen(node_id.size(), false);
        std::queue<std::size_t> frontier;
        frontier.push(node_id.at(spec.slack_node));
        seen[frontier.front()] = true;
        while (!frontier.empty()) {
            auto u = frontier.front();
            frontier.pop();
            for (auto v : adj[u]) {
                if (!seen[v]) { seen[v] = true; frontier.push(v); }
            }
        }
        for (const auto& n : spec.nodes) {
            auto it = node_id.find(n);
            if (!seen[it->second]) add("GRAPH_DISCONNECTED", "node '" + n + "' has no path to the slack node");
        }
    }

    std::set<std::string> labels;
    for (const auto& oc : spec.cases) {
        if (!labels.insert(oc.label).second) add("DUPLICATE_CASE_LABEL", "operating_point '" + oc.label + "' defined twice");
        std::set<std::string> listed;
        for (const auto& inj : oc.injections) {
            if (!names.contains(inj.converter))
                add("OP_UNKNOWN_CONVERTER", "operating_point '" + oc.label + "' names unknown converter '" + inj.converter + "'");
            if (!listed.insert(inj.converter).second)
                add("OP_DUPLICATE_ENTRY", "operating_point '" + oc.label + "' lists '" + inj.converter + "' twice");
            if (!std::isfinite(inj.p_pu) || !std::isfinite(inj.q_pu))
                add("OP_NONFINITE", "operating_point '" + oc.label + "' has a non-finite value for '" + inj.converter + "'");
        }
    }

    const auto& o = spec.options;
    if (!(o.scan_fmin_hz > 0.0) || !(o.scan_fmin_hz < o.scan_fmax_hz) || !std::isfinite(o.scan_fmax_hz))
        add("SCAN_RANGE_INVALID", "options require 0 < scan_fmin_hz < scan_fmax_hz");
    if (o.scan_points < 2) add("SCAN_POINTS_TOO_FEW", "options.scan_points must be at least 2");
    if (!(o.root_tol_hz > 0.0)) add("ROOT_TOL_NONPOSITIVE", "options.root_tol_hz must be positive");
    if (!(o.sim_dt_s > 0.0) || !(o.sim_duration_s > o.sim_dt_s))
        add("SIM_STEP_INVALID", "options require sim_dt_s > 0 and sim_duration_s > sim_dt_s");
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

std::string serialize(const SystemSpec& spec) {
    std::ostringstream os;
    os << "[system]\nrated_frequency_hz = " << fmt_roundtrip(spec.rated_frequency_hz) << "\n\n";
    os << "[nodes]\n";
    for (const auto& n : spec.nodes) os << n << "\n";
    os << "\n[branches]\n";
    for (const auto& b : spec.branches) os << b.from << " " << b.to << " " << fmt_roundtrip(b.inductance_pu) << "\n";
    os << "\n[slack]\n" << spec.slack_node << "\n\n[converters]\n";
    for (const auto& c : spec.converters)
        os << c.name << " " << c.node << " " << fmt_roundtrip(c.pll.kp) << " " << fmt_roundtrip(c.pll.ki) << "\n";
    for (const auto& oc : spec.cases) {
        os << "\n[operating_point" << (oc.label.empty() ? "" : " " + oc.label) << "]\n";
        for (const auto& inj : oc.injections)
            os << inj.converter << " " << fmt_roundtrip(inj.p_pu) << " " << fmt_roundtrip(inj.q_pu) << "\n";
    }
    const auto& o = spec.options;
    os << "\n[options]\n"
       << "flat_voltage = " << (o.flat_voltage ? "true" : "false") << "\n"
       << "scan_fmin_hz = " << fmt_roundtrip(o.scan_fmin_hz) << "\n"
       << "scan_fmax_hz = " << fmt_roundtrip(o.scan_fmax_hz) << "\n"
       << "scan_points = " << o.scan_points << "\n"
       << "root_tol_hz = " << fmt_roundtrip(o.root_tol_hz) << "\n"
       << "sim_dt_s = " << fmt_roundtrip(o.sim_dt_s) << "\n"
       << "sim_duration_s = " << fmt_roundtrip(o.sim_duration_s) << "\n";
    return os.str();
}

}  // namespace syncstab
