// syncstab: command-line front end.
//
// Exit codes: 0 Stable (or success), 2 Unstable, 3 Marginal / NoCrossing, 1 error.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "syncstab/analysis.hpp"
#include "syncstab/kernels/kernels.hpp"
#include "syncstab/numfmt.hpp"
#include "syncstab/oracle.hpp"
#include "syncstab/report.hpp"

#ifndef SYNCSTAB_VERSION
#define SYNCSTAB_VERSION "0.0.0"
#endif

using namespace syncstab;

namespace {

struct Globals {
    std::string config;
    std::string case_label;
    bool flat_voltage = false;
    std::string out;
    bool dump_b = false;
    bool eta_complex = false;
    bool force_first_pll = false;
};

int exit_code(Verdict v) {
    switch (v) {
        case Verdict::Stable: return 0;
        case Verdict::Unstable: return 2;
        case Verdict::Marginal:
        case Verdict::NoCrossing: return 3;
    }
    return 1;
}

class Session {
public:
    Session(std::string command, const Globals& g) : g_(g), start_(std::chrono::steady_clock::now()) {
        manifest_.command = std::move(command);
        manifest_.tool_version = SYNCSTAB_VERSION;
    }

    Analyzer make_analyzer() {
        if (g_.config.empty()) throw Error(ErrorCode::InvalidArgument, "no config file given");
        manifest_.config_path = g_.config;
        AnalyzerSettings s;
        s.force_first_pll = g_.force_first_pll;
        if (g_.flat_voltage) s.flat_voltage = true;
        Analyzer an(load_system_spec(g_.config), s);
        for (const auto& w : an.warnings()) std::cerr << "warning: " << w << '\n';
        const auto& o = an.spec().options;
        manifest_.options = Json{{"case", g_.case_label},
                                 {"flat_voltage", o.flat_voltage},
                                 {"eta_complex", g_.eta_complex},
                                 {"force_first_pll", g_.force_first_pll},
                                 {"scan_fmin_hz", o.scan_fmin_hz},
                                 {"scan_fmax_hz", o.scan_fmax_hz},
                                 {"scan_points", o.scan_points},
                                 {"root_tol_hz", o.root_tol_hz},
                                 {"kernel_backend", std::string(kernels::to_string(kernels::active_backend()))}};
        if (g_.dump_b) dump_b(an);
        return an;
    }

    void option(const std::string& key, Json value) { manifest_.options[key] = std::move(value); }

    /// Writes `text` to `path`, or to stdout when path is empty.
    void emit(const std::string& path, const std::string& text) {
        if (path.empty()) {
            std::cout << text;
            return;
        }
        std::ofstream f(path, std::ios::binary);
        if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
        f << text;
        manifest_.outputs.push_back(path);
    }

    void finish() {
        if (g_.out.empty()) return;
        manifest_.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        const std::string path = g_.out + ".manifest.json";
        std::ofstream f(path, std::ios::binary);
        if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
        f << manifest_json(manifest_).dump(2) << '\n';
    }

private:
    static void dump_b(const Analyzer& an) {
        std::cerr << "# reduced susceptance matrix B (converter order)\n";
        const auto& b = an.network().b_matrix;
        for (Eigen::Index r = 0; r < b.rows(); ++r) {
            std::cerr << an.spec().converters[static_cast<std::size_t>(r)].name;
            for (Eigen::Index c = 0; c < b.cols(); ++c) std::cerr << ',' << fmt12(b(r, c));
            std::cerr << '\n';
        }
    }

    const Globals& g_;
    RunManifest manifest_;
    std::chrono::steady_clock::time_point start_;
};

void case_powers(const Analyzer& an, const std::string& label, std::vector<double>& p, std::vector<double>& q) {
    an.spec().case_powers(an.spec().operating_case(label), p, q);
}

std::size_t converter_or_throw(const SystemSpec& spec, const std::string& name) {
    auto idx = spec.converter_index(name);
    if (!idx) throw Error(ErrorCode::UnknownConverter, "unknown converter '" + name + "'");
    return *idx;
}

// ---------------------------------------------------------------------------

int cmd_analyze(const Globals& g, const std::string& curves_path, bool with_oracle) {
    Session s("analyze", g);
    const Analyzer an = s.make_analyzer();
    std::vector<double> p, q;
    case_powers(an, g.case_label, p, q);
    const PipelineResult r = an.run(p, q);

    Json doc = report_json(an, r, g.eta_complex);
    if (with_oracle) {
        const ModeSet ms = modes(assemble_state_space(an.network(), r.op, an.pll(), an.spec().omega0()));
        doc["oracle"] = {{"modes", modes_json(ms)}, {"crosscheck", crosscheck_json(crosscheck(r.report, ms))}};
    }
    if (!curves_path.empty()) {
        std::ostringstream os;
        write_curves_csv(os, r.curves);
        s.emit(curves_path, os.str());
        s.option("curves", curves_path);
    }
    s.emit(g.out, doc.dump(2) + "\n");
    s.finish();
    return exit_code(r.report.verdict);
}

int cmd_curves(const Globals& g, bool per_converter_gamma) {
    Session s("curves", g);
    const Analyzer an = s.make_analyzer();
    std::vector<double> p, q;
    case_powers(an, g.case_label, p, q);
    const PipelineResult r = an.run(p, q);

    std::ostringstream os;
    if (!per_converter_gamma) {
        write_curves_csv(os, r.curves);
    } else {
        // Diagnostic: Gamma evaluated at each converter's own voltage, appended per converter.
        std::ostringstream base;
        write_curves_csv(base, r.curves);
        std::istringstream lines(base.str());
        std::string line;
        std::getline(lines, line);
        os << line;
        for (const auto& c : an.spec().converters) os << ",D_con_" << c.name << ",K_con_" << c.name;
        os << '\n';
        for (Eigen::Index k = 0; std::getline(lines, line); ++k) {
            os << line;
            for (Eigen::Index i = 0; i < r.op.size(); ++i) {
                const auto gm = gamma(r.curves.omega_rad_s(k), r.op.u_pu(i), an.pll(), an.spec().omega0());
                os << ',' << fmt12(gm.real()) << ',' << fmt12(gm.imag());
            }
            os << '\n';
        }
        s.option("per_converter_gamma", true);
    }
    s.emit(g.out, os.str());
    s.finish();
    return 0;
}

struct Range {
    double start = 0.0, stop = 0.0, step = 0.0;
};

Range parse_range(const std::string& text) {
    Range r;
    const auto a = text.find(':');
    const auto b = a == std::string::npos ? std::string::npos : text.find(':', a + 1);
    if (b == std::string::npos || !parse_double(std::string_view(text).substr(0, a), r.start) ||
        !parse_double(std::string_view(text).substr(a + 1, b - a - 1), r.stop) ||
        !parse_double(std::string_view(text).substr(b + 1), r.step))
        throw Error(ErrorCode::InvalidArgument, "range must be start:stop:step, got '" + text + "'");
    if (!(r.step > 0.0) || !std::isfinite(r.start) || !std::isfinite(r.stop))
        throw Error(ErrorCode::InvalidArgument, "range step must be positive and bounds finite");
    return r;
}

int cmd_sweep(const Globals& g, const std::string& converter, const std::string& param, const std::string& range_text,
              bool absolute) {
    Session s("sweep", g);
    const Analyzer an = s.make_analyzer();
    if (param != "p" && param != "q") throw Error(ErrorCode::InvalidArgument, "--param must be p or q");
    const std::size_t idx = converter_or_throw(an.spec(), converter);
    const Range range = parse_range(range_text);
    std::vector<double> p0, q0;
    case_powers(an, g.case_label, p0, q0);
    s.option("converter", converter);
    s.option("param", param);
    s.option("range", range_text);
    s.option("mode", absolute ? "absolute" : "offset");

    std::vector<SweepRow> rows;
    const double span = range.stop - range.start;
    const long count = span < 0.0 ? 0 : static_cast<long>(std::floor(span / range.step + 1e-9)) + 1;
    for (long k = 0; k < count; ++k) {
        SweepRow row;
        row.value = range.start + static_cast<double>(k) * range.step;
        std::vector<double> p = p0, q = q0;
        double& target = param == "p" ? p[idx] : q[idx];
        target = absolute ? row.value : target + row.value;
        try {
            const PipelineResult r = an.run(p, q);
            row.verdict = std::string(to_string(r.report.verdict));
            if (r.report.critical) {
                row.ok = true;
                row.d_net1 = r.report.critical->d_net1;
                row.f_c1_hz = r.report.critical->f_c1;
            }
        } catch (const Error& e) {
            row.verdict = "ERROR:" + std::string(to_string(e.code()));
        }
        rows.push_back(std::move(row));
    }
    std::ostringstream os;
    write_sweep_csv(os, rows);
    s.emit(g.out, os.str());
    s.finish();
    return 0;
}

int cmd_sensitivity(const Globals& g) {
    Session s("sensitivity", g);
    const Analyzer an = s.make_analyzer();
    std::vector<double> p, q;
    case_powers(an, g.case_label, p, q);
    const PipelineResult r = an.run(p, q);
    if (!r.sensitivities) throw Error(ErrorCode::InvalidArgument, "no spring-coefficient crossing; weights undefined");
    std::ostringstream os;
    write_sensitivity_csv(os, an.spec(), *r.sensitivities);
    s.emit(g.out, os.str());
    s.finish();
    return 0;
}

/// Accepts NAME=VAL or NAME.p=VAL; comma-separated lists are split.
std::map<std::size_t, double> parse_assignments(const SystemSpec& spec, const std::vector<std::string>& items) {
    std::map<std::size_t, double> out;
    for (const auto& item : items) {
        std::stringstream ss(item);
        std::string part;
        while (std::getline(ss, part, ',')) {
            if (part.empty()) continue;
            const auto eq = part.find('=');
            if (eq == std::string::npos)
                throw Error(ErrorCode::InvalidArgument, "assignment '" + part + "' is not NAME=VALUE");
            std::string name = part.substr(0, eq);
            if (name.size() > 2 && (name.ends_with(".q") || name.ends_with(".Q")))
                throw Error(ErrorCode::InvalidArgument,
                            "reactive-power adjustment is not supported; use `sweep --param q` for '" + name + "'");
            if (name.size() > 2 && (name.ends_with(".p") || name.ends_with(".P"))) name.resize(name.size() - 2);
            double v = 0.0;
            if (!parse_double(std::string_view(part).substr(eq + 1), v) || !std::isfinite(v))
                throw Error(ErrorCode::InvalidArgument, "invalid value in '" + part + "'");
            out[converter_or_throw(spec, name)] = v;
        }
    }
    return out;
}

int cmd_adjust(const Globals& g, const std::vector<std::string>& sets, bool resolve_voltage) {
    Session s("adjust", g);
    const Analyzer an = s.make_analyzer();
    const auto assignments = parse_assignments(an.spec(), sets);
    std::vector<double> p, q;
    case_powers(an, g.case_label, p, q);
    std::vector<double> p_after = p;
    for (const auto& [i, v] : assignments) p_after[i] = v;
    s.option("set", sets);
    s.option("resolve_voltage", resolve_voltage);

    const AdjustmentResult a = adjustment_compare(an, p, p_after, q, resolve_voltage);
    s.emit(g.out, adjustment_json(an, a).dump(2) + "\n");
    s.finish();
    return exit_code(a.verdict_after);
}

struct SimFlags {
    std::string modes_path;
    std::optional<double> dt, duration;
    int decimate = 1;
    Disturbance dist;
    bool positive_feedback = false;
};

int cmd_simulate(const Globals& g, const SimFlags& f) {
    Session s("simulate", g);
    const Analyzer an = s.make_analyzer();
    std::vector<double> p, q;
    case_powers(an, g.case_label, p, q);
    const SteadyState st = an.steady_state(p, q);
    const OperatingPoint op = OperatingPoint::make(p, q, st.u_pu);
    const FeedbackSign sign = f.positive_feedback ? FeedbackSign::Positive : FeedbackSign::Negative;
    const StateSpace ss = assemble_state_space(an.network(), op, an.pll(), an.spec().omega0(), sign);
    const ModeSet ms = modes(ss);

    const double dt = f.dt.value_or(an.spec().options.sim_dt_s);
    const double duration = f.duration.value_or(an.spec().options.sim_duration_s);
    s.option("dt_s", dt);
    s.option("duration_s", duration);
    s.option("decimate", f.decimate);
    s.option("disturbance", {{"start_s", f.dist.start_s}, {"width_s", f.dist.width_s},
                             {"amplitude_rad", f.dist.amplitude_rad}});
    if (f.positive_feedback) s.option("feedback_sign", "positive");

    const TimeSeries ts = simulate(ss, f.dist, dt, duration, f.decimate);
    std::ostringstream os;
    write_timeseries_csv(os, ts);
    s.emit(g.out, os.str());
    if (!f.modes_path.empty()) {
        std::ostringstream ms_os;
        write_modes_csv(ms_os, ms);
        s.emit(f.modes_path, ms_os.str());
    }

    // Summary on stderr so stdout stays a clean CSV.
    Json summary{{"modes", modes_json(ms)}};
    if (ts.theta.rows() > 0) {
        Eigen::Index col = 0;
        ts.theta.bottomRows(std::max<Eigen::Index>(1, ts.theta.rows() / 3)).cwiseAbs().colwise().maxCoeff().maxCoeff(&col);
        const std::vector<double> sig(ts.theta.col(col).data(), ts.theta.col(col).data() + ts.theta.rows());
        if (auto gr = growth_rate(ts.t_s, sig)) summary["fitted_growth_rate"] = round12(*gr);
        const double sample_dt = dt * f.decimate;
        const double fmax = std::min(60.0, 0.45 / sample_dt);
        if (fmax > 0.5) summary["spectral_peak_hz"] = round12(spectral_peak_hz(sig, sample_dt, 0.5, fmax, 0.01));
    }
    std::cerr << summary.dump(2) << '\n';
    s.finish();
    return 0;
}

void add_config_positional(CLI::App* sub, Globals& g) {
    sub->add_option("config", g.config, "System config file");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Small-signal synchronization stability of PLL-based multi-converter grids"};
    app.set_version_flag("--version", SYNCSTAB_VERSION);
    app.require_subcommand(1);

    Globals g;
    app.add_option("--config", g.config, "System config file");
    app.add_option("--case", g.case_label, "Operating-point label");
    app.add_flag("--flat-voltage", g.flat_voltage, "Use U = 1 instead of solving the power flow");
    app.add_option("--out", g.out, "Primary output path (stdout if omitted); also writes <out>.manifest.json");
    app.add_flag("--dump-b", g.dump_b, "Print the reduced susceptance matrix to stderr");
    app.add_flag("--eta-complex", g.eta_complex, "Also report complex-square modal weights");
    app.add_flag("--force-first-pll", g.force_first_pll, "Accept mixed PLL gains, using converter 1's");
    app.fallthrough();

    auto* analyze = app.add_subcommand("analyze", "Criterion verdict, critical crossing and modal weights (JSON)");
    add_config_positional(analyze, g);
    std::string curves_path;
    bool with_oracle = false;
    analyze->add_option("--curves", curves_path, "Also write damping/spring curves CSV");
    analyze->add_flag("--oracle", with_oracle, "Include state-space modes and a cross-check");

    auto* curves = app.add_subcommand("curves", "Damping and spring curves over the scan grid (CSV)");
    add_config_positional(curves, g);
    bool per_conv_gamma = false;
    curves->add_flag("--per-converter-gamma", per_conv_gamma, "Append Gamma at each converter's own voltage");

    auto* sweep = app.add_subcommand("sweep", "D_net1 over a range of one converter's P or Q (CSV)");
    add_config_positional(sweep, g);
    std::string sw_conv, sw_param = "p", sw_range;
    bool sw_abs = false;
    sweep->add_option("--converter", sw_conv, "Converter name")->required();
    sweep->add_option("--param", sw_param, "p or q")->check(CLI::IsMember({"p", "q"}));
    sweep->add_option("--range", sw_range, "start:stop:step")->required();
    sweep->add_flag("--absolute", sw_abs, "Values replace the case value instead of offsetting it");

    auto* sens = app.add_subcommand("sensitivity", "Modal weights and first-order sensitivities (CSV)");
    add_config_positional(sens, g);

    auto* adjust = app.add_subcommand("adjust", "Compare D_net1 before and after active-power changes (JSON)");
    add_config_positional(adjust, g);
    std::vector<std::string> sets;
    bool resolve_voltage = false;
    adjust->add_option("--set", sets, "NAME=P or NAME.p=P, comma-separated or repeated")->required();
    adjust->add_flag("--resolve-voltage", resolve_voltage, "Re-solve voltages after the change instead of freezing");

    auto* sim = app.add_subcommand("simulate", "Time-domain response of the state-space model (CSV)");
    add_config_positional(sim, g);
    SimFlags sf;
    sim->add_option("--modes", sf.modes_path, "Also write the eigenvalue CSV");
    sim->add_option("--dt", sf.dt, "Step size, s");
    sim->add_option("--duration", sf.duration, "Run length, s");
    sim->add_option("--decimate", sf.decimate, "Store every k-th step")->check(CLI::PositiveNumber);
    sim->add_option("--pulse-start", sf.dist.start_s, "Disturbance start, s");
    sim->add_option("--pulse-width", sf.dist.width_s, "Disturbance width, s");
    sim->add_option("--pulse-amplitude", sf.dist.amplitude_rad, "Disturbance amplitude, rad");
    sim->add_flag("--positive-feedback", sf.positive_feedback, "Use the opposite network feedback sign");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*analyze) return cmd_analyze(g, curves_path, with_oracle);
        if (*curves) return cmd_curves(g, per_conv_gamma);
        if (*sweep) return cmd_sweep(g, sw_conv, sw_param, sw_range, sw_abs);
        if (*sens) return cmd_sensitivity(g);
        if (*adjust) return cmd_adjust(g, sets, resolve_voltage);
        if (*sim) return cmd_simulate(g, sf);
    } catch (const ConfigInvalidError& e) {
        std::cerr << "error: " << e.what() << '\n';
        for (const auto& v : e.violations()) std::cerr << "  " << v.code << ": " << v.message << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
