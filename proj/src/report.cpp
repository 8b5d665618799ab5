#include "syncstab/report.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "syncstab/numfmt.hpp"

namespace syncstab {

namespace {

Json num(double v) {
    if (!std::isfinite(v)) return nullptr;
    return round12(v);
}

Json cplx(std::complex<double> z) { return Json{{"re", num(z.real())}, {"im", num(z.imag())}}; }

}  // namespace

Json report_json(const Analyzer& an, const PipelineResult& r, bool eta_complex) {
    const SystemSpec& spec = an.spec();
    Json j;
    j["pll"] = {{"kp", num(an.pll().kp)}, {"ki", num(an.pll().ki)}, {"u_mean", num(r.con.u)}};

    Json conv = Json::array();
    for (std::size_t i = 0; i < spec.converters.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        conv.push_back({{"name", spec.converters[i].name},
                        {"node", spec.converters[i].node},
                        {"p_pu", num(r.op.p_pu(ii))},
                        {"q_pu", num(r.op.q_pu(ii))},
                        {"u_pu", num(r.steady.u_pu[i])},
                        {"delta0_rad", num(r.steady.delta0_rad[i])}});
    }
    j["converters"] = conv;
    j["steady_state"] = {{"flat", r.steady.flat},
                         {"converged", r.steady.converged},
                         {"iterations", r.steady.iterations},
                         {"max_mismatch_pu", num(r.steady.max_mismatch_pu)}};

    Json subs = Json::array();
    for (const auto& s : r.report.per_subsystem) {
        Json cr = Json::array();
        for (const auto& c : s.crossings)
            cr.push_back({{"omega_rad_s", num(c.omega_rad_s)},
                          {"f_hz", num(c.f_hz)},
                          {"d_con", num(c.d_con)},
                          {"d_net", num(c.d_net)},
                          {"net_damping", num(c.net_damping)}});
        subs.push_back({{"index", s.index + 1}, {"crossings", cr}});
    }
    j["per_subsystem"] = subs;

    if (r.report.critical) {
        const auto& c = *r.report.critical;
        j["critical"] = {{"subsystem", c.subsystem + 1},
                         {"omega_c1_rad_s", num(c.omega_c1)},
                         {"f_c1_hz", num(c.f_c1)},
                         {"d_net1", num(c.d_net1)},
                         {"d_con_at_c1", num(c.d_con_at_c1)},
                         {"margin", num(c.margin)},
                         {"lambda1", cplx(c.lambda1)}};
    } else {
        j["critical"] = nullptr;
    }
    j["verdict"] = std::string(to_string(r.report.verdict));

    if (r.weights && r.sensitivities) {
        const ModalWeights& w = *r.weights;
        Json rows = Json::array();
        for (std::size_t i = 0; i < spec.converters.size(); ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            Json row = {{"converter", spec.converters[i].name},
                        {"eta", num(w.eta(ii))},
                        {"dD_dP", num(r.sensitivities->dd_dp(ii))},
                        {"dD_dQ", num(r.sensitivities->dd_dq(ii))}};
            if (eta_complex) row["eta_complex"] = cplx(w.eta_complex(ii));
            rows.push_back(row);
        }
        j["modal"] = {{"omega_r1", num(w.omega_r1)},
                      {"dominant", spec.converters[static_cast<std::size_t>(r.sensitivities->dominant)].name},
                      {"weights", rows}};
    } else {
        j["modal"] = nullptr;
    }

    Json notes = Json::array();
    for (const auto& n : an.warnings()) notes.push_back(n);
    for (const auto& n : r.report.notes) notes.push_back(n);
    j["notes"] = notes;
    return j;
}

Json adjustment_json(const Analyzer& an, const AdjustmentResult& a) {
    Json deltas = Json::object();
    for (std::size_t i = 0; i < an.spec().converters.size(); ++i)
        deltas[an.spec().converters[i].name] = num(a.per_converter_delta_p[i]);
    return Json{{"d_net1_before", num(a.d_net1_before)},
                {"d_net1_after", num(a.d_net1_after)},
                {"f_c1_before_hz", num(a.omega_c1_before / (2.0 * std::numbers::pi))},
                {"f_c1_after_hz", num(a.omega_c1_after / (2.0 * std::numbers::pi))},
                {"margin_before", num(a.margin_before)},
                {"margin_after", num(a.margin_after)},
                {"verdict_before", std::string(to_string(a.verdict_before))},
                {"verdict_after", std::string(to_string(a.verdict_after))},
                {"positive_inertia_before", a.positive_inertia_before},
                {"positive_inertia_after", a.positive_inertia_after},
                {"per_converter_delta_p", deltas},
                {"improvement", a.improvement},
                {"voltage_resolved", a.voltage_resolved}};
}

Json modes_json(const ModeSet& ms) {
    Json ev = Json::array();
    for (Eigen::Index k = 0; k < ms.eigenvalues.size(); ++k) ev.push_back(cplx(ms.eigenvalues(k)));
    Json j{{"eigenvalues", ev}};
    if (ms.dominant)
        j["dominant"] = {{"sigma", num(ms.dominant->sigma)},
                         {"f_hz", num(ms.dominant->f_hz)},
                         {"damping_ratio", num(ms.dominant->damping_ratio)}};
    else
        j["dominant"] = "NO_OSC_MODE";
    return j;
}

Json crosscheck_json(const CrosscheckRecord& c) {
    Json j{{"status", std::string(to_string(c.status))}, {"freq_deviation_hz", num(c.freq_deviation_hz)}};
    if (!c.reason.empty()) j["reason"] = c.reason;
    return j;
}

void write_sensitivity_csv(std::ostream& os, const SystemSpec& spec, const Sensitivities& s) {
    os << "converter,eta,dD_dP,dD_dQ,dominant_flag\n";
    for (std::size_t i = 0; i < spec.converters.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        os << spec.converters[i].name << ',' << fmt12(s.eta(ii)) << ',' << fmt12(s.dd_dp(ii)) << ','
           << fmt12(s.dd_dq(ii)) << ',' << (ii == s.dominant ? 1 : 0) << '\n';
    }
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "value,D_net1,f_c1_hz,verdict\n";
    for (const auto& r : rows) {
        os << fmt12(r.value) << ',';
        if (r.ok) os << fmt12(r.d_net1) << ',' << fmt12(r.f_c1_hz);
        else os << ',';
        os << ',' << r.verdict << '\n';
    }
}

Json manifest_json(const RunManifest& m) {
    return Json{{"command", m.command},
                {"config", m.config_path},
                {"options", m.options},
                {"outputs", m.outputs},
                {"tool_version", m.tool_version},
                {"wall_time_s", num(m.wall_time_s)}};
}

}  // namespace syncstab
