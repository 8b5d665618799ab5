#include "syncstab/analysis.hpp"

#include "syncstab/numfmt.hpp"

namespace syncstab {

namespace {

SystemSpec checked(SystemSpec spec, const AnalyzerSettings& s) {
    if (s.flat_voltage) spec.options.flat_voltage = *s.flat_voltage;
    if (auto v = validate(spec); !v.empty()) throw ConfigInvalidError(std::move(v));
    return spec;
}

}  // namespace

Analyzer::Analyzer(SystemSpec spec, AnalyzerSettings settings)
    : spec_(checked(std::move(spec), settings)),
      net_(reduce_network(spec_)),
      pll_(spec_.converters.front().pll),
      root_tol_hz_(settings.root_tol_hz.value_or(spec_.options.root_tol_hz)),
      grid_(make_grid(spec_.options.scan_fmin_hz, spec_.options.scan_fmax_hz, spec_.options.scan_points)) {
    if (!(root_tol_hz_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "root tolerance must be positive");
    for (const auto& c : spec_.converters) {
        if (c.pll == pll_) continue;
        if (!settings.force_first_pll)
            throw Error(ErrorCode::MixedPllGains, "converter '" + c.name +
                                                      "' declares PLL gains different from converter '" +
                                                      spec_.converters.front().name + "'");
        warnings_.push_back("MIXED_PLL_GAINS: using gains of converter '" + spec_.converters.front().name +
                            "' (kp=" + fmt12(pll_.kp) + ", ki=" + fmt12(pll_.ki) + ") for all converters");
        break;
    }
}

ConverterSide Analyzer::converter_side(const Eigen::VectorXd& u) const {
    return {spec_.omega0(), pll_, u.mean()};
}

SteadyState Analyzer::steady_state(const std::vector<double>& p, const std::vector<double>& q) const {
    return solve_steady_state(spec_, p, q);
}

PipelineResult Analyzer::run(const std::vector<double>& p, const std::vector<double>& q) const {
    return run_frozen(p, q, steady_state(p, q));
}

PipelineResult Analyzer::run_frozen(const std::vector<double>& p, const std::vector<double>& q,
                                    const SteadyState& steady) const {
    PipelineResult r;
    r.steady = steady;
    r.op = OperatingPoint::make(p, q, steady.u_pu);
    r.con = converter_side(r.op.u_pu);
    r.curves = trace_curves(r.con, net_, r.op, grid_);
    const ResponseModel model{r.con, &net_, r.op};
    r.report = assess(model, r.curves, root_tol_hz_, steady);
    if (r.report.critical) {
        const CriticalCrossing& c = *r.report.critical;
        r.weights = modal_weights(net_, r.op, r.con.omega0, c.omega_c1, c.phi, c.lambda1);
        r.sensitivities = sensitivities(*r.weights);
    }
    return r;
}

PipelineResult Analyzer::run_case(const std::string& label) const {
    std::vector<double> p, q;
    spec_.case_powers(spec_.operating_case(label), p, q);
    return run(p, q);
}

}  // namespace syncstab
