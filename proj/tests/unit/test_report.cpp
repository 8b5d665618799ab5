#include <catch_amalgamated.hpp>

#include <sstream>

#include "syncstab/numfmt.hpp"
#include "syncstab/report.hpp"

using namespace syncstab;

namespace {

Analyzer paper() { return Analyzer(load_system_spec(std::string(SYNCSTAB_CONFIG_DIR) + "/paper_testsystem.cfg")); }

}  // namespace

TEST_CASE("analysis document schema", "[report]") {
    const Analyzer an = paper();
    const PipelineResult r = an.run_case("2");
    const Json j = report_json(an, r);
    CHECK(j.at("verdict") == "Unstable");
    CHECK(j.at("converters").size() == 5);
    CHECK(j.at("critical").at("subsystem").get<int>() >= 1);
    CHECK(j.at("modal").at("dominant") == "WTG1");
    CHECK(j.at("modal").at("weights").at(0).contains("eta"));
    CHECK_FALSE(j.at("modal").at("weights").at(0).contains("eta_complex"));
    CHECK(report_json(an, r, true).at("modal").at("weights").at(0).contains("eta_complex"));
    const double d = j.at("critical").at("d_net1").get<double>();
    CHECK(d == round12(r.report.critical->d_net1));
}

TEST_CASE("documents are deterministic", "[report]") {
    const Analyzer an = paper();
    CHECK(report_json(an, an.run_case("1")).dump() == report_json(an, an.run_case("1")).dump());
}

TEST_CASE("sensitivity and sweep CSV", "[report]") {
    const Analyzer an = paper();
    const PipelineResult r = an.run_case("2");
    std::ostringstream s;
    write_sensitivity_csv(s, an.spec(), *r.sensitivities);
    std::istringstream in(s.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "converter,eta,dD_dP,dD_dQ,dominant_flag");
    int flagged = 0, rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        flagged += line.back() == '1';
    }
    CHECK(rows == 5);
    CHECK(flagged == 1);

    std::ostringstream empty;
    write_sweep_csv(empty, {});
    CHECK(empty.str() == "value,D_net1,f_c1_hz,verdict\n");

    std::ostringstream mixed;
    write_sweep_csv(mixed, {{0.1, true, -0.05, 20.0, "Stable"}, {0.2, false, 0, 0, "ERROR:PF_DIVERGED"}});
    CHECK(mixed.str() == "value,D_net1,f_c1_hz,verdict\n0.1,-0.05,20,Stable\n0.2,,,ERROR:PF_DIVERGED\n");
}

TEST_CASE("adjustment and manifest documents", "[report]") {
    const Analyzer an = paper();
    std::vector<double> p, q, p2;
    an.spec().case_powers(an.spec().operating_case("2"), p, q);
    an.spec().case_powers(an.spec().operating_case("scenario2"), p2, q);
    const Json a = adjustment_json(an, adjustment_compare(an, p, p2, q));
    CHECK(a.at("improvement") == true);
    CHECK(a.at("per_converter_delta_p").at("ES1").get<double>() == round12(-1.6));

    RunManifest m;
    m.command = "analyze";
    m.outputs = {"a.json", "b.csv"};
    const Json mj = manifest_json(m);
    CHECK(mj.at("outputs").size() == 2);
    CHECK(mj.contains("wall_time_s"));
}
