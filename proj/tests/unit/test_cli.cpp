#include <catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = SYNCSTAB_CLI_PATH;
const std::string kConfigs = SYNCSTAB_CONFIG_DIR;

int run(const std::string& args) {
    const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path scratch_dir() {
    const fs::path d = fs::temp_directory_path() / ("syncstab_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_CASE("analyze exit codes follow the verdict", "[cli]") {
    const std::string paper = kConfigs + "/paper_testsystem.cfg";
    CHECK(run("analyze " + paper + " --case 1") == 0);
    CHECK(run("analyze " + paper + " --case 3") == 2);
    CHECK(run("analyze " + kConfigs + "/two_bus.cfg") == 0);
    CHECK(run("--config " + paper + " --case 2 analyze") == 2);
}

TEST_CASE("no crossing exits with 3", "[cli]") {
    const fs::path dir = scratch_dir();
    std::ofstream(dir / "narrow.cfg") << slurp(kConfigs + "/two_bus.cfg")
                                      << "scan_fmin_hz = 1\nscan_fmax_hz = 5\n";
    CHECK(run("analyze " + (dir / "narrow.cfg").string()) == 3);
}

TEST_CASE("errors exit with 1", "[cli]") {
    const std::string paper = kConfigs + "/paper_testsystem.cfg";
    CHECK(run("analyze /nonexistent.cfg") == 1);
    CHECK(run("analyze " + paper + " --case nope") == 1);
    CHECK(run("adjust " + paper + " --case 2 --set ES1.q=0.1") == 1);
    CHECK(run("adjust " + paper + " --case 2 --set GHOST=0.1") == 1);
    CHECK(run("sweep " + paper + " --converter WTG1 --range 0:1") == 1);
    CHECK(run("frobnicate") == 1);
    CHECK(run("") == 1);
}

TEST_CASE("outputs are byte-identical across runs and listed in the manifest", "[cli]") {
    const fs::path dir = scratch_dir();
    const std::string paper = kConfigs + "/paper_testsystem.cfg";
    const auto a = dir / "a.csv", b = dir / "b.csv";
    REQUIRE(run("curves " + paper + " --case 2 --out " + a.string()) == 0);
    REQUIRE(run("curves " + paper + " --case 2 --out " + b.string()) == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a).rfind("f_hz,D_con,K_con,D_net_1,", 0) == 0);
    const std::string manifest = slurp(a.string() + ".manifest.json");
    CHECK(manifest.find("\"outputs\"") != std::string::npos);
    CHECK(manifest.find(a.string()) != std::string::npos);

    const auto r = dir / "r.json", c = dir / "c.csv";
    REQUIRE(run("analyze " + paper + " --case 1 --out " + r.string() + " --curves " + c.string()) == 0);
    const std::string m2 = slurp(r.string() + ".manifest.json");
    CHECK(m2.find(r.string()) != std::string::npos);
    CHECK(m2.find(c.string()) != std::string::npos);
}

TEST_CASE("sweep, adjust, sensitivity and simulate run", "[cli]") {
    const fs::path dir = scratch_dir();
    const std::string paper = kConfigs + "/paper_testsystem.cfg";
    const auto sw = dir / "sweep.csv";
    CHECK(run("sweep " + paper + " --case 2 --converter WTG1 --param p --range 0:0.2:0.1 --out " + sw.string()) == 0);
    std::istringstream rows(slurp(sw));
    std::string line;
    int n = 0;
    while (std::getline(rows, line)) ++n;
    CHECK(n == 4);

    const auto empty = dir / "empty.csv";
    CHECK(run("sweep " + paper + " --converter WTG1 --range 1:0:0.1 --out " + empty.string()) == 0);
    CHECK(slurp(empty) == "value,D_net1,f_c1_hz,verdict\n");

    const auto adj = dir / "adj.json";
    CHECK(run("adjust " + paper + " --case 2 --set ES1=-0.8,ES2.p=-0.6 --out " + adj.string()) == 0);
    CHECK(slurp(adj).find("\"improvement\": true") != std::string::npos);

    const auto sens = dir / "sens.csv";
    CHECK(run("sensitivity " + paper + " --case 2 --out " + sens.string()) == 0);
    CHECK(slurp(sens).find("WTG1,") != std::string::npos);

    const auto ts = dir / "ts.csv", modes = dir / "modes.csv";
    CHECK(run("simulate " + kConfigs + "/two_bus.cfg --duration 0.2 --decimate 10 --out " + ts.string() +
              " --modes " + modes.string()) == 0);
    CHECK(slurp(ts).rfind("t_s,theta_1,omega_1,dp_1\n", 0) == 0);
    CHECK(slurp(modes).rfind("re,im,f_hz,damping_ratio\n", 0) == 0);
}
