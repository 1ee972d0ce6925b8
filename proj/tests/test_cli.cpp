#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "svsc/cli.hpp"
#include "svsc/grid_model.hpp"

using namespace svsc;
namespace fs = std::filesystem;

namespace {

struct Sandbox {
    fs::path dir;
    Sandbox() {
        dir = fs::temp_directory_path() / ("svsc_cli_" + std::to_string(::getpid()) + "_" +
                                           std::to_string(counter()++));
        fs::create_directories(dir);
    }
    ~Sandbox() { fs::remove_all(dir); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string case_path(const StudyCase& c) {
        const fs::path p = dir / "case.json";
        save_case(c, p.string());
        return p.string();
    }
    std::string out() const { return (dir / "out").string(); }
    std::string read(const std::string& name) const {
        std::ifstream in(fs::path(out()) / name);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }
    bool has(const std::string& name) const { return fs::exists(fs::path(out()) / name); }
};

int run(const std::vector<std::string>& args, std::string* out_text = nullptr) {
    std::ostringstream out, err;
    const int code = run_command(args, out, err);
    if (out_text) *out_text = out.str() + err.str();
    return code;
}

}  // namespace

TEST_CASE("usage errors exit with 64") {
    CHECK(run({"frobnicate", "--case", "x.json"}) == 64);
    CHECK(run({"validate"}) == 64);  // --case is required
    Sandbox sb;
    const std::string cp = sb.case_path(fixtures::tdsim_fixture());
    CHECK(run({"validate", "--case", cp, "--out", sb.out(), "--period", "7"}) == 64);
    CHECK(run({"snapshot", "--case", cp, "--out", sb.out(), "--fault", "nope"}) == 64);
}

TEST_CASE("validate reports diagnostics through the exit code") {
    Sandbox sb;
    const std::string good = sb.case_path(fixtures::tdsim_fixture());
    CHECK(run({"validate", "--case", good, "--out", sb.out()}) == 0);
    CHECK(sb.read("diagnostics.csv") == "entity,field,rule\n");
    CHECK(sb.has("manifest.json"));

    StudyCase broken = fixtures::tdsim_fixture();
    broken.windfarms[0].kq_max = 5.0;
    const std::string bad = sb.case_path(broken);
    CHECK(run({"validate", "--case", bad, "--out", sb.out()}) == 1);
    CHECK(sb.read("diagnostics.csv").find("kq") != std::string::npos);
}

TEST_CASE("the bundled 39-bus style case validates cleanly") {
    Sandbox sb;
    CHECK(run({"validate", "--case", std::string(SVSC_CASE_DIR) + "/wind39.json", "--out", sb.out()}) == 0);
}

TEST_CASE("powerflow and mrscr commands emit their tables") {
    Sandbox sb;
    const std::string cp = sb.case_path(fixtures::tdsim_fixture());
    CHECK(run({"powerflow", "--case", cp, "--out", sb.out(), "--period", "0"}) == 0);
    const std::string bus_csv = sb.read("powerflow_bus.csv");
    CHECK(bus_csv.find("bus,vm,va_rad\n") == 0);
    CHECK(std::count(bus_csv.begin(), bus_csv.end(), '\n') == 8);  // header + 7 buses

    CHECK(run({"mrscr", "--case", cp, "--out", sb.out(), "--definition", "equivalent"}) == 0);
    CHECK(sb.read("mrscr.csv").find("wf,period,value,margin,scc_proxy\n") == 0);
    CHECK(run({"mrscr", "--case", cp, "--out", sb.out(), "--definition", "impedance"}) == 0);
    CHECK(run({"mrscr", "--case", cp, "--out", sb.out(), "--definition", "bogus"}) == 64);
}

TEST_CASE("snapshot emits the three-moment table and the security verdict") {
    Sandbox sb;
    const std::string cp = sb.case_path(fixtures::tdsim_fixture());
    const int code = run({"snapshot", "--case", cp, "--out", sb.out(), "--fault", "f2"});
    CHECK((code == 0 || code == 1));
    CHECK(sb.has("snapshot_f2_t0.txt"));
    const std::string sec = sb.read("security.csv");
    CHECK(sec.find("wf,v_flt,v_fss,v_clr") == 0);

    // An insecure configuration exits 1.
    StudyCase tight = fixtures::tdsim_fixture();
    tight.windfarms[0].v_trip_low = 0.7;
    tight.windfarms[0].v_ref_lvrt = 0.81;
    const std::string cp2 = sb.case_path(tight);
    CHECK(run({"snapshot", "--case", cp2, "--out", sb.out(), "--fault", "f2"}) == 1);
}

TEST_CASE("simulate writes the trajectory and the comparison errors") {
    Sandbox sb;
    const std::string cp = sb.case_path(fixtures::tdsim_fixture());
    CHECK(run({"simulate", "--case", cp, "--out", sb.out(), "--fault", "f2"}) == 0);
    CHECK(sb.read("trajectory.csv").find("time,v0") == 0);
    const std::string err = sb.read("sim_errors.csv");
    CHECK(err.find("fault_on,") != std::string::npos);
    CHECK(err.find("fault_cleared,") != std::string::npos);
}

TEST_CASE("uc and svsc-uc produce deterministic artifacts and matching schedules when security is idle") {
    Sandbox sb;
    StudyCase c = fixtures::five_bus();
    c.faults.clear();
    c.mrscr_threshold = 0.2;
    const std::string cp = sb.case_path(c);

    CHECK(run({"uc", "--case", cp, "--out", sb.out()}) == 0);
    const std::string uc_schedule = sb.read("schedule.csv");
    CHECK(uc_schedule.find("period,device,kind") == 0);

    CHECK(run({"svsc-uc", "--case", cp, "--out", sb.out()}) == 0);
    const std::string svsc_schedule = sb.read("schedule.csv");
    CHECK(svsc_schedule == uc_schedule);

    // Determinism of the run artifacts.
    const std::string h1 = sb.read("gbd_history.csv");
    CHECK(run({"svsc-uc", "--case", cp, "--out", sb.out()}) == 0);
    CHECK(sb.read("gbd_history.csv") == h1);
    CHECK(sb.read("schedule.csv") == svsc_schedule);
}

TEST_CASE("svsc-uc resolves the engineered overvoltage case end to end") {
    Sandbox sb;
    const std::string cp = sb.case_path(fixtures::tov_fixture(2));
    std::string text;
    CHECK(run({"svsc-uc", "--case", cp, "--out", sb.out()}, &text) == 0);
    CHECK(sb.has("controls.csv"));
    CHECK(sb.read("run_log.txt").find("status converged") == 0);
    CHECK(sb.read("run_log.txt").find("reverification passed") != std::string::npos);
    const std::string hist = sb.read("gbd_history.csv");
    CHECK(std::count(hist.begin(), hist.end(), '\n') >= 3);  // header + 2 iterations
}

TEST_CASE("report collects the comparison tables") {
    Sandbox sb;
    const std::string cp = sb.case_path(fixtures::tov_fixture(1));
    CHECK(run({"report", "--case", cp, "--out", sb.out()}) == 0);
    const std::string cb = sb.read("cost_breakdown.csv");
    CHECK(cb.find("model,generation,startup,shutdown,curtailment,total\n") == 0);
    CHECK(cb.find("\nuc,") != std::string::npos);
    CHECK(cb.find("svsc-uc,") != std::string::npos);
    CHECK(sb.read("mrscr_series.csv").find("wf,period,value") == 0);
    CHECK(sb.read("voltage_margins.csv").find("wf,period,fault") == 0);
    const std::string mw = sb.read("max_wind.csv");
    CHECK(mw.find("model,period,max_scale,max_total_p\n") == 0);
}

TEST_CASE("the output directory honors the environment default") {
    Sandbox sb;
    const std::string cp = sb.case_path(fixtures::tdsim_fixture());
    ::setenv("SVSC_OUT_DIR", sb.out().c_str(), 1);
    CHECK(run({"validate", "--case", cp}) == 0);
    ::unsetenv("SVSC_OUT_DIR");
    CHECK(sb.has("diagnostics.csv"));
}
