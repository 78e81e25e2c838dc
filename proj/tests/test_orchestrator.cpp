#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "pcap_reader.hpp"
#include "windtrap/orchestrator.hpp"

using namespace windtrap;

namespace {

namespace fs = std::filesystem;

struct RunDir {
    fs::path root;
    RunDir(const std::string& tag) {
        root = fs::temp_directory_path() / ("windtrap_run_" + tag);
        fs::remove_all(root);
        fs::create_directories(root);
    }
    ~RunDir() { fs::remove_all(root); }
    std::string file(const std::string& name) const { return (root / name).string(); }
};

void write_profile(const std::string& path, const std::string& body) {
    std::ofstream f(path);
    f << body;
}

ScenarioConfig calm_config(const RunDir& dir) {
    ScenarioConfig cfg;
    cfg.run.duration_s = 20.0;
    cfg.run.time_scale = 0.0;  // unpaced
    cfg.run.seed = 7;
    cfg.run.out_dir = dir.file("out");
    cfg.run.bind_address = "127.0.0.1";
    cfg.wind.mode = "replay";
    cfg.wind.profile_path = dir.file("calm.csv");
    cfg.wind.sigma_mps = 0.3;
    cfg.ports = PortConfig{0, 0, 0, 0, 0, 0, 0, 0};  // all ephemeral
    write_profile(cfg.wind.profile_path, "0,0\n100,0\n");
    return cfg;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("calm run stays parked and produces all artifacts") {
    RunDir dir("calm");
    auto cfg = calm_config(dir);
    std::string err;
    ScenarioArtifacts artifacts;
    REQUIRE_MESSAGE(run_scenario(cfg, &err, &artifacts), err);

    auto trace = slurp(artifacts.trace_path);
    CHECK(trace.find("fsm_state") != std::string::npos);
    CHECK(trace.find("Startup") == std::string::npos);  // never left ParkBrake
    CHECK(trace.find("ParkBrake") != std::string::npos);

    auto report = build_report(artifacts.out_dir);
    CHECK(report.trace_rows == 400);  // 20 s at 50 ms
    CHECK(report.fsm_sequence == std::vector<std::string>{"ParkBrake"});
    CHECK(report.connections == 0);
    CHECK(report.modbus_writes_by_fc.empty());
    CHECK(report.seed == "7");
    CHECK(report.final_fault_bits == 0);

    auto pcap = pcapcheck::read_pcap(artifacts.pcap_path);
    CHECK(pcap.ok);  // header-only capture is still well-formed
    CHECK(pcap.packets.empty());

    auto text = report_to_text(report);
    CHECK(text.find("visited states: ParkBrake") != std::string::npos);
}

TEST_CASE("same seed and profile give byte-identical traces") {
    RunDir dir("det");
    auto cfg = calm_config(dir);
    // a profile that actually exercises the controller
    write_profile(cfg.wind.profile_path, "0,0\n5,0\n6,12\n60,12\n");
    cfg.run.duration_s = 40.0;

    std::string err;
    cfg.run.out_dir = dir.file("a");
    ScenarioArtifacts a;
    REQUIRE_MESSAGE(run_scenario(cfg, &err, &a), err);
    cfg.run.out_dir = dir.file("b");
    ScenarioArtifacts b;
    REQUIRE_MESSAGE(run_scenario(cfg, &err, &b), err);

    auto ta = slurp(a.trace_path);
    auto tb = slurp(b.trace_path);
    REQUIRE_FALSE(ta.empty());
    CHECK(ta == tb);

    auto ra = build_report(a.out_dir);
    auto rb = build_report(b.out_dir);
    CHECK(ra.events_by_kind == rb.events_by_kind);
    CHECK(ra.fsm_sequence == rb.fsm_sequence);
}

TEST_CASE("scenario with wind reaching the band starts generating") {
    RunDir dir("gen");
    auto cfg = calm_config(dir);
    write_profile(cfg.wind.profile_path, "0,12\n300,12\n");
    cfg.run.duration_s = 120.0;
    cfg.wind.sigma_mps = 0.3;

    std::string err;
    ScenarioArtifacts artifacts;
    REQUIRE_MESSAGE(run_scenario(cfg, &err, &artifacts), err);
    auto report = build_report(artifacts.out_dir);
    REQUIRE(report.fsm_sequence.size() >= 3);
    CHECK(report.fsm_sequence[0] == "ParkBrake");
    CHECK(report.fsm_sequence[1] == "Startup");
    CHECK(report.fsm_sequence[2] == "Generating");
    CHECK(report.final_fault_bits == 0);
    CHECK(report.state_dwell_s["Generating"] > 10.0);
}

TEST_CASE("config errors abort startup cleanly") {
    RunDir dir("bad");
    auto cfg = calm_config(dir);
    cfg.wind.profile_path = dir.file("missing.csv");
    Scenario scenario(cfg);
    std::string err;
    CHECK_FALSE(scenario.start(&err));
    CHECK_FALSE(err.empty());
}
