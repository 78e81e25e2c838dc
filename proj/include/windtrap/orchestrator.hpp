#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "windtrap/config.hpp"

namespace windtrap {

struct ScenarioPorts {
    uint16_t modbus = 0, s7 = 0, web = 0;                    // internal services
    uint16_t external_modbus = 0, external_s7 = 0, external_web = 0;  // via proxy
    uint16_t telemetry = 0, control = 0;
};

struct ScenarioArtifacts {
    std::string out_dir;
    std::string pcap_path;
    std::string events_path;
    std::string trace_path;
};

/// Wires plant, wind source, field bridge, controller and all decoy services,
/// then runs the paced simulation loop. The physics/controller loop is driven
/// on one deterministic schedule; protocol servers run concurrently and act on
/// the controller only through its command queue.
class Scenario {
public:
    explicit Scenario(ScenarioConfig cfg);
    ~Scenario();

    bool start(std::string* err);
    void wait();
    void request_stop();

    const ScenarioPorts& ports() const { return ports_; }
    const ScenarioArtifacts& artifacts() const { return artifacts_; }
    bool failed() const { return failed_.load(); }

private:
    void loop();

    ScenarioConfig cfg_;
    ScenarioPorts ports_;
    ScenarioArtifacts artifacts_;
    std::atomic<bool> stop_{false};
    std::atomic<bool> failed_{false};
    std::atomic<bool> torn_down_{false};
    std::thread sim_thread_;

    struct Wiring;
    std::unique_ptr<Wiring> w_;
};

/// Convenience wrapper: start, run to completion, tear down.
bool run_scenario(const ScenarioConfig& cfg, std::string* err,
                  ScenarioArtifacts* artifacts = nullptr);

// --- Reporting -------------------------------------------------------------------

struct RunReport {
    std::map<std::string, uint64_t> events_by_kind;
    std::map<int, uint64_t> modbus_writes_by_fc;
    uint64_t connections = 0;
    uint64_t s7_probes = 0;
    uint64_t web_actions = 0;
    std::map<std::string, double> state_dwell_s;
    std::vector<std::string> fsm_sequence;  // deduplicated visit order
    uint8_t final_fault_bits = 0;
    uint64_t trace_rows = 0;
    std::string seed;
    std::vector<std::string> warnings;
};

RunReport build_report(const std::string& run_dir);
std::string report_to_text(const RunReport& report);

}  // namespace windtrap
