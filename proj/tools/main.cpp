#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "windtrap/config.hpp"
#include "windtrap/orchestrator.hpp"
#include "windtrap/redteam.hpp"

namespace {

windtrap::Scenario* g_scenario = nullptr;

void on_signal(int) {
    if (g_scenario) g_scenario->request_stop();
}

int cmd_run(const std::string& config_path) {
    std::vector<windtrap::ConfigError> errors;
    auto cfg = windtrap::load_config(config_path, errors);
    if (!cfg) {
        std::cerr << "config invalid:\n" << windtrap::config_errors_to_string(errors);
        return 2;
    }

    windtrap::Scenario scenario(*cfg);
    std::string err;
    if (!scenario.start(&err)) {
        std::cerr << "startup failed: " << err << "\n";
        return 1;
    }
    g_scenario = &scenario;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    const auto& ports = scenario.ports();
    std::cout << "honeynet up; exposed ports:"
              << " web=" << ports.external_web << " s7=" << ports.external_s7
              << " modbus=" << ports.external_modbus << "\n"
              << "artifacts in " << scenario.artifacts().out_dir << "\n";

    scenario.wait();
    g_scenario = nullptr;

    auto report = windtrap::build_report(scenario.artifacts().out_dir);
    std::string text = windtrap::report_to_text(report);
    std::ofstream out(std::filesystem::path(scenario.artifacts().out_dir) / "report.txt");
    out << text;
    std::cout << text;
    return 0;
}

int cmd_report(const std::string& run_dir) {
    auto report = windtrap::build_report(run_dir);
    std::string text = windtrap::report_to_text(report);
    std::ofstream out(std::filesystem::path(run_dir) / "report.txt");
    out << text;
    std::cout << text;
    return report.warnings.empty() ? 0 : 1;
}

void write_outcome(const std::string& out_dir, const windtrap::red::AttackOutcome& outcome) {
    if (out_dir.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    std::ofstream f(std::filesystem::path(out_dir) / "attacks.log", std::ios::app);
    f << outcome.to_line() << "\n";
}

int cmd_attack(const std::string& kind, const std::string& host, uint16_t web_port,
               uint16_t modbus_port, uint16_t s7_port, const std::string& out_dir) {
    using namespace windtrap::red;
    if (kind == "stop-cpu") {
        auto outcome = attack_stop_cpu(host, web_port, modbus_port);
        std::cout << outcome.to_line() << "\n";
        write_outcome(out_dir, outcome);
        return outcome.success ? 0 : 1;
    }
    if (kind == "write-coils") {
        // emergency-stop coil
        auto outcome = attack_write_coils(host, modbus_port, 3, {true});
        std::cout << outcome.to_line() << "\n";
        write_outcome(out_dir, outcome);
        return outcome.success ? 0 : 1;
    }
    if (kind == "fingerprint") {
        auto result = fingerprint_s7(host, s7_port);
        if (!result.success) {
            std::cout << "fingerprint failed: " << result.error << "\n";
            return 1;
        }
        std::cout << "module_type=\"" << result.identity.module_type << "\""
                  << " order_number=\"" << result.identity.order_number << "\""
                  << " serial=\"" << result.identity.serial << "\""
                  << " firmware=\"" << result.identity.firmware << "\""
                  << " plant_id=\"" << result.identity.plant_id << "\"\n";
        return 0;
    }
    if (kind == "recon") {
        auto outcome = attack_read_recon(host, modbus_port);
        std::cout << outcome.to_line() << "\n";
        write_outcome(out_dir, outcome);
        return outcome.success ? 0 : 1;
    }
    std::cerr << "unknown attack kind: " << kind
              << " (expected stop-cpu | write-coils | fingerprint | recon)\n";
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"wind-plant ICS honeynet"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "run a scenario from a config file");
    run->add_option("config", config_path, "scenario config (JSON)")->required();

    std::string run_dir;
    auto* report = app.add_subcommand("report", "summarize a run directory");
    report->add_option("run_dir", run_dir, "directory with events.log / trace.csv")->required();

    std::string kind, host = "127.0.0.1", out_dir;
    uint16_t web_port = 80, modbus_port = 502, s7_port = 102;
    auto* attack = app.add_subcommand("attack", "run a scripted attack against a target");
    attack->add_option("kind", kind, "stop-cpu | write-coils | fingerprint | recon")->required();
    attack->add_option("target", host, "target host")->required();
    attack->add_option("--web-port", web_port, "exposed web port");
    attack->add_option("--modbus-port", modbus_port, "exposed modbus port");
    attack->add_option("--s7-port", s7_port, "exposed s7 port");
    attack->add_option("--out", out_dir, "directory for outcome records");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return cmd_run(config_path);
    if (report->parsed()) return cmd_report(run_dir);
    if (attack->parsed()) return cmd_attack(kind, host, web_port, modbus_port, s7_port, out_dir);
    return 2;
}
