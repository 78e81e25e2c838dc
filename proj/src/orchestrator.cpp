#include "windtrap/orchestrator.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "windtrap/decoyweb.hpp"
#include "windtrap/fieldbus.hpp"
#include "windtrap/modbus.hpp"
#include "windtrap/pcap.hpp"
#include "windtrap/plant.hpp"
#include "windtrap/proxycap.hpp"
#include "windtrap/s7lite.hpp"

namespace windtrap {

namespace fs = std::filesystem;

struct Scenario::Wiring {
    EventLog log;
    pcap::PcapWriter pcap;
    std::unique_ptr<proxy::CaptureSink> sink;
    std::unique_ptr<PlcController> plc;
    std::unique_ptr<modbus::Server> modbus_srv;
    std::unique_ptr<s7::Server> s7_srv;
    std::unique_ptr<web::PanelServer> web_srv;
    std::unique_ptr<proxy::TransparentProxy> proxy_srv;
    std::unique_ptr<FieldBridge> bridge;
    std::unique_ptr<SimFieldEndpoint> sim_ep;
    std::unique_ptr<WindSource> wind;
    std::ofstream trace;
};

Scenario::Scenario(ScenarioConfig cfg) : cfg_(std::move(cfg)), w_(std::make_unique<Wiring>()) {}

Scenario::~Scenario() {
    request_stop();
    wait();
}

bool Scenario::start(std::string* err) {
    auto fail = [&](const std::string& m) {
        if (err) *err = m;
        failed_.store(true);
        return false;
    };

    std::error_code ec;
    fs::create_directories(cfg_.run.out_dir, ec);
    artifacts_.out_dir = cfg_.run.out_dir;
    artifacts_.pcap_path = (fs::path(cfg_.run.out_dir) / "capture.pcap").string();
    artifacts_.events_path = (fs::path(cfg_.run.out_dir) / "events.log").string();
    artifacts_.trace_path = (fs::path(cfg_.run.out_dir) / "trace.csv").string();

    if (!w_->log.open(artifacts_.events_path)) return fail("cannot open " + artifacts_.events_path);
    if (!w_->pcap.open(artifacts_.pcap_path)) return fail("cannot open " + artifacts_.pcap_path);
    w_->trace.open(artifacts_.trace_path, std::ios::out | std::ios::trunc);
    if (!w_->trace.is_open()) return fail("cannot open " + artifacts_.trace_path);
    w_->trace << "sim_time,v_wind,w_rotor,pitch_deg,gen_connected,power_kw,fault_bits,"
                 "fsm_state,cpu_mode\n";

    w_->sink = std::make_unique<proxy::CaptureSink>(&w_->pcap, &w_->log);
    w_->plc = std::make_unique<PlcController>(cfg_.controller, &w_->log);

    // Wind source
    WindProfile profile = *WindProfile::from_points({{0.0, 0.0}});
    if (!cfg_.wind.profile_path.empty()) {
        std::string perr;
        auto loaded = WindProfile::load(cfg_.wind.profile_path, &perr);
        if (!loaded) return fail(perr);
        profile = std::move(*loaded);
    } else if (cfg_.wind.mode == "replay") {
        return fail("replay mode requires wind.profile");
    }
    WindSourceConfig wcfg;
    wcfg.live = cfg_.wind.mode == "live";
    wcfg.fetch = cfg_.wind.fetch;
    wcfg.point = cfg_.wind.point;
    wcfg.sigma_mps = cfg_.wind.sigma_mps;
    wcfg.seed = cfg_.run.seed;
    w_->wind = std::make_unique<WindSource>(wcfg, std::move(profile), &w_->log);

    // Internal decoy services
    w_->modbus_srv = std::make_unique<modbus::Server>(*w_->plc, &w_->log);
    if (!w_->modbus_srv->start("127.0.0.1", cfg_.ports.modbus_port))
        return fail("cannot bind modbus service port " + std::to_string(cfg_.ports.modbus_port));
    ports_.modbus = w_->modbus_srv->port();

    w_->s7_srv = std::make_unique<s7::Server>(cfg_.identity, *w_->plc, &w_->log);
    if (!w_->s7_srv->start("127.0.0.1", cfg_.ports.s7_port)) {
        w_->modbus_srv->stop();
        return fail("cannot bind s7 service port " + std::to_string(cfg_.ports.s7_port));
    }
    ports_.s7 = w_->s7_srv->port();

    web::PanelConfig pcfg{cfg_.poke_window_start, cfg_.poke_window_end};
    w_->web_srv = std::make_unique<web::PanelServer>(*w_->plc, cfg_.identity, pcfg, &w_->log);
    if (!w_->web_srv->start("127.0.0.1", cfg_.ports.web_port)) {
        w_->modbus_srv->stop();
        w_->s7_srv->stop();
        return fail("cannot bind web service port " + std::to_string(cfg_.ports.web_port));
    }
    ports_.web = w_->web_srv->port();

    // Transparent proxy in front of everything
    w_->proxy_srv = std::make_unique<proxy::TransparentProxy>(*w_->sink, &w_->log);
    std::vector<proxy::ProxyRoute> routes{
        {"web", cfg_.ports.external_web_port, "127.0.0.1", ports_.web},
        {"s7", cfg_.ports.external_s7_port, "127.0.0.1", ports_.s7},
        {"modbus", cfg_.ports.external_modbus_port, "127.0.0.1", ports_.modbus},
    };
    if (!w_->proxy_srv->start(cfg_.run.bind_address, routes)) {
        w_->modbus_srv->stop();
        w_->s7_srv->stop();
        w_->web_srv->stop();
        return fail("cannot bind proxy ports");
    }
    ports_.external_web = w_->proxy_srv->listen_port("web");
    ports_.external_s7 = w_->proxy_srv->listen_port("s7");
    ports_.external_modbus = w_->proxy_srv->listen_port("modbus");

    // Field bus: bind the sim-side control port first, then the bridge.
    w_->sim_ep = std::make_unique<SimFieldEndpoint>("127.0.0.1", 0, cfg_.ports.control_port);
    if (!w_->sim_ep->ok()) return fail("cannot bind control port");
    ports_.control = w_->sim_ep->control_port();

    BridgeConfig bcfg;
    bcfg.telemetry_port = cfg_.ports.telemetry_port;
    bcfg.control_port = ports_.control;
    bcfg.telemetry_period_s = cfg_.controller.scan_period_ms / 1000.0;
    w_->bridge = std::make_unique<FieldBridge>(bcfg, *w_->plc, &w_->log);
    if (!w_->bridge->ok()) return fail("cannot bind telemetry port");
    ports_.telemetry = w_->bridge->telemetry_port();
    w_->sim_ep->set_bridge_telemetry_port(ports_.telemetry);

    w_->log.emit("orchestrator", "scenario_start",
                 {{"seed", std::to_string(cfg_.run.seed)},
                  {"duration_s", std::to_string(cfg_.run.duration_s)},
                  {"time_scale", std::to_string(cfg_.run.time_scale)},
                  {"wind_mode", cfg_.wind.mode}});

    sim_thread_ = std::thread([this] { loop(); });
    return true;
}

void Scenario::loop() {
    using clock = std::chrono::steady_clock;

    const double dt = cfg_.run.plant_dt_s;
    const int scan_every =
        std::max(1, static_cast<int>(std::lround(cfg_.controller.scan_period_ms / 1000.0 / dt)));
    const long total_ticks = std::lround(cfg_.run.duration_s / dt);

    TurbineState state;
    state.pitch_deg = 95.0;
    ControlOutputs controls;  // brakes engaged until the controller says otherwise
    uint8_t last_fault_bits = 0;

    char row[256];
    auto append_trace = [&](double v_wind, const ControllerSnapshot& snap) {
        std::snprintf(row, sizeof(row), "%.6f,%.6f,%.6f,%.6f,%d,%.3f,%u,%s,%s\n",
                      state.sim_time_s, v_wind, state.w_rotor, state.pitch_deg,
                      state.generator_connected ? 1 : 0, state.power_kw,
                      static_cast<unsigned>(state.faults.bits()), fsm_state_name(snap.state),
                      snap.image.cpu_mode == CpuMode::Run ? "RUN" : "STOP");
        w_->trace << row;
    };

    auto t_start = clock::now();
    for (long tick = 0; tick < total_ticks && !stop_.load(); ++tick) {
        double t0 = static_cast<double>(tick) * dt;
        WindSample wind = w_->wind->sample(t0);

        state = step(state, wind.v_wind, controls, dt, cfg_.plant);

        uint8_t bits = state.faults.bits();
        if (bits != last_fault_bits) {
            static const char* names[4] = {"rotor", "gearbox", "generator", "brake"};
            for (int b = 0; b < 4; ++b) {
                if ((bits & (1 << b)) && !(last_fault_bits & (1 << b))) {
                    std::snprintf(row, sizeof(row), "%.3f", state.sim_time_s);
                    w_->log.emit("plant", "fault", {{"flag", names[b]}, {"sim_time", row}},
                                 Severity::Alarm);
                }
            }
            last_fault_bits = bits;
        }

        bool scan_due = (tick + 1) % scan_every == 0;
        if (scan_due) {
            // Telemetry at the controller's cadence, then let the bridge push it in.
            FieldFrame frame;
            frame.ch0 = quantize(wind.v_wind, cfg_.controller.full_scale_wind).value_or(0);
            frame.ch1 = quantize(state.w_rotor, cfg_.controller.full_scale_rotor).value_or(0);
            w_->sim_ep->send_telemetry(frame);
            w_->plc->submit(PlantStatusCmd{state.power_kw, state.faults.bits()});
            w_->bridge->poll_telemetry(500, state.sim_time_s);

            w_->plc->scan(state.sim_time_s);
            int sent = w_->bridge->poll_outputs();
            if (sent > 0) {
                auto flags = w_->sim_ep->recv_controls(500);
                if (flags) controls = controls_from_wire(*flags, state.w_rotor, cfg_.controller);
            }
            // Generating regulates pitch continuously, not only on output edges.
            if (!controls.park_brake && !controls.pitch_brake && !controls.generator_trip) {
                controls.pitch_setpoint_deg = regulate_pitch(state.w_rotor, cfg_.controller);
            }
            w_->bridge->check_stale(state.sim_time_s);
        }

        append_trace(wind.v_wind, w_->plc->snapshot());

        if (cfg_.run.time_scale > 0) {
            auto next = t_start + std::chrono::duration_cast<clock::duration>(
                                      std::chrono::duration<double>(
                                          (tick + 1) * dt / cfg_.run.time_scale));
            std::this_thread::sleep_until(next);
        }
    }

    w_->trace.flush();
    w_->log.emit("orchestrator", "scenario_end",
                 {{"sim_time", std::to_string(state.sim_time_s)},
                  {"fault_bits", std::to_string(state.faults.bits())}});
}

void Scenario::wait() {
    if (sim_thread_.joinable()) sim_thread_.join();
    if (torn_down_.exchange(true)) return;
    // Tear down in dependency order; every sink flushes before close.
    if (w_->wind) w_->wind->stop();
    if (w_->proxy_srv) w_->proxy_srv->stop();
    if (w_->modbus_srv) w_->modbus_srv->stop();
    if (w_->s7_srv) w_->s7_srv->stop();
    if (w_->web_srv) w_->web_srv->stop();
    if (w_->bridge) w_->bridge->shutdown();
    if (w_->trace.is_open()) w_->trace.close();
    if (w_->pcap.is_open()) w_->pcap.close();
    if (w_->log.is_open()) w_->log.close();
}

void Scenario::request_stop() { stop_.store(true); }

bool run_scenario(const ScenarioConfig& cfg, std::string* err, ScenarioArtifacts* artifacts) {
    Scenario s(cfg);
    if (!s.start(err)) return false;
    s.wait();
    if (artifacts) *artifacts = s.artifacts();
    return true;
}

// --- Report ------------------------------------------------------------------------

RunReport build_report(const std::string& run_dir) {
    RunReport rep;
    fs::path dir(run_dir);

    std::ifstream events((dir / "events.log").string());
    if (!events.is_open()) {
        rep.warnings.push_back("events.log missing or unreadable");
    } else {
        std::string line;
        while (std::getline(events, line)) {
            ParsedEvent ev;
            if (!parse_event_line(line, ev)) {
                rep.warnings.push_back("unparseable event line");
                continue;
            }
            rep.events_by_kind[ev.kind]++;
            if (ev.kind == "modbus_write") {
                auto it = ev.attrs.find("fc");
                if (it != ev.attrs.end()) rep.modbus_writes_by_fc[std::atoi(it->second.c_str())]++;
            }
            if (ev.kind == "conn_open") rep.connections++;
            if (ev.kind == "s7_request" || ev.kind == "szl_read" || ev.kind == "cotp_connect")
                rep.s7_probes++;
            if (ev.kind == "web_cpu" || ev.kind == "web_poke" || ev.kind == "web_reject")
                rep.web_actions++;
            if (ev.kind == "scenario_start") {
                auto it = ev.attrs.find("seed");
                if (it != ev.attrs.end()) rep.seed = it->second;
            }
        }
    }

    std::ifstream trace((dir / "trace.csv").string());
    if (!trace.is_open()) {
        rep.warnings.push_back("trace.csv missing or unreadable");
    } else {
        std::string line;
        std::getline(trace, line);  // header
        std::string last_state;
        double last_t = 0.0, prev_t = 0.0;
        while (std::getline(trace, line)) {
            rep.trace_rows++;
            // columns: sim_time,...,fault_bits,fsm_state,cpu_mode
            std::vector<std::string> cols;
            std::istringstream ss(line);
            std::string c;
            while (std::getline(ss, c, ',')) cols.push_back(c);
            if (cols.size() < 9) continue;
            double t = std::atof(cols[0].c_str());
            const std::string& st = cols[7];
            rep.final_fault_bits = static_cast<uint8_t>(std::atoi(cols[6].c_str()));
            rep.state_dwell_s[st] += t - prev_t;
            if (st != last_state) {
                rep.fsm_sequence.push_back(st);
                last_state = st;
            }
            prev_t = t;
            last_t = t;
        }
        (void)last_t;
    }
    return rep;
}

std::string report_to_text(const RunReport& rep) {
    std::ostringstream os;
    os << "=== run report ===\n";
    if (!rep.seed.empty()) os << "seed: " << rep.seed << "\n";
    os << "trace rows: " << rep.trace_rows << "\n";
    os << "connections: " << rep.connections << "\n";
    os << "s7 probes: " << rep.s7_probes << "\n";
    os << "web actions: " << rep.web_actions << "\n";

    os << "\nmodbus writes by function code:\n";
    if (rep.modbus_writes_by_fc.empty()) os << "  (none)\n";
    for (const auto& [fc, n] : rep.modbus_writes_by_fc) os << "  fc " << fc << ": " << n << "\n";

    os << "\nevents by kind:\n";
    for (const auto& [kind, n] : rep.events_by_kind) os << "  " << kind << ": " << n << "\n";

    os << "\nstate dwell times (s):\n";
    for (const auto& [st, secs] : rep.state_dwell_s) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "  %-12s %.1f\n", st.c_str(), secs);
        os << buf;
    }

    os << "\nvisited states: ";
    for (size_t i = 0; i < rep.fsm_sequence.size(); ++i)
        os << (i ? " -> " : "") << rep.fsm_sequence[i];
    os << "\n";

    os << "faults latched (bitfield): " << static_cast<int>(rep.final_fault_bits) << "\n";
    for (const auto& w : rep.warnings) os << "warning: " << w << "\n";
    return os.str();
}

}  // namespace windtrap
