#include "windtrap/decoyweb.hpp"

#include <cstdio>
#include <sstream>

#include <httplib.h>

namespace windtrap::web {

struct PanelServer::Impl {
    httplib::Server server;
};

namespace {

std::string page(const std::string& title, const std::string& body) {
    std::ostringstream os;
    os << "<html><head><title>" << title << "</title></head>\n"
       << "<body bgcolor=\"#ffffff\">\n"
       << "<h2>" << title << "</h2>\n"
       << body << "<hr><i>Maintenance access - engineering diagnostics</i></body></html>\n";
    return os.str();
}

std::string mode_name(CpuMode m) { return m == CpuMode::Run ? "RUN" : "STOP"; }

std::string sim_time_str(double t) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", t);
    return buf;
}

std::string param(const httplib::Request& req, const std::string& key) {
    if (req.has_param(key)) return req.get_param_value(key);
    return "";
}

}  // namespace

PanelServer::PanelServer(PlcController& plc, const s7::DeviceIdentity& identity, PanelConfig cfg,
                         EventLog* log)
    : plc_(plc), identity_(identity), cfg_(cfg), log_(log), impl_(std::make_unique<Impl>()) {}

PanelServer::~PanelServer() { stop(); }

std::string PanelServer::render_status() const {
    auto snap = plc_.snapshot();  // one consistent snapshot for the whole page
    std::ostringstream os;
    os << "<table border=1 cellpadding=4>\n"
       << "<tr><td>Module</td><td>" << identity_.module_type << "</td></tr>\n"
       << "<tr><td>Order number</td><td>" << identity_.order_number << "</td></tr>\n"
       << "<tr><td>Serial</td><td>" << identity_.serial << "</td></tr>\n"
       << "<tr><td>Firmware</td><td>" << identity_.firmware << "</td></tr>\n"
       << "<tr><td>Station</td><td>" << identity_.plant_id << "</td></tr>\n"
       << "<tr><td>CPU state</td><td>" << mode_name(snap.image.cpu_mode) << "</td></tr>\n"
       << "<tr><td>Turbine state</td><td>" << fsm_state_name(snap.state) << "</td></tr>\n"
       << "</table>\n<h3>Process values</h3>\n<table border=1 cellpadding=4>\n"
       << "<tr><th>Register</th><th>Value</th></tr>\n";
    for (size_t i = 0; i < snap.image.holding_registers.size(); ++i) {
        os << "<tr><td>HR" << i << "</td><td>" << snap.image.holding_registers[i]
           << "</td></tr>\n";
    }
    os << "</table>\n<h3>Coils</h3><tt>";
    for (size_t i = 0; i < snap.image.coils.size(); ++i) os << (snap.image.coils[i] ? '1' : '0');
    os << "</tt>\n"
       << "<h3>Commands</h3>"
       << "<form action=\"/cpu\" method=\"post\">CPU mode "
       << "<input name=\"mode\" value=\"STOP\"><input type=submit></form>\n"
       << "<form action=\"/poke\" method=\"post\">Write register addr "
       << "<input name=\"addr\" size=4> value <input name=\"value\" size=8>"
       << "<input type=submit></form>\n";
    return page("Turbine diagnostics", os.str());
}

bool PanelServer::start(const std::string& bind_addr, uint16_t port) {
    auto& srv = impl_->server;

    auto handler_status = [this](const httplib::Request&, httplib::Response& res) {
        res.set_header("Server", "PLC Embedded HTTPD");
        res.set_content(render_status(), "text/html");
    };
    srv.Get("/", handler_status);

    auto handler_cpu = [this](const httplib::Request& req, httplib::Response& res) {
        res.set_header("Server", "PLC Embedded HTTPD");
        std::string mode = param(req, "mode");
        std::string peer = req.remote_addr + ":" + std::to_string(req.remote_port);
        if (mode != "RUN" && mode != "STOP") {
            if (log_)
                log_->emit("web", "web_reject",
                           {{"action", "cpu"}, {"mode", mode}, {"peer", peer}},
                           Severity::Warning);
            res.status = 400;
            res.set_content(page("Error", "<p>unsupported mode</p>"), "text/html");
            return;
        }
        plc_.submit(CpuModeCmd{mode == "RUN" ? CpuMode::Run : CpuMode::Stop, "web:" + peer});
        if (log_)
            log_->emit("web", "web_cpu",
                       {{"mode", mode},
                        {"peer", peer},
                        {"sim_time", sim_time_str(plc_.snapshot().sim_time_s)}});
        res.set_content(page("CPU command accepted", "<p>CPU mode set to " + mode + "</p>"),
                        "text/html");
    };
    srv.Get("/cpu", handler_cpu);
    srv.Post("/cpu", handler_cpu);

    auto handler_poke = [this](const httplib::Request& req, httplib::Response& res) {
        res.set_header("Server", "PLC Embedded HTTPD");
        std::string peer = req.remote_addr + ":" + std::to_string(req.remote_port);
        long addr = -1, value = -1;
        try {
            addr = std::stol(param(req, "addr"));
            value = std::stol(param(req, "value"));
        } catch (...) {
        }
        bool in_window = addr >= cfg_.poke_window_start && addr <= cfg_.poke_window_end;
        bool value_ok = value >= 0 && value <= 0xFFFF;
        if (!in_window || !value_ok) {
            if (log_)
                log_->emit("web", "web_reject",
                           {{"action", "poke"},
                            {"addr", param(req, "addr")},
                            {"value", param(req, "value")},
                            {"peer", peer}},
                           Severity::Warning);
            res.status = 403;
            res.set_content(page("Error", "<p>address not writable</p>"), "text/html");
            return;
        }
        plc_.submit(RegisterWriteCmd{static_cast<uint16_t>(addr), static_cast<uint16_t>(value)});
        if (log_)
            log_->emit("web", "web_poke",
                       {{"addr", std::to_string(addr)},
                        {"value", std::to_string(value)},
                        {"peer", peer},
                        {"sim_time", sim_time_str(plc_.snapshot().sim_time_s)}});
        res.set_content(page("Write accepted", "<p>HR" + std::to_string(addr) + " := " +
                                                   std::to_string(value) + "</p>"),
                        "text/html");
    };
    srv.Get("/poke", handler_poke);
    srv.Post("/poke", handler_poke);

    if (port == 0) {
        int p = srv.bind_to_any_port(bind_addr);
        if (p <= 0) return false;
        port_ = static_cast<uint16_t>(p);
    } else {
        if (!srv.bind_to_port(bind_addr, port)) return false;
        port_ = port;
    }
    serve_thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
    // listen_after_bind spins up asynchronously; wait until it serves
    srv.wait_until_ready();
    return true;
}

void PanelServer::stop() {
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
    if (serve_thread_.joinable()) serve_thread_.join();
}

}  // namespace windtrap::web
