#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <thread>

#include "windtrap/controller.hpp"
#include "windtrap/events.hpp"
#include "windtrap/s7lite.hpp"

namespace windtrap::web {

struct PanelConfig {
    uint16_t poke_window_start = 5;   // HR0..HR4 stay controller-owned
    uint16_t poke_window_end = 15;    // inclusive
};

/// The PLC's embedded diagnostic panel: unauthenticated by design. Every
/// state-changing request is funneled through the controller command queue and
/// logged exactly once with the peer address.
class PanelServer {
public:
    PanelServer(PlcController& plc, const s7::DeviceIdentity& identity, PanelConfig cfg,
                EventLog* log);
    ~PanelServer();

    bool start(const std::string& bind_addr, uint16_t port);
    void stop();
    uint16_t port() const { return port_; }

private:
    std::string render_status() const;

    PlcController& plc_;
    s7::DeviceIdentity identity_;
    PanelConfig cfg_;
    EventLog* log_;
    uint16_t port_ = 0;
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::thread serve_thread_;
};

}  // namespace windtrap::web
