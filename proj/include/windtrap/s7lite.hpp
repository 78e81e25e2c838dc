#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "windtrap/controller.hpp"
#include "windtrap/events.hpp"
#include "windtrap/netutil.hpp"

namespace windtrap::s7 {

/// Strings a scanner can extract over port 102. All configurable.
struct DeviceIdentity {
    std::string module_type = "CPU 1211C AC/DC/Rly";
    std::string order_number = "6ES7 211-1BE40-0XB0";
    std::string serial = "S C-J4N521932015";
    std::string firmware = "V 4.2.1";
    std::string plant_id = "WINDFARM-A/WT-07";

    bool valid() const {
        return !module_type.empty() && !order_number.empty() && !serial.empty() &&
               !firmware.empty() && !plant_id.empty();
    }
};

/// Splits a byte stream on TPKT (RFC 1006) headers: version 3, 16-bit length
/// including the 4-byte header. A bad version poisons the stream.
class TpktAssembler {
public:
    std::vector<std::vector<uint8_t>> feed(const uint8_t* data, size_t len);
    bool poisoned() const { return poisoned_; }
    const std::string& error() const { return error_; }

private:
    std::vector<uint8_t> buf_;
    bool poisoned_ = false;
    std::string error_;
};

std::vector<uint8_t> wrap_tpkt(const std::vector<uint8_t>& payload);

enum class CotpState { AwaitCR, Connected };

/// Per-connection protocol engine: COTP class-0 connect, then S7 requests.
/// Read-only against controller memory; everything else is answered with an
/// S7-level error and logged.
class Engine {
public:
    Engine(const DeviceIdentity& identity, PlcController& plc, EventLog* log)
        : identity_(identity), plc_(plc), log_(log) {}

    /// Handles one TPKT payload. Returns the response payload (to be TPKT-wrapped),
    /// empty for no response. Sets `close` when the connection must be dropped.
    std::vector<uint8_t> handle_payload(const std::vector<uint8_t>& payload,
                                        const std::string& peer, bool& close);

    CotpState state() const { return state_; }
    uint16_t negotiated_tpdu_size() const { return tpdu_size_; }

private:
    std::vector<uint8_t> handle_cotp_connect(const std::vector<uint8_t>& payload, bool& close);
    std::vector<uint8_t> handle_s7_request(const std::vector<uint8_t>& pdu,
                                           const std::string& peer);
    std::vector<uint8_t> setup_communication(const std::vector<uint8_t>& pdu);
    std::vector<uint8_t> read_var(const std::vector<uint8_t>& pdu);
    std::vector<uint8_t> szl_read(const std::vector<uint8_t>& pdu, const std::string& peer);

    DeviceIdentity identity_;
    PlcController& plc_;
    EventLog* log_;
    CotpState state_ = CotpState::AwaitCR;
    uint16_t tpdu_size_ = 1024;
    uint16_t caller_ref_ = 0;
};

class Server {
public:
    Server(const DeviceIdentity& identity, PlcController& plc, EventLog* log)
        : identity_(identity), plc_(plc), log_(log) {}

    bool start(const std::string& bind_addr, uint16_t port);
    void stop();
    uint16_t port() const { return server_.port(); }

private:
    void handle(net::Socket conn, net::Endpoint peer);

    DeviceIdentity identity_;
    PlcController& plc_;
    EventLog* log_;
    net::TcpServer server_;
};

}  // namespace windtrap::s7
