#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "windtrap/controller.hpp"
#include "windtrap/events.hpp"
#include "windtrap/netutil.hpp"

namespace windtrap::modbus {

enum class ExceptionCode : uint8_t {
    IllegalFunction = 1,
    IllegalDataAddress = 2,
    IllegalDataValue = 3,
};

struct MbapFrame {
    uint16_t transaction_id = 0;
    uint16_t protocol_id = 0;
    uint8_t unit_id = 0;
    std::vector<uint8_t> pdu;
};

/// Stream assembler for MBAP-framed requests. Violations (protocol id != 0,
/// inconsistent length) poison the assembler; the connection must be dropped.
class MbapAssembler {
public:
    /// Appends bytes and extracts every complete frame.
    std::vector<MbapFrame> feed(const uint8_t* data, size_t len);
    bool poisoned() const { return poisoned_; }
    const std::string& error() const { return error_; }
    size_t buffered() const { return buf_.size(); }

private:
    std::vector<uint8_t> buf_;
    bool poisoned_ = false;
    std::string error_;
};

std::vector<uint8_t> build_mbap(uint16_t tid, uint8_t uid, const std::vector<uint8_t>& pdu);
std::vector<uint8_t> build_exception(uint8_t function, ExceptionCode code);

/// Executes one PDU against the latest post-scan snapshot; writes are queued to
/// the controller and logged with the peer address. Never throws on hostile input.
class Engine {
public:
    Engine(PlcController& plc, EventLog* log) : plc_(plc), log_(log) {}

    std::vector<uint8_t> execute_pdu(const std::vector<uint8_t>& pdu, const std::string& peer);
    std::vector<uint8_t> execute(const MbapFrame& frame, const std::string& peer);

private:
    std::vector<uint8_t> read_coils(const std::vector<uint8_t>& pdu,
                                    const ControllerSnapshot& snap);
    std::vector<uint8_t> read_holding(const std::vector<uint8_t>& pdu,
                                      const ControllerSnapshot& snap);
    std::vector<uint8_t> write_single_coil(const std::vector<uint8_t>& pdu,
                                           const std::string& peer);
    std::vector<uint8_t> write_single_register(const std::vector<uint8_t>& pdu,
                                               const std::string& peer);
    std::vector<uint8_t> write_coils(const std::vector<uint8_t>& pdu, const std::string& peer);
    std::vector<uint8_t> write_registers(const std::vector<uint8_t>& pdu,
                                         const std::string& peer);

    PlcController& plc_;
    EventLog* log_;
};

class Server {
public:
    Server(PlcController& plc, EventLog* log) : engine_(plc, log), log_(log) {}

    bool start(const std::string& bind_addr, uint16_t port);
    void stop();
    uint16_t port() const { return server_.port(); }

private:
    void handle(net::Socket conn, net::Endpoint peer);

    Engine engine_;
    EventLog* log_;
    net::TcpServer server_;
};

}  // namespace windtrap::modbus
