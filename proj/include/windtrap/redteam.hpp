#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "windtrap/modbus.hpp"
#include "windtrap/s7lite.hpp"

namespace windtrap::red {

/// Result of one scripted attack. Success is judged only from responses on the
/// wire and the honeynet's published artifacts, never from module internals.
struct AttackOutcome {
    std::string kind;
    bool success = false;
    std::vector<std::pair<std::string, std::string>> observed;
    std::vector<std::vector<uint8_t>> requests_sent;  // raw bytes, as they left the client
    std::string error;

    std::string to_line() const;
};

/// Minimal Modbus TCP client that records every raw request it sends.
class ModbusClient {
public:
    bool connect(const std::string& host, uint16_t port, int timeout_ms = 3000);
    bool connected() const { return sock_.valid(); }

    /// Sends one PDU, returns the response PDU (checked against tid/uid).
    std::optional<std::vector<uint8_t>> transact(const std::vector<uint8_t>& pdu,
                                                 int timeout_ms = 3000);

    std::optional<std::vector<uint16_t>> read_holding(uint16_t start, uint16_t qty);
    std::optional<std::vector<uint8_t>> write_single_coil(uint16_t addr, bool on);
    std::optional<std::vector<uint8_t>> write_coils(uint16_t start,
                                                    const std::vector<bool>& bits);

    const std::vector<std::vector<uint8_t>>& sent() const { return sent_; }

private:
    net::Socket sock_;
    uint16_t next_tid_ = 1;
    std::vector<std::vector<uint8_t>> sent_;
};

/// CPU stop through the web panel; process impact verified over Modbus.
AttackOutcome attack_stop_cpu(const std::string& host, uint16_t web_port, uint16_t modbus_port,
                              int settle_ms = 4000);

/// Forged Write Multiple Coils; verifies the echo, then watches HR0 for the
/// resulting state change.
AttackOutcome attack_write_coils(const std::string& host, uint16_t modbus_port, uint16_t start,
                                 const std::vector<bool>& bits, int settle_ms = 4000);

/// COTP connect + communication setup + identity reads.
struct FingerprintResult {
    bool success = false;
    s7::DeviceIdentity identity;
    std::string error;
    std::vector<std::vector<uint8_t>> requests_sent;
};
FingerprintResult fingerprint_s7(const std::string& host, uint16_t s7_port);

/// FC3 sweep across the address space, classifying registers by response type.
AttackOutcome attack_read_recon(const std::string& host, uint16_t modbus_port,
                                uint16_t sweep_end = 50);

}  // namespace windtrap::red
