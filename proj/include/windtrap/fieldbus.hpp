#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "windtrap/controller.hpp"
#include "windtrap/events.hpp"
#include "windtrap/netutil.hpp"
#include "windtrap/plant.hpp"

namespace windtrap {

/// Two 10-bit telemetry channels crossing the emulated field bus.
struct FieldFrame {
    uint16_t ch0 = 0;  // vWind code
    uint16_t ch1 = 0;  // wRotor code
};

/// Control-flag byte: bit0 parkBrake, bit1 pitchBrake, bit2 generatorTrip.
/// Bits 3..7 are reserved and must be zero on the wire.
struct ControlFlagsWire {
    bool park_brake = false;
    bool pitch_brake = false;
    bool generator_trip = false;

    uint8_t byte() const {
        return static_cast<uint8_t>((park_brake ? 1 : 0) | (pitch_brake ? 2 : 0) |
                                    (generator_trip ? 4 : 0));
    }
};

/// round-half-up(clamp(value,0,fullScale)/fullScale * 1023). Non-finite input
/// is reported via nullopt.
std::optional<uint16_t> quantize(double value, double full_scale);

/// 10-bit DAC (2.000 V reference) into a gain-5 amplifier: 0..10 V out.
double dac_chain(uint16_t code);

/// 0-10 V analog input back to a 10-bit code, optional additive noise volts.
uint16_t adc_read(double volts, double noise_volts = 0.0);

/// 4 bytes: ch0 and ch1 as big-endian 16-bit words (upper 6 bits zero).
std::vector<uint8_t> encode_telemetry(const FieldFrame& frame);
std::optional<FieldFrame> decode_telemetry(const std::vector<uint8_t>& bytes);

std::vector<uint8_t> encode_controls(const ControlFlagsWire& flags);
/// Length must be 1 and reserved bits zero; otherwise the datagram is dropped.
std::optional<ControlFlagsWire> decode_controls(const std::vector<uint8_t>& bytes);

/// Plant-side reconstruction of the actuator demand from the three wire flags.
/// Brake states feather; startup holds fine pitch; generating regulates.
ControlOutputs controls_from_wire(const ControlFlagsWire& flags, double w_rotor,
                                  const ControllerConfig& cfg);

struct BridgeConfig {
    uint16_t telemetry_port = 46001;  // bridge listens here for plant frames
    uint16_t control_port = 46002;    // plant side listens here for control bytes
    std::string peer_host = "127.0.0.1";
    double telemetry_period_s = 0.1;
    double stale_after_periods = 3.0;
};

/// The interface-board loop: telemetry datagrams are pushed through the
/// DAC/amplifier/analog-input chain into the controller's process image, and
/// controller output edges are sent back as one control datagram each.
class FieldBridge {
public:
    FieldBridge(const BridgeConfig& cfg, PlcController& plc, EventLog* log);

    bool ok() const { return sock_.valid(); }
    uint16_t telemetry_port() const { return sock_.port(); }

    /// Drains queued telemetry datagrams; returns number applied.
    int poll_telemetry(int timeout_ms, double sim_time_s);
    /// Sends one control datagram if the controller outputs changed; returns count sent.
    int poll_outputs();
    /// Raises a stale-input alarm once when no telemetry arrived for the window.
    void check_stale(double sim_time_s);

    void shutdown();

private:
    BridgeConfig cfg_;
    PlcController& plc_;
    EventLog* log_;
    net::UdpSocket sock_;
    std::optional<std::array<bool, 3>> last_sent_;
    double last_telemetry_time_ = 0.0;
    bool stale_raised_ = false;
};

/// Simulation-side endpoint: sends telemetry frames, receives control bytes.
class SimFieldEndpoint {
public:
    SimFieldEndpoint(const std::string& bridge_host, uint16_t bridge_telemetry_port,
                     uint16_t control_port);

    bool ok() const { return sock_.valid(); }
    uint16_t control_port() const { return sock_.port(); }
    void set_bridge_telemetry_port(uint16_t p) { bridge_port_ = p; }

    bool send_telemetry(const FieldFrame& frame);
    std::optional<ControlFlagsWire> recv_controls(int timeout_ms);

private:
    std::string host_;
    uint16_t bridge_port_;
    net::UdpSocket sock_;
};

}  // namespace windtrap
