#include "windtrap/fieldbus.hpp"

#include <algorithm>
#include <cmath>

namespace windtrap {

std::optional<uint16_t> quantize(double value, double full_scale) {
    if (!std::isfinite(value) || full_scale <= 0.0) return std::nullopt;
    double clamped = std::clamp(value, 0.0, full_scale);
    return static_cast<uint16_t>(std::floor(clamped / full_scale * 1023.0 + 0.5));
}

double dac_chain(uint16_t code) {
    // MCP-class 10-bit DAC with a 2.000 V span, then a non-inverting gain of 5.
    return 5.0 * (static_cast<double>(code) / 1023.0 * 2.0);
}

uint16_t adc_read(double volts, double noise_volts) {
    double v = std::clamp(volts + noise_volts, 0.0, 10.0);
    return static_cast<uint16_t>(std::floor(v / 10.0 * 1023.0 + 0.5));
}

std::vector<uint8_t> encode_telemetry(const FieldFrame& frame) {
    return {static_cast<uint8_t>(frame.ch0 >> 8), static_cast<uint8_t>(frame.ch0 & 0xFF),
            static_cast<uint8_t>(frame.ch1 >> 8), static_cast<uint8_t>(frame.ch1 & 0xFF)};
}

std::optional<FieldFrame> decode_telemetry(const std::vector<uint8_t>& bytes) {
    if (bytes.size() != 4) return std::nullopt;
    FieldFrame f;
    f.ch0 = static_cast<uint16_t>(bytes[0] << 8 | bytes[1]);
    f.ch1 = static_cast<uint16_t>(bytes[2] << 8 | bytes[3]);
    if (f.ch0 > 1023 || f.ch1 > 1023) return std::nullopt;  // upper 6 bits must be zero
    return f;
}

std::vector<uint8_t> encode_controls(const ControlFlagsWire& flags) {
    return {flags.byte()};
}

std::optional<ControlFlagsWire> decode_controls(const std::vector<uint8_t>& bytes) {
    if (bytes.size() != 1) return std::nullopt;
    if (bytes[0] & 0xF8) return std::nullopt;  // reserved bits set
    ControlFlagsWire f;
    f.park_brake = bytes[0] & 0x01;
    f.pitch_brake = bytes[0] & 0x02;
    f.generator_trip = bytes[0] & 0x04;
    return f;
}

ControlOutputs controls_from_wire(const ControlFlagsWire& flags, double w_rotor,
                                  const ControllerConfig& cfg) {
    ControlOutputs out;
    out.park_brake = flags.park_brake;
    out.pitch_brake = flags.pitch_brake;
    out.generator_trip = flags.generator_trip;
    if (flags.park_brake || flags.pitch_brake) {
        out.pitch_setpoint_deg = 95.0;
    } else if (flags.generator_trip) {
        out.pitch_setpoint_deg = 1.0;  // startup: maximize torque
    } else {
        out.pitch_setpoint_deg = regulate_pitch(w_rotor, cfg);
    }
    return out;
}

// --- FieldBridge ---------------------------------------------------------------

FieldBridge::FieldBridge(const BridgeConfig& cfg, PlcController& plc, EventLog* log)
    : cfg_(cfg), plc_(plc), log_(log) {
    sock_.bind_local(cfg.telemetry_port);
}

int FieldBridge::poll_telemetry(int timeout_ms, double sim_time_s) {
    int applied = 0;
    int budget = timeout_ms;
    while (true) {
        auto dgram = sock_.recv(budget);
        if (!dgram) break;
        budget = 0;  // drain the rest without waiting
        auto frame = decode_telemetry(*dgram);
        if (!frame) {
            if (log_)
                log_->emit("fieldbus", "malformed_frame",
                           {{"len", std::to_string(dgram->size())}}, Severity::Warning);
            continue;
        }
        // Through the emulated hardware: DAC + amplifier out, analog input back in.
        uint16_t ch0 = adc_read(dac_chain(frame->ch0));
        uint16_t ch1 = adc_read(dac_chain(frame->ch1));
        plc_.submit(AnalogWriteCmd{0, ch0});
        plc_.submit(AnalogWriteCmd{1, ch1});
        last_telemetry_time_ = sim_time_s;
        stale_raised_ = false;
        ++applied;
    }
    return applied;
}

int FieldBridge::poll_outputs() {
    auto snap = plc_.snapshot();
    if (last_sent_ && *last_sent_ == snap.image.digital_out) return 0;
    last_sent_ = snap.image.digital_out;
    ControlFlagsWire flags;
    flags.park_brake = snap.image.digital_out[0];
    flags.pitch_brake = snap.image.digital_out[1];
    flags.generator_trip = snap.image.digital_out[2];
    sock_.send_to(cfg_.peer_host, cfg_.control_port, encode_controls(flags));
    return 1;
}

void FieldBridge::check_stale(double sim_time_s) {
    double window = cfg_.stale_after_periods * cfg_.telemetry_period_s;
    if (!stale_raised_ && sim_time_s - last_telemetry_time_ > window) {
        stale_raised_ = true;
        if (log_)
            log_->emit("fieldbus", "stale_input",
                       {{"sim_time", std::to_string(sim_time_s)},
                        {"last_frame", std::to_string(last_telemetry_time_)}},
                       Severity::Alarm);
    }
}

void FieldBridge::shutdown() { sock_.shutdown(); }

// --- SimFieldEndpoint ------------------------------------------------------------

SimFieldEndpoint::SimFieldEndpoint(const std::string& bridge_host, uint16_t bridge_telemetry_port,
                                   uint16_t control_port)
    : host_(bridge_host), bridge_port_(bridge_telemetry_port) {
    sock_.bind_local(control_port);
}

bool SimFieldEndpoint::send_telemetry(const FieldFrame& frame) {
    return sock_.send_to(host_, bridge_port_, encode_telemetry(frame));
}

std::optional<ControlFlagsWire> SimFieldEndpoint::recv_controls(int timeout_ms) {
    auto dgram = sock_.recv(timeout_ms);
    if (!dgram) return std::nullopt;
    return decode_controls(*dgram);
}

}  // namespace windtrap
