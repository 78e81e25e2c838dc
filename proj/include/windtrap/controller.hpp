#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <mutex>
#include <string>
#include <utility>
#include <variant>

#include "windtrap/events.hpp"
#include "windtrap/plant.hpp"

namespace windtrap {

enum class CpuMode : uint8_t { Run = 0, Stop = 1 };

/// Modbus-visible state encoding. Fixed: HR0 mirrors these values.
enum class FsmState : uint16_t { ParkBrake = 0, Startup = 1, Generating = 2, PitchBrake = 3 };

const char* fsm_state_name(FsmState s);

/// The controller's memory. HR0..HR4 are owned by the scan cycle:
///   HR0 state, HR1 round(wRotor*100), HR2 round(vWind*100), HR3 round(powerKw),
///   HR4 fault bits (bit0 rotor, bit1 gearbox, bit2 generator, bit3 brake).
/// Coils: 0..2 manual output override bits, 3 emergency stop, 4 override enable.
struct ProcessImage {
    std::array<uint16_t, 2> analog_in{};                    // 10-bit codes; ch0 vWind, ch1 wRotor
    std::array<bool, 3> digital_out{true, true, true};      // parkBrake, pitchBrake, generatorTrip
    std::array<uint16_t, 16> holding_registers{};
    std::array<bool, 16> coils{};
    CpuMode cpu_mode = CpuMode::Run;
};

inline constexpr uint16_t kRegisterCount = 16;
inline constexpr uint16_t kCoilCount = 16;
inline constexpr uint16_t kCoilEmergencyStop = 3;
inline constexpr uint16_t kCoilOverrideEnable = 4;

struct ControllerConfig {
    double cut_in_mps = 3.0;
    double cut_out_mps = 25.0;
    double w_gen_min = 1.0;       // rad/s
    double w_safe_max = 2.0;      // rad/s
    double scan_period_ms = 100.0;
    double full_scale_wind = 30.0;   // m/s at code 1023
    double full_scale_rotor = 4.0;   // rad/s at code 1023

    // Pitch regulation in Generating: proportional toward a reference speed.
    double pitch_gain_deg_per_rad_s = 40.0;
    double pitch_reference_fraction = 0.9;  // of w_safe_max
    double pitch_regulated_max_deg = 30.0;

    bool valid() const {
        return cut_in_mps > 0 && cut_in_mps < cut_out_mps && w_gen_min > 0 &&
               w_gen_min < w_safe_max && scan_period_ms > 0 &&
               full_scale_wind >= cut_out_mps && full_scale_rotor >= 1.5 * w_safe_max;
    }
};

// --- Pure control logic ------------------------------------------------------

/// Wind inside the operational band: cut-in inclusive, cut-out exclusive.
bool guard_vwind_ok(double v_wind, const ControllerConfig& cfg);

/// Rotation sufficient for generation and within the safe band (both inclusive).
bool guard_rotation_ok(double w_rotor, const ControllerConfig& cfg);

/// Proportional pitch demand used while Generating.
double regulate_pitch(double w_rotor, const ControllerConfig& cfg);

/// One Moore-machine transition. `rotation_ok` carries guard_rotation_ok for
/// ParkBrake/Startup/Generating; for PitchBrake the caller passes "rotor has
/// not yet slowed below w_gen_min", so the state is held until deceleration
/// completes and only then wind safety picks Startup vs ParkBrake.
/// Outputs are a function of the resulting state only.
std::pair<FsmState, ControlOutputs> fsm_step(FsmState current, bool vwind_ok, bool rotation_ok);

/// Static Moore output table.
ControlOutputs outputs_for_state(FsmState s);

/// code/1023 * full_scale. Callers must reject codes > 1023 beforehand.
double scale_analog_in(uint16_t code, double full_scale);

// --- Runtime -----------------------------------------------------------------

struct AnalogWriteCmd { uint8_t channel; uint16_t code; };
struct CoilWriteCmd { uint16_t addr; bool value; };
struct RegisterWriteCmd { uint16_t addr; uint16_t value; };
struct CpuModeCmd { CpuMode mode; std::string source; };
struct PlantStatusCmd { double power_kw; uint8_t fault_bits; };
using ControllerCommand =
    std::variant<AnalogWriteCmd, CoilWriteCmd, RegisterWriteCmd, CpuModeCmd, PlantStatusCmd>;

struct ControllerSnapshot {
    ProcessImage image;
    FsmState state = FsmState::ParkBrake;
    ControlOutputs outputs;
    uint64_t scan_count = 0;
    double sim_time_s = 0.0;
};

/// The scan loop is the single writer of the process image. Protocol servers
/// submit writes through the command queue; commands are applied between scans
/// and reads see consistent post-scan snapshots.
class PlcController {
public:
    explicit PlcController(ControllerConfig cfg, EventLog* log = nullptr);

    void submit(ControllerCommand cmd);
    void scan(double sim_time_s);

    ControllerSnapshot snapshot() const;
    const ControllerConfig& config() const { return cfg_; }

private:
    void apply(const ControllerCommand& cmd);
    void run_scan_cycle();

    ControllerConfig cfg_;
    EventLog* log_;

    mutable std::mutex cmd_mu_;
    std::deque<ControllerCommand> pending_;

    // Scan-owned state
    ProcessImage image_;
    FsmState state_ = FsmState::ParkBrake;
    ControlOutputs outputs_ = outputs_for_state(FsmState::ParkBrake);
    double power_kw_ = 0.0;
    uint8_t fault_bits_ = 0;
    bool resume_hold_ = false;
    uint64_t scan_count_ = 0;
    double sim_time_s_ = 0.0;

    mutable std::mutex snap_mu_;
    ControllerSnapshot published_;
};

}  // namespace windtrap
