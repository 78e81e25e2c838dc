#include "windtrap/controller.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace windtrap {

const char* fsm_state_name(FsmState s) {
    switch (s) {
        case FsmState::ParkBrake: return "ParkBrake";
        case FsmState::Startup: return "Startup";
        case FsmState::Generating: return "Generating";
        case FsmState::PitchBrake: return "PitchBrake";
    }
    return "?";
}

bool guard_vwind_ok(double v_wind, const ControllerConfig& cfg) {
    return v_wind >= cfg.cut_in_mps && v_wind < cfg.cut_out_mps;
}

bool guard_rotation_ok(double w_rotor, const ControllerConfig& cfg) {
    return w_rotor >= cfg.w_gen_min && w_rotor <= cfg.w_safe_max;
}

double regulate_pitch(double w_rotor, const ControllerConfig& cfg) {
    double ref = cfg.pitch_reference_fraction * cfg.w_safe_max;
    double demand = cfg.pitch_gain_deg_per_rad_s * (w_rotor - ref);
    return std::clamp(demand, 0.0, cfg.pitch_regulated_max_deg);
}

ControlOutputs outputs_for_state(FsmState s) {
    switch (s) {
        case FsmState::ParkBrake: return {true, true, true, 95.0};
        case FsmState::Startup: return {false, false, true, 1.0};
        case FsmState::Generating: return {false, false, false, 0.0};
        case FsmState::PitchBrake: return {false, true, false, 95.0};
    }
    return {true, true, true, 95.0};
}

std::pair<FsmState, ControlOutputs> fsm_step(FsmState current, bool v_ok, bool r_ok) {
    FsmState next = current;
    switch (current) {
        case FsmState::ParkBrake:
            if (v_ok) next = FsmState::Startup;
            break;
        case FsmState::Startup:
            if (!v_ok) next = FsmState::PitchBrake;        // wind unsafe wins over rotation
            else if (r_ok) next = FsmState::Generating;
            break;
        case FsmState::Generating:
            if (!(v_ok && r_ok)) next = FsmState::PitchBrake;
            break;
        case FsmState::PitchBrake:
            if (!r_ok) next = v_ok ? FsmState::Startup : FsmState::ParkBrake;
            break;
    }
    return {next, outputs_for_state(next)};
}

double scale_analog_in(uint16_t code, double full_scale) {
    return static_cast<double>(code) / 1023.0 * full_scale;
}

// --- PlcController -------------------------------------------------------------

PlcController::PlcController(ControllerConfig cfg, EventLog* log) : cfg_(cfg), log_(log) {
    image_.digital_out = {true, true, true};
    published_.image = image_;
    published_.state = state_;
    published_.outputs = outputs_;
}

void PlcController::submit(ControllerCommand cmd) {
    std::lock_guard lk(cmd_mu_);
    pending_.push_back(std::move(cmd));
}

void PlcController::apply(const ControllerCommand& cmd) {
    if (const auto* aw = std::get_if<AnalogWriteCmd>(&cmd)) {
        if (aw->channel >= image_.analog_in.size() || aw->code > 1023) {
            if (log_)
                log_->emit("controller", "analog_reject",
                           {{"channel", std::to_string(aw->channel)},
                            {"code", std::to_string(aw->code)}},
                           Severity::Warning);
            return;  // previous value retained
        }
        image_.analog_in[aw->channel] = aw->code;
    } else if (const auto* cw = std::get_if<CoilWriteCmd>(&cmd)) {
        if (cw->addr < kCoilCount) image_.coils[cw->addr] = cw->value;
    } else if (const auto* rw = std::get_if<RegisterWriteCmd>(&cmd)) {
        if (rw->addr < kRegisterCount) image_.holding_registers[rw->addr] = rw->value;
    } else if (const auto* mc = std::get_if<CpuModeCmd>(&cmd)) {
        CpuMode old = image_.cpu_mode;
        image_.cpu_mode = mc->mode;
        if (old == CpuMode::Stop && mc->mode == CpuMode::Run) {
            state_ = FsmState::ParkBrake;  // resume in the safe state
            outputs_ = outputs_for_state(state_);
            resume_hold_ = true;  // first scan after resume publishes the reset state
        }
        if (log_)
            log_->emit("controller", "cpu_mode",
                       {{"from", old == CpuMode::Run ? "RUN" : "STOP"},
                        {"to", mc->mode == CpuMode::Run ? "RUN" : "STOP"},
                        {"source", mc->source}});
    } else if (const auto* ps = std::get_if<PlantStatusCmd>(&cmd)) {
        power_kw_ = ps->power_kw;
        fault_bits_ = ps->fault_bits;
    }
}

void PlcController::run_scan_cycle() {
    double v_wind = scale_analog_in(image_.analog_in[0], cfg_.full_scale_wind);
    double w_rotor = scale_analog_in(image_.analog_in[1], cfg_.full_scale_rotor);

    if (image_.cpu_mode == CpuMode::Run) {
        if (image_.coils[kCoilEmergencyStop]) {
            state_ = FsmState::ParkBrake;
            outputs_ = outputs_for_state(state_);
        } else if (resume_hold_) {
            resume_hold_ = false;
            outputs_ = outputs_for_state(state_);
        } else {
            bool v_ok = guard_vwind_ok(v_wind, cfg_);
            bool r_in = state_ == FsmState::PitchBrake ? w_rotor >= cfg_.w_gen_min
                                                       : guard_rotation_ok(w_rotor, cfg_);
            auto [next, outs] = fsm_step(state_, v_ok, r_in);
            state_ = next;
            outputs_ = outs;
        }
        if (state_ == FsmState::Generating) {
            outputs_.pitch_setpoint_deg = regulate_pitch(w_rotor, cfg_);
        }
        if (image_.coils[kCoilOverrideEnable]) {
            image_.digital_out = {image_.coils[0], image_.coils[1], image_.coils[2]};
        } else {
            image_.digital_out = {outputs_.park_brake, outputs_.pitch_brake,
                                  outputs_.generator_trip};
        }
    } else {
        image_.digital_out = {true, true, true};  // STOP engages everything
    }

    image_.holding_registers[0] = static_cast<uint16_t>(state_);
    image_.holding_registers[1] = static_cast<uint16_t>(std::lround(w_rotor * 100.0));
    image_.holding_registers[2] = static_cast<uint16_t>(std::lround(v_wind * 100.0));
    image_.holding_registers[3] =
        static_cast<uint16_t>(std::lround(std::clamp(power_kw_, 0.0, 65535.0)));
    image_.holding_registers[4] = fault_bits_;
}

void PlcController::scan(double sim_time_s) {
    std::deque<ControllerCommand> cmds;
    {
        std::lock_guard lk(cmd_mu_);
        cmds.swap(pending_);
    }
    for (const auto& c : cmds) apply(c);

    FsmState before = state_;
    run_scan_cycle();
    ++scan_count_;
    sim_time_s_ = sim_time_s;
    if (state_ != before && log_) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3f", sim_time_s);
        log_->emit("controller", "fsm_transition",
                   {{"from", fsm_state_name(before)},
                    {"to", fsm_state_name(state_)},
                    {"scan", std::to_string(scan_count_)},
                    {"sim_time", buf}});
    }

    std::lock_guard lk(snap_mu_);
    published_.image = image_;
    published_.state = state_;
    published_.outputs = outputs_;
    published_.scan_count = scan_count_;
    published_.sim_time_s = sim_time_s_;
}

ControllerSnapshot PlcController::snapshot() const {
    std::lock_guard lk(snap_mu_);
    return published_;
}

}  // namespace windtrap
