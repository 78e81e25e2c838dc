#include "windtrap/plant.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace windtrap {

bool PlantLimits::valid() const {
    return w_rotor_max > 0 && gearbox_speed_max > 0 && power_max_kw > 0 &&
           brake_engage_speed_limit > 0 && gearbox_ratio >= 1.0 && rotor_inertia > 0 &&
           rotor_radius_m > 0 && air_density > 0 && omega_eps > 0 && wind_eps > 0;
}

double power_coefficient(double tip_speed_ratio, double pitch_deg, const PlantLimits& lim) {
    double beta = pitch_deg;
    double li_inv = 1.0 / (tip_speed_ratio + 0.08 * beta) - 0.035 / (beta * beta * beta + 1.0);
    double cp = lim.cp_c1 * (lim.cp_c2 * li_inv - lim.cp_c3 * beta - lim.cp_c4) *
                    std::exp(-lim.cp_c5 * li_inv) +
                lim.cp_c6 * tip_speed_ratio;
    return std::clamp(cp, 0.0, lim.cp_max);
}

double aero_torque(double v_wind, double w_rotor, double pitch_deg, const PlantLimits& lim) {
    // The omega guard floors both the torque division and the tip-speed ratio;
    // without the latter, Cp(0, beta) = 0 pins the rotor at standstill forever.
    double w_eff = std::max(w_rotor, lim.omega_eps);
    double lambda = w_eff * lim.rotor_radius_m / std::max(v_wind, lim.wind_eps);
    double cp = power_coefficient(lambda, pitch_deg, lim);
    double r2 = lim.rotor_radius_m * lim.rotor_radius_m;
    double wind_power = 0.5 * lim.air_density * std::numbers::pi * r2 * v_wind * v_wind * v_wind;
    return wind_power * cp / w_eff;
}

FaultFlags check_faults(const TurbineState& state, const ControlOutputs& controls,
                        const PlantLimits& lim) {
    FaultFlags f;
    f.rotor = state.w_rotor > 1.25 * lim.w_rotor_max;
    f.gearbox = state.w_rotor * lim.gearbox_ratio > 1.25 * lim.gearbox_speed_max;
    f.generator = state.power_kw > 1.25 * lim.power_max_kw;
    f.brake = controls.park_brake && state.w_rotor > lim.brake_engage_speed_limit;
    return f | state.faults;
}

TurbineState step(const TurbineState& state, double v_wind, const ControlOutputs& controls,
                  double dt, const PlantLimits& lim) {
    if (!std::isfinite(v_wind) || !std::isfinite(dt) || !std::isfinite(state.w_rotor) ||
        !std::isfinite(state.pitch_deg) || !std::isfinite(controls.pitch_setpoint_deg)) {
        throw std::invalid_argument("plant step: non-finite input");
    }
    if (dt <= 0.0 || dt > 0.5) {
        throw std::invalid_argument("plant step: dt outside (0, 0.5]");
    }

    TurbineState next = state;

    // Pitch actuator slews toward the setpoint at a bounded rate.
    double sp = std::clamp(controls.pitch_setpoint_deg, 0.0, 95.0);
    double max_move = lim.pitch_rate_deg_s * dt;
    next.pitch_deg += std::clamp(sp - state.pitch_deg, -max_move, max_move);

    next.generator_connected = !controls.generator_trip;

    double t_aero = aero_torque(v_wind, state.w_rotor, next.pitch_deg, lim);

    double gen_k = lim.gen_rated_power_kw * 1000.0 /
                   (lim.gen_rated_speed * lim.gen_rated_speed * lim.gen_rated_speed);
    double t_gen = next.generator_connected ? gen_k * state.w_rotor * state.w_rotor : 0.0;

    double t_brake = 0.0;
    if (controls.park_brake) t_brake += lim.park_brake_torque;
    if (controls.pitch_brake) t_brake += lim.pitch_brake_torque;
    if (state.w_rotor <= 0.0) t_brake = 0.0;  // static brake holds, it does not reverse

    double accel = (t_aero - t_gen - t_brake) / lim.rotor_inertia;
    next.w_rotor = std::max(state.w_rotor + accel * dt, 0.0);

    next.power_kw = next.generator_connected ? gen_k * next.w_rotor * next.w_rotor * next.w_rotor / 1000.0
                                             : 0.0;
    next.sim_time_s = state.sim_time_s + dt;
    next.faults = check_faults(next, controls, lim);
    return next;
}

}  // namespace windtrap
