#pragma once

#include <cstdint>

namespace windtrap {

struct FaultFlags {
    bool rotor = false;
    bool gearbox = false;
    bool generator = false;
    bool brake = false;

    uint8_t bits() const {
        return static_cast<uint8_t>((rotor ? 1 : 0) | (gearbox ? 2 : 0) |
                                    (generator ? 4 : 0) | (brake ? 8 : 0));
    }
    bool any() const { return rotor || gearbox || generator || brake; }
    FaultFlags operator|(const FaultFlags& o) const {
        return FaultFlags{rotor || o.rotor, gearbox || o.gearbox,
                          generator || o.generator, brake || o.brake};
    }
};

/// Moore-machine output triplet plus the pitch demand driving the blade actuator.
struct ControlOutputs {
    bool park_brake = true;
    bool pitch_brake = true;
    bool generator_trip = true;
    double pitch_setpoint_deg = 95.0;
};

struct TurbineState {
    double w_rotor = 0.0;       // rad/s, >= 0
    double pitch_deg = 95.0;    // blade pitch, 0..95
    bool generator_connected = false;
    double power_kw = 0.0;      // electrical output, 0 when disconnected
    FaultFlags faults;
    double sim_time_s = 0.0;
};

/// Operating maxima and physical constants. Faults latch strictly above 1.25x
/// of each configured maximum.
struct PlantLimits {
    double w_rotor_max = 2.4;            // rad/s
    double gearbox_speed_max = 240.0;    // rad/s on the high-speed shaft
    double power_max_kw = 1600.0;
    double brake_engage_speed_limit = 1.2;  // rad/s; park brake above this faults
    double gearbox_ratio = 90.0;
    double rotor_inertia = 3.0e6;        // kg*m^2
    double rotor_radius_m = 38.0;
    double air_density = 1.225;          // kg/m^3

    // Drivetrain actuation
    double park_brake_torque = 1.2e6;    // N*m
    double pitch_brake_torque = 2.0e5;   // N*m
    double pitch_rate_deg_s = 8.0;

    // Generator: torque k*w^2 sized so rated power is reached at rated speed
    double gen_rated_power_kw = 1500.0;
    double gen_rated_speed = 2.0;        // rad/s

    // Performance-coefficient polynomial Cp(lambda, beta)
    double cp_c1 = 0.5176, cp_c2 = 116.0, cp_c3 = 0.4, cp_c4 = 5.0, cp_c5 = 21.0,
           cp_c6 = 0.0068;
    double cp_max = 0.593;               // Betz bound

    // Low-signal guards for the torque evaluation
    double omega_eps = 0.05;             // rad/s
    double wind_eps = 0.1;               // m/s

    bool valid() const;
};

/// Power coefficient of the rotor, clamped to [0, cp_max].
double power_coefficient(double tip_speed_ratio, double pitch_deg, const PlantLimits& limits);

/// Aerodynamic torque on the rotor shaft. Zero wind gives zero torque; a fully
/// feathered blade gives ~0. Low-speed guards keep the result finite and give
/// the rotor a physical breakaway torque at standstill.
double aero_torque(double v_wind, double w_rotor, double pitch_deg, const PlantLimits& limits);

/// Latching fault evaluation: each component faults strictly above 1.25x its
/// configured maximum; the park brake faults when engaged above the speed limit.
FaultFlags check_faults(const TurbineState& state, const ControlOutputs& controls,
                        const PlantLimits& limits);

/// One explicit-Euler step of the single-mass drivetrain. dt in (0, 0.5].
/// Throws std::invalid_argument on non-finite inputs.
TurbineState step(const TurbineState& state, double v_wind, const ControlOutputs& controls,
                  double dt, const PlantLimits& limits);

}  // namespace windtrap
