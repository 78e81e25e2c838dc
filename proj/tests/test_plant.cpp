#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "windtrap/plant.hpp"

using namespace windtrap;

namespace {

// Reference drivetrain integrator, written out independently of plant::step so
// the coarse integration can be checked against a 10x finer one.
TurbineState reference_integrate(TurbineState s, double v_wind, const ControlOutputs& controls,
                                 double dt, long steps, const PlantLimits& lim) {
    double gen_k = lim.gen_rated_power_kw * 1000.0 /
                   (lim.gen_rated_speed * lim.gen_rated_speed * lim.gen_rated_speed);
    for (long i = 0; i < steps; ++i) {
        double sp = std::clamp(controls.pitch_setpoint_deg, 0.0, 95.0);
        double dp = std::clamp(sp - s.pitch_deg, -lim.pitch_rate_deg_s * dt,
                               lim.pitch_rate_deg_s * dt);
        s.pitch_deg += dp;
        double t_aero = aero_torque(v_wind, s.w_rotor, s.pitch_deg, lim);
        double t_gen = controls.generator_trip ? 0.0 : gen_k * s.w_rotor * s.w_rotor;
        double t_brake = 0.0;
        if (controls.park_brake) t_brake += lim.park_brake_torque;
        if (controls.pitch_brake) t_brake += lim.pitch_brake_torque;
        if (s.w_rotor <= 0.0) t_brake = 0.0;
        s.w_rotor = std::max(s.w_rotor + (t_aero - t_gen - t_brake) / lim.rotor_inertia * dt, 0.0);
    }
    return s;
}

}  // namespace

TEST_CASE("aero torque: no wind produces no torque") {
    PlantLimits lim;
    CHECK(aero_torque(0.0, 1.0, 0.0, lim) == doctest::Approx(0.0));
}

TEST_CASE("aero torque: feathered blade produces negligible torque") {
    PlantLimits lim;
    double t = aero_torque(10.0, 0.0, 95.0, lim);
    CHECK(t >= 0.0);
    CHECK(t < 1.0);  // N*m, effectively zero against a 3e6 kg*m^2 rotor
}

TEST_CASE("aero torque matches the independently evaluated Cp polynomial") {
    PlantLimits lim;
    // frozen from a scripted numeric evaluation of
    // 0.5*rho*pi*R^2*v^3*Cp(lambda,beta)/w with lambda = 1.2*38/12 = 3.8
    CHECK(power_coefficient(3.8, 1.0, lim) == doctest::Approx(0.10075656632641698).epsilon(1e-9));
    CHECK(aero_torque(12.0, 1.2, 1.0, lim) == doctest::Approx(403142.89469401335).epsilon(1e-9));
}

TEST_CASE("aero torque stays finite over a parameter grid") {
    PlantLimits lim;
    for (double v = 0.0; v <= 40.0; v += 2.5) {
        for (double w = 0.0; w <= 5.0; w += 0.25) {
            for (double beta = 0.0; beta <= 95.0; beta += 9.5) {
                double t = aero_torque(v, w, beta, lim);
                CHECK(std::isfinite(t));
                CHECK(t >= 0.0);
            }
        }
    }
}

TEST_CASE("step: rest with brakes engaged is a fixed point") {
    PlantLimits lim;
    TurbineState s;
    s.pitch_deg = 95.0;
    ControlOutputs brakes;  // defaults: all engaged, pitch 95
    TurbineState next = step(s, 0.0, brakes, 0.05, lim);
    CHECK(next.w_rotor == 0.0);
    CHECK(next.power_kw == 0.0);
    CHECK(next.pitch_deg == 95.0);
    CHECK_FALSE(next.faults.any());
}

TEST_CASE("step: pure braking strictly decreases speed") {
    PlantLimits lim;
    TurbineState s;
    s.w_rotor = 1.0;
    s.pitch_deg = 95.0;
    ControlOutputs brakes{true, true, true, 95.0};
    TurbineState next = step(s, 0.0, brakes, 0.05, lim);
    CHECK(next.w_rotor < s.w_rotor);
}

TEST_CASE("step rejects non-finite inputs and bad dt") {
    PlantLimits lim;
    TurbineState s;
    ControlOutputs c;
    CHECK_THROWS(step(s, std::nan(""), c, 0.05, lim));
    CHECK_THROWS(step(s, 1.0, c, 0.0, lim));
    CHECK_THROWS(step(s, 1.0, c, 0.6, lim));
}

TEST_CASE("step: generator disconnect zeroes power") {
    PlantLimits lim;
    TurbineState s;
    s.w_rotor = 1.5;
    s.pitch_deg = 1.0;
    ControlOutputs gen_on{false, false, false, 1.0};
    TurbineState a = step(s, 12.0, gen_on, 0.05, lim);
    CHECK(a.generator_connected);
    CHECK(a.power_kw > 0.0);
    ControlOutputs gen_off{false, false, true, 1.0};
    TurbineState b = step(s, 12.0, gen_off, 0.05, lim);
    CHECK_FALSE(b.generator_connected);
    CHECK(b.power_kw == 0.0);
}

TEST_CASE("600 s trajectory converges and tracks a 10x finer reference within 2%") {
    PlantLimits lim;
    TurbineState coarse;
    coarse.pitch_deg = 1.0;
    ControlOutputs running{false, false, false, 1.0};  // brakes off, generator in

    double dt = 0.05;
    long steps = static_cast<long>(600.0 / dt);
    for (long i = 0; i < steps; ++i) coarse = step(coarse, 12.0, running, dt, lim);

    CHECK(coarse.w_rotor > lim.w_rotor_max * 0.5);        // actually spun up
    CHECK(coarse.w_rotor < 1.25 * lim.w_rotor_max);       // below the fault threshold

    TurbineState fine;
    fine.pitch_deg = 1.0;
    fine = reference_integrate(fine, 12.0, running, dt / 10.0, steps * 10, lim);
    CHECK(coarse.w_rotor ==
          doctest::Approx(fine.w_rotor).epsilon(0.02));  // <= 2% relative difference

    // steady: another 10 s barely moves it
    TurbineState later = coarse;
    for (int i = 0; i < 200; ++i) later = step(later, 12.0, running, dt, lim);
    CHECK(later.w_rotor == doctest::Approx(coarse.w_rotor).epsilon(1e-3));
}

TEST_CASE("check_faults: thresholds are strict at 125% of each maximum") {
    PlantLimits lim;
    ControlOutputs c{false, false, false, 1.0};
    TurbineState s;

    s.w_rotor = 1.25 * lim.w_rotor_max;  // boundary equality: not a fault
    CHECK_FALSE(check_faults(s, c, lim).rotor);
    s.w_rotor = 1.26 * lim.w_rotor_max;
    CHECK(check_faults(s, c, lim).rotor);

    s = TurbineState{};
    s.w_rotor = 1.25 * lim.gearbox_speed_max / lim.gearbox_ratio;
    CHECK_FALSE(check_faults(s, c, lim).gearbox);
    s.w_rotor = 1.26 * lim.gearbox_speed_max / lim.gearbox_ratio;
    CHECK(check_faults(s, c, lim).gearbox);

    s = TurbineState{};
    s.power_kw = 1.25 * lim.power_max_kw;
    CHECK_FALSE(check_faults(s, c, lim).generator);
    s.power_kw = 1.25 * lim.power_max_kw + 0.001;
    CHECK(check_faults(s, c, lim).generator);
}

TEST_CASE("check_faults: park brake above the engage limit faults") {
    PlantLimits lim;
    TurbineState s;
    s.w_rotor = 1.5 * lim.brake_engage_speed_limit;
    ControlOutputs parked{true, true, true, 95.0};
    CHECK(check_faults(s, parked, lim).brake);
    s.w_rotor = 0.9 * lim.brake_engage_speed_limit;
    CHECK_FALSE(check_faults(s, parked, lim).brake);
    // releasing the brake never brake-faults, no matter the speed
    s.w_rotor = 10.0;
    ControlOutputs released{false, false, true, 1.0};
    CHECK_FALSE(check_faults(s, released, lim).brake);
}

TEST_CASE("fault flags latch across arbitrary input sequences") {
    PlantLimits lim;
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> wind(0.0, 35.0);
    std::uniform_int_distribution<int> bit(0, 1);

    TurbineState s;
    uint8_t seen = 0;
    for (int i = 0; i < 2000; ++i) {
        ControlOutputs c;
        c.park_brake = bit(rng);
        c.pitch_brake = bit(rng);
        c.generator_trip = bit(rng);
        c.pitch_setpoint_deg = bit(rng) ? 1.0 : 95.0;
        s = step(s, wind(rng), c, 0.05, lim);
        uint8_t bits = s.faults.bits();
        CHECK((bits & seen) == seen);  // monotone: no flag ever clears
        seen = bits;
    }
}

TEST_CASE("energy sanity: no wind and no generator means omega never increases") {
    PlantLimits lim;
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> bit(0, 1);
    TurbineState s;
    s.w_rotor = 2.0;
    s.pitch_deg = 10.0;
    for (int i = 0; i < 500; ++i) {
        ControlOutputs c;
        c.park_brake = bit(rng);
        c.pitch_brake = bit(rng);
        c.generator_trip = true;
        c.pitch_setpoint_deg = bit(rng) ? 1.0 : 95.0;
        double before = s.w_rotor;
        s = step(s, 0.0, c, 0.05, lim);
        CHECK(s.w_rotor <= before);
    }
}

TEST_CASE("determinism: identical inputs give bit-identical trajectories") {
    PlantLimits lim;
    auto run = [&] {
        TurbineState s;
        s.pitch_deg = 95.0;
        ControlOutputs c{false, false, true, 1.0};
        std::vector<double> ws;
        for (int i = 0; i < 2000; ++i) {
            s = step(s, 11.0, c, 0.05, lim);
            ws.push_back(s.w_rotor);
        }
        return ws;
    };
    auto a = run();
    auto b = run();
    CHECK(a == b);  // exact, not approximate
}

TEST_CASE("strict threshold: rotor fault flips exactly once across the sweep") {
    PlantLimits lim;
    ControlOutputs c{false, false, true, 1.0};
    int flips = 0;
    bool prev = false;
    for (double w = 1.2 * lim.w_rotor_max; w <= 1.3 * lim.w_rotor_max; w += 1e-4) {
        TurbineState s;
        s.w_rotor = w;
        bool f = check_faults(s, c, lim).rotor;
        if (f != prev) {
            ++flips;
            CHECK(w > 1.25 * lim.w_rotor_max);  // first strictly-greater sample
        }
        prev = f;
    }
    CHECK(flips == 1);
}
