#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "windtrap/controller.hpp"
#include "windtrap/plant.hpp"
#include "windtrap/s7lite.hpp"
#include "windtrap/windsource.hpp"

namespace windtrap {

struct RunConfig {
    double duration_s = 600.0;
    double time_scale = 1.0;  // simulated seconds per wall second
    uint64_t seed = 1;
    std::string bind_address = "0.0.0.0";
    std::string out_dir = "run";
    double plant_dt_s = 0.05;
};

struct PortConfig {
    // internal decoy services
    uint16_t modbus_port = 10502;
    uint16_t s7_port = 10102;
    uint16_t web_port = 10080;
    // externally exposed through the proxy
    uint16_t external_modbus_port = 502;
    uint16_t external_s7_port = 102;
    uint16_t external_web_port = 80;
    // field bus
    uint16_t telemetry_port = 46001;
    uint16_t control_port = 46002;
};

struct WindConfig {
    std::string mode = "replay";  // replay | live
    std::string profile_path;
    double sigma_mps = 0.5;
    GeoPoint point{39.3, 16.25};
    WeatherFetchConfig fetch;
};

struct ScenarioConfig {
    RunConfig run;
    PlantLimits plant;
    ControllerConfig controller;
    WindConfig wind;
    PortConfig ports;
    s7::DeviceIdentity identity;
    uint16_t poke_window_start = 5;
    uint16_t poke_window_end = 15;
};

struct ConfigError {
    std::string key;
    std::string message;
};

/// Parses and fully validates a scenario file. On failure, `errors` lists every
/// violation found (unknown keys, invariant breaches, port conflicts).
std::optional<ScenarioConfig> load_config(const std::string& path,
                                          std::vector<ConfigError>& errors);
std::optional<ScenarioConfig> parse_config_text(const std::string& text,
                                                std::vector<ConfigError>& errors);

std::string config_errors_to_string(const std::vector<ConfigError>& errors);

}  // namespace windtrap
