#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "windtrap/events.hpp"

namespace windtrap {

struct WindSample {
    double v_wind = 0.0;   // m/s, >= 0
    double timestamp = 0;  // seconds since scenario start
};

struct GeoPoint {
    double latitude = 0.0;   // [-90, 90]
    double longitude = 0.0;  // [-180, 180]
    bool valid() const {
        return latitude >= -90.0 && latitude <= 90.0 && longitude >= -180.0 &&
               longitude <= 180.0;
    }
};

struct WeatherFetchConfig {
    std::string url;          // e.g. http://host:port/v1/forecast
    std::string field_path;   // dot path into the JSON body, e.g. "current.wind_speed_50m"
    double altitude_m = 50.0;
    double cadence_s = 60.0;  // simulated seconds between queries
    int timeout_ms = 2000;
};

/// Deterministic zero-mean Gaussian stream (Box-Muller over mt19937 so the
/// sequence is pinned by the seed, not by the standard library's distribution).
class GaussianNoise {
public:
    explicit GaussianNoise(uint64_t seed) : rng_(static_cast<uint32_t>(seed)) {}
    double next(double sigma);

private:
    std::mt19937 rng_;
};

/// max(0, base + N(0, sigma)).
double perturb(double base, GaussianNoise& noise, double sigma);

/// Piecewise-linear replay over (timestamp, speed) points; holds the last
/// value past the end. Points must be non-empty and time-ordered.
class WindProfile {
public:
    static std::optional<WindProfile> from_points(std::vector<WindSample> points);
    /// Parses "timestamp_seconds,speed_mps" lines; a header line is skipped.
    static std::optional<WindProfile> load(const std::string& path, std::string* err = nullptr);

    double value_at(double t) const;
    const std::vector<WindSample>& points() const { return points_; }

private:
    std::vector<WindSample> points_;
};

/// One blocking HTTP GET against the configured service. Returns the parsed
/// wind speed or nullopt with a diagnostic.
std::optional<double> fetch_base_wind(const WeatherFetchConfig& cfg, const GeoPoint& point,
                                      std::string* err = nullptr);

struct WindSourceConfig {
    bool live = false;
    WeatherFetchConfig fetch;
    GeoPoint point;
    double sigma_mps = 0.5;
    uint64_t seed = 1;
};

/// Produces the wind stream used by the simulation loop. Replay mode is pure;
/// live mode fetches in a worker thread and never blocks sample().
class WindSource {
public:
    WindSource(const WindSourceConfig& cfg, WindProfile profile, EventLog* log = nullptr);
    ~WindSource();

    /// Non-blocking; called once per simulation step with the current sim time.
    WindSample sample(double sim_time_s);

    void stop();

private:
    double base_value(double sim_time_s);

    WindSourceConfig cfg_;
    WindProfile profile_;
    EventLog* log_;
    GaussianNoise noise_;

    // live-mode state
    std::mutex mu_;
    std::optional<double> cached_base_;
    double last_fetch_request_t_ = -1.0e18;
    std::atomic<bool> fetch_in_flight_{false};
    std::atomic<bool> stopping_{false};
    std::thread worker_;
};

}  // namespace windtrap
