#include "windtrap/windsource.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

namespace windtrap {

double GaussianNoise::next(double sigma) {
    if (sigma == 0.0) return 0.0;
    // Box-Muller, one draw per call; u1 strictly positive.
    double u1 = (static_cast<double>(rng_()) + 1.0) / (static_cast<double>(std::mt19937::max()) + 2.0);
    double u2 = static_cast<double>(rng_()) / (static_cast<double>(std::mt19937::max()) + 1.0);
    return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double perturb(double base, GaussianNoise& noise, double sigma) {
    return std::max(0.0, base + noise.next(sigma));
}

std::optional<WindProfile> WindProfile::from_points(std::vector<WindSample> points) {
    if (points.empty()) return std::nullopt;
    for (size_t i = 0; i < points.size(); ++i) {
        if (!std::isfinite(points[i].v_wind) || points[i].v_wind < 0.0) return std::nullopt;
        if (i > 0 && points[i].timestamp < points[i - 1].timestamp) return std::nullopt;
    }
    WindProfile p;
    p.points_ = std::move(points);
    return p;
}

std::optional<WindProfile> WindProfile::load(const std::string& path, std::string* err) {
    std::ifstream in(path);
    if (!in.is_open()) {
        if (err) *err = "cannot open wind profile: " + path;
        return std::nullopt;
    }
    std::vector<WindSample> points;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b)) continue;
        try {
            points.push_back({std::stod(b), std::stod(a)});
        } catch (...) {
            if (lineno == 1) continue;  // header line
            if (err) *err = "bad profile line " + std::to_string(lineno) + ": " + line;
            return std::nullopt;
        }
    }
    auto p = from_points(std::move(points));
    if (!p && err && err->empty()) *err = "wind profile is empty or unordered: " + path;
    return p;
}

double WindProfile::value_at(double t) const {
    if (points_.empty()) return 0.0;
    if (t <= points_.front().timestamp) return points_.front().v_wind;
    if (t >= points_.back().timestamp) return points_.back().v_wind;
    auto it = std::upper_bound(points_.begin(), points_.end(), t,
                               [](double v, const WindSample& s) { return v < s.timestamp; });
    const WindSample& hi = *it;
    const WindSample& lo = *(it - 1);
    double span = hi.timestamp - lo.timestamp;
    if (span <= 0.0) return hi.v_wind;
    double f = (t - lo.timestamp) / span;
    return lo.v_wind + f * (hi.v_wind - lo.v_wind);
}

namespace {

// Walks a dot-separated path through a JSON document; numeric tokens index arrays.
std::optional<double> json_path_number(const nlohmann::json& doc, const std::string& path) {
    const nlohmann::json* cur = &doc;
    std::istringstream ss(path);
    std::string token;
    while (std::getline(ss, token, '.')) {
        if (token.empty()) return std::nullopt;
        if (cur->is_array()) {
            size_t idx = 0;
            try {
                idx = std::stoul(token);
            } catch (...) {
                return std::nullopt;
            }
            if (idx >= cur->size()) return std::nullopt;
            cur = &(*cur)[idx];
        } else if (cur->is_object()) {
            auto it = cur->find(token);
            if (it == cur->end()) return std::nullopt;
            cur = &*it;
        } else {
            return std::nullopt;
        }
    }
    if (cur->is_number()) return cur->get<double>();
    if (cur->is_string()) {
        try {
            return std::stod(cur->get<std::string>());
        } catch (...) {
            return std::nullopt;
        }
    }
    return std::nullopt;
}

struct UrlParts {
    std::string base;  // scheme://host:port
    std::string path;
};

std::optional<UrlParts> split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) return std::nullopt;
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return UrlParts{url, "/"};
    return UrlParts{url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::optional<double> fetch_base_wind(const WeatherFetchConfig& cfg, const GeoPoint& point,
                                      std::string* err) {
    if (!point.valid()) {
        if (err) *err = "invalid coordinates";
        return std::nullopt;
    }
    auto parts = split_url(cfg.url);
    if (!parts) {
        if (err) *err = "bad weather endpoint url: " + cfg.url;
        return std::nullopt;
    }
    httplib::Client cli(parts->base);
    cli.set_connection_timeout(0, cfg.timeout_ms * 1000);
    cli.set_read_timeout(0, cfg.timeout_ms * 1000);

    httplib::Params params{{"latitude", std::to_string(point.latitude)},
                           {"longitude", std::to_string(point.longitude)},
                           {"altitude", std::to_string(cfg.altitude_m)}};
    auto res = cli.Get(parts->path, params, httplib::Headers{});
    if (!res || res->status != 200) {
        if (err) *err = "weather fetch failed: " + (res ? std::to_string(res->status) : "no response");
        return std::nullopt;
    }
    nlohmann::json doc = nlohmann::json::parse(res->body, nullptr, false);
    if (doc.is_discarded()) {
        if (err) *err = "weather response is not valid JSON";
        return std::nullopt;
    }
    auto value = json_path_number(doc, cfg.field_path);
    if (!value || !std::isfinite(*value) || *value < 0.0) {
        if (err) *err = "field path missing or not a wind speed: " + cfg.field_path;
        return std::nullopt;
    }
    return *value;
}

// --- WindSource ------------------------------------------------------------------

WindSource::WindSource(const WindSourceConfig& cfg, WindProfile profile, EventLog* log)
    : cfg_(cfg), profile_(std::move(profile)), log_(log), noise_(cfg.seed) {}

WindSource::~WindSource() { stop(); }

void WindSource::stop() {
    stopping_.store(true);
    if (worker_.joinable()) worker_.join();
}

double WindSource::base_value(double sim_time_s) {
    if (!cfg_.live) return profile_.value_at(sim_time_s);

    std::optional<double> cached;
    {
        std::lock_guard lk(mu_);
        cached = cached_base_;
        bool due = sim_time_s - last_fetch_request_t_ >= cfg_.fetch.cadence_s;
        if (due && !fetch_in_flight_.load() && !stopping_.load()) {
            last_fetch_request_t_ = sim_time_s;
            fetch_in_flight_.store(true);
            if (worker_.joinable()) worker_.join();
            worker_ = std::thread([this] {
                std::string err;
                auto v = fetch_base_wind(cfg_.fetch, cfg_.point, &err);
                std::lock_guard lk2(mu_);
                if (v) {
                    cached_base_ = *v;
                } else if (log_) {
                    log_->emit("windsource", "degraded_source", {{"error", err}},
                               Severity::Warning);
                }
                fetch_in_flight_.store(false);
            });
        }
    }
    if (cached) return *cached;
    return profile_.value_at(sim_time_s);  // no cache yet: replay fallback
}

WindSample WindSource::sample(double sim_time_s) {
    double base = base_value(sim_time_s);
    return WindSample{perturb(base, noise_, cfg_.sigma_mps), sim_time_s};
}

}  // namespace windtrap
