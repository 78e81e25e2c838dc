#include "windtrap/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace windtrap {

namespace {

using nlohmann::json;

class Reader {
public:
    Reader(const json& doc, std::vector<ConfigError>& errors) : errors_(errors) {
        collect_known(doc, "");
    }

    void fail(const std::string& key, const std::string& msg) { errors_.push_back({key, msg}); }

    template <typename T>
    void get(const json& obj, const std::string& prefix, const std::string& key, T& out) {
        known_.insert(join(prefix, key));
        auto it = obj.find(key);
        if (it == obj.end()) return;
        try {
            out = it->get<T>();
        } catch (const std::exception& e) {
            fail(join(prefix, key), std::string("bad value: ") + e.what());
        }
    }

    const json* section(const json& obj, const std::string& prefix, const std::string& key) {
        known_.insert(join(prefix, key));
        auto it = obj.find(key);
        if (it == obj.end()) return nullptr;
        if (!it->is_object()) {
            fail(join(prefix, key), "expected an object");
            return nullptr;
        }
        return &*it;
    }

    /// After reading everything, reports keys present in the file but never consumed.
    void reject_unknown() {
        for (const auto& k : seen_)
            if (!known_.contains(k)) fail(k, "unknown key");
    }

private:
    static std::string join(const std::string& a, const std::string& b) {
        return a.empty() ? b : a + "." + b;
    }

    void collect_known(const json& node, const std::string& prefix) {
        if (!node.is_object()) return;
        for (auto it = node.begin(); it != node.end(); ++it) {
            std::string full = join(prefix, it.key());
            seen_.insert(full);
            collect_known(it.value(), full);
        }
    }

    std::vector<ConfigError>& errors_;
    std::set<std::string> known_;
    std::set<std::string> seen_;
};

void read_run(Reader& r, const json& doc, RunConfig& run) {
    const json* o = r.section(doc, "", "run");
    if (!o) return;
    r.get(*o, "run", "duration_s", run.duration_s);
    r.get(*o, "run", "time_scale", run.time_scale);
    r.get(*o, "run", "seed", run.seed);
    r.get(*o, "run", "bind_address", run.bind_address);
    r.get(*o, "run", "out_dir", run.out_dir);
    r.get(*o, "run", "plant_dt_s", run.plant_dt_s);
}

void read_plant(Reader& r, const json& doc, PlantLimits& p) {
    const json* o = r.section(doc, "", "plant");
    if (!o) return;
    r.get(*o, "plant", "w_rotor_max", p.w_rotor_max);
    r.get(*o, "plant", "gearbox_speed_max", p.gearbox_speed_max);
    r.get(*o, "plant", "power_max_kw", p.power_max_kw);
    r.get(*o, "plant", "brake_engage_speed_limit", p.brake_engage_speed_limit);
    r.get(*o, "plant", "gearbox_ratio", p.gearbox_ratio);
    r.get(*o, "plant", "rotor_inertia", p.rotor_inertia);
    r.get(*o, "plant", "rotor_radius_m", p.rotor_radius_m);
    r.get(*o, "plant", "air_density", p.air_density);
    r.get(*o, "plant", "park_brake_torque", p.park_brake_torque);
    r.get(*o, "plant", "pitch_brake_torque", p.pitch_brake_torque);
    r.get(*o, "plant", "pitch_rate_deg_s", p.pitch_rate_deg_s);
    r.get(*o, "plant", "gen_rated_power_kw", p.gen_rated_power_kw);
    r.get(*o, "plant", "gen_rated_speed", p.gen_rated_speed);
}

void read_controller(Reader& r, const json& doc, ControllerConfig& c) {
    const json* o = r.section(doc, "", "controller");
    if (!o) return;
    r.get(*o, "controller", "cut_in_mps", c.cut_in_mps);
    r.get(*o, "controller", "cut_out_mps", c.cut_out_mps);
    r.get(*o, "controller", "w_gen_min", c.w_gen_min);
    r.get(*o, "controller", "w_safe_max", c.w_safe_max);
    r.get(*o, "controller", "scan_period_ms", c.scan_period_ms);
    r.get(*o, "controller", "full_scale_wind", c.full_scale_wind);
    r.get(*o, "controller", "full_scale_rotor", c.full_scale_rotor);
    r.get(*o, "controller", "pitch_gain_deg_per_rad_s", c.pitch_gain_deg_per_rad_s);
    r.get(*o, "controller", "pitch_reference_fraction", c.pitch_reference_fraction);
    r.get(*o, "controller", "pitch_regulated_max_deg", c.pitch_regulated_max_deg);
}

void read_wind(Reader& r, const json& doc, WindConfig& w) {
    const json* o = r.section(doc, "", "wind");
    if (!o) return;
    r.get(*o, "wind", "mode", w.mode);
    r.get(*o, "wind", "profile", w.profile_path);
    r.get(*o, "wind", "sigma_mps", w.sigma_mps);
    if (const json* g = r.section(*o, "wind", "geo")) {
        r.get(*g, "wind.geo", "latitude", w.point.latitude);
        r.get(*g, "wind.geo", "longitude", w.point.longitude);
    }
    if (const json* f = r.section(*o, "wind", "fetch")) {
        r.get(*f, "wind.fetch", "url", w.fetch.url);
        r.get(*f, "wind.fetch", "field_path", w.fetch.field_path);
        r.get(*f, "wind.fetch", "altitude_m", w.fetch.altitude_m);
        r.get(*f, "wind.fetch", "cadence_s", w.fetch.cadence_s);
        r.get(*f, "wind.fetch", "timeout_ms", w.fetch.timeout_ms);
    }
}

void read_ports(Reader& r, const json& doc, PortConfig& p) {
    const json* o = r.section(doc, "", "ports");
    if (!o) return;
    r.get(*o, "ports", "modbus", p.modbus_port);
    r.get(*o, "ports", "s7", p.s7_port);
    r.get(*o, "ports", "web", p.web_port);
    r.get(*o, "ports", "external_modbus", p.external_modbus_port);
    r.get(*o, "ports", "external_s7", p.external_s7_port);
    r.get(*o, "ports", "external_web", p.external_web_port);
    r.get(*o, "ports", "telemetry", p.telemetry_port);
    r.get(*o, "ports", "control", p.control_port);
}

void read_identity(Reader& r, const json& doc, s7::DeviceIdentity& id) {
    const json* o = r.section(doc, "", "identity");
    if (!o) return;
    r.get(*o, "identity", "module_type", id.module_type);
    r.get(*o, "identity", "order_number", id.order_number);
    r.get(*o, "identity", "serial", id.serial);
    r.get(*o, "identity", "firmware", id.firmware);
    r.get(*o, "identity", "plant_id", id.plant_id);
}

void read_web(Reader& r, const json& doc, ScenarioConfig& cfg) {
    const json* o = r.section(doc, "", "web");
    if (!o) return;
    r.get(*o, "web", "poke_window_start", cfg.poke_window_start);
    r.get(*o, "web", "poke_window_end", cfg.poke_window_end);
}

void validate(const ScenarioConfig& cfg, std::vector<ConfigError>& errors) {
    if (!cfg.plant.valid()) errors.push_back({"plant", "limits must be positive, ratio >= 1"});
    if (cfg.controller.cut_in_mps >= cfg.controller.cut_out_mps)
        errors.push_back({"controller.cut_in_mps",
                          "cut_in_mps must be below cut_out_mps (cut_out is the upper bound)"});
    if (cfg.controller.w_gen_min >= cfg.controller.w_safe_max)
        errors.push_back({"controller.w_gen_min", "w_gen_min must be below w_safe_max"});
    if (!cfg.controller.valid())
        errors.push_back(
            {"controller", "invalid: scales must cover cut_out and 1.5x w_safe_max"});
    if (cfg.run.duration_s <= 0) errors.push_back({"run.duration_s", "must be positive"});
    if (cfg.run.time_scale < 0)
        errors.push_back({"run.time_scale", "must be >= 0 (0 runs unpaced)"});
    if (cfg.run.plant_dt_s <= 0 || cfg.run.plant_dt_s > 0.5)
        errors.push_back({"run.plant_dt_s", "must be in (0, 0.5]"});
    if (cfg.wind.mode != "replay" && cfg.wind.mode != "live")
        errors.push_back({"wind.mode", "must be replay or live"});
    if (cfg.wind.mode == "replay" && cfg.wind.profile_path.empty())
        errors.push_back({"wind.profile", "replay mode requires a profile file"});
    if (cfg.wind.mode == "live" && cfg.wind.fetch.url.empty())
        errors.push_back({"wind.fetch.url", "live mode requires the service endpoint"});
    if (!cfg.wind.point.valid())
        errors.push_back({"wind.geo", "coordinates outside valid ranges"});
    if (!cfg.identity.valid()) errors.push_back({"identity", "all identity strings must be non-empty"});
    if (cfg.poke_window_start < 5 || cfg.poke_window_end >= kRegisterCount ||
        cfg.poke_window_start > cfg.poke_window_end)
        errors.push_back({"web.poke_window_start",
                          "window must stay within HR5..HR15 (HR0..HR4 are controller-owned)"});

    // Port conflicts: every non-ephemeral bound port must be unique.
    std::map<uint16_t, std::vector<std::string>> uses;
    auto add = [&](uint16_t port, const std::string& name) {
        if (port != 0) uses[port].push_back(name);
    };
    add(cfg.ports.modbus_port, "ports.modbus");
    add(cfg.ports.s7_port, "ports.s7");
    add(cfg.ports.web_port, "ports.web");
    add(cfg.ports.external_modbus_port, "ports.external_modbus");
    add(cfg.ports.external_s7_port, "ports.external_s7");
    add(cfg.ports.external_web_port, "ports.external_web");
    add(cfg.ports.telemetry_port, "ports.telemetry");
    add(cfg.ports.control_port, "ports.control");
    for (const auto& [port, names] : uses) {
        if (names.size() > 1) {
            std::string joined;
            for (const auto& n : names) joined += (joined.empty() ? "" : ", ") + n;
            errors.push_back({names.front(),
                              "port " + std::to_string(port) + " bound by multiple services: " + joined});
        }
    }
}

}  // namespace

std::optional<ScenarioConfig> parse_config_text(const std::string& text,
                                                std::vector<ConfigError>& errors) {
    json doc = json::parse(text, nullptr, false, /*allow comments*/ true);
    if (doc.is_discarded()) {
        errors.push_back({"", "file is not valid JSON"});
        return std::nullopt;
    }
    if (!doc.is_object()) {
        errors.push_back({"", "top level must be an object"});
        return std::nullopt;
    }

    ScenarioConfig cfg;
    Reader r(doc, errors);
    read_run(r, doc, cfg.run);
    read_plant(r, doc, cfg.plant);
    read_controller(r, doc, cfg.controller);
    read_wind(r, doc, cfg.wind);
    read_ports(r, doc, cfg.ports);
    read_identity(r, doc, cfg.identity);
    read_web(r, doc, cfg);
    r.reject_unknown();
    validate(cfg, errors);

    if (!errors.empty()) return std::nullopt;
    return cfg;
}

std::optional<ScenarioConfig> load_config(const std::string& path,
                                          std::vector<ConfigError>& errors) {
    std::ifstream in(path);
    if (!in.is_open()) {
        errors.push_back({"", "cannot open config file: " + path});
        return std::nullopt;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), errors);
}

std::string config_errors_to_string(const std::vector<ConfigError>& errors) {
    std::ostringstream os;
    for (const auto& e : errors) {
        if (!e.key.empty()) os << e.key << ": ";
        os << e.message << "\n";
    }
    return os.str();
}

}  // namespace windtrap
