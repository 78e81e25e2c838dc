#include "windtrap/s7lite.hpp"

#include <algorithm>
#include <cstdio>

namespace windtrap::s7 {

namespace {

constexpr uint8_t kCotpCR = 0xE0;
constexpr uint8_t kCotpCC = 0xD0;
constexpr uint8_t kCotpDT = 0xF0;

constexpr uint8_t kS7Proto = 0x32;
constexpr uint8_t kRosctrJob = 0x01;
constexpr uint8_t kRosctrAckData = 0x03;
constexpr uint8_t kRosctrUserData = 0x07;

constexpr uint8_t kFnSetupComm = 0xF0;
constexpr uint8_t kFnReadVar = 0x04;

constexpr uint16_t kPduLength = 240;  // small-CPU typical

uint16_t rd16(const std::vector<uint8_t>& v, size_t off) {
    return static_cast<uint16_t>(v[off] << 8 | v[off + 1]);
}

void wr16(std::vector<uint8_t>& v, uint16_t x) {
    v.push_back(static_cast<uint8_t>(x >> 8));
    v.push_back(static_cast<uint8_t>(x & 0xFF));
}

std::vector<uint8_t> padded_text(const std::string& s, size_t width) {
    std::vector<uint8_t> out(width, ' ');
    for (size_t i = 0; i < std::min(width, s.size()); ++i) out[i] = static_cast<uint8_t>(s[i]);
    return out;
}

// ack-data header with error class/code and empty body
std::vector<uint8_t> s7_error(uint16_t pdu_ref, uint8_t err_class, uint8_t err_code) {
    std::vector<uint8_t> out{kS7Proto, kRosctrAckData, 0x00, 0x00};
    wr16(out, pdu_ref);
    wr16(out, 0);  // param length
    wr16(out, 0);  // data length
    out.push_back(err_class);
    out.push_back(err_code);
    return out;
}

}  // namespace

std::vector<std::vector<uint8_t>> TpktAssembler::feed(const uint8_t* data, size_t len) {
    std::vector<std::vector<uint8_t>> payloads;
    if (poisoned_) return payloads;
    buf_.insert(buf_.end(), data, data + len);
    while (buf_.size() >= 4) {
        if (buf_[0] != 0x03) {
            poisoned_ = true;
            error_ = "tpkt_version";
            return payloads;
        }
        uint16_t total = static_cast<uint16_t>(buf_[2] << 8 | buf_[3]);
        if (total < 4) {
            poisoned_ = true;
            error_ = "tpkt_length";
            return payloads;
        }
        if (buf_.size() < total) break;
        payloads.emplace_back(buf_.begin() + 4, buf_.begin() + total);
        buf_.erase(buf_.begin(), buf_.begin() + total);
    }
    return payloads;
}

std::vector<uint8_t> wrap_tpkt(const std::vector<uint8_t>& payload) {
    std::vector<uint8_t> out{0x03, 0x00};
    wr16(out, static_cast<uint16_t>(payload.size() + 4));
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

std::vector<uint8_t> Engine::handle_cotp_connect(const std::vector<uint8_t>& p, bool& close) {
    // CR TPDU: LI, 0xE0, dstRef(2), srcRef(2), class(1), variable part
    if (p.size() < 7 || (p[1] & 0xF0) != kCotpCR) {
        close = true;
        if (log_) log_->emit("s7", "cotp_reject", {{"reason", "not_cr"}}, Severity::Warning);
        return {};
    }
    caller_ref_ = rd16(p, 4);
    uint8_t cotp_class = p[6];

    uint8_t tpdu_code = 0x0A;  // 1024
    size_t li = p[0];
    size_t i = 7;
    while (i + 1 < p.size() && i <= li) {
        uint8_t code = p[i];
        uint8_t plen = p[i + 1];
        if (i + 2 + plen > p.size()) break;
        if (code == 0xC0 && plen == 1) tpdu_code = p[i + 2];
        i += 2u + plen;
    }
    tpdu_code = std::min<uint8_t>(tpdu_code, 0x0A);  // cap at 1024 bytes
    tpdu_size_ = static_cast<uint16_t>(1u << tpdu_code);

    std::vector<uint8_t> cc;
    cc.push_back(0x11);          // LI: 17 bytes follow
    cc.push_back(kCotpCC);
    wr16(cc, caller_ref_);       // dst ref = caller's src ref
    wr16(cc, 0x0001);            // our ref
    cc.push_back(cotp_class & 0xF0 ? 0x00 : cotp_class);  // class 0 only
    cc.push_back(0xC0);          // tpdu size
    cc.push_back(0x01);
    cc.push_back(tpdu_code);
    // echo tsap parameters if present so strict callers match them up
    i = 7;
    while (i + 1 < p.size() && i <= li) {
        uint8_t code = p[i];
        uint8_t plen = p[i + 1];
        if (i + 2 + plen > p.size()) break;
        if (code == 0xC1 || code == 0xC2) {
            cc.push_back(code);
            cc.push_back(plen);
            cc.insert(cc.end(), p.begin() + i + 2, p.begin() + i + 2 + plen);
        }
        i += 2u + plen;
    }
    cc[0] = static_cast<uint8_t>(cc.size() - 1);
    state_ = CotpState::Connected;
    return cc;
}

std::vector<uint8_t> Engine::setup_communication(const std::vector<uint8_t>& pdu) {
    // job param: F0 00 amq_caller(2) amq_callee(2) pdu_len(2)
    uint16_t pdu_ref = rd16(pdu, 4);
    uint16_t req_len = pdu.size() >= 18 ? rd16(pdu, 16) : kPduLength;
    uint16_t granted = std::min<uint16_t>(req_len == 0 ? kPduLength : req_len, kPduLength);

    std::vector<uint8_t> out{kS7Proto, kRosctrAckData, 0x00, 0x00};
    wr16(out, pdu_ref);
    wr16(out, 8);   // param length
    wr16(out, 0);   // data length
    out.push_back(0x00);  // error class
    out.push_back(0x00);  // error code
    out.push_back(kFnSetupComm);
    out.push_back(0x00);
    wr16(out, 1);  // max AMQ caller
    wr16(out, 1);  // max AMQ callee
    wr16(out, granted);
    return out;
}

std::vector<uint8_t> Engine::read_var(const std::vector<uint8_t>& pdu) {
    uint16_t pdu_ref = rd16(pdu, 4);
    uint16_t param_len = rd16(pdu, 6);
    if (param_len < 2 || pdu.size() < 10u + param_len) return s7_error(pdu_ref, 0x82, 0x01);
    size_t par = 10;
    uint8_t item_count = pdu[par + 1];
    if (item_count == 0 || item_count > 20) return s7_error(pdu_ref, 0x82, 0x01);

    auto snap = plc_.snapshot();
    // register block exposed as data block 1, big-endian words
    std::vector<uint8_t> db1(kRegisterCount * 2);
    for (size_t r = 0; r < kRegisterCount; ++r) {
        db1[2 * r] = static_cast<uint8_t>(snap.image.holding_registers[r] >> 8);
        db1[2 * r + 1] = static_cast<uint8_t>(snap.image.holding_registers[r] & 0xFF);
    }

    struct ItemResult {
        uint8_t ret;
        std::vector<uint8_t> bytes;
    };
    std::vector<ItemResult> results;
    size_t i = par + 2;
    for (uint8_t n = 0; n < item_count; ++n) {
        if (i + 12 > pdu.size()) return s7_error(pdu_ref, 0x82, 0x01);
        uint8_t spec = pdu[i];
        uint8_t spec_len = pdu[i + 1];
        uint8_t syntax = pdu[i + 2];
        uint8_t transport = pdu[i + 3];
        uint16_t count = rd16(pdu, i + 4);
        uint16_t db_num = rd16(pdu, i + 6);
        uint8_t area = pdu[i + 8];
        uint32_t bit_addr = static_cast<uint32_t>(pdu[i + 9]) << 16 |
                            static_cast<uint32_t>(pdu[i + 10]) << 8 | pdu[i + 11];
        i += 2u + spec_len;

        if (spec != 0x12 || syntax != 0x10) {
            results.push_back({0x0A, {}});  // object does not exist
            continue;
        }
        if (area != 0x84 || db_num != 1) {
            results.push_back({0x0A, {}});
            continue;
        }
        size_t byte_off = bit_addr / 8;
        size_t nbytes = transport == 0x04 ? count * 2u : count;  // words or bytes
        if (nbytes == 0 || byte_off + nbytes > db1.size()) {
            results.push_back({0x05, {}});  // address out of range
            continue;
        }
        results.push_back(
            {0xFF, std::vector<uint8_t>(db1.begin() + byte_off, db1.begin() + byte_off + nbytes)});
    }

    std::vector<uint8_t> data;
    for (const auto& r : results) {
        data.push_back(r.ret);
        if (r.ret == 0xFF) {
            data.push_back(0x04);  // transport: bytes/words, length in bits
            wr16(data, static_cast<uint16_t>(r.bytes.size() * 8));
            data.insert(data.end(), r.bytes.begin(), r.bytes.end());
        } else {
            data.push_back(0x00);
            wr16(data, 0);
        }
    }

    std::vector<uint8_t> out{kS7Proto, kRosctrAckData, 0x00, 0x00};
    wr16(out, pdu_ref);
    wr16(out, 2);  // param length
    wr16(out, static_cast<uint16_t>(data.size()));
    out.push_back(0x00);
    out.push_back(0x00);
    out.push_back(kFnReadVar);
    out.push_back(static_cast<uint8_t>(results.size()));
    out.insert(out.end(), data.begin(), data.end());
    return out;
}

std::vector<uint8_t> Engine::szl_read(const std::vector<uint8_t>& pdu, const std::string& peer) {
    // userdata request: header(10) param(8) data(4+4): FF 09 len szl_id szl_index
    uint16_t pdu_ref = rd16(pdu, 4);
    uint16_t param_len = rd16(pdu, 6);
    size_t data_off = 10u + param_len;
    if (pdu.size() < data_off + 8) return s7_error(pdu_ref, 0x82, 0x01);
    uint16_t szl_id = rd16(pdu, data_off + 4);
    uint16_t szl_index = rd16(pdu, data_off + 6);

    if (log_)
        log_->emit("s7", "szl_read",
                   {{"szl_id", std::to_string(szl_id)},
                    {"index", std::to_string(szl_index)},
                    {"peer", peer}});

    std::vector<uint8_t> records;
    uint16_t record_len = 0;
    if (szl_id == 0x0011) {
        // module identification: index(2) + order code(20) + type(2) + version info(4)
        record_len = 28;
        auto add = [&](uint16_t index, const std::string& text, uint16_t v1, uint16_t v2) {
            wr16(records, index);
            auto t = padded_text(text, 20);
            records.insert(records.end(), t.begin(), t.end());
            wr16(records, 0x2020);
            wr16(records, v1);
            wr16(records, v2);
        };
        add(0x0001, identity_.order_number, 0x0001, 0x0402);
        add(0x0006, identity_.order_number, 0x0001, 0x0402);
        add(0x0007, identity_.firmware, 0x0001, 0x0402);
    } else if (szl_id == 0x001C) {
        // component identification: index(2) + 32 chars
        record_len = 34;
        auto add = [&](uint16_t index, const std::string& text) {
            wr16(records, index);
            auto t = padded_text(text, 32);
            records.insert(records.end(), t.begin(), t.end());
        };
        add(0x0001, identity_.plant_id);
        add(0x0002, identity_.module_type);
        add(0x0005, identity_.serial);
    } else {
        return s7_error(pdu_ref, 0xD4, 0x01);  // SZL id not available
    }
    uint16_t record_count = szl_id == 0x0011 ? 3 : 3;

    std::vector<uint8_t> data{0xFF, 0x09};
    wr16(data, static_cast<uint16_t>(8 + records.size()));
    wr16(data, szl_id);
    wr16(data, szl_index);
    wr16(data, record_len);
    wr16(data, record_count);
    data.insert(data.end(), records.begin(), records.end());

    std::vector<uint8_t> param{0x00, 0x01, 0x12, 0x08, 0x12, 0x84, 0x01,
                               0x00, 0x00, 0x00, 0x00, 0x00};
    std::vector<uint8_t> out{kS7Proto, kRosctrUserData, 0x00, 0x00};
    wr16(out, pdu_ref);
    wr16(out, static_cast<uint16_t>(param.size()));
    wr16(out, static_cast<uint16_t>(data.size()));
    out.insert(out.end(), param.begin(), param.end());
    out.insert(out.end(), data.begin(), data.end());
    return out;
}

std::vector<uint8_t> Engine::handle_s7_request(const std::vector<uint8_t>& pdu,
                                               const std::string& peer) {
    if (pdu.size() < 10 || pdu[0] != kS7Proto) {
        if (log_)
            log_->emit("s7", "s7_malformed", {{"len", std::to_string(pdu.size())}, {"peer", peer}},
                       Severity::Warning);
        return s7_error(0, 0x82, 0x01);
    }
    uint8_t rosctr = pdu[1];
    uint16_t pdu_ref = rd16(pdu, 4);

    if (rosctr == kRosctrUserData) return szl_read(pdu, peer);
    if (rosctr != kRosctrJob) return s7_error(pdu_ref, 0x82, 0x01);

    uint16_t param_len = rd16(pdu, 6);
    if (param_len < 1 || pdu.size() < 10u + param_len) return s7_error(pdu_ref, 0x82, 0x01);
    uint8_t function = pdu[10];

    if (log_)
        log_->emit("s7", "s7_request",
                   {{"function", std::to_string(function)}, {"peer", peer}});

    switch (function) {
        case kFnSetupComm: return setup_communication(pdu);
        case kFnReadVar: return read_var(pdu);
        default:
            // writes, uploads, downloads, PI services: not available, but captured
            if (log_)
                log_->emit("s7", "s7_denied",
                           {{"function", std::to_string(function)}, {"peer", peer}},
                           Severity::Warning);
            return s7_error(pdu_ref, 0x81, 0x04);
    }
}

std::vector<uint8_t> Engine::handle_payload(const std::vector<uint8_t>& payload,
                                            const std::string& peer, bool& close) {
    close = false;
    if (payload.size() < 2) {
        close = true;
        return {};
    }
    if (state_ == CotpState::AwaitCR) {
        auto cc = handle_cotp_connect(payload, close);
        if (!cc.empty() && log_) log_->emit("s7", "cotp_connect", {{"peer", peer}});
        return cc;
    }
    // connected: expect DT TPDU (LI=2, 0xF0, EOT)
    if ((payload[1] & 0xF0) != kCotpDT || payload.size() < 3) {
        close = true;
        if (log_) log_->emit("s7", "cotp_reject", {{"reason", "not_dt"}}, Severity::Warning);
        return {};
    }
    std::vector<uint8_t> s7_pdu(payload.begin() + 3, payload.end());
    auto resp = handle_s7_request(s7_pdu, peer);
    std::vector<uint8_t> dt{0x02, kCotpDT, 0x80};
    dt.insert(dt.end(), resp.begin(), resp.end());
    return dt;
}

bool Server::start(const std::string& bind_addr, uint16_t port) {
    return server_.start(bind_addr, port, [this](net::Socket conn, net::Endpoint peer) {
        handle(std::move(conn), peer);
    });
}

void Server::stop() { server_.stop(); }

void Server::handle(net::Socket conn, net::Endpoint peer) {
    TpktAssembler assembler;
    Engine engine(identity_, plc_, log_);
    while (true) {
        auto chunk = net::recv_some(conn.fd());
        if (chunk.empty()) break;
        auto payloads = assembler.feed(chunk.data(), chunk.size());
        bool close = false;
        for (const auto& p : payloads) {
            auto resp = engine.handle_payload(p, peer.str(), close);
            if (!resp.empty() && !net::send_all(conn, wrap_tpkt(resp))) return;
            if (close) break;
        }
        if (assembler.poisoned()) {
            if (log_)
                log_->emit("s7", "tpkt_drop",
                           {{"reason", assembler.error()}, {"peer", peer.str()}},
                           Severity::Warning);
            break;
        }
        if (close) break;
    }
}

}  // namespace windtrap::s7
