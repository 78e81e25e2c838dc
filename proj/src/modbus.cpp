#include "windtrap/modbus.hpp"

#include <cstdio>

namespace windtrap::modbus {

namespace {

constexpr uint8_t kFcReadCoils = 0x01;
constexpr uint8_t kFcReadHolding = 0x03;
constexpr uint8_t kFcWriteSingleCoil = 0x05;
constexpr uint8_t kFcWriteSingleRegister = 0x06;
constexpr uint8_t kFcWriteCoils = 0x0F;
constexpr uint8_t kFcWriteRegisters = 0x10;

constexpr size_t kMaxPduLen = 253;

uint16_t rd16(const std::vector<uint8_t>& v, size_t off) {
    return static_cast<uint16_t>(v[off] << 8 | v[off + 1]);
}

void wr16(std::vector<uint8_t>& v, uint16_t x) {
    v.push_back(static_cast<uint8_t>(x >> 8));
    v.push_back(static_cast<uint8_t>(x & 0xFF));
}

std::string hex_bits(const std::vector<bool>& bits) {
    std::string s;
    for (bool b : bits) s.push_back(b ? '1' : '0');
    return s;
}

std::string sim_time_str(double t) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", t);
    return buf;
}

}  // namespace

std::vector<MbapFrame> MbapAssembler::feed(const uint8_t* data, size_t len) {
    std::vector<MbapFrame> frames;
    if (poisoned_) return frames;
    buf_.insert(buf_.end(), data, data + len);
    while (buf_.size() >= 7) {
        uint16_t pid = static_cast<uint16_t>(buf_[2] << 8 | buf_[3]);
        uint16_t length = static_cast<uint16_t>(buf_[4] << 8 | buf_[5]);
        if (pid != 0) {
            poisoned_ = true;
            error_ = "protocol_id";
            return frames;
        }
        if (length < 2 || length > kMaxPduLen + 1) {
            poisoned_ = true;
            error_ = "length";
            return frames;
        }
        size_t total = 6 + static_cast<size_t>(length);
        if (buf_.size() < total) break;
        MbapFrame f;
        f.transaction_id = static_cast<uint16_t>(buf_[0] << 8 | buf_[1]);
        f.protocol_id = pid;
        f.unit_id = buf_[6];
        f.pdu.assign(buf_.begin() + 7, buf_.begin() + total);
        buf_.erase(buf_.begin(), buf_.begin() + total);
        frames.push_back(std::move(f));
    }
    return frames;
}

std::vector<uint8_t> build_mbap(uint16_t tid, uint8_t uid, const std::vector<uint8_t>& pdu) {
    std::vector<uint8_t> out;
    out.reserve(7 + pdu.size());
    wr16(out, tid);
    wr16(out, 0);  // protocol id
    wr16(out, static_cast<uint16_t>(pdu.size() + 1));
    out.push_back(uid);
    out.insert(out.end(), pdu.begin(), pdu.end());
    return out;
}

std::vector<uint8_t> build_exception(uint8_t function, ExceptionCode code) {
    return {static_cast<uint8_t>(function | 0x80), static_cast<uint8_t>(code)};
}

std::vector<uint8_t> Engine::read_coils(const std::vector<uint8_t>& pdu,
                                        const ControllerSnapshot& snap) {
    if (pdu.size() != 5) return build_exception(kFcReadCoils, ExceptionCode::IllegalDataValue);
    uint16_t start = rd16(pdu, 1);
    uint16_t qty = rd16(pdu, 3);
    if (qty < 1 || qty > 2000) return build_exception(kFcReadCoils, ExceptionCode::IllegalDataValue);
    if (start >= kCoilCount || start + qty > kCoilCount)
        return build_exception(kFcReadCoils, ExceptionCode::IllegalDataAddress);
    std::vector<uint8_t> out{kFcReadCoils, static_cast<uint8_t>((qty + 7) / 8)};
    out.resize(2 + (qty + 7) / 8, 0);
    for (uint16_t i = 0; i < qty; ++i) {
        if (snap.image.coils[start + i]) out[2 + i / 8] |= static_cast<uint8_t>(1u << (i % 8));
    }
    return out;
}

std::vector<uint8_t> Engine::read_holding(const std::vector<uint8_t>& pdu,
                                          const ControllerSnapshot& snap) {
    if (pdu.size() != 5) return build_exception(kFcReadHolding, ExceptionCode::IllegalDataValue);
    uint16_t start = rd16(pdu, 1);
    uint16_t qty = rd16(pdu, 3);
    if (qty < 1 || qty > 125)
        return build_exception(kFcReadHolding, ExceptionCode::IllegalDataValue);
    if (start >= kRegisterCount || start + qty > kRegisterCount)
        return build_exception(kFcReadHolding, ExceptionCode::IllegalDataAddress);
    std::vector<uint8_t> out{kFcReadHolding, static_cast<uint8_t>(2 * qty)};
    for (uint16_t i = 0; i < qty; ++i) wr16(out, snap.image.holding_registers[start + i]);
    return out;
}

std::vector<uint8_t> Engine::write_single_coil(const std::vector<uint8_t>& pdu,
                                               const std::string& peer) {
    if (pdu.size() != 5)
        return build_exception(kFcWriteSingleCoil, ExceptionCode::IllegalDataValue);
    uint16_t addr = rd16(pdu, 1);
    uint16_t value = rd16(pdu, 3);
    if (value != 0x0000 && value != 0xFF00)
        return build_exception(kFcWriteSingleCoil, ExceptionCode::IllegalDataValue);
    if (addr >= kCoilCount)
        return build_exception(kFcWriteSingleCoil, ExceptionCode::IllegalDataAddress);
    plc_.submit(CoilWriteCmd{addr, value == 0xFF00});
    if (log_)
        log_->emit("modbus", "modbus_write",
                   {{"fc", "5"},
                    {"addr", std::to_string(addr)},
                    {"value", value == 0xFF00 ? "1" : "0"},
                    {"peer", peer},
                    {"sim_time", sim_time_str(plc_.snapshot().sim_time_s)}});
    return pdu;  // echo
}

std::vector<uint8_t> Engine::write_single_register(const std::vector<uint8_t>& pdu,
                                                   const std::string& peer) {
    if (pdu.size() != 5)
        return build_exception(kFcWriteSingleRegister, ExceptionCode::IllegalDataValue);
    uint16_t addr = rd16(pdu, 1);
    uint16_t value = rd16(pdu, 3);
    if (addr >= kRegisterCount)
        return build_exception(kFcWriteSingleRegister, ExceptionCode::IllegalDataAddress);
    plc_.submit(RegisterWriteCmd{addr, value});
    if (log_)
        log_->emit("modbus", "modbus_write",
                   {{"fc", "6"},
                    {"addr", std::to_string(addr)},
                    {"value", std::to_string(value)},
                    {"peer", peer},
                    {"sim_time", sim_time_str(plc_.snapshot().sim_time_s)}});
    return pdu;  // echo
}

std::vector<uint8_t> Engine::write_coils(const std::vector<uint8_t>& pdu,
                                         const std::string& peer) {
    if (pdu.size() < 6) return build_exception(kFcWriteCoils, ExceptionCode::IllegalDataValue);
    uint16_t start = rd16(pdu, 1);
    uint16_t qty = rd16(pdu, 3);
    uint8_t byte_count = pdu[5];
    if (qty < 1 || qty > 0x07B0 || byte_count != (qty + 7) / 8 ||
        pdu.size() != 6u + byte_count)
        return build_exception(kFcWriteCoils, ExceptionCode::IllegalDataValue);
    if (start >= kCoilCount || start + qty > kCoilCount)
        return build_exception(kFcWriteCoils, ExceptionCode::IllegalDataAddress);

    std::vector<bool> bits(qty);
    for (uint16_t i = 0; i < qty; ++i) bits[i] = pdu[6 + i / 8] & (1u << (i % 8));
    for (uint16_t i = 0; i < qty; ++i)
        plc_.submit(CoilWriteCmd{static_cast<uint16_t>(start + i), static_cast<bool>(bits[i])});
    if (log_)
        log_->emit("modbus", "modbus_write",
                   {{"fc", "15"},
                    {"addr", std::to_string(start)},
                    {"qty", std::to_string(qty)},
                    {"bits", hex_bits(bits)},
                    {"peer", peer},
                    {"sim_time", sim_time_str(plc_.snapshot().sim_time_s)}});
    std::vector<uint8_t> out{kFcWriteCoils};
    wr16(out, start);
    wr16(out, qty);
    return out;
}

std::vector<uint8_t> Engine::write_registers(const std::vector<uint8_t>& pdu,
                                             const std::string& peer) {
    if (pdu.size() < 6)
        return build_exception(kFcWriteRegisters, ExceptionCode::IllegalDataValue);
    uint16_t start = rd16(pdu, 1);
    uint16_t qty = rd16(pdu, 3);
    uint8_t byte_count = pdu[5];
    if (qty < 1 || qty > 123 || byte_count != 2 * qty || pdu.size() != 6u + byte_count)
        return build_exception(kFcWriteRegisters, ExceptionCode::IllegalDataValue);
    if (start >= kRegisterCount || start + qty > kRegisterCount)
        return build_exception(kFcWriteRegisters, ExceptionCode::IllegalDataAddress);
    std::string values;
    for (uint16_t i = 0; i < qty; ++i) {
        uint16_t v = rd16(pdu, 6 + 2 * i);
        plc_.submit(RegisterWriteCmd{static_cast<uint16_t>(start + i), v});
        if (!values.empty()) values.push_back(',');
        values += std::to_string(v);
    }
    if (log_)
        log_->emit("modbus", "modbus_write",
                   {{"fc", "16"},
                    {"addr", std::to_string(start)},
                    {"qty", std::to_string(qty)},
                    {"values", values},
                    {"peer", peer},
                    {"sim_time", sim_time_str(plc_.snapshot().sim_time_s)}});
    std::vector<uint8_t> out{kFcWriteRegisters};
    wr16(out, start);
    wr16(out, qty);
    return out;
}

std::vector<uint8_t> Engine::execute_pdu(const std::vector<uint8_t>& pdu,
                                         const std::string& peer) {
    if (pdu.empty()) return build_exception(0, ExceptionCode::IllegalFunction);
    auto snap = plc_.snapshot();  // one consistent snapshot per request
    switch (pdu[0]) {
        case kFcReadCoils: return read_coils(pdu, snap);
        case kFcReadHolding: return read_holding(pdu, snap);
        case kFcWriteSingleCoil: return write_single_coil(pdu, peer);
        case kFcWriteSingleRegister: return write_single_register(pdu, peer);
        case kFcWriteCoils: return write_coils(pdu, peer);
        case kFcWriteRegisters: return write_registers(pdu, peer);
        default: return build_exception(pdu[0], ExceptionCode::IllegalFunction);
    }
}

std::vector<uint8_t> Engine::execute(const MbapFrame& frame, const std::string& peer) {
    return build_mbap(frame.transaction_id, frame.unit_id, execute_pdu(frame.pdu, peer));
}

bool Server::start(const std::string& bind_addr, uint16_t port) {
    return server_.start(bind_addr, port,
                         [this](net::Socket conn, net::Endpoint peer) { handle(std::move(conn), peer); });
}

void Server::stop() { server_.stop(); }

void Server::handle(net::Socket conn, net::Endpoint peer) {
    MbapAssembler assembler;
    while (true) {
        auto chunk = net::recv_some(conn.fd());
        if (chunk.empty()) break;
        auto frames = assembler.feed(chunk.data(), chunk.size());
        for (const auto& f : frames) {
            auto resp = engine_.execute(f, peer.str());
            if (!net::send_all(conn, resp)) return;
        }
        if (assembler.poisoned()) {
            if (log_)
                log_->emit("modbus", "modbus_drop",
                           {{"reason", assembler.error()}, {"peer", peer.str()}},
                           Severity::Warning);
            break;
        }
    }
}

}  // namespace windtrap::modbus
