#include "windtrap/pcap.hpp"

#include <cstring>

namespace windtrap::pcap {

namespace {

constexpr uint32_t kMagic = 0xA1B2C3D4;  // microsecond pcap
constexpr uint32_t kLinkEthernet = 1;
constexpr size_t kEthLen = 14;
constexpr size_t kIpLen = 20;
constexpr size_t kTcpLen = 20;

void put_le32(std::vector<uint8_t>& v, uint32_t x) {
    v.push_back(x & 0xFF);
    v.push_back((x >> 8) & 0xFF);
    v.push_back((x >> 16) & 0xFF);
    v.push_back((x >> 24) & 0xFF);
}

void put_le16(std::vector<uint8_t>& v, uint16_t x) {
    v.push_back(x & 0xFF);
    v.push_back((x >> 8) & 0xFF);
}

void put_be32(std::vector<uint8_t>& v, uint32_t x) {
    v.push_back((x >> 24) & 0xFF);
    v.push_back((x >> 16) & 0xFF);
    v.push_back((x >> 8) & 0xFF);
    v.push_back(x & 0xFF);
}

void put_be16(std::vector<uint8_t>& v, uint16_t x) {
    v.push_back((x >> 8) & 0xFF);
    v.push_back(x & 0xFF);
}

uint32_t checksum_add(uint32_t sum, const uint8_t* data, size_t len) {
    for (size_t i = 0; i + 1 < len; i += 2) sum += static_cast<uint32_t>(data[i]) << 8 | data[i + 1];
    if (len & 1) sum += static_cast<uint32_t>(data[len - 1]) << 8;
    return sum;
}

uint16_t checksum_fold(uint32_t sum) {
    while (sum >> 16) sum = (sum & 0xFFFF) + (sum >> 16);
    return static_cast<uint16_t>(~sum & 0xFFFF);
}

}  // namespace

PcapWriter::~PcapWriter() { close(); }

bool PcapWriter::open(const std::string& path) {
    std::lock_guard lk(mu_);
    path_ = path;
    out_.open(path, std::ios::out | std::ios::trunc | std::ios::binary);
    if (!out_.is_open()) return false;
    write_global_header();
    return true;
}

void PcapWriter::write_global_header() {
    std::vector<uint8_t> hdr;
    put_le32(hdr, kMagic);
    put_le16(hdr, 2);  // major
    put_le16(hdr, 4);  // minor
    put_le32(hdr, 0);  // thiszone
    put_le32(hdr, 0);  // sigfigs
    put_le32(hdr, 65535);
    put_le32(hdr, kLinkEthernet);
    out_.write(reinterpret_cast<const char*>(hdr.data()), hdr.size());
    out_.flush();
}

void PcapWriter::close() {
    std::lock_guard lk(mu_);
    if (out_.is_open()) out_.close();
}

bool PcapWriter::is_open() const {
    std::lock_guard lk(mu_);
    return out_.is_open();
}

void PcapWriter::write_packet(uint64_t ts_us, const std::vector<uint8_t>& frame) {
    std::lock_guard lk(mu_);
    if (!out_.is_open()) return;
    std::vector<uint8_t> rec;
    rec.reserve(16 + frame.size());
    put_le32(rec, static_cast<uint32_t>(ts_us / 1000000));
    put_le32(rec, static_cast<uint32_t>(ts_us % 1000000));
    put_le32(rec, static_cast<uint32_t>(frame.size()));
    put_le32(rec, static_cast<uint32_t>(frame.size()));
    rec.insert(rec.end(), frame.begin(), frame.end());
    out_.write(reinterpret_cast<const char*>(rec.data()), rec.size());
    out_.flush();
    if (!out_.good()) {
        // disk trouble: rotate to a fresh file and keep going
        out_.close();
        ++rotation_;
        out_.open(path_ + "." + std::to_string(rotation_),
                  std::ios::out | std::ios::trunc | std::ios::binary);
        if (out_.is_open()) write_global_header();
        return;
    }
    ++packets_;
}

uint64_t PcapWriter::packets_written() const {
    std::lock_guard lk(mu_);
    return packets_;
}

uint32_t parse_ipv4(const std::string& dotted) {
    uint32_t parts[4] = {0, 0, 0, 0};
    int i = 0;
    uint32_t cur = 0;
    bool any = false;
    for (char c : dotted) {
        if (c == '.') {
            if (i >= 3) return 0;
            parts[i++] = cur;
            cur = 0;
            any = false;
        } else if (c >= '0' && c <= '9') {
            cur = cur * 10 + static_cast<uint32_t>(c - '0');
            any = true;
        } else {
            return 0;
        }
    }
    if (!any || i != 3) return 0;
    parts[3] = cur;
    return parts[0] << 24 | parts[1] << 16 | parts[2] << 8 | parts[3];
}

TcpFlowSynth::TcpFlowSynth(PcapWriter& sink, FlowAddr addr)
    : sink_(sink), addr_(addr), seq_client_(0x1000), seq_service_(0x2000) {}

void TcpFlowSynth::emit(uint64_t ts_us, bool from_client, uint8_t tcp_flags,
                        const uint8_t* payload, size_t len) {
    static const uint8_t mac_client[6] = {0x02, 0x77, 0x74, 0x00, 0x00, 0x01};
    static const uint8_t mac_service[6] = {0x02, 0x77, 0x74, 0x00, 0x00, 0x02};

    uint32_t src_ip = from_client ? addr_.client_ip : addr_.service_ip;
    uint32_t dst_ip = from_client ? addr_.service_ip : addr_.client_ip;
    uint16_t src_port = from_client ? addr_.client_port : addr_.service_port;
    uint16_t dst_port = from_client ? addr_.service_port : addr_.client_port;
    uint32_t& seq = from_client ? seq_client_ : seq_service_;
    uint32_t ack = from_client ? seq_service_ : seq_client_;

    std::vector<uint8_t> frame;
    frame.reserve(kEthLen + kIpLen + kTcpLen + len);

    const uint8_t* dst_mac = from_client ? mac_service : mac_client;
    const uint8_t* src_mac = from_client ? mac_client : mac_service;
    frame.insert(frame.end(), dst_mac, dst_mac + 6);
    frame.insert(frame.end(), src_mac, src_mac + 6);
    put_be16(frame, 0x0800);  // IPv4

    // IPv4 header
    size_t ip_off = frame.size();
    uint16_t total_len = static_cast<uint16_t>(kIpLen + kTcpLen + len);
    frame.push_back(0x45);  // version 4, ihl 5
    frame.push_back(0x00);
    put_be16(frame, total_len);
    put_be16(frame, ip_id_++);
    put_be16(frame, 0x4000);  // don't fragment
    frame.push_back(64);      // ttl
    frame.push_back(6);       // tcp
    put_be16(frame, 0);       // checksum placeholder
    put_be32(frame, src_ip);
    put_be32(frame, dst_ip);
    uint16_t ip_csum = checksum_fold(checksum_add(0, frame.data() + ip_off, kIpLen));
    frame[ip_off + 10] = static_cast<uint8_t>(ip_csum >> 8);
    frame[ip_off + 11] = static_cast<uint8_t>(ip_csum & 0xFF);

    // TCP header
    size_t tcp_off = frame.size();
    put_be16(frame, src_port);
    put_be16(frame, dst_port);
    put_be32(frame, seq);
    bool has_ack = tcp_flags & 0x10;
    put_be32(frame, has_ack ? ack : 0);
    frame.push_back(0x50);  // data offset 5
    frame.push_back(tcp_flags);
    put_be16(frame, 0xFFFF);  // window
    put_be16(frame, 0);       // checksum placeholder
    put_be16(frame, 0);       // urgent
    frame.insert(frame.end(), payload, payload + len);

    // TCP checksum over pseudo header + segment
    std::vector<uint8_t> pseudo;
    put_be32(pseudo, src_ip);
    put_be32(pseudo, dst_ip);
    pseudo.push_back(0);
    pseudo.push_back(6);
    put_be16(pseudo, static_cast<uint16_t>(kTcpLen + len));
    uint32_t sum = checksum_add(0, pseudo.data(), pseudo.size());
    sum = checksum_add(sum, frame.data() + tcp_off, kTcpLen + len);
    uint16_t tcp_csum = checksum_fold(sum);
    frame[tcp_off + 16] = static_cast<uint8_t>(tcp_csum >> 8);
    frame[tcp_off + 17] = static_cast<uint8_t>(tcp_csum & 0xFF);

    sink_.write_packet(ts_us, frame);

    seq += static_cast<uint32_t>(len);
    if (tcp_flags & 0x02) seq += 1;  // SYN
    if (tcp_flags & 0x01) seq += 1;  // FIN
}

void TcpFlowSynth::open(uint64_t ts_us) {
    if (opened_) return;
    opened_ = true;
    emit(ts_us, true, 0x02, nullptr, 0);         // SYN
    emit(ts_us, false, 0x12, nullptr, 0);        // SYN+ACK
    emit(ts_us, true, 0x10, nullptr, 0);         // ACK
}

void TcpFlowSynth::data_to_service(uint64_t ts_us, const uint8_t* payload, size_t len) {
    if (!opened_) open(ts_us);
    emit(ts_us, true, 0x18, payload, len);  // PSH+ACK
}

void TcpFlowSynth::data_to_client(uint64_t ts_us, const uint8_t* payload, size_t len) {
    if (!opened_) open(ts_us);
    emit(ts_us, false, 0x18, payload, len);
}

void TcpFlowSynth::close(uint64_t ts_us) {
    if (!opened_ || closed_) return;
    closed_ = true;
    emit(ts_us, true, 0x11, nullptr, 0);   // FIN+ACK
    emit(ts_us, false, 0x11, nullptr, 0);  // FIN+ACK
    emit(ts_us, true, 0x10, nullptr, 0);   // final ACK
}

}  // namespace windtrap::pcap
