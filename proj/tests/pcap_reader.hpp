// Test-side pcap/Ethernet/IPv4/TCP reader, written directly from the published
// file and header formats. Independent of the production writer: it re-derives
// lengths and checksums on its own so a writer bug cannot hide.
#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace pcapcheck {

struct Packet {
    uint64_t ts_us = 0;
    uint32_t src_ip = 0, dst_ip = 0;
    uint16_t src_port = 0, dst_port = 0;
    uint32_t seq = 0, ack = 0;
    uint8_t flags = 0;
    std::vector<uint8_t> payload;
};

struct ReadResult {
    bool ok = false;
    std::string error;
    std::vector<Packet> packets;
    size_t malformed = 0;
};

inline uint32_t le32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
           static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
}
inline uint16_t le16(const uint8_t* p) {
    return static_cast<uint16_t>(p[0] | p[1] << 8);
}
inline uint32_t be32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) << 24 | static_cast<uint32_t>(p[1]) << 16 |
           static_cast<uint32_t>(p[2]) << 8 | static_cast<uint32_t>(p[3]);
}
inline uint16_t be16(const uint8_t* p) {
    return static_cast<uint16_t>(p[0] << 8 | p[1]);
}

inline uint16_t inet_checksum(const uint8_t* data, size_t len, uint32_t seed = 0) {
    uint32_t sum = seed;
    for (size_t i = 0; i + 1 < len; i += 2) sum += static_cast<uint32_t>(data[i]) << 8 | data[i + 1];
    if (len & 1) sum += static_cast<uint32_t>(data[len - 1]) << 8;
    while (sum >> 16) sum = (sum & 0xFFFF) + (sum >> 16);
    return static_cast<uint16_t>(~sum & 0xFFFF);
}

inline ReadResult read_pcap(const std::string& path) {
    ReadResult out;
    std::ifstream in(path, std::ios::binary);
    if (!in.is_open()) {
        out.error = "cannot open " + path;
        return out;
    }
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    if (bytes.size() < 24) {
        out.error = "truncated global header";
        return out;
    }
    if (le32(bytes.data()) != 0xA1B2C3D4) {
        out.error = "bad magic";
        return out;
    }
    if (le32(bytes.data() + 20) != 1) {
        out.error = "link type is not Ethernet";
        return out;
    }

    size_t off = 24;
    while (off < bytes.size()) {
        if (off + 16 > bytes.size()) {
            out.error = "truncated packet header (file does not end on a record boundary)";
            return out;
        }
        uint32_t ts_sec = le32(bytes.data() + off);
        uint32_t ts_usec = le32(bytes.data() + off + 4);
        uint32_t incl = le32(bytes.data() + off + 8);
        uint32_t orig = le32(bytes.data() + off + 12);
        off += 16;
        if (incl != orig || off + incl > bytes.size()) {
            out.error = "truncated packet body";
            return out;
        }
        const uint8_t* f = bytes.data() + off;
        off += incl;

        Packet pkt;
        pkt.ts_us = static_cast<uint64_t>(ts_sec) * 1000000 + ts_usec;
        if (incl < 14 + 20 + 20) {
            ++out.malformed;
            continue;
        }
        if (be16(f + 12) != 0x0800) {  // not IPv4
            ++out.malformed;
            continue;
        }
        const uint8_t* ip = f + 14;
        if ((ip[0] >> 4) != 4 || (ip[0] & 0x0F) != 5) {
            ++out.malformed;
            continue;
        }
        uint16_t total_len = be16(ip + 2);
        if (total_len + 14u != incl) {
            ++out.malformed;
            continue;
        }
        if (inet_checksum(ip, 20) != 0) {  // header checksum must verify to zero
            ++out.malformed;
            continue;
        }
        if (ip[9] != 6) {
            ++out.malformed;
            continue;
        }
        pkt.src_ip = be32(ip + 12);
        pkt.dst_ip = be32(ip + 16);

        const uint8_t* tcp = ip + 20;
        size_t tcp_len = total_len - 20u;
        if (tcp_len < 20 || (tcp[12] >> 4) != 5) {
            ++out.malformed;
            continue;
        }
        // verify TCP checksum over the pseudo header + segment
        uint8_t pseudo[12];
        for (int i = 0; i < 8; ++i) pseudo[i] = ip[12 + i];
        pseudo[8] = 0;
        pseudo[9] = 6;
        pseudo[10] = static_cast<uint8_t>(tcp_len >> 8);
        pseudo[11] = static_cast<uint8_t>(tcp_len & 0xFF);
        uint32_t seed = 0;
        for (int i = 0; i < 12; i += 2)
            seed += static_cast<uint32_t>(pseudo[i]) << 8 | pseudo[i + 1];
        if (inet_checksum(tcp, tcp_len, seed) != 0) {
            ++out.malformed;
            continue;
        }

        pkt.src_port = be16(tcp);
        pkt.dst_port = be16(tcp + 2);
        pkt.seq = be32(tcp + 4);
        pkt.ack = be32(tcp + 8);
        pkt.flags = tcp[13];
        pkt.payload.assign(tcp + 20, tcp + tcp_len);
        out.packets.push_back(std::move(pkt));
    }
    out.ok = out.error.empty();
    return out;
}

/// Concatenated payload bytes for one direction of one port pair, in file order.
inline std::vector<uint8_t> payload_stream(const ReadResult& r, uint16_t dst_port) {
    std::vector<uint8_t> out;
    for (const auto& p : r.packets)
        if (p.dst_port == dst_port)
            out.insert(out.end(), p.payload.begin(), p.payload.end());
    return out;
}

/// Checks per-direction sequence number progression for every flow.
inline bool sequence_numbers_consistent(const ReadResult& r, std::string* err = nullptr) {
    std::map<std::pair<uint64_t, uint64_t>, uint32_t> next_seq;
    for (const auto& p : r.packets) {
        auto key = std::make_pair(
            static_cast<uint64_t>(p.src_ip) << 16 | p.src_port,
            static_cast<uint64_t>(p.dst_ip) << 16 | p.dst_port);
        auto it = next_seq.find(key);
        if (it != next_seq.end() && p.seq != it->second) {
            if (err)
                *err = "seq gap: expected " + std::to_string(it->second) + " got " +
                       std::to_string(p.seq);
            return false;
        }
        uint32_t advance = static_cast<uint32_t>(p.payload.size());
        if (p.flags & 0x02) advance += 1;  // SYN
        if (p.flags & 0x01) advance += 1;  // FIN
        next_seq[key] = p.seq + advance;
    }
    return true;
}

}  // namespace pcapcheck
