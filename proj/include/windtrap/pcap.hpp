#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace windtrap::pcap {

/// Classic pcap, microsecond timestamps, link type Ethernet (1).
class PcapWriter {
public:
    PcapWriter() = default;
    ~PcapWriter();

    bool open(const std::string& path);
    void close();
    bool is_open() const;

    /// Appends one packet record in a single write so the file always ends on a
    /// record boundary. On write failure the capture rotates to `<path>.N`.
    void write_packet(uint64_t ts_us, const std::vector<uint8_t>& frame);

    uint64_t packets_written() const;

private:
    void write_global_header();

    mutable std::mutex mu_;
    std::ofstream out_;
    std::string path_;
    int rotation_ = 0;
    uint64_t packets_ = 0;
};

struct FlowAddr {
    uint32_t client_ip = 0;  // host byte order
    uint16_t client_port = 0;
    uint32_t service_ip = 0;
    uint16_t service_port = 0;
};

uint32_t parse_ipv4(const std::string& dotted);

/// Synthesizes an Ethernet/IPv4/TCP packet stream for one relayed connection:
/// handshake on open, one PSH+ACK per mirrored chunk, FIN exchange on close.
/// Sequence numbers advance per direction and checksums are valid.
class TcpFlowSynth {
public:
    TcpFlowSynth(PcapWriter& sink, FlowAddr addr);

    void open(uint64_t ts_us);
    void data_to_service(uint64_t ts_us, const uint8_t* payload, size_t len);
    void data_to_client(uint64_t ts_us, const uint8_t* payload, size_t len);
    void close(uint64_t ts_us);

private:
    void emit(uint64_t ts_us, bool from_client, uint8_t tcp_flags, const uint8_t* payload,
              size_t len);

    PcapWriter& sink_;
    FlowAddr addr_;
    uint32_t seq_client_;
    uint32_t seq_service_;
    uint16_t ip_id_ = 1;
    bool opened_ = false;
    bool closed_ = false;
};

}  // namespace windtrap::pcap
