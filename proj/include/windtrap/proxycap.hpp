#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "windtrap/events.hpp"
#include "windtrap/netutil.hpp"
#include "windtrap/pcap.hpp"

namespace windtrap::proxy {

enum class Direction { ToService, ToClient };

/// One mirrored traffic unit. Payload bytes are exactly the bytes relayed.
struct CaptureRecord {
    uint64_t ts_us = 0;
    uint64_t connection_id = 0;
    Direction direction = Direction::ToService;
    std::vector<uint8_t> payload;
    std::string client_addr;
    uint16_t service_port = 0;
};

/// Fans mirrored chunks into the pcap file and the event log. Thread-safe.
class CaptureSink {
public:
    CaptureSink(pcap::PcapWriter* pcap, EventLog* log) : pcap_(pcap), log_(log) {}

    uint64_t begin_connection(const net::Endpoint& client, const std::string& service_ip,
                              uint16_t service_port);
    void record(uint64_t conn_id, Direction dir, const uint8_t* data, size_t len);
    void end_connection(uint64_t conn_id);

    uint64_t bytes_to_service() const { return bytes_to_service_.load(); }
    uint64_t bytes_to_client() const { return bytes_to_client_.load(); }

private:
    pcap::PcapWriter* pcap_;
    EventLog* log_;
    std::mutex mu_;
    uint64_t next_id_ = 1;
    std::map<uint64_t, std::unique_ptr<pcap::TcpFlowSynth>> flows_;
    std::map<uint64_t, std::pair<std::string, uint16_t>> conn_info_;
    std::atomic<uint64_t> bytes_to_service_{0};
    std::atomic<uint64_t> bytes_to_client_{0};
};

struct ProxyRoute {
    std::string name;          // modbus | s7 | web | ...
    uint16_t listen_port = 0;  // externally exposed
    std::string target_host = "127.0.0.1";
    uint16_t target_port = 0;  // internal decoy service
};

/// TCP relay that forwards every byte unmodified while mirroring both
/// directions into the capture sink.
class TransparentProxy {
public:
    TransparentProxy(CaptureSink& sink, EventLog* log) : sink_(sink), log_(log) {}
    ~TransparentProxy();

    /// Binds one listener per route. Returns false if any bind fails.
    bool start(const std::string& bind_addr, const std::vector<ProxyRoute>& routes);
    void stop();

    /// Actual listen port for a route (useful with ephemeral ports).
    uint16_t listen_port(const std::string& name) const;

private:
    void relay(net::Socket client, net::Endpoint peer, const ProxyRoute& route);

    CaptureSink& sink_;
    EventLog* log_;
    std::vector<std::pair<ProxyRoute, std::unique_ptr<net::TcpServer>>> listeners_;
};

}  // namespace windtrap::proxy
