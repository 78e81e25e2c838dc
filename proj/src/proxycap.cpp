#include "windtrap/proxycap.hpp"

#include <sys/socket.h>

#include <chrono>
#include <thread>

namespace windtrap::proxy {

namespace {

uint64_t wall_clock_us() {
    using namespace std::chrono;
    return duration_cast<microseconds>(system_clock::now().time_since_epoch()).count();
}

}  // namespace

uint64_t CaptureSink::begin_connection(const net::Endpoint& client, const std::string& service_ip,
                                       uint16_t service_port) {
    std::lock_guard lk(mu_);
    uint64_t id = next_id_++;
    if (pcap_) {
        pcap::FlowAddr addr;
        addr.client_ip = pcap::parse_ipv4(client.host);
        addr.client_port = client.port;
        addr.service_ip = pcap::parse_ipv4(service_ip);
        addr.service_port = service_port;
        auto flow = std::make_unique<pcap::TcpFlowSynth>(*pcap_, addr);
        flow->open(wall_clock_us());
        flows_[id] = std::move(flow);
    }
    conn_info_[id] = {client.str(), service_port};
    if (log_)
        log_->emit("proxy", "conn_open",
                   {{"conn", std::to_string(id)},
                    {"client", client.str()},
                    {"service_port", std::to_string(service_port)}});
    return id;
}

void CaptureSink::record(uint64_t conn_id, Direction dir, const uint8_t* data, size_t len) {
    if (dir == Direction::ToService)
        bytes_to_service_.fetch_add(len);
    else
        bytes_to_client_.fetch_add(len);
    std::lock_guard lk(mu_);
    auto it = flows_.find(conn_id);
    if (it == flows_.end()) return;
    if (dir == Direction::ToService)
        it->second->data_to_service(wall_clock_us(), data, len);
    else
        it->second->data_to_client(wall_clock_us(), data, len);
}

void CaptureSink::end_connection(uint64_t conn_id) {
    std::lock_guard lk(mu_);
    auto it = flows_.find(conn_id);
    if (it != flows_.end()) {
        it->second->close(wall_clock_us());
        flows_.erase(it);
    }
    auto info = conn_info_.find(conn_id);
    if (info != conn_info_.end()) {
        if (log_)
            log_->emit("proxy", "conn_close",
                       {{"conn", std::to_string(conn_id)},
                        {"client", info->second.first},
                        {"service_port", std::to_string(info->second.second)}});
        conn_info_.erase(info);
    }
}

TransparentProxy::~TransparentProxy() { stop(); }

bool TransparentProxy::start(const std::string& bind_addr, const std::vector<ProxyRoute>& routes) {
    for (const auto& route : routes) {
        auto server = std::make_unique<net::TcpServer>();
        ProxyRoute r = route;
        auto* sp = server.get();
        bool ok = sp->start(bind_addr, route.listen_port,
                            [this, r](net::Socket conn, net::Endpoint peer) {
                                relay(std::move(conn), peer, r);
                            });
        if (!ok) {
            if (log_)
                log_->emit("proxy", "bind_error",
                           {{"route", route.name}, {"port", std::to_string(route.listen_port)}},
                           Severity::Alarm);
            stop();
            return false;
        }
        listeners_.emplace_back(route, std::move(server));
    }
    return true;
}

void TransparentProxy::stop() {
    for (auto& [route, server] : listeners_) server->stop();
    listeners_.clear();
}

uint16_t TransparentProxy::listen_port(const std::string& name) const {
    for (const auto& [route, server] : listeners_)
        if (route.name == name) return server->port();
    return 0;
}

void TransparentProxy::relay(net::Socket client, net::Endpoint peer, const ProxyRoute& route) {
    auto upstream = net::tcp_connect(route.target_host, route.target_port);
    if (!upstream) {
        if (log_)
            log_->emit("proxy", "conn_refused",
                       {{"route", route.name}, {"client", peer.str()}}, Severity::Warning);
        return;  // closing the socket refuses the client
    }

    // The externally visible service address: what the client connected to.
    net::Endpoint local = net::local_endpoint(client.fd());
    uint64_t id = sink_.begin_connection(peer, local.host, local.port);

    int client_fd = client.fd();
    int up_fd = upstream->fd();

    // client -> service in this thread's sibling, service -> client here
    std::thread downstream([this, id, client_fd, up_fd] {
        while (true) {
            auto chunk = net::recv_some(client_fd);
            if (chunk.empty()) break;
            sink_.record(id, Direction::ToService, chunk.data(), chunk.size());
            if (!net::send_all(up_fd, chunk.data(), chunk.size())) break;
        }
        ::shutdown(up_fd, SHUT_WR);
    });

    while (true) {
        auto chunk = net::recv_some(up_fd);
        if (chunk.empty()) break;
        sink_.record(id, Direction::ToClient, chunk.data(), chunk.size());
        if (!net::send_all(client_fd, chunk.data(), chunk.size())) break;
    }
    ::shutdown(client_fd, SHUT_WR);

    downstream.join();
    sink_.end_connection(id);
}

}  // namespace windtrap::proxy
