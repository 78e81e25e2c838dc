#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace windtrap::net {

/// Owning socket fd. Move-only.
class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) : fd_(fd) {}
    ~Socket();
    Socket(Socket&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }
    Socket& operator=(Socket&& o) noexcept;
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;

    int fd() const { return fd_; }
    bool valid() const { return fd_ >= 0; }
    void close();
    void shutdown_both();

private:
    int fd_ = -1;
};

struct Endpoint {
    std::string host;  // dotted quad
    uint16_t port = 0;
    std::string str() const { return host + ":" + std::to_string(port); }
};

// --- TCP -------------------------------------------------------------------

std::optional<Socket> tcp_connect(const std::string& host, uint16_t port, int timeout_ms = 3000);

/// Sends the whole buffer; false on error/peer close.
bool send_all(int fd, const uint8_t* data, size_t len);
bool send_all(const Socket& s, const std::vector<uint8_t>& data);

/// One read() of at most maxlen bytes. Returns empty vector on EOF/error.
std::vector<uint8_t> recv_some(int fd, size_t maxlen = 65536, int timeout_ms = -1);

/// Reads until exactly n bytes or EOF/timeout; short result means failure.
std::vector<uint8_t> recv_exact(int fd, size_t n, int timeout_ms = 3000);

Endpoint peer_endpoint(int fd);
Endpoint local_endpoint(int fd);

/// Accept loop on its own thread; each connection gets a handler thread.
/// stop() unblocks everything and joins.
class TcpServer {
public:
    using Handler = std::function<void(Socket conn, Endpoint peer)>;

    TcpServer() = default;
    ~TcpServer();

    /// Binds and listens. port 0 picks an ephemeral port (see port()).
    bool start(const std::string& bind_addr, uint16_t port, Handler handler);
    void stop();
    bool running() const { return running_.load(); }
    uint16_t port() const { return port_; }

private:
    void accept_loop();

    Socket listener_;
    uint16_t port_ = 0;
    Handler handler_;
    std::atomic<bool> running_{false};
    std::thread accept_thread_;
    std::mutex mu_;
    std::vector<std::thread> conn_threads_;
    std::set<int> live_fds_;
};

// --- UDP -------------------------------------------------------------------

class UdpSocket {
public:
    UdpSocket() = default;
    ~UdpSocket() = default;

    /// Binds to 127.0.0.1:port (port 0 = ephemeral).
    bool bind_local(uint16_t port);
    uint16_t port() const { return port_; }
    bool valid() const { return sock_.valid(); }

    bool send_to(const std::string& host, uint16_t port, const std::vector<uint8_t>& payload);
    /// timeout_ms 0 = non-blocking poll; <0 = block forever.
    std::optional<std::vector<uint8_t>> recv(int timeout_ms);
    void shutdown();

private:
    Socket sock_;
    uint16_t port_ = 0;
};

}  // namespace windtrap::net
