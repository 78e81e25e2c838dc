#include "windtrap/netutil.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace windtrap::net {

Socket::~Socket() { close(); }

Socket& Socket::operator=(Socket&& o) noexcept {
    if (this != &o) {
        close();
        fd_ = o.fd_;
        o.fd_ = -1;
    }
    return *this;
}

void Socket::close() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

void Socket::shutdown_both() {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

namespace {

bool wait_readable(int fd, int timeout_ms) {
    if (timeout_ms < 0) return true;
    pollfd p{fd, POLLIN, 0};
    int r = ::poll(&p, 1, timeout_ms);
    return r > 0 && (p.revents & (POLLIN | POLLHUP | POLLERR));
}

sockaddr_in make_addr(const std::string& host, uint16_t port) {
    sockaddr_in a{};
    a.sin_family = AF_INET;
    a.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &a.sin_addr) != 1) {
        a.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    }
    return a;
}

Endpoint to_endpoint(const sockaddr_in& a) {
    char buf[INET_ADDRSTRLEN] = {0};
    ::inet_ntop(AF_INET, &a.sin_addr, buf, sizeof(buf));
    return Endpoint{buf, ntohs(a.sin_port)};
}

}  // namespace

std::optional<Socket> tcp_connect(const std::string& host, uint16_t port, int timeout_ms) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) return std::nullopt;
    Socket s(fd);

    int flags = ::fcntl(fd, F_GETFL, 0);
    ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);

    sockaddr_in addr = make_addr(host, port);
    int r = ::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
    if (r < 0 && errno != EINPROGRESS) return std::nullopt;
    if (r < 0) {
        pollfd p{fd, POLLOUT, 0};
        if (::poll(&p, 1, timeout_ms) <= 0) return std::nullopt;
        int err = 0;
        socklen_t len = sizeof(err);
        ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
        if (err != 0) return std::nullopt;
    }
    ::fcntl(fd, F_SETFL, flags);  // back to blocking
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    return s;
}

bool send_all(int fd, const uint8_t* data, size_t len) {
    size_t off = 0;
    while (off < len) {
        ssize_t n = ::send(fd, data + off, len - off, MSG_NOSIGNAL);
        if (n <= 0) {
            if (n < 0 && (errno == EINTR)) continue;
            return false;
        }
        off += static_cast<size_t>(n);
    }
    return true;
}

bool send_all(const Socket& s, const std::vector<uint8_t>& data) {
    return send_all(s.fd(), data.data(), data.size());
}

std::vector<uint8_t> recv_some(int fd, size_t maxlen, int timeout_ms) {
    if (!wait_readable(fd, timeout_ms)) return {};
    std::vector<uint8_t> buf(maxlen);
    ssize_t n = ::recv(fd, buf.data(), buf.size(), 0);
    if (n <= 0) return {};
    buf.resize(static_cast<size_t>(n));
    return buf;
}

std::vector<uint8_t> recv_exact(int fd, size_t n, int timeout_ms) {
    std::vector<uint8_t> out;
    out.reserve(n);
    while (out.size() < n) {
        if (!wait_readable(fd, timeout_ms)) return out;
        uint8_t chunk[4096];
        size_t want = std::min(sizeof(chunk), n - out.size());
        ssize_t r = ::recv(fd, chunk, want, 0);
        if (r <= 0) return out;
        out.insert(out.end(), chunk, chunk + r);
    }
    return out;
}

Endpoint peer_endpoint(int fd) {
    sockaddr_in a{};
    socklen_t len = sizeof(a);
    if (::getpeername(fd, reinterpret_cast<sockaddr*>(&a), &len) != 0) return {};
    return to_endpoint(a);
}

Endpoint local_endpoint(int fd) {
    sockaddr_in a{};
    socklen_t len = sizeof(a);
    if (::getsockname(fd, reinterpret_cast<sockaddr*>(&a), &len) != 0) return {};
    return to_endpoint(a);
}

// --- TcpServer ---------------------------------------------------------------

TcpServer::~TcpServer() { stop(); }

bool TcpServer::start(const std::string& bind_addr, uint16_t port, Handler handler) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) return false;
    listener_ = Socket(fd);
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

    sockaddr_in addr = make_addr(bind_addr, port);
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) return false;
    if (::listen(fd, 16) != 0) return false;

    port_ = local_endpoint(fd).port;
    handler_ = std::move(handler);
    running_.store(true);
    accept_thread_ = std::thread([this] { accept_loop(); });
    return true;
}

void TcpServer::accept_loop() {
    while (running_.load()) {
        sockaddr_in peer{};
        socklen_t len = sizeof(peer);
        int cfd = ::accept(listener_.fd(), reinterpret_cast<sockaddr*>(&peer), &len);
        if (cfd < 0) {
            if (!running_.load()) break;
            if (errno == EINTR) continue;
            break;
        }
        int one = 1;
        ::setsockopt(cfd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
        Endpoint ep = to_endpoint(peer);
        std::lock_guard lk(mu_);
        live_fds_.insert(cfd);
        conn_threads_.emplace_back([this, cfd, ep] {
            handler_(Socket(cfd), ep);
            std::lock_guard lk2(mu_);
            live_fds_.erase(cfd);
        });
    }
}

void TcpServer::stop() {
    if (!running_.exchange(false)) return;
    listener_.shutdown_both();
    listener_.close();
    {
        std::lock_guard lk(mu_);
        for (int fd : live_fds_) ::shutdown(fd, SHUT_RDWR);
    }
    if (accept_thread_.joinable()) accept_thread_.join();
    // conn_threads_ may still be appending under mu_ only from accept_loop, which is joined
    std::vector<std::thread> threads;
    {
        std::lock_guard lk(mu_);
        threads.swap(conn_threads_);
    }
    for (auto& t : threads)
        if (t.joinable()) t.join();
}

// --- UdpSocket ---------------------------------------------------------------

bool UdpSocket::bind_local(uint16_t port) {
    int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd < 0) return false;
    sock_ = Socket(fd);
    sockaddr_in addr = make_addr("127.0.0.1", port);
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) return false;
    port_ = local_endpoint(fd).port;
    return true;
}

bool UdpSocket::send_to(const std::string& host, uint16_t port, const std::vector<uint8_t>& payload) {
    if (!sock_.valid()) return false;
    sockaddr_in addr = make_addr(host, port);
    ssize_t n = ::sendto(sock_.fd(), payload.data(), payload.size(), 0,
                         reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
    return n == static_cast<ssize_t>(payload.size());
}

std::optional<std::vector<uint8_t>> UdpSocket::recv(int timeout_ms) {
    if (!sock_.valid()) return std::nullopt;
    if (!wait_readable(sock_.fd(), timeout_ms)) return std::nullopt;
    std::vector<uint8_t> buf(2048);
    ssize_t n = ::recvfrom(sock_.fd(), buf.data(), buf.size(), 0, nullptr, nullptr);
    if (n < 0) return std::nullopt;
    buf.resize(static_cast<size_t>(n));
    return buf;
}

void UdpSocket::shutdown() { sock_.close(); }

}  // namespace windtrap::net
