#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "locpir/protocol.hpp"

namespace locpir {

class NetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

[[noreturn]] inline void sys_error(const std::string& what)
{
    throw NetError(what + ": " + std::strerror(errno));
}

inline sockaddr_in parse_addr(const std::string& addr)
{
    const size_t colon = addr.rfind(':');
    if (colon == std::string::npos)
        throw NetError("address must look like host:port, got '" + addr + "'");
    std::string host = addr.substr(0, colon);
    const std::string port_str = addr.substr(colon + 1);
    if (host == "localhost" || host.empty())
        host = "127.0.0.1";

    int port = 0;
    try {
        port = std::stoi(port_str);
    } catch (const std::exception&) {
        port = -1;
    }
    if (port < 0 || port > 65535)
        throw NetError("bad port '" + port_str + "'");

    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_port = htons(static_cast<uint16_t>(port));
    if (inet_pton(AF_INET, host.c_str(), &sa.sin_addr) != 1)
        throw NetError("cannot parse IPv4 host '" + host + "'");
    return sa;
}

}  // namespace detail

// Move-only owning socket.
class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) : fd_(fd) {}
    ~Socket() { close(); }

    Socket(Socket&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }
    Socket& operator=(Socket&& o) noexcept
    {
        if (this != &o) {
            close();
            fd_ = o.fd_;
            o.fd_ = -1;
        }
        return *this;
    }
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;

    int fd() const { return fd_; }
    bool valid() const { return fd_ >= 0; }

    void close()
    {
        if (fd_ >= 0) {
            ::close(fd_);
            fd_ = -1;
        }
    }

private:
    int fd_ = -1;
};

inline void send_all(const Socket& s, const uint8_t* data, size_t len)
{
    size_t sent = 0;
    while (sent < len) {
        const ssize_t k = ::send(s.fd(), data + sent, len - sent, MSG_NOSIGNAL);
        if (k < 0) {
            if (errno == EINTR)
                continue;
            detail::sys_error("send");
        }
        sent += static_cast<size_t>(k);
    }
}

// False only on a clean EOF before the first byte.
inline bool recv_all(const Socket& s, uint8_t* data, size_t len)
{
    size_t got = 0;
    while (got < len) {
        const ssize_t k = ::recv(s.fd(), data + got, len - got, 0);
        if (k < 0) {
            if (errno == EINTR)
                continue;
            detail::sys_error("recv");
        }
        if (k == 0) {
            if (got == 0)
                return false;
            throw NetError("connection closed mid-frame");
        }
        got += static_cast<size_t>(k);
    }
    return true;
}

inline void send_frame(const Socket& s, const WireFrame& frame)
{
    const std::vector<uint8_t> bytes = frame.encode();
    send_all(s, bytes.data(), bytes.size());
}

// One frame, or nullopt when the peer closed the connection cleanly.
inline std::optional<WireFrame> recv_frame(const Socket& s)
{
    std::vector<uint8_t> bytes(kFrameHeaderSize);
    if (!recv_all(s, bytes.data(), bytes.size()))
        return std::nullopt;

    ByteReader header(bytes);
    header.bytes(4 + 2 + 1);  // magic, version, type: validated in decode
    const uint32_t payload_len = header.u32();
    if (payload_len > (64u << 20))
        throw NetError("frame payload exceeds the 64 MiB sanity cap");

    bytes.resize(kFrameHeaderSize + payload_len);
    if (payload_len &&
        !recv_all(s, bytes.data() + kFrameHeaderSize, payload_len))
        throw NetError("connection closed mid-frame");
    return WireFrame::decode(bytes);
}

class TcpListener {
public:
    // Port 0 picks an ephemeral port; read it back via port().
    explicit TcpListener(const std::string& addr)
    {
        sockaddr_in sa = detail::parse_addr(addr);
        sock_ = Socket(::socket(AF_INET, SOCK_STREAM, 0));
        if (!sock_.valid())
            detail::sys_error("socket");
        const int one = 1;
        ::setsockopt(sock_.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
        if (::bind(sock_.fd(), reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0)
            detail::sys_error("bind");
        if (::listen(sock_.fd(), 16) != 0)
            detail::sys_error("listen");

        socklen_t len = sizeof(sa);
        if (::getsockname(sock_.fd(), reinterpret_cast<sockaddr*>(&sa), &len) != 0)
            detail::sys_error("getsockname");
        port_ = ntohs(sa.sin_port);
    }

    uint16_t port() const { return port_; }

    // Blocks up to timeout_ms; invalid Socket when nothing arrived.
    Socket accept(int timeout_ms = 100)
    {
        pollfd pfd{sock_.fd(), POLLIN, 0};
        const int rc = ::poll(&pfd, 1, timeout_ms);
        if (rc < 0) {
            if (errno == EINTR)
                return Socket();
            detail::sys_error("poll");
        }
        if (rc == 0)
            return Socket();
        const int fd = ::accept(sock_.fd(), nullptr, nullptr);
        if (fd < 0)
            detail::sys_error("accept");
        return Socket(fd);
    }

private:
    Socket sock_;
    uint16_t port_ = 0;
};

inline Socket tcp_connect(const std::string& addr)
{
    sockaddr_in sa = detail::parse_addr(addr);
    Socket s(::socket(AF_INET, SOCK_STREAM, 0));
    if (!s.valid())
        detail::sys_error("socket");
    if (::connect(s.fd(), reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0)
        detail::sys_error("connect");
    return s;
}

// Request/response loop for one connection; returns when the peer hangs up.
inline void serve_connection(Server& server, Socket sock)
{
    uint64_t bound = 0;
    try {
        while (std::optional<WireFrame> frame = recv_frame(sock))
            send_frame(sock, server.handle(bound, *frame));
    } catch (const NetError&) {
        // peer vanished mid-frame; drop the connection
    }
}

// Accept loop with one thread per connection; polls `stop` between accepts.
inline void serve(Server& server, TcpListener& listener, std::atomic<bool>& stop)
{
    std::vector<std::thread> workers;
    while (!stop.load()) {
        Socket sock = listener.accept();
        if (sock.valid())
            workers.emplace_back(
                [&server, s = std::move(sock)]() mutable {
                    serve_connection(server, std::move(s));
                });
    }
    for (std::thread& t : workers)
        t.join();
}

}  // namespace locpir
