#pragma once

// Minimal blocking TCP wrappers for the CLI and the loopback tests. POSIX only.

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <stdexcept>
#include <string>

#include "skewdh/wire.hpp"

namespace skewdh {

class TcpStream {
public:
    TcpStream() = default;
    explicit TcpStream(int fd) : fd_(fd) {}
    TcpStream(TcpStream&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
    TcpStream& operator=(TcpStream&& other) noexcept {
        if (this != &other) {
            close_fd();
            fd_ = other.fd_;
            other.fd_ = -1;
        }
        return *this;
    }
    TcpStream(const TcpStream&) = delete;
    TcpStream& operator=(const TcpStream&) = delete;
    ~TcpStream() { close_fd(); }

    static TcpStream connect_to(const std::string& host, uint16_t port) {
        addrinfo hints{};
        hints.ai_family = AF_UNSPEC;
        hints.ai_socktype = SOCK_STREAM;
        addrinfo* res = nullptr;
        if (getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0)
            throw std::runtime_error("cannot resolve " + host);
        int fd = -1;
        for (addrinfo* ai = res; ai; ai = ai->ai_next) {
            fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
            if (fd < 0) continue;
            if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
            ::close(fd);
            fd = -1;
        }
        freeaddrinfo(res);
        if (fd < 0) throw std::runtime_error("cannot connect to " + host + ":" + std::to_string(port));
        return TcpStream(fd);
    }

    bool read_exact(uint8_t* buf, size_t n) const {
        size_t got = 0;
        while (got < n) {
            ssize_t r = ::read(fd_, buf + got, n - got);
            if (r <= 0) return false;
            got += size_t(r);
        }
        return true;
    }

    bool write_all(const uint8_t* buf, size_t n) const {
        size_t sent = 0;
        while (sent < n) {
            ssize_t w = ::write(fd_, buf + sent, n - sent);
            if (w <= 0) return false;
            sent += size_t(w);
        }
        return true;
    }

    ReadFn reader() const {
        return [this](uint8_t* buf, size_t n) { return read_exact(buf, n); };
    }
    WriteFn writer() const {
        return [this](const uint8_t* buf, size_t n) { return write_all(buf, n); };
    }

private:
    void close_fd() {
        if (fd_ >= 0) ::close(fd_);
        fd_ = -1;
    }
    int fd_ = -1;
};

class TcpListener {
public:
    // port 0 binds an ephemeral port; port() reports the actual one.
    explicit TcpListener(uint16_t port) {
        fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd_ < 0) throw std::runtime_error("socket() failed");
        int yes = 1;
        ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        addr.sin_port = htons(port);
        if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
            ::close(fd_);
            throw std::runtime_error("bind failed: " + std::string(std::strerror(errno)));
        }
        if (::listen(fd_, 8) != 0) {
            ::close(fd_);
            throw std::runtime_error("listen failed");
        }
        socklen_t len = sizeof(addr);
        ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
        port_ = ntohs(addr.sin_port);
    }
    ~TcpListener() {
        if (fd_ >= 0) ::close(fd_);
    }
    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;

    uint16_t port() const { return port_; }

    TcpStream accept_one() const {
        int cfd = ::accept(fd_, nullptr, nullptr);
        if (cfd < 0) throw std::runtime_error("accept failed");
        return TcpStream(cfd);
    }

private:
    int fd_ = -1;
    uint16_t port_ = 0;
};

}  // namespace skewdh
