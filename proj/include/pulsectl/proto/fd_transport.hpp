#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "pulsectl/proto/transport.hpp"

namespace pulsectl::proto {

// Transport over a stream file descriptor (TCP socket or tty). Owns the fd.
class FdTransport: public Transport {
  public:
    FdTransport(int fd, std::string name);
    ~FdTransport() override;
    FdTransport(const FdTransport&) = delete;
    FdTransport& operator=(const FdTransport&) = delete;

    void send(std::span<const uint8_t> bytes) override;
    std::optional<std::vector<uint8_t>> receive(std::size_t n, std::chrono::milliseconds timeout) override;
    void discard_input() override;
    std::string name() const override { return name_; }

  private:
    int fd_;
    std::string name_;
    std::vector<uint8_t> pending_;
};

std::unique_ptr<FdTransport> connect_tcp(const std::string& host, uint16_t port);
// Raw 8N1 at the given baud rate.
std::unique_ptr<FdTransport> open_serial(const std::string& path, int baud = 115200);

// Serves one emulator on every accepted TCP connection, each with its own session.
class TcpDeviceServer {
  public:
    // Port 0 picks an ephemeral port; see port().
    TcpDeviceServer(DeviceEmulator& device, const std::string& bind_host, uint16_t port);
    ~TcpDeviceServer();
    TcpDeviceServer(const TcpDeviceServer&) = delete;
    TcpDeviceServer& operator=(const TcpDeviceServer&) = delete;

    uint16_t port() const { return port_; }
    void stop();

  private:
    void accept_loop();
    void serve(int fd);

    DeviceEmulator& device_;
    int listen_fd_ = -1;
    uint16_t port_ = 0;
    std::atomic<bool> stopping_{false};
    std::thread acceptor_;
    std::mutex workers_mutex_;
    std::vector<std::thread> workers_;
};

// Device end of a serial line (or pty master): feeds bytes from fd into a session.
class FdDeviceLink {
  public:
    FdDeviceLink(DeviceEmulator& device, int fd);
    ~FdDeviceLink();
    FdDeviceLink(const FdDeviceLink&) = delete;
    FdDeviceLink& operator=(const FdDeviceLink&) = delete;

  private:
    int fd_;
    std::atomic<bool> stopping_{false};
    DeviceSession session_;
    std::thread worker_;
};

}
