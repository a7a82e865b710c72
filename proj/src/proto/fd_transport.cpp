#include "pulsectl/proto/fd_transport.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <termios.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace pulsectl::proto {

namespace {

constexpr int poll_slice_ms = 50;

[[noreturn]] void fail(const std::string& what) {
  throw TransportError(what + ": " + std::strerror(errno));
}

void write_all(int fd, std::span<const uint8_t> bytes) {
  std::size_t done = 0;
  while (done < bytes.size()) {
    const auto n = ::write(fd, bytes.data() + done, bytes.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno == EAGAIN) {
        pollfd p{fd, POLLOUT, 0};
        ::poll(&p, 1, poll_slice_ms);
        continue;
      }
      fail("write");
    }
    done += static_cast<std::size_t>(n);
  }
}

// Serves a session until the peer closes or stop is raised.
void pump(int fd, DeviceSession& session, const std::atomic<bool>& stop) {
  uint8_t buf[256];
  while (!stop) {
    pollfd p{fd, POLLIN, 0};
    const int ready = ::poll(&p, 1, poll_slice_ms);
    if (ready < 0 && errno != EINTR) return;
    if (ready <= 0) continue;
    const auto n = ::read(fd, buf, sizeof buf);
    if (n < 0 && (errno == EINTR || errno == EAGAIN)) continue;
    if (n <= 0) return;
    const auto reply = session.feed(std::span<const uint8_t>(buf, static_cast<std::size_t>(n)));
    try {
      write_all(fd, reply);
    } catch (const TransportError&) {
      return;
    }
  }
}

speed_t baud_constant(int baud) {
  switch (baud) {
    case 9600: return B9600;
    case 19200: return B19200;
    case 38400: return B38400;
    case 57600: return B57600;
    case 115200: return B115200;
    case 230400: return B230400;
    case 460800: return B460800;
    case 921600: return B921600;
    default: throw TransportError("unsupported baud rate " + std::to_string(baud));
  }
}

}

FdTransport::FdTransport(int fd, std::string name): fd_(fd), name_(std::move(name)) {}

FdTransport::~FdTransport() {
  if (fd_ >= 0) ::close(fd_);
}

void FdTransport::send(std::span<const uint8_t> bytes) { write_all(fd_, bytes); }

std::optional<std::vector<uint8_t>> FdTransport::receive(std::size_t n, std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  uint8_t buf[256];
  while (pending_.size() < n) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    pollfd p{fd_, POLLIN, 0};
    const int ready = ::poll(&p, 1, static_cast<int>(left.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      fail("poll");
    }
    if (ready == 0) return std::nullopt;
    const auto got = ::read(fd_, buf, sizeof buf);
    if (got < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      fail("read");
    }
    if (got == 0) throw TransportError(name_ + ": connection closed by device");
    pending_.insert(pending_.end(), buf, buf + got);
  }
  std::vector<uint8_t> out(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(n));
  pending_.erase(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

void FdTransport::discard_input() {
  pending_.clear();
  uint8_t buf[256];
  while (true) {
    pollfd p{fd_, POLLIN, 0};
    if (::poll(&p, 1, 0) <= 0) return;
    if (::read(fd_, buf, sizeof buf) <= 0) return;
  }
}

std::unique_ptr<FdTransport> connect_tcp(const std::string& host, uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  if (int rc = ::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &found); rc != 0)
    throw TransportError("resolve " + host + ": " + ::gai_strerror(rc));
  int fd = -1;
  for (auto* ai = found; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(found);
  if (fd < 0) fail("connect " + host + ":" + std::to_string(port));
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return std::make_unique<FdTransport>(fd, "tcp");
}

std::unique_ptr<FdTransport> open_serial(const std::string& path, int baud) {
  const speed_t speed = baud_constant(baud);
  const int fd = ::open(path.c_str(), O_RDWR | O_NOCTTY | O_NONBLOCK);
  if (fd < 0) fail("open " + path);
  termios tio{};
  if (::tcgetattr(fd, &tio) != 0) {
    ::close(fd);
    fail("tcgetattr " + path);
  }
  ::cfmakeraw(&tio);
  tio.c_cflag |= CLOCAL | CREAD;
  tio.c_cflag &= ~(CSTOPB | PARENB);
  ::cfsetispeed(&tio, speed);
  ::cfsetospeed(&tio, speed);
  if (::tcsetattr(fd, TCSANOW, &tio) != 0) {
    ::close(fd);
    fail("tcsetattr " + path);
  }
  return std::make_unique<FdTransport>(fd, "serial");
}

TcpDeviceServer::TcpDeviceServer(DeviceEmulator& device, const std::string& bind_host, uint16_t port)
    : device_(device) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) fail("socket");
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, bind_host.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    throw TransportError("bad IPv4 bind address " + bind_host);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listen_fd_, 8) != 0) {
    const int saved = errno;
    ::close(listen_fd_);
    errno = saved;
    fail("bind " + bind_host + ":" + std::to_string(port));
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  acceptor_ = std::thread([this] { accept_loop(); });
}

TcpDeviceServer::~TcpDeviceServer() { stop(); }

void TcpDeviceServer::stop() {
  if (stopping_.exchange(true)) return;
  if (acceptor_.joinable()) acceptor_.join();
  std::lock_guard lock(workers_mutex_);
  for (auto& t : workers_)
    if (t.joinable()) t.join();
  ::close(listen_fd_);
}

void TcpDeviceServer::accept_loop() {
  while (!stopping_) {
    pollfd p{listen_fd_, POLLIN, 0};
    if (::poll(&p, 1, poll_slice_ms) <= 0) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    std::lock_guard lock(workers_mutex_);
    workers_.emplace_back([this, fd] { serve(fd); });
  }
}

void TcpDeviceServer::serve(int fd) {
  DeviceSession session(device_);
  pump(fd, session, stopping_);
  ::close(fd);
}

FdDeviceLink::FdDeviceLink(DeviceEmulator& device, int fd): fd_(fd), session_(device) {
  worker_ = std::thread([this] { pump(fd_, session_, stopping_); });
}

FdDeviceLink::~FdDeviceLink() {
  stopping_ = true;
  if (worker_.joinable()) worker_.join();
}

}
