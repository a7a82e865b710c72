#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include <json.hpp>

#include "pulsectl/proto/emulator.hpp"

namespace pulsectl::bench {

// Transport-independent half of the control API. Commands go through the same
// frame codec and device session as the serial link, one at a time.
class ControlApiCore {
  public:
    using EventSink = std::function<void(const nlohmann::json&)>;

    struct Response {
      int status = 200;
      nlohmann::json body;
    };

    explicit ControlApiCore(proto::DeviceEmulator& device);
    ~ControlApiCore();
    ControlApiCore(const ControlApiCore&) = delete;
    ControlApiCore& operator=(const ControlApiCore&) = delete;

    // GET /api/state
    Response state() const;
    // POST /api/command
    Response command(const nlohmann::json& body);
    // POST /api/capture
    Response capture(const nlohmann::json& body);
    // POST /api/plan
    Response plan(const nlohmann::json& body);

    // Routes a request by method and target; body is the raw request text.
    Response handle(const std::string& method, const std::string& target, const std::string& body);
    // One message from a streaming client; returns the reply message.
    nlohmann::json handle_message(const std::string& text);

    // Every event is delivered to every sink in sequence order. Sinks run on the
    // thread that caused the event and must not call back into the core.
    std::size_t subscribe(EventSink sink);
    void unsubscribe(std::size_t id);

    // "state" event carrying the current state and the last issued sequence number.
    nlohmann::json state_event() const;
    uint64_t last_seq() const;

    static Response error(int status, const std::string& code, const std::string& message);

  private:
    void publish(nlohmann::json event);

    proto::DeviceEmulator& device_;
    std::mutex session_mutex_;
    proto::DeviceSession session_;
    mutable std::mutex event_mutex_;
    std::map<std::size_t, EventSink> sinks_;
    std::size_t next_sink_ = 0;
    uint64_t seq_ = 0;
    std::optional<proto::DeviceState> cache_;
    std::size_t listener_id_;
};

// HTTP and a WebSocket event stream (/api/events) on one port, served by a
// single I/O thread.
class ControlApiServer {
  public:
    // Port 0 picks a free port. Starts serving immediately.
    ControlApiServer(proto::DeviceEmulator& device, const std::string& bind_host, uint16_t port);
    ~ControlApiServer();
    ControlApiServer(const ControlApiServer&) = delete;
    ControlApiServer& operator=(const ControlApiServer&) = delete;

    uint16_t port() const;
    ControlApiCore& core() { return core_; }
    void stop();

    struct Impl;

  private:
    ControlApiCore core_;
    uint16_t port_ = 0;
    std::unique_ptr<Impl> impl_;
};

}
