#include "pulsectl/bench/control_api.hpp"

#include <deque>
#include <set>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "pulsectl/bench/capture.hpp"
#include "pulsectl/bench/json_codec.hpp"
#include "pulsectl/planner/plan.hpp"
#include "pulsectl/planner/plan_io.hpp"

namespace pulsectl::bench {

using nlohmann::json;
using proto::Opcode;

namespace {

bool changes_state(Opcode op) {
  switch (op) {
    case Opcode::SetAmplitude:
    case Opcode::SetDelay:
    case Opcode::SetEnable:
    case Opcode::LoadPattern:
    case Opcode::Arm:
      return true;
    default:
      return false;
  }
}

json command_to_json(const proto::Command& c) {
  json out = {{"opcode", to_string(c.opcode)}};
  if (proto::is_channel_scoped(c.opcode)) out["channel"] = ChannelId::from_wire(c.channel).label();
  out["value"] = c.opcode == Opcode::SetDelay ? json(proto::payload_to_delay(c.payload).value) : json(c.payload);
  return out;
}

json firing_to_json(const planner::Firing& f) {
  return {{"channel", f.channel.label()},
          {"amplitude", f.amplitude.value},
          {"delay", f.delay.value},
          {"start", f.timing.start},
          {"width", f.timing.width}};
}

planner::QkdSymbol symbol_from_json(const json& v) {
  if (v.is_string()) return planner::parse_symbol(v.get<std::string>());
  if (v.is_object() && v.contains("intensity") && v.contains("basis") && v.contains("bit") &&
      v["intensity"].is_string() && v["basis"].is_string() && v["bit"].is_number_integer()) {
    return planner::parse_symbol(v["intensity"].get<std::string>() + "," + v["basis"].get<std::string>() + "," +
                                 std::to_string(v["bit"].get<long long>()));
  }
  throw std::invalid_argument("symbol must be \"intensity,basis,bit\" or {intensity, basis, bit}");
}

std::string strip_query(const std::string& target) {
  return target.substr(0, target.find('?'));
}

}

ControlApiCore::ControlApiCore(proto::DeviceEmulator& device): device_(device), session_(device) {
  listener_id_ = device_.subscribe([this](const proto::Command& c, const proto::Reply& r, const proto::DeviceState& s) {
    if (!r.ok() || !changes_state(c.opcode)) return;
    auto state = to_json(s);
    state.erase("uptime_ms");
    std::lock_guard lock(event_mutex_);
    cache_ = s;
    publish({{"type", "state"}, {"cause", reply_to_json(c, r)}, {"state", std::move(state)}});
  });
  auto snap = device_.snapshot();
  std::lock_guard lock(event_mutex_);
  if (!cache_) cache_ = std::move(snap);
}

ControlApiCore::~ControlApiCore() {
  device_.unsubscribe(listener_id_);
}

// Caller holds event_mutex_.
void ControlApiCore::publish(json event) {
  event["seq"] = ++seq_;
  for (auto& [id, sink] : sinks_) sink(event);
}

std::size_t ControlApiCore::subscribe(EventSink sink) {
  std::lock_guard lock(event_mutex_);
  const auto id = next_sink_++;
  auto initial = to_json(*cache_);
  initial.erase("uptime_ms");
  sink({{"type", "state"}, {"seq", seq_}, {"cause", nullptr}, {"state", std::move(initial)}});
  sinks_.emplace(id, std::move(sink));
  return id;
}

void ControlApiCore::unsubscribe(std::size_t id) {
  std::lock_guard lock(event_mutex_);
  sinks_.erase(id);
}

uint64_t ControlApiCore::last_seq() const {
  std::lock_guard lock(event_mutex_);
  return seq_;
}

json ControlApiCore::state_event() const {
  json out;
  {
    std::lock_guard lock(event_mutex_);
    out = {{"type", "state"}, {"seq", seq_}, {"cause", nullptr}, {"state", to_json(*cache_)}};
  }
  out["state"]["uptime_ms"] = device_.snapshot().uptime_ms;
  return out;
}

ControlApiCore::Response ControlApiCore::error(int status, const std::string& code, const std::string& message) {
  return {status, {{"error", {{"code", code}, {"message", message}}}}};
}

ControlApiCore::Response ControlApiCore::state() const {
  auto ev = state_event();
  return {200, {{"seq", ev["seq"]}, {"state", ev["state"]}}};
}

ControlApiCore::Response ControlApiCore::command(const json& body) {
  proto::Command c;
  try {
    c = command_from_json(body);
  } catch (const RequestError& e) {
    return error(400, e.code(), e.what());
  }
  const auto frame = proto::encode_frame(c);
  std::vector<uint8_t> reply_bytes;
  {
    std::lock_guard lock(session_mutex_);
    reply_bytes = session_.feed(frame);
  }
  const auto reply = proto::decode_reply(reply_bytes);
  if (reply_bytes.size() != proto::frame_size || !std::holds_alternative<proto::Reply>(reply))
    return error(500, "device_error", "device returned no valid reply");
  return {200, reply_to_json(c, std::get<proto::Reply>(reply))};
}

ControlApiCore::Response ControlApiCore::capture(const json& body) {
  CaptureRequest req;
  try {
    req = capture_request_from_json(body);
  } catch (const RequestError& e) {
    return error(400, e.code(), e.what());
  }
  json result;
  try {
    result = to_json(capture_channel(device_, req.channel, req.config, req.timing));
  } catch (const std::exception& e) {
    return error(400, "bad_capture", e.what());
  }
  {
    std::lock_guard lock(event_mutex_);
    publish({{"type", "capture"}, {"capture", result}});
    result["seq"] = seq_;
  }
  return {200, std::move(result)};
}

ControlApiCore::Response ControlApiCore::plan(const json& body) {
  if (!body.is_object() || !body.contains("symbols") || !body["symbols"].is_array())
    return error(400, "bad_request", "plan body needs a 'symbols' array");
  if (body.contains("apply") && !body["apply"].is_boolean())
    return error(400, "bad_field", "'apply' must be a boolean");

  std::vector<planner::QkdSymbol> symbols;
  json errors = json::array();
  for (std::size_t i = 0; i < body["symbols"].size(); ++i) {
    try {
      symbols.push_back(symbol_from_json(body["symbols"][i]));
    } catch (const std::exception& e) {
      errors.push_back({{"index", i}, {"message", e.what()}});
    }
  }
  if (!errors.empty()) {
    auto r = error(422, "bad_symbols", "some symbols were rejected");
    r.body["error"]["symbols"] = std::move(errors);
    return r;
  }

  planner::PlannedSequence seq;
  try {
    seq = planner::plan_sequence(symbols, planner::ModulatorCalibration{});
  } catch (const planner::PlanError& e) {
    auto r = error(422, "bad_symbols", "some symbols were rejected");
    r.body["error"]["symbols"] = json::array({{{"index", e.symbol_index()}, {"message", e.what()}}});
    return r;
  }

  json slots = json::array();
  for (const auto& slot : seq.plan.slots) {
    json firings = json::array();
    for (const auto& f : slot.firings) firings.push_back(firing_to_json(f));
    slots.push_back({{"index", slot.index}, {"symbol", planner::format_symbol(slot.symbol)}, {"firings", firings}});
  }
  json commands = json::array();
  for (const auto& c : seq.commands) commands.push_back(command_to_json(c));
  json out = {{"slots", slots}, {"commands", commands}, {"text", planner::format_plan(seq.plan)}};

  if (body.value("apply", false)) {
    std::size_t acked = 0;
    json naks = json::array();
    for (std::size_t i = 0; i < seq.commands.size(); ++i) {
      auto r = command(command_to_json(seq.commands[i]));
      if (r.status == 200 && r.body["status"] == "ACK") ++acked;
      else naks.push_back({{"index", i}, {"reply", r.body}});
    }
    out["applied"] = {{"acked", acked}, {"naks", naks}};
  }
  return {200, std::move(out)};
}

ControlApiCore::Response ControlApiCore::handle(const std::string& method, const std::string& target,
                                                const std::string& body) {
  const auto path = strip_query(target);
  using Handler = Response (ControlApiCore::*)(const json&);
  Handler post = nullptr;
  if (path == "/api/command") post = &ControlApiCore::command;
  else if (path == "/api/capture") post = &ControlApiCore::capture;
  else if (path == "/api/plan") post = &ControlApiCore::plan;

  if (path == "/api/state") {
    if (method != "GET") return error(405, "method_not_allowed", "use GET");
    return state();
  }
  if (!post) return error(404, "not_found", "no endpoint " + path);
  if (method != "POST") return error(405, "method_not_allowed", "use POST");
  auto parsed = json::parse(body, nullptr, false);
  if (parsed.is_discarded()) return error(400, "bad_json", "request body is not valid JSON");
  try {
    return (this->*post)(parsed);
  } catch (const std::exception& e) {
    return error(500, "internal", e.what());
  }
}

json ControlApiCore::handle_message(const std::string& text) {
  auto msg = json::parse(text, nullptr, false);
  if (msg.is_discarded() || !msg.is_object())
    return {{"type", "error"}, {"id", nullptr}, {"error", {{"code", "bad_json"}, {"message", "message is not a JSON object"}}}};
  const json id = msg.contains("id") ? msg["id"] : json(nullptr);
  const std::string type = msg.contains("type") && msg["type"].is_string() ? msg["type"].get<std::string>() : "";

  Response r;
  if (type == "state") r = state();
  else if (type == "command") r = command(msg.value("body", json::object()));
  else if (type == "capture") r = capture(msg.value("body", json::object()));
  else if (type == "plan") r = plan(msg.value("body", json::object()));
  else r = error(400, "bad_type", "'type' must be state, command, capture or plan");

  if (r.status != 200) return {{"type", "error"}, {"id", id}, {"status", r.status}, {"error", r.body["error"]}};
  return {{"type", "reply"}, {"id", id}, {"request", type}, {"body", std::move(r.body)}};
}

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace asio = boost::asio;
using tcp = asio::ip::tcp;

struct ControlApiServer::Impl {
  Impl(ControlApiCore& core, const std::string& host, uint16_t port)
      : core(core), acceptor(ioc, tcp::endpoint(asio::ip::make_address(host), port)) {}

  ControlApiCore& core;
  asio::io_context ioc;
  tcp::acceptor acceptor;
  std::thread thread;
  std::mutex sink_mutex;
  std::set<std::size_t> sinks;
  bool stopped = false;

  void accept();

  std::size_t add_sink(ControlApiCore::EventSink sink) {
    std::lock_guard lock(sink_mutex);
    if (stopped) throw std::runtime_error("server stopped");
    const auto id = core.subscribe(std::move(sink));
    sinks.insert(id);
    return id;
  }

  void remove_sink(std::size_t id) {
    std::lock_guard lock(sink_mutex);
    if (sinks.erase(id)) core.unsubscribe(id);
  }

  void drop_all_sinks() {
    std::lock_guard lock(sink_mutex);
    stopped = true;
    for (auto id : sinks) core.unsubscribe(id);
    sinks.clear();
  }
};

namespace {

class WsSession: public std::enable_shared_from_this<WsSession> {
  public:
    WsSession(tcp::socket socket, ControlApiServer::Impl& server): ws_(std::move(socket)), server_(server) {}
    ~WsSession() {
      if (sink_) server_.remove_sink(*sink_);
    }

    void start(http::request<http::string_body> req) {
      ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
      ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
    }

  private:
    void on_accept(beast::error_code ec) {
      if (ec) return;
      std::weak_ptr<WsSession> weak = weak_from_this();
      auto& ioc = server_.ioc;
      try {
        sink_ = server_.add_sink([weak, &ioc](const json& event) {
          auto text = std::make_shared<std::string>(event.dump());
          asio::post(ioc, [weak, text] {
            if (auto self = weak.lock()) self->send(text);
          });
        });
      } catch (const std::exception&) {
        return;
      }
      read();
    }

    void read() {
      ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
    }

    void on_read(beast::error_code ec) {
      if (ec) return;
      const auto text = beast::buffers_to_string(buffer_.data());
      buffer_.consume(buffer_.size());
      send(std::make_shared<std::string>(server_.core.handle_message(text).dump()));
      read();
    }

    void send(std::shared_ptr<std::string> text) {
      queue_.push_back(std::move(text));
      if (queue_.size() == 1) write();
    }

    void write() {
      ws_.text(true);
      ws_.async_write(asio::buffer(*queue_.front()),
                      [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_write(ec); });
    }

    void on_write(beast::error_code ec) {
      if (ec) {
        queue_.clear();
        return;
      }
      queue_.pop_front();
      if (!queue_.empty()) write();
    }

    websocket::stream<beast::tcp_stream> ws_;
    ControlApiServer::Impl& server_;
    beast::flat_buffer buffer_;
    std::deque<std::shared_ptr<std::string>> queue_;
    std::optional<std::size_t> sink_;
};

class HttpSession: public std::enable_shared_from_this<HttpSession> {
  public:
    HttpSession(tcp::socket socket, ControlApiServer::Impl& server): stream_(std::move(socket)), server_(server) {}

    void start() { read(); }

  private:
    void read() {
      req_ = {};
      stream_.expires_after(std::chrono::seconds(30));
      http::async_read(stream_, buffer_, req_,
                       [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
    }

    void on_read(beast::error_code ec) {
      if (ec == http::error::end_of_stream) {
        stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
        return;
      }
      if (ec) return;

      if (websocket::is_upgrade(req_) && strip_query(std::string(req_.target())) == "/api/events") {
        stream_.expires_never();
        std::make_shared<WsSession>(stream_.release_socket(), server_)->start(std::move(req_));
        return;
      }

      ControlApiCore::Response r;
      if (websocket::is_upgrade(req_))
        r = ControlApiCore::error(404, "not_found", "streaming is served at /api/events");
      else
        r = server_.core.handle(std::string(req_.method_string()), std::string(req_.target()), req_.body());

      auto res = std::make_shared<http::response<http::string_body>>(static_cast<http::status>(r.status),
                                                                       req_.version());
      res->set(http::field::content_type, "application/json");
      res->keep_alive(req_.keep_alive());
      res->body() = r.body.dump();
      res->prepare_payload();
      http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
        if (ec) return;
        if (!res->keep_alive()) {
          self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
          return;
        }
        self->read();
      });
    }

    beast::tcp_stream stream_;
    ControlApiServer::Impl& server_;
    beast::flat_buffer buffer_;
    http::request<http::string_body> req_;
};

}

void ControlApiServer::Impl::accept() {
  acceptor.async_accept(asio::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;
    std::make_shared<HttpSession>(std::move(socket), *this)->start();
    accept();
  });
}

ControlApiServer::ControlApiServer(proto::DeviceEmulator& device, const std::string& bind_host, uint16_t port)
    : core_(device), impl_(std::make_unique<Impl>(core_, bind_host, port)) {
  port_ = impl_->acceptor.local_endpoint().port();
  impl_->accept();
  impl_->thread = std::thread([impl = impl_.get()] { impl->ioc.run(); });
}

ControlApiServer::~ControlApiServer() {
  stop();
}

uint16_t ControlApiServer::port() const {
  return port_;
}

void ControlApiServer::stop() {
  if (!impl_->thread.joinable()) return;
  impl_->drop_all_sinks();
  asio::post(impl_->ioc, [impl = impl_.get()] {
    beast::error_code ec;
    impl->acceptor.close(ec);
    impl->ioc.stop();
  });
  impl_->thread.join();
}

}
