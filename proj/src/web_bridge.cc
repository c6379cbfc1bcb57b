// Copyright 2026 The Auralab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "auralab/web_bridge.h"

#include <deque>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "json.hpp"

namespace auralab {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using nlohmann::json;

namespace {

std::string Field(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw BridgeError(std::string("missing string field '") + key + "'");
  }
  return j.at(key).get<std::string>();
}

float Number(const json& j, size_t i) {
  if (!j.at(i).is_number()) throw BridgeError("expected a number");
  return j.at(i).get<float>();
}

}  // namespace

OscMessage TranslateClientJson(std::string_view text) {
  namespace a = osc_address;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception&) {
    throw BridgeError("message is not JSON");
  }
  if (!j.is_object()) throw BridgeError("message must be an object");
  const std::string type = Field(j, "type");
  auto msg = [](std::string_view address, std::vector<OscArg> args = {}) {
    return OscMessage{std::string(address), std::move(args)};
  };
  try {
    if (type == "seat") return msg(a::kSeat, {Field(j, "id")});
    if (type == "play") return msg(a::kUiPlay, {Field(j, "label")});
    if (type == "stop") return msg(a::kUiStop);
    if (type == "rating") {
      if (!j.contains("value") || !j.at("value").is_number_integer()) {
        throw BridgeError("rating value must be an integer");
      }
      const auto v = j.at("value").get<int64_t>();
      if (v < INT32_MIN || v > INT32_MAX) throw BridgeError("rating value overflows");
      return msg(a::kUiRating,
                 {Field(j, "attribute"), Field(j, "label"), int32_t(v)});
    }
    if (type == "source") return msg(a::kUiSource, {Field(j, "id")});
    if (type == "trial_next") return msg(a::kUiTrialNext);
    if (type == "info") return msg(a::kUiInfo, {Field(j, "attribute")});
    if (type == "position") {
      const json& p = j.at("position");
      if (!p.is_array() || p.size() != 3) throw BridgeError("position needs 3 numbers");
      return msg(a::kHeadPosition, {Number(p, 0), Number(p, 1), Number(p, 2)});
    }
    if (type == "rotation") {
      const json& q = j.at("quaternion");
      if (!q.is_array() || q.size() != 4) throw BridgeError("quaternion needs 4 numbers");
      return msg(a::kHeadRotation,
                 {Number(q, 0), Number(q, 1), Number(q, 2), Number(q, 3)});
    }
  } catch (const json::exception& e) {
    throw BridgeError(std::string("bad '") + type + "' message: " + e.what());
  }
  throw BridgeError("unknown message type '" + type + "'");
}

std::string UiViewToJson(const UiView& v) {
  json j;
  j["type"] = "state";
  j["phase"] = std::string(ToString(v.phase));
  j["trial"] = v.trial;
  j["trial_count"] = v.trial_count;
  j["attribute"] = v.attribute ? json(std::string(GetAttribute(*v.attribute).key))
                               : json(nullptr);
  j["labels"] = v.labels;
  j["ratings"] = v.ratings;
  j["active"] = v.active_label;
  j["seat"] = v.seat;
  j["transport"] = v.transport == Transport::kPlaying ? "playing" : "stopped";
  j["source"] = v.source;
  j["sources"] = v.available_sources;
  j["finalized"] = v.finalized;
  json attrs = json::array();
  for (const auto& a : Attributes()) {
    attrs.push_back({{"id", std::string(a.key)},
                     {"name", std::string(a.name)},
                     {"low", std::string(a.low_label)},
                     {"high", std::string(a.high_label)},
                     {"description", std::string(a.description)}});
  }
  j["attributes"] = attrs;
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::string RouteErrorToJson(const RouteResult& result) {
  json j;
  j["type"] = "error";
  j["message"] = result.detail;
  json missing = json::array();
  for (const auto& cell : result.missing) {
    missing.push_back({{"attribute", std::string(GetAttribute(cell.attribute).key)},
                       {"label", cell.label}});
  }
  j["missing"] = missing;
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::string_view MimeType(std::string_view path) {
  const auto dot = path.rfind('.');
  const std::string_view ext = dot == std::string_view::npos ? "" : path.substr(dot);
  if (ext == ".html" || ext == ".htm") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript; charset=utf-8";
  if (ext == ".css") return "text/css; charset=utf-8";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".ico") return "image/x-icon";
  return "application/octet-stream";
}

std::optional<std::filesystem::path> ResolveStatic(
    const std::filesystem::path& root, std::string_view target) {
  std::string path(target.substr(0, target.find_first_of("?#")));
  if (path.empty() || path.front() != '/') return std::nullopt;
  if (path.find("..") != std::string::npos || path.find('\\') != std::string::npos ||
      path.find('\0') != std::string::npos) {
    return std::nullopt;
  }
  if (path.back() == '/') path += "index.html";
  return root / path.substr(1);
}

// ---- server ----

class WsSession;

struct WebBridge::Impl : std::enable_shared_from_this<WebBridge::Impl> {
  Router& router;
  std::filesystem::path static_dir;
  asio::io_context io;
  tcp::acceptor acceptor{io};
  std::thread thread;
  std::mutex mu;
  std::set<std::shared_ptr<WsSession>> sessions;
  bool stopped = false;

  explicit Impl(Router& r, std::filesystem::path dir)
      : router(r), static_dir(std::move(dir)) {}

  void Accept();
  void BroadcastOnIo();
};

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, std::shared_ptr<WebBridge::Impl> bridge)
      : ws_(std::move(socket)), bridge_(std::move(bridge)) {}

  void Open(http::request<http::string_body> request) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(request, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      {
        std::lock_guard<std::mutex> lock(self->bridge_->mu);
        self->bridge_->sessions.insert(self);
      }
      self->Send(UiViewToJson(self->bridge_->router.View()));
      self->Read();
    });
  }

  // Io thread only.
  void Send(std::string text) {
    queue_.push_back(std::move(text));
    if (queue_.size() == 1) Write();
  }

  void Close() {
    beast::error_code ignored;
    beast::get_lowest_layer(ws_).socket().close(ignored);
  }

 private:
  void Read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, size_t) {
      if (ec) {
        self->Drop();
        return;
      }
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      try {
        const OscMessage m = TranslateClientJson(text);
        const RouteResult r = self->bridge_->router.Dispatch(m);
        if (r.status == RouteStatus::kRejected) self->Send(RouteErrorToJson(r));
      } catch (const BridgeError& e) {
        self->Send(RouteErrorToJson({RouteStatus::kRejected, e.what(), {}}));
      }
      self->Read();
    });
  }

  void Write() {
    ws_.text(true);
    ws_.async_write(asio::buffer(queue_.front()),
                    [self = shared_from_this()](beast::error_code ec, size_t) {
                      if (ec) {
                        self->Drop();
                        return;
                      }
                      self->queue_.pop_front();
                      if (!self->queue_.empty()) self->Write();
                    });
  }

  void Drop() {
    std::lock_guard<std::mutex> lock(bridge_->mu);
    bridge_->sessions.erase(shared_from_this());
  }

  websocket::stream<beast::tcp_stream> ws_;
  std::shared_ptr<WebBridge::Impl> bridge_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, std::shared_ptr<WebBridge::Impl> bridge)
      : stream_(std::move(socket)), bridge_(std::move(bridge)) {}

  void Read() {
    request_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, request_,
                     [self = shared_from_this()](beast::error_code ec, size_t) {
                       if (ec) return;
                       self->Handle();
                     });
  }

 private:
  void Handle() {
    if (websocket::is_upgrade(request_)) {
      if (request_.target() == "/ws") {
        stream_.expires_never();
        std::make_shared<WsSession>(stream_.release_socket(), bridge_)
            ->Open(std::move(request_));
      }
      return;
    }
    auto response = std::make_shared<http::response<http::string_body>>();
    response->version(request_.version());
    response->keep_alive(request_.keep_alive());
    response->set(http::field::server, "auralab");
    const auto path = ResolveStatic(bridge_->static_dir,
                                    std::string_view(request_.target().data(),
                                                     request_.target().size()));
    std::string body;
    bool found = false;
    if (path && (request_.method() == http::verb::get ||
                 request_.method() == http::verb::head)) {
      std::ifstream in(*path, std::ios::binary);
      if (in && std::filesystem::is_regular_file(*path)) {
        std::stringstream ss;
        ss << in.rdbuf();
        body = ss.str();
        found = true;
      }
    }
    if (found) {
      response->result(http::status::ok);
      response->set(http::field::content_type, std::string(MimeType(path->string())));
      response->set(http::field::cache_control, "no-store");
    } else if (!path) {
      response->result(http::status::bad_request);
      body = "bad request\n";
    } else {
      response->result(http::status::not_found);
      response->set(http::field::content_type, "text/plain");
      body = "not found\n";
    }
    if (request_.method() != http::verb::head) response->body() = std::move(body);
    response->prepare_payload();
    http::async_write(stream_, *response,
                      [self = shared_from_this(), response](beast::error_code ec, size_t) {
                        if (ec) return;
                        if (response->keep_alive()) {
                          self->Read();
                        } else {
                          beast::error_code ignored;
                          self->stream_.socket().shutdown(tcp::socket::shutdown_send,
                                                          ignored);
                        }
                      });
  }

  beast::tcp_stream stream_;
  std::shared_ptr<WebBridge::Impl> bridge_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> request_;
};

void WebBridge::Impl::Accept() {
  acceptor.async_accept([self = shared_from_this()](beast::error_code ec,
                                                    tcp::socket socket) {
    if (ec) return;
    std::make_shared<HttpSession>(std::move(socket), self)->Read();
    self->Accept();
  });
}

void WebBridge::Impl::BroadcastOnIo() {
  const std::string text = UiViewToJson(router.View());
  std::vector<std::shared_ptr<WsSession>> targets;
  {
    std::lock_guard<std::mutex> lock(mu);
    targets.assign(sessions.begin(), sessions.end());
  }
  for (auto& s : targets) s->Send(text);
}

WebBridge::WebBridge(Router& router, const std::string& host, uint16_t port,
                     std::filesystem::path static_dir)
    : impl_(std::make_shared<Impl>(router, std::move(static_dir))) {
  beast::error_code ec;
  const auto address = asio::ip::make_address(host, ec);
  if (ec) throw BridgeError("bad address '" + host + "'");
  const tcp::endpoint local(address, port);
  impl_->acceptor.open(local.protocol(), ec);
  if (!ec) impl_->acceptor.set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) impl_->acceptor.bind(local, ec);
  if (!ec) impl_->acceptor.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) {
    throw BridgeError("BindFailed: " + host + ":" + std::to_string(port) + ": " +
                      ec.message());
  }
  impl_->Accept();
  std::weak_ptr<Impl> weak = impl_;
  router.AddObserver([weak] {
    if (auto impl = weak.lock()) {
      asio::post(impl->io, [impl] { impl->BroadcastOnIo(); });
    }
  });
  impl_->thread = std::thread([impl = impl_] { impl->io.run(); });
}

WebBridge::~WebBridge() { Stop(); }

uint16_t WebBridge::port() const { return impl_->acceptor.local_endpoint().port(); }

size_t WebBridge::clients() const {
  std::lock_guard<std::mutex> lock(impl_->mu);
  return impl_->sessions.size();
}

void WebBridge::Broadcast() {
  asio::post(impl_->io, [impl = impl_] { impl->BroadcastOnIo(); });
}

void WebBridge::Stop() {
  {
    std::lock_guard<std::mutex> lock(impl_->mu);
    if (impl_->stopped) return;
    impl_->stopped = true;
  }
  asio::post(impl_->io, [impl = impl_] {
    beast::error_code ignored;
    impl->acceptor.close(ignored);
    std::vector<std::shared_ptr<WsSession>> sessions;
    {
      std::lock_guard<std::mutex> lock(impl->mu);
      sessions.assign(impl->sessions.begin(), impl->sessions.end());
      impl->sessions.clear();
    }
    for (auto& s : sessions) s->Close();
    impl->io.stop();
  });
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace auralab
