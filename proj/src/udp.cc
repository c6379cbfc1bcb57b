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


#include "auralab/udp.h"

#include <array>

#include <boost/asio.hpp>

namespace auralab {

namespace asio = boost::asio;
using asio::ip::udp;

// Largest UDP payload over IPv4.
constexpr size_t kMaxDatagram = 65507;

struct UdpEndpoint::Impl {
  asio::io_context io;
  udp::socket socket{io};
  udp::endpoint sender;
  std::array<uint8_t, kMaxDatagram> buffer;
};

UdpEndpoint::UdpEndpoint(const std::string& host, uint16_t port,
                         Handler handler, ErrorHandler on_malformed)
    : impl_(std::make_unique<Impl>()),
      host_(host),
      handler_(std::move(handler)),
      on_malformed_(std::move(on_malformed)) {
  boost::system::error_code ec;
  const auto address = asio::ip::make_address(host, ec);
  if (ec) throw OscError(OscErrc::kBindFailed, "bad address '" + host + "'");
  const udp::endpoint local(address, port);
  impl_->socket.open(local.protocol(), ec);
  if (!ec) impl_->socket.bind(local, ec);
  if (ec) {
    throw OscError(OscErrc::kBindFailed, host + ":" + std::to_string(port) +
                                             ": " + ec.message());
  }
  port_ = impl_->socket.local_endpoint().port();
  thread_ = std::thread([this] { Run(); });
}

UdpEndpoint::~UdpEndpoint() { Stop(); }

void UdpEndpoint::Stop() {
  if (stopped_.exchange(true)) return;
  asio::post(impl_->io, [this] {
    boost::system::error_code ignored;
    impl_->socket.close(ignored);
  });
  if (thread_.joinable()) thread_.join();
}

void UdpEndpoint::Run() {
  std::function<void()> receive = [&] {
    impl_->socket.async_receive_from(
        asio::buffer(impl_->buffer), impl_->sender,
        [&](const boost::system::error_code& ec, size_t n) {
          if (ec == asio::error::operation_aborted || stopped_.load()) return;
          if (!ec) {
            ++datagrams_;
            const UdpPeer peer{impl_->sender.address().to_string(),
                               impl_->sender.port()};
            std::vector<OscMessage> messages;
            try {
              messages = DecodePacket(
                  std::span<const uint8_t>(impl_->buffer.data(), n));
            } catch (const OscError& e) {
              ++malformed_;
              if (on_malformed_) on_malformed_(e, peer);
            }
            for (const auto& m : messages) {
              try {
                handler_(m, peer);
                ++dispatched_;
              } catch (...) {
                ++handler_failures_;
              }
            }
          }
          receive();
        });
  };
  receive();
  impl_->io.run();
}

struct UdpSender::Impl {
  asio::io_context io;
  udp::socket socket{io};
};

UdpSender::UdpSender(const std::string& host, uint16_t port)
    : impl_(std::make_unique<Impl>()) {
  boost::system::error_code ec;
  udp::resolver resolver(impl_->io);
  const auto results =
      resolver.resolve(udp::v4(), host, std::to_string(port), ec);
  if (ec || results.empty()) {
    throw OscError(OscErrc::kUnreachableTarget,
                   "cannot resolve " + host + ":" + std::to_string(port));
  }
  impl_->socket.open(udp::v4(), ec);
  if (!ec) impl_->socket.connect(*results.begin(), ec);
  if (ec) {
    throw OscError(OscErrc::kUnreachableTarget,
                   host + ":" + std::to_string(port) + ": " + ec.message());
  }
}

UdpSender::~UdpSender() = default;

bool UdpSender::Send(const OscMessage& message) {
  return SendBytes(EncodeMessage(message));
}

bool UdpSender::SendBytes(const std::vector<uint8_t>& bytes) {
  boost::system::error_code ec;
  impl_->socket.send(asio::buffer(bytes), 0, ec);
  if (ec) {
    ++failed_;
    return false;
  }
  ++sent_;
  return true;
}

}  // namespace auralab
