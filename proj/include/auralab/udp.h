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


// UDP transport for OSC: a receive endpoint with its own thread and a
// connected sender.

#ifndef AURALAB_UDP_H_
#define AURALAB_UDP_H_

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <thread>

#include "auralab/osc.h"

namespace auralab {

struct UdpPeer {
  std::string address;
  uint16_t port = 0;
};

class UdpEndpoint {
 public:
  using Handler = std::function<void(const OscMessage&, const UdpPeer&)>;
  using ErrorHandler = std::function<void(const OscError&, const UdpPeer&)>;

  // Binds host:port (port 0 picks an ephemeral port) and starts the receive
  // thread. Throws OscError(kBindFailed).
  UdpEndpoint(const std::string& host, uint16_t port, Handler handler,
              ErrorHandler on_malformed = nullptr);
  ~UdpEndpoint();
  UdpEndpoint(const UdpEndpoint&) = delete;
  UdpEndpoint& operator=(const UdpEndpoint&) = delete;

  uint16_t port() const { return port_; }
  const std::string& host() const { return host_; }

  // Releases the socket; no handler runs after Stop returns. Idempotent.
  void Stop();

  uint64_t datagrams() const { return datagrams_.load(); }
  uint64_t dispatched() const { return dispatched_.load(); }
  uint64_t malformed() const { return malformed_.load(); }
  uint64_t handler_failures() const { return handler_failures_.load(); }

 private:
  struct Impl;
  void Run();

  std::unique_ptr<Impl> impl_;
  std::string host_;
  uint16_t port_ = 0;
  Handler handler_;
  ErrorHandler on_malformed_;
  std::thread thread_;
  std::atomic<bool> stopped_{false};
  std::atomic<uint64_t> datagrams_{0};
  std::atomic<uint64_t> dispatched_{0};
  std::atomic<uint64_t> malformed_{0};
  std::atomic<uint64_t> handler_failures_{0};
};

class UdpSender {
 public:
  // Throws OscError(kUnreachableTarget) if the host cannot be resolved.
  UdpSender(const std::string& host, uint16_t port);
  ~UdpSender();
  UdpSender(const UdpSender&) = delete;
  UdpSender& operator=(const UdpSender&) = delete;

  // False if the datagram could not be sent (e.g. ICMP port unreachable
  // reported for an earlier datagram).
  bool Send(const OscMessage& message);
  bool SendBytes(const std::vector<uint8_t>& bytes);

  uint64_t sent() const { return sent_; }
  uint64_t failed() const { return failed_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  uint64_t sent_ = 0;
  uint64_t failed_ = 0;
};

}  // namespace auralab

#endif  // AURALAB_UDP_H_
