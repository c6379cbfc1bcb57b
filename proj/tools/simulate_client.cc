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


#include <chrono>
#include <iomanip>
#include <iostream>
#include <thread>

#include "auralab/trace.h"
#include "auralab/udp.h"
#include "commands.h"

namespace auralab::cli {
namespace {

struct SimulateArgs {
  std::string config;
  std::string target;
  std::string trace;
  double rate = 0.0;
};

int RunSimulate(const SimulateArgs& a) {
  std::string host = "127.0.0.1";
  uint16_t port = 9000;
  if (a.target.empty()) {
    if (const auto config = LoadConfig(a.config, false)) {
      host = config->osc_listen == "0.0.0.0" ? "127.0.0.1" : config->osc_listen;
      port = config->osc_port;
    }
  } else {
    const auto colon = a.target.rfind(':');
    if (colon == std::string::npos) throw UsageError("--target must be host:port");
    host = a.target.substr(0, colon);
    try {
      const int p = std::stoi(a.target.substr(colon + 1));
      if (p < 1 || p > 65535) throw std::out_of_range("port");
      port = uint16_t(p);
    } catch (const std::exception&) {
      throw UsageError("bad port in --target '" + a.target + "'");
    }
  }

  const auto steps = LoadTrace(a.trace);
  const auto offsets = ReplayOffsets(steps, a.rate);
  UdpSender sender(host, port);

  using Clock = std::chrono::steady_clock;
  std::vector<double> lateness;
  lateness.reserve(steps.size());
  const auto start = Clock::now();
  for (size_t i = 0; i < steps.size(); ++i) {
    const auto due = start + std::chrono::duration_cast<Clock::duration>(
                                 std::chrono::duration<double, std::milli>(offsets[i]));
    std::this_thread::sleep_until(due);
    lateness.push_back(
        std::chrono::duration<double, std::milli>(Clock::now() - due).count());
    for (const auto& m : steps[i].messages) sender.Send(m);
  }
  const double elapsed =
      std::chrono::duration<double>(Clock::now() - start).count();
  const JitterStats j = ComputeJitter(lateness);

  std::cout << std::fixed << std::setprecision(3) << "sent " << sender.sent()
            << " datagrams (" << steps.size() << " events) to " << host << ':' << port
            << " in " << elapsed << " s; jitter mean " << j.mean_ms << " ms, p95 "
            << j.p95_ms << " ms, max " << j.max_ms << " ms";
  if (sender.failed() > 0) std::cout << "; failed " << sender.failed();
  std::cout << '\n';
  if (sender.failed() > 0) {
    std::cerr << "error: UnreachableTarget: " << sender.failed()
              << " datagrams were refused by " << host << ':' << port << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace

void AddSimulateClient(CLI::App& app, Action& action) {
  auto args = std::make_shared<SimulateArgs>();
  CLI::App* cmd = app.add_subcommand(
      "simulate-client", "Replay a telemetry-format trace as OSC over UDP");
  cmd->add_option("-c,--config", args->config,
                  "Config file; its OSC port is the default target");
  cmd->add_option("-t,--target", args->target, "Server host:port");
  cmd->add_option("--trace", args->trace, "Trace file (telemetry JSONL)")->required();
  cmd->add_option("--rate", args->rate, "Events per second; 0 keeps recorded timing")->capture_default_str()
      ->check(CLI::Range(0.0, 100000.0));
  cmd->callback([args, &action] { action = [args] { return RunSimulate(*args); }; });
}

}  // namespace auralab::cli
