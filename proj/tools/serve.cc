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


#include <pthread.h>
#include <signal.h>

#include <ctime>
#include <iostream>
#include <mutex>

#include "auralab/server.h"
#include "commands.h"

namespace auralab::cli {
namespace {

struct ServeArgs {
  std::string config;
  bool check = false;
  bool exit_when_done = false;
  bool verbose = false;
  std::optional<uint16_t> osc_port, notify_port, ws_port;
  std::optional<std::string> notify_host, output_dir, assessor, session, sink, sink_path,
      static_dir;
  std::optional<uint64_t> seed;
  std::optional<size_t> block;
};

void ApplyOverrides(const ServeArgs& a, ServerConfig& c) {
  if (a.osc_port) c.osc_port = *a.osc_port;
  if (a.notify_port) c.notify_port = *a.notify_port;
  if (a.notify_host) c.notify_host = *a.notify_host;
  if (a.ws_port) c.ws_port = *a.ws_port;
  if (a.output_dir) c.output_dir = *a.output_dir;
  if (a.assessor) c.session.assessor_id = *a.assessor;
  if (a.session) c.session.session_id = *a.session;
  if (a.seed) c.session.rng_seed = *a.seed;
  if (a.block) c.block = *a.block;
  if (a.sink) c.sink = *a.sink == "wav" ? AudioSink::kWav : AudioSink::kNull;
  if (a.sink_path) c.sink_path = *a.sink_path;
  if (a.static_dir) c.static_dir = *a.static_dir;
}

int RunServe(const ServeArgs& args) {
  ServerConfig config = *LoadConfig(args.config, true);
  ApplyOverrides(args, config);

  std::mutex log_mu;
  ServerOptions options;
  options.logger = [&](const std::string& line) {
    if (!args.verbose) return;
    std::lock_guard<std::mutex> lock(log_mu);
    std::cerr << line << '\n';
  };

  Server server(std::move(config), options);
  if (args.check) {
    std::cout << server.Summary() << "config ok\n";
    return kExitOk;
  }

  // Worker threads inherit the mask, so only sigtimedwait sees the signal.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  server.Start();
  std::cout << server.ReadyLine() << std::endl;

  bool interrupted = false;
  const timespec poll{0, 50'000'000};
  for (;;) {
    const int sig = sigtimedwait(&signals, nullptr, &poll);
    if (sig == SIGINT || sig == SIGTERM) {
      interrupted = true;
      break;
    }
    if (args.exit_when_done && server.finished()) break;
  }
  const bool complete = server.finished();
  server.Stop();

  const MonitorStats m = server.monitor();
  std::cout << (complete ? "session complete" : "session aborted")
            << (interrupted ? " (interrupted)" : "") << "; telemetry "
            << server.telemetry_path().string() << "; audio blocks " << m.blocks
            << ", late " << m.late_blocks << ", non-finite samples "
            << m.nonfinite_samples << std::endl;
  return kExitOk;
}

}  // namespace

void AddServe(CLI::App& app, Action& action) {
  auto args = std::make_shared<ServeArgs>();
  CLI::App* cmd = app.add_subcommand("serve", "Run a live listening session");
  cmd->add_option("-c,--config", args->config, "Config file (default $AURALAB_CONFIG)");
  cmd->add_flag("--check", args->check,
                "Validate config and dataset, then exit without opening network or audio");
  cmd->add_flag("--exit-when-done", args->exit_when_done,
                "Exit once the last trial is complete");
  cmd->add_flag("-v,--verbose", args->verbose, "Log routed messages to stderr");
  cmd->add_option("--osc-port", args->osc_port, "OSC listen port (0 = ephemeral)");
  cmd->add_option("--notify-host", args->notify_host, "Notification host");
  cmd->add_option("--notify-port", args->notify_port, "Notification port (0 = off)");
  cmd->add_option("--ws-port", args->ws_port, "HTTP/WebSocket port (0 = ephemeral)");
  cmd->add_option("--output-dir", args->output_dir, "Results and telemetry directory");
  cmd->add_option("--assessor", args->assessor, "Assessor id");
  cmd->add_option("--session", args->session, "Session id");
  cmd->add_option("--seed", args->seed, "Label shuffle seed");
  cmd->add_option("--block", args->block, "Engine block size in frames")
      ->check(CLI::Range(16, 8192));
  cmd->add_option("--sink", args->sink, "Audio sink")
      ->check(CLI::IsMember({"null", "wav"}));
  cmd->add_option("--sink-path", args->sink_path, "WAV file for --sink wav");
  cmd->add_option("--static-dir", args->static_dir, "Static web UI directory");
  cmd->callback([args, &action] { action = [args] { return RunServe(*args); }; });
}

}  // namespace auralab::cli
