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


#include "auralab/server.h"

#include <chrono>
#include <cmath>
#include <sstream>

namespace auralab {
namespace {

using SteadyClock = std::chrono::steady_clock;

void AtomicMax(std::atomic<double>& target, double v) {
  double seen = target.load(std::memory_order_relaxed);
  while (v > seen && !target.compare_exchange_weak(seen, v, std::memory_order_relaxed)) {
  }
}

std::string Join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

}  // namespace

void OutputMonitor::Observe(const AudioBlock& block, bool playing) {
  blocks_.fetch_add(1, std::memory_order_relaxed);
  if (playing) playing_blocks_.fetch_add(1, std::memory_order_relaxed);
  uint64_t nonfinite = 0, jumps = 0;
  double max_step = 0.0, peak = 0.0;
  for (size_t c = 0; c < std::min<size_t>(2, block.channels()); ++c) {
    double prev = last_[c];
    bool check = playing && last_playing_;
    for (double x : block.channel(c)) {
      if (!std::isfinite(x)) {
        ++nonfinite;
        check = false;
        continue;
      }
      peak = std::max(peak, std::abs(x));
      if (check) {
        const double step = std::abs(x - prev);
        max_step = std::max(max_step, step);
        if (step > step_limit_) ++jumps;
      }
      prev = x;
      check = playing;
    }
    last_[c] = prev;
  }
  last_playing_ = playing;
  if (nonfinite) nonfinite_.fetch_add(nonfinite, std::memory_order_relaxed);
  if (jumps) discontinuities_.fetch_add(jumps, std::memory_order_relaxed);
  AtomicMax(max_step_, max_step);
  AtomicMax(peak_, peak);
}

MonitorStats OutputMonitor::stats() const {
  MonitorStats s;
  s.blocks = blocks_.load();
  s.playing_blocks = playing_blocks_.load();
  s.nonfinite_samples = nonfinite_.load();
  s.discontinuities = discontinuities_.load();
  s.late_blocks = late_blocks_.load();
  s.max_step = max_step_.load();
  s.peak = peak_.load();
  return s;
}

Server::Server(ServerConfig config, ServerOptions options)
    : config_(std::move(config)),
      options_(std::move(options)),
      monitor_(options_.step_limit) {
  const auto problems = CheckServerConfig(config_);
  if (!problems.empty()) throw StartupError("config", Join(problems, "; "), true);

  try {
    arirs_ = std::make_unique<ArirSet>(LoadArirSet(config_.dataset_root, config_.manifest));
  } catch (const std::exception& e) {
    throw StartupError("arir_store", e.what(), true);
  }
  const AmbisonicConfig& ambi = arirs_->config();
  try {
    decoder_ = LoadBinauralDecoder(config_.decoder, ambi.convention);
  } catch (const std::exception& e) {
    throw StartupError("dsp_core", "decoder " + config_.decoder.string() + ": " + e.what(),
                       true);
  }
  for (const auto& entry : config_.sources) {
    try {
      SourceSample sample = LoadSourceSample(entry.path, ambi.sample_rate);
      sample.id = entry.id;
      samples_.emplace(entry.id, std::move(sample));
    } catch (const std::exception& e) {
      throw StartupError("arir_store", "source '" + entry.id + "': " + e.what(), true);
    }
  }
  try {
    EngineOptions eo;
    eo.block = config_.block;
    engine_ = std::make_unique<Engine>(*arirs_, decoder_, eo);
  } catch (const std::exception& e) {
    throw StartupError("dsp_core", e.what(), true);
  }
  for (const auto& c : config_.session.conditions_under_test) {
    if (!arirs_->HasCondition(c)) {
      throw StartupError("session", "condition '" + c.id() + "' has no data in the dataset",
                         true);
    }
  }
  try {
    session_ = std::make_unique<Session>(config_.session);
  } catch (const std::exception& e) {
    throw StartupError("session", e.what(), true);
  }
}

Server::~Server() { Stop(); }

void Server::Log(const std::string& line) const {
  if (options_.logger) options_.logger(line);
}

std::filesystem::path Server::telemetry_path() const {
  return config_.output_dir /
         TelemetryFileName(config_.session.assessor_id, config_.session.session_id);
}

void Server::Start() {
  if (started_) return;
  started_ = true;
  std::error_code ec;
  std::filesystem::create_directories(config_.output_dir, ec);
  if (ec) {
    throw StartupError("session", "cannot create output directory " +
                                      config_.output_dir.string() + ": " + ec.message(),
                       false);
  }

  TelemetryOptions to;
  to.pose_decimation = config_.pose_decimation;
  telemetry_ = std::make_unique<TelemetryLog>(telemetry_path(), to);
  if (telemetry_->degraded()) {
    Log("[telemetry] cannot open " + telemetry_path().string() + ", logging disabled");
  }

  if (config_.notify_port != 0) {
    try {
      notifier_ = std::make_unique<UdpSender>(config_.notify_host, config_.notify_port);
    } catch (const std::exception& e) {
      throw StartupError("osc_net", e.what(), false);
    }
  }

  RouterOptions ro;
  ro.results_dir = config_.output_dir;
  ro.telemetry_file = telemetry_path().filename().string();
  const auto t0 = SteadyClock::now();
  router_ = std::make_unique<Router>(
      *session_, *engine_, samples_, telemetry_.get(), notifier_.get(), ro,
      [t0] {
        return int64_t(std::chrono::duration_cast<std::chrono::milliseconds>(
                           SteadyClock::now() - t0)
                           .count());
      },
      options_.logger);
  router_->Start();

  if (config_.sink == AudioSink::kWav) {
    try {
      wav_ = std::make_unique<WavStreamWriter>(config_.sink_path, 2,
                                               arirs_->config().sample_rate);
    } catch (const std::exception& e) {
      throw StartupError("dsp_core", e.what(), false);
    }
  }
  audio_running_ = true;
  audio_thread_ = std::thread([this] { AudioLoop(); });

  try {
    endpoint_ = std::make_unique<UdpEndpoint>(
        config_.osc_listen, config_.osc_port,
        [this](const OscMessage& m, const UdpPeer&) { router_->Dispatch(m); },
        [this](const OscError& e, const UdpPeer& peer) {
          Log("[osc_net] dropped datagram from " + peer.address + ":" +
              std::to_string(peer.port) + ": " + e.what());
        });
  } catch (const std::exception& e) {
    Stop();
    throw StartupError("osc_net", e.what(), false);
  }
  try {
    bridge_ = std::make_unique<WebBridge>(*router_, config_.ws_listen, config_.ws_port,
                                          config_.static_dir);
  } catch (const std::exception& e) {
    Stop();
    throw StartupError("webui", e.what(), false);
  }
}

void Server::AudioLoop() {
  const size_t block = engine_->block_size();
  const double rate = engine_->sample_rate();
  const auto period = std::chrono::nanoseconds(int64_t(std::llround(1e9 * block / rate)));
  AudioBlock out(2, block);
  std::vector<float> interleaved(2 * block);
  auto deadline = SteadyClock::now();
  while (audio_running_.load(std::memory_order_relaxed)) {
    engine_->RenderBlock(out);
    monitor_.Observe(out, engine_->last_block_playing());
    if (wav_) {
      for (size_t n = 0; n < block; ++n) {
        interleaved[2 * n] = float(out.at(0, n));
        interleaved[2 * n + 1] = float(out.at(1, n));
      }
      wav_->Write(interleaved.data(), block);
    }
    deadline += period;
    const auto now = SteadyClock::now();
    if (now > deadline + period) {
      monitor_.ObserveLate();
      deadline = now;
    }
    std::this_thread::sleep_until(deadline);
  }
}

void Server::Stop() {
  if (!started_ || stopped_) return;
  stopped_ = true;
  if (endpoint_) endpoint_->Stop();
  if (bridge_) bridge_->Stop();
  if (router_) router_->Shutdown();
  if (telemetry_) telemetry_->Close();
  audio_running_ = false;
  if (audio_thread_.joinable()) audio_thread_.join();
  if (wav_) wav_->Close();
}

bool Server::finished() const { return router_ && router_->View().finalized; }

uint16_t Server::osc_port() const { return endpoint_ ? endpoint_->port() : 0; }
uint16_t Server::ws_port() const { return bridge_ ? bridge_->port() : 0; }

std::string Server::ReadyLine() const {
  std::ostringstream os;
  os << "ready osc=" << config_.osc_listen << ':' << osc_port()
     << " ws=" << config_.ws_listen << ':' << ws_port();
  if (config_.notify_port != 0) {
    os << " notify=" << config_.notify_host << ':' << config_.notify_port;
  }
  os << " sink=" << ToString(config_.sink) << " block=" << config_.block
     << " rate=" << arirs_->config().sample_rate;
  return os.str();
}

std::string Server::Summary() const {
  std::vector<std::string> conditions;
  for (const auto& c : arirs_->StoredConditions()) conditions.push_back(c.id());
  std::ostringstream os;
  os << "dataset " << config_.dataset_root.string() << ": " << arirs_->manifest().room
     << ", order " << arirs_->config().order << ", "
     << ToString(arirs_->config().convention) << ", " << arirs_->config().sample_rate
     << " Hz, " << arirs_->size() << " impulse responses, conditions "
     << Join(conditions, ",") << '\n'
     << "decoder " << config_.decoder.string() << ": " << decoder_.channel_count()
     << " channels, " << decoder_.length() << " taps\n"
     << "sources " << samples_.size() << ", trials " << config_.session.trials.size()
     << ", assessor " << config_.session.assessor_id << ", session "
     << config_.session.session_id << '\n';
  return os.str();
}

}  // namespace auralab
