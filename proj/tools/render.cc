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


#include <algorithm>
#include <iostream>

#include "auralab/engine.h"
#include "auralab/trace.h"
#include "auralab/wav.h"
#include "commands.h"

namespace auralab::cli {
namespace {

struct RenderArgs {
  std::string config;
  std::string dataset, manifest, decoder;
  std::string condition, seat;
  std::vector<std::string> sources;
  std::string trajectory;
  std::string out;
  std::optional<double> duration;
  std::optional<size_t> block;
  bool anchor = false;
};

int RunRender(const RenderArgs& a) {
  const auto config = LoadConfig(a.config, false);
  std::filesystem::path root, manifest, decoder_path;
  size_t block = 512;
  if (config) {
    root = config->dataset_root;
    manifest = config->manifest;
    decoder_path = config->decoder;
    block = config->block;
  }
  if (!a.dataset.empty()) {
    root = a.dataset;
    manifest = root / "manifest.json";
  }
  if (!a.manifest.empty()) manifest = a.manifest;
  if (!a.decoder.empty()) decoder_path = a.decoder;
  if (a.block) block = *a.block;
  if (root.empty()) throw UsageError("no dataset: pass --dataset or --config");
  if (decoder_path.empty()) throw UsageError("no decoder: pass --decoder or --config");

  ConditionId condition;
  try {
    condition = ConditionId::Parse(a.condition);
  } catch (const ArirError& e) {
    throw UsageError(e.what());
  }

  const ArirSet arirs = LoadArirSet(root, manifest);
  if (!arirs.manifest().HasSeat(a.seat)) {
    std::string valid;
    for (const auto& s : arirs.manifest().seats) valid += (valid.empty() ? "" : " ") + s.label;
    throw UsageError("unknown seat '" + a.seat + "'; valid seats: " + valid);
  }
  if (!arirs.HasCondition(condition)) {
    std::string valid;
    for (const auto& c : arirs.StoredConditions()) valid += (valid.empty() ? "" : " ") + c.id();
    throw UsageError("condition '" + a.condition + "' has no data; stored: " + valid +
                     " (plus hidden_reference, lowpass_anchor)");
  }
  const BinauralDecoder decoder =
      LoadBinauralDecoder(decoder_path, arirs.config().convention);

  std::vector<SourceSample> samples;
  for (const auto& s : a.sources) {
    std::filesystem::path path = s;
    if (config) {
      for (const auto& entry : config->sources) {
        if (entry.id == s) path = entry.path;
      }
    }
    if (!std::filesystem::is_regular_file(path)) {
      throw UsageError("source '" + s + "' is neither a configured id nor a file");
    }
    samples.push_back(LoadSourceSample(path, arirs.config().sample_rate));
  }
  if (int(samples.size()) > arirs.num_sources()) {
    throw UsageError("dataset has " + std::to_string(arirs.num_sources()) +
                     " source positions, got " + std::to_string(samples.size()) +
                     " source signals");
  }
  std::vector<const SourceSample*> pointers;
  double longest = 0.0;
  for (const auto& s : samples) {
    pointers.push_back(&s);
    longest = std::max(longest, s.duration());
  }

  std::vector<TrajectoryPoint> trajectory;
  if (!a.trajectory.empty()) trajectory = LoadTrajectory(a.trajectory);

  EngineOptions options;
  options.block = block;
  const double duration = a.duration.value_or(longest);
  const StereoSignal y = RenderOffline(arirs, pointers, condition, a.seat, trajectory,
                                       decoder, a.anchor, duration, options);
  WavData wav;
  wav.sample_rate = y.sample_rate;
  wav.channels.assign(2, {});
  wav.channels[0].assign(y.left.begin(), y.left.end());
  wav.channels[1].assign(y.right.begin(), y.right.end());
  WriteWavFloat(a.out, wav);
  std::cout << "wrote " << a.out << ": " << y.left.size() << " frames, "
            << y.sample_rate << " Hz, condition " << condition.id() << ", seat "
            << a.seat << '\n';
  return kExitOk;
}

}  // namespace

void AddRender(CLI::App& app, Action& action) {
  auto args = std::make_shared<RenderArgs>();
  CLI::App* cmd =
      app.add_subcommand("render", "Render one condition and seat offline to a WAV file");
  cmd->add_option("-c,--config", args->config, "Config file (default $AURALAB_CONFIG)");
  cmd->add_option("--dataset", args->dataset, "Dataset root (overrides config)");
  cmd->add_option("--manifest", args->manifest, "Manifest (default <dataset>/manifest.json)");
  cmd->add_option("--decoder", args->decoder, "Binaural decoder WAV (overrides config)");
  cmd->add_option("--condition", args->condition, "Condition id")->required();
  cmd->add_option("--seat", args->seat, "Seat label, A1..E5")->required();
  cmd->add_option("--source", args->sources,
                  "Source signal per source position: configured id or mono WAV")
      ->required();
  cmd->add_option("--trajectory", args->trajectory,
                  "Head orientations: CSV time_s,w,x,y,z or telemetry JSONL");
  cmd->add_option("-o,--out", args->out, "Output WAV (stereo, 32-bit float)")->required();
  cmd->add_option("--duration", args->duration, "Seconds (default: longest source)")
      ->check(CLI::Range(0.0, 3600.0));
  cmd->add_option("--block", args->block, "Block size in frames")
      ->check(CLI::Range(16, 8192));
  cmd->add_flag("--anchor", args->anchor, "Force the anchor low-pass on");
  cmd->callback([args, &action] { action = [args] { return RunRender(*args); }; });
}

}  // namespace auralab::cli
