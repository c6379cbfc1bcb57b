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


#include "auralab/engine.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "auralab/dsp_error.h"

namespace auralab {

Engine::Engine(const ArirSet& arirs, const BinauralDecoder& decoder,
               EngineOptions options)
    : arirs_(arirs),
      options_(options),
      commands_(std::max<size_t>(options.command_capacity, 16)),
      retired_(2 * std::max<size_t>(options.command_capacity, 16)),
      rotation_(arirs.config().order) {
  const AmbisonicConfig& cfg = arirs_.config();
  if (!IsPowerOfTwo(options_.block)) {
    throw DspError(DspErrc::kInvalidBlockSize,
                   "engine block " + std::to_string(options_.block));
  }
  if (decoder.firs.empty()) {
    throw DspError(DspErrc::kMissingDecoder, "no binaural decoder loaded");
  }
  if (decoder.order != cfg.order || decoder.channel_count() != cfg.channel_count()) {
    throw DspError(DspErrc::kDimensionMismatch,
                   "decoder order " + std::to_string(decoder.order) +
                       " vs dataset order " + std::to_string(cfg.order));
  }
  if (decoder.convention != cfg.convention) {
    throw DspError(DspErrc::kConventionMismatch,
                   std::string("decoder is ") +
                       std::string(ToString(decoder.convention)) +
                       ", dataset is " + std::string(ToString(cfg.convention)));
  }
  crossfade_frames_ = size_t(std::llround(
      std::max(0.0, options_.crossfade_seconds) * cfg.sample_rate));
  transport_fade_frames_ = size_t(std::llround(
      std::max(0.0, options_.transport_fade_seconds) * cfg.sample_rate));
  resume_pos_ = transport_fade_frames_;
  decoder_length_ = decoder.length();

  const size_t block = options_.block;
  control_fft_ = std::make_unique<RealFft>(2 * block);
  fft_ = std::make_unique<RealFft>(2 * block);
  prime_blocks_ = std::max<size_t>(1, (decoder_length_ + block - 1) / block);
  const size_t depth = (arirs_.max_length() + block - 1) / block + prime_blocks_;
  for (int s = 0; s < arirs_.num_sources(); ++s) {
    source_fdls_.emplace_back(block, depth);
  }
  samples_.assign(arirs_.num_sources(), nullptr);
  previous_samples_.assign(arirs_.num_sources(), nullptr);
  source_fade_pos_.assign(arirs_.num_sources(), 0);
  pending_samples_.assign(arirs_.num_sources(), std::nullopt);
  for (int slot = 0; slot < 2; ++slot) {
    decoders_.emplace_back(decoder, block);
    anchors_.emplace_back(options_.anchor_cutoff_hz, cfg.sample_rate, 2);
  }
  retire_backlog_.reserve(64);
  source_block_ = AudioBlock(1, block);
  split_acc_.assign(2 * (block + 1), 0.0);
  acc_.assign(block + 1, Complex());
  time_.assign(2 * block, 0.0);
  ambi_ = AudioBlock(cfg.channel_count(), block);
  rotated_ = AudioBlock(cfg.channel_count(), block);
  ears_in_ = AudioBlock(2, block);
  ears_out_ = AudioBlock(2, block);

  // Initial chain: the reference (or first stored condition) at the first
  // seat that has data for it.
  ConditionId initial = arirs_.HasCondition(ConditionId::Reference())
                            ? ConditionId::Reference()
                            : arirs_.StoredConditions().front();
  std::string seat;
  for (const auto& s : arirs_.manifest().seats) {
    bool complete = true;
    for (int k = 0; k < arirs_.num_sources(); ++k) {
      complete = complete && arirs_.Contains(initial, s.label, k);
    }
    if (complete) {
      seat = s.label;
      break;
    }
  }
  if (seat.empty()) {
    throw ArirError(ArirErrc::kKeyNotFound,
                    "no seat has data for condition " + initial.id());
  }
  SetChain(initial, seat);
}

Engine::~Engine() = default;

bool Engine::Send(const Command& command) {
  if (commands_.push(command)) return true;
  ++dropped_commands_;
  return false;
}

void Engine::Poll() {
  const ChainKernels* p = nullptr;
  while (retired_.pop(p)) {
    auto it = lent_.find(p);
    if (it != lent_.end() && --it->second.second <= 0) lent_.erase(it);
  }
}

std::shared_ptr<const ChainKernels> Engine::Kernels(const ConditionId& storage,
                                                    const std::string& seat) {
  const std::string key = storage.id() + "|" + seat;
  for (auto it = cache_.begin(); it != cache_.end(); ++it) {
    if (it->first == key) {
      cache_.splice(cache_.begin(), cache_, it);
      return cache_.front().second;
    }
  }
  auto kernels = std::make_shared<ChainKernels>();
  kernels->storage = storage;
  kernels->seat = seat;
  for (int s = 0; s < arirs_.num_sources(); ++s) {
    kernels->sources.emplace_back(arirs_.Get(storage, seat, s).channels,
                                  options_.block, *control_fft_);
  }
  cache_.emplace_front(key, kernels);
  while (cache_.size() > std::max<size_t>(options_.kernel_cache_entries, 1)) {
    cache_.pop_back();
  }
  return kernels;
}

void Engine::SendChain() {
  Poll();
  auto kernels = Kernels(control_.active_condition.storage(), control_.seat);
  Command cmd;
  cmd.type = Command::Type::kSetChain;
  cmd.kernels = kernels.get();
  cmd.anchor = control_.anchor_enabled;
  // The audio thread crossfades only if it is still producing output.
  cmd.crossfade = crossfade_frames_ > 0;
  auto& entry = lent_[kernels.get()];
  entry.first = kernels;
  ++entry.second;
  if (!Send(cmd) && --entry.second <= 0) lent_.erase(kernels.get());
}

EngineState Engine::SetChain(const ConditionId& condition,
                             std::string_view seat) {
  if (!arirs_.HasCondition(condition)) {
    throw DspError(DspErrc::kUnknownCondition,
                   "condition '" + condition.id() + "' is not in the dataset");
  }
  const std::string label(seat);
  arirs_.manifest().Seat(label);  // throws kKeyNotFound for unknown labels
  for (int s = 0; s < arirs_.num_sources(); ++s) {
    if (!arirs_.Contains(condition, label, s)) {
      throw ArirError(ArirErrc::kKeyNotFound,
                      "(" + condition.id() + ", " + label + ", src" +
                          std::to_string(s) + ")");
    }
  }
  control_.active_condition = condition;
  control_.seat = label;
  control_.anchor_enabled = condition.uses_anchor_filter() || anchor_override_;
  SendChain();
  return state();
}

EngineState Engine::SelectSeat(std::string_view label) {
  return SetChain(control_.active_condition, label);
}

EngineState Engine::SwitchCondition(const ConditionId& to) {
  return SetChain(to, control_.seat);
}

void Engine::SetOrientation(const Orientation& orientation) {
  control_.orientation = orientation;
  Command cmd;
  cmd.type = Command::Type::kOrientation;
  cmd.orientation = orientation;
  Send(cmd);
}

void Engine::Play() {
  Poll();
  Command cmd;
  cmd.type = Command::Type::kPlay;
  if (Send(cmd)) control_.transport = Transport::kPlaying;
}

void Engine::Stop() {
  Poll();
  Command cmd;
  cmd.type = Command::Type::kStop;
  if (Send(cmd)) control_.transport = Transport::kStopped;
}

void Engine::Seek(uint64_t playhead) {
  Command cmd;
  cmd.type = Command::Type::kSeek;
  cmd.playhead = playhead;
  Send(cmd);
}

void Engine::SetSource(int source, const SourceSample* sample) {
  if (source < 0 || source >= arirs_.num_sources()) {
    throw ArirError(ArirErrc::kKeyNotFound, "source " + std::to_string(source));
  }
  Command cmd;
  cmd.type = Command::Type::kSource;
  cmd.source = source;
  cmd.sample = sample;
  Send(cmd);
}

void Engine::SetAnchorOverride(bool on) {
  anchor_override_ = on;
  SetChain(control_.active_condition, control_.seat);
}

EngineState Engine::state() const {
  EngineState s = control_;
  s.playhead = playhead();
  s.crossfade_remaining = crossfade_remaining_.load(std::memory_order_relaxed);
  return s;
}

size_t Engine::transition_frames() const {
  return crossfade_frames_ + decoder_length_ + options_.block;
}

// ---- audio thread ----

void Engine::Retire(const ChainKernels* kernels) {
  if (kernels == nullptr) return;
  if (!retired_.push(kernels) && retire_backlog_.size() < retire_backlog_.capacity()) {
    retire_backlog_.push_back(kernels);
  }
}

void Engine::ResetStreams() {
  for (auto& fdl : source_fdls_) fdl.Reset();
  for (size_t s = 0; s < samples_.size(); ++s) {
    if (pending_samples_[s]) samples_[s] = *pending_samples_[s];
    pending_samples_[s].reset();
    previous_samples_[s] = nullptr;
  }
  resume_pos_ = render_playhead_ == 0 ? transport_fade_frames_ : 0;
  for (auto& d : decoders_) d.Reset();
  for (auto& a : anchors_) a.Reset();
  if (fading_) {
    Retire(outgoing_.kernels);
    outgoing_ = {};
    fading_ = false;
  }
  if (pending_) {
    Chain next = *pending_;
    pending_.reset();
    StartChain(next, false);
  }
}

void Engine::StartChain(const Chain& incoming_in, bool crossfade) {
  Chain incoming = incoming_in;
  if (active_.kernels == nullptr) {
    incoming.slot = 0;
    active_ = incoming;
    return;
  }
  if (incoming.kernels == active_.kernels && incoming.anchor == active_.anchor) {
    if (pending_) {
      Retire(pending_->kernels);
      pending_.reset();
    }
    Retire(incoming.kernels);
    return;
  }
  if (!crossfade) {
    if (fading_) {
      Retire(outgoing_.kernels);
      outgoing_ = {};
      fading_ = false;
    }
    if (pending_) {
      Retire(pending_->kernels);
      pending_.reset();
    }
    incoming.slot = active_.slot;
    Retire(active_.kernels);
    active_ = incoming;
    return;
  }
  if (fading_) {
    // One crossfade at a time; the newest request waits for this one.
    if (pending_) Retire(pending_->kernels);
    pending_ = incoming;
    return;
  }
  outgoing_ = active_;
  incoming.slot = 1 - active_.slot;
  PrimeSlot(incoming);
  active_ = incoming;
  fading_ = true;
  fade_pos_ = 0;
}

void Engine::Apply(const Command& cmd) {
  switch (cmd.type) {
    case Command::Type::kSetChain:
      StartChain(Chain{cmd.kernels, cmd.anchor, 0}, cmd.crossfade && playing_);
      break;
    case Command::Type::kOrientation:
      orientation_ = cmd.orientation;
      rotation_dirty_ = true;
      break;
    case Command::Type::kPlay:
      if (!playing_) {
        playing_ = true;
        ResetStreams();
      } else if (stopping_) {
        if (pending_seek_) {
          restart_after_stop_ = true;
        } else {
          stopping_ = false;
          gain_target_ = 1.0;
        }
      }
      break;
    case Command::Type::kStop:
      if (playing_ && transport_fade_frames_ > 0) {
        BeginFadeOut(false);
      } else {
        playing_ = false;
        ResetStreams();
      }
      break;
    case Command::Type::kSeek:
      if (playing_ && transport_fade_frames_ > 0) {
        pending_seek_ = cmd.playhead;
        if (!stopping_) BeginFadeOut(true);
      } else {
        render_playhead_ = cmd.playhead;
        playhead_.store(render_playhead_, std::memory_order_release);
        ResetStreams();
      }
      break;
    case Command::Type::kSource: {
      const size_t s = size_t(cmd.source);
      if (previous_samples_[s] != nullptr) {
        pending_samples_[s] = cmd.sample;
      } else if (playing_ && samples_[s] != cmd.sample && crossfade_frames_ > 0) {
        previous_samples_[s] = samples_[s];
        source_fade_pos_[s] = 0;
        samples_[s] = cmd.sample;
      } else {
        samples_[s] = cmd.sample;
      }
      break;
    }
  }
}

// Gives the slot's decoder and anchor the history they would have had if the
// chain had been rendering all along.
void Engine::PrimeSlot(const Chain& chain) {
  decoders_[chain.slot].Reset();
  anchors_[chain.slot].Reset();
  for (size_t age = prime_blocks_; age-- > 0;) {
    ComputeAmbisonic(*chain.kernels, ambi_, age);
    ApplyRotation(rotation_, ambi_, rotated_);
    decoders_[chain.slot].Process(rotated_, ears_out_);
    if (chain.anchor) anchors_[chain.slot].Process(ears_out_);
  }
}

void Engine::ComputeAmbisonic(const ChainKernels& kernels, AudioBlock& out,
                              size_t age) {
  const size_t block = options_.block;
  const double scale = 1.0 / double(2 * block);
  for (size_t c = 0; c < out.channels(); ++c) {
    std::fill(split_acc_.begin(), split_acc_.end(), 0.0);
    bool any = false;
    for (size_t s = 0; s < source_fdls_.size(); ++s) {
      if (source_fdls_[s].silent()) continue;
      MultiplyAccumulate(source_fdls_[s], age, kernels.sources[s], c, 0, split_acc_);
      any = true;
    }
    auto dst = out.channel(c);
    if (!any) {
      std::fill(dst.begin(), dst.end(), 0.0);
      continue;
    }
    Interleave(split_acc_, acc_);
    fft_->Inverse(acc_, time_);
    for (size_t n = 0; n < block; ++n) dst[n] = time_[block + n] * scale;
  }
}

void Engine::RenderChain(const Chain& chain, AudioBlock& ears) {
  ComputeAmbisonic(*chain.kernels, ambi_);
  ApplyRotation(rotation_, ambi_, rotated_);
  decoders_[chain.slot].Process(rotated_, ears);
  if (chain.anchor) anchors_[chain.slot].Process(ears);
}

namespace {

void ReadLooped(const SourceSample* sample, uint64_t playhead, std::span<double> dst) {
  if (sample == nullptr || sample->samples.empty()) {
    std::fill(dst.begin(), dst.end(), 0.0);
    return;
  }
  const auto& x = sample->samples;
  size_t idx = size_t(playhead % x.size());
  for (double& v : dst) {
    v = x[idx];
    if (++idx == x.size()) idx = 0;
  }
}

}  // namespace

void Engine::FillSource(size_t s, std::span<double> dst) {
  const size_t block = dst.size();
  ReadLooped(samples_[s], render_playhead_, dst);
  if (previous_samples_[s] != nullptr) {
    double old[kMaxFadeBlock];
    for (size_t done = 0; done < block; done += kMaxFadeBlock) {
      const size_t n = std::min(kMaxFadeBlock, block - done);
      ReadLooped(previous_samples_[s], render_playhead_ + done, {old, n});
      for (size_t i = 0; i < n; ++i) {
        const size_t t = source_fade_pos_[s] + done + i;
        if (t >= crossfade_frames_) break;
        const double phase = 0.5 * std::numbers::pi * double(t) / double(crossfade_frames_);
        dst[done + i] = std::sin(phase) * dst[done + i] + std::cos(phase) * old[i];
      }
    }
    source_fade_pos_[s] += block;
    if (source_fade_pos_[s] >= crossfade_frames_) {
      previous_samples_[s] = nullptr;
      if (pending_samples_[s] && *pending_samples_[s] != samples_[s]) {
        previous_samples_[s] = samples_[s];
        source_fade_pos_[s] = 0;
        samples_[s] = *pending_samples_[s];
      }
      pending_samples_[s].reset();
    }
  }
  for (size_t n = 0; n < block && resume_pos_ + n < transport_fade_frames_; ++n) {
    const double u = double(resume_pos_ + n) / double(transport_fade_frames_);
    dst[n] *= 0.5 - 0.5 * std::cos(std::numbers::pi * u);
  }
}

void Engine::BeginFadeOut(bool restart) {
  restart_after_stop_ = restart;
  stopping_ = true;
  gain_target_ = 0.0;
}

void Engine::ApplyTransportGain(AudioBlock& out) {
  if (transport_gain_ == gain_target_ && transport_gain_ == 1.0) return;
  const double step = 1.0 / double(transport_fade_frames_);
  for (size_t n = 0; n < out.frames(); ++n) {
    transport_gain_ = gain_target_ > transport_gain_
                          ? std::min(transport_gain_ + step, gain_target_)
                          : std::max(transport_gain_ - step, gain_target_);
    for (size_t c = 0; c < out.channels(); ++c) out.at(c, n) *= transport_gain_;
  }
}

void Engine::FinishFadeOut() {
  stopping_ = false;
  transport_gain_ = gain_target_ = 1.0;
  if (pending_seek_) {
    render_playhead_ = *pending_seek_;
    playhead_.store(render_playhead_, std::memory_order_release);
    pending_seek_.reset();
  }
  playing_ = restart_after_stop_;
  restart_after_stop_ = false;
  ResetStreams();
}

void Engine::RenderBlock(AudioBlock& out) {
  const size_t block = options_.block;
  while (!retire_backlog_.empty() && retired_.push(retire_backlog_.back())) {
    retire_backlog_.pop_back();
  }
  Command cmd;
  while (commands_.pop(cmd)) Apply(cmd);

  blocks_rendered_.fetch_add(1, std::memory_order_relaxed);
  const bool audible = playing_ && active_.kernels != nullptr;
  last_block_playing_.store(audible, std::memory_order_relaxed);
  if (!audible) {
    if (stopping_) FinishFadeOut();
    out.Clear();
    crossfade_remaining_.store(0, std::memory_order_relaxed);
    return;
  }

  auto src = source_block_.channel(0);
  for (size_t s = 0; s < source_fdls_.size(); ++s) {
    FillSource(s, src);
    source_fdls_[s].Push(src, *fft_);
  }
  resume_pos_ = std::min(resume_pos_ + block, transport_fade_frames_);

  if (rotation_dirty_) {
    ComputeShRotationInto(orientation_, rotation_);
    rotation_dirty_ = false;
  }

  RenderChain(active_, ears_in_);
  if (fading_) {
    RenderChain(outgoing_, ears_out_);
    const double fade = double(crossfade_frames_);
    for (size_t n = 0; n < block; ++n) {
      const size_t t = fade_pos_ + n;
      double g_in = 1.0, g_out = 0.0;
      if (t < crossfade_frames_) {
        const double phase = 0.5 * std::numbers::pi * double(t) / fade;
        g_in = std::sin(phase);
        g_out = std::cos(phase);
      }
      for (size_t c = 0; c < 2; ++c) {
        out.at(c, n) = g_in * ears_in_.at(c, n) + g_out * ears_out_.at(c, n);
      }
    }
    fade_pos_ += block;
    if (fade_pos_ >= crossfade_frames_) {
      fading_ = false;
      Retire(outgoing_.kernels);
      outgoing_ = {};
      if (pending_) {
        Chain next = *pending_;
        pending_.reset();
        StartChain(next, true);
      }
    }
  } else {
    for (size_t c = 0; c < 2; ++c) {
      auto s = ears_in_.channel(c);
      std::copy(s.begin(), s.end(), out.channel(c).begin());
    }
  }
  crossfade_remaining_.store(
      fading_ ? crossfade_frames_ - std::min(fade_pos_, crossfade_frames_) : 0,
      std::memory_order_relaxed);

  ApplyTransportGain(out);
  if (!out.AllFinite()) {
    out.Clear();
    nonfinite_blocks_.fetch_add(1, std::memory_order_relaxed);
  }
  render_playhead_ += block;
  playhead_.store(render_playhead_, std::memory_order_release);
  if (stopping_ && transport_gain_ == 0.0) FinishFadeOut();
}

StereoSignal RenderOffline(const ArirSet& arirs,
                           std::span<const SourceSample* const> sources,
                           const ConditionId& condition, std::string_view seat,
                           std::span<const TrajectoryPoint> trajectory,
                           const BinauralDecoder& decoder, bool anchor,
                           double duration_s, EngineOptions options) {
  for (size_t i = 1; i < trajectory.size(); ++i) {
    if (!(trajectory[i].time_s >= trajectory[i - 1].time_s)) {
      throw DspError(DspErrc::kNonMonotonicTrajectory,
                     "trajectory point " + std::to_string(i) +
                         " precedes its predecessor");
    }
  }
  Engine engine(arirs, decoder, options);
  for (size_t k = 0; k < sources.size() && int(k) < arirs.num_sources(); ++k) {
    engine.SetSource(int(k), sources[k]);
  }
  if (anchor) engine.SetAnchorOverride(true);
  engine.SetChain(condition, seat);
  engine.Play();

  const int rate = arirs.config().sample_rate;
  const size_t block = options.block;
  const size_t frames = size_t(std::llround(std::max(0.0, duration_s) * rate));
  StereoSignal out;
  out.sample_rate = rate;
  out.left.reserve(frames + block);
  out.right.reserve(frames + block);

  AudioBlock buffer(2, block);
  size_t next_point = 0;
  std::optional<Orientation> applied;
  for (size_t b = 0; b * block < frames; ++b) {
    const double t = double(b * block) / rate;
    std::optional<Orientation> current = applied;
    while (next_point < trajectory.size() && trajectory[next_point].time_s <= t) {
      current = trajectory[next_point].orientation;
      ++next_point;
    }
    if (current && (!applied || !(*current == *applied))) {
      engine.SetOrientation(*current);
      applied = current;
    }
    engine.RenderBlock(buffer);
    engine.Poll();
    const auto l = buffer.channel(0);
    const auto r = buffer.channel(1);
    out.left.insert(out.left.end(), l.begin(), l.end());
    out.right.insert(out.right.end(), r.begin(), r.end());
  }
  out.left.resize(frames);
  out.right.resize(frames);
  return out;
}

}  // namespace auralab
