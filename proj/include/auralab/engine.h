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


// The real-time render graph: per-source partitioned convolution with the
// selected ARIRs, summation, head-tracked SH rotation, binaural decoding and
// the optional anchor low-pass, with equal-power crossfades between chains.
//
// Threading: one control thread calls the mutating methods (SelectSeat,
// SwitchCondition, SetOrientation, Play, ...); one audio thread calls
// RenderBlock. Control changes travel through a wait-free SPSC queue and are
// applied at block boundaries. Kernel spectra for a (condition, seat) pair
// are built on the control thread and lent to the audio thread; the audio
// thread hands them back through a second SPSC queue so it never frees
// memory.

#ifndef AURALAB_ENGINE_H_
#define AURALAB_ENGINE_H_

#include <atomic>
#include <cstdint>
#include <list>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/lockfree/spsc_queue.hpp>

#include "auralab/anchor_filter.h"
#include "auralab/arir_store.h"
#include "auralab/audio_block.h"
#include "auralab/binaural.h"
#include "auralab/convolver.h"
#include "auralab/sh_rotation.h"

namespace auralab {

struct EngineOptions {
  size_t block = 512;
  double crossfade_seconds = 0.05;
  // Output fade-out on stop and seek, and input fade-in when playback
  // resumes past the start of the sources.
  double transport_fade_seconds = 0.01;
  double anchor_cutoff_hz = kAnchorCutoffHz;
  size_t command_capacity = 1024;
  size_t kernel_cache_entries = 6;
};

enum class Transport { kStopped, kPlaying };

// Control-side view of the engine.
struct EngineState {
  std::string seat;
  ConditionId active_condition;
  Transport transport = Transport::kStopped;
  uint64_t playhead = 0;
  Orientation orientation;
  bool anchor_enabled = false;
  // Frames left in the crossfade most recently observed by the audio thread.
  size_t crossfade_remaining = 0;
};

// Partitioned spectra of every source's ARIR for one (condition, seat).
struct ChainKernels {
  ConditionId storage;
  std::string seat;
  std::vector<CompactKernel> sources;
};

class Engine {
 public:
  // `arirs` must outlive the engine. The decoder must match the dataset's
  // order and convention.
  Engine(const ArirSet& arirs, const BinauralDecoder& decoder,
         EngineOptions options = {});
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  // ---- control thread ----

  // The sample must outlive its use by the engine; nullptr silences source k.
  void SetSource(int source, const SourceSample* sample);
  // Throws ArirError kKeyNotFound when the seat has no data for the active
  // condition.
  EngineState SelectSeat(std::string_view label);
  // Throws DspError kUnknownCondition. Crossfades when playing, immediate
  // when stopped; the playhead is unchanged either way.
  EngineState SwitchCondition(const ConditionId& to);
  // Sets condition and seat together, validating the pair once.
  EngineState SetChain(const ConditionId& condition, std::string_view seat);
  // Latest pose wins; applied at the next block boundary.
  void SetOrientation(const Orientation& orientation);
  void Play();
  void Stop();
  void Seek(uint64_t playhead);
  // Forces the anchor filter onto every chain (offline renders).
  void SetAnchorOverride(bool on);

  EngineState state() const;
  // Returns kernels the audio thread has released. Called implicitly by
  // every control method.
  void Poll();

  // ---- audio thread ----

  // Renders the next 2 x block frames. Outputs silence while stopped.
  // Never allocates, locks or performs I/O.
  void RenderBlock(AudioBlock& out);

  // ---- introspection (any thread) ----
  size_t block_size() const { return options_.block; }
  size_t crossfade_frames() const { return crossfade_frames_; }
  int sample_rate() const { return arirs_.config().sample_rate; }
  int num_sources() const { return arirs_.num_sources(); }
  uint64_t playhead() const { return playhead_.load(std::memory_order_acquire); }
  uint64_t blocks_rendered() const {
    return blocks_rendered_.load(std::memory_order_relaxed);
  }
  uint64_t nonfinite_blocks() const {
    return nonfinite_blocks_.load(std::memory_order_relaxed);
  }
  uint64_t dropped_commands() const { return dropped_commands_; }
  // Whether the most recent RenderBlock produced programme audio.
  bool last_block_playing() const {
    return last_block_playing_.load(std::memory_order_relaxed);
  }
  // Frames after a switch during which output may differ from a render of
  // the new condition alone (crossfade + decoder memory + anchor settling).
  size_t transition_frames() const;

 private:
  struct Command {
    enum class Type { kSetChain, kOrientation, kPlay, kStop, kSeek, kSource };
    Type type = Type::kPlay;
    const ChainKernels* kernels = nullptr;
    bool anchor = false;
    bool crossfade = false;
    Orientation orientation;
    uint64_t playhead = 0;
    int source = 0;
    const SourceSample* sample = nullptr;
  };

  struct Chain {
    const ChainKernels* kernels = nullptr;
    bool anchor = false;
    int slot = 0;
  };

  std::shared_ptr<const ChainKernels> Kernels(const ConditionId& storage,
                                              const std::string& seat);
  void SendChain();
  bool Send(const Command& command);

  void Apply(const Command& command);
  void Retire(const ChainKernels* kernels);
  void StartChain(const Chain& incoming, bool crossfade);
  // `age` blocks in the past; 0 is the newest pushed block.
  void ComputeAmbisonic(const ChainKernels& kernels, AudioBlock& out, size_t age = 0);
  void PrimeSlot(const Chain& chain);
  void RenderChain(const Chain& chain, AudioBlock& out);
  void ResetStreams();
  void FillSource(size_t s, std::span<double> dst);
  void BeginFadeOut(bool restart);
  void ApplyTransportGain(AudioBlock& out);
  void FinishFadeOut();

  static constexpr size_t kMaxFadeBlock = 256;

  const ArirSet& arirs_;
  EngineOptions options_;
  size_t crossfade_frames_;
  size_t decoder_length_;
  size_t prime_blocks_ = 1;

  // Control-thread state.
  EngineState control_;
  bool anchor_override_ = false;
  std::unique_ptr<RealFft> control_fft_;
  std::list<std::pair<std::string, std::shared_ptr<const ChainKernels>>>
      cache_;
  std::map<const ChainKernels*,
           std::pair<std::shared_ptr<const ChainKernels>, int>>
      lent_;
  uint64_t dropped_commands_ = 0;

  boost::lockfree::spsc_queue<Command> commands_;
  boost::lockfree::spsc_queue<const ChainKernels*> retired_;

  // Audio-thread state.
  std::unique_ptr<RealFft> fft_;
  std::vector<FrequencyDelayLine> source_fdls_;
  std::vector<const SourceSample*> samples_;
  // Source being faded out after a switch while playing.
  std::vector<const SourceSample*> previous_samples_;
  std::vector<size_t> source_fade_pos_;
  // Newest switch requested during a source crossfade.
  std::vector<std::optional<const SourceSample*>> pending_samples_;
  size_t transport_fade_frames_ = 0;
  size_t resume_pos_ = 0;
  double transport_gain_ = 1.0;
  double gain_target_ = 1.0;
  bool stopping_ = false;
  bool restart_after_stop_ = false;
  std::optional<uint64_t> pending_seek_;
  std::vector<BinauralRenderer> decoders_;
  std::vector<AnchorFilter> anchors_;
  Chain active_;
  Chain outgoing_;
  std::optional<Chain> pending_;
  size_t fade_pos_ = 0;
  bool fading_ = false;
  bool playing_ = false;
  uint64_t render_playhead_ = 0;
  Orientation orientation_;
  bool rotation_dirty_ = true;
  ShRotationMatrix rotation_;
  std::vector<const ChainKernels*> retire_backlog_;
  AudioBlock source_block_;
  std::vector<double> split_acc_;
  std::vector<Complex> acc_;
  std::vector<double> time_;
  AudioBlock ambi_;
  AudioBlock rotated_;
  AudioBlock ears_in_;
  AudioBlock ears_out_;

  std::atomic<uint64_t> playhead_{0};
  std::atomic<size_t> crossfade_remaining_{0};
  std::atomic<uint64_t> blocks_rendered_{0};
  std::atomic<uint64_t> nonfinite_blocks_{0};
  std::atomic<bool> last_block_playing_{false};
};

struct TrajectoryPoint {
  double time_s = 0.0;
  Orientation orientation;
};

struct StereoSignal {
  int sample_rate = 0;
  std::vector<double> left;
  std::vector<double> right;
};

// Deterministic render through the same block pipeline as RenderBlock, from
// playhead 0 with no prior history. Each trajectory orientation takes effect
// at the first block starting at or after its timestamp; before the first
// point the orientation is identity. sources[k] feeds source k (nullptr or a
// short list silences the rest).
StereoSignal RenderOffline(const ArirSet& arirs,
                           std::span<const SourceSample* const> sources,
                           const ConditionId& condition, std::string_view seat,
                           std::span<const TrajectoryPoint> trajectory,
                           const BinauralDecoder& decoder, bool anchor,
                           double duration_s, EngineOptions options = {});

}  // namespace auralab

#endif  // AURALAB_ENGINE_H_
