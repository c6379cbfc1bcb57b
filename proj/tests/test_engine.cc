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


#include <atomic>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include "auralab/dsp_error.h"
#include "auralab/engine.h"
#include "doctest.h"
#include "support/fixtures.h"
#include "support/oracles.h"

namespace auralab {
namespace {

constexpr int kRate = 48000;
constexpr size_t kBlock = 64;

struct Scene {
  std::unique_ptr<ArirSet> arirs;
  std::vector<SourceSample> samples;
  std::vector<const SourceSample*> pointers;
  BinauralDecoder decoder;
};

BinauralDecoder RandomDecoder(std::mt19937_64& rng, size_t taps) {
  BinauralDecoder dec;
  dec.order = 2;
  dec.firs.resize(9);
  for (auto& pair : dec.firs) {
    pair[0] = testing::RandomSignal(rng, taps, 0.3);
    pair[1] = testing::RandomSignal(rng, taps, 0.3);
  }
  return dec;
}

Scene MakeScene(uint64_t seed, double source_seconds = 1.0) {
  std::mt19937_64 rng(seed);
  testing::FixtureSpec spec;
  spec.conditions = {{"reference", "ref"},
                     {"parametric", "par"},
                     {"non_parametric", "np"}};
  spec.seats = {"A1", "C3"};
  const auto manifest = testing::MakeManifest(spec);
  std::map<ArirSet::Key, MultichannelIr> entries;
  for (const auto& cond : manifest.conditions) {
    for (const auto& seat : cond.seats) {
      for (int s = 0; s < 2; ++s) {
        entries[{cond.id, seat, s}] = testing::RandomArir(rng, 9, 300, 80.0);
      }
    }
  }
  Scene scene;
  scene.arirs = std::make_unique<ArirSet>(manifest, std::move(entries));
  for (int s = 0; s < 2; ++s) {
    scene.samples.push_back(testing::RandomSource(
        rng, source_seconds, kRate, "src" + std::to_string(s)));
  }
  for (const auto& s : scene.samples) scene.pointers.push_back(&s);
  scene.decoder = RandomDecoder(rng, 48);
  return scene;
}

EngineOptions Options() {
  EngineOptions o;
  o.block = kBlock;
  return o;
}

std::vector<double> ToDouble(const std::vector<float>& x) {
  return std::vector<double>(x.begin(), x.end());
}

void AddInto(std::vector<double>& acc, const std::vector<double>& y) {
  if (acc.size() < y.size()) acc.resize(y.size(), 0.0);
  for (size_t n = 0; n < y.size(); ++n) acc[n] += y[n];
}

// y_e = sum_s x_s * (sum_acn (R h_s)_acn * dec[acn][e]), by direct convolution.
std::array<std::vector<double>, 2> ComposedReference(
    const Scene& scene, const ConditionId& cond, const std::string& seat,
    const Orientation& o, size_t frames) {
  const auto R = ComputeShRotation(o, 2);
  std::array<std::vector<double>, 2> out;
  for (int s = 0; s < 2; ++s) {
    const auto& ir = scene.arirs->Get(cond, seat, s);
    std::vector<std::vector<double>> rotated(9, std::vector<double>(ir.length()));
    for (int i = 0; i < 9; ++i) {
      for (int j = 0; j < 9; ++j) {
        for (size_t n = 0; n < ir.length(); ++n) {
          rotated[i][n] += R(i, j) * double(ir.channels[j][n]);
        }
      }
    }
    std::vector<double> x = ToDouble(scene.samples[s].samples);
    x.resize(frames);
    for (int e = 0; e < 2; ++e) {
      std::vector<double> kernel;
      for (int i = 0; i < 9; ++i) {
        AddInto(kernel, testing::DirectConvolution(rotated[i],
                                                   scene.decoder.firs[i][e]));
      }
      AddInto(out[e], testing::DirectConvolution(x, kernel));
    }
  }
  for (auto& ch : out) ch.resize(frames);
  return out;
}

StereoSignal Offline(const Scene& scene, const ConditionId& cond,
                     const std::string& seat,
                     std::span<const TrajectoryPoint> trajectory,
                     double seconds, bool anchor = false) {
  return RenderOffline(*scene.arirs, scene.pointers, cond, seat, trajectory,
                       scene.decoder, anchor, seconds, Options());
}

TEST_CASE("static render equals direct convolution of the composed kernel") {
  const Scene scene = MakeScene(40);
  const double seconds = 0.25;
  const size_t frames = size_t(seconds * kRate);
  for (const double yaw : {0.0, 0.7, -2.1}) {
    CAPTURE(yaw);
    const Orientation o = Orientation::FromYaw(yaw);
    const TrajectoryPoint traj[] = {{0.0, o}};
    for (const auto& cond : {ConditionId::Reference(), ConditionId::Parametric()}) {
      const auto got = Offline(scene, cond, "C3", traj, seconds);
      const auto want = ComposedReference(scene, cond, "C3", o, frames);
      REQUIRE(got.left.size() == frames);
      CHECK(testing::MaxAbsDiff(got.left, want[0]) <= 1e-6);
      CHECK(testing::MaxAbsDiff(got.right, want[1]) <= 1e-6);
    }
  }
}

TEST_CASE("empty trajectory renders the identity orientation") {
  const Scene scene = MakeScene(41);
  const TrajectoryPoint identity[] = {{0.0, Orientation::Identity()}};
  const auto a = Offline(scene, ConditionId::Reference(), "A1", {}, 0.1);
  const auto b = Offline(scene, ConditionId::Reference(), "A1", identity, 0.1);
  CHECK(a.left == b.left);
  CHECK(a.right == b.right);
}

TEST_CASE("non-monotone trajectories are rejected") {
  const Scene scene = MakeScene(42);
  const TrajectoryPoint traj[] = {{0.0, Orientation::Identity()},
                                  {0.5, Orientation::FromYaw(0.1)},
                                  {0.4, Orientation::FromYaw(0.2)}};
  try {
    Offline(scene, ConditionId::Reference(), "A1", traj, 0.1);
    FAIL("expected NonMonotonicTrajectory");
  } catch (const DspError& e) {
    CHECK(e.code() == DspErrc::kNonMonotonicTrajectory);
  }
}

TEST_CASE("offline render is bit-deterministic") {
  const Scene scene = MakeScene(43);
  const TrajectoryPoint traj[] = {{0.0, Orientation::FromYaw(0.3)},
                                  {0.05, Orientation::FromYaw(0.6)},
                                  {0.09, Orientation::FromAxisAngle(1, 1, 0, 0.4)}};
  const auto a = Offline(scene, ConditionId::Parametric(), "C3", traj, 0.15);
  const auto b = Offline(scene, ConditionId::Parametric(), "C3", traj, 0.15);
  CHECK(a.left == b.left);
  CHECK(a.right == b.right);
}

TEST_CASE("render is linear in the source signals") {
  Scene scene = MakeScene(44);
  const TrajectoryPoint traj[] = {{0.0, Orientation::FromYaw(1.0)}};
  const auto sa = scene.samples;
  const auto full = Offline(scene, ConditionId::Reference(), "A1", traj, 0.1);

  scene.samples[1].samples.assign(sa[1].samples.size(), 0.0f);
  const auto only0 = Offline(scene, ConditionId::Reference(), "A1", traj, 0.1);
  scene.samples[1] = sa[1];
  scene.samples[0].samples.assign(sa[0].samples.size(), 0.0f);
  const auto only1 = Offline(scene, ConditionId::Reference(), "A1", traj, 0.1);

  for (size_t n = 0; n < full.left.size(); ++n) {
    CHECK(std::abs(full.left[n] - only0.left[n] - only1.left[n]) <= 1e-9);
  }

  scene.samples = sa;
  for (auto& s : scene.samples) {
    for (auto& v : s.samples) v = float(double(v) * 0.5);
  }
  const auto half = Offline(scene, ConditionId::Reference(), "A1", traj, 0.1);
  std::vector<double> scaled(full.left);
  for (auto& v : scaled) v *= 0.5;
  CHECK(testing::MaxAbsDiff(half.left, scaled) <= 1e-9);
}

TEST_CASE("anchor render equals reference render through the anchor filter") {
  const Scene scene = MakeScene(45);
  const auto ref = Offline(scene, ConditionId::Reference(), "C3", {}, 0.2);
  const auto lp = Offline(scene, ConditionId::LowpassAnchor(), "C3", {}, 0.2);
  const auto forced = Offline(scene, ConditionId::Reference(), "C3", {}, 0.2, true);
  AnchorFilter filter(kAnchorCutoffHz, kRate, 2);
  std::vector<double> l(ref.left.size()), r(ref.right.size());
  for (size_t n = 0; n < l.size(); ++n) {
    l[n] = filter.ProcessSample(0, ref.left[n]);
    r[n] = filter.ProcessSample(1, ref.right[n]);
  }
  CHECK(testing::MaxAbsDiff(lp.left, l) <= 1e-9);
  CHECK(testing::MaxAbsDiff(lp.right, r) <= 1e-9);
  CHECK(forced.left == lp.left);
}

TEST_CASE("hidden reference is rendered identically to the reference") {
  const Scene scene = MakeScene(46);
  const auto ref = Offline(scene, ConditionId::Reference(), "A1", {}, 0.1);
  const auto hidden = Offline(scene, ConditionId::HiddenReference(), "A1", {}, 0.1);
  CHECK(ref.left == hidden.left);
  CHECK(ref.right == hidden.right);
}

std::vector<double> RenderBlocks(Engine& engine, size_t blocks,
                                 std::vector<double>* right = nullptr) {
  std::vector<double> left;
  AudioBlock out(2, engine.block_size());
  for (size_t b = 0; b < blocks; ++b) {
    engine.RenderBlock(out);
    engine.Poll();
    left.insert(left.end(), out.channel(0).begin(), out.channel(0).end());
    if (right) right->insert(right->end(), out.channel(1).begin(), out.channel(1).end());
  }
  return left;
}

TEST_CASE("live switching matches offline renders outside transition windows") {
  const Scene scene = MakeScene(47);
  Engine engine(*scene.arirs, scene.decoder, Options());
  for (int s = 0; s < 2; ++s) engine.SetSource(s, scene.pointers[s]);
  engine.SetChain(ConditionId::Reference(), "C3");
  engine.Play();

  struct Segment {
    size_t start_block;
    ConditionId cond;
  };
  const std::vector<Segment> plan = {{0, ConditionId::Reference()},
                                     {60, ConditionId::Parametric()},
                                     {160, ConditionId::LowpassAnchor()},
                                     {260, ConditionId::NonParametric()},
                                     {360, ConditionId::HiddenReference()}};
  const size_t total_blocks = 460;
  std::vector<double> live_l, live_r;
  size_t next = 1;
  uint64_t expected_playhead = 0;
  for (size_t b = 0; b < total_blocks; ++b) {
    if (next < plan.size() && plan[next].start_block == b) {
      engine.SwitchCondition(plan[next].cond);
      ++next;
    }
    CHECK(engine.playhead() == expected_playhead);
    const auto l = RenderBlocks(engine, 1, &live_r);
    live_l.insert(live_l.end(), l.begin(), l.end());
    expected_playhead += kBlock;
  }
  CHECK(engine.playhead() == total_blocks * kBlock);

  const double seconds = double(total_blocks * kBlock) / kRate;
  const size_t settle = engine.transition_frames();
  for (size_t i = 0; i < plan.size(); ++i) {
    CAPTURE(plan[i].cond.id());
    const auto offline = Offline(scene, plan[i].cond, "C3", {}, seconds);
    const size_t begin = plan[i].start_block * kBlock + (i == 0 ? 0 : settle);
    const size_t end =
        (i + 1 < plan.size() ? plan[i + 1].start_block : total_blocks) * kBlock;
    REQUIRE(begin < end);
    double worst = 0.0;
    for (size_t n = begin; n < end; ++n) {
      worst = std::max(worst, std::abs(live_l[n] - offline.left[n]));
      worst = std::max(worst, std::abs(live_r[n] - offline.right[n]));
    }
    CHECK(worst <= 1e-5);
  }
}

TEST_CASE("crossfade is continuous and lasts the configured time") {
  const Scene scene = MakeScene(48);
  Engine engine(*scene.arirs, scene.decoder, Options());
  for (int s = 0; s < 2; ++s) engine.SetSource(s, scene.pointers[s]);
  engine.Play();
  RenderBlocks(engine, 40);
  CHECK(engine.state().crossfade_remaining == 0);
  engine.SwitchCondition(ConditionId::Parametric());
  RenderBlocks(engine, 1);
  CHECK(engine.crossfade_frames() == 2400);
  CHECK(engine.state().crossfade_remaining == 2400 - kBlock);
  RenderBlocks(engine, 2400 / kBlock);
  CHECK(engine.state().crossfade_remaining == 0);
  CHECK(engine.state().active_condition == ConditionId::Parametric());
}

TEST_CASE("switching to the hidden reference from the reference is a no-op") {
  const Scene scene = MakeScene(49);
  Engine a(*scene.arirs, scene.decoder, Options());
  Engine b(*scene.arirs, scene.decoder, Options());
  for (Engine* e : {&a, &b}) {
    for (int s = 0; s < 2; ++s) e->SetSource(s, scene.pointers[s]);
    e->SetChain(ConditionId::Reference(), "A1");
    e->Play();
  }
  CHECK(RenderBlocks(a, 20) == RenderBlocks(b, 20));
  a.SwitchCondition(ConditionId::HiddenReference());
  const auto ta = RenderBlocks(a, 60);
  const auto tb = RenderBlocks(b, 60);
  CHECK(ta == tb);
  CHECK(a.state().crossfade_remaining == 0);
}

TEST_CASE("switching while stopped takes effect immediately") {
  const Scene scene = MakeScene(50);
  Engine a(*scene.arirs, scene.decoder, Options());
  for (int s = 0; s < 2; ++s) a.SetSource(s, scene.pointers[s]);
  a.Play();
  RenderBlocks(a, 10);
  a.Stop();
  // The output fades out over 10 ms before the transport stops.
  const size_t fade = size_t(0.01 * kRate);
  const size_t fade_blocks = (fade + kBlock - 1) / kBlock;
  const auto fading = RenderBlocks(a, fade_blocks);
  CHECK(std::any_of(fading.begin(), fading.begin() + fade, [](double v) { return v != 0.0; }));
  CHECK(std::all_of(fading.begin() + fade, fading.end(), [](double v) { return v == 0.0; }));
  const auto silent = RenderBlocks(a, 3);
  CHECK(std::all_of(silent.begin(), silent.end(), [](double v) { return v == 0.0; }));
  CHECK(a.playhead() == (10 + fade_blocks) * kBlock);
  a.SwitchCondition(ConditionId::Parametric());
  a.Play();
  const auto resumed = RenderBlocks(a, 20);
  CHECK(a.state().crossfade_remaining == 0);

  Engine b(*scene.arirs, scene.decoder, Options());
  for (int s = 0; s < 2; ++s) b.SetSource(s, scene.pointers[s]);
  b.SetChain(ConditionId::Parametric(), a.state().seat);
  b.Seek((10 + fade_blocks) * kBlock);
  b.Play();
  CHECK(RenderBlocks(b, 20) == resumed);
}

TEST_CASE("seat switches crossfade and land on the new seat") {
  const Scene scene = MakeScene(51);
  Engine engine(*scene.arirs, scene.decoder, Options());
  for (int s = 0; s < 2; ++s) engine.SetSource(s, scene.pointers[s]);
  engine.SetChain(ConditionId::Reference(), "A1");
  engine.Play();
  RenderBlocks(engine, 10);
  engine.SelectSeat("C3");
  const auto live = RenderBlocks(engine, 200);
  const auto offline = Offline(scene, ConditionId::Reference(), "C3", {},
                               double(210 * kBlock) / kRate);
  double worst = 0.0;
  for (size_t n = engine.transition_frames(); n < live.size(); ++n) {
    worst = std::max(worst, std::abs(live[n] - offline.left[10 * kBlock + n]));
  }
  CHECK(worst <= 1e-5);

  // During the fade the output is the equal-power mix of both seats.
  const auto before = Offline(scene, ConditionId::Reference(), "A1", {},
                              double(210 * kBlock) / kRate);
  const size_t fade = size_t(0.05 * kRate);
  double mix_err = 0.0;
  for (size_t n = 0; n < fade; ++n) {
    const double phase = 0.5 * std::numbers::pi * double(n) / double(fade);
    const size_t k = 10 * kBlock + n;
    const double want = std::cos(phase) * before.left[k] + std::sin(phase) * offline.left[k];
    mix_err = std::max(mix_err, std::abs(live[n] - want));
  }
  CHECK(mix_err <= 1e-5);
  CHECK_THROWS_AS(engine.SelectSeat("E5"), ArirError);
  CHECK(engine.state().seat == "C3");
}

TEST_CASE("listener yaw moves a frontal source to the opposite side") {
  // One source, one seat: a pure frontal plane wave (SN3D W = X = 1).
  testing::FixtureSpec spec;
  spec.sources = 1;
  spec.seats = {"A1"};
  MultichannelIr ir;
  ir.channels.assign(9, std::vector<float>(1, 0.0f));
  ir.channels[0][0] = 1.0f;
  ir.channels[3][0] = 1.0f;
  std::map<ArirSet::Key, MultichannelIr> entries;
  entries[{ConditionId::Reference(), "A1", 0}] = ir;
  const ArirSet arirs(testing::MakeManifest(spec), entries);
  SourceSample dc{"dc", std::vector<float>(kRate, 1.0f), kRate};
  const SourceSample* src[] = {&dc};
  const auto dec = MakeCardioidDecoder(2, AmbisonicConvention::kAcnSn3d);

  const TrajectoryPoint left_turn[] = {{0.0, Orientation::FromYaw(M_PI / 2)}};
  const auto out = RenderOffline(arirs, src, ConditionId::Reference(), "A1",
                                 left_turn, dec, false, 0.01, Options());
  CHECK(out.left.back() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(out.right.back() == doctest::Approx(1.0).epsilon(1e-9));

  const auto ahead = RenderOffline(arirs, src, ConditionId::Reference(), "A1",
                                   {}, dec, false, 0.01, Options());
  CHECK(ahead.left.back() == doctest::Approx(0.5));
  CHECK(ahead.right.back() == doctest::Approx(0.5));
}

TEST_CASE("non-finite output blocks are zeroed and counted") {
  Scene scene = MakeScene(52);
  scene.samples[0].samples[100] = NAN;
  Engine engine(*scene.arirs, scene.decoder, Options());
  for (int s = 0; s < 2; ++s) engine.SetSource(s, scene.pointers[s]);
  engine.Play();
  const auto out = RenderBlocks(engine, 4);
  CHECK(engine.nonfinite_blocks() >= 1);
  CHECK(std::all_of(out.begin(), out.end(), [](double v) { return std::isfinite(v); }));
}

TEST_CASE("engine construction errors") {
  const Scene scene = MakeScene(53);
  auto code_of = [&](const BinauralDecoder& dec, EngineOptions o) {
    try {
      Engine e(*scene.arirs, dec, o);
    } catch (const DspError& e) {
      return e.code();
    }
    FAIL("expected DspError");
    return DspErrc::kEmptyIr;
  };
  EngineOptions bad = Options();
  bad.block = 100;
  CHECK(code_of(scene.decoder, bad) == DspErrc::kInvalidBlockSize);
  CHECK(code_of(BinauralDecoder{}, Options()) == DspErrc::kMissingDecoder);
  CHECK(code_of(MakeOmniDecoder(1, AmbisonicConvention::kAcnSn3d), Options()) ==
        DspErrc::kDimensionMismatch);
  CHECK(code_of(MakeOmniDecoder(2, AmbisonicConvention::kAcnN3d), Options()) ==
        DspErrc::kConventionMismatch);

  Engine engine(*scene.arirs, scene.decoder, Options());
  try {
    engine.SwitchCondition(ConditionId::Parse("unknown_method"));
    FAIL("expected UnknownCondition");
  } catch (const DspError& e) {
    CHECK(e.code() == DspErrc::kUnknownCondition);
  }
}

TEST_CASE("transport and chain changes never step the output") {
  Scene scene = MakeScene(55);
  // Whole-cycle tones loop seamlessly, so any step comes from the engine.
  const double freqs[] = {200.0, 330.0, 250.0};
  std::vector<SourceSample> tones;
  for (double f : freqs) {
    SourceSample t;
    t.id = "tone";
    t.sample_rate = kRate;
    t.samples.resize(kRate);
    for (size_t n = 0; n < t.samples.size(); ++n) {
      t.samples[n] = float(0.3 * std::sin(2.0 * std::numbers::pi * f * double(n) / kRate));
    }
    tones.push_back(std::move(t));
  }
  const ConditionId conds[] = {ConditionId::Reference(), ConditionId::Parametric(),
                               ConditionId::NonParametric(),
                               ConditionId::LowpassAnchor()};
  const char* seats[] = {"A1", "C3"};

  double steady = 0.0;
  const SourceSample* pair[] = {&tones[0], &tones[1]};
  for (const auto& c : conds) {
    for (const char* seat : seats) {
      EngineOptions o = Options();
      const auto y = RenderOffline(*scene.arirs, pair, c, seat, {}, scene.decoder, false,
                                   0.05, o);
      for (size_t n = 1000; n < y.left.size(); ++n) {
        steady = std::max(steady, std::abs(y.left[n] - y.left[n - 1]));
      }
    }
  }

  Engine engine(*scene.arirs, scene.decoder, Options());
  engine.SetSource(0, &tones[0]);
  engine.SetSource(1, &tones[1]);
  engine.Play();
  std::mt19937_64 rng(56);
  AudioBlock out(2, kBlock);
  double prev = 0.0, worst = 0.0;
  bool prev_audible = false;
  for (int i = 0; i < 3000; ++i) {
    for (int k = int(rng() % 3); k > 0; --k) {
      switch (rng() % 7) {
        case 0: engine.Play(); break;
        case 1: engine.Stop(); break;
        case 2: engine.Seek(rng() % kRate); break;
        case 3: engine.SelectSeat(seats[rng() % 2]); break;
        case 4: engine.SwitchCondition(conds[rng() % 4]); break;
        case 5: engine.SetSource(int(rng() % 2), &tones[rng() % 3]); break;
        default: engine.Play(); break;
      }
    }
    engine.RenderBlock(out);
    engine.Poll();
    const bool audible = engine.last_block_playing();
    for (double v : out.channel(0)) {
      if (audible && prev_audible) worst = std::max(worst, std::abs(v - prev));
      prev = v;
      prev_audible = audible;
    }
    if (!audible) prev = 0.0;
  }
  CHECK(steady > 0.0);
  CHECK(worst <= 2.0 * steady);
}

TEST_CASE("audio thread runs concurrently with control traffic") {
  const Scene scene = MakeScene(54);
  Engine engine(*scene.arirs, scene.decoder, Options());
  for (int s = 0; s < 2; ++s) engine.SetSource(s, scene.pointers[s]);
  engine.Play();
  std::atomic<bool> done{false};
  std::thread audio([&] {
    AudioBlock out(2, kBlock);
    while (!done.load()) engine.RenderBlock(out);
  });
  const ConditionId conds[] = {ConditionId::Reference(), ConditionId::Parametric(),
                               ConditionId::NonParametric(),
                               ConditionId::LowpassAnchor()};
  for (int i = 0; i < 400; ++i) {
    engine.SetChain(conds[i % 4], i % 3 == 0 ? "A1" : "C3");
    engine.SetOrientation(Orientation::FromYaw(0.01 * i));
    if (i % 50 == 0) engine.Seek(0);
    std::this_thread::sleep_for(std::chrono::microseconds(200));
  }
  done = true;
  audio.join();
  engine.Poll();
  CHECK(engine.blocks_rendered() > 0);
  CHECK(engine.nonfinite_blocks() == 0);
}

}  // namespace
}  // namespace auralab
