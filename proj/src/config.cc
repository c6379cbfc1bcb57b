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


#include "auralab/config.h"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace auralab {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void Fail(const std::string& key, const std::string& what) {
  throw ConfigError("config key '" + key + "': " + what);
}

const json* Child(const json& j, const char* key) {
  if (!j.contains(key)) return nullptr;
  const json& c = j.at(key);
  return c.is_null() ? nullptr : &c;
}

std::string String(const json& j, const std::string& key) {
  if (!j.is_string()) Fail(key, "expected a string");
  return j.get<std::string>();
}

int64_t Integer(const json& j, const std::string& key, int64_t lo, int64_t hi) {
  if (!j.is_number_integer()) Fail(key, "expected an integer");
  const auto v = j.get<int64_t>();
  if (v < lo || v > hi) {
    Fail(key, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return v;
}

double Real(const json& j, const std::string& key) {
  if (!j.is_number()) Fail(key, "expected a number");
  return j.get<double>();
}

fs::path PathIn(const json& j, const std::string& key, const fs::path& base) {
  const fs::path p = String(j, key);
  if (p.empty()) return p;
  return p.is_absolute() ? p : (base / p).lexically_normal();
}

void RejectUnknown(const json& j, const std::string& where,
                   std::initializer_list<const char*> known) {
  if (!j.is_object()) Fail(where, "expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) Fail(where.empty() ? key : where + "." + key, "unknown key");
  }
}

void ParseSession(const json& j, SessionConfig& s, int& pose_decimation) {
  RejectUnknown(j, "session",
                {"assessor", "session", "trials", "conditions", "attributes", "seed",
                 "threshold", "exclusion_fraction", "pose_decimation"});
  if (auto* v = Child(j, "assessor")) s.assessor_id = String(*v, "session.assessor");
  if (auto* v = Child(j, "session")) s.session_id = String(*v, "session.session");
  if (auto* v = Child(j, "trials")) {
    if (!v->is_array()) Fail("session.trials", "expected an array");
    s.trials.clear();
    for (const auto& t : *v) s.trials.push_back(String(t, "session.trials"));
  }
  if (auto* v = Child(j, "conditions")) {
    if (!v->is_array()) Fail("session.conditions", "expected an array");
    s.conditions_under_test.clear();
    for (const auto& c : *v) {
      try {
        s.conditions_under_test.push_back(
            ConditionId::Parse(String(c, "session.conditions")));
      } catch (const ArirError& e) {
        Fail("session.conditions", e.what());
      }
    }
  }
  if (auto* v = Child(j, "attributes")) {
    if (!v->is_array()) Fail("session.attributes", "expected an array");
    s.attributes.clear();
    for (const auto& a : *v) {
      const std::string key = String(a, "session.attributes");
      const Attribute* attr = FindAttribute(key);
      if (attr == nullptr) Fail("session.attributes", "unknown attribute '" + key + "'");
      s.attributes.push_back(attr->id);
    }
  }
  if (auto* v = Child(j, "seed")) {
    if (!v->is_number_unsigned() && !v->is_number_integer()) {
      Fail("session.seed", "expected an integer");
    }
    if (v->is_number_integer() && v->get<int64_t>() < 0) {
      Fail("session.seed", "must be non-negative");
    }
    s.rng_seed = v->get<uint64_t>();
  }
  if (auto* v = Child(j, "threshold")) {
    s.rating_threshold = int(Integer(*v, "session.threshold", 0, 100));
  }
  if (auto* v = Child(j, "exclusion_fraction")) {
    s.exclusion_fraction = Real(*v, "session.exclusion_fraction");
    if (!(s.exclusion_fraction >= 0.0 && s.exclusion_fraction <= 1.0)) {
      Fail("session.exclusion_fraction", "must be in [0, 1]");
    }
  }
  if (auto* v = Child(j, "pose_decimation")) {
    pose_decimation = int(Integer(*v, "session.pose_decimation", 1, 1000));
  }
}

}  // namespace

std::string_view ToString(AudioSink sink) {
  return sink == AudioSink::kWav ? "wav" : "null";
}

ServerConfig ParseServerConfig(std::string_view json_text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RejectUnknown(j, "", {"dataset", "decoder", "sources", "audio", "osc", "websocket",
                        "session", "output_dir"});
  ServerConfig c;

  const json* dataset = Child(j, "dataset");
  if (dataset == nullptr) Fail("dataset", "required");
  RejectUnknown(*dataset, "dataset", {"root", "manifest"});
  if (!dataset->contains("root")) Fail("dataset.root", "required");
  c.dataset_root = PathIn(dataset->at("root"), "dataset.root", base_dir);
  c.manifest = dataset->contains("manifest")
                   ? PathIn(dataset->at("manifest"), "dataset.manifest", base_dir)
                   : c.dataset_root / "manifest.json";

  if (!j.contains("decoder")) Fail("decoder", "required");
  c.decoder = PathIn(j.at("decoder"), "decoder", base_dir);

  if (auto* v = Child(j, "sources")) {
    if (!v->is_array()) Fail("sources", "expected an array");
    for (const auto& s : *v) {
      RejectUnknown(s, "sources[]", {"id", "path"});
      if (!s.contains("path")) Fail("sources[].path", "required");
      SourceEntry e;
      e.path = PathIn(s.at("path"), "sources[].path", base_dir);
      e.id = s.contains("id") ? String(s.at("id"), "sources[].id")
                              : e.path.stem().string();
      c.sources.push_back(std::move(e));
    }
  }

  if (auto* v = Child(j, "audio")) {
    RejectUnknown(*v, "audio", {"sink", "path", "block"});
    if (auto* s = Child(*v, "sink")) {
      const std::string sink = String(*s, "audio.sink");
      if (sink == "null") {
        c.sink = AudioSink::kNull;
      } else if (sink == "wav") {
        c.sink = AudioSink::kWav;
      } else {
        Fail("audio.sink", "expected \"null\" or \"wav\"");
      }
    }
    if (auto* p = Child(*v, "path")) c.sink_path = PathIn(*p, "audio.path", base_dir);
    if (auto* b = Child(*v, "block")) {
      c.block = size_t(Integer(*b, "audio.block", 16, 8192));
    }
  }

  if (auto* v = Child(j, "osc")) {
    RejectUnknown(*v, "osc", {"listen", "port", "notify_host", "notify_port"});
    if (auto* x = Child(*v, "listen")) c.osc_listen = String(*x, "osc.listen");
    if (auto* x = Child(*v, "port")) c.osc_port = uint16_t(Integer(*x, "osc.port", 0, 65535));
    if (auto* x = Child(*v, "notify_host")) c.notify_host = String(*x, "osc.notify_host");
    if (auto* x = Child(*v, "notify_port")) {
      c.notify_port = uint16_t(Integer(*x, "osc.notify_port", 0, 65535));
    }
  }

  if (auto* v = Child(j, "websocket")) {
    RejectUnknown(*v, "websocket", {"listen", "port", "static_dir"});
    if (auto* x = Child(*v, "listen")) c.ws_listen = String(*x, "websocket.listen");
    if (auto* x = Child(*v, "port")) {
      c.ws_port = uint16_t(Integer(*x, "websocket.port", 0, 65535));
    }
    if (auto* x = Child(*v, "static_dir")) {
      c.static_dir = PathIn(*x, "websocket.static_dir", base_dir);
    }
  }

  if (auto* v = Child(j, "session")) ParseSession(*v, c.session, c.pose_decimation);
  const json* out = Child(j, "output_dir");
  c.output_dir = out != nullptr ? PathIn(*out, "output_dir", base_dir) : base_dir;
  return c;
}

ServerConfig LoadServerConfig(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const fs::path base = fs::absolute(path).parent_path();
  return ParseServerConfig(ss.str(), base);
}

fs::path ConfigPathFromEnvironment() {
  const char* env = std::getenv("AURALAB_CONFIG");
  return env != nullptr ? fs::path(env) : fs::path();
}

std::vector<std::string> CheckServerConfig(const ServerConfig& c) {
  std::vector<std::string> problems;
  auto need_file = [&](const fs::path& p, const std::string& what) {
    if (p.empty()) {
      problems.push_back(what + " path is empty");
    } else if (!fs::is_regular_file(p)) {
      problems.push_back(what + " not found: " + p.string());
    }
  };
  if (!fs::is_directory(c.dataset_root)) {
    problems.push_back("dataset root not found: " + c.dataset_root.string());
  }
  need_file(c.manifest, "manifest");
  need_file(c.decoder, "decoder file");
  std::set<std::string> ids;
  for (const auto& s : c.sources) {
    need_file(s.path, "source '" + s.id + "'");
    if (!ids.insert(s.id).second) problems.push_back("duplicate source id '" + s.id + "'");
  }
  for (const auto& trial : c.session.trials) {
    std::string_view rest = trial;
    while (!rest.empty()) {
      const auto plus = rest.find('+');
      const std::string id(rest.substr(0, plus));
      if (!ids.count(id)) problems.push_back("trial references unknown source '" + id + "'");
      rest = plus == std::string_view::npos ? "" : rest.substr(plus + 1);
    }
  }
  if (c.sink == AudioSink::kWav && c.sink_path.empty()) {
    problems.push_back("audio.sink \"wav\" needs audio.path");
  }
  if (c.osc_port != 0 && c.osc_port == c.ws_port) {
    problems.push_back("osc.port and websocket.port are equal");
  }
  if (c.osc_port != 0 && c.osc_port == c.notify_port && c.notify_host == c.osc_listen) {
    problems.push_back("osc.notify_port would send notifications to the server itself");
  }
  if (!c.static_dir.empty() && !fs::is_directory(c.static_dir)) {
    problems.push_back("websocket.static_dir not found: " + c.static_dir.string());
  }
  try {
    ValidateSessionConfig(c.session);
  } catch (const SessionError& e) {
    problems.push_back(e.what());
  }
  return problems;
}

}  // namespace auralab
