// Copyright (c) 2026 The asgscore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "asg/embedding_store.h"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace asg {

namespace fs = std::filesystem;

namespace {

std::string Trim(const std::string& s) {
  const char* ws = " \t\r\n";
  size_t b = s.find_first_not_of(ws);
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitWhitespace(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> fields;
  std::string f;
  while (is >> f) fields.push_back(f);
  return fields;
}

long ParseCount(const Manifest& m, const std::string& key,
                const fs::path& path) {
  auto it = m.find(key);
  if (it == m.end()) {
    throw Error(path.string() + ": malformed header, missing key '" + key +
                "'");
  }
  try {
    size_t pos = 0;
    long v = std::stol(it->second, &pos);
    if (pos != it->second.size() || v < 0) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw Error(path.string() + ": malformed header, bad value for '" + key +
                "': " + it->second);
  }
}

std::string FormatScore(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool ParseLabel(const std::string& s, bool* target) {
  if (s == "1") {
    *target = true;
  } else if (s == "0") {
    *target = false;
  } else {
    return false;
  }
  return true;
}

}  // namespace

EmbeddingSet::EmbeddingSet(int dim) : dim_(dim) {
  if (dim < 1) throw Error("embedding dimension must be positive");
}

void EmbeddingSet::Add(Embedding embedding) {
  const size_t record = entries_.size();
  if (embedding.vector.size() != dim_) {
    throw Error("dimension mismatch at record " + std::to_string(record) +
                ": expected " + std::to_string(dim_) + ", got " +
                std::to_string(embedding.vector.size()));
  }
  if (!embedding.vector.allFinite()) {
    throw Error("non-finite value at record " + std::to_string(record));
  }
  if (index_.count(embedding.id)) {
    throw Error("duplicate utterance id '" + embedding.id + "' at record " +
                std::to_string(record));
  }
  index_.emplace(embedding.id, record);
  auto [it, inserted] = speaker_index_.try_emplace(embedding.speaker);
  if (inserted) speaker_order_.push_back(embedding.speaker);
  it->second.push_back(record);
  entries_.push_back(std::move(embedding));
}

size_t EmbeddingSet::IndexOf(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error("unknown utterance id '" + id + "'");
  return it->second;
}

const std::vector<size_t>& EmbeddingSet::PositionsOf(
    const std::string& speaker) const {
  auto it = speaker_index_.find(speaker);
  if (it == speaker_index_.end()) {
    throw Error("unknown speaker id '" + speaker + "'");
  }
  return it->second;
}

std::vector<Vec> EmbeddingSet::Vectors() const {
  std::vector<Vec> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.vector);
  return out;
}

EmbeddingPaths ResolveEmbeddingPaths(const fs::path& stem) {
  std::string base = stem.string();
  const std::string suffix = ".manifest";
  if (base.size() > suffix.size() &&
      base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0) {
    base.resize(base.size() - suffix.size());
  }
  return {base + ".manifest", base + ".f32", base + ".index"};
}

Manifest ReadManifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path.string());
  Manifest m;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = Trim(line);
    if (line.empty() || line[0] == '#') continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(path.string() + ": malformed header at line " +
                  std::to_string(lineno) + ": '" + line + "'");
    }
    m[Trim(line.substr(0, eq))] = Trim(line.substr(eq + 1));
  }
  return m;
}

void WriteManifest(const Manifest& manifest, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& [k, v] : manifest) out << k << '=' << v << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

std::vector<float> ReadF32(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open data file " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  if (bytes.size() % 4 != 0) {
    throw Error(path.string() + ": size is not a multiple of 4 bytes");
  }
  std::vector<float> values(bytes.size() / 4);
  for (size_t i = 0; i < values.size(); ++i) {
    uint32_t u = 0;
    for (int b = 3; b >= 0; --b) {
      u = (u << 8) | static_cast<unsigned char>(bytes[4 * i + b]);
    }
    values[i] = std::bit_cast<float>(u);
  }
  return values;
}

void WriteF32(const std::vector<float>& values, const fs::path& path) {
  std::vector<char> bytes(values.size() * 4);
  for (size_t i = 0; i < values.size(); ++i) {
    uint32_t u = std::bit_cast<uint32_t>(values[i]);
    for (int b = 0; b < 4; ++b) {
      bytes[4 * i + b] = static_cast<char>((u >> (8 * b)) & 0xff);
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed: " + path.string());
}

EmbeddingSet LoadEmbeddings(const fs::path& stem) {
  const EmbeddingPaths paths = ResolveEmbeddingPaths(stem);
  const Manifest m = ReadManifest(paths.manifest);
  auto dtype = m.find("dtype");
  if (dtype == m.end() || dtype->second != "f32le") {
    throw Error(paths.manifest.string() +
                ": malformed header, dtype must be f32le");
  }
  const long dim = ParseCount(m, "dim", paths.manifest);
  const long count = ParseCount(m, "count", paths.manifest);
  if (dim < 1) {
    throw Error(paths.manifest.string() + ": malformed header, dim must be >= 1");
  }

  const std::vector<float> data = ReadF32(paths.data);
  const size_t expected = static_cast<size_t>(count) * dim;
  if (data.size() < expected) {
    throw Error(paths.data.string() + ": dimension mismatch at record " +
                std::to_string(data.size() / dim) + " (data holds " +
                std::to_string(data.size()) + " values, manifest implies " +
                std::to_string(expected) + ")");
  }
  if (data.size() > expected) {
    throw Error(paths.data.string() + ": dimension mismatch at record " +
                std::to_string(count) + " (trailing values after count=" +
                std::to_string(count) + ")");
  }

  std::ifstream in(paths.index);
  if (!in) throw Error("cannot open index " + paths.index.string());
  EmbeddingSet set(static_cast<int>(dim));
  std::string line;
  long record = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw Error(paths.index.string() + ": malformed index at record " +
                  std::to_string(record));
    }
    if (record >= count) {
      throw Error(paths.index.string() + ": more index lines than count=" +
                  std::to_string(count));
    }
    Embedding e;
    e.id = line.substr(0, tab);
    e.speaker = line.substr(tab + 1);
    e.vector.resize(dim);
    for (long k = 0; k < dim; ++k) e.vector[k] = data[record * dim + k];
    set.Add(std::move(e));
    ++record;
  }
  if (record != count) {
    throw Error(paths.index.string() + ": index has " + std::to_string(record) +
                " records, manifest count=" + std::to_string(count));
  }
  return set;
}

void SaveEmbeddings(const EmbeddingSet& set, const fs::path& stem) {
  const EmbeddingPaths paths = ResolveEmbeddingPaths(stem);
  std::vector<float> data;
  data.reserve(set.size() * set.dim());
  for (const auto& e : set.entries()) {
    for (int k = 0; k < set.dim(); ++k) {
      data.push_back(static_cast<float>(e.vector[k]));
    }
  }
  WriteF32(data, paths.data);

  std::ofstream idx(paths.index);
  if (!idx) throw Error("cannot write " + paths.index.string());
  for (const auto& e : set.entries()) idx << e.id << '\t' << e.speaker << '\n';
  if (!idx) throw Error("write failed: " + paths.index.string());

  WriteManifest({{"dim", std::to_string(set.dim())},
                 {"count", std::to_string(set.size())},
                 {"dtype", "f32le"}},
                paths.manifest);
}

EmbeddingSet SpeakerAverage(const EmbeddingSet& set) {
  if (set.empty()) throw Error("speaker average of an empty set");
  EmbeddingSet out(set.dim());
  for (const auto& spk : set.speakers()) {
    const auto& positions = set.PositionsOf(spk);
    Vec mean = Vec::Zero(set.dim());
    for (size_t p : positions) mean += set[p].vector;
    mean /= static_cast<double>(positions.size());
    out.Add({spk, spk, std::move(mean)});
  }
  return out;
}

EmbeddingSet RoundToFloat(const EmbeddingSet& set) {
  EmbeddingSet out(set.dim());
  for (const auto& e : set.entries()) {
    Embedding r = e;
    r.vector = e.vector.cast<float>().cast<double>();
    out.Add(std::move(r));
  }
  return out;
}

TrialList LoadTrials(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open trial file " + path.string());
  TrialList trials;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto fields = SplitWhitespace(line);
    if (fields.empty()) continue;
    Trial t;
    if (fields.size() != 3 || !ParseLabel(fields[0], &t.target)) {
      throw Error(path.string() + ": parse error at line " +
                  std::to_string(lineno) +
                  " (expected 'label enroll_id test_id', label in {0,1})");
    }
    t.enroll = fields[1];
    t.test = fields[2];
    trials.push_back(std::move(t));
  }
  return trials;
}

void SaveTrials(const TrialList& trials, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& t : trials) {
    out << (t.target ? '1' : '0') << ' ' << t.enroll << ' ' << t.test << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

ScoredTrialList LoadScoredTrials(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scored trial file " + path.string());
  ScoredTrialList out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto fields = SplitWhitespace(line);
    if (fields.empty()) continue;
    ScoredTrial s;
    bool ok = fields.size() == 4 && ParseLabel(fields[0], &s.trial.target);
    if (ok) {
      try {
        size_t pos = 0;
        s.score = std::stod(fields[3], &pos);
        ok = pos == fields[3].size() && std::isfinite(s.score);
      } catch (const std::exception&) {
        ok = false;
      }
    }
    if (!ok) {
      throw Error(path.string() + ": parse error at line " +
                  std::to_string(lineno) +
                  " (expected 'label enroll_id test_id score')");
    }
    s.trial.enroll = fields[1];
    s.trial.test = fields[2];
    out.push_back(std::move(s));
  }
  return out;
}

void SaveScoredTrials(const ScoredTrialList& trials, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& s : trials) {
    out << (s.trial.target ? '1' : '0') << ' ' << s.trial.enroll << ' '
        << s.trial.test << ' ' << FormatScore(s.score) << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

void CheckTrialsResolvable(const TrialList& trials, const EmbeddingSet& set) {
  for (size_t i = 0; i < trials.size(); ++i) {
    for (const auto* id : {&trials[i].enroll, &trials[i].test}) {
      if (!set.Contains(*id)) {
        throw Error("trial " + std::to_string(i) + " references unknown id '" +
                    *id + "'");
      }
    }
  }
}

}  // namespace asg
