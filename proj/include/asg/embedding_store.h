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

#ifndef ASG_EMBEDDING_STORE_H_
#define ASG_EMBEDDING_STORE_H_

#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "asg/common.h"

namespace asg {

struct Embedding {
  std::string id;
  std::string speaker;
  Vec vector;
};

// Ordered, validated collection of embeddings sharing one dimension.
// Utterance ids are unique; every vector has length dim() and finite values.
class EmbeddingSet {
 public:
  explicit EmbeddingSet(int dim);

  // Throws asg::Error on a duplicate id, wrong length or non-finite value.
  void Add(Embedding embedding);

  int dim() const { return dim_; }
  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<Embedding>& entries() const { return entries_; }
  const Embedding& operator[](size_t i) const { return entries_[i]; }

  bool Contains(const std::string& id) const { return index_.count(id) > 0; }
  // Position of `id`; throws if unknown.
  size_t IndexOf(const std::string& id) const;
  const Embedding& Find(const std::string& id) const {
    return entries_[IndexOf(id)];
  }

  // Speakers in order of first appearance.
  const std::vector<std::string>& speakers() const { return speaker_order_; }
  const std::vector<size_t>& PositionsOf(const std::string& speaker) const;

  std::vector<Vec> Vectors() const;

 private:
  int dim_;
  std::vector<Embedding> entries_;
  std::unordered_map<std::string, size_t> index_;
  std::vector<std::string> speaker_order_;
  std::unordered_map<std::string, std::vector<size_t>> speaker_index_;
};

// On-disk embedding files are addressed by a stem: <stem>.manifest holds
// key=value lines (dim, count, dtype=f32le), <stem>.f32 holds count*dim
// little-endian float32 values row-major, <stem>.index holds one
// "utt_id<TAB>speaker_id" line per row. A stem ending in ".manifest" is
// accepted and the suffix stripped.
struct EmbeddingPaths {
  std::filesystem::path manifest;
  std::filesystem::path data;
  std::filesystem::path index;
};
EmbeddingPaths ResolveEmbeddingPaths(const std::filesystem::path& stem);

EmbeddingSet LoadEmbeddings(const std::filesystem::path& stem);
// Values are rounded to float32 on write.
void SaveEmbeddings(const EmbeddingSet& set, const std::filesystem::path& stem);

// One output entry per distinct speaker (first-appearance order); id and
// speaker are both the speaker id, the vector is the unweighted mean.
EmbeddingSet SpeakerAverage(const EmbeddingSet& set);

// Rounds every component to the nearest float32, so that the set survives a
// save/load cycle unchanged.
EmbeddingSet RoundToFloat(const EmbeddingSet& set);

// Key=value manifest shared by the embedding and parameter files.
using Manifest = std::map<std::string, std::string>;
Manifest ReadManifest(const std::filesystem::path& path);
void WriteManifest(const Manifest& manifest, const std::filesystem::path& path);
std::vector<float> ReadF32(const std::filesystem::path& path);
void WriteF32(const std::vector<float>& values,
              const std::filesystem::path& path);

struct Trial {
  std::string enroll;
  std::string test;
  bool target = false;
};
using TrialList = std::vector<Trial>;

struct ScoredTrial {
  Trial trial;
  double score = 0.0;
};
using ScoredTrialList = std::vector<ScoredTrial>;

// "label enroll_id test_id" per line, label in {0,1}. Blank lines skipped.
TrialList LoadTrials(const std::filesystem::path& path);
void SaveTrials(const TrialList& trials, const std::filesystem::path& path);

// "label enroll_id test_id score" per line.
ScoredTrialList LoadScoredTrials(const std::filesystem::path& path);
void SaveScoredTrials(const ScoredTrialList& trials,
                      const std::filesystem::path& path);

// Throws if any trial references an id missing from `set`.
void CheckTrialsResolvable(const TrialList& trials, const EmbeddingSet& set);

}  // namespace asg

#endif  // ASG_EMBEDDING_STORE_H_
