// Copyright 2026 The DPAD Toolkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Binary embedding store ("DPDE"), little-endian:
//
//   bytes 0..3   magic "DPDE"
//   u16          version (1)
//   u32          dim
//   u32          record_count
//   per record:  u16 key_len, key bytes "{sample_id}/{role}", dim x f32
//
// The store is immutable once loaded; concurrent lookups are safe.

#ifndef DPAD_EMBEDDING_STORE_H_
#define DPAD_EMBEDDING_STORE_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dpad/semantics.h"

namespace dpad {

class EmbeddingStore {
 public:
  static constexpr uint16_t kVersion = 1;

  explicit EmbeddingStore(uint32_t dim);

  // Throws kMagicMismatch, kUnsupportedVersion, kTruncated, kDuplicateKey,
  // kParseError (bad key), kNonFinite, or kZeroNorm.
  static EmbeddingStore Parse(std::span<const uint8_t> bytes);
  static EmbeddingStore Load(const std::filesystem::path& path);

  // Same validation as Parse. Throws kDimMismatch on a wrong-length vector.
  void Add(EmbeddingRecord record);

  const EmbeddingRecord* Find(std::string_view sample_id, Role role) const;
  bool Contains(std::string_view sample_id, Role role) const {
    return Find(sample_id, role) != nullptr;
  }

  std::string Serialize() const;

  uint32_t dim() const { return dim_; }
  size_t size() const { return records_.size(); }
  const std::vector<EmbeddingRecord>& records() const { return records_; }

 private:
  uint32_t dim_;
  std::vector<EmbeddingRecord> records_;
  std::unordered_map<std::string, size_t> index_;
};

std::string EmbeddingKey(std::string_view sample_id, Role role);

}  // namespace dpad

#endif  // DPAD_EMBEDDING_STORE_H_
