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

#include "dpad/embedding_store.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "dpad/error.h"
#include "dpad/rollout.h"

namespace dpad {
namespace {

static_assert(std::numeric_limits<float>::is_iec559, "f32 payloads assume IEEE-754");

constexpr std::string_view kMagic = "DPDE";

class Reader {
 public:
  explicit Reader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T Get(const char* what) {
    Need(sizeof(T), what);
    T value = 0;
    for (size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes_[pos_ + i]) << (8 * i);
    pos_ += sizeof(T);
    return value;
  }

  float GetF32(const char* what) { return std::bit_cast<float>(Get<uint32_t>(what)); }

  std::string_view GetString(size_t n, const char* what) {
    Need(n, what);
    std::string_view s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  size_t pos() const { return pos_; }
  size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void Need(size_t n, const char* what) {
    if (remaining() < n) {
      throw Error(ErrorCode::kTruncated,
                  std::string("unexpected end of store reading ") + what + " at byte " +
                      std::to_string(pos_));
    }
  }

  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
};

template <typename T>
void Put(std::string& out, T value) {
  for (size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
}

}  // namespace

std::string EmbeddingKey(std::string_view sample_id, Role role) {
  return std::string(sample_id) + "/" + std::string(RoleName(role));
}

EmbeddingStore::EmbeddingStore(uint32_t dim) : dim_(dim) {
  if (dim == 0) throw Error(ErrorCode::kDimMismatch, "embedding dimension must be positive");
}

void EmbeddingStore::Add(EmbeddingRecord record) {
  if (record.vector.size() != dim_) {
    throw Error(ErrorCode::kDimMismatch, EmbeddingKey(record.sample_id, record.role) + " has " +
                                             std::to_string(record.vector.size()) +
                                             " entries, store dim is " + std::to_string(dim_));
  }
  double norm = 0.0;
  for (float v : record.vector) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFinite, EmbeddingKey(record.sample_id, record.role));
    }
    norm += static_cast<double>(v) * v;
  }
  if (norm == 0.0) throw Error(ErrorCode::kZeroNorm, EmbeddingKey(record.sample_id, record.role));
  std::string key = EmbeddingKey(record.sample_id, record.role);
  if (key.size() > 0xFFFF) throw Error(ErrorCode::kParseError, "key longer than 65535 bytes");
  if (index_.contains(key)) throw Error(ErrorCode::kDuplicateKey, key);
  index_.emplace(std::move(key), records_.size());
  records_.push_back(std::move(record));
}

const EmbeddingRecord* EmbeddingStore::Find(std::string_view sample_id, Role role) const {
  const auto it = index_.find(EmbeddingKey(sample_id, role));
  return it == index_.end() ? nullptr : &records_[it->second];
}

EmbeddingStore EmbeddingStore::Parse(std::span<const uint8_t> bytes) {
  Reader in(bytes);
  if (in.GetString(kMagic.size(), "magic") != kMagic) {
    throw Error(ErrorCode::kMagicMismatch, "not a DPDE embedding store");
  }
  const uint16_t version = in.Get<uint16_t>("version");
  if (version != kVersion) {
    throw Error(ErrorCode::kUnsupportedVersion, "store version " + std::to_string(version));
  }
  const uint32_t dim = in.Get<uint32_t>("dim");
  const uint32_t count = in.Get<uint32_t>("record_count");
  EmbeddingStore store(dim);
  for (uint32_t r = 0; r < count; ++r) {
    const size_t key_at = in.pos();
    const uint16_t key_len = in.Get<uint16_t>("key_len");
    const std::string_view key = in.GetString(key_len, "key");
    const size_t slash = key.rfind('/');
    const auto role = slash == std::string_view::npos ? std::nullopt
                                                      : ParseRole(key.substr(slash + 1));
    if (!role || slash == 0 || FindInvalidUtf8(key)) {
      throw Error(ErrorCode::kParseError, "record " + std::to_string(r) + " at byte " +
                                              std::to_string(key_at) + " has malformed key");
    }
    if (uint64_t{dim} * sizeof(float) > in.remaining()) {
      throw Error(ErrorCode::kTruncated, "record " + std::to_string(r) + " vector cut short");
    }
    EmbeddingRecord rec{std::string(key.substr(0, slash)), *role, std::vector<float>(dim)};
    for (uint32_t i = 0; i < dim; ++i) rec.vector[i] = in.GetF32("vector");
    store.Add(std::move(rec));
  }
  if (in.remaining() != 0) {
    throw Error(ErrorCode::kParseError,
                std::to_string(in.remaining()) + " trailing bytes after last record");
  }
  return store;
}

EmbeddingStore EmbeddingStore::Load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  const std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
  if (f.bad()) throw Error(ErrorCode::kIoError, "read failed: " + path.string());
  return Parse(bytes);
}

std::string EmbeddingStore::Serialize() const {
  std::string out(kMagic);
  Put<uint16_t>(out, kVersion);
  Put<uint32_t>(out, dim_);
  Put<uint32_t>(out, static_cast<uint32_t>(records_.size()));
  for (const EmbeddingRecord& rec : records_) {
    const std::string key = EmbeddingKey(rec.sample_id, rec.role);
    Put<uint16_t>(out, static_cast<uint16_t>(key.size()));
    out += key;
    for (float v : rec.vector) Put<uint32_t>(out, std::bit_cast<uint32_t>(v));
  }
  return out;
}

}  // namespace dpad
