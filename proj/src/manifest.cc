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

#include "dpad/manifest.h"

#include <openssl/evp.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>

#include "dpad/error.h"
#include "dpad/io.h"

namespace dpad {
namespace {

std::string Hex(const unsigned char* data, size_t n) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * n);
  for (size_t i = 0; i < n; ++i) {
    out.push_back(kDigits[data[i] >> 4]);
    out.push_back(kDigits[data[i] & 0xF]);
  }
  return out;
}

void RemoveQuietly(const std::filesystem::path& p) {
  std::error_code ignored;
  std::filesystem::remove(p, ignored);
}

}  // namespace

std::string Sha256Hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw Error(ErrorCode::kIoError, "SHA-256 computation failed");
  }
  return Hex(digest, len);
}

std::string FileSha256(const std::filesystem::path& path) { return Sha256Hex(ReadFile(path)); }

void RunManifest::AddInput(const std::filesystem::path& path) {
  inputs.push_back({path.string(), FileSha256(path)});
}

nlohmann::ordered_json RunManifest::ToJson() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["argv"] = argv;
  j["tool_version"] = tool_version;
  j["config"] = config;
  auto& in = j["inputs"] = nlohmann::ordered_json::array();
  for (const InputDigest& d : inputs) in.push_back({{"path", d.path}, {"sha256", d.sha256}});
  j["outputs"] = outputs;
  j["started_utc"] = started_utc;
  j["wall_seconds"] = wall_seconds;
  return j;
}

std::string UtcTimestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void OutputTransaction::Stage(const std::filesystem::path& path, std::string contents) {
  staged_.emplace_back(path, std::move(contents));
}

void OutputTransaction::Commit(RunManifest& manifest, const std::filesystem::path& manifest_path) {
  std::vector<std::filesystem::path> temps;
  auto abandon = [&] {
    for (const auto& t : temps) RemoveQuietly(t);
  };
  for (const auto& [path, contents] : staged_) {
    std::filesystem::path tmp = path;
    tmp += ".partial." + std::to_string(::getpid());
    temps.push_back(tmp);
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    f.flush();
    if (!f) {
      abandon();
      throw Error(ErrorCode::kIoError, "cannot write " + path.string());
    }
  }
  manifest.outputs.clear();
  for (const auto& [path, contents] : staged_) manifest.outputs.push_back(path.string());
  try {
    AtomicWrite(manifest_path, manifest.ToJson().dump(2) + "\n");
  } catch (...) {
    abandon();
    throw;
  }
  for (size_t i = 0; i < staged_.size(); ++i) {
    std::error_code ec;
    std::filesystem::rename(temps[i], staged_[i].first, ec);
    if (ec) {
      for (size_t k = i; k < temps.size(); ++k) RemoveQuietly(temps[k]);
      throw Error(ErrorCode::kIoError, "cannot finalize " + staged_[i].first.string() + ": " + ec.message());
    }
  }
  staged_.clear();
}

}  // namespace dpad
