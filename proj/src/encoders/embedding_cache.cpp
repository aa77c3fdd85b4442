#include "comclip/embedding_cache.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>
#include <thread>

#include <spdlog/spdlog.h>

#include "comclip/hashing.hpp"

namespace comclip {
namespace {

constexpr std::string_view kMagic = "CEMB";
constexpr std::uint8_t kVersion = 0x01;
constexpr std::size_t kHeaderSize = 4 + 1 + 4;
constexpr std::string_view kSuffix = ".cemb";

static_assert(std::endian::native == std::endian::little,
              "record encoding assumes a little-endian host");

void append_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t read_u32_le(std::string_view bytes) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) {
    v = (v << 8) | static_cast<std::uint8_t>(bytes[static_cast<std::size_t>(i)]);
  }
  return v;
}

std::string temp_suffix() {
  thread_local std::mt19937_64 gen(std::random_device{}() ^
                                   std::hash<std::thread::id>{}(std::this_thread::get_id()));
  return ".tmp" + std::to_string(gen());
}

}  // namespace

EmbeddingCache::EmbeddingCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::string EmbeddingCache::make_key(std::string_view backend_id, Modality modality,
                                     std::string_view content_hash) {
  std::string material(backend_id);
  material += '|';
  material += to_string(modality);
  material += '|';
  material += content_hash;
  return sha256_hex(material);
}

std::string EmbeddingCache::encode_record(const EmbeddingVector& vec) {
  std::string out(kMagic);
  out.push_back(static_cast<char>(kVersion));
  append_u32_le(out, static_cast<std::uint32_t>(vec.dim()));
  const std::size_t start = out.size();
  out.resize(start + vec.dim() * sizeof(float));
  std::memcpy(out.data() + start, vec.values.data(), vec.dim() * sizeof(float));
  return out;
}

std::optional<EmbeddingVector> EmbeddingCache::decode_record(std::string_view bytes) {
  if (bytes.size() < kHeaderSize || bytes.substr(0, 4) != kMagic ||
      static_cast<std::uint8_t>(bytes[4]) != kVersion) {
    return std::nullopt;
  }
  const std::uint32_t dim = read_u32_le(bytes.substr(5, 4));
  if (dim == 0 || bytes.size() != kHeaderSize + std::size_t{dim} * sizeof(float)) {
    return std::nullopt;
  }
  EmbeddingVector vec;
  vec.values.resize(dim);
  std::memcpy(vec.values.data(), bytes.data() + kHeaderSize, dim * sizeof(float));
  const double n = vec.norm();
  vec.normalized = n > 0.0 && std::abs(n - 1.0) <= 1e-6;
  return vec;
}

std::filesystem::path EmbeddingCache::path_for(const std::string& key) const {
  return dir_ / key.substr(0, 2) / (key + std::string(kSuffix));
}

std::optional<EmbeddingVector> EmbeddingCache::get(const std::string& key,
                                                   std::size_t expected_dim) {
  const auto path = path_for(key);
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ++misses_;
    return std::nullopt;
  }
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto vec = decode_record(bytes);
  if (!vec || (expected_dim != 0 && vec->dim() != expected_dim)) {
    ++corrupt_;
    ++misses_;
    spdlog::warn("corrupt embedding cache record {}; recomputing", path.string());
    return std::nullopt;
  }
  ++hits_;
  return vec;
}

void EmbeddingCache::put(const std::string& key, const EmbeddingVector& vec) {
  const auto final_path = path_for(key);
  std::filesystem::create_directories(final_path.parent_path());
  const auto tmp_path = final_path.string() + temp_suffix();
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    const std::string record = encode_record(vec);
    out.write(record.data(), static_cast<std::streamsize>(record.size()));
  }
  std::filesystem::rename(tmp_path, final_path);
}

EmbeddingVector EmbeddingCache::get_or_compute(const std::string& key,
                                               const std::function<EmbeddingVector()>& compute,
                                               std::size_t expected_dim) {
  if (auto hit = get(key, expected_dim)) return *std::move(hit);
  EmbeddingVector vec = compute();
  put(key, vec);
  return vec;
}

CacheStats EmbeddingCache::stats() const {
  CacheStats s;
  s.hits = hits_.load();
  s.misses = misses_.load();
  s.corrupt = corrupt_.load();
  if (!std::filesystem::exists(dir_)) return s;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir_)) {
    if (entry.is_regular_file() && entry.path().extension() == kSuffix) {
      ++s.entries;
      s.bytes += entry.file_size();
    }
  }
  return s;
}

std::size_t EmbeddingCache::clear() {
  std::size_t removed = 0;
  if (!std::filesystem::exists(dir_)) return 0;
  std::vector<std::filesystem::path> doomed;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir_)) {
    if (entry.is_regular_file() && entry.path().extension() == kSuffix) {
      doomed.push_back(entry.path());
    }
  }
  for (const auto& p : doomed) removed += std::filesystem::remove(p) ? 1 : 0;
  return removed;
}

}  // namespace comclip
