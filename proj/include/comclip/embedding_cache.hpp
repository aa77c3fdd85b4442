#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <future>
#include <optional>
#include <string>

#include "comclip/encoders.hpp"

namespace comclip {

struct CacheStats {
  std::size_t entries = 0;
  std::uintmax_t bytes = 0;
  std::size_t hits = 0;
  std::size_t misses = 0;
  std::size_t corrupt = 0;
};

// On-disk embedding store, one record per file:
//   "CEMB" | 0x01 | u32 LE dim | dim x float32 LE
// Records are written to a temporary file and renamed into place.
class EmbeddingCache {
 public:
  explicit EmbeddingCache(std::filesystem::path dir);

  // sha256(backend_id || "|" || modality || "|" || content_hash), hex.
  static std::string make_key(std::string_view backend_id, Modality modality,
                              std::string_view content_hash);

  static std::string encode_record(const EmbeddingVector& vec);
  // Empty optional for bad magic, version or length.
  static std::optional<EmbeddingVector> decode_record(std::string_view bytes);

  // A corrupt record counts as a miss and is logged.
  std::optional<EmbeddingVector> get(const std::string& key, std::size_t expected_dim = 0);
  void put(const std::string& key, const EmbeddingVector& vec);
  EmbeddingVector get_or_compute(const std::string& key,
                                 const std::function<EmbeddingVector()>& compute,
                                 std::size_t expected_dim = 0);

  CacheStats stats() const;
  // Removes every record; returns how many were deleted.
  std::size_t clear();

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path path_for(const std::string& key) const;

 private:
  std::filesystem::path dir_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
  std::atomic<std::size_t> corrupt_{0};
};

// Memoizes a backend in memory and optionally on disk. Transparent: it reports
// the inner backend's id and dimension.
class CachingBackend final : public EncoderBackend {
 public:
  explicit CachingBackend(EncoderBackend& inner, EmbeddingCache* disk = nullptr);

  const std::string& id() const override { return inner_.id(); }
  std::size_t dim() const override { return inner_.dim(); }
  std::string preprocessing() const override { return inner_.preprocessing(); }

  // Number of requests that reached the wrapped backend.
  std::size_t inner_calls() const { return inner_calls_.load(); }

 protected:
  EmbeddingVector do_encode_image(const Image& image) override;
  EmbeddingVector do_encode_text(const std::string& canonical) override;

 private:
  EmbeddingVector lookup(Modality modality, const std::string& content_hash,
                         const std::function<EmbeddingVector()>& compute);

  EncoderBackend& inner_;
  EmbeddingCache* disk_;
  std::shared_mutex mutex_;
  // Single-flight: concurrent requests for one key share a future.
  std::unordered_map<std::string, std::shared_future<EmbeddingVector>> memory_;
  std::atomic<std::size_t> inner_calls_{0};
};

}  // namespace comclip
