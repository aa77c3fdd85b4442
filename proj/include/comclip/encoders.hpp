#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "comclip/image.hpp"
#include "comclip/service_client.hpp"

namespace comclip {

struct EmbeddingVector {
  std::vector<float> values;
  // Set when the vector has unit L2 norm. The zero vector is never normalized.
  bool normalized = false;

  std::size_t dim() const { return values.size(); }
  double norm() const;
  bool is_zero() const;

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

// L2-normalizes in double precision and stores float32. An all-zero input
// stays zero with normalized=false. Throws DecodeError on non-finite values.
EmbeddingVector make_unit_embedding(std::span<const double> values);
EmbeddingVector make_unit_embedding(std::span<const float> values);

enum class Modality { kImage, kText };
std::string_view to_string(Modality modality);

// Trimmed text; throws EmptyText when nothing is left.
std::string canonical_text(std::string_view text);

// Image/text encoder with a stable identity. Identical id and input bytes must
// always give an identical vector; embedding caches rely on it.
class EncoderBackend {
 public:
  virtual ~EncoderBackend() = default;

  virtual const std::string& id() const = 0;
  virtual std::size_t dim() const = 0;
  virtual std::string preprocessing() const = 0;
  // Backends returning false are called from one thread at a time.
  virtual bool thread_safe() const { return true; }

  // Checks the output dimension against dim().
  EmbeddingVector encode_image(const Image& image);
  // Text is trimmed before encoding.
  EmbeddingVector encode_text(std::string_view text);

 protected:
  virtual EmbeddingVector do_encode_image(const Image& image) = 0;
  virtual EmbeddingVector do_encode_text(const std::string& canonical) = 0;

 private:
  std::mutex serial_;
};

// Pseudo-random direction seeded by sha256(bytes): the first 8 digest bytes,
// little-endian, seed a mt19937_64 whose outputs map to uniforms in [-1, 1).
// Returned in double precision before float rounding.
std::vector<double> mock_unit_vector(std::string_view bytes, std::size_t dim);
EmbeddingVector mock_encode(std::string_view bytes, std::size_t dim);

// Model-free backend for tests and offline runs. An all-zero image maps to
// the zero vector.
class MockBackend final : public EncoderBackend {
 public:
  explicit MockBackend(std::size_t dim = 64);

  const std::string& id() const override { return id_; }
  std::size_t dim() const override { return dim_; }
  std::string preprocessing() const override { return "raw-bgr8"; }

 protected:
  EmbeddingVector do_encode_image(const Image& image) override;
  EmbeddingVector do_encode_text(const std::string& canonical) override;

 private:
  std::size_t dim_;
  std::string id_;
};

// POST {endpoint}/encode
//   {"modality":"image","payload_b64":<PNG>} | {"modality":"text","text":<s>}
//   -> {"dim": int, "values": [float...]}
class HttpEncoderBackend final : public EncoderBackend {
 public:
  // dim == 0 accepts whatever the service reports on first use.
  HttpEncoderBackend(ServiceOptions options, std::string id, std::size_t dim = 0,
                     std::string preprocessing = "service-defined");

  const std::string& id() const override { return id_; }
  std::size_t dim() const override { return dim_.load(); }
  std::string preprocessing() const override { return preprocessing_; }

 protected:
  EmbeddingVector do_encode_image(const Image& image) override;
  EmbeddingVector do_encode_text(const std::string& canonical) override;

 private:
  EmbeddingVector from_response(const nlohmann::json& response);

  JsonServiceClient service_;
  std::string id_;
  std::atomic<std::size_t> dim_;
  std::string preprocessing_;
};

}  // namespace comclip
