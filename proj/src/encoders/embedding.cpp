#include <cmath>

#include "../parsing/text.hpp"
#include "comclip/encoders.hpp"
#include "comclip/errors.hpp"

namespace comclip {

double EmbeddingVector::norm() const {
  double sum = 0.0;
  for (float v : values) sum += static_cast<double>(v) * static_cast<double>(v);
  return std::sqrt(sum);
}

bool EmbeddingVector::is_zero() const {
  for (float v : values) {
    if (v != 0.0f) return false;
  }
  return true;
}

namespace {

template <typename T>
EmbeddingVector unit_from(std::span<const T> values) {
  double sum = 0.0;
  for (T v : values) {
    if (!std::isfinite(static_cast<double>(v))) throw DecodeError("embedding has non-finite values");
    sum += static_cast<double>(v) * static_cast<double>(v);
  }
  EmbeddingVector out;
  out.values.resize(values.size(), 0.0f);
  if (sum == 0.0) return out;
  const double inv = 1.0 / std::sqrt(sum);
  for (std::size_t i = 0; i < values.size(); ++i) {
    out.values[i] = static_cast<float>(static_cast<double>(values[i]) * inv);
  }
  out.normalized = true;
  return out;
}

}  // namespace

EmbeddingVector make_unit_embedding(std::span<const double> values) { return unit_from(values); }
EmbeddingVector make_unit_embedding(std::span<const float> values) { return unit_from(values); }

std::string_view to_string(Modality modality) {
  return modality == Modality::kImage ? "image" : "text";
}

std::string canonical_text(std::string_view text) {
  std::string trimmed = text::trim(text);
  if (trimmed.empty()) throw EmptyText("text to encode is blank");
  return trimmed;
}

EmbeddingVector EncoderBackend::encode_image(const Image& image) {
  if (image.empty()) throw DecodeError("cannot encode an empty image");
  EmbeddingVector out;
  if (thread_safe()) {
    out = do_encode_image(image);
  } else {
    std::lock_guard lock(serial_);
    out = do_encode_image(image);
  }
  if (dim() != 0 && out.dim() != dim()) {
    throw DimensionMismatch(id() + " returned dim " + std::to_string(out.dim()) +
                             ", declared " + std::to_string(dim()));
  }
  return out;
}

EmbeddingVector EncoderBackend::encode_text(std::string_view text) {
  const std::string canonical = canonical_text(text);
  EmbeddingVector out;
  if (thread_safe()) {
    out = do_encode_text(canonical);
  } else {
    std::lock_guard lock(serial_);
    out = do_encode_text(canonical);
  }
  if (dim() != 0 && out.dim() != dim()) {
    throw DimensionMismatch(id() + " returned dim " + std::to_string(out.dim()) +
                             ", declared " + std::to_string(dim()));
  }
  return out;
}

}  // namespace comclip
