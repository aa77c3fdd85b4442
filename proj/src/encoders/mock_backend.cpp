#include <cmath>
#include <random>

#include "comclip/encoders.hpp"
#include "comclip/errors.hpp"
#include "comclip/hashing.hpp"

namespace comclip {

std::vector<double> mock_unit_vector(std::string_view bytes, std::size_t dim) {
  if (dim < 8) throw UsageError("mock encoder needs dim >= 8");
  const Sha256Digest digest = sha256(bytes);
  std::uint64_t seed = 0;
  for (int i = 7; i >= 0; --i) seed = (seed << 8) | digest[static_cast<std::size_t>(i)];
  std::mt19937_64 gen(seed);

  std::vector<double> out(dim);
  double sum = 0.0;
  for (double& v : out) {
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    v = 2.0 * u - 1.0;
    sum += v * v;
  }
  const double inv = 1.0 / std::sqrt(sum);
  for (double& v : out) v *= inv;
  return out;
}

EmbeddingVector mock_encode(std::string_view bytes, std::size_t dim) {
  const auto unit = mock_unit_vector(bytes, dim);
  EmbeddingVector out;
  out.values.assign(unit.begin(), unit.end());
  out.normalized = true;
  return out;
}

MockBackend::MockBackend(std::size_t dim)
    : dim_(dim), id_("mock-sha256-mt64-d" + std::to_string(dim)) {
  if (dim < 8) throw UsageError("mock encoder needs dim >= 8");
}

EmbeddingVector MockBackend::do_encode_image(const Image& image) {
  if (image.all_zero()) return EmbeddingVector{std::vector<float>(dim_, 0.0f), false};
  return mock_encode(image.canonical_bytes(), dim_);
}

EmbeddingVector MockBackend::do_encode_text(const std::string& canonical) {
  return mock_encode(canonical, dim_);
}

}  // namespace comclip
