#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "comclip/composition.hpp"
#include "comclip/errors.hpp"

namespace comclip {

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionMismatch(fmt::format("cosine of {}-dim and {}-dim vectors", a.size(), b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::vector<double> to_doubles(const EmbeddingVector& v) {
  return {v.values.begin(), v.values.end()};
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  const auto da = to_doubles(a);
  const auto db = to_doubles(b);
  return cosine(da, db);
}

std::vector<double> entity_weights(std::span<const double> similarities, WeightingMode mode,
                                   double logit_scale) {
  for (double s : similarities) {
    if (!std::isfinite(s)) throw UsageError("entity similarity is not finite");
  }
  std::vector<double> w(similarities.begin(), similarities.end());
  if (mode == WeightingMode::kRawSimilarity || w.empty()) return w;

  const double top = *std::max_element(w.begin(), w.end());
  double total = 0.0;
  for (double& x : w) {
    x = std::exp(logit_scale * (x - top));
    total += x;
  }
  for (double& x : w) x /= total;
  return w;
}

std::vector<double> compose_visual(const EmbeddingVector& global,
                                   std::span<const EmbeddingVector> sub_embeddings,
                                   std::span<const double> weights) {
  if (sub_embeddings.size() != weights.size()) {
    throw DimensionMismatch(fmt::format("{} subimage embeddings but {} weights",
                                        sub_embeddings.size(), weights.size()));
  }
  std::vector<double> v = to_doubles(global);
  for (std::size_t k = 0; k < sub_embeddings.size(); ++k) {
    const auto& sub = sub_embeddings[k].values;
    if (sub.size() != v.size()) {
      throw DimensionMismatch(
          fmt::format("subimage embedding has dim {}, expected {}", sub.size(), v.size()));
    }
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += weights[k] * static_cast<double>(sub[i]);
  }
  return v;
}

}  // namespace comclip
