#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "comclip/encoders.hpp"
#include "comclip/grounding.hpp"
#include "comclip/parsing.hpp"

namespace comclip {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

// kSoftmax: w_k = softmax(logit_scale * S)_k.  kRawSimilarity: w_k = S_k.
enum class WeightingMode { kSoftmax, kRawSimilarity };

// Which subimages feed the composition.
//   kAllBlack / kAllOriginal       every subimage replaced by a black / the source image
//   kSubjectOnly ...               one kind kept, the others replaced by the source image
//   kOmitSubject ...               one kind dropped from the weighted sum
//   kEntityOnly*                   no composition: entity word vs whole image
enum class SubimageConfig {
  kFull,
  kAllBlack,
  kAllOriginal,
  kSubjectOnly,
  kObjectOnly,
  kPredicateOnly,
  kOmitSubject,
  kOmitObject,
  kOmitPredicate,
  kEntityOnlySubject,
  kEntityOnlyObject,
  kEntityOnlyPredicate,
  kEntityOnlyAll,
};

std::string_view to_string(SubimageConfig config);
SubimageConfig subimage_config_from_string(std::string_view name);
std::span<const SubimageConfig> all_subimage_configs();

std::string_view to_string(WeightingMode mode);
WeightingMode weighting_mode_from_string(std::string_view name);

struct CompositionConfig {
  WeightingMode weighting_mode = WeightingMode::kSoftmax;
  double logit_scale = 100.0;
  SubimageConfig subimage_config = SubimageConfig::kFull;
  SubimageOptions subimages;

  // Throws UsageError when logit_scale is not a positive finite number.
  void validate() const;
};

nlohmann::json to_json(const CompositionConfig& config);
// Missing keys keep their defaults.
CompositionConfig composition_config_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Math
// ---------------------------------------------------------------------------

// dot(a, b) / (|a| |b|), clamped to [-1, 1]; exactly 0 when either is zero.
// Throws DimensionMismatch on unequal lengths.
double cosine(std::span<const double> a, std::span<const double> b);
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

std::vector<double> entity_weights(std::span<const double> similarities, WeightingMode mode,
                                   double logit_scale);

// global + sum_k weights[k] * sub_embeddings[k]; not renormalized.
std::vector<double> compose_visual(const EmbeddingVector& global,
                                   std::span<const EmbeddingVector> sub_embeddings,
                                   std::span<const double> weights);

std::vector<double> to_doubles(const EmbeddingVector& v);

// ---------------------------------------------------------------------------
// Scoring
// ---------------------------------------------------------------------------

// Already-encoded inputs for one entity.
struct EntityEvidence {
  Entity entity;
  SubimageKind kind = SubimageKind::kFallbackOriginal;
  EmbeddingVector word_embedding;
  // Unused by the entity-only configurations.
  EmbeddingVector subimage_embedding;
  std::vector<Box> boxes;
};

struct EntityRecord {
  std::string word;
  Role role = Role::kSubject;
  SubimageKind kind = SubimageKind::kFallbackOriginal;
  double similarity = 0.0;
  double weight = 0.0;
  EmbeddingVector subimage_embedding;
  std::vector<Box> boxes;
};

struct CompositionResult {
  EmbeddingVector global_image_embedding;
  EmbeddingVector global_text_embedding;
  // cosine(text, image) without composition.
  double global_score = 0.0;
  std::vector<EntityRecord> entity_records;
  std::vector<double> composed;
  double final_score = 0.0;
  SubimageConfig subimage_config = SubimageConfig::kFull;
};

nlohmann::json to_json(const CompositionResult& result, bool explain = false);

// Per-entity similarity, weighting and composition over encoded inputs.
// Applies the omit_* and entity_only_* configurations; pixel-level
// replacements (all_black, *_only, ...) happen before encoding.
CompositionResult compose_score(const EmbeddingVector& global_image,
                                const EmbeddingVector& global_text,
                                std::span<const EntityEvidence> evidence,
                                const CompositionConfig& config);

struct ScoringComponents {
  EncoderBackend& encoder;
  const SentenceParser& parser;
  const EntityAligner& aligner;
  // No captioner means no regions: every entity falls back to the source image.
  DenseCaptioner* captioner = nullptr;
};

// parse -> ground -> subimages -> encode -> compose.
class ComClipScorer {
 public:
  ComClipScorer(ScoringComponents components, CompositionConfig config);

  // NoTripleFound from the parser yields a composition with no entities.
  CompositionResult score(const Image& image, std::string_view sentence) const;
  CompositionResult score(const Image& image, const ParsedSentence& parsed) const;
  double baseline(const Image& image, std::string_view sentence) const;

  ParsedSentence parse(std::string_view sentence) const;
  GroundingMap ground(const Image& image, const ParsedSentence& parsed) const;
  // Subimages after the configured replacements.
  std::vector<EntitySubimage> subimages(const Image& image, const ParsedSentence& parsed) const;

  const CompositionConfig& config() const { return config_; }

 private:
  ScoringComponents components_;
  CompositionConfig config_;
};

CompositionResult comclip_score(const Image& image, std::string_view sentence,
                                const ScoringComponents& components,
                                const CompositionConfig& config);

double baseline_score(const Image& image, std::string_view sentence, EncoderBackend& encoder);

}  // namespace comclip
