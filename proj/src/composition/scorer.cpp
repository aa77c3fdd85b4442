#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

#include "comclip/composition.hpp"
#include "comclip/errors.hpp"

namespace comclip {

namespace {

std::optional<Role> omitted_role(SubimageConfig c) {
  switch (c) {
    case SubimageConfig::kOmitSubject: return Role::kSubject;
    case SubimageConfig::kOmitObject: return Role::kObject;
    case SubimageConfig::kOmitPredicate: return Role::kPredicate;
    default: return std::nullopt;
  }
}

std::optional<Role> kept_role(SubimageConfig c) {
  switch (c) {
    case SubimageConfig::kSubjectOnly: return Role::kSubject;
    case SubimageConfig::kObjectOnly: return Role::kObject;
    case SubimageConfig::kPredicateOnly: return Role::kPredicate;
    default: return std::nullopt;
  }
}

std::optional<Role> entity_only_role(SubimageConfig c) {
  switch (c) {
    case SubimageConfig::kEntityOnlySubject: return Role::kSubject;
    case SubimageConfig::kEntityOnlyObject: return Role::kObject;
    case SubimageConfig::kEntityOnlyPredicate: return Role::kPredicate;
    default: return std::nullopt;
  }
}

bool is_entity_only(SubimageConfig c) {
  return c == SubimageConfig::kEntityOnlyAll || entity_only_role(c).has_value();
}

EntityRecord record_for(const EntityEvidence& e) {
  EntityRecord r;
  r.word = e.entity.word;
  r.role = e.entity.role;
  r.kind = e.kind;
  r.subimage_embedding = e.subimage_embedding;
  r.boxes = e.boxes;
  return r;
}

// Entity word vs the whole image. Mean per role, then mean over roles present.
void score_entity_only(CompositionResult& result, std::span<const EntityEvidence> evidence,
                       SubimageConfig config) {
  const auto only = entity_only_role(config);
  std::map<Role, std::vector<double>> by_role;
  for (const auto& e : evidence) {
    if (only && e.entity.role != *only) continue;
    auto r = record_for(e);
    r.similarity = cosine(e.word_embedding, result.global_image_embedding);
    by_role[r.role].push_back(r.similarity);
    result.entity_records.push_back(std::move(r));
  }
  if (by_role.empty()) {
    result.final_score = result.global_score;
    return;
  }
  double total = 0.0;
  for (const auto& [role, sims] : by_role) {
    double sum = 0.0;
    for (double s : sims) sum += s;
    total += sum / static_cast<double>(sims.size());
  }
  for (auto& r : result.entity_records) {
    r.weight = 1.0 / (static_cast<double>(by_role.size()) *
                      static_cast<double>(by_role.at(r.role).size()));
  }
  result.final_score = std::clamp(total / static_cast<double>(by_role.size()), -1.0, 1.0);
}

}  // namespace

CompositionResult compose_score(const EmbeddingVector& global_image,
                                const EmbeddingVector& global_text,
                                std::span<const EntityEvidence> evidence,
                                const CompositionConfig& config) {
  config.validate();
  if (global_image.dim() != global_text.dim()) {
    throw DimensionMismatch("image and text embeddings differ in dimension");
  }
  CompositionResult result;
  result.global_image_embedding = global_image;
  result.global_text_embedding = global_text;
  result.subimage_config = config.subimage_config;
  const auto text = to_doubles(global_text);
  const auto image = to_doubles(global_image);
  result.global_score = cosine(text, image);

  if (is_entity_only(config.subimage_config)) {
    score_entity_only(result, evidence, config.subimage_config);
    return result;
  }

  const auto omit = omitted_role(config.subimage_config);
  std::vector<double> sims;
  std::vector<EmbeddingVector> subs;
  for (const auto& e : evidence) {
    if (omit && e.entity.role == *omit) continue;
    auto r = record_for(e);
    r.similarity = cosine(e.word_embedding, e.subimage_embedding);
    sims.push_back(r.similarity);
    subs.push_back(e.subimage_embedding);
    result.entity_records.push_back(std::move(r));
  }
  const auto weights = entity_weights(sims, config.weighting_mode, config.logit_scale);
  for (std::size_t k = 0; k < weights.size(); ++k) result.entity_records[k].weight = weights[k];
  result.composed = compose_visual(global_image, subs, weights);
  result.final_score = cosine(text, result.composed);
  return result;
}

nlohmann::json to_json(const CompositionResult& result, bool explain) {
  nlohmann::json entities = nlohmann::json::array();
  nlohmann::json weights = nlohmann::json::array();
  for (const auto& r : result.entity_records) {
    nlohmann::json e{{"word", r.word},
                     {"role", to_string(r.role)},
                     {"kind", to_string(r.kind)},
                     {"similarity", r.similarity},
                     {"weight", r.weight}};
    if (explain) {
      nlohmann::json boxes = nlohmann::json::array();
      for (const auto& b : r.boxes) boxes.push_back({b.x1, b.y1, b.x2, b.y2});
      e["boxes"] = std::move(boxes);
      e["subimage_zero"] = r.subimage_embedding.is_zero();
    }
    entities.push_back(std::move(e));
    weights.push_back(r.weight);
  }
  nlohmann::json j{{"global_score", result.global_score},
                   {"entities", std::move(entities)},
                   {"weights", std::move(weights)},
                   {"final_score", result.final_score}};
  if (explain) {
    j["subimage_config"] = to_string(result.subimage_config);
    double norm = 0.0;
    for (double x : result.composed) norm += x * x;
    j["composed_norm"] = std::sqrt(norm);
    j["dim"] = result.global_image_embedding.dim();
  }
  return j;
}

ComClipScorer::ComClipScorer(ScoringComponents components, CompositionConfig config)
    : components_(components), config_(std::move(config)) {
  config_.validate();
}

ParsedSentence ComClipScorer::parse(std::string_view sentence) const {
  try {
    return components_.parser.parse(sentence);
  } catch (const NoTripleFound&) {
    return make_parsed_sentence(std::string(sentence), {}, ParseSource::kRuleBased);
  }
}

GroundingMap ComClipScorer::ground(const Image& image, const ParsedSentence& parsed) const {
  std::vector<DenseCaption> captions;
  if (components_.captioner != nullptr) captions = components_.captioner->caption(image);
  return ground_entities(parsed.entities, captions, components_.aligner, parsed.raw_text);
}

std::vector<EntitySubimage> ComClipScorer::subimages(const Image& image,
                                                     const ParsedSentence& parsed) const {
  const auto config = config_.subimage_config;
  std::vector<EntitySubimage> out;
  if (config == SubimageConfig::kAllBlack) {
    for (const auto& e : parsed.entities) {
      Subimage s;
      s.pixels = Image::zeros(image.width(), image.height());
      s.kind = subimage_kind_for(e.role);
      s.fill = FillPolicy::kBlack;
      out.push_back({e, std::move(s)});
    }
    return out;
  }
  if (config == SubimageConfig::kAllOriginal) {
    for (const auto& e : parsed.entities) out.push_back({e, fallback_subimage(image)});
    return out;
  }
  out = build_entity_subimages(image, parsed, ground(image, parsed), config_.subimages);
  if (const auto keep = kept_role(config)) {
    for (auto& es : out) {
      if (es.entity.role != *keep) es.subimage = fallback_subimage(image);
    }
  }
  return out;
}

CompositionResult ComClipScorer::score(const Image& image, std::string_view sentence) const {
  return score(image, parse(sentence));
}

CompositionResult ComClipScorer::score(const Image& image, const ParsedSentence& parsed) const {
  auto& encoder = components_.encoder;
  const auto global_image = encoder.encode_image(image);
  const auto global_text = encoder.encode_text(parsed.raw_text);

  std::vector<EntityEvidence> evidence;
  if (is_entity_only(config_.subimage_config)) {
    for (const auto& e : parsed.entities) {
      EntityEvidence ev;
      ev.entity = e;
      ev.kind = subimage_kind_for(e.role);
      ev.word_embedding = encoder.encode_text(e.word);
      evidence.push_back(std::move(ev));
    }
  } else {
    const auto omit = omitted_role(config_.subimage_config);
    for (auto& es : subimages(image, parsed)) {
      if (omit && es.entity.role == *omit) continue;
      EntityEvidence ev;
      ev.entity = es.entity;
      ev.kind = es.subimage.kind;
      ev.boxes = es.subimage.source_boxes;
      ev.word_embedding = encoder.encode_text(es.entity.word);
      ev.subimage_embedding = encoder.encode_image(es.subimage.pixels);
      evidence.push_back(std::move(ev));
    }
  }
  return compose_score(global_image, global_text, evidence, config_);
}

double ComClipScorer::baseline(const Image& image, std::string_view sentence) const {
  return baseline_score(image, sentence, components_.encoder);
}

CompositionResult comclip_score(const Image& image, std::string_view sentence,
                                const ScoringComponents& components,
                                const CompositionConfig& config) {
  return ComClipScorer(components, config).score(image, sentence);
}

double baseline_score(const Image& image, std::string_view sentence, EncoderBackend& encoder) {
  const auto text = encoder.encode_text(sentence);
  const auto img = encoder.encode_image(image);
  return cosine(text, img);
}

}  // namespace comclip
