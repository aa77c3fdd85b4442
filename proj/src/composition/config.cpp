#include <array>
#include <cmath>

#include "comclip/composition.hpp"
#include "comclip/errors.hpp"

namespace comclip {

namespace {

constexpr std::array<std::pair<SubimageConfig, std::string_view>, 13> kConfigNames{{
    {SubimageConfig::kFull, "full"},
    {SubimageConfig::kAllBlack, "all_black"},
    {SubimageConfig::kAllOriginal, "all_original"},
    {SubimageConfig::kSubjectOnly, "subject_only"},
    {SubimageConfig::kObjectOnly, "object_only"},
    {SubimageConfig::kPredicateOnly, "predicate_only"},
    {SubimageConfig::kOmitSubject, "omit_subject"},
    {SubimageConfig::kOmitObject, "omit_object"},
    {SubimageConfig::kOmitPredicate, "omit_predicate"},
    {SubimageConfig::kEntityOnlySubject, "entity_only_subject"},
    {SubimageConfig::kEntityOnlyObject, "entity_only_object"},
    {SubimageConfig::kEntityOnlyPredicate, "entity_only_predicate"},
    {SubimageConfig::kEntityOnlyAll, "entity_only_all"},
}};

constexpr std::array<SubimageConfig, 13> kAllConfigs = [] {
  std::array<SubimageConfig, 13> out{};
  for (std::size_t i = 0; i < kConfigNames.size(); ++i) out[i] = kConfigNames[i].first;
  return out;
}();

}  // namespace

std::string_view to_string(SubimageConfig config) {
  for (const auto& [c, name] : kConfigNames) {
    if (c == config) return name;
  }
  return "full";
}

SubimageConfig subimage_config_from_string(std::string_view name) {
  for (const auto& [c, n] : kConfigNames) {
    if (n == name) return c;
  }
  throw UsageError("unknown subimage config: " + std::string(name));
}

std::span<const SubimageConfig> all_subimage_configs() { return kAllConfigs; }

std::string_view to_string(WeightingMode mode) {
  return mode == WeightingMode::kSoftmax ? "softmax" : "raw_similarity";
}

WeightingMode weighting_mode_from_string(std::string_view name) {
  if (name == "softmax") return WeightingMode::kSoftmax;
  if (name == "raw_similarity") return WeightingMode::kRawSimilarity;
  throw UsageError("unknown weighting mode: " + std::string(name));
}

void CompositionConfig::validate() const {
  if (!std::isfinite(logit_scale) || logit_scale <= 0.0) {
    throw UsageError("logit_scale must be a positive number");
  }
  if (!std::isfinite(subimages.blur_radius_fraction) || subimages.blur_radius_fraction < 0.0) {
    throw UsageError("blur radius fraction must be non-negative");
  }
}

nlohmann::json to_json(const CompositionConfig& config) {
  return {
      {"weighting_mode", to_string(config.weighting_mode)},
      {"logit_scale", config.logit_scale},
      {"subimage_config", to_string(config.subimage_config)},
      {"fill", to_string(config.subimages.fill)},
      {"blur_radius_fraction", config.subimages.blur_radius_fraction},
      {"crop_tight", config.subimages.crop_tight},
  };
}

CompositionConfig composition_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw UsageError("composition config must be a JSON object");
  CompositionConfig c;
  try {
    if (j.contains("weighting_mode"))
      c.weighting_mode = weighting_mode_from_string(j.at("weighting_mode").get<std::string>());
    if (j.contains("logit_scale")) c.logit_scale = j.at("logit_scale").get<double>();
    if (j.contains("subimage_config"))
      c.subimage_config = subimage_config_from_string(j.at("subimage_config").get<std::string>());
    if (j.contains("fill")) c.subimages.fill = fill_policy_from_string(j.at("fill").get<std::string>());
    if (j.contains("blur_radius_fraction"))
      c.subimages.blur_radius_fraction = j.at("blur_radius_fraction").get<double>();
    if (j.contains("crop_tight")) c.subimages.crop_tight = j.at("crop_tight").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("bad composition config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace comclip
