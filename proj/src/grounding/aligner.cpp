#include <algorithm>

#include <spdlog/spdlog.h>

#include "../parsing/lexicon.hpp"
#include "../parsing/text.hpp"
#include "comclip/errors.hpp"
#include "comclip/grounding.hpp"

namespace comclip {

const std::vector<Box>* GroundingMap::boxes_for(const Entity& entity) const {
  for (const auto& e : entries) {
    if (e.entity == entity) return &e.boxes;
  }
  return nullptr;
}

nlohmann::json to_json(const GroundingMap& map) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : map.entries) {
    nlohmann::json boxes = nlohmann::json::array();
    for (const auto& b : e.boxes) boxes.push_back({b.x1, b.y1, b.x2, b.y2});
    entries.push_back(
        {{"word", e.entity.word}, {"role", to_string(e.entity.role)}, {"boxes", boxes}});
  }
  nlohmann::json unmatched = nlohmann::json::array();
  for (const auto& e : map.unmatched) {
    unmatched.push_back({{"word", e.word}, {"role", to_string(e.role)}});
  }
  return {{"entries", entries}, {"unmatched", unmatched}};
}

bool lexical_match(std::string_view entity_phrase, std::string_view caption_text) {
  const auto entity_tokens = text::word_tokens(entity_phrase);
  if (entity_tokens.empty()) return false;
  const std::string& head = entity_tokens.back();
  const std::string variant = lexicon::number_variant(head);
  const auto caption_tokens = text::word_tokens(caption_text);
  return std::any_of(caption_tokens.begin(), caption_tokens.end(), [&](const std::string& t) {
    return t == head || (!variant.empty() && t == variant);
  });
}

std::vector<std::size_t> LexicalAligner::match(const Entity& entity, std::string_view,
                                               std::span<const DenseCaption> captions) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < captions.size(); ++i) {
    if (lexical_match(entity.word, captions[i].text)) out.push_back(i);
  }
  return out;
}

std::string build_alignment_prompt(const Entity& entity, std::string_view sentence,
                                   std::span<const DenseCaption> captions) {
  std::string prompt = "Find labels of the image that refer to this object from the sentence.\n";
  prompt += "Sentence: " + text::trim(sentence) + "\n";
  prompt += "Object: " + entity.word + "\n";
  prompt += "Labels:\n";
  for (std::size_t i = 0; i < captions.size(); ++i) {
    prompt += std::to_string(i) + ": " + captions[i].text + "\n";
  }
  prompt += "Return JSON: {\"labels\":[<label numbers>]}";
  return prompt;
}

LlmAligner::LlmAligner(LlmClient& client, int max_tokens)
    : client_(client), max_tokens_(max_tokens) {}

std::vector<std::size_t> LlmAligner::match(const Entity& entity, std::string_view sentence,
                                           std::span<const DenseCaption> captions) const {
  if (captions.empty()) return {};
  try {
    const std::string reply =
        client_.complete(build_alignment_prompt(entity, sentence, captions), max_tokens_);
    const auto object = extract_first_json_object(reply);
    if (object && object->is_object() && object->contains("labels") &&
        (*object)["labels"].is_array()) {
      std::vector<std::size_t> out;
      bool valid = true;
      for (const auto& label : (*object)["labels"]) {
        if (!label.is_number_integer() || label.get<long long>() < 0 ||
            label.get<long long>() >= static_cast<long long>(captions.size())) {
          valid = false;
          break;
        }
        out.push_back(label.get<std::size_t>());
      }
      if (valid) {
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
      }
    }
    spdlog::warn("unusable alignment reply for \"{}\"", entity.word);
  } catch (const std::exception& e) {
    spdlog::warn("alignment request failed for \"{}\": {}", entity.word, e.what());
  }
  ++fallbacks_;
  return lexical_.match(entity, sentence, captions);
}

GroundingMap ground_entities(std::span<const Entity> entities,
                             std::span<const DenseCaption> captions,
                             const EntityAligner& aligner, std::string_view sentence) {
  GroundingMap map;
  for (const auto& entity : entities) {
    if (entity.role == Role::kPredicate) continue;
    std::vector<Box> boxes;
    for (std::size_t index : aligner.match(entity, sentence, captions)) {
      boxes.push_back(captions[index].box);
    }
    if (boxes.empty()) {
      map.unmatched.push_back(entity);
    } else {
      map.entries.push_back({entity, std::move(boxes)});
    }
  }
  return map;
}

}  // namespace comclip
