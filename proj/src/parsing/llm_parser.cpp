#include <cstdlib>

#include <spdlog/spdlog.h>

#include "comclip/errors.hpp"
#include "comclip/hashing.hpp"
#include "comclip/parsing.hpp"
#include "text.hpp"

namespace comclip {

HttpLlmClient::HttpLlmClient(ServiceOptions options) : service_(std::move(options)) {}

std::string HttpLlmClient::complete(const std::string& prompt, int max_tokens) {
  const nlohmann::json response =
      service_.post("/complete", {{"prompt", prompt}, {"max_tokens", max_tokens}},
                    sha256_hex(prompt));
  if (!response.is_object() || !response.contains("text") || !response["text"].is_string()) {
    throw BackendUnavailable("LLM response lacks a string \"text\" field");
  }
  return response["text"].get<std::string>();
}

ServiceOptions with_llm_token_from_env(ServiceOptions options) {
  if (options.bearer_token.empty()) {
    if (const char* token = std::getenv("COMCLIP_LLM_TOKEN")) options.bearer_token = token;
  }
  return options;
}

std::string build_parse_prompt(std::string_view sentence) {
  std::string prompt =
      "Analyze the objects in this sentence, the attributes of the objects and how each "
      "object is connected.\n";
  prompt += "Sentence: ";
  prompt += text::trim(sentence);
  prompt += "\n";
  prompt +=
      "Return JSON: {\"triplets\":[{\"subject\":...,\"predicate\":...,\"object\":...}]}";
  return prompt;
}

std::optional<nlohmann::json> extract_first_json_object(std::string_view reply) {
  for (std::size_t start = reply.find('{'); start != std::string_view::npos;
       start = reply.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < reply.size(); ++i) {
      const char c = reply[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}' && --depth == 0) {
        auto parsed = nlohmann::json::parse(reply.substr(start, i - start + 1), nullptr, false);
        if (!parsed.is_discarded()) return parsed;
        break;
      }
    }
  }
  return std::nullopt;
}

std::optional<std::vector<EntityTriple>> triplets_from_reply(std::string_view reply) {
  const auto object = extract_first_json_object(reply);
  if (!object || !object->is_object()) return std::nullopt;
  const auto it = object->find("triplets");
  if (it == object->end() || !it->is_array()) return std::nullopt;
  std::vector<EntityTriple> out;
  for (const auto& row : *it) {
    if (!row.is_object()) continue;
    auto field = [&](const char* key) -> std::string {
      const auto f = row.find(key);
      if (f == row.end() || !f->is_string()) return {};
      return normalize_entity_phrase(f->get<std::string>());
    };
    EntityTriple t{field("subject"), field("predicate"), field("object")};
    if (t.subject.empty() || t.predicate.empty() || t.object.empty()) continue;
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(std::move(t));
  }
  if (out.empty()) return std::nullopt;
  return out;
}

LlmParser::LlmParser(LlmClient& client, int max_tokens)
    : client_(client), max_tokens_(max_tokens) {}

ParsedSentence LlmParser::parse(std::string_view sentence) const {
  const std::string trimmed = text::trim(sentence);
  if (trimmed.empty()) throw EmptySentence("sentence is blank");
  {
    std::lock_guard lock(memo_mutex_);
    if (auto it = memo_.find(trimmed); it != memo_.end()) return it->second;
  }

  ParsedSentence result;
  std::optional<std::vector<EntityTriple>> triplets;
  try {
    triplets = triplets_from_reply(client_.complete(build_parse_prompt(trimmed), max_tokens_));
    if (!triplets) spdlog::warn("LLM reply for \"{}\" had no usable triplets", trimmed);
  } catch (const std::exception& e) {
    spdlog::warn("LLM parse failed for \"{}\": {}", trimmed, e.what());
  }
  if (triplets) {
    result = make_parsed_sentence(trimmed, *std::move(triplets), ParseSource::kLlm);
  } else {
    ++fallbacks_;
    try {
      result = parse_svo_rule_based(trimmed);
    } catch (const NoTripleFound&) {
      result = make_parsed_sentence(trimmed, {}, ParseSource::kRuleBased);
    }
  }

  std::lock_guard lock(memo_mutex_);
  memo_.emplace(trimmed, result);
  return result;
}

}  // namespace comclip
