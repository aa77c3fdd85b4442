#pragma once

#include <atomic>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "comclip/llm_client.hpp"

namespace comclip {

// Declaration order is the tie-break order when two entities share a position.
enum class Role { kSubject, kPredicate, kObject };

std::string_view to_string(Role role);
// Accepts "subject" / "predicate" / "object"; throws UsageError otherwise.
Role role_from_string(std::string_view name);

struct EntityTriple {
  std::string subject;
  std::string predicate;
  std::string object;

  friend bool operator==(const EntityTriple&, const EntityTriple&) = default;
};

struct Entity {
  std::string word;
  Role role = Role::kSubject;

  friend bool operator==(const Entity&, const Entity&) = default;
};

// kAnnotation: triplets supplied by a dataset rather than parsed.
enum class ParseSource { kRuleBased, kLlm, kAnnotation };
std::string_view to_string(ParseSource source);

struct ParsedSentence {
  std::string raw_text;
  std::vector<EntityTriple> triplets;
  // Deduplicated by (word, role), ordered by first occurrence in raw_text.
  std::vector<Entity> entities;
  ParseSource source = ParseSource::kRuleBased;

  friend bool operator==(const ParsedSentence&, const ParsedSentence&) = default;
};

// Lowercases, trims, collapses inner whitespace and drops leading articles.
std::string normalize_entity_phrase(std::string_view phrase);

// Builds the entity list from the triplets.
std::vector<Entity> entities_of(const ParsedSentence& parsed);
ParsedSentence make_parsed_sentence(std::string raw_text, std::vector<EntityTriple> triplets,
                                    ParseSource source);

// Stop-word-filtered subject/verb/object extraction with an embedded lexicon.
// Throws EmptySentence for blank input and NoTripleFound when no
// subject-verb-object structure is present.
ParsedSentence parse_svo_rule_based(std::string_view sentence);

// True when `word` is in the frozen English stop-word list.
bool is_stop_word(std::string_view word);

nlohmann::json to_json(const EntityTriple& triple);
nlohmann::json to_json(const ParsedSentence& parsed);

class SentenceParser {
 public:
  virtual ~SentenceParser() = default;
  virtual ParsedSentence parse(std::string_view sentence) const = 0;
};

class RuleBasedParser final : public SentenceParser {
 public:
  ParsedSentence parse(std::string_view sentence) const override {
    return parse_svo_rule_based(sentence);
  }
};

// Prompt sent to the language model for one sentence.
std::string build_parse_prompt(std::string_view sentence);

// Returns the first balanced {...} object in `text` that parses as JSON.
std::optional<nlohmann::json> extract_first_json_object(std::string_view text);

// Parses {"triplets":[{"subject","predicate","object"}...]} out of a model
// reply. Empty optional when nothing usable is found.
std::optional<std::vector<EntityTriple>> triplets_from_reply(std::string_view reply);

// Language-model parser. Any client or format failure falls back to the
// rule-based parser; the fallback is counted, never thrown.
class LlmParser final : public SentenceParser {
 public:
  explicit LlmParser(LlmClient& client, int max_tokens = 512);

  // EmptySentence is still thrown for blank input; the rule-based parser's
  // NoTripleFound is absorbed into an empty triplet list.
  ParsedSentence parse(std::string_view sentence) const override;

  std::size_t fallback_count() const { return fallbacks_.load(); }

 private:
  LlmClient& client_;
  int max_tokens_;
  mutable std::atomic<std::size_t> fallbacks_{0};
  mutable std::mutex memo_mutex_;
  mutable std::unordered_map<std::string, ParsedSentence> memo_;
};

}  // namespace comclip
