#include <algorithm>
#include <cctype>
#include <limits>
#include <tuple>

#include "comclip/errors.hpp"
#include "comclip/parsing.hpp"
#include "lexicon.hpp"
#include "text.hpp"

namespace comclip {
namespace text {

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)); };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return std::string(s);
}

std::vector<std::string> word_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    while (!cur.empty() && (cur.back() == '\'' || cur.back() == '-')) cur.pop_back();
    while (!cur.empty() && (cur.front() == '\'' || cur.front() == '-')) cur.erase(0, 1);
    if (cur.ends_with("'s")) cur.resize(cur.size() - 2);
    if (!cur.empty()) out.push_back(cur);
    cur.clear();
  };
  for (char raw : s) {
    const auto c = static_cast<unsigned char>(raw);
    if (std::isalnum(c) || raw == '\'' || raw == '-') {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

std::string join(const std::vector<std::string>& words, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += sep;
    out += words[i];
  }
  return out;
}

}  // namespace text

std::string_view to_string(Role role) {
  switch (role) {
    case Role::kSubject:
      return "subject";
    case Role::kPredicate:
      return "predicate";
    case Role::kObject:
      return "object";
  }
  return "subject";
}

Role role_from_string(std::string_view name) {
  const std::string lower = text::to_lower(text::trim(name));
  if (lower == "subject") return Role::kSubject;
  if (lower == "predicate") return Role::kPredicate;
  if (lower == "object") return Role::kObject;
  throw UsageError("unknown role '" + std::string(name) + "'");
}

std::string_view to_string(ParseSource source) {
  switch (source) {
    case ParseSource::kLlm: return "llm";
    case ParseSource::kAnnotation: return "annotation";
    default: return "rule_based";
  }
}

bool is_stop_word(std::string_view word) { return lexicon::is_stop_word(word); }

std::string normalize_entity_phrase(std::string_view phrase) {
  std::vector<std::string> words;
  std::string cur;
  for (char raw : phrase) {
    const auto c = static_cast<unsigned char>(raw);
    if (std::isspace(c)) {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  // Surrounding punctuation is not part of an entity.
  for (auto& w : words) {
    while (!w.empty() && std::ispunct(static_cast<unsigned char>(w.back())) && w.back() != '\'')
      w.pop_back();
    while (!w.empty() && std::ispunct(static_cast<unsigned char>(w.front()))) w.erase(0, 1);
  }
  std::erase_if(words, [](const std::string& w) { return w.empty(); });
  std::size_t first = 0;
  while (first < words.size() &&
         (words[first] == "a" || words[first] == "an" || words[first] == "the")) {
    ++first;
  }
  return text::join(std::vector<std::string>(words.begin() + static_cast<long>(first), words.end()));
}

namespace {

constexpr std::size_t kNotFound = std::numeric_limits<std::size_t>::max();

std::size_t find_from(const std::vector<std::string>& sentence_tokens, std::string_view phrase,
                      std::size_t from) {
  const auto phrase_tokens = text::word_tokens(phrase);
  if (phrase_tokens.empty()) return kNotFound;
  for (std::size_t i = from; i + phrase_tokens.size() <= sentence_tokens.size(); ++i) {
    if (std::equal(phrase_tokens.begin(), phrase_tokens.end(),
                   sentence_tokens.begin() + static_cast<long>(i))) {
      return i;
    }
  }
  for (std::size_t i = from; i < sentence_tokens.size(); ++i) {
    if (sentence_tokens[i] == phrase_tokens.front()) return i;
  }
  return kNotFound;
}

// Position of `phrase` at or after `from`, else anywhere.
std::size_t position(const std::vector<std::string>& sentence_tokens, std::string_view phrase,
                     std::size_t from) {
  const auto p = find_from(sentence_tokens, phrase, from);
  return p != kNotFound || from == 0 ? p : find_from(sentence_tokens, phrase, 0);
}

}  // namespace

std::vector<Entity> entities_of(const ParsedSentence& parsed) {
  const auto tokens = text::word_tokens(parsed.raw_text);
  // Each triplet is located left to right, so a word repeated in two roles
  // gets two positions.
  std::vector<std::pair<std::size_t, Entity>> keyed;
  auto add = [&](const std::string& word, Role role, std::size_t pos) {
    if (word.empty()) return;
    Entity e{word, role};
    for (auto& [p, k] : keyed) {
      if (k == e) {
        p = std::min(p, pos);
        return;
      }
    }
    keyed.emplace_back(pos, std::move(e));
  };
  for (const auto& t : parsed.triplets) {
    const auto s = position(tokens, t.subject, 0);
    const auto p = position(tokens, t.predicate, s == kNotFound ? 0 : s + 1);
    const auto o = position(tokens, t.object, p == kNotFound ? (s == kNotFound ? 0 : s + 1) : p + 1);
    add(t.subject, Role::kSubject, s);
    add(t.predicate, Role::kPredicate, p);
    add(t.object, Role::kObject, o);
  }
  std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    return std::tie(a.first, a.second.role, a.second.word) <
           std::tie(b.first, b.second.role, b.second.word);
  });
  std::vector<Entity> out;
  out.reserve(keyed.size());
  for (auto& [pos, e] : keyed) out.push_back(std::move(e));
  return out;
}

ParsedSentence make_parsed_sentence(std::string raw_text, std::vector<EntityTriple> triplets,
                                    ParseSource source) {
  ParsedSentence parsed{std::move(raw_text), std::move(triplets), {}, source};
  parsed.entities = entities_of(parsed);
  return parsed;
}

nlohmann::json to_json(const EntityTriple& triple) {
  return {{"subject", triple.subject},
          {"predicate", triple.predicate},
          {"object", triple.object}};
}

nlohmann::json to_json(const ParsedSentence& parsed) {
  nlohmann::json triplets = nlohmann::json::array();
  for (const auto& t : parsed.triplets) triplets.push_back(to_json(t));
  nlohmann::json entities = nlohmann::json::array();
  for (const auto& e : parsed.entities) {
    entities.push_back({{"word", e.word}, {"role", to_string(e.role)}});
  }
  return {{"raw_text", parsed.raw_text},
          {"triplets", std::move(triplets)},
          {"entities", std::move(entities)},
          {"source", to_string(parsed.source)}};
}

}  // namespace comclip
