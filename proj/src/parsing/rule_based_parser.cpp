#include <algorithm>
#include <array>
#include <optional>

#include "comclip/errors.hpp"
#include "comclip/parsing.hpp"
#include "lexicon.hpp"
#include "text.hpp"

namespace comclip {
namespace {

enum class Tag { kDet, kAux, kPron, kConj, kPrep, kVerb, kAdj, kNoun };

struct Token {
  std::string word;
  Tag tag = Tag::kNoun;
  bool stop = false;
};

// Multi-word prepositions are merged into one token before tagging.
constexpr std::array<std::array<std::string_view, 3>, 6> kPhrasePreps = {{
    {"in", "front", "of"},
    {"on", "top", "of"},
    {"next", "to", ""},
    {"close", "to", ""},
    {"out", "of", ""},
    {"away", "from", ""},
}};

std::vector<std::string> merge_phrases(const std::vector<std::string>& words) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < words.size();) {
    bool merged = false;
    for (const auto& phrase : kPhrasePreps) {
      const std::size_t len = phrase[2].empty() ? 2 : 3;
      if (i + len > words.size()) continue;
      bool match = true;
      for (std::size_t k = 0; k < len; ++k) match = match && words[i + k] == phrase[k];
      if (!match) continue;
      std::string joined(phrase[0]);
      for (std::size_t k = 1; k < len; ++k) joined += " " + std::string(phrase[k]);
      out.push_back(std::move(joined));
      i += len;
      merged = true;
      break;
    }
    if (!merged) out.push_back(words[i++]);
  }
  return out;
}

bool is_numeral(std::string_view w) {
  return !w.empty() && std::all_of(w.begin(), w.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::vector<Token> tag_tokens(const std::vector<std::string>& words) {
  std::vector<Token> tokens;
  tokens.reserve(words.size());
  bool seen_verb = false;
  for (const auto& w : words) {
    Token tok{w, Tag::kNoun, lexicon::is_stop_word(w)};
    const std::optional<Tag> prev =
        tokens.empty() ? std::nullopt : std::optional<Tag>(tokens.back().tag);
    const bool inflected_ing = w.size() > 4 && w.ends_with("ing") && !lexicon::is_ing_noun(w);

    if (lexicon::is_determiner(w) || is_numeral(w)) {
      tok.tag = Tag::kDet;
    } else if (lexicon::is_auxiliary(w)) {
      tok.tag = Tag::kAux;
    } else if (lexicon::is_preposition(w)) {
      tok.tag = Tag::kPrep;
    } else if (lexicon::is_conjunction(w)) {
      tok.tag = Tag::kConj;
    } else if (lexicon::is_pronoun(w)) {
      tok.tag = Tag::kPron;
    } else if (prev == Tag::kDet || prev == Tag::kAdj) {
      // Inside a noun phrase opened by a determiner or adjective.
      tok.tag = lexicon::is_adjective(w) ? Tag::kAdj : Tag::kNoun;
    } else if (lexicon::is_verb_form(w) || inflected_ing) {
      const bool base = lexicon::is_verb_base(w) && !inflected_ing;
      if (prev == Tag::kAux || prev == Tag::kPron) {
        tok.tag = Tag::kVerb;
      } else if (prev == Tag::kConj) {
        tok.tag = seen_verb ? Tag::kVerb : Tag::kNoun;
      } else if (prev == Tag::kNoun) {
        // "dog runs", "man hitting" vs "road sign"; a bare form only reads as
        // a verb after a plural subject ("dogs run").
        tok.tag = (!base || lexicon::looks_plural(tokens.back().word)) ? Tag::kVerb : Tag::kNoun;
      } else if (prev == Tag::kVerb) {
        tok.tag = inflected_ing ? Tag::kVerb : Tag::kNoun;
      } else {
        tok.tag = Tag::kNoun;
      }
    } else if (lexicon::is_adjective(w)) {
      tok.tag = Tag::kAdj;
    }
    if (tok.tag == Tag::kVerb) seen_verb = true;
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive
};

bool nominal(const Token& t) {
  if (t.stop) return false;
  return t.tag == Tag::kNoun || t.tag == Tag::kAdj || t.tag == Tag::kPron;
}

std::vector<Span> noun_phrases(const std::vector<Token>& tokens) {
  std::vector<Span> spans;
  for (std::size_t i = 0; i < tokens.size();) {
    if (!nominal(tokens[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < tokens.size() && nominal(tokens[j])) ++j;
    // A phrase needs a noun; trailing adjectives alone ("is red") do not count.
    bool has_head = false;
    for (std::size_t k = i; k < j; ++k) has_head = has_head || tokens[k].tag != Tag::kAdj;
    if (has_head) spans.push_back({i, j});
    i = j;
  }
  return spans;
}

std::string phrase_text(const std::vector<Token>& tokens, Span span) {
  std::vector<std::string> words;
  for (std::size_t k = span.begin; k < span.end; ++k) words.push_back(tokens[k].word);
  return text::join(words);
}

std::optional<Span> last_phrase_before(const std::vector<Span>& nps, std::size_t pos) {
  std::optional<Span> best;
  for (const auto& s : nps) {
    if (s.end <= pos) best = s;
  }
  return best;
}

// Subject of a verb at `pos`: the last noun phrase before it, stepping out of
// prepositional modifiers ("a person in a hat is riding" -> person).
std::optional<Span> subject_before(const std::vector<Token>& tokens, const std::vector<Span>& nps,
                                   std::size_t pos) {
  auto span = last_phrase_before(nps, pos);
  while (span) {
    std::size_t k = span->begin;
    while (k > 0 && (tokens[k - 1].tag == Tag::kDet || tokens[k - 1].tag == Tag::kAdj)) --k;
    if (k == 0 || tokens[k - 1].tag != Tag::kPrep) break;
    auto outer = last_phrase_before(nps, k - 1);
    if (!outer || outer->end != k - 1) break;
    span = outer;
  }
  return span;
}

// First noun phrase after `pos`, not crossing another verb.
std::optional<Span> first_phrase_after(const std::vector<Token>& tokens,
                                       const std::vector<Span>& nps, std::size_t pos) {
  std::size_t limit = tokens.size();
  for (std::size_t k = pos; k < tokens.size(); ++k) {
    if (tokens[k].tag == Tag::kVerb && !tokens[k].stop) {
      limit = k;
      break;
    }
  }
  for (const auto& s : nps) {
    if (s.begin >= pos && s.end <= limit) return s;
  }
  return std::nullopt;
}

}  // namespace


ParsedSentence parse_svo_rule_based(std::string_view sentence) {
  const std::string trimmed = text::trim(sentence);
  if (trimmed.empty()) throw EmptySentence("sentence is blank");

  const auto tokens = tag_tokens(merge_phrases(text::word_tokens(trimmed)));
  const auto nps = noun_phrases(tokens);

  struct Found {
    std::size_t head;
    EntityTriple triple;
  };
  std::vector<Found> found;
  std::vector<bool> consumed(tokens.size(), false);
  std::optional<std::string> last_subject;

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].tag != Tag::kVerb || tokens[i].stop) continue;

    std::vector<std::string> predicate{tokens[i].word};
    std::size_t after = i + 1;
    while (after < tokens.size() && tokens[after].tag == Tag::kPrep && !tokens[after].stop) {
      predicate.push_back(tokens[after].word);
      consumed[after] = true;
      ++after;
    }

    // "... and holding an umbrella" shares the previous clause's subject.
    std::size_t back = i;
    while (back > 0 && tokens[back - 1].tag == Tag::kAux) --back;
    std::optional<std::string> subject;
    if (back > 0 && tokens[back - 1].tag == Tag::kConj && last_subject) {
      subject = last_subject;
    } else if (auto span = subject_before(tokens, nps, i)) {
      subject = phrase_text(tokens, *span);
    }
    const auto object_span = first_phrase_after(tokens, nps, after);
    if (!subject || !object_span) continue;

    EntityTriple triple{*subject, text::join(predicate), phrase_text(tokens, *object_span)};
    last_subject = triple.subject;
    found.push_back({i, std::move(triple)});
  }

  // Relations headed by a preposition directly after a noun phrase
  // ("dog near car", "food cart on city street"). Stop-word prepositions count
  // here; "of" only builds compounds.
  for (std::size_t i = 1; i + 1 < tokens.size(); ++i) {
    const Token& t = tokens[i];
    if (t.tag != Tag::kPrep || consumed[i] || t.word == "of") continue;
    std::optional<Span> left;
    for (const auto& s : nps) {
      if (s.end == i) left = s;
    }
    if (!left) continue;
    std::optional<Span> right;
    for (const auto& s : nps) {
      if (s.begin <= i) continue;
      bool blocked = false;
      for (std::size_t k = i + 1; k < s.begin; ++k) {
        blocked = blocked || tokens[k].tag == Tag::kVerb ||
                  (tokens[k].tag == Tag::kPrep && !tokens[k].stop);
      }
      if (!blocked) right = s;
      break;
    }
    if (!right) continue;
    found.push_back({i, {phrase_text(tokens, *left), t.word, phrase_text(tokens, *right)}});
  }

  std::stable_sort(found.begin(), found.end(),
                   [](const Found& a, const Found& b) { return a.head < b.head; });
  std::vector<EntityTriple> triplets;
  for (auto& f : found) {
    if (std::find(triplets.begin(), triplets.end(), f.triple) == triplets.end()) {
      triplets.push_back(std::move(f.triple));
    }
  }
  if (triplets.empty()) {
    throw NoTripleFound("no subject-verb-object structure in \"" + trimmed + "\"");
  }
  return make_parsed_sentence(trimmed, std::move(triplets), ParseSource::kRuleBased);
}

}  // namespace comclip
