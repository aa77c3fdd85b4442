#pragma once

#include <string>
#include <string_view>

// Closed word classes backing the rule-based parser.
namespace comclip::lexicon {

bool is_stop_word(std::string_view w);
bool is_determiner(std::string_view w);
bool is_auxiliary(std::string_view w);
bool is_pronoun(std::string_view w);
bool is_conjunction(std::string_view w);
bool is_preposition(std::string_view w);
bool is_adjective(std::string_view w);
// Any inflection of a known verb.
bool is_verb_form(std::string_view w);
// True for known verbs in their bare (uninflected) form.
bool is_verb_base(std::string_view w);
// "-ing" words that are nouns ("building", "ceiling").
bool is_ing_noun(std::string_view w);
bool looks_plural(std::string_view w);

// Singular/plural counterpart of a noun, or empty when it has none.
std::string number_variant(std::string_view noun);

}  // namespace comclip::lexicon
