#include "lexicon.hpp"

#include <array>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace comclip::lexicon {
namespace {

using WordSet = std::unordered_set<std::string_view>;

// NLTK English stop-word list (179 entries), frozen.
const WordSet& stop_words() {
  static const WordSet kWords = {
      "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "you're",
      "you've", "you'll", "you'd", "your", "yours", "yourself", "yourselves", "he",
      "him", "his", "himself", "she", "she's", "her", "hers", "herself", "it", "it's",
      "its", "itself", "they", "them", "their", "theirs", "themselves", "what",
      "which", "who", "whom", "this", "that", "that'll", "these", "those", "am", "is",
      "are", "was", "were", "be", "been", "being", "have", "has", "had", "having",
      "do", "does", "did", "doing", "a", "an", "the", "and", "but", "if", "or",
      "because", "as", "until", "while", "of", "at", "by", "for", "with", "about",
      "against", "between", "into", "through", "during", "before", "after", "above",
      "below", "to", "from", "up", "down", "in", "out", "on", "off", "over", "under",
      "again", "further", "then", "once", "here", "there", "when", "where", "why",
      "how", "all", "any", "both", "each", "few", "more", "most", "other", "some",
      "such", "no", "nor", "not", "only", "own", "same", "so", "than", "too", "very",
      "s", "t", "can", "will", "just", "don", "don't", "should", "should've", "now",
      "d", "ll", "m", "o", "re", "ve", "y", "ain", "aren", "aren't", "couldn",
      "couldn't", "didn", "didn't", "doesn", "doesn't", "hadn", "hadn't", "hasn",
      "hasn't", "haven", "haven't", "isn", "isn't", "ma", "mightn", "mightn't",
      "mustn", "mustn't", "needn", "needn't", "shan", "shan't", "shouldn",
      "shouldn't", "wasn", "wasn't", "weren", "weren't", "won", "won't", "wouldn",
      "wouldn't"};
  return kWords;
}

const WordSet& determiners() {
  static const WordSet kWords = {
      "a", "an", "the", "this", "that", "these", "those", "some", "several", "many",
      "few", "each", "every", "all", "both", "another", "other", "any", "no", "his",
      "her", "their", "its", "my", "our", "your", "one", "two", "three", "four",
      "five", "six", "seven", "eight", "nine", "ten", "eleven", "twelve", "dozen",
      "multiple", "various", "lots", "lot", "couple", "pair", "group", "bunch"};
  return kWords;
}

const WordSet& auxiliaries() {
  static const WordSet kWords = {"am",   "is",    "are",    "was",   "were",  "be",
                                 "been", "being", "has",    "have",  "had",   "does",
                                 "do",   "did",   "can",    "could", "will",  "would",
                                 "may",  "might", "should", "must",  "isn't", "aren't"};
  return kWords;
}

const WordSet& pronouns() {
  static const WordSet kWords = {"i",    "you",     "he",      "she",       "it",
                                 "we",   "they",    "someone", "somebody",  "something",
                                 "one",  "nobody",  "everyone", "everybody", "who",
                                 "which", "that"};
  return kWords;
}

const WordSet& conjunctions() {
  static const WordSet kWords = {"and", "or", "but", "while", "as", "then"};
  return kWords;
}

const WordSet& prepositions() {
  static const WordSet kWords = {
      "on",      "in",         "at",          "near",     "beside",   "behind",
      "under",   "over",       "above",       "below",    "with",     "by",
      "to",      "from",       "into",        "onto",     "across",   "along",
      "around",  "through",    "inside",      "outside",  "against",  "toward",
      "towards", "among",      "between",     "beneath",  "underneath", "atop",
      "of",      "for",        "off",         "up",       "down",     "past",
      "next to", "in front of", "on top of", "close to", "out of",   "away from",
      "alongside", "upon",     "within",      "without",  "about",    "like"};
  return kWords;
}

const WordSet& adjectives() {
  static const WordSet kWords = {
      "red",     "orange",  "yellow",  "green",   "blue",    "purple",  "pink",
      "brown",   "black",   "white",   "gray",    "grey",    "golden",  "silver",
      "dark",    "light",   "bright",  "colorful", "large",  "big",     "small",
      "little",  "tiny",    "huge",    "giant",   "tall",    "short",   "long",
      "young",   "old",     "elderly", "new",     "wooden",  "metal",   "plastic",
      "glass",   "stone",   "brick",   "leather", "furry",   "fluffy",  "wet",
      "dry",     "empty",   "full",    "open",    "closed",  "clean",   "dirty",
      "busy",    "crowded", "sunny",   "cloudy",  "snowy",   "grassy",  "sandy",
      "rocky",   "happy",   "sad",     "smiling", "striped", "spotted", "male",
      "female",  "adult",   "baby",    "fresh",   "hot",     "cold",    "warm",
      "wild",    "pretty",  "beautiful", "cute",  "fat",     "thin",    "wide",
      "narrow",  "heavy",   "round",   "square",  "flat",    "high",    "low",
      "front",   "back",    "left",    "right",   "upper",   "lower",   "middle",
      "outdoor", "indoor",  "professional", "electric", "modern", "antique", "various",
      "same",    "different", "large-sized", "blond", "blonde", "bald",  "shirtless",
      "asian",   "african", "american", "european", "teenage", "older",  "younger"};
  return kWords;
}

// Verbs seen in image captions. Inflections are generated.
constexpr std::array kVerbBases = {
    "sit",     "stand",   "hold",    "ride",    "carry",   "hit",     "eat",
    "wear",    "walk",    "play",    "throw",   "catch",   "run",     "jump",
    "swim",    "lie",     "lay",     "drink",   "read",    "watch",   "look",
    "cut",     "cook",    "drive",   "fly",     "push",    "pull",    "kick",
    "climb",   "sleep",   "talk",    "hug",     "kiss",    "chase",   "feed",
    "pet",     "touch",   "use",     "park",    "cross",   "cover",   "fill",
    "surround", "face",   "lean",    "hang",    "rest",    "wait",    "sell",
    "buy",     "serve",   "prepare", "paint",   "draw",    "write",   "sing",
    "dance",   "skate",   "ski",     "surf",    "board",   "swing",   "grab",
    "reach",   "hand",    "give",    "take",    "bring",   "pick",    "put",
    "place",   "show",    "point",   "wave",    "smile",   "laugh",   "cry",
    "shake",   "brush",   "comb",    "wash",    "clean",   "fix",     "repair",
    "build",   "dig",     "plant",   "water",   "mow",     "chop",    "slice",
    "bite",    "lick",    "chew",    "sniff",   "smell",   "drag",    "tow",
    "lift",    "pour",    "cast",    "fish",    "hunt",    "shoot",   "aim",
    "bat",     "swat",    "toss",    "serve",   "bounce",  "roll",    "slide",
    "float",   "sail",    "row",     "paddle",  "steer",   "lead",    "follow",
    "guide",   "herd",    "graze",   "groom",   "bathe",   "dry",     "iron",
    "fold",    "open",    "close",   "lock",    "enter",   "exit",    "leave",
    "approach", "pass",   "block",   "hide",    "protect", "attack",  "fight",
    "bump",    "tackle",  "hold",    "tie",     "wrap",    "decorate", "display",
    "contain", "support", "balance", "perform", "practice", "celebrate", "greet",
    "meet",    "visit",   "photograph", "film", "record",  "type",    "text",
    "call",    "ring",    "blow",    "light",   "burn",    "melt",    "stack",
    "load",    "unload",  "pack",    "deliver", "sweep",   "rake",    "shovel",
    "squat",   "kneel",   "crouch",  "bend",    "stretch", "sunbathe", "relax",
    "pose",    "stare",   "gaze",    "listen",  "hear",    "see",     "observe",
    "examine", "inspect", "check",   "study",   "teach",   "learn",   "help",
    "assist",  "drop",    "spill",   "splash",  "kneel",   "tear",    "break",
    "crash",   "sit",     "perch",   "nest",    "hover",   "land",    "launch",
    "sign",    "mark",    "sort",    "count",   "share",   "split",   "join",
    "connect", "separate", "overlook", "border", "line",   "cross",   "jog",
    "stroll",  "march",   "hike",    "travel",  "commute", "arrive",  "depart",
    "wander",  "gather",  "crowd",   "line",    "queue",   "skateboard", "snowboard",
    "bike",    "cycle",   "kayak",   "canoe",   "wrestle", "box",     "punch",
    "slap",    "scratch", "chase",   "tug",     "nuzzle",  "cuddle",  "carry"};

const std::unordered_map<std::string_view, std::array<std::string_view, 2>>& irregulars() {
  // base -> {past, past participle}
  static const std::unordered_map<std::string_view, std::array<std::string_view, 2>> kForms = {
      {"sit", {"sat", "sat"}},         {"stand", {"stood", "stood"}},
      {"hold", {"held", "held"}},      {"ride", {"rode", "ridden"}},
      {"hit", {"hit", "hit"}},         {"eat", {"ate", "eaten"}},
      {"wear", {"wore", "worn"}},      {"throw", {"threw", "thrown"}},
      {"catch", {"caught", "caught"}}, {"run", {"ran", "run"}},
      {"swim", {"swam", "swum"}},      {"lie", {"lay", "lain"}},
      {"lay", {"laid", "laid"}},       {"drink", {"drank", "drunk"}},
      {"read", {"read", "read"}},      {"cut", {"cut", "cut"}},
      {"drive", {"drove", "driven"}},  {"fly", {"flew", "flown"}},
      {"sleep", {"slept", "slept"}},   {"feed", {"fed", "fed"}},
      {"hang", {"hung", "hung"}},      {"sell", {"sold", "sold"}},
      {"buy", {"bought", "bought"}},   {"draw", {"drew", "drawn"}},
      {"write", {"wrote", "written"}}, {"sing", {"sang", "sung"}},
      {"swing", {"swung", "swung"}},   {"give", {"gave", "given"}},
      {"take", {"took", "taken"}},     {"bring", {"brought", "brought"}},
      {"put", {"put", "put"}},         {"shake", {"shook", "shaken"}},
      {"build", {"built", "built"}},   {"dig", {"dug", "dug"}},
      {"bite", {"bit", "bitten"}},     {"shoot", {"shot", "shot"}},
      {"cast", {"cast", "cast"}},      {"lead", {"led", "led"}},
      {"leave", {"left", "left"}},     {"hide", {"hid", "hidden"}},
      {"fight", {"fought", "fought"}}, {"meet", {"met", "met"}},
      {"ring", {"rang", "rung"}},      {"blow", {"blew", "blown"}},
      {"light", {"lit", "lit"}},       {"hear", {"heard", "heard"}},
      {"see", {"saw", "seen"}},        {"teach", {"taught", "taught"}},
      {"learn", {"learned", "learnt"}}, {"tear", {"tore", "torn"}},
      {"break", {"broke", "broken"}},  {"split", {"split", "split"}},
      {"bend", {"bent", "bent"}},      {"sweep", {"swept", "swept"}},
      {"kneel", {"knelt", "knelt"}},   {"spill", {"spilled", "spilt"}},
      {"burn", {"burned", "burnt"}},   {"tie", {"tied", "tied"}},
      {"slide", {"slid", "slid"}},     {"make", {"made", "made"}}};
  return kForms;
}

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

int vowel_groups(std::string_view w) {
  int groups = 0;
  bool in_group = false;
  for (char c : w) {
    const bool v = is_vowel(c) || (c == 'y' && in_group);
    if (v && !in_group) ++groups;
    in_group = v;
  }
  return groups;
}

bool doubles_final_consonant(std::string_view base) {
  static const WordSet kExtra = {"begin", "admit", "refer", "control", "patrol"};
  if (kExtra.contains(base)) return true;
  if (base.size() < 3 || vowel_groups(base) != 1) return false;
  const char last = base.back();
  const char mid = base[base.size() - 2];
  const char first = base[base.size() - 3];
  return !is_vowel(last) && last != 'w' && last != 'x' && last != 'y' && is_vowel(mid) &&
         !is_vowel(first);
}

std::string third_person(std::string_view b) {
  std::string s(b);
  if (s.ends_with("s") || s.ends_with("sh") || s.ends_with("ch") || s.ends_with("x") ||
      s.ends_with("z") || s.ends_with("o")) {
    return s + "es";
  }
  if (s.size() > 1 && s.back() == 'y' && !is_vowel(s[s.size() - 2])) {
    return s.substr(0, s.size() - 1) + "ies";
  }
  return s + "s";
}

std::string present_participle(std::string_view b) {
  std::string s(b);
  if (s.ends_with("ie")) return s.substr(0, s.size() - 2) + "ying";
  if (s.ends_with("e") && !s.ends_with("ee") && !s.ends_with("ye") && !s.ends_with("oe") &&
      s.size() > 2) {
    return s.substr(0, s.size() - 1) + "ing";
  }
  if (doubles_final_consonant(s)) return s + s.back() + "ing";
  return s + "ing";
}

std::string regular_past(std::string_view b) {
  std::string s(b);
  if (s.ends_with("e")) return s + "d";
  if (s.size() > 1 && s.back() == 'y' && !is_vowel(s[s.size() - 2])) {
    return s.substr(0, s.size() - 1) + "ied";
  }
  if (doubles_final_consonant(s)) return s + s.back() + "ed";
  return s + "ed";
}

struct VerbTable {
  std::unordered_set<std::string> forms;
  std::unordered_set<std::string> bases;
};

const VerbTable& verb_table() {
  static const VerbTable kTable = [] {
    VerbTable t;
    for (std::string_view base : kVerbBases) {
      t.bases.emplace(base);
      t.forms.emplace(base);
      t.forms.insert(third_person(base));
      t.forms.insert(present_participle(base));
      if (auto it = irregulars().find(base); it != irregulars().end()) {
        t.forms.emplace(it->second[0]);
        t.forms.emplace(it->second[1]);
      } else {
        t.forms.insert(regular_past(base));
      }
    }
    return t;
  }();
  return kTable;
}

const WordSet& ing_nouns() {
  static const WordSet kWords = {
      "building", "ceiling",  "clothing", "painting", "ring",     "king",    "thing",
      "something", "nothing", "anything", "everything", "evening", "morning", "wedding",
      "pudding",  "string",   "swing",    "wing",     "spring",   "sibling", "railing",
      "awning",   "icing",    "frosting", "stuffing", "seasoning", "topping", "filling",
      "dressing", "lighting", "parking",  "crossing", "opening",  "landing", "ceiling",
      "sling",    "bedding",  "carving",  "drawing",  "duckling", "darling"};
  return kWords;
}

const std::unordered_map<std::string_view, std::string_view>& irregular_plurals() {
  static const std::unordered_map<std::string_view, std::string_view> kPlural = {
      {"man", "men"},       {"woman", "women"}, {"person", "people"},
      {"child", "children"}, {"mouse", "mice"}, {"foot", "feet"},
      {"tooth", "teeth"},   {"goose", "geese"}, {"sheep", "sheep"},
      {"fish", "fish"},     {"deer", "deer"},   {"ox", "oxen"},
      {"knife", "knives"},  {"leaf", "leaves"}, {"wife", "wives"},
      {"shelf", "shelves"}, {"calf", "calves"}, {"wolf", "wolves"},
      {"cactus", "cacti"},  {"bus", "buses"}};
  return kPlural;
}

}  // namespace

bool is_stop_word(std::string_view w) { return stop_words().contains(w); }
bool is_determiner(std::string_view w) { return determiners().contains(w); }
bool is_auxiliary(std::string_view w) { return auxiliaries().contains(w); }
bool is_pronoun(std::string_view w) { return pronouns().contains(w); }
bool is_conjunction(std::string_view w) { return conjunctions().contains(w); }
bool is_preposition(std::string_view w) { return prepositions().contains(w); }
bool is_adjective(std::string_view w) { return adjectives().contains(w); }
bool is_ing_noun(std::string_view w) { return ing_nouns().contains(w); }

bool is_verb_form(std::string_view w) {
  return verb_table().forms.contains(std::string(w));
}

bool is_verb_base(std::string_view w) {
  return verb_table().bases.contains(std::string(w));
}

bool looks_plural(std::string_view w) {
  for (const auto& [singular, plural] : irregular_plurals()) {
    if (w == plural && singular != plural) return true;
  }
  if (w.size() < 3 || w.back() != 's') return false;
  return !w.ends_with("ss") && !w.ends_with("us") && !w.ends_with("is");
}

std::string number_variant(std::string_view noun) {
  for (const auto& [singular, plural] : irregular_plurals()) {
    if (noun == singular) return std::string(plural);
    if (noun == plural) return std::string(singular);
  }
  std::string w(noun);
  if (w.size() > 3 && w.ends_with("ies")) return w.substr(0, w.size() - 3) + "y";
  if (w.size() > 3 && (w.ends_with("ches") || w.ends_with("shes") || w.ends_with("xes") ||
                       w.ends_with("sses") || w.ends_with("zes"))) {
    return w.substr(0, w.size() - 2);
  }
  if (looks_plural(w)) return w.substr(0, w.size() - 1);
  if (w.empty()) return {};
  if (w.size() > 1 && w.back() == 'y' && !is_vowel(w[w.size() - 2])) {
    return w.substr(0, w.size() - 1) + "ies";
  }
  if (w.ends_with("ch") || w.ends_with("sh") || w.ends_with("x") || w.ends_with("s") ||
      w.ends_with("z")) {
    return w + "es";
  }
  return w + "s";
}

}  // namespace comclip::lexicon
