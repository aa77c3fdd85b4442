#include <doctest.h>

#include <opencv2/core.hpp>

#include "comclip/errors.hpp"
#include "comclip/grounding.hpp"
#include "support.hpp"

using namespace comclip;
using comclip::testing::random_box;
using comclip::testing::random_image;

namespace {

bool inside_any(std::span<const Box> boxes, int x, int y) {
  return std::any_of(boxes.begin(), boxes.end(), [&](const Box& b) { return b.contains(x, y); });
}

// Every pixel is the source pixel inside the union and zero outside.
bool exact_partition(const Image& src, const Image& sub, std::span<const Box> boxes) {
  if (src.width() != sub.width() || src.height() != sub.height()) return false;
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < src.width(); ++x) {
      const auto s = src.mat().at<cv::Vec3b>(y, x);
      const auto d = sub.mat().at<cv::Vec3b>(y, x);
      const auto expected = inside_any(boxes, x, y) ? s : cv::Vec3b(0, 0, 0);
      if (d != expected) return false;
    }
  }
  return true;
}

std::vector<DenseCaption> captions(std::initializer_list<std::pair<const char*, Box>> list) {
  std::vector<DenseCaption> out;
  for (const auto& [t, b] : list) out.push_back({t, b});
  return out;
}

}  // namespace

TEST_CASE("lexical aligner") {
  LexicalAligner aligner;
  const auto caps = captions({{"a pizza on a table", {0, 0, 10, 10}},
                              {"a person in a hat", {1, 1, 5, 5}},
                              {"a person sitting", {2, 2, 8, 8}},
                              {"two dogs playing", {0, 0, 4, 4}}});
  CHECK(aligner.match({"pizza", Role::kSubject}, "", caps) == std::vector<std::size_t>{0});
  CHECK(aligner.match({"person", Role::kSubject}, "", caps) == std::vector<std::size_t>{1, 2});
  CHECK(aligner.match({"frisbee", Role::kObject}, "", caps).empty());
  CHECK(aligner.match({"dog", Role::kObject}, "", caps) == std::vector<std::size_t>{3});
  CHECK(aligner.match({"brown dog", Role::kObject}, "", caps) == std::vector<std::size_t>{3});
  CHECK_FALSE(lexical_match("cat", "a category label"));
}

TEST_CASE("ground_entities") {
  const auto parsed = make_parsed_sentence("a pizza on a frisbee", {{"pizza", "on", "frisbee"}},
                                           ParseSource::kRuleBased);
  const auto caps = captions({{"a pizza on a table", {3, 4, 20, 30}}, {"a dog", {0, 0, 5, 5}}});
  const auto map = ground_entities(parsed.entities, caps, LexicalAligner{});
  const auto* pizza = map.boxes_for({"pizza", Role::kSubject});
  REQUIRE(pizza != nullptr);
  CHECK(*pizza == std::vector<Box>{{3, 4, 20, 30}});
  CHECK(map.boxes_for({"frisbee", Role::kObject}) == nullptr);
  REQUIRE(map.unmatched.size() == 1);
  CHECK(map.unmatched.front().word == "frisbee");
  // Predicates never reach the aligner.
  CHECK(map.boxes_for({"on", Role::kPredicate}) == nullptr);

  const auto j = to_json(map);
  CHECK(j.contains("entries"));
  CHECK(j.contains("unmatched"));
}

TEST_CASE("caption boxes are clamped by one pixel and otherwise dropped") {
  const nlohmann::json response = {
      {"captions",
       {{{"text", "a cat"}, {"box", {-1, 0, 33, 20}}},
        {{"text", "far away"}, {"box", {-10, 0, 20, 20}}},
        {{"text", "flat"}, {"box", {5, 5, 5, 9}}}}}};
  const auto caps = captions_from_json(response, 32, 24);
  REQUIRE(caps.size() == 1);
  CHECK(caps[0].box == Box{0, 0, 32, 20});
}

TEST_CASE("full-image box reproduces the source") {
  std::mt19937_64 rng(1);
  const auto img = random_image(rng, 20, 12);
  const std::vector<Box> full{{0, 0, 20, 12}};
  CHECK(build_entity_subimage(img, full, SubimageKind::kSubject).pixels.same_pixels(img));
}

TEST_CASE("left-half box blacks out the right half") {
  std::mt19937_64 rng(2);
  const auto img = random_image(rng, 16, 8);
  const std::vector<Box> left{{0, 0, 8, 8}};
  const auto sub = build_entity_subimage(img, left, SubimageKind::kObject).pixels;
  CHECK(exact_partition(img, sub, left));
  CHECK(cv::countNonZero(sub.mat().reshape(1)(cv::Rect(24, 0, 24, 8))) == 0);
}

TEST_CASE("overlapping boxes are a set union") {
  std::mt19937_64 rng(3);
  const auto img = random_image(rng, 30, 30);
  const std::vector<Box> boxes{{2, 2, 15, 15}, {10, 10, 25, 25}};
  const auto once = build_entity_subimage(img, boxes, SubimageKind::kSubject).pixels;
  CHECK(exact_partition(img, once, boxes));
  const std::vector<Box> twice{{2, 2, 15, 15}, {10, 10, 25, 25}, {2, 2, 15, 15}};
  CHECK(build_entity_subimage(img, twice, SubimageKind::kSubject).pixels.same_pixels(once));
}

TEST_CASE("invalid boxes") {
  std::mt19937_64 rng(4);
  const auto img = random_image(rng, 10, 10);
  const std::vector<Box> outside{{-5, 0, 5, 5}};
  CHECK_THROWS_AS(build_entity_subimage(img, outside, SubimageKind::kSubject), InvalidBox);
  const std::vector<Box> edge{{-1, 0, 11, 5}};
  CHECK_NOTHROW(build_entity_subimage(img, edge, SubimageKind::kSubject));
}

TEST_CASE("predicate subimage") {
  std::mt19937_64 rng(5);
  const auto img = random_image(rng, 24, 18);
  const std::vector<Box> subj{{1, 1, 9, 9}}, obj{{12, 6, 22, 17}}, none;

  const auto same = build_predicate_subimage(img, subj, subj).pixels;
  CHECK(same.same_pixels(build_entity_subimage(img, subj, SubimageKind::kSubject).pixels));

  const auto both = build_predicate_subimage(img, subj, obj).pixels;
  std::vector<Box> all{subj[0], obj[0]};
  CHECK(exact_partition(img, both, all));

  const auto only_subject = build_predicate_subimage(img, subj, none).pixels;
  CHECK(exact_partition(img, only_subject, subj));

  CHECK_THROWS_AS(build_predicate_subimage(img, none, none), NoRegions);
}

TEST_CASE("fallback subimage is the source") {
  std::mt19937_64 rng(6);
  const auto img = random_image(rng, 9, 7);
  const auto f = fallback_subimage(img);
  CHECK(f.kind == SubimageKind::kFallbackOriginal);
  CHECK(f.pixels.same_pixels(img));
}

TEST_CASE("entity subimages with unmatched entities and zero captions") {
  std::mt19937_64 rng(7);
  const auto img = random_image(rng, 20, 20);
  const auto parsed = make_parsed_sentence("a dog chasing a frisbee", {{"dog", "chasing", "frisbee"}},
                                           ParseSource::kRuleBased);
  const auto nothing = ground_entities(parsed.entities, {}, LexicalAligner{});
  for (const auto& es : build_entity_subimages(img, parsed, nothing)) {
    CHECK(es.subimage.kind == SubimageKind::kFallbackOriginal);
    CHECK(es.subimage.pixels.same_pixels(img));
  }

  const auto caps = captions({{"a brown dog", {0, 0, 10, 10}}});
  const auto grounding = ground_entities(parsed.entities, caps, LexicalAligner{});
  const auto subs = build_entity_subimages(img, parsed, grounding);
  REQUIRE(subs.size() == 3);
  for (const auto& es : subs) {
    if (es.entity.role == Role::kObject) {
      CHECK(es.subimage.kind == SubimageKind::kFallbackOriginal);
    } else {
      // Subject and predicate both reduce to the dog region.
      const std::vector<Box> dog{{0, 0, 10, 10}};
      CHECK(exact_partition(img, es.subimage.pixels, dog));
    }
  }
}

TEST_CASE("blur fill") {
  std::mt19937_64 rng(8);
  const auto img = random_image(rng, 40, 20);
  CHECK(blur_radius(40, 20, 0.05) == 1);
  CHECK(blur_radius(224, 224, 0.05) == 11);
  const std::vector<Box> box{{5, 5, 15, 15}};
  SubimageOptions opts;
  opts.fill = FillPolicy::kBlur;
  const auto sub = build_entity_subimage(img, box, SubimageKind::kSubject, opts).pixels;
  CHECK(sub.width() == 40);
  CHECK(sub.height() == 20);
  for (int y = 5; y < 15; ++y) {
    for (int x = 5; x < 15; ++x) CHECK(sub.mat().at<cv::Vec3b>(y, x) == img.mat().at<cv::Vec3b>(y, x));
  }
  CHECK_FALSE(sub.same_pixels(img));
}

TEST_CASE("tight crop") {
  std::mt19937_64 rng(9);
  const auto img = random_image(rng, 30, 30);
  const std::vector<Box> box{{4, 6, 14, 26}};
  SubimageOptions opts;
  opts.crop_tight = true;
  const auto sub = build_entity_subimage(img, box, SubimageKind::kSubject, opts).pixels;
  CHECK(sub.width() == 10);
  CHECK(sub.height() == 20);
}

TEST_CASE("pixel partition, monotonicity and dimension preservation on random boxes") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 30; ++trial) {
    const int w = 8 + static_cast<int>(rng() % 40), h = 8 + static_cast<int>(rng() % 40);
    const auto img = random_image(rng, w, h);
    std::vector<Box> boxes;
    for (int k = 0, n = 1 + static_cast<int>(rng() % 3); k < n; ++k) boxes.push_back(random_box(rng, w, h));
    const auto sub = build_entity_subimage(img, boxes, SubimageKind::kSubject).pixels;
    CHECK(exact_partition(img, sub, boxes));

    auto more = boxes;
    more.push_back(random_box(rng, w, h));
    const auto bigger = build_entity_subimage(img, more, SubimageKind::kSubject).pixels;
    cv::Mat kept_before, kept_after;
    cv::Mat lost;
    cv::compare(sub.mat() != 0, bigger.mat() != 0, lost, cv::CMP_GT);
    CHECK(cv::countNonZero(lost.reshape(1)) == 0);
  }
}

TEST_CASE("string conversions") {
  CHECK(fill_policy_from_string("blur") == FillPolicy::kBlur);
  CHECK(to_string(FillPolicy::kBlack) == "black");
  CHECK_THROWS_AS(fill_policy_from_string("gray"), UsageError);
  CHECK(to_string(SubimageKind::kFallbackOriginal) == "fallback_original");
  CHECK(subimage_kind_for(Role::kPredicate) == SubimageKind::kPredicate);
}

namespace {

class FixedReply final : public LlmClient {
 public:
  explicit FixedReply(std::string reply) : reply_(std::move(reply)) {}
  std::string complete(const std::string& prompt, int) override {
    last_prompt = prompt;
    return reply_;
  }
  std::string last_prompt;

 private:
  std::string reply_;
};

}  // namespace

TEST_CASE("LLM aligner") {
  const auto caps = captions({{"a man in a hat", {0, 0, 5, 5}},
                              {"a person standing", {1, 1, 6, 6}},
                              {"a red car", {2, 2, 9, 9}}});
  FixedReply good("The labels are {\"labels\": [1, 0]}");
  LlmAligner aligner(good);
  CHECK(aligner.match({"guy", Role::kSubject}, "a guy next to a car", caps) ==
        std::vector<std::size_t>{0, 1});
  CHECK(good.last_prompt.find("Object: guy") != std::string::npos);
  CHECK(good.last_prompt.find("2: a red car") != std::string::npos);
  CHECK(aligner.fallback_count() == 0);

  FixedReply out_of_range("{\"labels\": [7]}");
  LlmAligner fallback(out_of_range);
  CHECK(fallback.match({"car", Role::kObject}, "", caps) == std::vector<std::size_t>{2});
  CHECK(fallback.fallback_count() == 1);
}
