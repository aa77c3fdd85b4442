#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "comclip/image.hpp"
#include "comclip/llm_client.hpp"
#include "comclip/parsing.hpp"

namespace comclip {

struct DenseCaption {
  std::string text;
  Box box;

  friend bool operator==(const DenseCaption&, const DenseCaption&) = default;
};

// Region captioner (GRiT-style). Implementations must be thread-safe.
class DenseCaptioner {
 public:
  virtual ~DenseCaptioner() = default;
  virtual std::vector<DenseCaption> caption(const Image& image) = 0;
};

// POST {endpoint}/dense_captions {"image_b64"} -> {"captions":[{"text","box"}]}.
// Fixtures are keyed by sha256 of the PNG bytes. Boxes off the canvas by one
// pixel are clamped; boxes further out are dropped with a warning.
class HttpDenseCaptioner final : public DenseCaptioner {
 public:
  explicit HttpDenseCaptioner(ServiceOptions options);
  std::vector<DenseCaption> caption(const Image& image) override;

 private:
  JsonServiceClient service_;
};

// Serves captions supplied up front: either one list for every image, or a
// list per image content hash (ground-truth region mode).
class StaticCaptioner final : public DenseCaptioner {
 public:
  StaticCaptioner() = default;
  explicit StaticCaptioner(std::vector<DenseCaption> captions);
  void set_for(const Image& image, std::vector<DenseCaption> captions);
  std::vector<DenseCaption> caption(const Image& image) override;

 private:
  std::optional<std::vector<DenseCaption>> shared_;
  std::unordered_map<std::string, std::vector<DenseCaption>> by_hash_;
};

// Calls the wrapped captioner once per distinct image.
class MemoizingCaptioner final : public DenseCaptioner {
 public:
  explicit MemoizingCaptioner(DenseCaptioner& inner) : inner_(inner) {}
  std::vector<DenseCaption> caption(const Image& image) override;

 private:
  DenseCaptioner& inner_;
  std::mutex mutex_;
  std::unordered_map<std::string, std::vector<DenseCaption>> memo_;
};

std::vector<DenseCaption> captions_from_json(const nlohmann::json& response, int image_width,
                                             int image_height);

struct GroundedEntity {
  Entity entity;
  std::vector<Box> boxes;  // never empty
};

struct GroundingMap {
  std::vector<GroundedEntity> entries;
  std::vector<Entity> unmatched;

  // nullptr when the entity is not grounded.
  const std::vector<Box>* boxes_for(const Entity& entity) const;
};

nlohmann::json to_json(const GroundingMap& map);

// Decides which captions refer to an entity.
class EntityAligner {
 public:
  virtual ~EntityAligner() = default;
  // Indices into `captions`, ascending.
  virtual std::vector<std::size_t> match(const Entity& entity, std::string_view sentence,
                                         std::span<const DenseCaption> captions) const = 0;
};

// Matches when the entity's head word, or its singular/plural variant,
// appears as a token of the caption.
bool lexical_match(std::string_view entity_phrase, std::string_view caption_text);

class LexicalAligner final : public EntityAligner {
 public:
  std::vector<std::size_t> match(const Entity& entity, std::string_view sentence,
                                 std::span<const DenseCaption> captions) const override;
};

std::string build_alignment_prompt(const Entity& entity, std::string_view sentence,
                                   std::span<const DenseCaption> captions);

// Asks the language model which captions refer to the entity; falls back to
// the lexical rule on any failure.
class LlmAligner final : public EntityAligner {
 public:
  explicit LlmAligner(LlmClient& client, int max_tokens = 256);
  std::vector<std::size_t> match(const Entity& entity, std::string_view sentence,
                                 std::span<const DenseCaption> captions) const override;
  std::size_t fallback_count() const { return fallbacks_.load(); }

 private:
  LlmClient& client_;
  int max_tokens_;
  LexicalAligner lexical_;
  mutable std::atomic<std::size_t> fallbacks_{0};
};

// Predicate entities are skipped: their regions come from their subject and
// object. Entities without a matching caption land in `unmatched`.
GroundingMap ground_entities(std::span<const Entity> entities,
                             std::span<const DenseCaption> captions,
                             const EntityAligner& aligner, std::string_view sentence = {});

enum class FillPolicy { kBlack, kBlur };
enum class SubimageKind { kSubject, kObject, kPredicate, kFallbackOriginal };

std::string_view to_string(FillPolicy fill);
FillPolicy fill_policy_from_string(std::string_view name);
std::string_view to_string(SubimageKind kind);
SubimageKind subimage_kind_for(Role role);

struct SubimageOptions {
  FillPolicy fill = FillPolicy::kBlack;
  // Blur kernel radius as a fraction of min(width, height).
  double blur_radius_fraction = 0.05;
  // Crop to the bounding rectangle of the kept regions instead of masking at
  // full canvas size. Crops do not share geometry with the source.
  bool crop_tight = false;
};

struct Subimage {
  Image pixels;
  SubimageKind kind = SubimageKind::kFallbackOriginal;
  std::vector<Box> source_boxes;
  FillPolicy fill = FillPolicy::kBlack;
};

int blur_radius(int width, int height, double fraction);

// Keeps the union of `boxes` and fills the rest. Throws InvalidBox for boxes
// outside the image (after one pixel of clamping).
Subimage build_entity_subimage(const Image& image, std::span<const Box> boxes, SubimageKind kind,
                               const SubimageOptions& options = {});

// Union of subject and object regions. Throws NoRegions when both are empty.
Subimage build_predicate_subimage(const Image& image, std::span<const Box> subject_boxes,
                                  std::span<const Box> object_boxes,
                                  const SubimageOptions& options = {});

Subimage fallback_subimage(const Image& image);

struct EntitySubimage {
  Entity entity;
  Subimage subimage;
};

// One subimage per entity of `parsed`. Ungrounded subjects and objects, and
// predicates whose subject and object are both ungrounded, use the original.
std::vector<EntitySubimage> build_entity_subimages(const Image& image,
                                                   const ParsedSentence& parsed,
                                                   const GroundingMap& grounding,
                                                   const SubimageOptions& options = {});

}  // namespace comclip
