#include <algorithm>
#include <cmath>

#include <opencv2/imgproc.hpp>

#include "comclip/errors.hpp"
#include "comclip/grounding.hpp"

namespace comclip {

std::string_view to_string(FillPolicy fill) {
  return fill == FillPolicy::kBlur ? "blur" : "black";
}

FillPolicy fill_policy_from_string(std::string_view name) {
  if (name == "black") return FillPolicy::kBlack;
  if (name == "blur") return FillPolicy::kBlur;
  throw UsageError("unknown fill policy '" + std::string(name) + "'");
}

std::string_view to_string(SubimageKind kind) {
  switch (kind) {
    case SubimageKind::kSubject:
      return "subject";
    case SubimageKind::kObject:
      return "object";
    case SubimageKind::kPredicate:
      return "predicate";
    case SubimageKind::kFallbackOriginal:
      return "fallback_original";
  }
  return "fallback_original";
}

SubimageKind subimage_kind_for(Role role) {
  switch (role) {
    case Role::kSubject:
      return SubimageKind::kSubject;
    case Role::kPredicate:
      return SubimageKind::kPredicate;
    case Role::kObject:
      return SubimageKind::kObject;
  }
  return SubimageKind::kFallbackOriginal;
}

int blur_radius(int width, int height, double fraction) {
  const double r = fraction * std::min(width, height);
  return std::max(1, static_cast<int>(std::lround(r)));
}

namespace {

std::vector<Box> validated(const Image& image, std::span<const Box> boxes) {
  std::vector<Box> out;
  out.reserve(boxes.size());
  for (const Box& raw : boxes) {
    const Box b = clamp_box(raw, image.width(), image.height());
    if (!b.valid_for(image.width(), image.height())) {
      throw InvalidBox("box [" + std::to_string(raw.x1) + "," + std::to_string(raw.y1) + "," +
                       std::to_string(raw.x2) + "," + std::to_string(raw.y2) +
                       "] outside " + std::to_string(image.width()) + "x" +
                       std::to_string(image.height()) + " image");
    }
    out.push_back(b);
  }
  return out;
}

Subimage masked(const Image& image, std::vector<Box> boxes, SubimageKind kind,
                const SubimageOptions& options) {
  const cv::Mat& src = image.mat();
  cv::Mat mask = cv::Mat::zeros(src.size(), CV_8U);
  for (const Box& b : boxes) mask(b.rect()).setTo(255);

  cv::Mat out;
  if (options.fill == FillPolicy::kBlur) {
    const int r = blur_radius(image.width(), image.height(), options.blur_radius_fraction);
    cv::GaussianBlur(src, out, cv::Size(2 * r + 1, 2 * r + 1), 0.0, 0.0, cv::BORDER_REFLECT_101);
  } else {
    out = cv::Mat::zeros(src.size(), src.type());
  }
  src.copyTo(out, mask);

  if (options.crop_tight && !boxes.empty()) {
    cv::Rect bounds = boxes.front().rect();
    for (const Box& b : boxes) bounds |= b.rect();
    out = out(bounds).clone();
  }
  return {Image(out), kind, std::move(boxes), options.fill};
}

}  // namespace

Subimage build_entity_subimage(const Image& image, std::span<const Box> boxes, SubimageKind kind,
                               const SubimageOptions& options) {
  return masked(image, validated(image, boxes), kind, options);
}

Subimage build_predicate_subimage(const Image& image, std::span<const Box> subject_boxes,
                                  std::span<const Box> object_boxes,
                                  const SubimageOptions& options) {
  if (subject_boxes.empty() && object_boxes.empty()) {
    throw NoRegions("predicate has neither subject nor object regions");
  }
  std::vector<Box> all = validated(image, subject_boxes);
  for (const Box& b : validated(image, object_boxes)) all.push_back(b);
  return masked(image, std::move(all), SubimageKind::kPredicate, options);
}

Subimage fallback_subimage(const Image& image) {
  return {image, SubimageKind::kFallbackOriginal, {}, FillPolicy::kBlack};
}

std::vector<EntitySubimage> build_entity_subimages(const Image& image,
                                                   const ParsedSentence& parsed,
                                                   const GroundingMap& grounding,
                                                   const SubimageOptions& options) {
  std::vector<EntitySubimage> out;
  out.reserve(parsed.entities.size());
  for (const Entity& entity : parsed.entities) {
    if (entity.role != Role::kPredicate) {
      const auto* boxes = grounding.boxes_for(entity);
      out.push_back({entity, boxes ? build_entity_subimage(image, *boxes,
                                                           subimage_kind_for(entity.role), options)
                                   : fallback_subimage(image)});
      continue;
    }
    // A predicate keeps the regions of every subject and object it links.
    std::vector<Box> subject_boxes;
    std::vector<Box> object_boxes;
    for (const auto& t : parsed.triplets) {
      if (t.predicate != entity.word) continue;
      if (const auto* b = grounding.boxes_for({t.subject, Role::kSubject})) {
        subject_boxes.insert(subject_boxes.end(), b->begin(), b->end());
      }
      if (const auto* b = grounding.boxes_for({t.object, Role::kObject})) {
        object_boxes.insert(object_boxes.end(), b->begin(), b->end());
      }
    }
    if (subject_boxes.empty() && object_boxes.empty()) {
      out.push_back({entity, fallback_subimage(image)});
    } else {
      out.push_back(
          {entity, build_predicate_subimage(image, subject_boxes, object_boxes, options)});
    }
  }
  return out;
}

}  // namespace comclip
