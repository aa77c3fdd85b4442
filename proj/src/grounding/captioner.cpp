#include <cmath>

#include <spdlog/spdlog.h>

#include "comclip/errors.hpp"
#include "comclip/grounding.hpp"
#include "comclip/hashing.hpp"

namespace comclip {

std::vector<DenseCaption> captions_from_json(const nlohmann::json& response, int image_width,
                                             int image_height) {
  if (!response.is_object() || !response.contains("captions") ||
      !response["captions"].is_array()) {
    throw BackendUnavailable("dense caption response lacks a \"captions\" array");
  }
  std::vector<DenseCaption> out;
  for (const auto& row : response["captions"]) {
    if (!row.is_object() || !row.contains("text") || !row["text"].is_string() ||
        !row.contains("box") || !row["box"].is_array() || row["box"].size() != 4) {
      throw BackendUnavailable("malformed dense caption entry: " + row.dump());
    }
    const auto& b = row["box"];
    // Captioners emit float coordinates; round to the pixel grid.
    auto coord = [&](int i) { return static_cast<int>(std::lround(b[i].get<double>())); };
    Box box = clamp_box({coord(0), coord(1), coord(2), coord(3)}, image_width, image_height);
    if (!box.valid_for(image_width, image_height)) {
      spdlog::warn("dropping caption \"{}\" with out-of-bounds box {}",
                   row["text"].get<std::string>(), b.dump());
      continue;
    }
    out.push_back({row["text"].get<std::string>(), box});
  }
  return out;
}

HttpDenseCaptioner::HttpDenseCaptioner(ServiceOptions options) : service_(std::move(options)) {}

std::vector<DenseCaption> HttpDenseCaptioner::caption(const Image& image) {
  const std::string& png = image.png_bytes();
  const nlohmann::json response =
      service_.post("/dense_captions", {{"image_b64", base64_encode(png)}}, sha256_hex(png));
  return captions_from_json(response, image.width(), image.height());
}

StaticCaptioner::StaticCaptioner(std::vector<DenseCaption> captions)
    : shared_(std::move(captions)) {}

void StaticCaptioner::set_for(const Image& image, std::vector<DenseCaption> captions) {
  by_hash_[image.content_hash()] = std::move(captions);
}

std::vector<DenseCaption> StaticCaptioner::caption(const Image& image) {
  if (!by_hash_.empty()) {
    if (auto it = by_hash_.find(image.content_hash()); it != by_hash_.end()) return it->second;
  }
  return shared_.value_or(std::vector<DenseCaption>{});
}

std::vector<DenseCaption> MemoizingCaptioner::caption(const Image& image) {
  const std::string key = image.content_hash();
  {
    std::lock_guard lock(mutex_);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  }
  auto captions = inner_.caption(image);
  std::lock_guard lock(mutex_);
  memo_.emplace(key, captions);
  return captions;
}

}  // namespace comclip
