#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include <opencv2/core.hpp>

namespace comclip {

// Pixel rectangle [x1, x2) x [y1, y2), origin top-left.
struct Box {
  int x1 = 0;
  int y1 = 0;
  int x2 = 0;
  int y2 = 0;

  int width() const { return x2 - x1; }
  int height() const { return y2 - y1; }
  bool contains(int x, int y) const { return x >= x1 && x < x2 && y >= y1 && y < y2; }
  bool valid_for(int image_width, int image_height) const {
    return 0 <= x1 && x1 < x2 && x2 <= image_width && 0 <= y1 && y1 < y2 &&
           y2 <= image_height;
  }
  cv::Rect rect() const { return {x1, y1, width(), height()}; }

  friend bool operator==(const Box&, const Box&) = default;
};

// Clamps coordinates that overshoot the canvas by at most `slack` pixels.
// Boxes that are further out are returned unchanged (and stay invalid).
Box clamp_box(Box box, int image_width, int image_height, int slack = 1);

// Immutable 8-bit, 3-channel (BGR) image. Copies share the pixel buffer.
class Image {
 public:
  Image() = default;
  // Takes a deep copy; grey and 4-channel inputs are converted to BGR.
  explicit Image(const cv::Mat& pixels);

  static Image zeros(int width, int height);
  // Throws DecodeError when the bytes are not a decodable image.
  static Image decode(std::string_view encoded);
  // Throws MissingImage if the file is absent, DecodeError if undecodable.
  static Image load(const std::filesystem::path& path);

  int width() const { return pixels_.cols; }
  int height() const { return pixels_.rows; }
  bool empty() const { return pixels_.empty(); }
  const cv::Mat& mat() const { return pixels_; }

  // True when every channel of every pixel is zero.
  bool all_zero() const;

  // Encoded PNG bytes. Images built from files keep their original bytes.
  const std::string& png_bytes() const;
  // Dimension header plus raw row-major pixels; the identity used for hashing.
  std::string canonical_bytes() const;
  std::string content_hash() const;

  void save_png(const std::filesystem::path& path) const;

  // Pixel-exact comparison.
  bool same_pixels(const Image& other) const;

 private:
  cv::Mat pixels_;
  // Lazily filled; shared between copies so the encode happens once.
  std::shared_ptr<std::string> encoded_ = std::make_shared<std::string>();
  std::shared_ptr<std::once_flag> encode_once_ = std::make_shared<std::once_flag>();
};

}  // namespace comclip
