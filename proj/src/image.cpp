#include "comclip/image.hpp"

#include <fstream>
#include <iterator>
#include <mutex>
#include <vector>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "comclip/errors.hpp"
#include "comclip/hashing.hpp"

namespace comclip {

Box clamp_box(Box box, int image_width, int image_height, int slack) {
  auto clamp_coord = [slack](int v, int hi) {
    if (v < 0 && v >= -slack) return 0;
    if (v > hi && v <= hi + slack) return hi;
    return v;
  };
  box.x1 = clamp_coord(box.x1, image_width);
  box.x2 = clamp_coord(box.x2, image_width);
  box.y1 = clamp_coord(box.y1, image_height);
  box.y2 = clamp_coord(box.y2, image_height);
  return box;
}

Image::Image(const cv::Mat& pixels) {
  if (pixels.empty()) return;
  if (pixels.depth() != CV_8U) throw DecodeError("only 8-bit images are supported");
  switch (pixels.channels()) {
    case 1:
      cv::cvtColor(pixels, pixels_, cv::COLOR_GRAY2BGR);
      break;
    case 3:
      pixels_ = pixels.clone();
      break;
    case 4:
      cv::cvtColor(pixels, pixels_, cv::COLOR_BGRA2BGR);
      break;
    default:
      throw DecodeError("unsupported channel count " + std::to_string(pixels.channels()));
  }
}

Image Image::zeros(int width, int height) {
  return Image(cv::Mat::zeros(height, width, CV_8UC3));
}

Image Image::decode(std::string_view encoded) {
  std::vector<std::uint8_t> buf(encoded.begin(), encoded.end());
  cv::Mat mat = cv::imdecode(buf, cv::IMREAD_UNCHANGED);
  if (mat.empty()) throw DecodeError("could not decode image bytes");
  Image image(mat);
  // Keep the caller's bytes only when they are already PNG.
  if (encoded.size() >= 8 && encoded.substr(0, 8) == "\x89PNG\r\n\x1a\n") {
    std::call_once(*image.encode_once_, [&] { image.encoded_->assign(encoded); });
  }
  return image;
}

Image Image::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingImage("image not found: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode(bytes);
  } catch (const DecodeError&) {
    throw DecodeError("could not decode image: " + path.string());
  }
}

bool Image::all_zero() const {
  if (pixels_.empty()) return true;
  return cv::countNonZero(pixels_.reshape(1)) == 0;
}

const std::string& Image::png_bytes() const {
  std::call_once(*encode_once_, [this] {
    std::vector<std::uint8_t> buf;
    if (!pixels_.empty()) cv::imencode(".png", pixels_, buf);
    encoded_->assign(buf.begin(), buf.end());
  });
  return *encoded_;
}

std::string Image::canonical_bytes() const {
  std::string out = "IMG:" + std::to_string(width()) + "x" + std::to_string(height()) + "x3:";
  const std::size_t row_bytes = static_cast<std::size_t>(width()) * 3;
  out.reserve(out.size() + row_bytes * static_cast<std::size_t>(height()));
  for (int y = 0; y < height(); ++y) {
    const char* row = pixels_.ptr<char>(y);
    out.append(row, row_bytes);
  }
  return out;
}

std::string Image::content_hash() const { return sha256_hex(canonical_bytes()); }

void Image::save_png(const std::filesystem::path& path) const {
  const std::string& bytes = png_bytes();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DecodeError("cannot write image: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

bool Image::same_pixels(const Image& other) const {
  if (width() != other.width() || height() != other.height()) return false;
  if (pixels_.empty()) return true;
  cv::Mat diff;
  cv::absdiff(pixels_, other.pixels_, diff);
  return cv::countNonZero(diff.reshape(1)) == 0;
}

}  // namespace comclip
