#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <opencv2/core.hpp>

#include "comclip/image.hpp"

namespace comclip::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("comclip-test-" + std::to_string(rd()) + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Uniform noise in [1, 255] so no pixel is zero.
inline Image random_image(std::mt19937_64& rng, int width, int height) {
  cv::Mat m(height, width, CV_8UC3);
  std::uniform_int_distribution<int> px(1, 255);
  for (int y = 0; y < height; ++y) {
    auto* row = m.ptr<unsigned char>(y);
    for (int x = 0; x < width * 3; ++x) row[x] = static_cast<unsigned char>(px(rng));
  }
  return Image(m);
}

inline Box random_box(std::mt19937_64& rng, int width, int height) {
  std::uniform_int_distribution<int> xs(0, width - 1), ys(0, height - 1);
  int x1 = xs(rng), x2 = xs(rng), y1 = ys(rng), y2 = ys(rng);
  if (x1 > x2) std::swap(x1, x2);
  if (y1 > y2) std::swap(y1, y2);
  return {x1, y1, x2 + 1, y2 + 1};
}

}  // namespace comclip::testing
