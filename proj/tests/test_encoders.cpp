#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "comclip/composition.hpp"
#include "comclip/encoders.hpp"
#include "comclip/errors.hpp"
#include "support.hpp"

using namespace comclip;
using comclip::testing::random_image;

namespace {

struct GoldenCase {
  std::string label;
  std::size_t dim = 0;
  std::vector<double> unit;
  std::vector<float> stored;
};

// Reference vectors from tests/oracles/mock_encode_golden.py.
std::vector<GoldenCase> load_golden() {
  std::ifstream in(std::string(COMCLIP_TEST_DIR) + "/golden/mock_encode.tsv");
  REQUIRE(in.good());
  std::vector<GoldenCase> out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    GoldenCase c;
    std::string dim, unit, stored;
    std::getline(fields, c.label, '\t');
    std::getline(fields, dim, '\t');
    std::getline(fields, unit, '\t');
    std::getline(fields, stored, '\t');
    c.dim = std::stoul(dim);
    std::istringstream u(unit), s(stored);
    for (double x; u >> x;) c.unit.push_back(x);
    for (float x; s >> x;) c.stored.push_back(x);
    out.push_back(std::move(c));
  }
  return out;
}

std::string golden_bytes(const std::string& label) {
  if (label.rfind("text:", 0) == 0) return label.substr(5);
  cv::Mat m(1, 2, CV_8UC3);
  m.at<cv::Vec3b>(0, 0) = {1, 2, 3};
  m.at<cv::Vec3b>(0, 1) = {4, 5, 6};
  return Image(m).canonical_bytes();
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

class FixedBackend final : public EncoderBackend {
 public:
  FixedBackend(EmbeddingVector image, EmbeddingVector text)
      : image_(std::move(image)), text_(std::move(text)) {}
  const std::string& id() const override { return id_; }
  std::size_t dim() const override { return image_.dim(); }
  std::string preprocessing() const override { return "none"; }

 protected:
  EmbeddingVector do_encode_image(const Image&) override { return image_; }
  EmbeddingVector do_encode_text(const std::string&) override { return text_; }

 private:
  std::string id_ = "fixed";
  EmbeddingVector image_, text_;
};

}  // namespace

TEST_CASE("standard mt19937_64 sequence") {
  // The C++ standard fixes the 10000th output for the default seed.
  std::mt19937_64 gen;
  gen.discard(9999);
  CHECK(gen() == 9981545732273789042ull);
}

TEST_CASE("mock encoder matches the reference generator") {
  const auto cases = load_golden();
  REQUIRE(cases.size() == 3);
  for (const auto& c : cases) {
    CAPTURE(c.label);
    const auto bytes = golden_bytes(c.label);
    const auto unit = mock_unit_vector(bytes, c.dim);
    REQUIRE(unit.size() == c.unit.size());
    for (std::size_t i = 0; i < unit.size(); ++i) CHECK(unit[i] == doctest::Approx(c.unit[i]).epsilon(1e-15));
    CHECK(std::abs(norm(unit) - 1.0) < 1e-9);
    const auto stored = mock_encode(bytes, c.dim);
    CHECK(stored.values == c.stored);
    CHECK(stored.normalized);
  }
}

TEST_CASE("mock backend determinism and normalization") {
  MockBackend backend(32);
  CHECK(backend.id() == "mock-sha256-mt64-d32");
  std::mt19937_64 rng(11);
  const auto img = random_image(rng, 16, 16);
  CHECK(backend.encode_image(img) == backend.encode_image(img));
  CHECK(backend.encode_text("man") == backend.encode_text("man"));
  CHECK(backend.encode_text("man") == backend.encode_text("man "));
  CHECK(backend.encode_text("man") == backend.encode_text("  man\n"));
  for (const char* t : {"a", "cat", "a cat sits on a table", "Several people stand near a food cart"}) {
    CHECK(std::abs(backend.encode_text(t).norm() - 1.0) < 1e-6);
  }
  CHECK_THROWS_AS(backend.encode_text("   "), EmptyText);
  CHECK_THROWS_AS(MockBackend(4), UsageError);
}

TEST_CASE("black images map to the zero vector") {
  MockBackend backend(64);
  const auto zero = backend.encode_image(Image::zeros(224, 224));
  CHECK(zero.dim() == 64);
  CHECK(zero.is_zero());
  CHECK_FALSE(zero.normalized);
  CHECK(cosine(zero, backend.encode_text("anything")) == 0.0);
}

TEST_CASE("different images do not collide") {
  MockBackend backend(64);
  std::mt19937_64 rng(12);
  for (int i = 0; i < 100; ++i) {
    const auto a = backend.encode_image(random_image(rng, 8, 8));
    const auto b = backend.encode_image(random_image(rng, 8, 8));
    CHECK(cosine(a, b) < 1.0 - 1e-6);
  }
}

TEST_CASE("make_unit_embedding") {
  const std::vector<double> v{3.0, 4.0};
  const auto e = make_unit_embedding(std::span<const double>(v));
  CHECK(e.values == std::vector<float>{0.6f, 0.8f});
  CHECK(e.normalized);
  const std::vector<double> z{0.0, 0.0};
  const auto ze = make_unit_embedding(std::span<const double>(z));
  CHECK(ze.is_zero());
  CHECK_FALSE(ze.normalized);
  const std::vector<double> bad{1.0, NAN};
  CHECK_THROWS_AS(make_unit_embedding(std::span<const double>(bad)), DecodeError);
}

TEST_CASE("composition depends on the backend only through its vectors") {
  MockBackend mock(16);
  std::mt19937_64 rng(13);
  const auto img = random_image(rng, 8, 8);
  const auto image_vec = mock.encode_image(img);
  const auto text_vec = mock.encode_text("a cat");
  FixedBackend fixed(image_vec, text_vec);
  CHECK(baseline_score(img, "a cat", mock) == baseline_score(img, "a cat", fixed));
}

TEST_CASE("backends reject wrong dimensions") {
  EmbeddingVector three{{1.0f, 0.0f, 0.0f}, true};
  EmbeddingVector two{{1.0f, 0.0f}, true};
  FixedBackend mismatched(three, two);
  CHECK_THROWS_AS(mismatched.encode_text("x"), DimensionMismatch);
}
