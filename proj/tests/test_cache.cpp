#include <doctest.h>

#include <atomic>
#include <thread>

#include "comclip/embedding_cache.hpp"
#include "comclip/errors.hpp"
#include "support.hpp"

using namespace comclip;
using comclip::testing::TempDir;

namespace {

class CountingBackend final : public EncoderBackend {
 public:
  explicit CountingBackend(std::string id = "counting") : id_(std::move(id)) {}
  const std::string& id() const override { return id_; }
  std::size_t dim() const override { return 16; }
  std::string preprocessing() const override { return "none"; }
  std::atomic<int> calls{0};

 protected:
  EmbeddingVector do_encode_image(const Image& image) override {
    ++calls;
    return mock_encode(id_ + image.canonical_bytes(), 16);
  }
  EmbeddingVector do_encode_text(const std::string& text) override {
    ++calls;
    return mock_encode(id_ + text, 16);
  }

 private:
  std::string id_;
};

}  // namespace

TEST_CASE("record format") {
  const EmbeddingVector v{{1.0f, -0.5f, 0.25f}, false};
  const auto bytes = EmbeddingCache::encode_record(v);
  CHECK(bytes.size() == 4 + 1 + 4 + 3 * 4);
  CHECK(bytes.substr(0, 4) == "CEMB");
  CHECK(bytes[4] == '\x01');
  CHECK(bytes.substr(5, 4) == std::string("\x03\x00\x00\x00", 4));
  // 1.0f little-endian
  CHECK(bytes.substr(9, 4) == std::string("\x00\x00\x80\x3f", 4));
  const auto back = EmbeddingCache::decode_record(bytes);
  REQUIRE(back.has_value());
  CHECK(back->values == v.values);

  CHECK_FALSE(EmbeddingCache::decode_record(bytes.substr(0, bytes.size() - 1)).has_value());
  CHECK_FALSE(EmbeddingCache::decode_record("XEMB" + bytes.substr(4)).has_value());
  auto wrong_version = bytes;
  wrong_version[4] = 2;
  CHECK_FALSE(EmbeddingCache::decode_record(wrong_version).has_value());
}

TEST_CASE("keys separate backends and modalities") {
  const auto a = EmbeddingCache::make_key("mock-a", Modality::kImage, "h");
  CHECK(a != EmbeddingCache::make_key("mock-b", Modality::kImage, "h"));
  CHECK(a != EmbeddingCache::make_key("mock-a", Modality::kText, "h"));
  CHECK(a.size() == 64);
}

TEST_CASE("miss then hit") {
  TempDir dir;
  EmbeddingCache cache(dir.path());
  int computed = 0;
  auto compute = [&] {
    ++computed;
    return mock_encode("x", 8);
  };
  const auto first = cache.get_or_compute("k1", compute);
  const auto second = cache.get_or_compute("k1", compute);
  CHECK(computed == 1);
  CHECK(first.values == second.values);
  CHECK(std::filesystem::exists(cache.path_for("k1")));
  const auto s = cache.stats();
  CHECK(s.entries == 1);
  CHECK(s.hits == 1);
  CHECK(s.misses == 1);
}

TEST_CASE("corrupt records are recomputed and overwritten") {
  TempDir dir;
  EmbeddingCache cache(dir.path());
  const auto expected = mock_encode("y", 8);
  cache.put("k2", expected);
  const auto path = cache.path_for("k2");
  const auto full = comclip::testing::read_text(path);
  comclip::testing::write_text(path, full.substr(0, full.size() - 3));

  int computed = 0;
  const auto got = cache.get_or_compute("k2", [&] {
    ++computed;
    return expected;
  });
  CHECK(computed == 1);
  CHECK(got.values == expected.values);
  CHECK(cache.stats().corrupt == 1);
  CHECK(comclip::testing::read_text(path) == full);
}

TEST_CASE("dimension mismatch on disk counts as a miss") {
  TempDir dir;
  EmbeddingCache cache(dir.path());
  cache.put("k3", mock_encode("z", 8));
  CHECK_FALSE(cache.get("k3", 16).has_value());
  CHECK(cache.get("k3", 8).has_value());
}

TEST_CASE("clear") {
  TempDir dir;
  EmbeddingCache cache(dir.path());
  cache.put("aa01", mock_encode("1", 8));
  cache.put("bb02", mock_encode("2", 8));
  CHECK(cache.clear() == 2);
  CHECK(cache.stats().entries == 0);
}

TEST_CASE("caching backend is transparent") {
  TempDir dir;
  CountingBackend inner;
  EmbeddingCache disk(dir.path());
  CachingBackend cached(inner, &disk);
  CHECK(cached.id() == inner.id());
  CHECK(cached.dim() == inner.dim());

  std::mt19937_64 rng(3);
  const auto img = comclip::testing::random_image(rng, 6, 6);
  const auto direct = inner.encode_image(img);
  inner.calls = 0;
  CHECK(cached.encode_image(img) == direct);
  CHECK(cached.encode_image(img) == direct);
  CHECK(cached.encode_text("a dog") == cached.encode_text("a dog "));
  CHECK(inner.calls == 2);
  CHECK(cached.inner_calls() == 2);

  // A fresh process-level cache reads the records back bit-exactly.
  CountingBackend inner2;
  CachingBackend reopened(inner2, &disk);
  CHECK(reopened.encode_image(img) == direct);
  CHECK(inner2.calls == 0);
}

TEST_CASE("two backends keep distinct entries") {
  TempDir dir;
  EmbeddingCache disk(dir.path());
  CountingBackend a("alpha"), b("beta");
  CachingBackend ca(a, &disk), cb(b, &disk);
  const auto img = Image::zeros(4, 4);
  CHECK_FALSE(ca.encode_image(img) == cb.encode_image(img));
  CHECK(disk.stats().entries == 2);
}

TEST_CASE("concurrent requests for one key compute once") {
  CountingBackend inner;
  CachingBackend cached(inner);
  std::vector<std::jthread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 50; ++i) cached.encode_text("shared sentence");
    });
  }
  threads.clear();
  CHECK(inner.calls == 1);
}
