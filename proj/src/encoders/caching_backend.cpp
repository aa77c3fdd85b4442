#include "comclip/embedding_cache.hpp"
#include "comclip/hashing.hpp"

namespace comclip {

CachingBackend::CachingBackend(EncoderBackend& inner, EmbeddingCache* disk)
    : inner_(inner), disk_(disk) {}

EmbeddingVector CachingBackend::lookup(Modality modality, const std::string& content_hash,
                                       const std::function<EmbeddingVector()>& compute) {
  const std::string key = EmbeddingCache::make_key(inner_.id(), modality, content_hash);
  {
    std::shared_lock lock(mutex_);
    if (auto it = memory_.find(key); it != memory_.end()) return it->second.get();
  }
  std::promise<EmbeddingVector> promise;
  {
    std::unique_lock lock(mutex_);
    auto [it, inserted] = memory_.try_emplace(key, promise.get_future().share());
    if (!inserted) {
      auto existing = it->second;
      lock.unlock();
      return existing.get();
    }
  }
  try {
    auto counted = [&] {
      ++inner_calls_;
      return compute();
    };
    EmbeddingVector vec = disk_ ? disk_->get_or_compute(key, counted, inner_.dim()) : counted();
    promise.set_value(vec);
    return vec;
  } catch (...) {
    promise.set_exception(std::current_exception());
    std::unique_lock lock(mutex_);
    memory_.erase(key);
    throw;
  }
}

EmbeddingVector CachingBackend::do_encode_image(const Image& image) {
  return lookup(Modality::kImage, image.content_hash(),
                [&] { return inner_.encode_image(image); });
}

EmbeddingVector CachingBackend::do_encode_text(const std::string& canonical) {
  return lookup(Modality::kText, sha256_hex(canonical),
                [&] { return inner_.encode_text(canonical); });
}

}  // namespace comclip
