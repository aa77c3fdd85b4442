#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "comclip/composition.hpp"
#include "comclip/embedding_cache.hpp"
#include "comclip/evaluation.hpp"
#include "comclip/grounding.hpp"
#include "comclip/service_client.hpp"

namespace comclip {

struct EncoderSettings {
  // "mock" or "http".
  std::string kind = "mock";
  // 0: 64 for mock, whatever the service reports for http.
  std::size_t dim = 0;
  // http only. id defaults to "http:<endpoint>".
  std::string id;
  ServiceOptions service;
};

// Config file keys (all optional):
//   composition {weighting_mode, logit_scale, subimage_config, fill,
//                blur_radius_fraction, crop_tight}
//   parser "rule_based"|"llm", aligner "lexical"|"llm"
//   encoder {kind, dim, id, endpoint, fixtures, record}
//   llm {endpoint, fixtures, record}, captioner {endpoint, fixtures, record}
//   cache_dir, seed, parallelism, lenient
struct RunConfig {
  CompositionConfig composition;
  std::string parser = "rule_based";
  std::string aligner = "lexical";
  EncoderSettings encoder;
  ServiceOptions llm;
  ServiceOptions captioner;
  std::optional<std::filesystem::path> cache_dir;
  std::uint64_t seed = 0;
  std::size_t parallelism = 1;
  bool lenient = false;
};

RunConfig default_run_config();
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);

// COMCLIP_CACHE_DIR fills an unset cache_dir; COMCLIP_LLM_TOKEN fills the
// LLM bearer token.
void apply_environment(RunConfig& config);

bool service_configured(const ServiceOptions& options);

// Owns the backends and clients described by a RunConfig.
class Runtime {
 public:
  explicit Runtime(const RunConfig& config);
  ~Runtime();

  const RunConfig& config() const { return config_; }
  // Cached encoder: memory always, disk when cache_dir is set.
  EncoderBackend& encoder() { return *caching_; }
  const SentenceParser& parser() const { return *parser_; }
  const EntityAligner& aligner() const { return *aligner_; }
  DenseCaptioner* captioner() { return captioner_.get(); }
  EmbeddingCache* disk_cache() { return disk_.get(); }
  std::size_t encoder_calls() const { return caching_->inner_calls(); }

  ScoringComponents components();
  ComClipScorer scorer(const CompositionConfig& composition);

  // Scorer hooks over an image store. Annotated triplets replace parsing.
  Scorer comclip_scorer(ImageStore& images, const CompositionConfig& composition);
  Scorer baseline_scorer(ImageStore& images);

 private:
  RunConfig config_;
  std::unique_ptr<EncoderBackend> raw_encoder_;
  std::unique_ptr<EmbeddingCache> disk_;
  std::unique_ptr<CachingBackend> caching_;
  std::unique_ptr<LlmClient> llm_;
  std::unique_ptr<SentenceParser> parser_;
  std::unique_ptr<EntityAligner> aligner_;
  std::unique_ptr<DenseCaptioner> raw_captioner_;
  std::unique_ptr<DenseCaptioner> captioner_;
};

}  // namespace comclip
