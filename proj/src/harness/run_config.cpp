#include <cstdlib>
#include <fstream>
#include <thread>

#include "comclip/datasets.hpp"
#include "comclip/errors.hpp"
#include "comclip/llm_client.hpp"
#include "comclip/run_config.hpp"

namespace comclip {

namespace fs = std::filesystem;

namespace {

void read_service(const nlohmann::json& j, ServiceOptions& s) {
  if (j.contains("endpoint")) s.endpoint = j.at("endpoint").get<std::string>();
  if (j.contains("fixtures") && !j.at("fixtures").is_null()) s.fixture_dir = fs::path(j.at("fixtures").get<std::string>());
  if (j.contains("record")) s.record = j.at("record").get<bool>();
  if (j.contains("timeout_ms")) s.timeout = std::chrono::milliseconds(j.at("timeout_ms").get<int>());
  if (j.contains("retries")) s.retries = j.at("retries").get<int>();
  if (j.contains("max_in_flight")) s.max_in_flight = j.at("max_in_flight").get<int>();
}

nlohmann::json service_json(const ServiceOptions& s) {
  nlohmann::json j{{"endpoint", s.endpoint},
                   {"record", s.record},
                   {"timeout_ms", s.timeout.count()},
                   {"retries", s.retries},
                   {"max_in_flight", s.max_in_flight}};
  j["fixtures"] = s.fixture_dir ? nlohmann::json(s.fixture_dir->string()) : nlohmann::json(nullptr);
  return j;
}

ParsedSentence annotated(const std::string& text, const EntityTriple& t) {
  EntityTriple norm{normalize_entity_phrase(t.subject), normalize_entity_phrase(t.predicate),
                    normalize_entity_phrase(t.object)};
  return make_parsed_sentence(text, {std::move(norm)}, ParseSource::kAnnotation);
}

}  // namespace

RunConfig default_run_config() {
  RunConfig c;
  c.parallelism = std::max(1u, std::thread::hardware_concurrency());
  return c;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw UsageError("run config must be a JSON object");
  RunConfig c = default_run_config();
  try {
    if (j.contains("composition")) c.composition = composition_config_from_json(j.at("composition"));
    if (j.contains("parser")) c.parser = j.at("parser").get<std::string>();
    if (j.contains("aligner")) c.aligner = j.at("aligner").get<std::string>();
    if (j.contains("encoder")) {
      const auto& e = j.at("encoder");
      if (e.contains("kind")) c.encoder.kind = e.at("kind").get<std::string>();
      if (e.contains("dim")) c.encoder.dim = e.at("dim").get<std::size_t>();
      if (e.contains("id")) c.encoder.id = e.at("id").get<std::string>();
      read_service(e, c.encoder.service);
    }
    if (j.contains("llm")) read_service(j.at("llm"), c.llm);
    if (j.contains("captioner")) read_service(j.at("captioner"), c.captioner);
    if (j.contains("cache_dir") && !j.at("cache_dir").is_null()) {
      c.cache_dir = fs::path(j.at("cache_dir").get<std::string>());
    }
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("parallelism")) c.parallelism = std::max<std::size_t>(1, j.at("parallelism").get<std::size_t>());
    if (j.contains("lenient")) c.lenient = j.at("lenient").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("bad run config: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path.string());
  try {
    return run_config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("config file " + path.string() + ": " + e.what());
  }
}

nlohmann::json to_json(const RunConfig& c) {
  auto encoder = service_json(c.encoder.service);
  encoder["kind"] = c.encoder.kind;
  encoder["dim"] = c.encoder.dim;
  encoder["id"] = c.encoder.id;
  return {{"composition", to_json(c.composition)},
          {"parser", c.parser},
          {"aligner", c.aligner},
          {"encoder", encoder},
          {"llm", service_json(c.llm)},
          {"captioner", service_json(c.captioner)},
          {"cache_dir", c.cache_dir ? nlohmann::json(c.cache_dir->string()) : nlohmann::json(nullptr)},
          {"seed", c.seed},
          {"lenient", c.lenient}};
}

void apply_environment(RunConfig& config) {
  if (!config.cache_dir) {
    if (const char* dir = std::getenv("COMCLIP_CACHE_DIR"); dir && *dir) config.cache_dir = dir;
  }
  config.llm = with_llm_token_from_env(config.llm);
}

bool service_configured(const ServiceOptions& options) {
  return !options.endpoint.empty() || options.fixture_dir.has_value();
}

Runtime::Runtime(const RunConfig& config) : config_(config) {
  config_.composition.validate();
  if (config_.encoder.kind == "mock") {
    raw_encoder_ = std::make_unique<MockBackend>(config_.encoder.dim == 0 ? 64 : config_.encoder.dim);
  } else if (config_.encoder.kind == "http") {
    if (!service_configured(config_.encoder.service)) {
      throw UsageError("http encoder needs an endpoint or a fixture directory");
    }
    auto id = config_.encoder.id;
    if (id.empty()) {
      id = config_.encoder.service.endpoint.empty() ? "http:replay"
                                                    : "http:" + config_.encoder.service.endpoint;
    }
    raw_encoder_ = std::make_unique<HttpEncoderBackend>(
        config_.encoder.service, id, config_.encoder.dim);
  } else {
    throw UsageError("unknown backend: " + config_.encoder.kind);
  }
  if (config_.cache_dir) disk_ = std::make_unique<EmbeddingCache>(*config_.cache_dir);
  caching_ = std::make_unique<CachingBackend>(*raw_encoder_, disk_.get());

  const bool need_llm = config_.parser == "llm" || config_.aligner == "llm";
  if (need_llm) {
    if (!service_configured(config_.llm)) {
      throw UsageError("the llm parser/aligner needs an llm endpoint or fixture directory");
    }
    llm_ = std::make_unique<HttpLlmClient>(config_.llm);
  }
  if (config_.parser == "llm") {
    parser_ = std::make_unique<LlmParser>(*llm_);
  } else if (config_.parser == "rule_based") {
    parser_ = std::make_unique<RuleBasedParser>();
  } else {
    throw UsageError("unknown parser: " + config_.parser);
  }
  if (config_.aligner == "llm") {
    aligner_ = std::make_unique<LlmAligner>(*llm_);
  } else if (config_.aligner == "lexical") {
    aligner_ = std::make_unique<LexicalAligner>();
  } else {
    throw UsageError("unknown aligner: " + config_.aligner);
  }
  if (service_configured(config_.captioner)) {
    raw_captioner_ = std::make_unique<HttpDenseCaptioner>(config_.captioner);
    captioner_ = std::make_unique<MemoizingCaptioner>(*raw_captioner_);
  }
}

Runtime::~Runtime() = default;

ScoringComponents Runtime::components() {
  return {*caching_, *parser_, *aligner_, captioner_.get()};
}

ComClipScorer Runtime::scorer(const CompositionConfig& composition) {
  return ComClipScorer(components(), composition);
}

Scorer Runtime::comclip_scorer(ImageStore& images, const CompositionConfig& composition) {
  auto scorer = std::make_shared<ComClipScorer>(components(), composition);
  return [scorer, &images](const ScoreRequest& req) {
    const auto image = images.get(req.image);
    if (req.triplet != nullptr) return scorer->score(image, annotated(req.text, *req.triplet)).final_score;
    return scorer->score(image, req.text).final_score;
  };
}

Scorer Runtime::baseline_scorer(ImageStore& images) {
  return [this, &images](const ScoreRequest& req) {
    return baseline_score(images.get(req.image), req.text, *caching_);
  };
}

}  // namespace comclip
