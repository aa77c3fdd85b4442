#pragma once

#include <memory>
#include <string>

#include "comclip/service_client.hpp"

namespace comclip {

// Text completion service used for sentence parsing and caption alignment.
class LlmClient {
 public:
  virtual ~LlmClient() = default;
  // Throws BackendUnavailable on failure.
  virtual std::string complete(const std::string& prompt, int max_tokens) = 0;
};

// POST {endpoint}/complete  {"prompt", "max_tokens"} -> {"text"}.
// Replay fixtures are keyed by sha256(prompt).
class HttpLlmClient final : public LlmClient {
 public:
  explicit HttpLlmClient(ServiceOptions options);
  std::string complete(const std::string& prompt, int max_tokens) override;

  const JsonServiceClient& service() const { return service_; }

 private:
  JsonServiceClient service_;
};

// Reads COMCLIP_LLM_TOKEN into options.bearer_token when it is unset.
ServiceOptions with_llm_token_from_env(ServiceOptions options);

}  // namespace comclip
