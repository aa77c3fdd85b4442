#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace comclip {

struct ServiceOptions {
  // Base URL, e.g. "http://127.0.0.1:8080" or "http://host/api". Empty means
  // replay-only: every request must be served from fixture_dir.
  std::string endpoint;
  // Replay directory; responses live at <fixture_dir>/<key>.json.
  std::optional<std::filesystem::path> fixture_dir;
  // When set together with an endpoint, live responses are written to
  // fixture_dir so later runs can replay them.
  bool record = false;
  std::chrono::milliseconds timeout{30000};
  int retries = 2;
  std::chrono::milliseconds initial_backoff{250};
  int max_in_flight = 4;
  // Sent as "Authorization: Bearer <token>" when non-empty.
  std::string bearer_token;
};

// POSTs JSON bodies to {endpoint}{route} with retry, exponential backoff and a
// bounded number of concurrent requests. Thread-safe.
class JsonServiceClient {
 public:
  explicit JsonServiceClient(ServiceOptions options);
  ~JsonServiceClient();

  JsonServiceClient(const JsonServiceClient&) = delete;
  JsonServiceClient& operator=(const JsonServiceClient&) = delete;

  // `fixture_key` names the replay file. Throws BackendUnavailable when
  // neither a fixture nor a live response is available.
  nlohmann::json post(std::string_view route, const nlohmann::json& body,
                      std::string_view fixture_key);

  const ServiceOptions& options() const { return options_; }
  std::size_t live_requests() const { return live_requests_.load(); }
  std::size_t replayed() const { return replayed_.load(); }

 private:
  std::optional<nlohmann::json> read_fixture(std::string_view key) const;
  void write_fixture(std::string_view key, const nlohmann::json& response) const;
  nlohmann::json post_live(std::string_view route, const nlohmann::json& body);

  ServiceOptions options_;
  std::string scheme_host_port_;
  std::string path_prefix_;
  std::counting_semaphore<> in_flight_;
  std::atomic<std::size_t> live_requests_{0};
  std::atomic<std::size_t> replayed_{0};
};

}  // namespace comclip
