#include "comclip/service_client.hpp"

#include <fstream>
#include <iterator>
#include <random>
#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "comclip/errors.hpp"

namespace comclip {
namespace {

// Splits "http://host:port/prefix" into ("http://host:port", "/prefix").
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
  std::string rest = endpoint;
  while (!rest.empty() && rest.back() == '/') rest.pop_back();
  const auto scheme_end = rest.find("://");
  const std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const auto path_start = rest.find('/', host_start);
  if (path_start == std::string::npos) return {rest, ""};
  return {rest.substr(0, path_start), rest.substr(path_start)};
}

bool retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace

JsonServiceClient::JsonServiceClient(ServiceOptions options)
    : options_(std::move(options)), in_flight_(std::max(1, options_.max_in_flight)) {
  if (!options_.endpoint.empty()) {
    std::tie(scheme_host_port_, path_prefix_) = split_endpoint(options_.endpoint);
  }
  if (options_.fixture_dir && options_.record) {
    std::filesystem::create_directories(*options_.fixture_dir);
  }
}

JsonServiceClient::~JsonServiceClient() = default;

std::optional<nlohmann::json> JsonServiceClient::read_fixture(std::string_view key) const {
  if (!options_.fixture_dir) return std::nullopt;
  const auto path = *options_.fixture_dir / (std::string(key) + ".json");
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw BackendUnavailable("corrupt fixture " + path.string() + ": " + e.what());
  }
}

void JsonServiceClient::write_fixture(std::string_view key,
                                      const nlohmann::json& response) const {
  const auto dir = *options_.fixture_dir;
  const auto final_path = dir / (std::string(key) + ".json");
  const auto tmp_path =
      dir / (std::string(key) + ".tmp." +
             std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())));
  {
    std::ofstream out(tmp_path);
    out << response.dump(2) << '\n';
  }
  std::filesystem::rename(tmp_path, final_path);
}

nlohmann::json JsonServiceClient::post_live(std::string_view route,
                                            const nlohmann::json& body) {
  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<>& sem;
    ~Release() { sem.release(); }
  } release{in_flight_};

  httplib::Client client(scheme_host_port_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers headers;
  if (!options_.bearer_token.empty()) {
    headers.emplace("Authorization", "Bearer " + options_.bearer_token);
  }
  const std::string path = path_prefix_ + std::string(route);
  const std::string payload = body.dump();

  std::string last_error;
  auto backoff = options_.initial_backoff;
  for (int attempt = 0; attempt <= options_.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    ++live_requests_;
    auto result = client.Post(path, headers, payload, "application/json");
    if (!result) {
      last_error = "transport error: " + httplib::to_string(result.error());
      continue;
    }
    if (result->status == 200) {
      try {
        return nlohmann::json::parse(result->body);
      } catch (const nlohmann::json::exception& e) {
        throw BackendUnavailable(options_.endpoint + path + " returned invalid JSON: " + e.what());
      }
    }
    last_error = "HTTP " + std::to_string(result->status);
    if (!retryable_status(result->status)) break;
  }
  throw BackendUnavailable(options_.endpoint + path + ": " + last_error);
}

nlohmann::json JsonServiceClient::post(std::string_view route, const nlohmann::json& body,
                                       std::string_view fixture_key) {
  if (auto cached = read_fixture(fixture_key)) {
    ++replayed_;
    return *std::move(cached);
  }
  if (options_.endpoint.empty()) {
    throw BackendUnavailable("no fixture for key " + std::string(fixture_key) +
                             " and no endpoint configured");
  }
  nlohmann::json response = post_live(route, body);
  if (options_.record && options_.fixture_dir) write_fixture(fixture_key, response);
  return response;
}

}  // namespace comclip
