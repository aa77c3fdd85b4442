#include "comclip/encoders.hpp"
#include "comclip/errors.hpp"
#include "comclip/hashing.hpp"

namespace comclip {

HttpEncoderBackend::HttpEncoderBackend(ServiceOptions options, std::string id, std::size_t dim,
                                       std::string preprocessing)
    : service_(std::move(options)),
      id_(std::move(id)),
      dim_(dim),
      preprocessing_(std::move(preprocessing)) {
  if (id_.empty()) throw UsageError("an encoder service needs a stable backend id");
}

EmbeddingVector HttpEncoderBackend::from_response(const nlohmann::json& response) {
  if (!response.is_object() || !response.contains("values") || !response["values"].is_array()) {
    throw BackendUnavailable("encoder response lacks a \"values\" array");
  }
  std::vector<double> values;
  values.reserve(response["values"].size());
  for (const auto& v : response["values"]) {
    if (!v.is_number()) throw BackendUnavailable("encoder returned a non-numeric value");
    values.push_back(v.get<double>());
  }
  if (response.contains("dim") && response["dim"].is_number_integer() &&
      response["dim"].get<std::size_t>() != values.size()) {
    throw BackendUnavailable("encoder \"dim\" disagrees with the number of values");
  }
  std::size_t expected = 0;
  dim_.compare_exchange_strong(expected, values.size());
  try {
    return make_unit_embedding(std::span<const double>(values));
  } catch (const DecodeError& e) {
    throw BackendUnavailable(std::string("encoder output rejected: ") + e.what());
  }
}

EmbeddingVector HttpEncoderBackend::do_encode_image(const Image& image) {
  const std::string& png = image.png_bytes();
  return from_response(service_.post(
      "/encode", {{"modality", "image"}, {"payload_b64", base64_encode(png)}},
      sha256_hex("image:" + png)));
}

EmbeddingVector HttpEncoderBackend::do_encode_text(const std::string& canonical) {
  return from_response(service_.post("/encode", {{"modality", "text"}, {"text", canonical}},
                                     sha256_hex("text:" + canonical)));
}

}  // namespace comclip
