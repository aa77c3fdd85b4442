#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "comclip/evaluation.hpp"
#include "comclip/image.hpp"

namespace comclip {

// JSONL row schemas, one object per line (blank lines ignored):
//   comvg / svo_probes  {"id","sentence","triplet":{"subject","predicate","object"},
//                        "neg_type","pos_image","neg_image"}
//   winoground          {"id","caption_0","caption_1","image_0","image_1"}
//   vl_checklist        {"image","pos_caption","neg_caption","category"}
//   retrieval           {"image","caption"}
enum class DatasetKind { kComvg, kSvoProbes, kWinoground, kVlChecklist, kRetrieval };

std::string_view to_string(DatasetKind kind);
DatasetKind dataset_kind_from_string(std::string_view name);

struct DatasetManifest {
  DatasetKind kind = DatasetKind::kComvg;
  std::filesystem::path root;
  std::size_t count = 0;
  // sha256 of the dataset file, hex.
  std::string checksum;
};

nlohmann::json to_json(const DatasetManifest& manifest);

struct LoadOptions {
  // Image refs resolve against this; defaults to the file's directory.
  std::optional<std::filesystem::path> root;
  // Rows whose images are missing are skipped with a warning instead of
  // raising MissingImage.
  bool lenient = false;
  bool check_images = true;
};

template <typename T>
struct LoadedDataset {
  DatasetManifest manifest;
  std::vector<T> instances;
  std::size_t skipped = 0;
};

LoadedDataset<MatchInstance> load_comvg(const std::filesystem::path& path,
                                        const LoadOptions& options = {});
LoadedDataset<MatchInstance> load_svo_probes(const std::filesystem::path& path,
                                             const LoadOptions& options = {});
// Duplicate ids raise SchemaError. Warns when the file is empty or does not
// hold the full 400 instances.
LoadedDataset<WinogroundInstance> load_winoground(const std::filesystem::path& path,
                                                  const LoadOptions& options = {});
LoadedDataset<VlChecklistItem> load_vl_checklist(const std::filesystem::path& path,
                                                 const LoadOptions& options = {});
LoadedDataset<RetrievalRow> load_retrieval(const std::filesystem::path& path,
                                           const LoadOptions& options = {});

// subject / predicate / object -> count; all three keys always present.
std::map<std::string, std::size_t> neg_type_counts(std::span<const MatchInstance> instances);

std::string to_jsonl(std::span<const MatchInstance> instances);
std::string to_jsonl(std::span<const WinogroundInstance> instances);
std::string to_jsonl(std::span<const VlChecklistItem> items);
std::string to_jsonl(std::span<const RetrievalRow> rows);

// Decodes images by ref relative to a root, once each. Thread-safe.
class ImageStore {
 public:
  explicit ImageStore(std::filesystem::path root) : root_(std::move(root)) {}
  Image get(const std::string& ref);
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
  std::mutex mutex_;
  std::unordered_map<std::string, Image> images_;
};

}  // namespace comclip
