#include <fstream>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "comclip/datasets.hpp"
#include "comclip/errors.hpp"
#include "comclip/hashing.hpp"

namespace comclip {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::pair<DatasetKind, std::string_view>, 5> kKindNames{{
    {DatasetKind::kComvg, "comvg"},
    {DatasetKind::kSvoProbes, "svo_probes"},
    {DatasetKind::kWinoground, "winoground"},
    {DatasetKind::kVlChecklist, "vl_checklist"},
    {DatasetKind::kRetrieval, "retrieval"},
}};

struct Row {
  std::size_t line;
  nlohmann::json value;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile("dataset file not found: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<Row> parse_rows(const std::string& text) {
  std::vector<Row> rows;
  std::istringstream in(text);
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json value;
    try {
      value = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(n, std::string("invalid JSON: ") + e.what());
    }
    if (!value.is_object()) throw SchemaError(n, "row is not a JSON object");
    rows.push_back({n, std::move(value)});
  }
  return rows;
}

std::string field(const Row& row, const char* name) {
  const auto it = row.value.find(name);
  if (it == row.value.end()) throw SchemaError(row.line, std::string("missing \"") + name + "\"");
  if (!it->is_string()) throw SchemaError(row.line, std::string("\"") + name + "\" must be a string");
  auto s = it->get<std::string>();
  if (s.empty()) throw SchemaError(row.line, std::string("\"") + name + "\" is empty");
  return s;
}

// Ids may be strings or integers.
std::string id_field(const Row& row) {
  const auto it = row.value.find("id");
  if (it == row.value.end()) throw SchemaError(row.line, "missing \"id\"");
  if (it->is_number_integer()) return std::to_string(it->get<long long>());
  return field(row, "id");
}

struct Context {
  fs::path root;
  LoadOptions options;
  std::size_t skipped = 0;

  // False when the row should be skipped.
  bool images_present(const Row& row, std::initializer_list<const std::string*> refs) {
    if (!options.check_images) return true;
    for (const auto* ref : refs) {
      if (fs::exists(root / *ref)) continue;
      const auto msg = "line " + std::to_string(row.line) + ": image not found: " + *ref;
      if (!options.lenient) throw MissingImage(msg);
      spdlog::warn("skipping {}", msg);
      ++skipped;
      return false;
    }
    return true;
  }
};

template <typename T, typename Fn>
LoadedDataset<T> load(DatasetKind kind, const fs::path& path, const LoadOptions& options,
                      Fn convert) {
  const auto text = read_file(path);
  Context ctx{options.root.value_or(path.parent_path()), options};
  LoadedDataset<T> out;
  for (const auto& row : parse_rows(text)) {
    if (auto inst = convert(row, ctx)) out.instances.push_back(std::move(*inst));
  }
  out.skipped = ctx.skipped;
  out.manifest = {kind, ctx.root, out.instances.size(), sha256_hex(text)};
  return out;
}

LoadedDataset<MatchInstance> load_matching(DatasetKind kind, const fs::path& path,
                                           const LoadOptions& options) {
  return load<MatchInstance>(kind, path, options,
                             [](const Row& row, Context& ctx) -> std::optional<MatchInstance> {
    MatchInstance m;
    m.id = id_field(row);
    m.sentence = field(row, "sentence");
    const auto t = row.value.find("triplet");
    if (t == row.value.end() || !t->is_object()) {
      throw SchemaError(row.line, "missing \"triplet\" object");
    }
    const Row triplet{row.line, *t};
    m.triplet = {field(triplet, "subject"), field(triplet, "predicate"), field(triplet, "object")};
    try {
      m.neg_type = role_from_string(field(row, "neg_type"));
    } catch (const UsageError&) {
      throw SchemaError(row.line, "\"neg_type\" must be subject, predicate or object");
    }
    m.pos_image = field(row, "pos_image");
    m.neg_image = field(row, "neg_image");
    if (m.pos_image == m.neg_image) throw SchemaError(row.line, "pos_image equals neg_image");
    if (!ctx.images_present(row, {&m.pos_image, &m.neg_image})) return std::nullopt;
    return m;
  });
}

}  // namespace

std::string_view to_string(DatasetKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "comvg";
}

DatasetKind dataset_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  throw UsageError("unknown dataset kind: " + std::string(name));
}

nlohmann::json to_json(const DatasetManifest& manifest) {
  return {{"kind", to_string(manifest.kind)},
          {"root", manifest.root.string()},
          {"count", manifest.count},
          {"checksum", manifest.checksum}};
}

LoadedDataset<MatchInstance> load_comvg(const fs::path& path, const LoadOptions& options) {
  return load_matching(DatasetKind::kComvg, path, options);
}

LoadedDataset<MatchInstance> load_svo_probes(const fs::path& path, const LoadOptions& options) {
  return load_matching(DatasetKind::kSvoProbes, path, options);
}

LoadedDataset<WinogroundInstance> load_winoground(const fs::path& path,
                                                  const LoadOptions& options) {
  std::set<std::string> seen;
  auto out = load<WinogroundInstance>(
      DatasetKind::kWinoground, path, options,
      [&seen](const Row& row, Context& ctx) -> std::optional<WinogroundInstance> {
        WinogroundInstance w{id_field(row), field(row, "caption_0"), field(row, "caption_1"),
                             field(row, "image_0"), field(row, "image_1")};
        if (!seen.insert(w.id).second) throw SchemaError(row.line, "duplicate id " + w.id);
        if (w.caption_0 == w.caption_1) throw SchemaError(row.line, "captions are identical");
        if (w.image_0 == w.image_1) throw SchemaError(row.line, "images are identical");
        if (!ctx.images_present(row, {&w.image_0, &w.image_1})) return std::nullopt;
        return w;
      });
  if (out.instances.empty()) {
    spdlog::warn("{}: no Winoground instances", path.string());
  } else if (out.instances.size() != 400) {
    spdlog::warn("{}: {} Winoground instances, the full set has 400", path.string(),
                 out.instances.size());
  }
  return out;
}

LoadedDataset<VlChecklistItem> load_vl_checklist(const fs::path& path, const LoadOptions& options) {
  return load<VlChecklistItem>(
      DatasetKind::kVlChecklist, path, options,
      [](const Row& row, Context& ctx) -> std::optional<VlChecklistItem> {
        VlChecklistItem v;
        v.id = row.value.contains("id") ? id_field(row) : std::to_string(row.line);
        v.image = field(row, "image");
        v.pos_caption = field(row, "pos_caption");
        v.neg_caption = field(row, "neg_caption");
        v.category = field(row, "category");
        if (v.category != "Attribute" && v.category != "Object" && v.category != "Relation") {
          throw SchemaError(row.line, "\"category\" must be Attribute, Object or Relation");
        }
        if (!ctx.images_present(row, {&v.image})) return std::nullopt;
        return v;
      });
}

LoadedDataset<RetrievalRow> load_retrieval(const fs::path& path, const LoadOptions& options) {
  return load<RetrievalRow>(DatasetKind::kRetrieval, path, options,
                            [](const Row& row, Context& ctx) -> std::optional<RetrievalRow> {
                              RetrievalRow r{field(row, "image"), field(row, "caption")};
                              if (!ctx.images_present(row, {&r.image})) return std::nullopt;
                              return r;
                            });
}

std::map<std::string, std::size_t> neg_type_counts(std::span<const MatchInstance> instances) {
  std::map<std::string, std::size_t> counts{{"subject", 0}, {"predicate", 0}, {"object", 0}};
  for (const auto& m : instances) ++counts[std::string(to_string(m.neg_type))];
  return counts;
}

std::string to_jsonl(std::span<const MatchInstance> instances) {
  std::string out;
  for (const auto& m : instances) {
    nlohmann::json j{{"id", m.id},
                     {"sentence", m.sentence},
                     {"triplet", to_json(m.triplet)},
                     {"neg_type", to_string(m.neg_type)},
                     {"pos_image", m.pos_image},
                     {"neg_image", m.neg_image}};
    out += j.dump() + "\n";
  }
  return out;
}

std::string to_jsonl(std::span<const WinogroundInstance> instances) {
  std::string out;
  for (const auto& w : instances) {
    nlohmann::json j{{"id", w.id},           {"caption_0", w.caption_0},
                     {"caption_1", w.caption_1}, {"image_0", w.image_0},
                     {"image_1", w.image_1}};
    out += j.dump() + "\n";
  }
  return out;
}

std::string to_jsonl(std::span<const VlChecklistItem> items) {
  std::string out;
  for (const auto& v : items) {
    nlohmann::json j{{"id", v.id},
                     {"image", v.image},
                     {"pos_caption", v.pos_caption},
                     {"neg_caption", v.neg_caption},
                     {"category", v.category}};
    out += j.dump() + "\n";
  }
  return out;
}

std::string to_jsonl(std::span<const RetrievalRow> rows) {
  std::string out;
  for (const auto& r : rows) out += nlohmann::json{{"image", r.image}, {"caption", r.caption}}.dump() + "\n";
  return out;
}

Image ImageStore::get(const std::string& ref) {
  {
    std::lock_guard lock(mutex_);
    if (auto it = images_.find(ref); it != images_.end()) return it->second;
  }
  auto image = Image::load(root_ / ref);
  std::lock_guard lock(mutex_);
  return images_.emplace(ref, std::move(image)).first->second;
}

}  // namespace comclip
