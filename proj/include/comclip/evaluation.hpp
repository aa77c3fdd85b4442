#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "comclip/composition.hpp"
#include "comclip/parsing.hpp"

namespace comclip {

// ---------------------------------------------------------------------------
// Instances. Image fields are refs relative to the dataset root.
// ---------------------------------------------------------------------------

struct MatchInstance {
  std::string id;
  std::string sentence;
  EntityTriple triplet;
  Role neg_type = Role::kSubject;
  std::string pos_image;
  std::string neg_image;

  friend bool operator==(const MatchInstance&, const MatchInstance&) = default;
};

struct WinogroundInstance {
  std::string id;
  std::string caption_0;
  std::string caption_1;
  std::string image_0;
  std::string image_1;

  friend bool operator==(const WinogroundInstance&, const WinogroundInstance&) = default;
};

struct VlChecklistItem {
  std::string id;
  std::string image;
  std::string pos_caption;
  std::string neg_caption;
  // Attribute, Object or Relation.
  std::string category;

  friend bool operator==(const VlChecklistItem&, const VlChecklistItem&) = default;
};

struct RetrievalRow {
  std::string image;
  std::string caption;

  friend bool operator==(const RetrievalRow&, const RetrievalRow&) = default;
};

struct RetrievalQuery {
  std::string caption;
  // Index of the one relevant gallery image.
  std::size_t relevant = 0;
};

struct RetrievalSet {
  std::vector<std::string> gallery;
  std::vector<RetrievalQuery> queries;
};

// Gallery = distinct images in first-appearance order. One caption per image
// is drawn with mt19937_64(seed) to serve as that image's query.
RetrievalSet make_retrieval_set(std::span<const RetrievalRow> rows, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Scoring hooks
// ---------------------------------------------------------------------------

struct ScoreRequest {
  const std::string& image;
  const std::string& text;
  // Annotated triplet when the dataset provides one.
  const EntityTriple* triplet = nullptr;
};

// Must be safe to call concurrently when EvalOptions::workers > 1.
using Scorer = std::function<double(const ScoreRequest&)>;

struct EvalOptions {
  // Skip instances whose scoring throws a data or backend error.
  bool lenient = false;
  std::size_t workers = 1;
  std::uint64_t seed = 0;
};

// Runs fn(0..n-1) on up to `workers` threads. If any call throws, the
// exception of the lowest index is rethrown after all workers finish.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

// Strict: ties are incorrect.
bool matching_correct(double pos_score, double neg_score);

struct WinogroundFlags {
  bool text = false;
  bool image = false;
  bool group = false;
};

// s[c][i] = score of caption c against image i.
WinogroundFlags winoground_flags(const std::array<std::array<double, 2>, 2>& s);

// Gallery indices sorted by descending score. Among equal scores the relevant
// item goes last, the rest by index.
std::vector<std::size_t> rank_gallery(std::span<const double> scores, std::size_t relevant);

// Stage 1 ranking, then the first k entries re-sorted by `rerank` (same tie
// rule). rerank is called only for those k items.
std::vector<std::size_t> rerank_top_k(std::span<const std::size_t> stage_one, std::size_t relevant,
                                      std::size_t k,
                                      const std::function<double(std::size_t)>& rerank);

// 0-based position of `item` in `ranking`.
std::size_t rank_of(std::span<const std::size_t> ranking, std::size_t item);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct Tally {
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy() const { return total == 0 ? 0.0 : double(correct) / double(total); }

  friend bool operator==(const Tally&, const Tally&) = default;
};

struct WinogroundScores {
  double text = 0.0;
  double image = 0.0;
  double group = 0.0;
};

struct RecallScores {
  double r1 = 0.0;
  double r5 = 0.0;
  double r10 = 0.0;
};

struct InstanceScore {
  std::string id;
  std::vector<double> values;
};

struct EvalReport {
  std::string dataset;
  std::optional<double> overall;
  std::map<std::string, Tally> by_neg_type;
  std::map<std::string, Tally> by_category;
  std::optional<WinogroundScores> winoground;
  std::optional<RecallScores> recall;
  std::optional<RecallScores> recall_stage_one;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::size_t n_instances = 0;
  std::size_t n_skipped = 0;

  // Per-instance dump; `columns` names the entries of each `values`.
  std::vector<std::string> columns;
  std::vector<InstanceScore> instances;
};

nlohmann::json to_json(const EvalReport& report);
void write_scores_csv(const EvalReport& report, const std::filesystem::path& path);

EvalReport eval_matching(std::span<const MatchInstance> instances, const Scorer& scorer,
                         const EvalOptions& options = {});
EvalReport eval_winoground(std::span<const WinogroundInstance> instances, const Scorer& scorer,
                           const EvalOptions& options = {});
// overall = unweighted mean of the per-category accuracies.
EvalReport eval_vl_checklist(std::span<const VlChecklistItem> items, const Scorer& scorer,
                             const EvalOptions& options = {});
EvalReport eval_retrieval(const RetrievalSet& set, const Scorer& baseline, const Scorer& rerank,
                          std::size_t k_rerank = 10, const EvalOptions& options = {});

// ---------------------------------------------------------------------------
// Ablation
// ---------------------------------------------------------------------------

using EvalDataset = std::variant<std::vector<MatchInstance>, std::vector<WinogroundInstance>,
                                 std::vector<VlChecklistItem>>;

using ScorerFactory = std::function<Scorer(const CompositionConfig&)>;

struct AblationRow {
  std::string name;
  CompositionConfig config;
  EvalReport report;
};

// One report per config. Share an embedding cache between the factory's
// scorers so every unique input is encoded once.
std::vector<AblationRow> run_ablation_grid(const EvalDataset& dataset,
                                           std::span<const CompositionConfig> configs,
                                           const ScorerFactory& factory,
                                           const EvalOptions& options = {});

EvalReport evaluate(const EvalDataset& dataset, const Scorer& scorer, const EvalOptions& options);

// Metric columns of a report in display order, e.g. subject/predicate/object.
std::vector<std::pair<std::string, double>> headline_metrics(const EvalReport& report);

std::string format_ablation_table(std::span<const AblationRow> rows);
nlohmann::json to_json(std::span<const AblationRow> rows);

}  // namespace comclip
