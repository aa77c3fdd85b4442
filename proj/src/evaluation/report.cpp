#include <fstream>

#include <fmt/format.h>

#include "comclip/errors.hpp"
#include "comclip/evaluation.hpp"

namespace comclip {

namespace {

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json recall_json(const std::optional<RecallScores>& r) {
  if (!r) return nullptr;
  return {{"r1", r->r1}, {"r5", r->r5}, {"r10", r->r10}};
}

}  // namespace

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json by_neg = nlohmann::json::object();
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [name, t] : report.by_neg_type) {
    by_neg[name] = t.accuracy();
    counts[name] = {{"correct", t.correct}, {"total", t.total}};
  }
  nlohmann::json j{
      {"dataset", report.dataset},
      {"overall", optional_number(report.overall)},
      {"by_neg_type", by_neg},
      {"winoground", nullptr},
      {"recall", recall_json(report.recall)},
      {"config", report.config},
      {"seed", report.seed},
      {"n_instances", report.n_instances},
      {"n_skipped", report.n_skipped},
  };
  if (!counts.empty()) j["counts"] = counts;
  if (report.winoground) {
    j["winoground"] = {{"text", report.winoground->text},
                       {"image", report.winoground->image},
                       {"group", report.winoground->group}};
  }
  if (!report.by_category.empty()) {
    nlohmann::json cats = nlohmann::json::object();
    for (const auto& [name, t] : report.by_category) {
      cats[name] = {{"accuracy", t.accuracy()}, {"correct", t.correct}, {"total", t.total}};
    }
    j["by_category"] = cats;
  }
  if (report.recall_stage_one) j["recall_stage_one"] = recall_json(report.recall_stage_one);
  return j;
}

void write_scores_csv(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  out << "id";
  for (const auto& c : report.columns) out << ',' << c;
  out << '\n';
  for (const auto& inst : report.instances) {
    out << inst.id;
    for (double v : inst.values) out << ',' << fmt::format("{:.17g}", v);
    out << '\n';
  }
}

std::vector<std::pair<std::string, double>> headline_metrics(const EvalReport& report) {
  std::vector<std::pair<std::string, double>> out;
  if (report.winoground) {
    out = {{"text", report.winoground->text},
           {"image", report.winoground->image},
           {"group", report.winoground->group}};
  } else if (report.recall) {
    out = {{"r1", report.recall->r1}, {"r5", report.recall->r5}, {"r10", report.recall->r10}};
  } else if (!report.by_category.empty()) {
    for (const auto& [name, t] : report.by_category) out.emplace_back(name, t.accuracy());
    out.emplace_back("ave", report.overall.value_or(0.0));
  } else {
    for (auto role : {Role::kSubject, Role::kPredicate, Role::kObject}) {
      const auto it = report.by_neg_type.find(std::string(to_string(role)));
      if (it != report.by_neg_type.end()) out.emplace_back(it->first, it->second.accuracy());
    }
    out.emplace_back("overall", report.overall.value_or(0.0));
  }
  return out;
}

std::string format_ablation_table(std::span<const AblationRow> rows) {
  if (rows.empty()) return {};
  std::size_t name_width = 6;
  for (const auto& r : rows) name_width = std::max(name_width, r.name.size());
  const auto header = headline_metrics(rows.front().report);
  std::string out = fmt::format("{:<{}}", "config", name_width);
  for (const auto& [name, v] : header) out += fmt::format("  {:>9}", name);
  out += fmt::format("  {:>6}\n", "n");
  for (const auto& r : rows) {
    out += fmt::format("{:<{}}", r.name, name_width);
    for (const auto& [name, v] : headline_metrics(r.report)) out += fmt::format("  {:>9.2f}", 100.0 * v);
    out += fmt::format("  {:>6}\n", r.report.n_instances);
  }
  return out;
}

nlohmann::json to_json(std::span<const AblationRow> rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"name", r.name}, {"config", to_json(r.config)}, {"report", to_json(r.report)}});
  }
  return out;
}

}  // namespace comclip
