#include "comclip/evaluation.hpp"

namespace comclip {

std::vector<AblationRow> run_ablation_grid(const EvalDataset& dataset,
                                           std::span<const CompositionConfig> configs,
                                           const ScorerFactory& factory,
                                           const EvalOptions& options) {
  for (const auto& c : configs) c.validate();
  std::vector<AblationRow> rows;
  rows.reserve(configs.size());
  for (const auto& c : configs) {
    AblationRow row;
    row.name = std::string(to_string(c.subimage_config));
    row.config = c;
    row.report = evaluate(dataset, factory(c), options);
    row.report.config = to_json(c);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace comclip
