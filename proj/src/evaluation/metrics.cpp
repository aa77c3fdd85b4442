#include <algorithm>
#include <atomic>
#include <exception>
#include <random>
#include <thread>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "comclip/errors.hpp"
#include "comclip/evaluation.hpp"

namespace comclip {

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(std::max<std::size_t>(workers, 1), n);
  if (threads <= 1) {
    run();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(run);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace {

// Scores every instance; failed instances are empty under lenient mode.
template <typename R, typename Fn>
std::vector<std::optional<R>> score_all(std::size_t n, const EvalOptions& options, Fn fn) {
  std::vector<std::optional<R>> out(n);
  std::vector<std::exception_ptr> errors(n);
  parallel_for(n, options.workers, [&](std::size_t i) {
    try {
      out[i] = fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const Error& e) {
      if (!options.lenient || e.kind() == ErrorKind::kUsage) throw;
      spdlog::warn("skipping instance {}: {}: {}", i, e.type(), e.what());
    }
  }
  return out;
}

double fraction(std::size_t k, std::size_t n) { return n == 0 ? 0.0 : double(k) / double(n); }

void sort_with_ties(std::vector<std::size_t>& items, std::size_t relevant,
                    const std::function<double(std::size_t)>& score_of) {
  std::vector<std::pair<double, std::size_t>> keyed;
  keyed.reserve(items.size());
  for (auto i : items) keyed.emplace_back(score_of(i), i);
  std::stable_sort(keyed.begin(), keyed.end(), [relevant](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    const bool ra = a.second == relevant, rb = b.second == relevant;
    if (ra != rb) return rb;
    return a.second < b.second;
  });
  for (std::size_t i = 0; i < items.size(); ++i) items[i] = keyed[i].second;
}

}  // namespace

bool matching_correct(double pos_score, double neg_score) { return pos_score > neg_score; }

WinogroundFlags winoground_flags(const std::array<std::array<double, 2>, 2>& s) {
  WinogroundFlags f;
  f.text = s[0][0] > s[1][0] && s[1][1] > s[0][1];
  f.image = s[0][0] > s[0][1] && s[1][1] > s[1][0];
  f.group = f.text && f.image;
  return f;
}

std::vector<std::size_t> rank_gallery(std::span<const double> scores, std::size_t relevant) {
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  sort_with_ties(order, relevant, [&](std::size_t i) { return scores[i]; });
  return order;
}

std::vector<std::size_t> rerank_top_k(std::span<const std::size_t> stage_one, std::size_t relevant,
                                      std::size_t k,
                                      const std::function<double(std::size_t)>& rerank) {
  std::vector<std::size_t> out(stage_one.begin(), stage_one.end());
  const std::size_t window = std::min(k, out.size());
  std::vector<std::size_t> head(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(window));
  std::unordered_map<std::size_t, double> scores;
  for (auto i : head) scores[i] = rerank(i);
  sort_with_ties(head, relevant, [&](std::size_t i) { return scores.at(i); });
  std::copy(head.begin(), head.end(), out.begin());
  return out;
}

std::size_t rank_of(std::span<const std::size_t> ranking, std::size_t item) {
  return static_cast<std::size_t>(std::find(ranking.begin(), ranking.end(), item) -
                                  ranking.begin());
}

RetrievalSet make_retrieval_set(std::span<const RetrievalRow> rows, std::uint64_t seed) {
  RetrievalSet set;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::vector<std::string>> captions;
  for (const auto& row : rows) {
    auto [it, inserted] = index.emplace(row.image, set.gallery.size());
    if (inserted) {
      set.gallery.push_back(row.image);
      captions.emplace_back();
    }
    captions[it->second].push_back(row.caption);
  }
  std::mt19937_64 rng(seed);
  for (std::size_t g = 0; g < set.gallery.size(); ++g) {
    const auto& options = captions[g];
    set.queries.push_back({options[rng() % options.size()], g});
  }
  return set;
}

EvalReport eval_matching(std::span<const MatchInstance> instances, const Scorer& scorer,
                         const EvalOptions& options) {
  auto scores = score_all<std::array<double, 2>>(instances.size(), options, [&](std::size_t i) {
    const auto& in = instances[i];
    return std::array<double, 2>{scorer({in.pos_image, in.sentence, &in.triplet}),
                                 scorer({in.neg_image, in.sentence, &in.triplet})};
  });
  EvalReport report;
  report.dataset = "matching";
  report.seed = options.seed;
  report.columns = {"pos_score", "neg_score", "correct"};
  Tally all;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (!scores[i]) {
      ++report.n_skipped;
      continue;
    }
    const auto [pos, neg] = *scores[i];
    const bool ok = matching_correct(pos, neg);
    auto& t = report.by_neg_type[std::string(to_string(instances[i].neg_type))];
    ++t.total;
    ++all.total;
    if (ok) {
      ++t.correct;
      ++all.correct;
    }
    report.instances.push_back({instances[i].id, {pos, neg, ok ? 1.0 : 0.0}});
  }
  report.n_instances = all.total;
  report.overall = all.accuracy();
  return report;
}

EvalReport eval_winoground(std::span<const WinogroundInstance> instances, const Scorer& scorer,
                           const EvalOptions& options) {
  using Matrix = std::array<std::array<double, 2>, 2>;
  auto scores = score_all<Matrix>(instances.size(), options, [&](std::size_t i) {
    const auto& in = instances[i];
    Matrix s{};
    s[0][0] = scorer({in.image_0, in.caption_0});
    s[0][1] = scorer({in.image_1, in.caption_0});
    s[1][0] = scorer({in.image_0, in.caption_1});
    s[1][1] = scorer({in.image_1, in.caption_1});
    return s;
  });
  EvalReport report;
  report.dataset = "winoground";
  report.seed = options.seed;
  report.columns = {"c0_i0", "c0_i1", "c1_i0", "c1_i1", "text", "image", "group"};
  std::size_t text = 0, image = 0, group = 0, n = 0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (!scores[i]) {
      ++report.n_skipped;
      continue;
    }
    const auto& s = *scores[i];
    const auto f = winoground_flags(s);
    ++n;
    text += f.text;
    image += f.image;
    group += f.group;
    report.instances.push_back({instances[i].id,
                                {s[0][0], s[0][1], s[1][0], s[1][1], double(f.text),
                                 double(f.image), double(f.group)}});
  }
  report.n_instances = n;
  report.winoground = WinogroundScores{fraction(text, n), fraction(image, n), fraction(group, n)};
  return report;
}

EvalReport eval_vl_checklist(std::span<const VlChecklistItem> items, const Scorer& scorer,
                             const EvalOptions& options) {
  auto scores = score_all<std::array<double, 2>>(items.size(), options, [&](std::size_t i) {
    const auto& it = items[i];
    return std::array<double, 2>{scorer({it.image, it.pos_caption}),
                                 scorer({it.image, it.neg_caption})};
  });
  EvalReport report;
  report.dataset = "vl_checklist";
  report.seed = options.seed;
  report.columns = {"pos_score", "neg_score", "correct"};
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!scores[i]) {
      ++report.n_skipped;
      continue;
    }
    const auto [pos, neg] = *scores[i];
    const bool ok = matching_correct(pos, neg);
    auto& t = report.by_category[items[i].category];
    ++t.total;
    t.correct += ok;
    ++report.n_instances;
    report.instances.push_back({items[i].id, {pos, neg, ok ? 1.0 : 0.0}});
  }
  if (!report.by_category.empty()) {
    double sum = 0.0;
    for (const auto& [name, t] : report.by_category) sum += t.accuracy();
    report.overall = sum / double(report.by_category.size());
  }
  return report;
}

EvalReport eval_retrieval(const RetrievalSet& set, const Scorer& baseline, const Scorer& rerank,
                          std::size_t k_rerank, const EvalOptions& options) {
  struct Ranks {
    std::size_t stage_one;
    std::size_t final;
  };
  auto ranks = score_all<Ranks>(set.queries.size(), options, [&](std::size_t q) {
    const auto& query = set.queries[q];
    std::vector<double> base(set.gallery.size());
    for (std::size_t g = 0; g < set.gallery.size(); ++g) {
      base[g] = baseline({set.gallery[g], query.caption});
    }
    const auto first = rank_gallery(base, query.relevant);
    const auto second = rerank_top_k(first, query.relevant, k_rerank, [&](std::size_t g) {
      return rerank({set.gallery[g], query.caption});
    });
    return Ranks{rank_of(first, query.relevant), rank_of(second, query.relevant)};
  });
  EvalReport report;
  report.dataset = "retrieval";
  report.seed = options.seed;
  report.columns = {"relevant", "rank_stage_one", "rank_final"};
  std::array<std::size_t, 3> hits{}, hits_one{};
  constexpr std::array<std::size_t, 3> kCutoffs{1, 5, 10};
  for (std::size_t q = 0; q < set.queries.size(); ++q) {
    if (!ranks[q]) {
      ++report.n_skipped;
      continue;
    }
    ++report.n_instances;
    for (std::size_t c = 0; c < kCutoffs.size(); ++c) {
      hits[c] += ranks[q]->final < kCutoffs[c];
      hits_one[c] += ranks[q]->stage_one < kCutoffs[c];
    }
    report.instances.push_back({"q" + std::to_string(q),
                                {double(set.queries[q].relevant), double(ranks[q]->stage_one),
                                 double(ranks[q]->final)}});
  }
  const auto n = report.n_instances;
  report.recall = RecallScores{fraction(hits[0], n), fraction(hits[1], n), fraction(hits[2], n)};
  report.recall_stage_one =
      RecallScores{fraction(hits_one[0], n), fraction(hits_one[1], n), fraction(hits_one[2], n)};
  report.overall = report.recall->r1;
  return report;
}

EvalReport evaluate(const EvalDataset& dataset, const Scorer& scorer, const EvalOptions& options) {
  return std::visit(
      [&](const auto& instances) -> EvalReport {
        using T = std::decay_t<decltype(instances)>;
        if constexpr (std::is_same_v<T, std::vector<MatchInstance>>) {
          return eval_matching(instances, scorer, options);
        } else if constexpr (std::is_same_v<T, std::vector<WinogroundInstance>>) {
          return eval_winoground(instances, scorer, options);
        } else {
          return eval_vl_checklist(instances, scorer, options);
        }
      },
      dataset);
}

}  // namespace comclip
