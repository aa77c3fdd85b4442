#include "cli.hpp"

#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "comclip/datasets.hpp"
#include "comclip/errors.hpp"
#include "comclip/run_config.hpp"

namespace comclip {

namespace {

namespace fs = std::filesystem;

struct RunFlags {
  std::string config_file;
  std::string backend;
  std::size_t dim = 0;
  std::string encoder_endpoint;
  std::string encoder_fixtures;
  std::string encoder_id;
  std::string llm_endpoint;
  std::string llm_fixtures;
  std::string captioner_endpoint;
  std::string captioner_fixtures;
  bool record = false;
  std::string parser;
  std::string aligner;
  std::string cache_dir;
  bool no_cache = false;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::string subimages;
  std::string weighting;
  double logit_scale = 100.0;
  std::string fill;
  double blur_fraction = 0.05;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config_file, "JSON run config; flags override it");
  cmd->add_option("--backend", f.backend, "Encoder backend")->check(CLI::IsMember({"mock", "http"}));
  cmd->add_option("--dim", f.dim, "Embedding dimension");
  cmd->add_option("--encoder-endpoint", f.encoder_endpoint, "Encoder service base URL");
  cmd->add_option("--encoder-fixtures", f.encoder_fixtures, "Encoder replay directory");
  cmd->add_option("--encoder-id", f.encoder_id, "Stable id of the http encoder");
  cmd->add_option("--llm-endpoint", f.llm_endpoint, "Language model service base URL");
  cmd->add_option("--llm-fixtures", f.llm_fixtures, "Language model replay directory");
  cmd->add_option("--captioner-endpoint", f.captioner_endpoint, "Dense captioner base URL");
  cmd->add_option("--captioner-fixtures", f.captioner_fixtures, "Dense captioner replay directory");
  cmd->add_flag("--record", f.record, "Write live service responses to the fixture directories");
  cmd->add_option("--parser", f.parser, "Sentence parser")->check(CLI::IsMember({"rule_based", "llm"}));
  cmd->add_option("--aligner", f.aligner, "Entity aligner")->check(CLI::IsMember({"lexical", "llm"}));
  cmd->add_option("--cache-dir", f.cache_dir, "Embedding cache directory");
  cmd->add_flag("--no-cache", f.no_cache, "Disable the on-disk embedding cache");
  cmd->add_option("--seed", f.seed, "Seed for every random choice");
  cmd->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--subimages", f.subimages, "Subimage configuration");
  cmd->add_option("--weighting", f.weighting, "softmax or raw_similarity");
  cmd->add_option("--logit-scale", f.logit_scale, "Softmax logit scale");
  cmd->add_option("--fill", f.fill, "Background fill")->check(CLI::IsMember({"black", "blur"}));
  cmd->add_option("--blur-fraction", f.blur_fraction, "Blur radius as a fraction of the short side");
}

bool given(const CLI::App* cmd, const char* name) { return cmd->count(name) > 0; }

RunConfig resolve(const CLI::App* cmd, const RunFlags& f) {
  RunConfig c = given(cmd, "--config") ? load_run_config(f.config_file) : default_run_config();
  if (given(cmd, "--backend")) c.encoder.kind = f.backend;
  if (given(cmd, "--dim")) c.encoder.dim = f.dim;
  if (given(cmd, "--encoder-endpoint")) c.encoder.service.endpoint = f.encoder_endpoint;
  if (given(cmd, "--encoder-fixtures")) c.encoder.service.fixture_dir = f.encoder_fixtures;
  if (given(cmd, "--encoder-id")) c.encoder.id = f.encoder_id;
  if (given(cmd, "--llm-endpoint")) c.llm.endpoint = f.llm_endpoint;
  if (given(cmd, "--llm-fixtures")) c.llm.fixture_dir = f.llm_fixtures;
  if (given(cmd, "--captioner-endpoint")) c.captioner.endpoint = f.captioner_endpoint;
  if (given(cmd, "--captioner-fixtures")) c.captioner.fixture_dir = f.captioner_fixtures;
  if (f.record) c.encoder.service.record = c.llm.record = c.captioner.record = true;
  if (given(cmd, "--parser")) c.parser = f.parser;
  if (given(cmd, "--aligner")) c.aligner = f.aligner;
  if (given(cmd, "--cache-dir")) c.cache_dir = f.cache_dir;
  if (given(cmd, "--seed")) c.seed = f.seed;
  if (given(cmd, "--jobs")) c.parallelism = f.jobs;
  if (given(cmd, "--subimages")) c.composition.subimage_config = subimage_config_from_string(f.subimages);
  if (given(cmd, "--weighting")) c.composition.weighting_mode = weighting_mode_from_string(f.weighting);
  if (given(cmd, "--logit-scale")) c.composition.logit_scale = f.logit_scale;
  if (given(cmd, "--fill")) c.composition.subimages.fill = fill_policy_from_string(f.fill);
  if (given(cmd, "--blur-fraction")) c.composition.subimages.blur_radius_fraction = f.blur_fraction;
  apply_environment(c);
  if (f.no_cache) c.cache_dir.reset();
  c.composition.validate();
  return c;
}

void print_json(std::ostream& out, const nlohmann::json& j) { out << j.dump(2) << '\n'; }

void write_output(std::ostream& out, const std::string& path, const std::string& text) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw UsageError("cannot write " + path);
  file << text;
}

struct DatasetFlags {
  std::string kind;
  std::string data;
  std::string root;
  bool lenient = false;
};

void add_dataset_flags(CLI::App* cmd, DatasetFlags& d, bool required) {
  auto* kind = cmd->add_option("--dataset", d.kind, "comvg, svo_probes, winoground, vl_checklist or retrieval");
  auto* data = cmd->add_option("--data", d.data, "Dataset JSONL file");
  if (required) {
    kind->required();
    data->required();
  }
  cmd->add_option("--root", d.root, "Directory image refs resolve against");
  cmd->add_flag("--lenient", d.lenient, "Skip rows or instances that fail instead of stopping");
}

struct Loaded {
  DatasetManifest manifest;
  std::variant<std::vector<MatchInstance>, std::vector<WinogroundInstance>,
               std::vector<VlChecklistItem>, std::vector<RetrievalRow>>
      data;
};

Loaded load_dataset(const DatasetFlags& d, bool lenient) {
  LoadOptions options;
  if (!d.root.empty()) options.root = fs::path(d.root);
  options.lenient = lenient;
  auto take = [](auto loaded) { return Loaded{loaded.manifest, std::move(loaded.instances)}; };
  switch (dataset_kind_from_string(d.kind)) {
    case DatasetKind::kComvg: return take(load_comvg(d.data, options));
    case DatasetKind::kSvoProbes: return take(load_svo_probes(d.data, options));
    case DatasetKind::kWinoground: return take(load_winoground(d.data, options));
    case DatasetKind::kVlChecklist: return take(load_vl_checklist(d.data, options));
    case DatasetKind::kRetrieval: return take(load_retrieval(d.data, options));
  }
  throw UsageError("unknown dataset kind");
}

EvalDataset as_eval_dataset(Loaded& loaded) {
  if (auto* m = std::get_if<std::vector<MatchInstance>>(&loaded.data)) return *m;
  if (auto* w = std::get_if<std::vector<WinogroundInstance>>(&loaded.data)) return *w;
  if (auto* v = std::get_if<std::vector<VlChecklistItem>>(&loaded.data)) return *v;
  throw UsageError("retrieval data is evaluated with two-stage reranking, not this command");
}

bool slot_matches(const std::vector<EntityTriple>& parsed, const EntityTriple& gold,
                  std::string EntityTriple::*slot) {
  const auto want = normalize_entity_phrase(gold.*slot);
  return std::any_of(parsed.begin(), parsed.end(),
                     [&](const EntityTriple& t) { return normalize_entity_phrase(t.*slot) == want; });
}

// Agreement of the parser with annotated triplets.
nlohmann::json parse_parity(const SentenceParser& parser, std::span<const MatchInstance> instances) {
  std::size_t triple = 0, subject = 0, predicate = 0, object = 0, empty = 0;
  for (const auto& m : instances) {
    std::vector<EntityTriple> parsed;
    try {
      parsed = parser.parse(m.sentence).triplets;
    } catch (const NoTripleFound&) {
    }
    if (parsed.empty()) ++empty;
    const bool s = slot_matches(parsed, m.triplet, &EntityTriple::subject);
    const bool p = slot_matches(parsed, m.triplet, &EntityTriple::predicate);
    const bool o = slot_matches(parsed, m.triplet, &EntityTriple::object);
    subject += s;
    predicate += p;
    object += o;
    const EntityTriple gold{normalize_entity_phrase(m.triplet.subject),
                            normalize_entity_phrase(m.triplet.predicate),
                            normalize_entity_phrase(m.triplet.object)};
    triple += std::find(parsed.begin(), parsed.end(), gold) != parsed.end();
  }
  const double n = instances.empty() ? 1.0 : double(instances.size());
  return {{"n", instances.size()},
          {"triplet_match", triple / n},
          {"subject_match", subject / n},
          {"predicate_match", predicate / n},
          {"object_match", object / n},
          {"no_triplet", empty}};
}

std::string subimage_file_name(std::size_t index, const Entity& e) {
  std::string word = e.word;
  std::replace(word.begin(), word.end(), ' ', '_');
  return fmt::format("{:02}_{}_{}.png", index, to_string(e.role), word);
}

nlohmann::json eval_config_json(const RunConfig& run, const std::string& scorer) {
  auto j = to_json(run);
  j.erase("cache_dir");
  j["scorer"] = scorer;
  return j;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  bool json_errors = false;
  for (int i = 1; i < argc; ++i) json_errors |= std::string_view(argv[i]) == "--json-errors";

  auto previous = spdlog::default_logger();
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("comclip", sink);
  logger->set_pattern("%l: %v");
  logger->set_level(spdlog::level::warn);
  spdlog::set_default_logger(logger);
  struct Restore {
    std::shared_ptr<spdlog::logger> logger;
    ~Restore() { spdlog::set_default_logger(logger); }
  } restore{previous};

  auto report_error = [&](const std::string& kind, const std::string& type,
                          const std::string& message, int code) {
    if (json_errors) {
      err << nlohmann::json{{"error", {{"kind", kind}, {"type", type}, {"message", message}}},
                            {"exit_code", code}}
                 .dump()
          << '\n';
    } else {
      err << "error: " << message << '\n';
    }
    return code;
  };

  CLI::App app{"Compositional image-text matching"};
  app.require_subcommand(1);
  app.fallthrough();
  bool json_errors_flag = false;
  bool quiet = false;
  app.add_flag("--json-errors", json_errors_flag, "Print errors as JSON on stderr");
  app.add_flag("--quiet", quiet, "Only log errors");

  RunFlags run_flags;
  DatasetFlags data_flags;

  auto* parse_cmd = app.add_subcommand("parse", "Extract subject/predicate/object triplets");
  std::string text;
  parse_cmd->add_option("--text", text, "Sentence");
  add_dataset_flags(parse_cmd, data_flags, false);
  add_run_flags(parse_cmd, run_flags);

  auto* ground_cmd = app.add_subcommand("ground", "Ground entities and write their subimages");
  std::string image_path, out_dir;
  ground_cmd->add_option("--image", image_path, "Image file")->required();
  ground_cmd->add_option("--text", text, "Sentence")->required();
  ground_cmd->add_option("--out-dir", out_dir, "Directory for subimage PNGs");
  add_run_flags(ground_cmd, run_flags);

  auto* score_cmd = app.add_subcommand("score", "Score one image against one sentence");
  bool explain = false;
  score_cmd->add_option("--image", image_path, "Image file")->required();
  score_cmd->add_option("--text", text, "Sentence")->required();
  score_cmd->add_flag("--explain", explain, "Include per-entity boxes and composition details");
  add_run_flags(score_cmd, run_flags);

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a dataset");
  std::string scores_csv, out_path;
  bool baseline_only = false;
  std::size_t k_rerank = 10;
  add_dataset_flags(eval_cmd, data_flags, true);
  eval_cmd->add_option("--scores-csv", scores_csv, "Write per-instance scores as CSV");
  eval_cmd->add_option("--out", out_path, "Write the report here instead of stdout");
  eval_cmd->add_flag("--baseline", baseline_only, "Score with the global embeddings only");
  eval_cmd->add_option("--k", k_rerank, "Rerank window for retrieval")->check(CLI::PositiveNumber);
  add_run_flags(eval_cmd, run_flags);

  auto* rerank_cmd = app.add_subcommand("rerank", "Two-stage retrieval over a captioned gallery");
  std::string rerank_data;
  rerank_cmd->add_option("--data", rerank_data, "Retrieval JSONL file")->required();
  rerank_cmd->add_option("--root", data_flags.root, "Directory image refs resolve against");
  rerank_cmd->add_flag("--lenient", data_flags.lenient, "Skip queries that fail");
  rerank_cmd->add_option("--k", k_rerank, "Rerank window")->check(CLI::PositiveNumber);
  rerank_cmd->add_option("--scores-csv", scores_csv, "Write per-query ranks as CSV");
  add_run_flags(rerank_cmd, run_flags);

  auto* ablate_cmd = app.add_subcommand("ablate", "Evaluate a grid of subimage configurations");
  std::vector<std::string> config_names;
  std::string format = "table";
  bool with_baseline = false;
  add_dataset_flags(ablate_cmd, data_flags, true);
  ablate_cmd->add_option("--configs", config_names, "Comma-separated subimage configurations")
      ->delimiter(',');
  ablate_cmd->add_option("--format", format, "table or json")->check(CLI::IsMember({"table", "json"}));
  ablate_cmd->add_flag("--with-baseline", with_baseline, "Add a row scored without composition");
  add_run_flags(ablate_cmd, run_flags);

  auto* cache_cmd = app.add_subcommand("cache", "Inspect or clear the embedding cache");
  std::string cache_action;
  cache_cmd->add_option("action", cache_action, "stats or clear")
      ->required()
      ->check(CLI::IsMember({"stats", "clear"}));
  add_run_flags(cache_cmd, run_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    return report_error("usage", "UsageError", e.what(), 1);
  }
  if (quiet) logger->set_level(spdlog::level::err);

  try {
    CLI::App* cmd = app.get_subcommands().front();
    const RunConfig run = resolve(cmd, run_flags);
    const bool lenient = data_flags.lenient || run.lenient;
    const EvalOptions eval_options{lenient, run.parallelism, run.seed};

    if (cmd == parse_cmd) {
      Runtime runtime(run);
      if (!data_flags.data.empty()) {
        if (data_flags.kind.empty()) throw UsageError("--data needs --dataset");
        auto loaded = load_dataset({data_flags.kind, data_flags.data, data_flags.root, true}, true);
        auto* matching = std::get_if<std::vector<MatchInstance>>(&loaded.data);
        if (matching == nullptr) throw UsageError("parse parity needs a comvg or svo_probes dataset");
        auto j = parse_parity(runtime.parser(), *matching);
        j["manifest"] = to_json(loaded.manifest);
        print_json(out, j);
        return 0;
      }
      if (!given(cmd, "--text")) throw UsageError("parse needs --text or --dataset/--data");
      print_json(out, to_json(runtime.parser().parse(text)));
      return 0;
    }

    if (cmd == ground_cmd) {
      Runtime runtime(run);
      const auto scorer = runtime.scorer(run.composition);
      const auto image = Image::load(image_path);
      const auto parsed = scorer.parse(text);
      nlohmann::json subs = nlohmann::json::array();
      const auto subimages = scorer.subimages(image, parsed);
      if (!out_dir.empty()) fs::create_directories(out_dir);
      for (std::size_t i = 0; i < subimages.size(); ++i) {
        const auto& s = subimages[i];
        nlohmann::json entry{{"word", s.entity.word},
                             {"role", to_string(s.entity.role)},
                             {"kind", to_string(s.subimage.kind)}};
        if (!out_dir.empty()) {
          const auto path = fs::path(out_dir) / subimage_file_name(i, s.entity);
          s.subimage.pixels.save_png(path);
          entry["file"] = path.string();
        }
        subs.push_back(std::move(entry));
      }
      print_json(out, {{"parsed", to_json(parsed)},
                       {"grounding", to_json(scorer.ground(image, parsed))},
                       {"subimages", std::move(subs)}});
      return 0;
    }

    if (cmd == score_cmd) {
      Runtime runtime(run);
      const auto result = runtime.scorer(run.composition).score(Image::load(image_path), text);
      print_json(out, to_json(result, explain));
      return 0;
    }

    if (cmd == eval_cmd || cmd == rerank_cmd) {
      if (cmd == rerank_cmd) data_flags = {"retrieval", rerank_data, data_flags.root, data_flags.lenient};
      Runtime runtime(run);
      auto loaded = load_dataset(data_flags, lenient);
      ImageStore images(loaded.manifest.root);
      const auto baseline = runtime.baseline_scorer(images);
      const auto comclip = runtime.comclip_scorer(images, run.composition);
      const auto& scorer = baseline_only ? baseline : comclip;
      EvalReport report;
      if (auto* rows = std::get_if<std::vector<RetrievalRow>>(&loaded.data)) {
        const auto set = make_retrieval_set(*rows, run.seed);
        report = eval_retrieval(set, baseline, scorer, k_rerank, eval_options);
      } else {
        report = evaluate(as_eval_dataset(loaded), scorer, eval_options);
      }
      report.dataset = std::string(to_string(loaded.manifest.kind));
      report.config = eval_config_json(run, baseline_only ? "baseline" : "comclip");
      if (!scores_csv.empty()) write_scores_csv(report, scores_csv);
      auto j = to_json(report);
      j["manifest"] = to_json(loaded.manifest);
      write_output(out, out_path, j.dump(2) + "\n");
      return 0;
    }

    if (cmd == ablate_cmd) {
      Runtime runtime(run);
      auto loaded = load_dataset(data_flags, lenient);
      const auto dataset = as_eval_dataset(loaded);
      ImageStore images(loaded.manifest.root);
      if (config_names.empty()) {
        for (auto c : all_subimage_configs()) config_names.emplace_back(to_string(c));
      }
      std::vector<CompositionConfig> configs;
      for (const auto& name : config_names) {
        auto c = run.composition;
        c.subimage_config = subimage_config_from_string(name);
        configs.push_back(c);
      }
      std::vector<AblationRow> rows;
      if (with_baseline) {
        AblationRow row{"baseline", run.composition,
                        evaluate(dataset, runtime.baseline_scorer(images), eval_options)};
        row.report.config = eval_config_json(run, "baseline");
        rows.push_back(std::move(row));
      }
      for (auto& row : run_ablation_grid(dataset, configs,
                                         [&](const CompositionConfig& c) {
                                           return runtime.comclip_scorer(images, c);
                                         },
                                         eval_options)) {
        rows.push_back(std::move(row));
      }
      if (format == "json") {
        print_json(out, {{"rows", to_json(rows)},
                         {"manifest", to_json(loaded.manifest)},
                         {"encoder_calls", runtime.encoder_calls()}});
      } else {
        out << format_ablation_table(rows);
      }
      return 0;
    }

    if (cmd == cache_cmd) {
      if (!run.cache_dir) throw UsageError("no cache directory: pass --cache-dir or set COMCLIP_CACHE_DIR");
      EmbeddingCache cache(*run.cache_dir);
      if (cache_action == "clear") {
        print_json(out, {{"removed", cache.clear()}, {"dir", run.cache_dir->string()}});
      } else {
        const auto s = cache.stats();
        print_json(out, {{"entries", s.entries}, {"bytes", s.bytes}, {"dir", run.cache_dir->string()}});
      }
      return 0;
    }
    throw UsageError("no subcommand");
  } catch (const Error& e) {
    const int code = exit_code_for(e.kind());
    return report_error(to_string(e.kind()), e.type(), e.what(), code);
  } catch (const nlohmann::json::exception& e) {
    return report_error("data", "DecodeError", e.what(), 2);
  } catch (const fs::filesystem_error& e) {
    return report_error("data", "FilesystemError", e.what(), 2);
  }
}

}  // namespace comclip
