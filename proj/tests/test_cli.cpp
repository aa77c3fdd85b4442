#include <doctest.h>

#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "support.hpp"

using comclip::testing::TempDir;
using comclip::testing::write_text;
using comclip::testing::read_text;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "comclip");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = comclip::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Two noise images plus a small Winoground and ComVG file next to them.
struct Fixture {
  TempDir dir;
  Fixture() {
    std::mt19937_64 rng(11);
    comclip::testing::random_image(rng, 24, 16).save_png(dir / "a.png");
    comclip::testing::random_image(rng, 24, 16).save_png(dir / "b.png");
    std::string wino;
    for (int i = 0; i < 3; ++i) {
      wino += nlohmann::json{{"id", i},
                             {"caption_0", "a dog chases a cat"},
                             {"caption_1", "a cat chases a dog"},
                             {"image_0", "a.png"},
                             {"image_1", "b.png"}}
                  .dump() +
              "\n";
    }
    write_text(dir / "wino.jsonl", wino);
    std::string comvg;
    const char* types[] = {"subject", "predicate", "object"};
    for (int i = 0; i < 3; ++i) {
      comvg += nlohmann::json{{"id", i},
                              {"sentence", "a man riding a horse"},
                              {"triplet", {{"subject", "man"}, {"predicate", "riding"}, {"object", "horse"}}},
                              {"neg_type", types[i]},
                              {"pos_image", "a.png"},
                              {"neg_image", "b.png"}}
                   .dump() +
               "\n";
    }
    write_text(dir / "comvg.jsonl", comvg);
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("score prints one record per entity") {
  Fixture f;
  const auto r = run({"score", "--no-cache", "--image", f.path("a.png"), "--text", "a man riding a horse"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["entities"].size() == 3);
  CHECK(j["final_score"].is_number());
  CHECK(j["final_score"].get<double>() >= -1.0);
  CHECK(j["final_score"].get<double>() <= 1.0);

  const auto e = run({"score", "--no-cache", "--explain", "--image", f.path("a.png"), "--text",
                      "a man riding a horse"});
  REQUIRE(e.code == 0);
  CHECK(nlohmann::json::parse(e.out)["final_score"] == j["final_score"]);
}

TEST_CASE("parse subcommand") {
  const auto r = run({"parse", "--text", "a man hitting a baseball"});
  REQUIRE(r.code == 0);
  const auto t = nlohmann::json::parse(r.out)["triplets"].at(0);
  CHECK(t["subject"] == "man");
  CHECK(t["predicate"] == "hitting");
  CHECK(t["object"] == "baseball");

  Fixture f;
  const auto p = run({"parse", "--dataset", "comvg", "--data", f.path("comvg.jsonl")});
  REQUIRE(p.code == 0);
  const auto j = nlohmann::json::parse(p.out);
  CHECK(j["n"] == 3);
  CHECK(j["manifest"]["count"] == 3);
}

TEST_CASE("ground writes subimages") {
  Fixture f;
  const auto out = f.dir / "subs";
  const auto r = run({"ground", "--no-cache", "--image", f.path("a.png"), "--text", "a man riding a horse",
                      "--out-dir", out.string()});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  REQUIRE(j["subimages"].size() == 3);
  for (const auto& s : j["subimages"]) CHECK(std::filesystem::exists(s["file"].get<std::string>()));
}

TEST_CASE("eval is reproducible for a fixed seed") {
  Fixture f;
  const std::vector<std::string> args{"eval", "--no-cache", "--seed", "7", "--jobs", "3",
                                      "--dataset", "winoground", "--data", f.path("wino.jsonl")};
  const auto a = run(args);
  const auto b = run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const auto j = nlohmann::json::parse(a.out);
  CHECK(j["dataset"] == "winoground");
  CHECK(j["seed"] == 7);
  CHECK(j["n_instances"] == 3);
  CHECK(j["winoground"]["group"].is_number());

  const auto csv = f.path("scores.csv");
  const auto c = run({"eval", "--no-cache", "--dataset", "comvg", "--data", f.path("comvg.jsonl"),
                      "--scores-csv", csv});
  REQUIRE(c.code == 0);
  CHECK(read_text(csv).rfind("id,", 0) == 0);
  CHECK(nlohmann::json::parse(c.out)["by_neg_type"].size() == 3);
}

TEST_CASE("all_black ablation row equals the baseline row") {
  Fixture f;
  const auto r = run({"ablate", "--no-cache", "--dataset", "comvg", "--data", f.path("comvg.jsonl"),
                      "--configs", "full,all_black", "--with-baseline", "--format", "json"});
  REQUIRE(r.code == 0);
  const auto rows = nlohmann::json::parse(r.out)["rows"];
  REQUIRE(rows.size() == 3);
  CHECK(rows[0]["name"] == "baseline");
  CHECK(rows[2]["name"] == "all_black");
  CHECK(rows[0]["report"]["overall"] == rows[2]["report"]["overall"]);
  CHECK(rows[0]["report"]["by_neg_type"] == rows[2]["report"]["by_neg_type"]);

  const auto table = run({"ablate", "--no-cache", "--dataset", "comvg", "--data", f.path("comvg.jsonl"),
                          "--configs", "full"});
  REQUIRE(table.code == 0);
  CHECK(table.out.find("full") != std::string::npos);
}

TEST_CASE("cache stats and clear") {
  Fixture f;
  TempDir cache;
  REQUIRE(run({"score", "--cache-dir", cache.path().string(), "--image", f.path("a.png"), "--text",
               "a cat"}).code == 0);
  auto stats = nlohmann::json::parse(run({"cache", "stats", "--cache-dir", cache.path().string()}).out);
  CHECK(stats["entries"].get<int>() > 0);
  const auto cleared = run({"cache", "clear", "--cache-dir", cache.path().string()});
  REQUIRE(cleared.code == 0);
  stats = nlohmann::json::parse(run({"cache", "stats", "--cache-dir", cache.path().string()}).out);
  CHECK(stats["entries"] == 0);
}

TEST_CASE("exit codes and JSON errors") {
  Fixture f;
  CHECK(run({"score", "--bogus"}).code == 1);
  CHECK(run({"score", "--no-cache", "--weighting", "nope", "--image", f.path("a.png"), "--text", "x"}).code == 1);

  const auto missing = run({"--json-errors", "score", "--no-cache", "--image", f.path("nope.png"), "--text", "x"});
  CHECK(missing.code == 2);
  const auto j = nlohmann::json::parse(missing.err.substr(missing.err.find('{')));
  CHECK(j["exit_code"] == 2);
  CHECK(j["error"]["kind"] == "data");
  CHECK(j["error"]["type"].is_string());
  CHECK(j["error"]["message"].is_string());

  write_text(f.dir / "bad.jsonl", "{not json}\n");
  CHECK(run({"eval", "--no-cache", "--dataset", "comvg", "--data", f.path("bad.jsonl")}).code == 2);

  const auto backend = run({"--json-errors", "score", "--no-cache", "--backend", "http", "--encoder-id", "x",
                            "--encoder-fixtures", f.dir.path().string(), "--image", f.path("a.png"),
                            "--text", "x"});
  CHECK(backend.code == 3);
}
