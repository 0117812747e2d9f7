#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "poemetric/cli.hpp"
#include "support/fixture.hpp"
#include "support/poems.hpp"

using namespace poemetric;
using poemetric::testing::data_path;
using poemetric::testing::fixture_dict_path;
using poemetric::testing::slurp;
using poemetric::testing::test_data_path;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("poemetric-cli-" + std::string(info->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& content) const {
    std::ofstream(path(name), std::ios::binary) << content;
    return path(name);
  }

  int run(std::vector<std::string> args, JudgeTransport* transport = nullptr) {
    out_.str("");
    err_.str("");
    return cli::run(args, out_, err_, transport, [](std::chrono::milliseconds) {});
  }

  std::string out() const { return out_.str(); }
  std::string err() const { return err_.str(); }

  fs::path dir_;
  std::ostringstream out_, err_;
};

std::string sonnet_record(const std::string& id, const std::string& body) {
  return json{{"id", id},
              {"body", body},
              {"form", "sonnet"},
              {"meter", "iambic pentameter"},
              {"rhyme", "ABAB CDCD EFEF GG"},
              {"authored_by", "model:test"}}
      .dump();
}

class CountingTransport : public JudgeTransport {
 public:
  std::string complete(const std::string& prompt) override {
    ++calls;
    if (prompt.find("garbled") != std::string::npos) return "no scores from me";
    return render_score_block(DimensionScores{3, 3, 3, 3, 3, 3, 3, 3, 3, 3});
  }
  std::string judge_name() const override { return "mock"; }
  std::atomic<int> calls{0};
};

}  // namespace

TEST_F(CliTest, AnalyzeSamples) {
  const auto out_path = path("report.json");
  ASSERT_EQ(run({"analyze", "--dict", fixture_dict_path().string(), "--corpus",
                 data_path("samples/poems.jsonl").string(), "--out", out_path}),
            0)
      << err();
  const auto j = json::parse(slurp(out_path));
  EXPECT_EQ(j["poems"].size(), 10u);
  EXPECT_TRUE(validate_report(j).empty());
  EXPECT_NE(out().find("analyzed 10 poems"), std::string::npos);
  EXPECT_FALSE(fs::exists(out_path + ".tmp"));
}

TEST_F(CliTest, AnalyzeToStdout) {
  ASSERT_EQ(run({"analyze", "--dict", fixture_dict_path().string(), "--corpus",
                 data_path("samples/poems.jsonl").string(), "--threads", "2"}),
            0)
      << err();
  EXPECT_EQ(json::parse(out())["schema"], std::string(kReportSchema));
}

TEST_F(CliTest, BadRecordListsIndex) {
  const auto corpus = write("c.jsonl", sonnet_record("a", poemetric::testing::sonnet()) + "\n" +
                                           R"({"id": "b", "body": "x y", "form": "haiku"})" + "\n");
  const int code = run({"analyze", "--dict", fixture_dict_path().string(), "--corpus", corpus, "--out",
                        path("r.json")});
  EXPECT_NE(code, 0);
  EXPECT_NE(err().find("record 2, field 'form'"), std::string::npos) << err();
  EXPECT_FALSE(fs::exists(path("r.json")));
}

TEST_F(CliTest, MeterGateFlag) {
  const auto corpus = write("c.jsonl", sonnet_record("s9", poemetric::testing::sonnet(9)) + "\n");
  const std::vector<std::string> base = {"analyze", "--dict", fixture_dict_path().string(), "--corpus", corpus};

  ASSERT_EQ(run(base), 0) << err();
  auto j = json::parse(out());
  EXPECT_FALSE(j["poems"][0]["form"]["passed"].get<bool>());
  EXPECT_DOUBLE_EQ(j["poems"][0]["form"]["meter_ratio"].get<double>(), 9.0 / 14.0);

  auto args = base;
  args.insert(args.end(), {"--meter-gate", "0.5"});
  ASSERT_EQ(run(args), 0) << err();
  j = json::parse(out());
  EXPECT_TRUE(j["poems"][0]["form"]["passed"].get<bool>());
  EXPECT_EQ(j["config"]["meter_gate"], 0.5);
}

TEST_F(CliTest, ConfigFile) {
  const auto corpus = write("c.jsonl", sonnet_record("s9", poemetric::testing::sonnet(9)) + "\n");
  const auto cfg = write("poemetric.ini", "dict = \"" + fixture_dict_path().string() + "\"\ncorpus = \"" + corpus +
                                              "\"\nmeter-gate = 0.5\n");
  ASSERT_EQ(run({"analyze", "--config", cfg}), 0) << err();
  EXPECT_TRUE(json::parse(out())["poems"][0]["form"]["passed"].get<bool>());

  ASSERT_EQ(run({"analyze", "--config", cfg, "--meter-gate", "0.9"}), 0) << err();
  EXPECT_FALSE(json::parse(out())["poems"][0]["form"]["passed"].get<bool>());
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}), 2);
  EXPECT_EQ(run({"analyze", "--meter-gate", "1.5", "--dict", "x", "--corpus", "y"}), 2);
  EXPECT_NE(err().find("meter gate"), std::string::npos);
  EXPECT_EQ(run({"analyze", "--corpus", "y"}), 2);
  EXPECT_EQ(run({"analyze", "--dict", fixture_dict_path().string(), "--corpus", path("missing.jsonl")}), 1);
  EXPECT_EQ(run({"frobnicate"}), 2);
  EXPECT_EQ(run({"--version"}), 0);
  EXPECT_EQ(out(), std::string(kToolVersion) + "\n");
}

TEST_F(CliTest, GenPrompts) {
  ASSERT_EQ(run({"gen-prompts", "--corpus", data_path("samples/poems.jsonl").string()}), 0) << err();
  std::istringstream lines(out());
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    const auto j = json::parse(line);
    EXPECT_EQ(j["prompt"].get<std::string>().rfind("Write a ", 0), 0u);
    ++n;
  }
  EXPECT_EQ(n, 10u);
}

TEST_F(CliTest, JudgeResumeAndMalformedWarning) {
  std::string corpus;
  for (const char* id : {"a", "b", "c"}) {
    corpus += json{{"id", id},
                   {"body", std::string(id) == "c" ? "a garbled little verse" : "the night is long"},
                   {"form", "ghazal"},
                   {"author", "Some Poet"}}
                  .dump() +
              "\n";
  }
  const auto corpus_path = write("c.jsonl", corpus);
  const auto evals = path("evals.jsonl");
  CountingTransport t;
  const std::vector<std::string> args = {"judge", "--corpus", corpus_path, "--out", evals, "--max-retries", "1"};

  ASSERT_EQ(run(args, &t), 0) << err();
  EXPECT_EQ(t.calls, 4);
  EXPECT_NE(out().find("judged 3 poems (2 scored, 1 unscored)"), std::string::npos) << out();
  EXPECT_NE(err().find("warning: 1 judge response(s) could not be parsed"), std::string::npos) << err();
  std::ifstream in(evals);
  const auto records = load_evaluations(in);
  ASSERT_EQ(records.size(), 3u);
  EXPECT_FALSE(records[2].scored());
  EXPECT_EQ(records[0].raw_transcript_ref, evals + ".transcripts.jsonl");

  ASSERT_EQ(run(args, &t), 0) << err();
  EXPECT_EQ(t.calls, 4);
  EXPECT_NE(out().find("skipped 3 already judged"), std::string::npos);
}

TEST_F(CliTest, JudgeNeedsEndpoint) {
  const auto corpus = write("c.jsonl", R"({"id": "a", "body": "words", "form": "ghazal"})");
  EXPECT_EQ(run({"judge", "--corpus", corpus, "--out", path("e.jsonl")}), 2);
  EXPECT_NE(err().find("--endpoint"), std::string::npos);
}

TEST_F(CliTest, AgreementIdenticalFiles) {
  std::string csv = "item_id,rater_id,dimension,score\n";
  const int scores[] = {1, 3, 5, 2, 4};
  for (int i = 0; i < 5; ++i) csv += "p" + std::to_string(i) + ",r,imagery," + std::to_string(scores[i]) + "\n";
  const auto a = write("a.csv", csv);
  ASSERT_EQ(run({"agreement", a, a, "--out", path("agree.json")}), 0) << err();
  const auto j = json::parse(slurp(path("agree.json")));
  EXPECT_EQ(j["dimensions"]["imagery"]["pooled"]["pao"], 1.0);
  EXPECT_EQ(j["dimensions"]["imagery"]["pooled"]["kappa"], 1.0);
  EXPECT_EQ(j["dimensions"]["overall"]["mean"]["rho"], 1.0);
}

TEST_F(CliTest, AgreementConstantSeriesUndefined) {
  std::string a = "item_id,rater_id,dimension,score\n", b = a;
  for (int i = 0; i < 4; ++i) {
    a += "p" + std::to_string(i) + ",judge,creativity," + std::to_string(1 + i) + "\n";
    b += "p" + std::to_string(i) + ",h1,creativity,3\n";
  }
  ASSERT_EQ(run({"agreement", write("a.csv", a), write("b.csv", b)}), 0) << err();
  EXPECT_NE(out().find("undefined"), std::string::npos) << out();
}

TEST_F(CliTest, AgreementMismatchedItems) {
  const auto a = write("a.csv", "item_id,rater_id,dimension,score\np1,j,imagery,3\np2,j,imagery,4\n");
  const auto b = write("b.csv", "item_id,rater_id,dimension,score\np1,h,imagery,3\np3,h,imagery,4\n");
  EXPECT_EQ(run({"agreement", a, b}), 1);
  EXPECT_NE(err().find("item 'p2'"), std::string::npos) << err();

  const auto two = write("two.csv", "item_id,rater_id,dimension,score\np1,x,imagery,3\np1,y,imagery,4\n");
  EXPECT_EQ(run({"agreement", two, b}), 2);

  const auto bad = write("bad.csv", "item_id,rater_id,dimension,score\np1,x,imagery,7\n");
  EXPECT_EQ(run({"agreement", bad, b}), 1);
  EXPECT_NE(err().find("outside [1,5]"), std::string::npos);
}

TEST_F(CliTest, AgreementFromEvaluationRecords) {
  std::string a, b;
  for (int i = 0; i < 3; ++i) {
    DimensionScores s{};
    s.fill(1 + i);
    a += to_json(EvaluationRecord{"p" + std::to_string(i), "judge", s, {}, std::nullopt, std::nullopt}).dump() + "\n";
    b += to_json(EvaluationRecord{"p" + std::to_string(i), "human", s, {}, std::nullopt, std::nullopt}).dump() + "\n";
  }
  b += to_json(EvaluationRecord{"p9", "human", std::nullopt, {}, std::nullopt, std::string("x")}).dump() + "\n";
  ASSERT_EQ(run({"agreement", write("a.jsonl", a), write("b.jsonl", b)}), 0) << err();
  EXPECT_NE(err().find("skipped 1 unscored"), std::string::npos);
  EXPECT_NE(out().find("human_authorship"), std::string::npos);
}

TEST_F(CliTest, SurveyFixtureThroughLoader) {
  std::ostringstream sink;
  const auto a = cli::load_ratings_file(test_data_path("survey_judge.csv").string(), sink);
  const auto b = cli::load_ratings_file(test_data_path("survey_humans.csv").string(), sink);
  const auto table = cli::compute_agreement(a, b);
  EXPECT_EQ(table.reference, "judge");
  EXPECT_EQ(table.raters, (std::vector<std::string>{"h1", "h2", "h3"}));
  EXPECT_EQ(table.rows.size(), kDimensionCount + 1);
  EXPECT_EQ(table.rows.back().first, "overall");

  std::map<std::pair<std::string, std::string>, std::vector<std::string>> expected;
  std::ifstream in(test_data_path("survey_expected.csv"));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("dimension,", 0) == 0) continue;
    const auto f = text::split_on(line, ',');
    expected[{f[0], f[1]}] = f;
  }
  std::size_t checked = 0;
  for (const auto& [dim, p] : table.rows) {
    for (const auto& [method, s] : {std::pair{"mean", &p.mean}, std::pair{"pooled", &p.pooled}}) {
      auto it = expected.find({dim, method});
      if (it == expected.end()) continue;
      const auto& f = it->second;
      EXPECT_NEAR(s->pao, std::stod(f[2]), 1e-9) << dim << " " << method;
      EXPECT_NEAR(s->kappa, std::stod(f[3]), 1e-9) << dim << " " << method;
      if (f.size() < 5 || f[4].empty()) {
        EXPECT_FALSE(s->rho) << dim << " " << method;
      } else {
        ASSERT_TRUE(s->rho) << dim << " " << method;
        EXPECT_NEAR(*s->rho, std::stod(f[4]), 1e-9) << dim << " " << method;
      }
      ++checked;
    }
  }
  EXPECT_EQ(checked, 2 * (kDimensionCount + 1));
}
