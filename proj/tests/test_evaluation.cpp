#include <doctest.h>

#include <algorithm>
#include <random>

#include "reasonweaver/errors.hpp"
#include "reasonweaver/evaluation.hpp"
#include "reasonweaver/resources.hpp"
#include "test_support.hpp"

using namespace rw;

TEST_CASE("normalize_answer applies the canonical rule list") {
  CHECK(normalize_answer(" (B). ") == "b");
  CHECK(normalize_answer("Valid") == "valid");
  CHECK(normalize_answer("[42]") == "42");
  CHECK(normalize_answer("\"quoted\"") == "quoted");
  CHECK(normalize_answer("((a))") == "a");
  CHECK(normalize_answer("a  b\tc") == "a b c");
  CHECK(normalize_answer("x.,") == "x");
  CHECK(normalize_answer("(a) and (b)") == "(a) and (b)");
  CHECK(normalize_answer("don't") == "don't");
  CHECK(normalize_answer("7,425") == "7,425");
  CHECK(normalize_answer("7425") == "7425");
  CHECK(normalize_answer("7,425") != normalize_answer("7425"));  // no numeric canonicalization

  SUBCASE("idempotence on random text") {
    std::mt19937_64 rng(5);
    const std::string chars = "aB (){}[]'\".,;: \t7xyz";
    std::uniform_int_distribution<std::size_t> pick(0, chars.size() - 1);
    std::uniform_int_distribution<int> len(0, 24);
    for (int i = 0; i < 500; ++i) {
      std::string text;
      int n = len(rng);
      for (int j = 0; j < n; ++j) text.push_back(chars[pick(rng)]);
      std::string once = normalize_answer(text);
      CHECK(normalize_answer(once) == once);
    }
  }
}

TEST_CASE("extract_final_answer follows the last sentinel") {
  CHECK(extract_final_answer("...Thus, the final answer is (A).") == "a");
  CHECK(extract_final_answer("...final answer is valid.") == "valid");
  CHECK(extract_final_answer("Thus, the final answer is x. Thus, the final answer is y.") == "y");
  CHECK_FALSE(extract_final_answer("no marker anywhere").has_value());
  CHECK(extract_final_answer("no marker anywhere", /*fallback_final_line=*/true) ==
        "no marker anywhere");
  CHECK(extract_final_answer("THUS, THE FINAL ANSWER IS (c)") == "c");
  CHECK(extract_final_answer("Thus, the final answer is 3.14.") == "3.14");
  CHECK_FALSE(extract_final_answer("Thus, the final answer is .").has_value());

  SUBCASE("insensitive to everything before the last sentinel") {
    std::mt19937_64 rng(11);
    const std::string noise_chars = "abc {}().\n finally answer is";
    std::uniform_int_distribution<std::size_t> pick(0, noise_chars.size() - 1);
    for (int i = 0; i < 300; ++i) {
      std::string noise;
      for (int j = 0; j < 40; ++j) noise.push_back(noise_chars[pick(rng)]);
      std::string payload = "option" + std::to_string(i);
      auto extracted = extract_final_answer(noise + "\nThus, the final answer is " + payload + ".");
      CHECK(extracted == normalize_answer(payload));
    }
  }
}

TEST_CASE("score_task applies exact matching over normalized answers") {
  Task task = rwtest::make_task("t", 10);
  std::vector<Solution> solutions;
  for (int i = 1; i <= 10; ++i) {
    Solution s;
    s.instance_id = "t-" + std::to_string(i);
    s.method = Method::direct();
    s.answer = i <= 8 ? std::optional<std::string>("answer" + std::to_string(1000 + i)) : std::nullopt;
    solutions.push_back(s);
  }
  TaskScore score = score_task(solutions, task, "direct");
  CHECK(score.accuracy == doctest::Approx(0.8));
  CHECK(score.n_correct == 8);
  CHECK(score.n_instances == 10);
  CHECK(score.calls_total == 10);

  SUBCASE("permutation invariance") {
    std::mt19937_64 rng(3);
    for (int round = 0; round < 10; ++round) {
      std::shuffle(solutions.begin(), solutions.end(), rng);
      CHECK(score_task(solutions, task, "direct").n_correct == 8);
    }
  }
  SUBCASE("all absent answers score zero") {
    for (auto& s : solutions) s.answer.reset();
    CHECK(score_task(solutions, task, "direct").accuracy == doctest::Approx(0.0));
  }
  SUBCASE("unknown instance is a scoring error") {
    solutions[0].instance_id = "elsewhere";
    CHECK_THROWS_AS(score_task(solutions, task, "direct"), Error);
  }
  SUBCASE("missing gold target is a scoring error") {
    Task unlabeled = rwtest::make_task("t", 10, /*with_targets=*/false);
    CHECK_THROWS_AS(score_task(solutions, unlabeled, "direct"), Error);
  }
  SUBCASE("gold is normalized before comparison") {
    Task mc = rwtest::make_task("mc", 1);
    mc.instances[0].target = "(B).";
    Solution s;
    s.instance_id = "mc-1";
    s.answer = "b";
    CHECK(score_task({s}, mc, "direct").n_correct == 1);
  }
}

TEST_CASE("best_of_modules picks the max accuracy with smallest-id ties") {
  TaskScore a;
  a.accuracy = 0.4;
  TaskScore b;
  b.accuracy = 0.7;
  CHECK(best_of_modules({{1, a}, {2, b}}).module_id == 2);
  CHECK(best_of_modules({{1, a}, {2, b}}).accuracy == doctest::Approx(0.7));
  CHECK(best_of_modules({{5, a}}).module_id == 5);

  TaskScore tie = b;
  CHECK(best_of_modules({{9, b}, {4, tie}}).module_id == 4);

  SUBCASE("randomized sets agree with exhaustive max") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> acc(0.0, 1.0);
    for (int round = 0; round < 200; ++round) {
      std::vector<std::pair<int, TaskScore>> scores;
      int n = 1 + static_cast<int>(rng() % 12);
      for (int i = 0; i < n; ++i) {
        TaskScore s;
        s.accuracy = acc(rng);
        scores.emplace_back(static_cast<int>(rng() % 40) + 1, s);
      }
      BestModule best = best_of_modules(scores);
      double naive_best = -1.0;
      int naive_id = 0;
      for (const auto& [id, s] : scores) {
        if (s.accuracy > naive_best || (s.accuracy == naive_best && id < naive_id)) {
          naive_best = s.accuracy;
          naive_id = id;
        }
      }
      CHECK(best.accuracy == doctest::Approx(naive_best));
      CHECK(best.module_id == naive_id);
    }
  }
}

namespace {

RunRecord synthetic_run(const std::string& run_id, Method method, int instances, int calls_per_instance,
                        int task_level) {
  RunRecord record;
  record.run_id = run_id;
  record.task_id = "t";
  record.backend_id = "scripted:t";
  record.method = method;
  record.discovery_primary_calls = task_level;
  for (int i = 1; i <= instances; ++i) {
    Solution s;
    s.instance_id = "t-" + std::to_string(i);
    s.method = method;
    s.calls_used = calls_per_instance;
    record.solutions.push_back(s);
    for (int c = 0; c < calls_per_instance; ++c) {
      record.call_log.push_back({method.kind == MethodKind::self_discover ? Purpose::solve
                                                                           : Purpose::baseline,
                                 s.instance_id, c, "hash", false, false});
    }
  }
  for (int c = 0; c < task_level; ++c) {
    record.call_log.push_back({c == 0 ? Purpose::select : (c == 1 ? Purpose::adapt : Purpose::implement),
                               "", 0, "hash", false, false});
  }
  return record;
}

}  // namespace

TEST_CASE("account_calls reproduces the arithmetic and rejects tampering") {
  RunRecord sd = synthetic_run("r1", Method::self_discover(), 100, 1, 3);
  RunRecord sc = synthetic_run("r2", Method::self_consistency(10), 100, 10, 0);
  RunRecord pm = synthetic_run("r3", Method::per_module(0), 100, 40, 0);

  CallAccount account = account_calls({sd, sc, pm});
  CHECK(account.per_method.at("self_discover").total == 103);
  CHECK(account.per_method.at("self_discover").task_level_calls == 3);
  CHECK(account.per_method.at("self_discover").per_instance_calls == 100);
  CHECK(account.per_method.at("self_consistency:10").total == 1000);
  CHECK(account.per_method.at("per_module:0").total == 4000);

  SUBCASE("dropping a log entry breaks the cross-check") {
    sd.call_log.pop_back();
    CHECK_THROWS_AS(account_calls({sd}), Error);
  }
  SUBCASE("inflating a solution's self-report breaks the cross-check") {
    sc.solutions[0].calls_used = 11;
    try {
      account_calls({sc});
      FAIL("expected accounting error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::accounting);
    }
  }
}

TEST_CASE("category breakdown averages per-category deltas") {
  CategoryTaxonomy taxonomy({{"t1", "alpha"}, {"t2", "alpha"}, {"t3", "beta"}});
  auto score = [](const std::string& task_id, double accuracy) {
    TaskScore s;
    s.task_id = task_id;
    s.accuracy = accuracy;
    return s;
  };
  std::vector<TaskScore> method = {score("t1", 0.6), score("t2", 0.9), score("t3", 0.5),
                                   score("t4", 0.4)};
  std::vector<TaskScore> baseline = {score("t1", 0.5), score("t2", 0.6), score("t3", 0.5),
                                     score("t4", 0.1)};
  auto deltas = category_breakdown(method, baseline, taxonomy);
  CHECK(deltas.at("alpha") == doctest::Approx(0.2));
  CHECK(deltas.at("beta") == doctest::Approx(0.0));
  CHECK(deltas.at("uncategorized") == doctest::Approx(0.3));
  CHECK(deltas.size() == 3);

  SUBCASE("tasks missing from the baseline are omitted") {
    auto partial = category_breakdown({score("t9", 1.0)}, baseline, taxonomy);
    CHECK(partial.empty());
  }
}

TEST_CASE("bundled taxonomy covers the 23 BBH task names") {
  CategoryTaxonomy taxonomy = default_taxonomy();
  CHECK(taxonomy.category_of("sports_understanding") == "use_of_world_knowledge");
  CHECK(taxonomy.category_of("word_sorting") == "algorithmic_and_multistep_arithmetic");
  CHECK(taxonomy.category_of("salient_translation_error_detection") ==
        "multilingual_knowledge_and_reasoning");
  CHECK(taxonomy.category_of("snarks") == "natural_language_understanding");
  CHECK(taxonomy.category_of("not_a_task") == "uncategorized");
}

TEST_CASE("report renderers") {
  TaskScore s1;
  s1.task_id = "toy";
  s1.method = "direct";
  s1.accuracy = 0.8;
  s1.n_instances = 10;
  s1.n_correct = 8;
  s1.calls_total = 10;
  TaskScore s2 = s1;
  s2.method = "cot";
  s2.accuracy = 0.9;
  s2.n_correct = 9;

  SUBCASE("per-task CSV shows percentages") {
    std::string csv = render_per_task_csv({s1, s2});
    CHECK(csv.find("toy,direct,10,8,80.0,10") != std::string::npos);
  }
  SUBCASE("comparison grid has one row per task and one column per method") {
    std::string csv = render_comparison_csv({s1, s2});
    CHECK(csv.find("task,direct,cot") == 0);
    CHECK(csv.find("toy,80.0,90.0") != std::string::npos);
  }
  SUBCASE("efficiency rows join scores with accounting") {
    CallAccount account;
    account.per_method["direct"] = {0, 10, 10};
    auto rows = efficiency_rows({s1}, account);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].calls_per_instance == doctest::Approx(1.0));
    CHECK(rows[0].total_calls == 10);
    CHECK(render_efficiency_csv(rows).find("direct,80.0,1.0,0,10") != std::string::npos);
  }
}
