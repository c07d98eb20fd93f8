/// @file
/// @brief Tests for ground truth keys, retrieval metrics, classification and the sweep.

#include "mididedup/eval.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "testing/oracles.h"

namespace mididedup {
namespace {

TEST(TitleKeyTest, NumberedCopyJoinsOriginal) {
  const std::vector<FileId> ids{"ABBA/Dancing Queen.mid", "ABBA/Dancing queen.2.mid"};
  const auto gt = ground_truth_from_paths(ids);
  ASSERT_EQ(gt.groups.size(), 1u);
  EXPECT_EQ(gt.groups.begin()->second.size(), 2u);
  EXPECT_TRUE(gt.same_group(ids[0], ids[1]));
}

TEST(TitleKeyTest, ArtistIsPartOfKey) {
  const std::vector<FileId> ids{"X/a.mid", "Y/a.mid"};
  EXPECT_EQ(ground_truth_from_paths(ids).groups.size(), 2u);
}

TEST(TitleKeyTest, HandLabelledFixture) {
  // Oracle partition written out by hand; label per path.
  const std::vector<std::pair<FileId, int>> fixture{
      {"Queen/Bohemian Rhapsody.mid", 1},  {"Queen/bohemian rhapsody.1.mid", 1},
      {"Queen/BOHEMIAN RHAPSODY.3.mid", 1}, {"Queen/Bohemian Rhapsody .2.mid", 1},
      {"queen/Bohemian Rhapsody.4.MID", 1}, {"Queen/Bohemian Rhapsody 2.mid", 2},
      {"Queen/Killer Queen.mid", 3},        {"Queen/Killer Queen.10.mid", 3},
      {"Queen/Killer Queen.v2.mid", 4},     {"Queen/Somebody.mid", 5},
      {"ABBA/Waterloo.mid", 6},             {"ABBA/waterloo.1.mid", 6},
      {"ABBA/Waterloo.1.1.mid", 7},         {"ABBA/SOS.mid", 8},
      {"ABBA/S.O.S.mid", 9},                {"ABBA/SOS.7.mid", 8},
      {"Beatles/Help!.mid", 10},            {"Beatles/Help!.2.mid", 10},
      {"Beatles/Yesterday.mid", 11},        {"Beatles/Yesterday.midi", 11},
      {"Beatles/yesterday.9.midi", 11},     {"Beatles/Let It Be.mid", 12},
      {"Beatles/Let It Be.mid.2.mid", 13},  {"Other/Let It Be.mid", 14},
      {"Other/Let It Be.1.mid", 14},        {"Other/Solo.mid", 15},
      {"Other/Duet.mid", 16},               {"Other/duet.5.mid", 16},
      {"Other/Trio.12.mid", 17},            {"Other/trio.mid", 17},
  };
  ASSERT_EQ(fixture.size(), 30u);
  std::vector<FileId> ids;
  for (const auto& [id, label] : fixture) ids.push_back(id);
  const auto gt = ground_truth_from_paths(ids);
  for (std::size_t i = 0; i < fixture.size(); ++i) {
    for (std::size_t j = i + 1; j < fixture.size(); ++j) {
      EXPECT_EQ(gt.same_group(fixture[i].first, fixture[j].first), fixture[i].second == fixture[j].second)
          << fixture[i].first << " vs " << fixture[j].first;
    }
  }
}

TEST(TitleKeyTest, NoDirectoryThrows) { EXPECT_THROW(title_key("song.mid"), std::invalid_argument); }

TEST(GroundTruthTest, JsonRoundTrip) {
  const auto gt = ground_truth_from_groups({{"g1", {"b", "a"}}, {"g2", {"c"}}});
  const auto back = ground_truth_from_json(ground_truth_to_json(gt));
  EXPECT_EQ(back.groups, gt.groups);
  EXPECT_EQ(gt.truth_pair_count(), 1u);
  EXPECT_EQ(gt.duplicate_files(), (std::set<FileId>{"a", "b"}));
}

TEST(NdcgTest, HandValues) {
  const std::size_t rank1[] = {1}, rank3[] = {3}, ranks12[] = {1, 2}, ranks21[] = {2, 1};
  EXPECT_DOUBLE_EQ(ndcg_from_ranks(rank1), 1.0);
  EXPECT_NEAR(ndcg_from_ranks(rank3), 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(ndcg_from_ranks(ranks12), 1.0);
  EXPECT_DOUBLE_EQ(ndcg_from_ranks(ranks21), 1.0);
  const std::size_t ranks24[] = {2, 4};
  EXPECT_NEAR(ndcg_from_ranks(ranks24), (1 / std::log2(3.0) + 1 / std::log2(5.0)) / (1 + 1 / std::log2(3.0)),
              1e-12);
}

TEST(NdcgTest, FromRanking) {
  const std::vector<FileId> ranking{"x", "y", "d", "z"};
  EXPECT_NEAR(ndcg_all(ranking, {"d"}), 0.5, 1e-12);
}

TEST(MrrTest, HandValues) {
  const std::size_t ones[] = {1, 1, 1}, r14[] = {1, 4};
  EXPECT_EQ(mrr(ones), 1.0);
  EXPECT_EQ(mrr(r14), 0.625);
}

TEST(MrrTest, LowestScoredDuplicateInFiveFiles) {
  const std::vector<FileId> ids{"a/q.mid", "a/x.mid", "a/y.mid", "a/z.mid", "b/q.mid"};
  const auto gt = ground_truth_from_groups({{"q", {"a/q.mid", "b/q.mid"}}});
  const std::vector<double> scores{0.0, 0.9, 0.8, 0.7, 0.1};
  const auto ranking = rank_candidates(ids, scores, 0);
  EXPECT_EQ(reciprocal_rank(ranking, {"b/q.mid"}), 0.25);
  const auto result = evaluate_retrieval(ids, gt, [&](std::size_t q, std::size_t c) {
    return q == 0 ? scores[c] : (c == 0 ? 0.1 : 0.5);
  });
  EXPECT_EQ(result.queries, 2u);
  EXPECT_DOUBLE_EQ(result.mrr_mean, (0.25 + 0.25) / 2);
}

TEST(ClassificationTest, PerfectAndEmpty) {
  const auto gt = ground_truth_from_groups(
      {{"a", {"1", "2"}}, {"b", {"3", "4"}}, {"c", {"5", "6"}}, {"d", {"7", "8"}}, {"e", {"9", "10"}}});
  PredictedPairs perfect{{"1", "2"}, {"3", "4"}, {"5", "6"}, {"7", "8"}, {"10", "9"}};
  const auto m = classification_metrics(perfect, gt);
  EXPECT_EQ(m.precision, 1.0);
  EXPECT_EQ(m.recall, 1.0);
  EXPECT_EQ(m.f1, 1.0);
  EXPECT_EQ(m.fn_count, 0u);
  const auto e = classification_metrics({}, gt);
  EXPECT_EQ(e.precision, 0.0);
  EXPECT_EQ(e.recall, 0.0);
  EXPECT_EQ(e.fn_count, 10u);
}

TEST(ClassificationTest, MatchesBruteForce) {
  std::mt19937 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<FileId> files;
    std::vector<int> label;
    std::map<std::string, std::vector<FileId>> groups;
    for (int i = 0; i < 12; ++i) {
      files.push_back("f" + std::to_string(i));
      label.push_back(std::uniform_int_distribution<int>(0, 4)(rng));
      groups["g" + std::to_string(label.back())].push_back(files.back());
    }
    std::set<std::pair<std::string, std::string>> predicted;
    std::vector<SimilarityEdge> edges;
    for (int i = 0; i < 12; ++i)
      for (int j = i + 1; j < 12; ++j)
        if (rng() % 4 == 0) {
          edges.push_back(make_edge(files[i], files[j], "hash", 1.0));
          predicted.insert(std::minmax(files[i], files[j]));
        }
    const auto m = classification_metrics(classify_pairs(edges, {{"hash", 1.0}}), ground_truth_from_groups(groups));
    const auto o = testing::classify_bruteforce(files, label, predicted);
    EXPECT_DOUBLE_EQ(m.precision, o.precision);
    EXPECT_DOUBLE_EQ(m.recall, o.recall);
    EXPECT_EQ(m.fn_count, o.fn_count);
  }
}

TEST(ClassificationTest, UnionAcrossMethods) {
  std::vector<SimilarityEdge> edges{make_edge("a", "b", "hash", 1.0), make_edge("a", "b", "entropy", 1.0),
                                    make_edge("c", "d", "chroma_dtw", 0.8)};
  EXPECT_EQ(classify_pairs(edges, {{"hash", 1.0}, {"chroma_dtw", 0.8}}).size(), 2u);
  EXPECT_EQ(classify_pairs(edges, {{"chroma_dtw", 0.81}}).size(), 0u);
  EXPECT_TRUE(meets_threshold(0.8999995, 0.9));
}

TEST(SweepTest, AllCorrectGivesLowestGridPoint) {
  const auto gt = ground_truth_from_groups({{"g", {"a", "b", "c"}}});
  std::vector<SimilarityEdge> edges{make_edge("a", "b", "x", 0.7), make_edge("b", "c", "x", 0.95)};
  const auto r = sweep_threshold(edges, gt, 0.9, 0.5);
  EXPECT_TRUE(r.reachable);
  EXPECT_EQ(r.threshold, 0.5);
  EXPECT_EQ(r.curve.size(), 501u);
}

TEST(SweepTest, MatchesGridOracle) {
  std::mt19937 rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    std::map<std::string, std::vector<FileId>> groups;
    std::vector<FileId> ids;
    for (int i = 0; i < 14; ++i) {
      ids.push_back("f" + std::to_string(i));
      groups["g" + std::to_string(rng() % 5)].push_back(ids.back());
    }
    const auto gt = ground_truth_from_groups(groups);
    std::vector<SimilarityEdge> edges;
    for (int i = 0; i < 14; ++i)
      for (int j = i + 1; j < 14; ++j) {
        if (rng() % 3) continue;
        const bool dup = gt.same_group(ids[i], ids[j]);
        const double s = std::uniform_real_distribution<double>(dup ? 0.6 : 0.5, dup ? 1.0 : 0.9)(rng);
        edges.push_back(make_edge(ids[i], ids[j], "x", s));
      }
    const auto r = sweep_threshold(edges, gt, 0.9, 0.5);
    const auto [t, ok] = testing::sweep_bruteforce(edges, gt, 0.9, 0.5);
    EXPECT_EQ(r.threshold, t);
    EXPECT_EQ(r.reachable, ok);
  }
}

TEST(SweepTest, UnreachableFlag) {
  const auto gt = ground_truth_from_groups({{"g", {"a", "b"}}});
  std::vector<SimilarityEdge> edges{make_edge("a", "c", "x", 1.0), make_edge("a", "b", "x", 1.0),
                                    make_edge("b", "c", "x", 1.0)};
  const auto r = sweep_threshold(edges, gt, 0.9, 0.5);
  EXPECT_FALSE(r.reachable);
  EXPECT_EQ(r.threshold, 1.0);
}

}  // namespace
}  // namespace mididedup
