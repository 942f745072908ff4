// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "mae4d/metrics/csv.hpp"
#include "mae4d/metrics/losses.hpp"
#include "mae4d/metrics/metrics.hpp"
#include "mae4d/numcore/ops.hpp"
#include "support/oracles.hpp"

namespace {

using namespace mae4d::metrics;
using mae4d::numcore::Rng;
using mae4d::readout::SE3Pose;
namespace nc = mae4d::numcore;
namespace oracle = mae4d::oracle;

SE3Pose random_pose(Rng& rng) {
  SE3Pose p;
  p.R = oracle::random_rotation(rng);
  p.t = {rng.normal(), rng.normal(), rng.normal()};
  return p;
}

TEST(Epe, IdenticalPosesGiveZero) {
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    const SE3Pose p = random_pose(rng);
    EXPECT_NEAR(epe_pose(p, p), 0.0, 1e-12);
  }
}

TEST(Epe, PureTranslationOffsetIsItsLength) {
  SE3Pose a, b;
  b.t = {3.0, 4.0, 0.0};
  EXPECT_NEAR(epe_pose(a, b), 5.0, 1e-12);
}

TEST(Epe, MatchesPointwiseOracle) {
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const SE3Pose p = random_pose(rng), g = random_pose(rng);
    EXPECT_NEAR(epe_pose(p, g), oracle::epe(p.R, p.t.data(), g.R, g.t.data()), 1e-9);
  }
}

TEST(Epe, InvariantToSharedRotationOfWorld) {
  // Rotating both cameras' outputs by the same rotation preserves distances.
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const SE3Pose p = random_pose(rng), g = random_pose(rng);
    SE3Pose w = random_pose(rng);
    w.t = {0, 0, 0};
    EXPECT_NEAR(epe_pose(compose(w, p), compose(w, g)), epe_pose(p, g), 1e-9);
  }
}

TEST(Epe, CubeCorners) {
  const auto& pts = cube_points();
  int near = 0, far = 0;
  for (const auto& x : pts) {
    EXPECT_EQ(std::abs(x[0]), 1.0);
    EXPECT_EQ(std::abs(x[1]), 1.0);
    near += x[2] == 1.0;
    far += x[2] == 3.0;
  }
  EXPECT_EQ(near, 4);
  EXPECT_EQ(far, 4);
}

TrackEval random_tracks(Rng& rng, std::size_t n, std::size_t t, double noise) {
  TrackEval e{nc::Array({n, t, 2}), nc::Array({n, t}), nc::Array({n, t, 2}), nc::Array({n, t})};
  for (std::size_t i = 0; i < e.gt_xy.size(); ++i) {
    e.gt_xy[i] = rng.uniform(0.0, 224.0);
    e.pred_xy[i] = e.gt_xy[i] + rng.normal(0.0, noise);
  }
  for (std::size_t i = 0; i < e.gt_visible.size(); ++i) {
    e.gt_visible[i] = rng.coin(0.8) ? 1.0 : 0.0;
    e.pred_visible[i] = rng.coin(0.8) ? e.gt_visible[i] : 1.0 - e.gt_visible[i];
  }
  return e;
}

TEST(AverageJaccard, PerfectPredictionScoresOne) {
  Rng rng(4);
  TrackEval e = random_tracks(rng, 6, 16, 0.0);
  e.pred_visible = e.gt_visible;
  EXPECT_EQ(average_jaccard(e), 1.0);
}

TEST(AverageJaccard, AllPredictedOccludedScoresZero) {
  Rng rng(5);
  TrackEval e = random_tracks(rng, 6, 16, 0.0);
  for (auto& v : e.gt_visible.data()) v = 1.0;
  for (auto& v : e.pred_visible.data()) v = 0.0;
  EXPECT_EQ(average_jaccard(e), 0.0);
}

TEST(AverageJaccard, MatchesSetCountingOracle) {
  Rng rng(6);
  for (int i = 0; i < 200; ++i) {
    const TrackEval e = random_tracks(rng, 1 + rng.index(8), 2 + rng.index(15), 6.0);
    EXPECT_NEAR(average_jaccard(e), oracle::average_jaccard(e.pred_xy, e.pred_visible, e.gt_xy, e.gt_visible), 1e-9);
  }
}

TEST(AverageJaccard, QueryFrameIsExcluded) {
  Rng rng(7);
  TrackEval e = random_tracks(rng, 3, 8, 0.0);
  e.pred_visible = e.gt_visible;
  for (std::size_t i = 0; i < 3; ++i) {
    e.pred_xy.at({i, 0, 0}) += 100.0;
    e.pred_visible.at({i, 0}) = 1.0 - e.gt_visible.at({i, 0});
  }
  EXPECT_EQ(average_jaccard(e), 1.0);
}

TEST(AverageJaccard, ImprovingAPredictionNeverLowersTheScore) {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    TrackEval e = random_tracks(rng, 4, 10, 10.0);
    // Move one gt-visible, predicted-visible point onto the truth.
    const std::size_t i = rng.index(4), t = 1 + rng.index(9);
    e.gt_visible.at({i, t}) = 1.0;
    e.pred_visible.at({i, t}) = 1.0;
    const double mid = average_jaccard(e);
    e.pred_xy.at({i, t, 0}) = e.gt_xy.at({i, t, 0});
    e.pred_xy.at({i, t, 1}) = e.gt_xy.at({i, t, 1});
    EXPECT_GE(average_jaccard(e), mid - 1e-15);
  }
}

TEST(AverageJaccard, ThresholdsAreStrict) {
  TrackEval e{nc::Array({1, 2, 2}, 0.0), nc::Array({1, 2}, 1.0), nc::Array({1, 2, 2}, 0.0), nc::Array({1, 2}, 1.0)};
  e.pred_xy.at({0, 1, 0}) = 4.0;
  EXPECT_EQ(jaccard_at(e, 4.0), 0.0);
  EXPECT_EQ(jaccard_at(e, 8.0), 1.0);
  EXPECT_NEAR(average_jaccard(e), 2.0 / 5.0, 1e-15);
}

TEST(AverageJaccard, EmptyDenominatorCountsAsOne) {
  TrackEval e{nc::Array({1, 3, 2}, 0.0), nc::Array({1, 3}, 0.0), nc::Array({1, 3, 2}, 0.0), nc::Array({1, 3}, 0.0)};
  EXPECT_EQ(average_jaccard(e), 1.0);
  EXPECT_THROW(average_jaccard(TrackEval{}), nc::ShapeError);
}

TEST(AverageJaccard, VisibilityDecisionAtHalf) {
  EXPECT_FALSE(predicted_visible(0.0));
  EXPECT_TRUE(predicted_visible(1e-9));
  EXPECT_FALSE(predicted_visible(-3.0));
}

TEST(AbsRel, ExactAndDoubledPredictions) {
  Rng rng(9);
  const nc::Array gt = rng.uniform_array({4, 8, 8}, 0.5, 9.0);
  EXPECT_EQ(absrel(gt, gt), 0.0);
  nc::Array doubled = gt;
  for (auto& v : doubled.data()) v *= 2.0;
  EXPECT_NEAR(absrel(doubled, gt), 1.0, 1e-5);
}

TEST(AbsRel, MatchesLoopOracleWithMaskedPixels) {
  Rng rng(10);
  for (int i = 0; i < 200; ++i) {
    nc::Array gt = rng.uniform_array({3, 5, 5}, 0.0, 12.0);
    gt[0] = 0.0005;
    gt[1] = 10.0;
    const nc::Array pred = rng.uniform_array({3, 5, 5}, 0.1, 10.0);
    EXPECT_NEAR(absrel(pred, gt), oracle::absrel(pred, gt), 1e-9);
  }
}

TEST(AbsRel, NoValidPixelsThrows) {
  EXPECT_THROW(absrel(nc::Array({2, 2}, 1.0), nc::Array({2, 2}, 20.0)), std::invalid_argument);
  EXPECT_THROW(absrel(nc::Array({2, 2}, 1.0), nc::Array({2, 3}, 1.0)), nc::ShapeError);
}

TEST(BoxIou, ClosedForms) {
  const double a[4] = {0, 2, 0, 1};
  const double b[4] = {1, 3, 0, 1};
  EXPECT_NEAR(box_iou(a, b), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(box_iou(a, a), 1.0);
  const double far[4] = {5, 6, 5, 6};
  EXPECT_EQ(box_iou(a, far), 0.0);
  const double outer[4] = {0, 4, 0, 4};
  const double inner[4] = {1, 2, 1, 3};
  EXPECT_NEAR(box_iou(outer, inner), 2.0 / 16.0, 1e-15);
}

TEST(BoxIou, AgreesWithRasterisation) {
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    double a[4], b[4];
    for (double* box : {a, b}) {
      const double x0 = rng.uniform(0.0, 0.7), y0 = rng.uniform(0.0, 0.7);
      box[0] = x0;
      box[1] = x0 + rng.uniform(0.1, 0.3);
      box[2] = y0;
      box[3] = y0 + rng.uniform(0.1, 0.3);
    }
    const double iou = box_iou(a, b);
    EXPECT_GE(iou, 0.0);
    EXPECT_LE(iou, 1.0);
    EXPECT_NEAR(iou, oracle::raster_iou(a, b, 0.0, 1.0, 512), 0.01);
    EXPECT_NEAR(iou, box_iou(b, a), 1e-15);
  }
}

TEST(MeanIou, SkipsFirstFrameDegenerateAndInvalid) {
  nc::Array gt({1, 4, 4}), pred({1, 4, 4});
  for (std::size_t t = 0; t < 4; ++t) {
    const double g[4] = {0, 2, 0, 1};
    const double p[4] = {1, 3, 0, 1};
    for (std::size_t c = 0; c < 4; ++c) {
      gt.at({0, t, c}) = g[c];
      pred.at({0, t, c}) = p[c];
    }
  }
  pred.at({0, 0, 0}) = 50.0;  // frame 0 is ignored
  gt.at({0, 2, 1}) = 0.0;     // zero width
  const auto r = mean_iou(pred, gt);
  EXPECT_EQ(r.counted, 2u);
  EXPECT_EQ(r.degenerate, 1u);
  EXPECT_NEAR(r.mean, 1.0 / 3.0, 1e-15);

  nc::Array valid({1, 4}, 1.0);
  valid.at({0, 3}) = 0.0;
  EXPECT_EQ(mean_iou(pred, gt, valid).counted, 1u);
}

TEST(Top1, OneHotAndInvertedLogits) {
  const std::size_t n = 20, k = 8;
  Rng rng(12);
  std::vector<std::size_t> labels(n);
  nc::Array onehot({n, k}, 0.0), inverted({n, k}, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = rng.index(k);
    onehot.at({i, labels[i]}) = 1.0;
    inverted.at({i, labels[i]}) = 0.0;
  }
  EXPECT_EQ(top1(onehot, labels), 1.0);
  EXPECT_EQ(top1(inverted, labels), 0.0);
}

TEST(Top1, TiesGoToLowestIndex) {
  const nc::Array logits({1, 4}, 2.0);
  EXPECT_EQ(argmax_row(logits, 0), 0u);
  EXPECT_EQ(top1(logits, {0}), 1.0);
  EXPECT_EQ(top1(logits, {3}), 0.0);
}

TEST(Top1, MatchesCountingOracle) {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.index(30), k = 2 + rng.index(8);
    nc::Array logits({n, k});
    // Coarse values make ties common.
    for (auto& v : logits.data()) v = static_cast<double>(rng.index(3));
    std::vector<std::size_t> labels(n);
    for (auto& l : labels) l = rng.index(k);
    EXPECT_NEAR(top1(logits, labels), oracle::top1(logits, labels), 1e-12);
  }
}

nc::Array random_point_pred(Rng& rng, std::size_t n, std::size_t t, const nc::Array& gt_xy, double spread) {
  nc::Array p({n, t, 4});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < t; ++f) {
      p.at({i, f, 0}) = gt_xy.at({i, f, 0}) + rng.normal(0.0, spread);
      p.at({i, f, 1}) = gt_xy.at({i, f, 1}) + rng.normal(0.0, spread);
      p.at({i, f, 2}) = rng.normal(0.0, 3.0);
      p.at({i, f, 3}) = rng.normal(0.0, 3.0);
    }
  }
  return p;
}

TEST(PointLoss, MatchesScalarOracle) {
  Rng rng(14);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.index(5), t = 1 + rng.index(16);
    const nc::Array gt = rng.uniform_array({n, t, 2}, 0.0, 1.0);
    nc::Array vis({n, t});
    for (auto& v : vis.data()) v = rng.coin(0.7) ? 1.0 : 0.0;
    // Spread mixes errors below 1 px, between 1 and 8 px, and above 8 px.
    const nc::Array pred = random_point_pred(rng, n, t, gt, trial % 2 ? 0.002 : 0.03);
    EXPECT_NEAR(point_track_loss(nc::constant(pred), gt, vis).value().item(), oracle::point_loss(pred, gt, vis),
                1e-9);
  }
}

TEST(PointLoss, QuadraticRegimeClosedForm) {
  // One visible point, error (0.5, 0) px, logits 0: Huber = 0.125,
  // both BCE terms = log 2 (uncertainty target 0).
  nc::Array gt({1, 1, 2}, 0.5), vis({1, 1}, 1.0), pred({1, 1, 4}, 0.0);
  pred.at({0, 0, 0}) = 0.5 + 0.5 / 224.0;
  pred.at({0, 0, 1}) = 0.5;
  const double expected = 100.0 * 0.5 * (0.25 + 1e-12) + 0.1 * std::log(2.0) + 0.1 * std::log(2.0);
  EXPECT_NEAR(point_track_loss(nc::constant(pred), gt, vis).value().item(), expected, 1e-12);
}

TEST(PointLoss, ConfidentPerfectPredictionIsNearZero) {
  nc::Array gt({2, 3, 2}, 0.25), vis({2, 3}, 1.0), pred({2, 3, 4});
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t t = 0; t < 3; ++t) {
      pred.at({i, t, 0}) = 0.25;
      pred.at({i, t, 1}) = 0.25;
      pred.at({i, t, 2}) = 40.0;
      pred.at({i, t, 3}) = -40.0;
    }
  }
  EXPECT_LT(point_track_loss(nc::constant(pred), gt, vis).value().item(), 1e-9);
}

TEST(PointLoss, ShapeMismatchThrows) {
  EXPECT_THROW(point_track_loss(nc::constant(nc::Array({1, 2, 3})), nc::Array({1, 2, 2}), nc::Array({1, 2})),
               nc::ShapeError);
}

TEST(PoseLoss, IdentityAndUnitOffset) {
  const auto id = SE3Pose{}.flatten();
  nc::Array a({12}), b({12});
  for (std::size_t i = 0; i < 12; ++i) a[i] = b[i] = id[i];
  EXPECT_EQ(pose_loss(nc::constant(a), b).value().item(), 0.0);
  b[3] += 1.0;
  EXPECT_EQ(pose_loss(nc::constant(a), b).value().item(), 1.0);
}

TEST(DepthLoss, MasksOutOfRangeTargets) {
  nc::Array pred({1, 2, 2}, 1.0), gt({1, 2, 2}, 2.0);
  gt[3] = 50.0;
  EXPECT_NEAR(depth_loss(nc::constant(pred), gt).value().item(), 1.0, 1e-15);
}

TEST(BoxLoss, MaskedMeanSquaredError) {
  nc::Array pred({1, 2, 4}, 0.0), gt({1, 2, 4}, 0.5), valid({1, 2}, 1.0);
  gt.at({0, 1, 0}) = 10.0;
  valid.at({0, 1}) = 0.0;
  EXPECT_NEAR(box_loss(nc::constant(pred), gt, valid).value().item(), 0.25, 1e-15);
}

TEST(ClassLoss, CrossEntropyOfUniformLogits) {
  const nc::Array logits({8}, 0.3);
  const auto loss = class_loss(nc::constant(logits), 5);
  EXPECT_TRUE(loss.shape().empty());
  EXPECT_NEAR(loss.value().item(), std::log(8.0), 1e-12);
  EXPECT_THROW(class_loss(nc::constant(logits), 8), std::invalid_argument);
}

TEST(Csv, RoundTripPreservesValues) {
  const auto dir = std::filesystem::temp_directory_path() / "mae4d_csv_test";
  std::filesystem::remove_all(dir);
  std::vector<MetricRow> rows{{"pose", "epe", 0.1 + 0.2, 3, 0xabcdef0123456789ULL},
                              {"class", "top1", 1.0 / 3.0, 0, 1}};
  write_csv(dir / "m.csv", metric_table(rows));
  const CsvTable t = read_csv(dir / "m.csv");
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.header, (std::vector<std::string>{"task", "metric", "value", "seed", "config_hash"}));
  EXPECT_EQ(t.number(0, "value"), 0.1 + 0.2);
  EXPECT_EQ(t.number(1, "value"), 1.0 / 3.0);
  EXPECT_EQ(t.rows[0][t.column("config_hash")], "abcdef0123456789");
  EXPECT_FALSE(std::filesystem::exists(dir / "m.csv.tmp"));
  EXPECT_THROW(t.column("missing"), std::invalid_argument);
  std::filesystem::remove_all(dir);
}

}  // namespace
