// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "mae4d/numcore/ops.hpp"
#include "mae4d/readout/fourier.hpp"
#include "mae4d/readout/heads.hpp"
#include "mae4d/readout/procrustes.hpp"
#include "mae4d/readout/readout.hpp"
#include "support/oracles.hpp"

namespace {

using namespace mae4d::readout;
using mae4d::numcore::Array;
using mae4d::numcore::Rng;
using mae4d::numcore::Var;
namespace nc = mae4d::numcore;
namespace sm = mae4d::simplemae;

Mat3 random_matrix(Rng& rng) {
  Mat3 m{};
  for (auto& row : m)
    for (double& v : row) v = rng.normal();
  return m;
}

Mat3 scaled(const Mat3& m, double s) {
  Mat3 r = m;
  for (auto& row : r)
    for (double& v : row) v *= s;
  return r;
}

void expect_rotation(const Mat3& R) {
  SE3Pose p;
  p.R = R;
  EXPECT_LT(p.orthogonality_error(), 1e-6);
  EXPECT_LT(p.determinant_error(), 1e-6);
}

TEST(Procrustes, RotationIsFixedPoint) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const Mat3 R = mae4d::oracle::random_rotation(rng);
    const auto out = procrustes_so3(R);
    EXPECT_LT(frobenius_distance(out.R, R), 1e-9);
    EXPECT_FALSE(out.degenerate);
  }
}

TEST(Procrustes, ScaledIdentityGivesIdentity) {
  const Mat3 two{{{2, 0, 0}, {0, 2, 0}, {0, 0, 2}}};
  const auto out = procrustes_so3(two);
  EXPECT_LT(frobenius_distance(out.R, SE3Pose{}.R), 1e-12);
}

TEST(Procrustes, ScaledRotationRecoversRotation) {
  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    const Mat3 R = mae4d::oracle::random_rotation(rng);
    EXPECT_LT(frobenius_distance(procrustes_so3(scaled(R, 0.1 + 5 * rng.uniform())).R, R), 1e-9);
  }
}

TEST(Procrustes, OutputIsRotationAndIdempotent) {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const Mat3 M = random_matrix(rng);
    const Mat3 R = procrustes_so3(M).R;
    expect_rotation(R);
    EXPECT_LT(frobenius_distance(procrustes_so3(R).R, R), 1e-9);
  }
}

TEST(Procrustes, NoSampledRotationIsCloser) {
  Rng rng(4);
  std::vector<Mat3> samples;
  for (int i = 0; i < 100000; ++i) samples.push_back(mae4d::oracle::random_rotation(rng));
  for (int m = 0; m < 50; ++m) {
    const Mat3 M = random_matrix(rng);
    const double best = frobenius_distance(procrustes_so3(M).R, M);
    double sampled = INFINITY;
    for (const auto& R : samples) sampled = std::min(sampled, frobenius_distance(R, M));
    EXPECT_LE(best, sampled + 1e-12);
  }
}

TEST(Procrustes, ReflectionInputGivesProperRotation) {
  const Mat3 flip{{{1, 0, 0}, {0, 1, 0}, {0, 0, -1}}};
  const auto out = procrustes_so3(flip);
  expect_rotation(out.R);
  EXPECT_TRUE(out.degenerate);
}

TEST(Procrustes, DegenerateInputsAreFlagged) {
  const Mat3 zero{};
  const Mat3 rank1{{{1, 0, 0}, {0, 0, 0}, {0, 0, 0}}};
  for (const Mat3& m : {zero, rank1}) {
    const auto out = procrustes_so3(m);
    EXPECT_TRUE(out.degenerate);
    expect_rotation(out.R);
  }
}

TEST(Procrustes, NonFiniteInputThrows) {
  Mat3 m{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  m[1][2] = NAN;
  EXPECT_THROW(procrustes_so3(m), std::invalid_argument);
  m[1][2] = INFINITY;
  EXPECT_THROW(procrustes_so3(m), std::invalid_argument);
}

TEST(Se3, ComposeInverseAndFlatten) {
  Rng rng(5);
  SE3Pose a;
  a.R = mae4d::oracle::random_rotation(rng);
  a.t = {rng.normal(), rng.normal(), rng.normal()};
  const SE3Pose id = compose(a, inverse(a));
  EXPECT_LT(frobenius_distance(id.R, SE3Pose{}.R), 1e-12);
  for (double v : id.t) EXPECT_NEAR(v, 0.0, 1e-12);
  const SE3Pose b = SE3Pose::unflatten(a.flatten());
  EXPECT_EQ(b.R, a.R);
  EXPECT_EQ(b.t, a.t);
  EXPECT_EQ(a.flatten()[3], a.t[0]);
  EXPECT_EQ(a.flatten()[1], a.R[0][1]);
}

TEST(Fourier, OriginEncodesAsSineZeroCosineOne) {
  const Array f = fourier_features(Array({1, 2}, 0.0));
  ASSERT_EQ(f.shape(), (nc::Shape{1, 64}));
  for (std::size_t d = 0; d < 2; ++d) {
    for (std::size_t k = 0; k < kFourierBases; ++k) {
      EXPECT_EQ(f.at({0, d * 32 + k}), 0.0);
      EXPECT_EQ(f.at({0, d * 32 + 16 + k}), 1.0);
    }
  }
}

TEST(Fourier, MatchesDirectFormula) {
  Rng rng(6);
  const Array c = rng.uniform_array({20, 4}, 0.0, 1.0);
  const Array f = fourier_features(c);
  ASSERT_EQ(f.shape(), (nc::Shape{20, 128}));
  for (std::size_t i = 0; i < 20; ++i) {
    for (std::size_t d = 0; d < 4; ++d) {
      for (std::size_t k = 0; k < 16; ++k) {
        const double w = std::ldexp(std::numbers::pi, static_cast<int>(k));
        EXPECT_NEAR(f.at({i, d * 32 + k}), std::sin(w * c.at({i, d})), 1e-9);
        EXPECT_NEAR(f.at({i, d * 32 + 16 + k}), std::cos(w * c.at({i, d})), 1e-9);
      }
    }
  }
}

TEST(Fourier, GridPointsHaveDistinctEncodings) {
  Array c({32 * 32, 2});
  for (std::size_t y = 0; y < 32; ++y) {
    for (std::size_t x = 0; x < 32; ++x) {
      c.at({y * 32 + x, 0}) = x / 31.0;
      c.at({y * 32 + x, 1}) = y / 31.0;
    }
  }
  const Array f = fourier_features(c);
  for (std::size_t i = 0; i < 1024; ++i) {
    for (std::size_t j = i + 1; j < 1024; ++j) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < 64; ++k) d2 += std::pow(f.at({i, k}) - f.at({j, k}), 2);
      ASSERT_GT(d2, 1e-6) << i << " vs " << j;
    }
  }
}

TEST(Fourier, OutOfRangeThrows) {
  EXPECT_THROW(fourier_features(Array({1, 2}, 1.5)), std::invalid_argument);
  EXPECT_THROW(fourier_features(Array({1, 2}, -0.01)), std::invalid_argument);
  EXPECT_THROW(fourier_features(Array({2}, 0.5)), nc::ShapeError);
}

TEST(ReadoutParams, TableCountsMatchPublishedSizes) {
  const std::map<std::string, std::size_t> expected{
      {"ssv2", 7041966},    {"k700", 12281532},  {"re10k", 1650444},
      {"scannet", 18116736}, {"waymo", 12482624}, {"perception", 12396552},
  };
  for (const auto& name : table_readout_names()) {
    EXPECT_EQ(count_readout_parameters(table_readout(name)), expected.at(name)) << name;
  }
  EXPECT_EQ(table_readout_names().size(), expected.size());
}

TEST(ReadoutParams, QueryProjectionOnlyWhenWidthsDiffer) {
  ReadoutConfig cfg;
  cfg.channels = 16;
  cfg.qkv_size = 32;
  auto has = [](const ReadoutConfig& c, const std::string& n) {
    for (const auto& s : readout_param_specs(c))
      if (s.name == n) return true;
    return false;
  };
  EXPECT_FALSE(has(cfg, "attn.q.w"));
  cfg.query_kind = QueryKind::kFourierPoint;
  cfg.query_mlp_size = 48;
  EXPECT_TRUE(has(cfg, "attn.q.w"));
  EXPECT_TRUE(has(cfg, "attn.out.w"));
}

TEST(ReadoutConfig, ValidationErrors) {
  ReadoutConfig cfg;
  cfg.heads = 3;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.num_queries = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  EXPECT_THROW(table_readout("imagenet"), std::invalid_argument);
  EXPECT_THROW(query_kind_from_string("grid"), std::invalid_argument);
  EXPECT_EQ(query_kind_from_string(to_string(QueryKind::kFourierBox)), QueryKind::kFourierBox);
}

ReadoutConfig small_box_readout() {
  ReadoutConfig cfg;
  cfg.channels = 8;
  cfg.frames = 4;
  cfg.qkv_size = 16;
  cfg.heads = 2;
  cfg.query_kind = QueryKind::kFourierBox;
  cfg.num_queries = 5;
  cfg.fourier_bases = 4;
  cfg.query_mlp_size = 12;
  cfg.output_size = 3;
  return cfg;
}

TEST(Readout, ZeroFinalLayerGivesZeroOutput) {
  ReadoutConfig cfg = small_box_readout();
  auto params = sm::init_params(readout_param_specs(cfg), 1);
  for (auto& v : params.at("out.w").data()) v = 0.0;
  Rng rng(2);
  const Array coords = rng.uniform_array({5, 4}, 0.0, 1.0);
  const Array feats = rng.normal_array({4, 6, 8}, 1.0);
  const sm::Binder b(params, false);
  const Var out = readout_forward(b, cfg, nc::constant(feats), readout_queries(b, cfg, coords));
  ASSERT_EQ(out.shape(), (nc::Shape{5, 3}));
  for (double v : out.value().data()) EXPECT_EQ(v, 0.0);
}

TEST(Readout, QueryPermutationPermutesOutputs) {
  ReadoutConfig cfg = small_box_readout();
  auto params = sm::init_params(readout_param_specs(cfg), 3);
  for (auto& [name, a] : params)
    for (auto& v : a.data()) v += 0.05;
  Rng rng(4);
  const Array coords = rng.uniform_array({5, 4}, 0.0, 1.0);
  const Array feats = rng.normal_array({4, 6, 8}, 1.0);
  const auto perm = rng.permutation(5);
  Array shuffled({5, 4});
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 4; ++j) shuffled.at({i, j}) = coords.at({perm[i], j});
  const sm::Binder b(params, false);
  const Array a = readout_forward(b, cfg, nc::constant(feats), readout_queries(b, cfg, coords)).value();
  const Array s = readout_forward(b, cfg, nc::constant(feats), readout_queries(b, cfg, shuffled)).value();
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(s.at({i, j}), a.at({perm[i], j}), 1e-12);
}

TEST(Readout, FeatureShapeMismatchThrows) {
  ReadoutConfig cfg = small_box_readout();
  const auto params = sm::init_params(readout_param_specs(cfg), 1);
  const sm::Binder b(params, false);
  const Var q = readout_queries(b, cfg, Array({5, 4}, 0.5));
  EXPECT_THROW(readout_forward(b, cfg, nc::constant(Array({3, 6, 8})), q), nc::ShapeError);
  EXPECT_THROW(readout_forward(b, cfg, nc::constant(Array({4, 6, 7})), q), nc::ShapeError);
  EXPECT_THROW(readout_queries(b, cfg, Array({5, 2}, 0.5)), nc::ShapeError);
}

TEST(Readout, ReplicasRepeatEachQuery) {
  ReadoutConfig cfg = small_box_readout();
  cfg.query_kind = QueryKind::kFourierPoint;
  cfg.query_replicas = 3;
  cfg.num_queries = 2;
  const auto params = sm::init_params(readout_param_specs(cfg), 1);
  const sm::Binder b(params, false);
  const Var q = readout_queries(b, cfg, Array({2, 2}, 0.25));
  EXPECT_EQ(q.shape(), (nc::Shape{6, cfg.query_dim()}));
}

/// Directional finite difference of a scalar head loss against every
/// trainable tensor at once.
template <typename LossFn>
double head_gradient_error(const sm::ParamSet& params, LossFn loss_fn, std::uint64_t seed) {
  const sm::Binder live(params, true);
  const Var loss = loss_fn(live);
  nc::backward(loss);
  const sm::ParamSet g = live.grads();
  Rng rng(seed);
  sm::ParamSet dir;
  double analytic = 0.0;
  for (const auto& [name, a] : params) {
    Array d = rng.normal_array(a.shape(), 1.0);
    for (std::size_t i = 0; i < a.size(); ++i) analytic += g.at(name)[i] * d[i];
    dir.set(name, std::move(d));
  }
  auto at = [&](double h) {
    sm::ParamSet p = params;
    for (auto& [name, a] : p)
      for (std::size_t i = 0; i < a.size(); ++i) a[i] += h * dir.at(name)[i];
    return loss_fn(sm::Binder(p, false)).value().item();
  };
  const double step = 1e-5;
  const double fd = (at(step) - at(-step)) / (2 * step);
  return std::abs(fd - analytic) / std::max({std::abs(fd), std::abs(analytic), 1e-300});
}

const mae4d::simplemae::Extent3 kClip{16, 32, 32};

HeadSizes tiny_sizes() {
  HeadSizes s;
  s.qkv_size = 16;
  s.heads = 2;
  s.query_mlp_size = 16;
  s.max_tracks = 6;
  return s;
}

Array random_features(std::size_t k, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  return rng.normal_array({kReadoutFrames, k, c}, 1.0);
}

TEST(Heads, PoseStartsAtIdentity) {
  const auto cfg = make_head_config(Task::kPose, 6, 8, kClip, tiny_sizes());
  auto params = init_head(cfg, 1);
  for (auto& v : params.at("out.w").data()) v = 0.0;
  const Array raw = pose_forward(sm::Binder(params, false), cfg, nc::constant(random_features(6, 8, 2))).value();
  const SE3Pose p = pose_from_outputs(raw);
  EXPECT_LT(frobenius_distance(p.R, SE3Pose{}.R), 1e-12);
  for (double v : p.t) EXPECT_EQ(v, 0.0);
}

TEST(Heads, PoseOutputsAreRigid) {
  const auto cfg = make_head_config(Task::kPose, 6, 8, kClip, tiny_sizes());
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto params = init_head(cfg, seed);
    for (auto& v : params.at("out.w").data()) v *= 50.0;
    const Array raw = pose_forward(sm::Binder(params, false), cfg, nc::constant(random_features(6, 8, seed))).value();
    ASSERT_EQ(raw.shape(), (nc::Shape{12}));
    const SE3Pose p = pose_from_outputs(raw);
    EXPECT_LT(p.orthogonality_error(), 1e-6);
    EXPECT_LT(p.determinant_error(), 1e-6);
  }
}

TEST(Heads, PointTracksCoverAllFramesInsideTheImage) {
  const auto cfg = make_head_config(Task::kPoint, 6, 8, kClip, tiny_sizes());
  const auto params = init_head(cfg, 1);
  Rng rng(3);
  const Array q = rng.uniform_array({5, 2}, 0.0, 1.0);
  const Array out = point_forward(sm::Binder(params, false), cfg, nc::constant(random_features(6, 8, 4)), q).value();
  ASSERT_EQ(out.shape(), (nc::Shape{5, 16, 4}));
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t t = 0; t < 16; ++t) {
      for (std::size_t c = 0; c < 2; ++c) {
        EXPECT_GT(out.at({i, t, c}), 0.0);
        EXPECT_LT(out.at({i, t, c}), 1.0);
      }
    }
  }
  EXPECT_THROW(point_forward(sm::Binder(params, false), cfg, nc::constant(random_features(6, 8, 4)), Array({7, 2}, 0.5)),
               std::invalid_argument);
}

TEST(Heads, BoxesPerFrameAndCapacity) {
  const auto cfg = make_head_config(Task::kBox, 6, 8, kClip, tiny_sizes());
  const auto params = init_head(cfg, 1);
  const sm::Binder b(params, false);
  const Var f = nc::constant(random_features(6, 8, 5));
  Array boxes({3, 4});
  for (std::size_t i = 0; i < 3; ++i) {
    boxes.at({i, 0}) = 0.1;
    boxes.at({i, 1}) = 0.4 + 0.1 * i;
    boxes.at({i, 2}) = 0.2;
    boxes.at({i, 3}) = 0.6;
  }
  EXPECT_EQ(box_forward(b, cfg, f, boxes).shape(), (nc::Shape{3, 16, 4}));
  EXPECT_EQ(box_forward(b, cfg, f, Array({25, 4}, 0.5)).shape(), (nc::Shape{25, 16, 4}));
  EXPECT_THROW(box_forward(b, cfg, f, Array({26, 4}, 0.5)), std::invalid_argument);
}

TEST(Heads, DepthIsPositiveAtFullResolution) {
  const auto cfg = make_head_config(Task::kDepth, 6, 8, kClip, tiny_sizes());
  const auto params = init_head(cfg, 1);
  const Array d = depth_forward(sm::Binder(params, false), cfg, nc::constant(random_features(6, 8, 6))).value();
  ASSERT_EQ(d.shape(), (nc::Shape{16, 32, 32}));
  for (double v : d.data()) EXPECT_GT(v, 0.0);
}

TEST(Heads, DepthPatchLayoutFollowsQueries) {
  // With a zero final weight the output is the per-channel bias, so each
  // pixel's value identifies its position within the depth patch.
  const auto cfg = make_head_config(Task::kDepth, 6, 8, kClip, tiny_sizes());
  auto params = init_head(cfg, 1);
  for (auto& v : params.at("out.w").data()) v = 0.0;
  Array& bias = params.at("out.b");
  for (std::size_t i = 0; i < bias.size(); ++i) bias[i] = static_cast<double>(i);
  const Array d = depth_forward(sm::Binder(params, false), cfg, nc::constant(random_features(6, 8, 6))).value();
  for (std::size_t t = 0; t < 16; ++t) {
    for (std::size_t y = 0; y < 32; ++y) {
      for (std::size_t x = 0; x < 32; ++x) {
        const double within = static_cast<double>(((t % 2) * 8 + y % 8) * 8 + x % 8);
        EXPECT_NEAR(d.at({t, y, x}), mae4d::oracle::softplus(within), 1e-12);
      }
    }
  }
}

TEST(Heads, ClassLogitsHaveOneEntryPerClass) {
  const auto cfg = make_head_config(Task::kClass, 6, 8, kClip, tiny_sizes());
  const auto params = init_head(cfg, 1);
  const Var logits = class_forward(sm::Binder(params, false), cfg, nc::constant(random_features(6, 8, 7)));
  EXPECT_EQ(logits.shape(), (nc::Shape{8}));
}

TEST(Heads, FeaturePositionEmbeddingIsPresent) {
  for (Task t : {Task::kPose, Task::kPoint, Task::kBox, Task::kDepth, Task::kClass}) {
    const auto cfg = make_head_config(t, 6, 8, kClip, tiny_sizes());
    const auto params = init_head(cfg, 1);
    ASSERT_TRUE(params.contains("feature_pos_embed")) << to_string(t);
    EXPECT_EQ(params.at("feature_pos_embed").shape(), (nc::Shape{16, 6, 8}));
    EXPECT_EQ(task_from_string(to_string(t)), t);
  }
  EXPECT_THROW(task_from_string("segmentation"), std::invalid_argument);
}

TEST(Heads, AnalyticGradientsMatchFiniteDifferences) {
  const Array feats = random_features(6, 8, 8);
  Rng rng(9);
  const Array q = rng.uniform_array({3, 2}, 0.0, 1.0);
  for (Task t : {Task::kPose, Task::kPoint, Task::kBox, Task::kClass}) {
    const auto cfg = make_head_config(t, 6, 8, kClip, tiny_sizes());
    auto params = init_head(cfg, 2);
    for (auto& [name, a] : params)
      for (auto& v : a.data()) v += rng.normal(0.0, 0.05);
    auto loss = [&](const sm::Binder& b) -> Var {
      const Var f = nc::constant(feats);
      switch (t) {
        case Task::kPose: return nc::sum(nc::square(pose_forward(b, cfg, f)));
        case Task::kPoint: return nc::sum(nc::square(point_forward(b, cfg, f, q)));
        case Task::kBox: return nc::sum(nc::square(box_forward(b, cfg, f, Array({2, 4}, 0.3))));
        default: return nc::sum(nc::square(class_forward(b, cfg, f)));
      }
    };
    EXPECT_LT(head_gradient_error(params, loss, 11), 1e-6) << to_string(t);
  }
}

}  // namespace
