// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "mae4d/cli/cli.hpp"
#include "mae4d/metrics/metrics.hpp"
#include "mae4d/simplemae/masking.hpp"
#include "mae4d/simplemae/model.hpp"
#include "mae4d/synthworld/io.hpp"
#include "mae4d/synthworld/render.hpp"

namespace {

namespace fs = std::filesystem;
namespace sm = mae4d::simplemae;
namespace sw = mae4d::synthworld;
using namespace mae4d::cli;
using mae4d::numcore::Array;

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mae4d_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "mae4d");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Outcome r;
  r.code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::trunc) << text;
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

TEST(ParamCount, SmallConfigTotalNear24M) {
  const Outcome r = run({"param-count", "--config", "S"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "model,encoder,total");
  const double total = std::stod(row.substr(row.rfind(',') + 1));
  EXPECT_NEAR(total / 24e6, 1.0, 0.05);
}

TEST(ParamCount, AcceptsAConfigFile) {
  const fs::path dir = scratch_dir("pc");
  write_text(dir / "c.json", R"({"model": {"name": "nano", "overrides": {"width": 32, "heads": 2}}})");
  const Outcome r = run({"param-count", "--config", (dir / "c.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  sm::ModelConfig mc = sm::named_config("nano");
  mc.width = 32;
  mc.heads = 2;
  EXPECT_NE(r.out.find("," + std::to_string(sm::count_parameters(mc).total) + "\n"), std::string::npos) << r.out;
}

TEST(GenData, SameSeedWritesIdenticalFiles) {
  const fs::path dir = scratch_dir("gen");
  for (const char* sub : {"a", "b"}) {
    const Outcome r = run({"gen-data", "--seed", "7", "--count", "4", "--output", (dir / sub).string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    ++files;
    EXPECT_EQ(slurp(e.path()), slurp(dir / "b" / e.path().filename())) << e.path();
  }
  EXPECT_EQ(files, 4u);
  const sw::Sample s = sw::load_sample(dir / "a" / "clip_000002.clip");
  EXPECT_EQ(s.clip.frames.shape(), (sw::generate_one(7, 2, {}).clip.frames.shape()));
}

TEST(GenData, FlagsOverrideTheConfigFile) {
  const fs::path dir = scratch_dir("override");
  write_text(dir / "c.json", R"({"seed": 3, "data": {"count": 2}})");
  ASSERT_EQ(run({"gen-data", "--config", (dir / "c.json").string(), "--output", (dir / "two").string()}).code, 0);
  ASSERT_EQ(run({"gen-data", "--config", (dir / "c.json").string(), "--count", "3", "--output",
                 (dir / "three").string()})
                .code,
            0);
  auto count = [](const fs::path& p) { return std::distance(fs::directory_iterator(p), fs::directory_iterator{}); };
  EXPECT_EQ(count(dir / "two"), 2);
  EXPECT_EQ(count(dir / "three"), 3);
}

TEST(GenData, RelativeOutputResolvesUnderTheOutputRoot) {
  const fs::path dir = scratch_dir("root");
  ::setenv(kOutputRootEnv, dir.c_str(), 1);
  const Outcome r = run({"gen-data", "--seed", "1", "--count", "1", "--output", "rel"});
  ::unsetenv(kOutputRootEnv);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "rel" / "clip_000000.clip"));
}

TEST(Metrics, IouOfTheClosedFormPair) {
  const fs::path dir = scratch_dir("iou");
  // Frame 1: [0,2]x[0,1] against [1,3]x[0,1], overlap 1 and union 3. The
  // frame-0 row is the query box and must not count.
  write_text(dir / "p.csv", "frame,xmin,xmax,ymin,ymax\n0,0,1,0,1\n1,0,2,0,1\n");
  write_text(dir / "g.csv", "frame,xmin,xmax,ymin,ymax\n0,5,6,5,6\n1,1,3,0,1\n");
  const Outcome r = run({"metrics", "--task", "iou", "--pred", (dir / "p.csv").string(), "--gt", (dir / "g.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "0.3333\n");
  EXPECT_NEAR(csv_metric("iou", dir / "p.csv", dir / "g.csv"), 1.0 / 3.0, 1e-15);
}

TEST(Metrics, OtherTasksMatchTheLibrary) {
  const fs::path dir = scratch_dir("metrics");
  write_text(dir / "dp.csv", "depth\n1.5\n2\n");
  write_text(dir / "dg.csv", "depth\n1\n2.5\n");
  EXPECT_NEAR(csv_metric("absrel", dir / "dp.csv", dir / "dg.csv"), (0.5 / 1.0 + 0.5 / 2.5) / 2.0, 1e-6);

  write_text(dir / "cp.csv", "a,b,c\n0,3,1\n2,2,0\n0,0,1\n");
  write_text(dir / "cg.csv", "label\n1\n1\n0\n");
  EXPECT_NEAR(csv_metric("top1", dir / "cp.csv", dir / "cg.csv"), 1.0 / 3.0, 1e-15);

  std::string pose = "p0,p1,p2,p3,p4,p5,p6,p7,p8,p9,p10,p11\n";
  write_text(dir / "ep.csv", pose + "1,0,0,0,0,1,0,0,0,0,1,0\n");
  write_text(dir / "eg.csv", pose + "1,0,0,3,0,1,0,0,0,0,1,4\n");
  EXPECT_NEAR(csv_metric("epe", dir / "ep.csv", dir / "eg.csv"), 5.0, 1e-12);

  // One track over three frames: frame 1 is 3 px off, frame 2 exact.
  write_text(dir / "tp.csv", "track,frame,x,y,visible\n0,0,1,1,1\n0,1,4,1,1\n0,2,5,5,1\n");
  write_text(dir / "tg.csv", "track,frame,x,y,visible\n0,0,1,1,1\n0,1,1,1,1\n0,2,5,5,1\n");
  // Thresholds 1 and 2: one TP, one FP, one FN (J = 1/3); 4, 8, 16: J = 1.
  EXPECT_NEAR(csv_metric("aj", dir / "tp.csv", dir / "tg.csv"), (2.0 / 3.0 + 3.0) / 5.0, 1e-12);

  const Outcome bad = run({"metrics", "--task", "nope", "--pred", (dir / "dp.csv").string(), "--gt",
                       (dir / "dg.csv").string()});
  EXPECT_NE(bad.code, 0);
  EXPECT_EQ(bad.err.rfind("mae4d: error: config:", 0), 0u) << bad.err;
}

TEST(Errors, UnknownFlagPrintsUsageAndFails) {
  const Outcome r = run({"gen-data", "--no-such-flag"});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("Usage:"), std::string::npos);
  EXPECT_NE(r.err.find("mae4d: error: usage:"), std::string::npos);
}

TEST(Errors, MissingCheckpointIsASingleLineError) {
  const fs::path dir = scratch_dir("missing");
  for (const char* sub : {"frozen-eval", "finetune", "layer-sweep", "dump-recon"}) {
    const Outcome r = run({sub, "--seed", "1", "--checkpoint", (dir / "absent.ckpt").string(), "--output", dir.string()});
    EXPECT_EQ(r.code, 1) << sub;
    EXPECT_EQ(line_count(r.err), 1u) << r.err;
    EXPECT_EQ(r.err.rfind("mae4d: error: checkpoint:", 0), 0u) << r.err;
  }
}

TEST(Errors, TrainingSubcommandsRequireASeed) {
  const fs::path dir = scratch_dir("seedless");
  for (const char* sub : {"pretrain", "gen-data"}) {
    const Outcome r = run({sub, "--output", dir.string()});
    EXPECT_EQ(r.code, 1) << sub;
    EXPECT_EQ(r.err.rfind("mae4d: error: config:", 0), 0u) << r.err;
  }
}

TEST(Errors, UnwritableOutputFails) {
  const fs::path dir = scratch_dir("unwritable");
  write_text(dir / "file", "x");
  const Outcome r = run({"gen-data", "--seed", "1", "--count", "1", "--output", (dir / "file" / "sub").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("mae4d: error: io:", 0), 0u) << r.err;
}

TEST(Config, CanonicalRoundTrip) {
  const RunConfig c = parse_config(R"({
    "subcommand": "finetune", "seed": 4,
    "model": {"name": "micro", "overrides": {"mask_ratio": 0.9}},
    "protocol": {"task": "box", "frozen_lrs": [0.01], "layer_percent": 50},
    "distill": {"teacher_blocks": [2, 3]},
    "data": {"generator": {"frames": 20}}
  })");
  const std::string text = c.canonical();
  const RunConfig back = parse_config(text);
  EXPECT_EQ(back.canonical(), text);
  EXPECT_EQ(back.hash(), c.hash());
  EXPECT_EQ(back.protocol.task, "box");
  EXPECT_EQ(back.data.generator.frames, 20u);
  EXPECT_DOUBLE_EQ(back.model_config().mask_ratio, 0.9);
  EXPECT_EQ(back.model_config().width, 128u);
  EXPECT_EQ(text.back(), '\n');
  // Defaults serialize too, so an empty file and its canonical form agree.
  EXPECT_EQ(parse_config(parse_config("{}").canonical()).canonical(), parse_config("{}").canonical());
}

TEST(Config, RejectsUnknownKeysAndBadOverrides) {
  EXPECT_THROW(parse_config(R"({"protocl": {}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"pretrain": {"stepz": 3}})"), ConfigError);
  EXPECT_THROW(parse_config("{not json"), ConfigError);
  EXPECT_THROW(parse_config(R"({"model": {"overrides": {"depthh": 3}}})").model_config(), ConfigError);
  EXPECT_THROW(parse_config(R"({"model": {"overrides": {"mask_ratio": 1.5}}})").model_config(), ConfigError);
  EXPECT_THROW(parse_config(R"({"model": "Q"})").model_config(), ConfigError);
  EXPECT_THROW(parse_config(R"({"distill": {"teacher_blocks": [1]}})").required_seed(), ConfigError);
  EXPECT_THROW(distill_config(parse_config(R"({"seed": 1, "distill": {"teacher_blocks": [1]}})"), 6), ConfigError);
  EXPECT_EQ(distill_config(parse_config(R"({"seed": 1})"), 56).teacher_blocks, (std::array<std::size_t, 2>{36, 51}));
}

TEST(Pretrain, SameInputsGiveIdenticalOutputs) {
  const fs::path dir = scratch_dir("pretrain");
  write_text(dir / "c.json", R"({"seed": 5, "data": {"clips": 4}, "pretrain": {"steps": 4, "batch": 2, "warmup_steps": 1}})");
  for (const char* sub : {"a", "b"}) {
    const Outcome r = run({"pretrain", "--config", (dir / "c.json").string(), "--output", (dir / sub).string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  for (const char* f : {"pretrain.ckpt", "pretrain_loss.csv"}) {
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  }
  EXPECT_EQ(line_count(slurp(dir / "a" / "pretrain_loss.csv")), 5u);
}

class DumpRecon : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = scratch_dir("dump");
    ckpt_.config = sm::named_config("nano");
    ckpt_.params = sm::init_model(ckpt_.config, 2);
    sm::save_checkpoint(dir_ / "m.ckpt", ckpt_);
  }
  fs::path dir_;
  sm::Checkpoint ckpt_;
};

TEST_F(DumpRecon, WritesThreeImagesPerFrame) {
  const Outcome r = run({"dump-recon", "--checkpoint", (dir_ / "m.ckpt").string(), "--frames", "0", "8", "15",
                     "--output", (dir_ / "out").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir_ / "out")) n += e.path().extension() == ".ppm";
  EXPECT_EQ(n, 9u);
  EXPECT_EQ(run({"dump-recon", "--checkpoint", (dir_ / "m.ckpt").string(), "--frames", "16", "--output",
                 (dir_ / "bad").string()})
                .code,
            1);
}

TEST_F(DumpRecon, MaskedImageZeroesExactlyTheMaskedPatches) {
  const auto& mc = ckpt_.config;
  const Array clip = sw::generate_one(3, 0, {}).clip.frames;
  const std::uint64_t mask_seed = 11;
  const auto files = dump_reconstructions(ckpt_, clip, {0, 1, 8}, mask_seed, dir_ / "blocks");
  const auto mask = sm::sample_mask(mc.token_count(), mc.mask_ratio, mask_seed);
  const auto grid = mc.token_grid();
  const auto& p = mc.input_patch;
  const std::size_t frames[] = {0, 1, 8};
  for (std::size_t k = 0; k < 3; ++k) {
    const std::size_t t = frames[k];
    const Array masked = sw::read_ppm(files.masked[k]);
    const Array original = sw::read_ppm(files.original[k]);
    std::size_t expected = 0;
    for (std::size_t m : mask.masked) expected += m / (grid.h * grid.w) == t / p.t;
    std::size_t zero_blocks = 0, zero_original = 0;
    for (std::size_t by = 0; by < grid.h; ++by) {
      for (std::size_t bx = 0; bx < grid.w; ++bx) {
        bool all_zero = true, orig_zero = true;
        for (std::size_t y = by * p.h; y < (by + 1) * p.h; ++y) {
          for (std::size_t x = bx * p.w; x < (bx + 1) * p.w; ++x) {
            for (std::size_t c = 0; c < 3; ++c) {
              all_zero = all_zero && masked.at({y, x, c}) == 0.0;
              orig_zero = orig_zero && original.at({y, x, c}) == 0.0;
              if (masked.at({y, x, c}) != 0.0) {
                EXPECT_EQ(masked.at({y, x, c}), original.at({y, x, c}));
              }
            }
          }
        }
        zero_blocks += all_zero;
        zero_original += orig_zero;
      }
    }
    ASSERT_EQ(zero_original, 0u);
    EXPECT_EQ(zero_blocks, expected) << "frame " << t;
    EXPECT_GT(expected, 0u);
  }
}

TEST_F(DumpRecon, ReconstructionPixelsAreClamped) {
  // An untrained model's linear decoder overshoots [0, 1]; the bytes on
  // disk must still be valid 8-bit values with both extremes reachable.
  sm::Checkpoint loud = ckpt_;
  Array& bias = loud.params.at("decoder.b");
  for (std::size_t i = 0; i < bias.size(); ++i) bias[i] = i % 2 == 0 ? -3.0 : 3.0;
  const Array clip = sw::generate_one(3, 0, {}).clip.frames;
  const auto files = dump_reconstructions(loud, clip, {0}, 1, dir_ / "clamp");
  const std::string bytes = slurp(files.recon[0]);
  const std::string header = "P6\n32 32\n255\n";
  ASSERT_EQ(bytes.substr(0, header.size()), header);
  ASSERT_EQ(bytes.size(), header.size() + 32 * 32 * 3);
  std::size_t lo = 0, hi = 0;
  for (std::size_t i = header.size(); i < bytes.size(); ++i) {
    lo += static_cast<unsigned char>(bytes[i]) == 0;
    hi += static_cast<unsigned char>(bytes[i]) == 255;
  }
  EXPECT_GT(lo, 0u);
  EXPECT_GT(hi, 0u);
}

}  // namespace
