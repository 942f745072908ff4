// SPDX-License-Identifier: Apache-2.0
#include "mae4d/cli/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <map>
#include <sstream>

#include "mae4d/harness/tasks.hpp"
#include "mae4d/metrics/csv.hpp"
#include "mae4d/metrics/metrics.hpp"
#include "mae4d/simplemae/masking.hpp"
#include "mae4d/simplemae/model.hpp"
#include "mae4d/synthworld/augment.hpp"
#include "mae4d/synthworld/io.hpp"
#include "mae4d/synthworld/render.hpp"

namespace mae4d::cli {

namespace fs = std::filesystem;
using metrics::CsvTable;
using numcore::Array;

namespace {

/// Failure with an explicit error kind for the single-line report.
class CliError : public std::runtime_error {
 public:
  CliError(std::string kind, const std::string& msg) : std::runtime_error(msg), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

// Values of every flag; only flags given on the command line are applied.
struct Flags {
  std::string config;
  std::uint64_t seed = 0;
  std::string model;
  std::string output;
  std::string checkpoint;
  std::string teacher;
  std::string data;
  std::string task;
  std::size_t steps = 0;
  std::size_t batch = 0;
  double lr = 0.0;
  std::size_t budget = 0;
  int layer_percent = 0;
  std::size_t clips = 0;
  std::size_t train_clips = 0;
  std::size_t val_clips = 0;
  std::size_t count = 0;
  std::size_t first_index = 0;
  std::vector<std::size_t> frames;
  std::size_t clip_index = 0;
  std::uint64_t mask_seed = 0;
  std::string pred;
  std::string gt;
};

bool given(const CLI::App* app, const std::string& name) {
  const CLI::Option* o = app->get_option_no_throw(name);
  return o != nullptr && o->count() > 0;
}

void add_run_options(CLI::App* sc, Flags& f) {
  sc->add_option("--config", f.config, "JSON run configuration");
  sc->add_option("--seed", f.seed, "Random seed");
  sc->add_option("--model", f.model, "Named model configuration");
  sc->add_option("--output", f.output, "Output directory");
}

RunConfig resolve(const std::string& name, const CLI::App* sc, const Flags& f) {
  RunConfig c = given(sc, "--config") ? load_config(f.config) : RunConfig{};
  c.subcommand = name;
  if (given(sc, "--seed")) c.seed = f.seed;
  if (given(sc, "--model")) c.model = f.model;
  if (given(sc, "--output")) c.paths.output = f.output;
  if (given(sc, "--checkpoint")) c.paths.checkpoint = f.checkpoint;
  if (given(sc, "--teacher")) c.paths.teacher = f.teacher;
  if (given(sc, "--data")) c.paths.data = f.data;
  if (given(sc, "--clips")) c.data.clips = f.clips;
  if (given(sc, "--train-clips")) c.data.train_clips = f.train_clips;
  if (given(sc, "--val-clips")) c.data.val_clips = f.val_clips;
  if (given(sc, "--count")) c.data.count = f.count;
  if (given(sc, "--first-index")) c.data.first_index = f.first_index;
  if (given(sc, "--task")) c.protocol.task = f.task;
  if (given(sc, "--budget")) c.protocol.budget = f.budget;
  if (given(sc, "--layer-percent")) c.protocol.layer_percent = f.layer_percent;
  if (given(sc, "--frames")) c.dump.frames = f.frames;
  if (given(sc, "--clip-index")) c.dump.clip_index = f.clip_index;
  if (given(sc, "--mask-seed")) c.dump.mask_seed = f.mask_seed;
  // --steps, --batch and --lr address the section the subcommand trains.
  if (name == "pretrain") {
    if (given(sc, "--steps")) c.pretrain.steps = f.steps;
    if (given(sc, "--batch")) c.pretrain.batch = f.batch;
    if (given(sc, "--lr")) c.pretrain.lr = f.lr;
  } else if (name == "distill") {
    if (given(sc, "--steps")) c.distill.steps = f.steps;
    if (given(sc, "--batch")) c.distill.batch = f.batch;
    if (given(sc, "--lr")) c.distill.lr = f.lr;
  } else if (given(sc, "--batch")) {
    c.protocol.batch = f.batch;
  }
  return c;
}

fs::path output_dir(const RunConfig& c) {
  const fs::path dir = resolve_output(c.paths.output);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw CliError("io", "cannot create output directory " + dir.string());
  return dir;
}

fs::path output_file(const RunConfig& c, const std::string& explicit_path, const std::string& fallback) {
  if (explicit_path.empty()) return output_dir(c) / fallback;
  const fs::path p = resolve_output(explicit_path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  return p;
}

simplemae::Checkpoint require_checkpoint(const std::string& path, const char* what) {
  if (path.empty()) throw CliError("checkpoint", std::string("no ") + what + " checkpoint given");
  if (!fs::is_regular_file(path)) throw CliError("checkpoint", std::string(what) + " checkpoint not found: " + path);
  try {
    return simplemae::load_checkpoint(path);
  } catch (const std::exception& e) {
    throw CliError("checkpoint", e.what());
  }
}

void write_config_record(const RunConfig& c, const fs::path& dir) {
  std::ofstream out(dir / (c.subcommand + "_config.json"), std::ios::trunc);
  out << c.canonical();
}

// Clip files of a gen-data directory, in name order.
std::vector<fs::path> clip_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw CliError("io", "data directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".clip") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw CliError("io", "no .clip files in " + dir.string());
  return files;
}

std::vector<Array> source_clips(const RunConfig& c, std::size_t count) {
  std::vector<Array> clips;
  if (!c.paths.data.empty()) {
    const auto files = clip_files(c.paths.data);
    for (std::size_t i = 0; i < files.size() && clips.size() < count; ++i) {
      clips.push_back(synthworld::load_sample(files[i]).clip.frames);
    }
    return clips;
  }
  for (auto& s : synthworld::generate(c.required_seed(), count, c.data.generator)) clips.push_back(s.clip.frames);
  return clips;
}

std::string clip_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "clip_%06zu.clip", index);
  return buf;
}

int run_pretrain(const RunConfig& c, std::ostream& out) {
  harness::PretrainConfig p = pretrain_config(c);
  const fs::path dir = output_dir(c);
  p.checkpoint = output_file(c, c.paths.checkpoint, "pretrain.ckpt");
  p.loss_csv = dir / "pretrain_loss.csv";
  write_config_record(c, dir);
  const auto clips = source_clips(c, c.data.clips);
  const auto r = harness::pretrain(p, clips);
  out << "pretrain: steps=" << r.curve.size() << " final_loss=" << metrics::format_number(r.curve.back().loss)
      << " checkpoint=" << p.checkpoint.string() << "\n";
  return 0;
}

harness::TaskData protocol_data(const RunConfig& c, const harness::ProtocolConfig& p, readout::Task task) {
  const std::size_t max_items = task == readout::Task::kBox ? readout::kMaxBoxes : p.head.max_tracks;
  return harness::make_task_data(task, p.seed, c.data.train_clips, c.data.val_clips, c.data.generator, max_items);
}

readout::Task parse_task(const std::string& s) {
  try {
    return readout::task_from_string(s);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

int run_sweep(const RunConfig& c, harness::Mode mode, std::ostream& out) {
  const auto backbone = require_checkpoint(c.paths.checkpoint, "backbone");
  harness::ProtocolConfig p = protocol_config(c);
  p.mode = mode;
  const readout::Task task = parse_task(c.protocol.task);
  const fs::path dir = output_dir(c);
  write_config_record(c, dir);
  const auto data = protocol_data(c, p, task);
  const auto r = mode == harness::Mode::kFinetune ? harness::finetune(backbone, data, p)
                                                  : harness::frozen_eval(backbone, data, p);
  const std::string stem = mode == harness::Mode::kFinetune ? "finetune_" : "frozen_eval_";
  const fs::path csv = dir / (stem + readout::to_string(task) + ".csv");
  metrics::write_csv(csv, harness::sweep_table(r));
  out << harness::to_string(mode) << ": task=" << readout::to_string(task)
      << " metric=" << harness::task_metric(task).name << " best=" << metrics::format_number(r.best_metric())
      << " lr=" << metrics::format_number(r.rows.at(r.best).lr) << " table=" << csv.string() << "\n";
  return 0;
}

int run_layer_sweep(const RunConfig& c, std::ostream& out) {
  const auto backbone = require_checkpoint(c.paths.checkpoint, "backbone");
  harness::ProtocolConfig p = protocol_config(c);
  const readout::Task task = parse_task(c.protocol.task);
  const fs::path dir = output_dir(c);
  write_config_record(c, dir);
  const auto rows = harness::layer_sweep(backbone, protocol_data(c, p, task), p);
  const fs::path csv = dir / ("layer_sweep_" + std::string(readout::to_string(task)) + ".csv");
  metrics::write_csv(csv, harness::layer_sweep_table(task, rows));
  out << "layer-sweep: task=" << readout::to_string(task) << " layers=" << rows.size() << " table=" << csv.string()
      << "\n";
  return 0;
}

int run_distill(const RunConfig& c, std::ostream& out) {
  const auto teacher = require_checkpoint(c.paths.teacher, "teacher");
  harness::DistillConfig d = distill_config(c, teacher.config.depth);
  const fs::path dir = output_dir(c);
  d.checkpoint = output_file(c, c.paths.checkpoint, "distill.ckpt");
  d.loss_csv = dir / "distill_loss.csv";
  write_config_record(c, dir);
  const auto r = harness::distill(teacher, d, source_clips(c, c.data.clips));
  out << "distill: steps=" << r.curve.size() << " final_loss=" << metrics::format_number(r.curve.back().loss)
      << " checkpoint=" << d.checkpoint.string() << "\n";
  return 0;
}

int run_gen_data(const RunConfig& c, std::ostream& out) {
  const std::uint64_t seed = c.required_seed();
  if (c.data.count == 0) throw ConfigError("gen-data: count must be positive");
  const fs::path dir = output_dir(c);
  const auto samples = synthworld::generate(seed, c.data.count, c.data.generator, c.data.first_index);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    synthworld::save_sample(dir / clip_name(c.data.first_index + i), samples[i]);
  }
  out << "gen-data: wrote " << samples.size() << " clips to " << dir.string() << "\n";
  return 0;
}

int run_dump(const RunConfig& c, std::ostream& out) {
  const auto ckpt = require_checkpoint(c.paths.checkpoint, "model");
  const auto& mc = ckpt.config;
  Array frames;
  if (!c.paths.data.empty()) {
    const auto files = clip_files(c.paths.data);
    if (c.dump.clip_index >= files.size()) throw ConfigError("dump.clip_index is past the last clip");
    frames = synthworld::load_sample(files[c.dump.clip_index]).clip.frames;
  } else {
    frames = synthworld::generate_one(c.seed.value_or(0), c.dump.clip_index, c.data.generator).clip.frames;
  }
  if (frames.dim(0) < mc.clip.t) throw ConfigError("dump-recon: clip has fewer frames than the model");
  const Array clip = synthworld::crop_frames(frames, synthworld::identity_window(frames.dim(1), frames.dim(2)),
                                             mc.clip.t, mc.clip.h, mc.clip.w);
  const auto files = dump_reconstructions(ckpt, clip, c.dump.frames, c.dump.mask_seed, output_dir(c));
  out << "dump-recon: wrote " << 3 * files.original.size() << " images to " << resolve_output(c.paths.output).string()
      << "\n";
  return 0;
}

int run_param_count(const std::string& spec, std::ostream& out) {
  simplemae::ModelConfig mc;
  if (fs::is_regular_file(spec)) {
    mc = load_config(spec).model_config();
  } else {
    RunConfig c;
    c.model = spec;
    mc = c.model_config();
  }
  const auto n = simplemae::count_parameters(mc);
  CsvTable t;
  t.header = {"model", "encoder", "total"};
  t.add_row({mc.name, std::to_string(n.encoder), std::to_string(n.total)});
  for (const auto& h : t.header) out << (&h == &t.header.front() ? "" : ",") << h;
  out << "\n";
  for (const auto& v : t.rows[0]) out << (&v == &t.rows[0].front() ? "" : ",") << v;
  out << "\n";
  return 0;
}

// ---- metrics on CSV files ----

bool has_column(const CsvTable& t, const std::string& name) {
  return std::find(t.header.begin(), t.header.end(), name) != t.header.end();
}

void require_rows(const CsvTable& pred, const CsvTable& gt) {
  if (pred.rows.size() != gt.rows.size()) {
    throw std::invalid_argument("pred has " + std::to_string(pred.rows.size()) + " rows, gt has " +
                                std::to_string(gt.rows.size()));
  }
  if (gt.rows.empty()) throw std::invalid_argument("no rows to score");
}

double iou_metric(const CsvTable& pred, const CsvTable& gt) {
  require_rows(pred, gt);
  const bool framed = has_column(gt, "frame");
  const char* cols[4] = {"xmin", "xmax", "ymin", "ymax"};
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t r = 0; r < gt.rows.size(); ++r) {
    if (framed && gt.number(r, "frame") == 0.0) continue;
    double a[4], b[4];
    for (int k = 0; k < 4; ++k) {
      a[k] = pred.number(r, cols[k]);
      b[k] = gt.number(r, cols[k]);
    }
    sum += metrics::box_iou(a, b);
    ++n;
  }
  if (n == 0) throw std::invalid_argument("iou: every row is a frame-0 row");
  return sum / static_cast<double>(n);
}

double epe_metric(const CsvTable& pred, const CsvTable& gt) {
  require_rows(pred, gt);
  double sum = 0.0;
  for (std::size_t r = 0; r < gt.rows.size(); ++r) {
    std::array<double, 12> a{}, b{};
    for (std::size_t k = 0; k < 12; ++k) {
      const std::string col = "p" + std::to_string(k);
      a[k] = pred.number(r, col);
      b[k] = gt.number(r, col);
    }
    sum += metrics::epe_pose(readout::SE3Pose::unflatten(a), readout::SE3Pose::unflatten(b));
  }
  return sum / static_cast<double>(gt.rows.size());
}

double absrel_metric(const CsvTable& pred, const CsvTable& gt) {
  require_rows(pred, gt);
  Array a({gt.rows.size()}), b({gt.rows.size()});
  for (std::size_t r = 0; r < gt.rows.size(); ++r) {
    a[r] = pred.number(r, "depth");
    b[r] = gt.number(r, "depth");
  }
  return metrics::absrel(a, b);
}

double aj_metric(const CsvTable& pred, const CsvTable& gt) {
  require_rows(pred, gt);
  std::size_t tracks = 0, frames = 0;
  for (std::size_t r = 0; r < gt.rows.size(); ++r) {
    tracks = std::max(tracks, static_cast<std::size_t>(gt.number(r, "track")) + 1);
    frames = std::max(frames, static_cast<std::size_t>(gt.number(r, "frame")) + 1);
  }
  if (gt.rows.size() != tracks * frames) throw std::invalid_argument("aj: expected one row per (track, frame)");
  metrics::TrackEval e{Array({tracks, frames, 2}), Array({tracks, frames}), Array({tracks, frames, 2}),
                       Array({tracks, frames})};
  auto fill = [&](const CsvTable& t, Array& xy, Array& vis) {
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const auto i = static_cast<std::size_t>(t.number(r, "track"));
      const auto k = static_cast<std::size_t>(t.number(r, "frame"));
      if (i >= tracks || k >= frames) throw std::invalid_argument("aj: pred row outside the gt tracks");
      xy.at({i, k, 0}) = t.number(r, "x");
      xy.at({i, k, 1}) = t.number(r, "y");
      vis.at({i, k}) = t.number(r, "visible") != 0.0 ? 1.0 : 0.0;
    }
  };
  fill(pred, e.pred_xy, e.pred_visible);
  fill(gt, e.gt_xy, e.gt_visible);
  return metrics::average_jaccard(e);
}

double top1_metric(const CsvTable& pred, const CsvTable& gt) {
  require_rows(pred, gt);
  const std::size_t k = pred.header.size();
  Array logits({pred.rows.size(), k});
  std::vector<std::size_t> labels;
  for (std::size_t r = 0; r < pred.rows.size(); ++r) {
    for (std::size_t j = 0; j < k; ++j) logits.at({r, j}) = pred.number(r, pred.header[j]);
    labels.push_back(static_cast<std::size_t>(gt.number(r, "label")));
  }
  return metrics::top1(logits, labels);
}

std::string format_metric(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << v;
  return s.str();
}

}  // namespace

double csv_metric(const std::string& task, const fs::path& pred_path, const fs::path& gt_path) {
  for (const auto& p : {pred_path, gt_path}) {
    if (!fs::is_regular_file(p)) throw CliError("io", "no such file " + p.string());
  }
  const CsvTable pred = metrics::read_csv(pred_path);
  const CsvTable gt = metrics::read_csv(gt_path);
  if (task == "iou") return iou_metric(pred, gt);
  if (task == "epe") return epe_metric(pred, gt);
  if (task == "absrel") return absrel_metric(pred, gt);
  if (task == "aj") return aj_metric(pred, gt);
  if (task == "top1") return top1_metric(pred, gt);
  throw ConfigError("metrics: unknown task '" + task + "' (iou, epe, absrel, aj, top1)");
}

DumpFiles dump_reconstructions(const simplemae::Checkpoint& ckpt, const Array& clip,
                               const std::vector<std::size_t>& frames, std::uint64_t mask_seed,
                               const fs::path& out_dir) {
  const auto& mc = ckpt.config;
  for (std::size_t t : frames) {
    if (t >= mc.clip.t) throw std::out_of_range("dump-recon: frame " + std::to_string(t) + " is past the clip");
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw CliError("io", "cannot create output directory " + out_dir.string());

  const auto mask = simplemae::sample_mask(mc.token_count(), mc.mask_ratio, mask_seed);
  const simplemae::Binder p(ckpt.params, false);
  const Array recon = simplemae::encode_and_decode(p, mc, clip, mask).reconstruction.value();

  Array tokens = simplemae::patchify(clip, mc.input_patch);
  const std::size_t width = tokens.dim(1);
  for (std::size_t m : mask.masked) std::fill_n(tokens.data().begin() + static_cast<std::ptrdiff_t>(m * width), width, 0.0);
  const Array masked = simplemae::unpatchify(tokens, mc.token_grid(), mc.input_patch);

  DumpFiles files;
  for (std::size_t t : frames) {
    const std::string stem = "frame_" + std::to_string(t) + "_";
    files.original.push_back(out_dir / (stem + "original.ppm"));
    files.masked.push_back(out_dir / (stem + "masked.ppm"));
    files.recon.push_back(out_dir / (stem + "recon.ppm"));
    synthworld::write_ppm(files.original.back(), synthworld::frame_of(clip, t));
    synthworld::write_ppm(files.masked.back(), synthworld::frame_of(masked, t));
    synthworld::write_ppm(files.recon.back(), synthworld::frame_of(recon, t));
  }
  return files;
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Video MAE pretraining and readout evaluation", "mae4d"};
  app.require_subcommand(1);
  Flags f;
  std::map<std::string, CLI::App*> subs;

  auto* pre = app.add_subcommand("pretrain", "Pretrain a model with masked autoencoding");
  add_run_options(pre, f);
  pre->add_option("--checkpoint", f.checkpoint, "Checkpoint to write (default <output>/pretrain.ckpt)");
  pre->add_option("--data", f.data, "Directory of clips from gen-data (default: generate)");
  pre->add_option("--clips", f.clips, "Number of source clips");
  pre->add_option("--steps", f.steps, "Optimiser steps");
  pre->add_option("--batch", f.batch, "Clips per step");
  pre->add_option("--lr", f.lr, "Peak learning rate");
  subs["pretrain"] = pre;

  for (const char* name : {"frozen-eval", "finetune", "layer-sweep"}) {
    auto* sc = app.add_subcommand(name, std::string("Readout protocol: ") + name);
    add_run_options(sc, f);
    sc->add_option("--checkpoint", f.checkpoint, "Backbone checkpoint");
    sc->add_option("--task", f.task, "pose, point, box, depth or class");
    sc->add_option("--budget", f.budget, "Training examples seen per cell");
    sc->add_option("--batch", f.batch, "Examples per step");
    sc->add_option("--layer-percent", f.layer_percent, "Readout depth in percent (0: task default)");
    sc->add_option("--train-clips", f.train_clips, "Training clips");
    sc->add_option("--val-clips", f.val_clips, "Validation clips");
    subs[name] = sc;
  }

  auto* dis = app.add_subcommand("distill", "Distil a teacher checkpoint into a smaller student");
  add_run_options(dis, f);
  dis->add_option("--teacher", f.teacher, "Teacher checkpoint");
  dis->add_option("--checkpoint", f.checkpoint, "Student checkpoint to write (default <output>/distill.ckpt)");
  dis->add_option("--data", f.data, "Directory of clips from gen-data (default: generate)");
  dis->add_option("--clips", f.clips, "Number of source clips");
  dis->add_option("--steps", f.steps, "Optimiser steps");
  dis->add_option("--batch", f.batch, "Clips per step");
  dis->add_option("--lr", f.lr, "Peak learning rate");
  subs["distill"] = dis;

  auto* gen = app.add_subcommand("gen-data", "Write synthetic clips with labels");
  add_run_options(gen, f);
  gen->add_option("--count", f.count, "Number of clips");
  gen->add_option("--first-index", f.first_index, "Stream index of the first clip");
  subs["gen-data"] = gen;

  auto* dump = app.add_subcommand("dump-recon", "Write original, masked and reconstructed frames as PPM");
  add_run_options(dump, f);
  dump->add_option("--checkpoint", f.checkpoint, "Model checkpoint");
  dump->add_option("--data", f.data, "Directory of clips from gen-data (default: generate)");
  dump->add_option("--frames", f.frames, "Frame indices to write");
  dump->add_option("--clip-index", f.clip_index, "Clip to reconstruct");
  dump->add_option("--mask-seed", f.mask_seed, "Seed of the mask");
  subs["dump-recon"] = dump;

  std::string metric_task, model_spec;
  auto* met = app.add_subcommand("metrics", "Score a prediction CSV against a ground-truth CSV");
  met->add_option("--task", metric_task, "iou, epe, absrel, aj or top1")->required();
  met->add_option("--pred", f.pred, "Prediction CSV")->required();
  met->add_option("--gt", f.gt, "Ground-truth CSV")->required();

  auto* pc = app.add_subcommand("param-count", "Print parameter counts of a model configuration");
  pc->add_option("--config", model_spec, "Model name or JSON run configuration")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << app.help();
    err << "mae4d: error: usage: " << one_line(e.what()) << "\n";
    return 2;
  }

  try {
    if (met->parsed()) {
      out << format_metric(csv_metric(metric_task, f.pred, f.gt)) << "\n";
      return 0;
    }
    if (pc->parsed()) return run_param_count(model_spec, out);
    for (const auto& [name, sc] : subs) {
      if (!sc->parsed()) continue;
      const RunConfig c = resolve(name, sc, f);
      if (name == "pretrain") return run_pretrain(c, out);
      if (name == "frozen-eval") return run_sweep(c, harness::Mode::kFrozenEval, out);
      if (name == "finetune") return run_sweep(c, harness::Mode::kFinetune, out);
      if (name == "layer-sweep") return run_layer_sweep(c, out);
      if (name == "distill") return run_distill(c, out);
      if (name == "gen-data") return run_gen_data(c, out);
      if (name == "dump-recon") return run_dump(c, out);
    }
    throw std::logic_error("no subcommand ran");
  } catch (const CliError& e) {
    err << "mae4d: error: " << e.kind() << ": " << one_line(e.what()) << "\n";
  } catch (const ConfigError& e) {
    err << "mae4d: error: config: " << one_line(e.what()) << "\n";
  } catch (const harness::TrainingDiverged& e) {
    err << "mae4d: error: diverged: " << one_line(e.what()) << "\n";
  } catch (const fs::filesystem_error& e) {
    err << "mae4d: error: io: " << one_line(e.what()) << "\n";
  } catch (const std::invalid_argument& e) {
    err << "mae4d: error: invalid-argument: " << one_line(e.what()) << "\n";
  } catch (const std::exception& e) {
    err << "mae4d: error: runtime: " << one_line(e.what()) << "\n";
  }
  return 1;
}

}  // namespace mae4d::cli
