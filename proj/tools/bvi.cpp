// bvi: synthesize corrupted-video datasets, train the blind inpainting model,
// run blind inference, and evaluate results.
//
// Exit codes: 0 success, 1 validation/config error, 2 runtime/integrity error.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "bvi/io/checkpoint.hpp"
#include "bvi/io/clip_io.hpp"
#include "bvi/metrics/evaluate.hpp"
#include "bvi/pipeline/model.hpp"
#include "bvi/pipeline/train.hpp"

namespace fs = std::filesystem;
using namespace bvi;

namespace {

std::vector<Tensor> load_image_pool(const std::string& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ValidationError("no .png images in " + dir);
  std::vector<Tensor> pool;
  for (const auto& f : files) {
    Tensor img = io::read_png(f.string());
    if (img.dim(2) == 1) {  // expand gray to RGB
      Tensor rgb({img.dim(0), img.dim(1), 3});
      for (long p = 0; p < img.dim(0) * img.dim(1); ++p)
        for (long c = 0; c < 3; ++c) rgb[p * 3 + c] = img[p];
      img = rgb;
    }
    pool.push_back(img.reshaped({1, img.dim(0), img.dim(1), 3}));
  }
  return pool;
}

// Ground-truth clip: a crop window drifting over a source image.
Tensor moving_crop_clip(const Tensor& img, long T, long side, double shift, Rng& rng) {
  long H = img.dim(1), W = img.dim(2);
  if (H < side || W < side) throw ValidationError("ground-truth image smaller than the clip size");
  double oy = rng.uniform(0.0, static_cast<double>(H - side));
  double ox = rng.uniform(0.0, static_cast<double>(W - side));
  Tensor clip({T, side, side, 3});
  for (long t = 0; t < T; ++t) {
    long iy = static_cast<long>(oy), ix = static_cast<long>(ox);
    for (long y = 0; y < side; ++y)
      for (long x = 0; x < side; ++x)
        for (long c = 0; c < 3; ++c) clip.at(t, y, x, c) = img.at(0, iy + y, ix + x, c);
    oy = std::clamp(oy + rng.uniform(-shift, shift), 0.0, static_cast<double>(H - side));
    ox = std::clamp(ox + rng.uniform(-shift, shift), 0.0, static_cast<double>(W - side));
  }
  return clip;
}

int run_synth(const std::string& gt_dir, const std::string& content_dir, const std::string& out_dir, long clips,
              long frames, uint64_t seed, const std::string& config_file, long size) {
  RunConfig cfg = config_file.empty() ? RunConfig{} : load_config_file(config_file);
  if (size <= 0) size = cfg.crop;
  auto gt_pool = load_image_pool(gt_dir);
  std::vector<Tensor> content_pool;
  FillMode fill = fill_mode_from(cfg.fill);
  if (fill == FillMode::kNatural) content_pool = load_image_pool(content_dir);

  for (long i = 0; i < clips; ++i) {
    uint64_t clip_seed = seed + static_cast<uint64_t>(i);
    Rng rng(clip_seed ^ 0x9e3779b97f4a7c15ull);
    const Tensor& img = gt_pool[static_cast<size_t>(rng.uniform_int(0, static_cast<long>(gt_pool.size()) - 1))];
    Tensor gt = moving_crop_clip(img, frames, size, cfg.motion_shift, rng);
    ClipTriple clip = synth_clip(gt, content_pool, cfg.stroke_params(), cfg.motion_params(), cfg.smoothing_params(),
                                 fill, clip_seed);
    char name[32];
    std::snprintf(name, sizeof(name), "clip_%05ld", i);
    io::save_clip_triple(fs::path(out_dir) / name, clip);
    std::cout << name << " coverage=" << clip.coverage << " seed=" << clip_seed << "\n";
  }
  return 0;
}

int run_train(const std::string& config_file, const std::string& data_dir, const std::string& out_dir,
              const std::string& resume) {
  RunConfig cfg = config_file.empty() ? RunConfig{} : load_config_file(config_file);
  pipeline::TrainResult res = pipeline::train(cfg, data_dir, out_dir, resume);
  std::cout << "trained " << res.final_step << " steps; checkpoint: " << res.checkpoint_path << "\n";
  if (!res.trace.empty()) {
    const auto& last = res.trace.back();
    std::cout << "final losses: l_m=" << last.l_m << " l_v=" << last.l_v << " l_c=" << last.l_c
              << " total=" << last.total << "\n";
  }
  return 0;
}

int run_infer(const std::string& checkpoint, const std::string& in_dir, const std::string& out_dir, bool dump_masks) {
  io::Checkpoint ck = io::load_checkpoint(checkpoint);
  RunConfig cfg = parse_config(ck.config_text);
  ParamSet params(cfg.seed);
  io::restore_params(params, ck, "", "opt.");

  for (const auto& clip_dir : io::list_clip_dirs(in_dir)) {
    std::string id = clip_dir.filename().string();
    Tensor x = io::load_frames(metrics::detail::resolve_frames(clip_dir, {"corrupted"}));
    pipeline::InpaintResult res = pipeline::blind_inpaint(params, cfg, x);
    io::save_frames(fs::path(out_dir) / id / "completed", res.y_hat);
    if (dump_masks) io::save_frames(fs::path(out_dir) / id / "mask_pred", res.m_pred);
    std::cout << id << " done\n";
  }
  return 0;
}

int run_eval(const std::string& pred_dir, const std::string& gt_dir, const std::string& masks_dir,
             const std::string& flows_dir, const std::string& report_file) {
  metrics::EvalReport report = metrics::evaluate(pred_dir, gt_dir, masks_dir, flows_dir);
  if (report_file.empty()) {
    metrics::write_report(std::cout, report);
  } else {
    std::ofstream f(report_file);
    if (!f) throw IntegrityError("cannot open report file " + report_file);
    metrics::write_report(f, report);
  }
  metrics::write_table(std::cerr, report);
  return report.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"blind video inpainting toolkit"};
  app.require_subcommand(1);

  auto* synth = app.add_subcommand("synth", "generate a synthetic corrupted-video dataset");
  std::string gt_dir, content_dir, out_dir, config_file;
  long clips = 8, frames = 8, size = 0;
  uint64_t seed = 1;
  synth->add_option("--gt-dir", gt_dir, "directory of ground-truth source images (.png)")->required();
  synth->add_option("--content-dir", content_dir, "directory of corruption content images (.png)");
  synth->add_option("--out", out_dir, "output dataset directory")->required();
  synth->add_option("--clips", clips, "number of clips");
  synth->add_option("--frames", frames, "frames per clip");
  synth->add_option("--seed", seed, "base seed; clip i uses seed+i");
  synth->add_option("--config", config_file, "run configuration file");
  synth->add_option("--size", size, "frame side length (default: config crop)");

  auto* train = app.add_subcommand("train", "train on a synthesized dataset");
  std::string t_config, t_data, t_out, t_resume;
  train->add_option("--config", t_config, "run configuration file");
  train->add_option("--data", t_data, "dataset directory")->required();
  train->add_option("--out", t_out, "output directory (trace + checkpoints)")->required();
  train->add_option("--resume", t_resume, "checkpoint to resume from");

  auto* infer = app.add_subcommand("infer", "blind inference: corrupted clips in, completed clips out");
  std::string i_ck, i_in, i_out;
  bool dump_masks = false;
  infer->add_option("--checkpoint", i_ck, "trained checkpoint")->required();
  infer->add_option("--in", i_in, "directory of clip directories")->required();
  infer->add_option("--out", i_out, "output directory")->required();
  infer->add_flag("--dump-masks", dump_masks, "also write predicted masks");

  auto* eval = app.add_subcommand("eval", "evaluate completed clips against ground truth");
  std::string e_pred, e_gt, e_masks, e_flows, e_report;
  eval->add_option("--pred", e_pred, "directory of predicted clips")->required();
  eval->add_option("--gt", e_gt, "directory of ground-truth clips")->required();
  eval->add_option("--masks", e_masks, "directory of mask clips (adds masked PSNR to the table)");
  eval->add_option("--flows", e_flows, "directory of <clip>.bvf flow files");
  eval->add_option("--report", e_report, "write the machine report to a file instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return run_synth(gt_dir, content_dir, out_dir, clips, frames, seed, config_file, size);
    if (train->parsed()) return run_train(t_config, t_data, t_out, t_resume);
    if (infer->parsed()) return run_infer(i_ck, i_in, i_out, dump_masks);
    if (eval->parsed()) return run_eval(e_pred, e_gt, e_masks, e_flows, e_report);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
