#pragma once

#include <filesystem>
#include <fstream>
#include <optional>

#include "bvi/io/checkpoint.hpp"
#include "bvi/io/clip_io.hpp"
#include "bvi/pipeline/model.hpp"

namespace bvi {
namespace pipeline {

struct TraceRow {
  long step;
  double l_m, l_v, l_c, total;
};

struct TrainResult {
  std::vector<TraceRow> trace;
  std::string checkpoint_path;  // last checkpoint written
  long final_step = 0;
};

namespace detail {

// Adaptive-moment descent with a fixed step size. Parameters and moments are
// rounded to float32 after every update so checkpoints round-trip bit-exactly.
struct Adam {
  double lr, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  ParamSet m{0}, v{0};

  explicit Adam(double step_size) : lr(step_size) {}

  void ensure_slots(const ParamSet& params) {
    for (const auto& [name, t] : params.items()) {
      if (!m.has(name)) m.set(name, Tensor::zeros(t.shape()));
      if (!v.has(name)) v.set(name, Tensor::zeros(t.shape()));
    }
  }

  void step(ParamSet& params, Bound& bound, long t_step) {
    ensure_slots(params);
    double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_step));
    double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_step));
    for (auto& [name, p] : params.items()) {
      Tensor g = bound.grad_of(name);
      Tensor& mt = m.at(name);
      Tensor& vt = v.at(name);
      for (long i = 0; i < p.size(); ++i) {
        mt[i] = beta1 * mt[i] + (1.0 - beta1) * g[i];
        vt[i] = beta2 * vt[i] + (1.0 - beta2) * g[i] * g[i];
        double mhat = mt[i] / bc1;
        double vhat = vt[i] / bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
      }
      round_to_f32(p);
      round_to_f32(mt);
      round_to_f32(vt);
    }
  }
};

struct CropView {
  Tensor x, y, m;
};

inline Tensor crop4(const Tensor& t, long t0, long frames, long y0, long x0, long side) {
  long H = t.dim(1), W = t.dim(2), C = t.dim(3);
  Tensor out({frames, side, side, C});
  for (long f = 0; f < frames; ++f)
    for (long y = 0; y < side; ++y)
      std::copy(t.data() + (((t0 + f) * H + y0 + y) * W + x0) * C,
                t.data() + (((t0 + f) * H + y0 + y) * W + x0 + side) * C,
                out.data() + ((f * side + y) * side) * C);
  return out;
}

}  // namespace detail

// Deterministic training loop over a data_synthesis-layout dataset. The trace
// file (one `step l_m l_v l_c total` row per step) is appended under out_dir,
// checkpoints are written every checkpoint_interval steps and at the end. A
// non-finite loss aborts with the last good checkpoint retained on disk.
// With lambda_c = 0 the consistency term is computed for the trace but takes
// no part in optimization (monitored only).
inline TrainResult train(const RunConfig& cfg, const std::string& data_dir, const std::string& out_dir,
                         const std::string& resume_from = "") {
  namespace fs = std::filesystem;
  cfg.validate();
  auto clip_dirs = io::list_clip_dirs(data_dir);
  if (clip_dirs.empty()) throw ValidationError("train: no clips under " + data_dir);
  std::vector<ClipTriple> clips;
  for (const auto& d : clip_dirs) {
    ClipTriple c = io::load_clip_triple(d);
    if (c.y.dim(0) < cfg.frames || c.y.dim(1) < cfg.crop || c.y.dim(2) < cfg.crop)
      throw ValidationError("train: clip " + d.string() + " smaller than frames x crop");
    clips.push_back(std::move(c));
  }

  fs::create_directories(out_dir);
  ParamSet params(cfg.seed);
  detail::Adam opt(cfg.step_size);
  Rng rng(cfg.seed ^ 0x5bd1e995u);
  long start_step = 0;

  if (!resume_from.empty()) {
    io::Checkpoint ck = io::load_checkpoint(resume_from);
    io::restore_params(params, ck, "", "opt.");
    io::restore_params(opt.m, ck, "opt.m.");
    io::restore_params(opt.v, ck, "opt.v.");
    rng.set_state(ck.rng_state);
    start_step = static_cast<long>(ck.step);
  }

  std::ofstream trace_file(fs::path(out_dir) / "trace.txt", std::ios::app);
  if (!trace_file) throw IntegrityError("train: cannot open trace file");
  if (start_step == 0) {
    trace_file << "# step l_m l_v l_c total\n";
    if (cfg.lambda_c == 0.0) trace_file << "# lambda_c = 0: consistency loss monitored only\n";
  }

  auto save = [&](long step) {
    io::Checkpoint ck;
    ck.config_text = config_text(cfg);
    ck.step = static_cast<uint64_t>(step);
    ck.rng_state = rng.state();
    for (const auto& [name, t] : params.items()) ck.tensors.emplace_back(name, t);
    for (const auto& [name, t] : opt.m.items()) ck.tensors.emplace_back("opt.m." + name, t);
    for (const auto& [name, t] : opt.v.items()) ck.tensors.emplace_back("opt.v." + name, t);
    std::string path = (fs::path(out_dir) / "checkpoint_last.bvck").string();
    io::save_checkpoint(path, ck);
    return path;
  };

  TrainResult result;
  SoftBinarizer bin = cfg.binarizer();
  LossWeights weights = cfg.loss_weights();
  const bool train_consistency = cfg.lambda_c > 0.0;

  for (long step = start_step + 1; step <= cfg.steps; ++step) {
    Graph g;
    Bound P(g, params, true);
    Var lm_sum, lv_sum, lc_sum;
    double lc_monitor = 0.0;
    for (long b = 0; b < cfg.batch_clips; ++b) {
      const ClipTriple& clip = clips[static_cast<size_t>(rng.uniform_int(0, static_cast<long>(clips.size()) - 1))];
      long t0 = rng.uniform_int(0, clip.y.dim(0) - cfg.frames);
      long y0 = rng.uniform_int(0, clip.y.dim(1) - cfg.crop);
      long x0 = rng.uniform_int(0, clip.y.dim(2) - cfg.crop);
      Tensor x = detail::crop4(clip.x, t0, cfg.frames, y0, x0, cfg.crop);
      Tensor y = detail::crop4(clip.y, t0, cfg.frames, y0, x0, cfg.crop);
      Tensor m = detail::crop4(clip.m, t0, cfg.frames, y0, x0, cfg.crop);

      ModelOutput out = model_forward(g, P, cfg, x);
      Var lm = losses::mask_loss(g, out.m_short, out.m_long, m);
      Var lv = losses::completion_loss(g, out.y_hat, y, m);
      lm_sum = lm_sum ? ops::add(g, lm_sum, lm) : lm;
      lv_sum = lv_sum ? ops::add(g, lv_sum, lv) : lv;
      if (train_consistency) {
        Var lc = losses::consistency_loss(g, out.m_long, m, out.y_hat, g.constant(x), bin);
        lc_sum = lc_sum ? ops::add(g, lc_sum, lc) : lc;
      } else {
        lc_monitor += losses::consistency_loss(out.m_long->val, m, out.y_hat->val, x, bin);
      }
    }
    double inv_b = 1.0 / static_cast<double>(cfg.batch_clips);
    Var lm_avg = ops::smul(g, lm_sum, inv_b);
    Var lv_avg = ops::smul(g, lv_sum, inv_b);
    Var lc_avg = train_consistency ? ops::smul(g, lc_sum, inv_b) : g.constant(Tensor::scalar(lc_monitor * inv_b));

    TraceRow row{step, lm_avg->val[0], lv_avg->val[0], lc_avg->val[0], 0.0};
    Var total;
    try {
      total = losses::total_loss(g, lm_avg, lv_avg, lc_avg, weights);
    } catch (const TrainingAbort&) {
      trace_file << "# aborted at step " << step << ": non-finite loss\n";
      trace_file.flush();
      throw;
    }
    row.total = total->val[0];
    g.backward(total);
    opt.step(params, P, step);

    char line[160];
    std::snprintf(line, sizeof(line), "%ld %.9e %.9e %.9e %.9e\n", row.step, row.l_m, row.l_v, row.l_c, row.total);
    trace_file << line;
    result.trace.push_back(row);
    result.final_step = step;
    if (step % cfg.checkpoint_interval == 0) result.checkpoint_path = save(step);
  }
  result.checkpoint_path = save(cfg.steps);
  trace_file.flush();
  return result;
}

}  // namespace pipeline
}  // namespace bvi
