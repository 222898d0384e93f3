#pragma once

#include <iomanip>
#include <ostream>
#include <sstream>

#include "bvi/io/clip_io.hpp"
#include "bvi/io/flow.hpp"
#include "bvi/metrics/psnr_ssim.hpp"
#include "bvi/metrics/warp.hpp"

namespace bvi {
namespace metrics {

struct ClipScore {
  std::string id;
  double psnr = 0.0;
  double ssim = 0.0;
  double ewarp = 0.0;
  double masked_psnr = 0.0;  // only when a mask directory was supplied
  bool has_masked = false;
  bool zero_flow = false;  // E_warp fell back to adjacent-frame difference
  long skipped_pairs = 0;
};

struct EvalReport {
  std::vector<ClipScore> clips;
  std::vector<std::pair<std::string, std::string>> errors;  // clip id -> message
  double mean_psnr = 0.0, mean_ssim = 0.0, mean_ewarp = 0.0;
  bool any_zero_flow = false;

  bool ok() const { return errors.empty() && !clips.empty(); }
};

namespace detail {

namespace fs = std::filesystem;

// A clip directory may hold frames directly or in a named subdirectory.
inline fs::path resolve_frames(const fs::path& dir, std::initializer_list<const char*> subdirs) {
  for (const char* s : subdirs)
    if (fs::is_directory(dir / s)) return dir / s;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".png") return dir;
  throw ValidationError("no frames found under " + dir.string());
}

}  // namespace detail

// Batch evaluation over matching clip directories. Per-clip failures are
// collected, not fatal. Flow files are <flows>/<clip_id>.bvf; without one the
// warping error degrades to the adjacent-frame difference (zero flow) and is
// flagged as such.
inline EvalReport evaluate(const std::string& pred_dir, const std::string& gt_dir, const std::string& masks_dir = "",
                           const std::string& flows_dir = "") {
  namespace fs = std::filesystem;
  EvalReport report;
  std::vector<fs::path> clips;
  try {
    clips = io::list_clip_dirs(pred_dir);
  } catch (const Error& e) {
    report.errors.emplace_back("<root>", e.what());
    return report;
  }
  for (const auto& clip_dir : clips) {
    std::string id = clip_dir.filename().string();
    try {
      Tensor pred = io::load_frames(detail::resolve_frames(clip_dir, {"completed", "corrupted"}));
      fs::path gt_clip = fs::path(gt_dir) / id;
      if (!fs::is_directory(gt_clip)) throw ValidationError("missing ground-truth clip " + gt_clip.string());
      Tensor gt = io::load_frames(detail::resolve_frames(gt_clip, {"gt"}));
      if (!pred.same_shape(gt)) throw ValidationError("prediction and ground truth shapes differ for " + id);

      ClipScore score;
      score.id = id;
      score.psnr = psnr(pred, gt);
      score.ssim = ssim(pred, gt);
      if (!masks_dir.empty()) {
        fs::path mask_clip = fs::path(masks_dir) / id;
        if (!fs::is_directory(mask_clip)) throw ValidationError("missing mask clip " + mask_clip.string());
        Tensor mask = io::load_frames(detail::resolve_frames(mask_clip, {"mask"}));
        score.masked_psnr = psnr(pred, gt, mask);
        score.has_masked = true;
      }
      Tensor flow;
      fs::path flow_file = fs::path(flows_dir) / (id + ".bvf");
      if (!flows_dir.empty() && fs::exists(flow_file)) {
        flow = io::read_flow(flow_file.string());
      } else {
        flow = Tensor({pred.dim(0) - 1, pred.dim(1), pred.dim(2), 2});
        score.zero_flow = true;
        report.any_zero_flow = true;
      }
      auto we = warping_error(pred, flow);
      score.ewarp = we.value;
      score.skipped_pairs = we.skipped_pairs;
      report.clips.push_back(std::move(score));
    } catch (const Error& e) {
      report.errors.emplace_back(id, e.what());
    }
  }
  for (const auto& c : report.clips) {
    report.mean_psnr += c.psnr;
    report.mean_ssim += c.ssim;
    report.mean_ewarp += c.ewarp;
  }
  if (!report.clips.empty()) {
    report.mean_psnr /= static_cast<double>(report.clips.size());
    report.mean_ssim /= static_cast<double>(report.clips.size());
    report.mean_ewarp /= static_cast<double>(report.clips.size());
  }
  return report;
}

// Machine-readable report: optional '#' comment lines, then one record per
// clip: `clip_id psnr ssim ewarp`, and the aggregate line last with clip id
// `aggregate`. LPIPS is intentionally absent (needs a pretrained network).
inline void write_report(std::ostream& os, const EvalReport& r) {
  os << std::fixed << std::setprecision(6);
  if (r.any_zero_flow) os << "# ewarp_mode: zero-flow fallback (adjacent-frame difference)\n";
  for (const auto& c : r.clips) os << c.id << " " << c.psnr << " " << c.ssim << " " << c.ewarp << "\n";
  os << "aggregate " << r.mean_psnr << " " << r.mean_ssim << " " << r.mean_ewarp << "\n";
}

inline void write_table(std::ostream& os, const EvalReport& r) {
  os << std::fixed << std::setprecision(4);
  os << "clip                         PSNR(dB)    SSIM     E_warp\n";
  for (const auto& c : r.clips) {
    os << std::left << std::setw(28) << c.id << std::right << std::setw(9) << c.psnr << std::setw(9) << c.ssim
       << std::setw(11) << c.ewarp;
    if (c.has_masked) os << "  masked " << c.masked_psnr;
    if (c.zero_flow) os << "  [zero-flow]";
    if (c.skipped_pairs) os << "  [" << c.skipped_pairs << " pairs skipped]";
    os << "\n";
  }
  os << std::left << std::setw(28) << "aggregate" << std::right << std::setw(9) << r.mean_psnr << std::setw(9)
     << r.mean_ssim << std::setw(11) << r.mean_ewarp << "\n";
  for (const auto& [id, msg] : r.errors) os << "error: " << id << ": " << msg << "\n";
}

}  // namespace metrics
}  // namespace bvi
