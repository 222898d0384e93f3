#pragma once

#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "bvi/complete/completion.hpp"
#include "bvi/data/animate.hpp"
#include "bvi/data/blend.hpp"
#include "bvi/data/strokes.hpp"
#include "bvi/data/synth.hpp"
#include "bvi/loss/losses.hpp"
#include "bvi/mask/masknet.hpp"

namespace bvi {

// Flat `key = value` run configuration. Every key has a default; unknown keys
// are errors. '#' starts a comment.
struct RunConfig {
  uint64_t seed = 1;

  // Optimizer / loop
  long steps = 500;
  double step_size = 1e-3;
  long batch_clips = 1;
  long frames = 8;  // T per training sample
  long crop = 48;   // square crop side
  long checkpoint_interval = 100;

  // Losses
  double lambda_m = 3.0;
  double lambda_v = 5.0;
  double lambda_c = 0.02;
  double bin_tau = 2.0 / 255.0;
  double bin_kappa = 50.0;
  double mask_threshold = 0.5;

  // Model sizes
  long base_channels = 8;
  long ltr_blocks = 1;
  long ltr_groups = 4;
  long ltr_radius = 3;
  long ltr_temporal = 8;
  bool ltr_pos_bias = true;
  long vc_blocks = 2;
  long vc_heads = 2;
  std::string attention = "fused";  // fused | dense

  // Dataset synthesis
  long strokes_min = 1, strokes_max = 4;
  long vertices_min = 4, vertices_max = 12;
  double width_min = 8.0, width_max = 24.0;
  double turn_max = 0.7;
  double seglen_min = 15.0, seglen_max = 60.0;
  double coverage_min = 0.05, coverage_max = 0.40;
  double motion_shift = 1.0, motion_rot = 0.015, motion_scale = 0.003;
  long smooth_iters = 3;
  double smooth_sigma = 1.5;
  long band = 4;
  std::string fill = "natural";  // natural | noise | constant

  void validate() const {
    if (crop % 8) throw ConfigError("crop must be divisible by 8");
    if (frames < 2) throw ConfigError("frames must be at least 2");
    if (lambda_m < 0 || lambda_v < 0 || lambda_c < 0) throw ConfigError("loss weights must be nonnegative");
    if (!(mask_threshold > 0.0 && mask_threshold < 1.0)) throw ConfigError("mask_threshold must lie in (0,1)");
    if (steps < 1 || batch_clips < 1 || checkpoint_interval < 1) throw ConfigError("bad loop settings");
    if (step_size <= 0.0) throw ConfigError("step_size must be positive");
    if (attention != "fused" && attention != "dense") throw ConfigError("attention must be 'fused' or 'dense'");
    fill_mode_from(fill);
    stroke_params().validate();
    smoothing_params().validate();
    if (base_channels < 1 || ltr_blocks < 1 || vc_blocks < 1) throw ConfigError("bad model sizes");
    if ((4 * base_channels) % ltr_groups) throw ConfigError("ltr_groups must divide 4*base_channels");
    if ((4 * base_channels) % vc_heads) throw ConfigError("vc_heads must divide 4*base_channels");
  }

  MaskNetConfig mask_config() const {
    MaskNetConfig cfg;
    cfg.base_channels = base_channels;
    cfg.refine_blocks = ltr_blocks;
    cfg.window.groups = ltr_groups;
    cfg.window.spatial_radius = ltr_radius;
    cfg.window.temporal_extent = ltr_temporal;
    cfg.window.use_position_bias = ltr_pos_bias;
    return cfg;
  }

  CompletionConfig completion_config() const {
    CompletionConfig cfg;
    cfg.base_channels = base_channels;
    cfg.blocks = vc_blocks;
    cfg.heads = vc_heads;
    cfg.temporal_extent = frames;
    cfg.bias_grid_h = crop / 8;
    cfg.bias_grid_w = crop / 8;
    cfg.sparse_branch = attention == "fused";
    return cfg;
  }

  LossWeights loss_weights() const { return {lambda_m, lambda_v, lambda_c}; }
  SoftBinarizer binarizer() const { return {bin_tau, bin_kappa}; }
  StrokeParams stroke_params() const {
    StrokeParams p;
    p.strokes_min = strokes_min;
    p.strokes_max = strokes_max;
    p.vertices_min = vertices_min;
    p.vertices_max = vertices_max;
    p.width_min = width_min;
    p.width_max = width_max;
    p.turn_max = turn_max;
    p.seglen_min = seglen_min;
    p.seglen_max = seglen_max;
    p.coverage_min = coverage_min;
    p.coverage_max = coverage_max;
    return p;
  }
  MotionParams motion_params() const { return {motion_shift, motion_rot, motion_scale}; }
  SmoothingParams smoothing_params() const { return {smooth_iters, smooth_sigma, band}; }
};

namespace detail {

struct ConfigField {
  const char* key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

inline long parse_long(const std::string& v, const char* key) {
  try {
    size_t pos = 0;
    long r = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ConfigError(std::string("bad integer for ") + key + ": '" + v + "'");
  }
}

inline double parse_double(const std::string& v, const char* key) {
  try {
    size_t pos = 0;
    double r = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ConfigError(std::string("bad number for ") + key + ": '" + v + "'");
  }
}

inline bool parse_bool(const std::string& v, const char* key) {
  if (v == "1" || v == "true" || v == "on") return true;
  if (v == "0" || v == "false" || v == "off") return false;
  throw ConfigError(std::string("bad boolean for ") + key + ": '" + v + "'");
}

#define BVI_CFG_LONG(field)                                                                      \
  ConfigField {                                                                                  \
    #field, [](RunConfig& c, const std::string& v) { c.field = parse_long(v, #field); },         \
        [](const RunConfig& c) { return std::to_string(c.field); }                               \
  }
#define BVI_CFG_DOUBLE(field)                                                                    \
  ConfigField {                                                                                  \
    #field, [](RunConfig& c, const std::string& v) { c.field = parse_double(v, #field); },       \
        [](const RunConfig& c) {                                                                 \
          std::ostringstream os;                                                                 \
          os.precision(17);                                                                      \
          os << c.field;                                                                         \
          return os.str();                                                                       \
        }                                                                                        \
  }
#define BVI_CFG_BOOL(field)                                                                      \
  ConfigField {                                                                                  \
    #field, [](RunConfig& c, const std::string& v) { c.field = parse_bool(v, #field); },         \
        [](const RunConfig& c) { return std::string(c.field ? "true" : "false"); }               \
  }
#define BVI_CFG_STRING(field)                                                                    \
  ConfigField {                                                                                  \
    #field, [](RunConfig& c, const std::string& v) { c.field = v; },                             \
        [](const RunConfig& c) { return c.field; }                                               \
  }

inline const std::vector<ConfigField>& config_fields() {
  static const std::vector<ConfigField> fields = {
      ConfigField{"seed", [](RunConfig& c, const std::string& v) { c.seed = static_cast<uint64_t>(std::stoull(v)); },
                  [](const RunConfig& c) { return std::to_string(c.seed); }},
      BVI_CFG_LONG(steps), BVI_CFG_DOUBLE(step_size), BVI_CFG_LONG(batch_clips), BVI_CFG_LONG(frames),
      BVI_CFG_LONG(crop), BVI_CFG_LONG(checkpoint_interval), BVI_CFG_DOUBLE(lambda_m), BVI_CFG_DOUBLE(lambda_v),
      BVI_CFG_DOUBLE(lambda_c), BVI_CFG_DOUBLE(bin_tau), BVI_CFG_DOUBLE(bin_kappa), BVI_CFG_DOUBLE(mask_threshold),
      BVI_CFG_LONG(base_channels), BVI_CFG_LONG(ltr_blocks), BVI_CFG_LONG(ltr_groups), BVI_CFG_LONG(ltr_radius),
      BVI_CFG_LONG(ltr_temporal), BVI_CFG_BOOL(ltr_pos_bias), BVI_CFG_LONG(vc_blocks), BVI_CFG_LONG(vc_heads),
      BVI_CFG_STRING(attention), BVI_CFG_LONG(strokes_min), BVI_CFG_LONG(strokes_max), BVI_CFG_LONG(vertices_min),
      BVI_CFG_LONG(vertices_max), BVI_CFG_DOUBLE(width_min), BVI_CFG_DOUBLE(width_max), BVI_CFG_DOUBLE(turn_max),
      BVI_CFG_DOUBLE(seglen_min), BVI_CFG_DOUBLE(seglen_max), BVI_CFG_DOUBLE(coverage_min),
      BVI_CFG_DOUBLE(coverage_max), BVI_CFG_DOUBLE(motion_shift), BVI_CFG_DOUBLE(motion_rot),
      BVI_CFG_DOUBLE(motion_scale), BVI_CFG_LONG(smooth_iters), BVI_CFG_DOUBLE(smooth_sigma), BVI_CFG_LONG(band),
      BVI_CFG_STRING(fill)};
  return fields;
}

#undef BVI_CFG_LONG
#undef BVI_CFG_DOUBLE
#undef BVI_CFG_BOOL
#undef BVI_CFG_STRING

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line;
  long lineno = 0;
  auto trim = [](std::string s) {
    size_t b = s.find_first_not_of(" \t\r");
    size_t e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    bool found = false;
    for (const auto& f : detail::config_fields())
      if (key == f.key) {
        f.set(cfg, value);
        found = true;
        break;
      }
    if (!found) throw ConfigError("unknown config key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

inline std::string config_text(const RunConfig& cfg) {
  std::ostringstream os;
  for (const auto& f : detail::config_fields()) os << f.key << " = " << f.get(cfg) << "\n";
  return os.str();
}

inline RunConfig load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open config file " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return parse_config(os.str());
}

}  // namespace bvi
