#pragma once

#include <string>
#include <vector>

#include "bvi/core/conv.hpp"
#include "bvi/nn/params.hpp"
#include "bvi/wavelet/haar.hpp"

namespace bvi {
namespace nn {

inline Var conv(Graph& g, Bound& P, const Var& x, const std::string& name, long cin, long cout, long k,
                long stride = 1, Init init = Init::kHeNormal) {
  Var w = P(name + ".w", {k, k, cin, cout}, init, k * k * cin);
  Var b = P(name + ".b", {cout}, Init::kZero);
  return ops::conv2d(g, x, w, b, stride);
}

// relu(x + c2(relu(c1(x)))), 3x3 kernels, width preserved.
inline Var res_block(Graph& g, Bound& P, const Var& x, const std::string& name, long C) {
  Var h = ops::relu(g, conv(g, P, x, name + ".c1", C, C, 3));
  h = conv(g, P, h, name + ".c2", C, C, 3);
  return ops::relu(g, ops::add(g, x, h));
}

// Wavelet downsampling: stack the four Haar subbands along channels, then a
// 1x1 convolution maps 4*cin to cout at half resolution.
inline Var dwt_down(Graph& g, Bound& P, const Var& x, const std::string& name, long cin, long cout) {
  Var s = ops::dwt2d_stacked(g, x);
  return conv(g, P, s, name + ".proj", 4 * cin, cout, 1);
}

// Shared encoder-decoder backbone of the mask prediction heads: a stem at
// full resolution and three wavelet-downsampled stages of widths B, 2B, 4B
// with two residual blocks each. Decoder stages mirror with nearest-neighbor
// upsampling, additive skip connections and one residual block.
struct BackboneFeatures {
  Var bottleneck;          // (T, H/8, W/8, 4B)
  std::vector<Var> skips;  // full, /2, /4 resolutions
};

inline BackboneFeatures encoder_backbone(Graph& g, Bound& P, const Var& x, const std::string& prefix, long in_ch,
                                         long B) {
  const auto& s = x->val.shape();
  if (s[1] % 8 || s[2] % 8) throw DimensionError(prefix + ": H and W must be divisible by 8");
  Var e0 = ops::relu(g, conv(g, P, x, prefix + ".stem", in_ch, B, 3));
  long widths[3] = {B, 2 * B, 4 * B};
  BackboneFeatures f;
  f.skips = {e0};
  Var h = e0;
  long cin = B;
  for (int st = 0; st < 3; ++st) {
    long cout = widths[st];
    h = dwt_down(g, P, h, prefix + ".down" + std::to_string(st), cin, cout);
    for (int r = 0; r < 2; ++r) h = res_block(g, P, h, prefix + ".s" + std::to_string(st) + ".r" + std::to_string(r), cout);
    if (st < 2) f.skips.push_back(h);
    cin = cout;
  }
  f.bottleneck = h;
  return f;
}

inline Var decoder_backbone(Graph& g, Bound& P, const BackboneFeatures& f, const std::string& prefix, long B,
                            long out_ch) {
  long widths[3] = {B, 2 * B, 4 * B};
  Var h = f.bottleneck;
  for (int st = 2; st >= 0; --st) {
    long cout = st > 0 ? widths[st - 1] : B;
    h = ops::upsample2x(g, h);
    h = conv(g, P, h, prefix + ".up" + std::to_string(st), widths[st], cout, 3);
    h = ops::add(g, h, f.skips[static_cast<size_t>(st)]);
    h = res_block(g, P, h, prefix + ".d" + std::to_string(st), cout);
  }
  // Zero-initialized head: predictions start neutral instead of saturated.
  return conv(g, P, h, prefix + ".head", B, out_ch, 3, 1, Init::kZero);
}

}  // namespace nn
}  // namespace bvi
