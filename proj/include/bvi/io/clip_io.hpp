#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>

#include "bvi/data/clip.hpp"
#include "bvi/io/png.hpp"

namespace bvi {
namespace io {

namespace fs = std::filesystem;

inline std::string frame_name(long t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%05ld.png", t);
  return buf;
}

// Writes one (T,H,W,C) tensor as numbered frames into dir.
inline void save_frames(const fs::path& dir, const Tensor& clip) {
  if (clip.ndim() != 4) throw DimensionError("save_frames: expected (T,H,W,C)");
  fs::create_directories(dir);
  long T = clip.dim(0), H = clip.dim(1), W = clip.dim(2), C = clip.dim(3);
  Tensor frame({H, W, C});
  for (long t = 0; t < T; ++t) {
    std::copy(clip.data() + t * H * W * C, clip.data() + (t + 1) * H * W * C, frame.data());
    write_png((dir / frame_name(t)).string(), frame);
  }
}

// Loads all *.png frames of a directory in name order into (T,H,W,C).
inline Tensor load_frames(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ValidationError("load_frames: no such directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
  if (files.empty()) throw ValidationError("load_frames: no frames in " + dir.string());
  std::sort(files.begin(), files.end());
  Tensor first = read_png(files[0].string());
  long T = static_cast<long>(files.size()), H = first.dim(0), W = first.dim(1), C = first.dim(2);
  Tensor clip({T, H, W, C});
  std::copy(first.begin(), first.end(), clip.data());
  for (long t = 1; t < T; ++t) {
    Tensor f = read_png(files[static_cast<size_t>(t)].string());
    if (f.dim(0) != H || f.dim(1) != W || f.dim(2) != C)
      throw ValidationError("load_frames: inconsistent frame shapes in " + dir.string());
    std::copy(f.begin(), f.end(), clip.data() + t * H * W * C);
  }
  return clip;
}

// Dataset layout: <dir>/{gt,corrupted,mask}/%05d.png plus a `meta` file of
// UTF-8 key=value lines (seed, T, H, W, coverage, sources).
inline void save_clip_triple(const fs::path& dir, const ClipTriple& clip) {
  save_frames(dir / "gt", clip.y);
  save_frames(dir / "corrupted", clip.x);
  save_frames(dir / "mask", clip.m);
  std::ofstream meta(dir / "meta");
  if (!meta) throw IntegrityError("save_clip_triple: cannot write meta in " + dir.string());
  meta << "seed=" << clip.seed << "\n";
  meta << "T=" << clip.y.dim(0) << "\n";
  meta << "H=" << clip.y.dim(1) << "\n";
  meta << "W=" << clip.y.dim(2) << "\n";
  meta << "coverage=" << clip.coverage << "\n";
  meta << "sources=" << clip.sources << "\n";
}

inline std::map<std::string, std::string> load_meta(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("load_meta: cannot open " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(f, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

inline ClipTriple load_clip_triple(const fs::path& dir) {
  ClipTriple clip;
  clip.y = load_frames(dir / "gt");
  clip.x = load_frames(dir / "corrupted");
  clip.m = load_frames(dir / "mask");
  if (!clip.x.same_shape(clip.y) || clip.m.dim(0) != clip.y.dim(0) || clip.m.dim(1) != clip.y.dim(1) ||
      clip.m.dim(2) != clip.y.dim(2) || clip.m.dim(3) != 1)
    throw ValidationError("load_clip_triple: misaligned components in " + dir.string());
  if (fs::exists(dir / "meta")) {
    auto kv = load_meta(dir / "meta");
    if (kv.count("seed")) clip.seed = std::stoull(kv["seed"]);
    if (kv.count("coverage")) clip.coverage = std::stod(kv["coverage"]);
    if (kv.count("sources")) clip.sources = kv["sources"];
  }
  return clip;
}

// Sorted clip subdirectories of a dataset root.
inline std::vector<fs::path> list_clip_dirs(const fs::path& root) {
  if (!fs::is_directory(root)) throw ValidationError("list_clip_dirs: no such directory: " + root.string());
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory()) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

}  // namespace io
}  // namespace bvi
