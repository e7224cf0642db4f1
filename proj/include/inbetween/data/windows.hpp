#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "inbetween/core/kinematics.hpp"
#include "inbetween/data/bvh.hpp"

namespace inbetween {

inline constexpr int kDefaultPast = 10;

struct WindowSpec {
  int window_length = 50;
  int stride = 20;
  int past = kDefaultPast;
  std::set<std::string> subjects;  // empty keeps every subject
  bool canonicalize = true;

  void validate() const {
    if (window_length <= 0) throw std::invalid_argument("window_length must be positive");
    if (stride <= 0) throw std::invalid_argument("stride must be positive");
    if (past <= 0 || past > window_length) throw std::invalid_argument("past must lie in [1, window_length]");
  }
};

// Training/evaluation protocol constants for the public benchmark.
inline WindowSpec lafan_train_spec() {
  WindowSpec s;
  s.window_length = 50;
  s.stride = 20;
  s.subjects = {"subject1", "subject2", "subject3", "subject4"};
  return s;
}
inline WindowSpec lafan_test_spec() {
  WindowSpec s;
  s.window_length = 65;  // 10 seed + 45 transition + 10 future, the first of which is the target
  s.stride = 40;
  s.subjects = {"subject5"};
  return s;
}

// A contiguous, canonicalized slice of a clip.
struct MotionWindow {
  std::shared_ptr<const Skeleton> skeleton;
  std::vector<FrameState> frames;
  int past = kDefaultPast;
  Quaternion applied_yaw;
  std::string subject, action;
  std::size_t clip_index = 0, offset = 0;

  int size() const { return static_cast<int>(frames.size()); }
  int max_transition() const { return size() - past - 1; }
};

struct TransitionWindow {
  std::vector<FrameState> seed;
  std::vector<FrameState> transition;
  FrameState target;
  std::vector<FrameState> future;
};

inline TransitionWindow split_window(const MotionWindow& w, int length) {
  if (length < 1 || length > w.max_transition()) {
    throw std::out_of_range("transition length " + std::to_string(length) + " does not fit a window of " +
                            std::to_string(w.size()) + " frames");
  }
  TransitionWindow t;
  const auto b = w.frames.begin();
  t.seed.assign(b, b + w.past);
  t.transition.assign(b + w.past, b + w.past + length);
  t.target = w.frames[w.past + length];
  t.future.assign(b + w.past + length + 1, w.frames.end());
  return t;
}

struct WindowSet {
  std::vector<MotionWindow> windows;
  std::size_t skipped_clips = 0;  // shorter than the window length
};

inline WindowSet make_windows(const std::vector<MotionClip>& clips, const WindowSpec& spec) {
  spec.validate();
  WindowSet out;
  for (std::size_t ci = 0; ci < clips.size(); ++ci) {
    const MotionClip& clip = clips[ci];
    if (!spec.subjects.empty() && !spec.subjects.count(clip.subject)) continue;
    const auto n = clip.frames.size();
    const auto len = static_cast<std::size_t>(spec.window_length);
    if (n < len) {
      ++out.skipped_clips;
      continue;
    }
    for (std::size_t off = 0; off + len <= n; off += static_cast<std::size_t>(spec.stride)) {
      MotionClip slice;
      slice.skeleton = clip.skeleton;
      slice.frames.assign(clip.frames.begin() + off, clip.frames.begin() + off + len);
      MotionWindow w;
      w.skeleton = clip.skeleton;
      w.past = spec.past;
      w.subject = clip.subject;
      w.action = clip.action;
      w.clip_index = ci;
      w.offset = off;
      if (spec.canonicalize) {
        auto c = canonicalize(slice, static_cast<std::size_t>(spec.past - 1));
        w.frames = std::move(c.clip.frames);
        w.applied_yaw = c.applied_yaw;
      } else {
        w.frames = std::move(slice.frames);
      }
      out.windows.push_back(std::move(w));
    }
  }
  return out;
}

// Mirrors and re-canonicalizes so the last seed frame still faces +X.
inline MotionWindow mirror_window(const MotionWindow& w) {
  MotionClip clip;
  clip.skeleton = w.skeleton;
  clip.frames = w.frames;
  auto c = canonicalize(mirror(clip), static_cast<std::size_t>(w.past - 1));
  MotionWindow out = w;
  out.frames = std::move(c.clip.frames);
  out.applied_yaw = quat_mul(c.applied_yaw, w.applied_yaw);
  return out;
}

// "walk1_subject5.bvh" -> action "walk1", subject "subject5".
inline std::pair<std::string, std::string> parse_clip_name(const std::string& filename) {
  std::string stem = std::filesystem::path(filename).stem().string();
  const auto pos = stem.rfind('_');
  if (pos == std::string::npos) return {stem, ""};
  return {stem.substr(0, pos), stem.substr(pos + 1)};
}

struct ManifestEntry {
  std::string file, subject, action;
  std::size_t frames = 0;
  double fps = 0;
};

// Tab-separated: file, subject, action, frames, fps. Lines starting with '#' are comments.
inline void write_manifest(std::ostream& out, const std::vector<ManifestEntry>& entries) {
  out << "# file\tsubject\taction\tframes\tfps\n";
  for (const auto& e : entries) {
    out << e.file << '\t' << e.subject << '\t' << e.action << '\t' << e.frames << '\t' << e.fps << '\n';
  }
}

inline std::vector<ManifestEntry> read_manifest(std::istream& in) {
  std::vector<ManifestEntry> out;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    ManifestEntry e;
    std::string frames, fps;
    if (!std::getline(ls, e.file, '\t') || !std::getline(ls, e.subject, '\t') ||
        !std::getline(ls, e.action, '\t') || !std::getline(ls, frames, '\t') || !std::getline(ls, fps)) {
      throw std::runtime_error("manifest line " + std::to_string(no) + ": expected 5 tab-separated fields");
    }
    e.frames = std::stoul(frames);
    e.fps = std::stod(fps);
    out.push_back(std::move(e));
  }
  return out;
}

struct Corpus {
  std::shared_ptr<const Skeleton> skeleton;
  std::vector<MotionClip> clips;
  std::vector<ManifestEntry> manifest;
};

// Loads every .bvh under `dir` (sorted by name) and labels clips from their file names.
inline Corpus load_corpus(const std::string& dir, double contact_threshold = kDefaultContactThreshold) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw std::runtime_error("data directory not found: " + dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".bvh") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("no .bvh files in " + dir);
  Corpus corpus;
  for (const auto& f : files) {
    BvhData d = load_bvh(f.string());
    if (!corpus.skeleton) {
      corpus.skeleton = d.skeleton;
    } else if (d.skeleton->parents != corpus.skeleton->parents) {
      throw std::runtime_error(f.string() + ": skeleton hierarchy differs from the first file");
    }
    d.clip.skeleton = corpus.skeleton;
    auto [action, subject] = parse_clip_name(f.filename().string());
    d.clip.action = action;
    d.clip.subject = subject;
    make_continuous(d.clip.frames);
    if (d.clip.frames.size() >= 2) assign_contacts(d.clip, contact_threshold);
    corpus.manifest.push_back({f.filename().string(), subject, action, d.clip.frames.size(), d.clip.fps});
    corpus.clips.push_back(std::move(d.clip));
  }
  return corpus;
}

}  // namespace inbetween
