#pragma once

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <memory>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "inbetween/core/kinematics.hpp"

namespace inbetween {

class BvhParseError : public std::runtime_error {
 public:
  BvhParseError(std::size_t line, const std::string& what)
      : std::runtime_error("bvh line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct BvhData {
  std::shared_ptr<Skeleton> skeleton;
  MotionClip clip;
};

namespace bvh_detail {

inline Quaternion axis_rotation(char axis, double degrees) {
  const double rad = degrees * std::numbers::pi / 180.0;
  const Vec3 a = axis == 'X' ? Vec3{1, 0, 0} : (axis == 'Y' ? Vec3{0, 1, 0} : Vec3{0, 0, 1});
  return quat_from_axis_angle(a, rad);
}

inline int axis_index(char a) { return a == 'X' ? 0 : (a == 'Y' ? 1 : 2); }

}  // namespace bvh_detail

// R = R_order[0](a0) R_order[1](a1) R_order[2](a2); angles in degrees.
inline Quaternion euler_to_quat(const std::string& order, const std::array<double, 3>& degrees) {
  Quaternion q;
  for (int i = 0; i < 3; ++i) q = quat_mul(q, bvh_detail::axis_rotation(order[i], degrees[i]));
  return quat_normalize(q);
}

// Inverse of euler_to_quat for Tait-Bryan orders.
inline std::array<double, 3> quat_to_euler(const std::string& order, const Quaternion& q) {
  const auto M = quat_to_matrix(q);
  const auto& R = M.m;
  const int i = bvh_detail::axis_index(order[0]);
  const int j = bvh_detail::axis_index(order[1]);
  const int k = bvh_detail::axis_index(order[2]);
  const double s = ((j - i + 3) % 3 == 1) ? 1.0 : -1.0;  // +1 for cyclic orders
  double a0, a1, a2;
  const double sb = std::clamp(s * R[i][k], -1.0, 1.0);
  a1 = std::asin(sb);
  if (std::abs(sb) < 1.0 - 1e-12) {
    a0 = std::atan2(-s * R[j][k], R[k][k]);
    a2 = std::atan2(-s * R[i][j], R[i][i]);
  } else {
    a2 = 0.0;
    a0 = std::atan2(s * R[k][j], R[j][j]);
  }
  const double r2d = 180.0 / std::numbers::pi;
  return {a0 * r2d, a1 * r2d, a2 * r2d};
}

namespace bvh_detail {

enum class Channel { Xpos, Ypos, Zpos, Xrot, Yrot, Zrot };

struct Tokenizer {
  std::istream& in;
  std::size_t line = 1;
  std::string pending;

  std::string next() {
    std::string tok;
    char ch;
    while (in.get(ch)) {
      if (ch == '\n') {
        if (!tok.empty()) {
          in.unget();
          return tok;
        }
        ++line;
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(ch))) {
        if (!tok.empty()) return tok;
        continue;
      }
      tok.push_back(ch);
    }
    return tok;
  }

  std::string expect(const std::string& what) {
    std::string t = next();
    if (t != what) throw BvhParseError(line, "expected '" + what + "', found '" + t + "'");
    return t;
  }

  // Consumes the remainder of the current line; returns its non-blank characters.
  std::string finish_line() {
    std::string extra;
    char ch;
    while (in.get(ch) && ch != '\n') {
      if (!std::isspace(static_cast<unsigned char>(ch))) extra.push_back(ch);
    }
    if (in) ++line;
    return extra;
  }

  double number() {
    const std::string t = next();
    try {
      std::size_t used = 0;
      const double v = std::stod(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
      if (!std::isfinite(v)) throw BvhParseError(line, "non-finite value '" + t + "'");
      return v;
    } catch (const BvhParseError&) {
      throw;
    } catch (const std::exception&) {
      throw BvhParseError(line, "expected a number, found '" + t + "'");
    }
  }
};

inline Channel parse_channel(const std::string& name, std::size_t line) {
  if (name == "Xposition") return Channel::Xpos;
  if (name == "Yposition") return Channel::Ypos;
  if (name == "Zposition") return Channel::Zpos;
  if (name == "Xrotation") return Channel::Xrot;
  if (name == "Yrotation") return Channel::Yrot;
  if (name == "Zrotation") return Channel::Zrot;
  throw BvhParseError(line, "unknown channel '" + name + "'");
}

struct JointChannels {
  std::vector<Channel> channels;
  std::string order;  // rotation axes in channel order
};

}  // namespace bvh_detail

// Non-root position channels are read and ignored; offsets come from OFFSET lines.
inline BvhData parse_bvh(std::istream& in) {
  using namespace bvh_detail;
  Tokenizer tz{in};
  auto skel = std::make_shared<Skeleton>();
  std::vector<JointChannels> layout;

  tz.expect("HIERARCHY");
  std::vector<int> stack;
  std::string tok = tz.next();
  if (tok != "ROOT") throw BvhParseError(tz.line, "expected ROOT, found '" + tok + "'");
  while (true) {
    if (tok == "ROOT" || tok == "JOINT") {
      if (tok == "JOINT" && stack.empty()) throw BvhParseError(tz.line, "JOINT outside of ROOT");
      if (tok == "ROOT" && !skel->parents.empty()) throw BvhParseError(tz.line, "multiple ROOT joints");
      const std::string name = tz.next();
      tz.expect("{");
      skel->names.push_back(name);
      skel->parents.push_back(stack.empty() ? -1 : stack.back());
      skel->offsets.push_back({});
      layout.emplace_back();
      stack.push_back(static_cast<int>(skel->names.size()) - 1);
    } else if (tok == "End") {
      tz.expect("Site");
      tz.expect("{");
      tz.expect("OFFSET");
      tz.number(), tz.number(), tz.number();
      tz.expect("}");
    } else if (tok == "OFFSET") {
      if (stack.empty()) throw BvhParseError(tz.line, "OFFSET outside of a joint");
      Vec3 o;
      o.x = tz.number();
      o.y = tz.number();
      o.z = tz.number();
      skel->offsets[stack.back()] = o;
    } else if (tok == "CHANNELS") {
      if (stack.empty()) throw BvhParseError(tz.line, "CHANNELS outside of a joint");
      const double n = tz.number();
      if (n < 0 || n > 6 || n != std::floor(n)) throw BvhParseError(tz.line, "invalid channel count");
      auto& jc = layout[stack.back()];
      for (int c = 0; c < static_cast<int>(n); ++c) {
        const std::string cname = tz.next();
        jc.channels.push_back(parse_channel(cname, tz.line));
        if (cname[1] == 'r') jc.order.push_back(cname[0]);
      }
      if (jc.order.size() != 0 && jc.order.size() != 3) {
        throw BvhParseError(tz.line, "joint must have zero or three rotation channels");
      }
    } else if (tok == "}") {
      if (stack.empty()) throw BvhParseError(tz.line, "unbalanced '}'");
      stack.pop_back();
      if (stack.empty()) break;
    } else if (tok.empty()) {
      throw BvhParseError(tz.line, "unexpected end of file in HIERARCHY");
    } else {
      throw BvhParseError(tz.line, "unexpected token '" + tok + "'");
    }
    tok = tz.next();
  }

  const int j = static_cast<int>(skel->names.size());
  skel->rotation_orders.resize(j);
  for (int k = 0; k < j; ++k) skel->rotation_orders[k] = layout[k].order.empty() ? "ZYX" : layout[k].order;
  skel->mirror_map = infer_mirror_map(skel->names);
  skel->foot_joints = infer_foot_joints(skel->names);
  try {
    skel->validate();
  } catch (const std::invalid_argument& e) {
    throw BvhParseError(tz.line, e.what());
  }

  tz.expect("MOTION");
  tz.expect("Frames:");
  const double frames_d = tz.number();
  if (frames_d < 0 || frames_d != std::floor(frames_d)) throw BvhParseError(tz.line, "invalid frame count");
  tz.expect("Frame");
  tz.expect("Time:");
  const double frame_time = tz.number();
  if (!(frame_time > 0)) throw BvhParseError(tz.line, "frame time must be positive");
  if (!tz.finish_line().empty()) throw BvhParseError(tz.line - 1, "unexpected text after frame time");

  BvhData out;
  out.skeleton = skel;
  out.clip.skeleton = skel;
  out.clip.fps = 1.0 / frame_time;
  const auto n_frames = static_cast<std::size_t>(frames_d);
  out.clip.frames.reserve(n_frames);
  for (std::size_t f = 0; f < n_frames; ++f) {
    FrameState fs = rest_frame(*skel);
    const std::size_t frame_line = tz.line;
    for (int k = 0; k < j; ++k) {
      std::array<double, 3> angles{};
      int r = 0;
      for (Channel c : layout[k].channels) {
        const std::string t = tz.next();
        if (t.empty()) throw BvhParseError(frame_line, "channel-count mismatch: frame ended early");
        if (tz.line != frame_line) {
          throw BvhParseError(frame_line, "channel-count mismatch: frame " + std::to_string(f) + " is short");
        }
        double v;
        try {
          std::size_t used = 0;
          v = std::stod(t, &used);
          if (used != t.size()) throw std::invalid_argument(t);
        } catch (const std::exception&) {
          throw BvhParseError(tz.line, "expected a number, found '" + t + "'");
        }
        if (!std::isfinite(v)) throw BvhParseError(tz.line, "non-finite value '" + t + "'");
        switch (c) {
          case Channel::Xpos: if (k == 0) fs.r.x = v; break;
          case Channel::Ypos: if (k == 0) fs.r.y = v; break;
          case Channel::Zpos: if (k == 0) fs.r.z = v; break;
          default: angles[r++] = v; break;
        }
      }
      if (r == 3) fs.q[k] = euler_to_quat(layout[k].order, angles);
    }
    out.clip.frames.push_back(std::move(fs));
    // Anything left on the line means too many channels.
    if (!tz.finish_line().empty()) {
      throw BvhParseError(frame_line, "channel-count mismatch: extra values on frame " + std::to_string(f));
    }
  }
  return out;
}

inline BvhData parse_bvh_string(const std::string& text) {
  std::istringstream in(text);
  return parse_bvh(in);
}

inline BvhData load_bvh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_bvh(in);
}

// Root gets 6 channels (positions + rotations), other joints rotations only.
inline void write_bvh(std::ostream& out, const Skeleton& skeleton, const MotionClip& clip) {
  const int j = skeleton.joint_count();
  auto order_of = [&](int k) {
    return k < static_cast<int>(skeleton.rotation_orders.size()) && skeleton.rotation_orders[k].size() == 3
               ? skeleton.rotation_orders[k]
               : std::string("ZYX");
  };
  std::vector<std::vector<int>> children(j);
  for (int k = 1; k < j; ++k) children[skeleton.parents[k]].push_back(k);

  out << std::setprecision(9);
  out << "HIERARCHY\n";
  auto emit = [&](auto&& self, int k, int depth) -> void {
    const std::string ind(static_cast<std::size_t>(depth) * 2, ' ');
    out << ind << (k == 0 ? "ROOT " : "JOINT ") << skeleton.names[k] << "\n" << ind << "{\n";
    const Vec3& o = skeleton.offsets[k];
    out << ind << "  OFFSET " << o.x << " " << o.y << " " << o.z << "\n";
    const std::string ord = order_of(k);
    out << ind << "  CHANNELS " << (k == 0 ? 6 : 3);
    if (k == 0) out << " Xposition Yposition Zposition";
    for (char a : ord) out << " " << a << "rotation";
    out << "\n";
    if (children[k].empty()) {
      out << ind << "  End Site\n" << ind << "  {\n" << ind << "    OFFSET 0 0 0\n" << ind << "  }\n";
    }
    for (int c : children[k]) self(self, c, depth + 1);
    out << ind << "}\n";
  };
  emit(emit, 0, 0);
  out << "MOTION\nFrames: " << clip.frames.size() << "\nFrame Time: " << std::setprecision(12)
      << 1.0 / clip.fps << "\n"
      << std::setprecision(10);
  for (const auto& f : clip.frames) {
    out << f.r.x << " " << f.r.y << " " << f.r.z;
    for (int k = 0; k < j; ++k) {
      const auto e = quat_to_euler(order_of(k), f.q[k]);
      out << " " << e[0] << " " << e[1] << " " << e[2];
    }
    out << "\n";
  }
}

inline void save_bvh(const std::string& path, const Skeleton& skeleton, const MotionClip& clip) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_bvh(out, skeleton, clip);
}

}  // namespace inbetween
