#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "inbetween/io/json_codec.hpp"
#include "inbetween/service/inference.hpp"

namespace inbetween {

struct FieldError {
  std::string field;
  std::string message;
};

// Malformed payload: wrong types, missing fields, non-finite numbers.
class SchemaError : public std::invalid_argument {
 public:
  explicit SchemaError(std::vector<FieldError> e) : std::invalid_argument(summary(e)), errors(std::move(e)) {}
  std::vector<FieldError> errors;

 private:
  static std::string summary(const std::vector<FieldError>& e) {
    std::string s;
    for (const auto& f : e) s += (s.empty() ? "" : "; ") + f.field + ": " + f.message;
    return s;
  }
};

namespace detail {
struct SchemaReader {
  std::vector<FieldError> errors;

  void fail(const std::string& field, const std::string& msg) { errors.push_back({field, msg}); }

  bool number(const Json& j, const std::string& field, double& out) {
    if (!j.is_number()) return fail(field, "expected a number"), false;
    out = j.get<double>();
    if (!std::isfinite(out)) return fail(field, "must be finite"), false;
    return true;
  }

  bool vec(const Json& j, const std::string& field, std::size_t n, std::vector<double>& out) {
    if (!j.is_array() || j.size() != n) return fail(field, "expected an array of " + std::to_string(n) + " numbers"), false;
    out.assign(n, 0.0);
    bool ok = true;
    for (std::size_t i = 0; i < n; ++i) ok = number(j[i], field + "[" + std::to_string(i) + "]", out[i]) && ok;
    return ok;
  }

  FrameState frame(const Json& j, const std::string& field) {
    FrameState f;
    if (!j.is_object()) {
      fail(field, "expected an object with \"q\" and \"r\"");
      return f;
    }
    if (!j.contains("q") || !j["q"].is_array()) {
      fail(field + ".q", "expected an array of [w,x,y,z] quaternions");
    } else {
      const auto& q = j["q"];
      for (std::size_t k = 0; k < q.size(); ++k) {
        std::vector<double> v;
        const std::string at = field + ".q[" + std::to_string(k) + "]";
        if (vec(q[k], at, 4, v)) {
          if (std::hypot(std::hypot(v[0], v[1]), std::hypot(v[2], v[3])) < 1e-12) fail(at, "zero quaternion");
          f.q.push_back({v[0], v[1], v[2], v[3]});
        }
      }
    }
    std::vector<double> r;
    if (!j.contains("r")) fail(field + ".r", "missing");
    else if (vec(j["r"], field + ".r", 3, r)) f.r = {r[0], r[1], r[2]};
    return f;
  }
};
}  // namespace detail

inline TransitionRequest parse_request(const Json& j) {
  detail::SchemaReader rd;
  TransitionRequest req;
  if (!j.is_object()) throw SchemaError(std::vector<FieldError>{{"$", "request body must be a JSON object"}});
  static const char* known[] = {"past", "target", "length", "variation", "seed", "apply_ik"};
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* n : known) ok = ok || k == n;
    if (!ok) rd.fail(k, "unknown field");
  }
  if (!j.contains("past") || !j["past"].is_array()) {
    rd.fail("past", "expected an array of frames");
  } else {
    for (std::size_t i = 0; i < j["past"].size(); ++i) req.past.push_back(rd.frame(j["past"][i], "past[" + std::to_string(i) + "]"));
  }
  if (!j.contains("target")) rd.fail("target", "missing");
  else req.target = rd.frame(j["target"], "target");
  if (!j.contains("length") || !j["length"].is_number_integer()) rd.fail("length", "expected an integer");
  else req.length = j["length"].get<int>();
  if (j.contains("variation")) {
    if (rd.number(j["variation"], "variation", req.variation) && req.variation < 0)
      rd.fail("variation", "must be nonnegative");
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) rd.fail("seed", "expected a nonnegative integer");
    else req.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("apply_ik")) {
    if (!j["apply_ik"].is_boolean()) rd.fail("apply_ik", "expected a boolean");
    else req.apply_ik = j["apply_ik"].get<bool>();
  }
  if (!rd.errors.empty()) throw SchemaError(rd.errors);
  return req;
}

inline Json frame_to_json(const FrameState& f, bool with_contacts) {
  Json q = Json::array();
  for (const auto& x : f.q) q.push_back({x.w, x.x, x.y, x.z});
  Json out = {{"q", q}, {"r", {f.r.x, f.r.y, f.r.z}}};
  if (with_contacts) out["contacts"] = f.c;
  return out;
}

inline Json response_to_json(const TransitionResponse& r, bool with_contacts = true) {
  Json frames = Json::array();
  for (const auto& f : r.frames) frames.push_back(frame_to_json(f, with_contacts));
  const auto& y = r.applied_yaw;
  return {{"length", r.frames.size()}, {"frames", frames}, {"applied_yaw", {y.w, y.x, y.y, y.z}}, {"warnings", r.warnings}};
}

inline Json request_to_json(const TransitionRequest& r) {
  Json past = Json::array();
  for (const auto& f : r.past) past.push_back(frame_to_json(f, false));
  return {{"past", past},
          {"target", frame_to_json(r.target, false)},
          {"length", r.length},
          {"variation", r.variation},
          {"seed", r.seed},
          {"apply_ik", r.apply_ik}};
}

inline Json errors_to_json(const std::vector<FieldError>& e) {
  Json arr = Json::array();
  for (const auto& f : e) arr.push_back({{"field", f.field}, {"message", f.message}});
  return {{"error", "invalid request"}, {"details", arr}};
}

}  // namespace inbetween
