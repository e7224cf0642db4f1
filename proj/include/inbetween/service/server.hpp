#pragma once

#include <cstdio>
#include <memory>
#include <string>

#include "httplib.h"

#include "inbetween/core/kinematics.hpp"
#include "inbetween/service/schema.hpp"

namespace inbetween {

inline constexpr const char* kTimingHeader = "X-Inference-Ms";

// Routes for one loaded model. Handlers only read the model, so requests may run concurrently.
template <class T>
class InferenceService {
 public:
  InferenceService(std::shared_ptr<Model<T>> model, std::string fingerprint)
      : model_(std::move(model)), fingerprint_(std::move(fingerprint)) {}

  void install(httplib::Server& srv) {
    srv.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
      const auto& g = model_->cfg.generator;
      json(res, 200,
           {{"status", "ok"}, {"model", fingerprint_}, {"joints", g.joints}, {"past", g.past},
            {"max_transition", g.max_transition}});
    });
    srv.Get("/skeleton", [this](const httplib::Request&, httplib::Response& res) {
      Json j = skeleton_to_json(*model_->skeleton);
      j["height"] = skeleton_height(*model_->skeleton);
      json(res, 200, j);
    });
    srv.Post("/generate", [this](const httplib::Request& req, httplib::Response& res) {
      handle(req, res, [this](const TransitionRequest& r) { return run_transition(*model_, r); }, true);
    });
    srv.Post("/interpolate", [this](const httplib::Request& req, httplib::Response& res) {
      handle(req, res, [this](const TransitionRequest& r) {
        return run_interpolation(*model_->skeleton, model_->cfg.generator.past, r);
      }, false);
    });
  }

  const Model<T>& model() const { return *model_; }
  const std::string& fingerprint() const { return fingerprint_; }

 private:
  std::shared_ptr<Model<T>> model_;
  std::string fingerprint_;

  static void json(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  template <class F>
  static void handle(const httplib::Request& req, httplib::Response& res, F&& run, bool contacts) {
    Json body;
    try {
      body = Json::parse(req.body);
    } catch (const Json::parse_error& e) {
      json(res, 400, errors_to_json(std::vector<FieldError>{{"$", std::string("malformed JSON: ") + e.what()}}));
      return;
    }
    try {
      const TransitionRequest r = parse_request(body);
      const TransitionResponse out = run(r);
      char ms[32];
      std::snprintf(ms, sizeof ms, "%.3f", out.timing_ms);
      res.set_header(kTimingHeader, ms);
      json(res, 200, response_to_json(out, contacts));
    } catch (const SchemaError& e) {
      json(res, 400, errors_to_json(e.errors));
    } catch (const UnprocessableRequest& e) {
      json(res, 422, {{"error", e.what()}});
    } catch (const std::exception& e) {
      json(res, 500, {{"error", e.what()}});
    }
  }
};

}  // namespace inbetween
