#pragma once

#include <stdexcept>
#include <string>

#include "json.hpp"

#include "inbetween/core/skeleton.hpp"
#include "inbetween/data/features.hpp"
#include "inbetween/model/config.hpp"

namespace inbetween {

using Json = nlohmann::json;

inline Json skeleton_to_json(const Skeleton& s) {
  Json offsets = Json::array();
  for (const auto& o : s.offsets) offsets.push_back({o.x, o.y, o.z});
  return {{"names", s.names},
          {"parents", s.parents},
          {"offsets", offsets},
          {"mirror_map", s.mirror_map},
          {"foot_joints", s.foot_joints},
          {"rotation_orders", s.rotation_orders}};
}

inline Skeleton skeleton_from_json(const Json& j) {
  Skeleton s;
  s.names = j.at("names").get<std::vector<std::string>>();
  s.parents = j.at("parents").get<std::vector<int>>();
  for (const auto& o : j.at("offsets")) s.offsets.push_back({o.at(0).get<double>(), o.at(1).get<double>(), o.at(2).get<double>()});
  s.mirror_map = j.at("mirror_map").get<std::vector<int>>();
  s.foot_joints = j.at("foot_joints").get<std::array<int, kContactCount>>();
  s.rotation_orders = j.value("rotation_orders", std::vector<std::string>(s.names.size(), "ZYX"));
  s.validate();
  return s;
}

inline Json stats_to_json(const NormStats& s) { return {{"mean", s.mean}, {"std", s.std}}; }

inline NormStats stats_from_json(const Json& j) {
  NormStats s;
  s.mean = j.at("mean").get<std::vector<double>>();
  s.std = j.at("std").get<std::vector<double>>();
  if (s.mean.size() != s.std.size()) throw std::invalid_argument("norm stats: mean and std sizes differ");
  return s;
}

inline Json config_to_json(const ModelConfig& c) {
  const auto& g = c.generator;
  const auto& k = c.critic;
  const auto& t = c.train;
  return {
      {"generator",
       {{"joints", g.joints},
        {"state_input", to_string(g.state_input)},
        {"include_contacts", g.include_contacts},
        {"encoder_hidden", g.encoder_hidden},
        {"encoder_out", g.encoder_out},
        {"lstm_hidden", g.lstm_hidden},
        {"decoder_hidden1", g.decoder_hidden1},
        {"decoder_hidden2", g.decoder_hidden2},
        {"tta_basis", g.tta_basis},
        {"past", g.past},
        {"max_transition", g.max_transition},
        {"sigma_target", g.sigma_target},
        {"tta_on_all_encoders", g.tta_on_all_encoders}}},
      {"critic",
       {{"hidden1", k.hidden1},
        {"hidden2", k.hidden2},
        {"long_window", k.long_window},
        {"short_window", k.short_window},
        {"input_scale", k.input_scale}}},
      {"train",
       {{"batch", t.batch},
        {"iterations", t.iterations},
        {"iterations_per_epoch", t.iterations_per_epoch},
        {"seed", t.seed},
        {"mirror", t.mirror},
        {"use_double", t.use_double},
        {"log_every", t.log_every},
        {"checkpoint_every", t.checkpoint_every},
        {"lr", t.optimizer.lr},
        {"beta1", t.optimizer.beta1},
        {"beta2", t.optimizer.beta2},
        {"eps", t.optimizer.eps},
        {"w_quat", t.losses.quat},
        {"w_root", t.losses.root},
        {"w_pos", t.losses.pos},
        {"w_gen", t.losses.gen},
        {"w_contacts", t.losses.contacts},
        {"p_min", t.curriculum.p_min},
        {"p_max", t.curriculum.p_max},
        {"n_ep_max", t.curriculum.n_ep_max},
        {"contact_threshold", t.contact_threshold}}}};
}

inline StateInputMode state_input_from_string(const std::string& s) {
  if (s == "quaternions") return StateInputMode::quaternions;
  if (s == "quaternion_velocities") return StateInputMode::quaternion_velocities;
  throw std::invalid_argument("unknown state_input mode: " + s);
}

inline ModelConfig config_from_json(const Json& j) {
  ModelConfig c;
  const auto& g = j.at("generator");
  c.generator.joints = g.at("joints");
  c.generator.state_input = state_input_from_string(g.at("state_input"));
  c.generator.include_contacts = g.at("include_contacts");
  c.generator.encoder_hidden = g.at("encoder_hidden");
  c.generator.encoder_out = g.at("encoder_out");
  c.generator.lstm_hidden = g.at("lstm_hidden");
  c.generator.decoder_hidden1 = g.at("decoder_hidden1");
  c.generator.decoder_hidden2 = g.at("decoder_hidden2");
  c.generator.tta_basis = g.at("tta_basis");
  c.generator.past = g.at("past");
  c.generator.max_transition = g.at("max_transition");
  c.generator.sigma_target = g.at("sigma_target");
  c.generator.tta_on_all_encoders = g.at("tta_on_all_encoders");
  const auto& k = j.at("critic");
  c.critic.hidden1 = k.at("hidden1");
  c.critic.hidden2 = k.at("hidden2");
  c.critic.long_window = k.at("long_window");
  c.critic.short_window = k.at("short_window");
  c.critic.input_scale = k.at("input_scale");
  const auto& t = j.at("train");
  c.train.batch = t.at("batch");
  c.train.iterations = t.at("iterations");
  c.train.iterations_per_epoch = t.at("iterations_per_epoch");
  c.train.seed = t.at("seed");
  c.train.mirror = t.at("mirror");
  c.train.use_double = t.at("use_double");
  c.train.log_every = t.at("log_every");
  c.train.checkpoint_every = t.at("checkpoint_every");
  c.train.optimizer.lr = t.at("lr");
  c.train.optimizer.beta1 = t.at("beta1");
  c.train.optimizer.beta2 = t.at("beta2");
  c.train.optimizer.eps = t.at("eps");
  c.train.losses.quat = t.at("w_quat");
  c.train.losses.root = t.at("w_root");
  c.train.losses.pos = t.at("w_pos");
  c.train.losses.gen = t.at("w_gen");
  c.train.losses.contacts = t.at("w_contacts");
  c.train.curriculum.p_min = t.at("p_min");
  c.train.curriculum.p_max = t.at("p_max");
  c.train.curriculum.n_ep_max = t.at("n_ep_max");
  c.train.contact_threshold = t.at("contact_threshold");
  return c;
}

}  // namespace inbetween
