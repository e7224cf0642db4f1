#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "inbetween/nn/optim.hpp"

namespace inbetween {

enum class StateInputMode { quaternions, quaternion_velocities };

inline std::string to_string(StateInputMode m) {
  return m == StateInputMode::quaternions ? "quaternions" : "quaternion_velocities";
}

struct GeneratorConfig {
  int joints = 22;
  StateInputMode state_input = StateInputMode::quaternions;
  bool include_contacts = true;
  int encoder_hidden = 512;
  int encoder_out = 256;  // width of every encoder output and of z_tta
  int lstm_hidden = 512;
  int decoder_hidden1 = 512;
  int decoder_hidden2 = 256;
  double tta_basis = 10000.0;
  int past = 10;
  int max_transition = 30;  // P_max
  double sigma_target = 0.5;
  bool tta_on_all_encoders = true;

  int t_max_tta() const { return max_transition + past - 5; }
  int tta_dim() const { return encoder_out; }
  int z_target_dim() const { return 2 * encoder_out; }
  int contact_dim() const { return include_contacts ? 4 : 0; }
  int state_input_dim() const { return 4 * joints + 3 + contact_dim(); }
  int offset_input_dim() const { return 3 + 4 * joints; }
  int target_input_dim() const { return 4 * joints; }
  int lstm_input_dim() const { return 3 * encoder_out; }
  int decoder_output_dim() const { return 4 * joints + 3 + contact_dim(); }

  std::vector<std::string> validate() const {
    std::vector<std::string> e;
    if (joints < 1) e.push_back("generator.joints must be at least 1");
    if (encoder_hidden < 1) e.push_back("generator.encoder_hidden must be positive");
    if (encoder_out < 2 || encoder_out % 2) e.push_back("generator.encoder_out must be a positive even number");
    if (lstm_hidden < 1) e.push_back("generator.lstm_hidden must be positive");
    if (decoder_hidden1 < 1 || decoder_hidden2 < 1) e.push_back("generator.decoder widths must be positive");
    if (!(tta_basis > 1)) e.push_back("generator.tta_basis must exceed 1");
    if (past < 2) e.push_back("generator.past must be at least 2");
    if (max_transition < 5) e.push_back("generator.max_transition must be at least 5");
    if (!(sigma_target >= 0)) e.push_back("generator.sigma_target must be nonnegative");
    return e;
  }
};

struct CriticConfig {
  int hidden1 = 512;
  int hidden2 = 256;
  int long_window = 10;
  int short_window = 2;
  double input_scale = 1.0;  // multiplies positions before feature extraction

  std::vector<std::string> validate() const {
    std::vector<std::string> e;
    if (hidden1 < 1 || hidden2 < 1) e.push_back("critic widths must be positive");
    if (long_window < 1 || short_window < 1) e.push_back("critic windows must be positive");
    if (!(input_scale > 0)) e.push_back("critic.input_scale must be positive");
    return e;
  }
};

struct LossWeights {
  double quat = 1.0;
  double root = 1.0;
  double pos = 0.5;
  double gen = 0.1;
  double contacts = 0.1;

  std::vector<std::string> validate() const {
    std::vector<std::string> e;
    for (double w : {quat, root, pos, gen, contacts})
      if (!(w >= 0)) e.push_back("loss weights must be nonnegative");
    return e;
  }
};

struct CurriculumConfig {
  int p_min = 5;
  int p_max = 30;
  int n_ep_max = 3;
};

struct TrainConfig {
  int batch = 32;
  long iterations = 20000;
  long iterations_per_epoch = 0;  // 0 derives it from the window count and batch size
  std::uint64_t seed = 1234;
  bool mirror = true;
  bool use_double = false;
  long log_every = 1;
  long checkpoint_every = 1000;
  nn::AmsGradConfig optimizer;
  LossWeights losses;
  CurriculumConfig curriculum;
  double contact_threshold = 0.2;

  std::vector<std::string> validate() const {
    std::vector<std::string> e = losses.validate();
    if (batch < 1) e.push_back("train.batch must be positive");
    if (iterations < 0) e.push_back("train.iterations must be nonnegative");
    if (iterations_per_epoch < 0) e.push_back("train.iterations_per_epoch must be nonnegative");
    if (!(optimizer.lr > 0)) e.push_back("train.lr must be positive");
    if (!(optimizer.beta1 >= 0 && optimizer.beta1 < 1)) e.push_back("train.beta1 must lie in [0, 1)");
    if (!(optimizer.beta2 >= 0 && optimizer.beta2 < 1)) e.push_back("train.beta2 must lie in [0, 1)");
    if (!(optimizer.eps > 0)) e.push_back("train.eps must be positive");
    if (curriculum.p_min < 1) e.push_back("curriculum.p_min must be positive");
    if (curriculum.p_max < curriculum.p_min) e.push_back("curriculum.p_max must be at least p_min");
    if (curriculum.n_ep_max < 0) e.push_back("curriculum.n_ep_max must be nonnegative");
    if (!(contact_threshold > 0)) e.push_back("train.contact_threshold must be positive");
    return e;
  }
};

struct ModelConfig {
  GeneratorConfig generator;
  CriticConfig critic;
  TrainConfig train;

  std::vector<std::string> validate() const {
    auto e = generator.validate();
    for (auto& s : critic.validate()) e.push_back(s);
    for (auto& s : train.validate()) e.push_back(s);
    if (train.curriculum.p_max != generator.max_transition)
      e.push_back("curriculum.p_max must equal generator.max_transition");
    return e;
  }
};

}  // namespace inbetween
