#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "inbetween/data/features.hpp"
#include "inbetween/data/synthetic.hpp"
#include "inbetween/eval/benchmark.hpp"
#include "inbetween/io/weights.hpp"
#include "inbetween/service/inference.hpp"

namespace inbetween {

struct PreparedData {
  std::shared_ptr<const Skeleton> skeleton;
  std::vector<MotionWindow> train, test;
  NormStats stats;  // from unmirrored training windows
};

inline PreparedData prepare_data(const std::vector<MotionClip>& clips, std::shared_ptr<const Skeleton> skeleton) {
  PreparedData d;
  d.skeleton = std::move(skeleton);
  d.train = make_windows(clips, lafan_train_spec()).windows;
  d.test = make_windows(clips, lafan_test_spec()).windows;
  if (d.train.empty()) throw std::runtime_error("no training windows (subjects 1-4, 50 frames)");
  d.stats = compute_norm_stats(d.train);
  return d;
}

inline PreparedData prepare_data(const std::string& dir, double contact_threshold) {
  Corpus c = load_corpus(dir, contact_threshold);
  return prepare_data(c.clips, c.skeleton);
}

struct TrainOptions {
  std::string out_path;         // final weights; empty skips
  std::string checkpoint_path;  // periodic checkpoints; empty skips
  std::string resume_path;      // checkpoint to continue from
  std::ostream* log = nullptr;  // tab-separated loss log
  std::function<void(const IterationLog&)> on_iteration;
};

// Narrower networks for the four-joint procedural corpus; every other setting keeps its default.
inline ModelConfig toy_training_config() {
  ModelConfig c;
  c.generator.joints = 4;
  c.generator.encoder_hidden = 128;
  c.generator.encoder_out = 64;
  c.generator.lstm_hidden = 192;
  c.generator.decoder_hidden1 = 128;
  c.generator.decoder_hidden2 = 64;
  c.critic.hidden1 = 128;
  c.critic.hidden2 = 64;
  c.train.contact_threshold = kToyContactThreshold;
  return c;
}

template <class T>
std::unique_ptr<Model<T>> train_model(ModelConfig cfg, const PreparedData& data, const TrainOptions& opt = {}) {
  cfg.generator.joints = data.skeleton->joint_count();
  std::unique_ptr<Model<T>> model;
  WeightsContainer resume;
  if (!opt.resume_path.empty()) {
    resume = load_weights(opt.resume_path);
    model = model_from_container<T>(resume);
    // Architecture and hyperparameters come from the checkpoint; run length and cadence from the caller.
    const TrainConfig run = cfg.train;
    cfg = model->cfg;
    cfg.train.iterations = run.iterations;
    cfg.train.log_every = run.log_every;
    cfg.train.checkpoint_every = run.checkpoint_every;
    model->cfg = cfg;
  } else {
    model = std::make_unique<Model<T>>(cfg, data.skeleton, data.stats);
    std::mt19937_64 rng(cfg.train.seed);
    model->init(rng);
  }
  Trainer<T> trainer(*model, data.train);
  if (!opt.resume_path.empty()) restore_trainer(resume, trainer);
  if (opt.log && trainer.iteration() == 0) write_log_header(*opt.log);
  const auto& tc = cfg.train;
  trainer.run(tc.iterations, [&](const IterationLog& l) {
    if (opt.log && tc.log_every > 0 && l.iteration % tc.log_every == 0) {
      write_log_line(*opt.log, l);
      opt.log->flush();
    }
    if (opt.on_iteration) opt.on_iteration(l);
    if (!opt.checkpoint_path.empty() && tc.checkpoint_every > 0 && trainer.iteration() % tc.checkpoint_every == 0)
      save_checkpoint(opt.checkpoint_path, *model, trainer);
    return true;
  });
  if (!opt.out_path.empty()) save_model(opt.out_path, *model);
  return model;
}

// Benchmark method backed by a model, noise off.
template <class T>
TransitionMethod model_method(Model<T>& m) {
  return [&m](const std::vector<FrameState>& seed, const FrameState& target, int L) {
    return generate_transition(m.generator, seed, target, L, 0.0, 0).frames;
  };
}

inline std::string hex32(std::uint32_t v) {
  char b[9];
  std::snprintf(b, sizeof b, "%08x", v);
  return b;
}

// Checksum of the file bytes, used to identify a served model.
inline std::string file_fingerprint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return hex32(detail::crc(bytes.data(), bytes.size()));
}

}  // namespace inbetween
