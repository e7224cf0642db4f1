#pragma once

#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "inbetween/model/model.hpp"
#include "inbetween/model/schedule.hpp"
#include "inbetween/nn/optim.hpp"

namespace inbetween {

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IterationLog {
  long iteration = 0;
  long epoch = 0;
  int length = 0;
  int current_max = 0;
  LossComponents loss;
};

inline void write_log_header(std::ostream& out) {
  out << "iteration\tL_quat\tL_root\tL_pos\tL_contacts\tL_gen\tL_disc\tlength\ttotal\n";
}

inline void write_log_line(std::ostream& out, const IterationLog& l) {
  out << l.iteration << std::setprecision(8) << '\t' << l.loss.quat << '\t' << l.loss.root << '\t' << l.loss.pos
      << '\t' << l.loss.contacts << '\t' << l.loss.gen << '\t' << l.loss.disc << '\t' << l.length << '\t'
      << l.loss.total << '\n';
}

template <class T>
class Trainer {
 public:
  Trainer(Model<T>& model, std::vector<MotionWindow> windows)
      : model_(model),
        windows_(std::move(windows)),
        rng_(model.cfg.train.seed),
        gen_opt_(model.generator.parameters(), model.cfg.train.optimizer),
        critic_opt_(model.critic_parameters(), model.cfg.train.optimizer) {
    const auto errors = model.cfg.validate();
    if (!errors.empty()) throw std::invalid_argument(errors.front());
    if (windows_.empty()) throw std::invalid_argument("trainer: no training windows");
    const int need = model.cfg.generator.past + model.cfg.train.curriculum.p_max + 1;
    for (const auto& w : windows_) {
      if (w.size() < need || w.past != model.cfg.generator.past)
        throw std::invalid_argument("trainer: windows must hold past + P_max + 1 frames");
    }
  }

  long iterations_per_epoch() const {
    const auto& t = model_.cfg.train;
    if (t.iterations_per_epoch > 0) return t.iterations_per_epoch;
    return std::max<long>(1, static_cast<long>((windows_.size() + t.batch - 1) / t.batch));
  }
  long epoch() const { return iteration_ / iterations_per_epoch(); }
  long iteration() const { return iteration_; }
  int current_max() const { return curriculum_max(epoch(), model_.cfg.train.curriculum); }

  // One critic update followed by one generator update.
  IterationLog step() {
    try {
      return step_impl();
    } catch (const DegenerateQuaternion& e) {
      throw DivergenceError("iteration " + std::to_string(iteration_) + ": " + e.what());
    } catch (const NonFiniteError& e) {
      throw DivergenceError("iteration " + std::to_string(iteration_) + ": " + e.what());
    }
  }

 private:
  IterationLog step_impl() {
    const auto& tc = model_.cfg.train;
    IterationLog log;
    log.iteration = iteration_;
    log.epoch = epoch();
    log.current_max = current_max();
    const int L = sample_length(rng_, tc.curriculum.p_min, log.current_max);
    log.length = L;

    std::vector<ModelInputs> examples;
    examples.reserve(static_cast<std::size_t>(tc.batch));
    std::uniform_int_distribution<std::size_t> pick(0, windows_.size() - 1);
    for (int e = 0; e < tc.batch; ++e) {
      const auto& w = windows_[pick(rng_)];
      examples.push_back(assemble_example(w, L, tc.mirror ? &rng_ : nullptr));
    }
    const Batch<T> b = make_batch<T>(examples);
    const auto& gc = model_.cfg.generator;
    const nn::Tensor<T> z = sample_target_noise<T>(b.size, gc.z_target_dim(), gc.sigma_target, rng_);
    const bool adversarial = tc.losses.gen > 0;

    nn::Graph<T> g;
    auto vars = generator_loss(g, model_, b, gc.sigma_target > 0 ? &z : nullptr, false);

    if (adversarial) {
      std::vector<nn::Tensor<T>> pq, pr;
      for (int s = 0; s < L; ++s) {
        pq.push_back(g.value(vars.rollout.q[s]));
        pr.push_back(g.value(vars.rollout.r[s]));
      }
      critic_opt_.zero_grad();
      nn::Graph<T> cg;
      nn::Var dl = critic_loss(cg, model_, b, pq, pr);
      log.loss.disc = static_cast<double>(cg.scalar(dl));
      guard(log.loss.disc, "L_disc");
      cg.backward(dl);
      critic_opt_.step();
      // Append the adversarial term using the freshly updated critics.
      add_adversarial_term(g, model_, b, vars);
    }

    log.loss.quat = static_cast<double>(g.scalar(vars.quat));
    log.loss.root = static_cast<double>(g.scalar(vars.root));
    log.loss.pos = static_cast<double>(g.scalar(vars.pos));
    if (gc.include_contacts) log.loss.contacts = static_cast<double>(g.scalar(vars.contacts));
    if (adversarial) log.loss.gen = static_cast<double>(g.scalar(vars.gen));
    log.loss.total = static_cast<double>(g.scalar(vars.total));
    guard(log.loss.quat, "L_quat");
    guard(log.loss.root, "L_root");
    guard(log.loss.pos, "L_pos");
    guard(log.loss.contacts, "L_contacts");
    guard(log.loss.gen, "L_gen");
    guard(log.loss.total, "total loss");

    gen_opt_.zero_grad();
    g.backward(vars.total);
    gen_opt_.step();
    ++iteration_;
    return log;
  }


 public:
  // Runs until `until` iterations; calls `on_iteration` after every step (return false to stop early).
  void run(long until, const std::function<bool(const IterationLog&)>& on_iteration = {}) {
    while (iteration_ < until) {
      const auto l = step();
      if (on_iteration && !on_iteration(l)) break;
    }
  }

  nn::AmsGrad<T>& generator_optimizer() { return gen_opt_; }
  nn::AmsGrad<T>& critic_optimizer() { return critic_opt_; }
  std::mt19937_64& rng() { return rng_; }
  void set_iteration(long it) { iteration_ = it; }

  std::string rng_state() const {
    std::ostringstream s;
    s << rng_;
    return s.str();
  }
  void set_rng_state(const std::string& state) {
    std::istringstream s(state);
    s >> rng_;
    if (!s) throw std::runtime_error("invalid rng state in checkpoint");
  }

 private:
  Model<T>& model_;
  std::vector<MotionWindow> windows_;
  std::mt19937_64 rng_;
  nn::AmsGrad<T> gen_opt_, critic_opt_;
  long iteration_ = 0;

  void guard(double v, const char* what) const {
    if (!std::isfinite(v)) {
      throw DivergenceError(std::string(what) + " is not finite at iteration " + std::to_string(iteration_));
    }
  }
};

}  // namespace inbetween
