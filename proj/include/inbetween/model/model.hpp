#pragma once

#include <memory>
#include <type_traits>
#include <random>
#include <stdexcept>
#include <vector>

#include "inbetween/model/critic.hpp"
#include "inbetween/model/generator.hpp"
#include "inbetween/model/losses.hpp"

namespace inbetween {

template <class T>
struct Model {
  ModelConfig cfg;
  std::shared_ptr<const Skeleton> skeleton;
  NormStats stats;
  Generator<T> generator;
  Critic<T> long_critic, short_critic;
  CriticSelectors<T> selectors{1};

  Model(const ModelConfig& c, std::shared_ptr<const Skeleton> s, NormStats st)
      : cfg(c), skeleton(std::move(s)), stats(std::move(st)), selectors(c.generator.joints) {
    if (!skeleton) throw std::invalid_argument("model needs a skeleton");
    if (skeleton->joint_count() != c.generator.joints)
      throw std::invalid_argument("generator.joints does not match the skeleton");
    if (stats.std.size() != static_cast<std::size_t>(3 * c.generator.joints))
      throw std::invalid_argument("norm stats do not match the skeleton");
    generator = Generator<T>(c.generator);
    long_critic = Critic<T>("long_critic", c.generator.joints, c.critic.long_window, c.critic);
    short_critic = Critic<T>("short_critic", c.generator.joints, c.critic.short_window, c.critic);
  }

  void init(std::mt19937_64& rng) {
    generator.init(rng);
    long_critic.init(rng);
    short_critic.init(rng);
  }

  std::vector<nn::Parameter<T>*> critic_parameters() {
    std::vector<nn::Parameter<T>*> p;
    long_critic.collect(p);
    short_critic.collect(p);
    return p;
  }

  std::vector<nn::Parameter<T>*> all_parameters() {
    auto p = generator.parameters();
    for (auto* c : critic_parameters()) p.push_back(c);
    return p;
  }
};

template <class T>
nn::Tensor<T> stack_rows(const std::vector<const nn::Tensor<T>*>& parts) {
  std::size_t rows = 0;
  const std::size_t cols = parts.at(0)->cols();
  for (auto* p : parts) rows += p->rows();
  nn::Tensor<T> out(rows, cols);
  std::size_t at = 0;
  for (auto* p : parts) {
    std::copy(p->values.begin(), p->values.end(), out.values.begin() + static_cast<std::ptrdiff_t>(at));
    at += p->values.size();
  }
  return out;
}

template <class T>
nn::Var scaled_features(nn::Graph<T>& g, Model<T>& m, nn::Var positions, std::size_t S, std::size_t B) {
  if (m.cfg.critic.input_scale != 1.0) positions = g.scale(positions, static_cast<T>(m.cfg.critic.input_scale));
  return critic_feature_graph(g, positions, S, B, m.selectors);
}

struct GeneratorLossVars {
  nn::Var total, quat, root, pos, contacts, gen;
  RolloutVars rollout;
  bool adversarial = false;
};

// Appends the LSGAN generator term: both critics score seed ++ generated transition ++ true target.
template <class T>
void add_adversarial_term(nn::Graph<T>& g, Model<T>& m, const Batch<T>& b, GeneratorLossVars& vars) {
  const int P = b.past, L = b.length;
  const std::size_t B = b.size;
  std::vector<const nn::Tensor<T>*> sq, sr;
  for (int i = 0; i < P; ++i) {
    sq.push_back(&b.q[i]);
    sr.push_back(&b.r[i]);
  }
  nn::Var seed_pos = g.fk(g.constant(stack_rows(sq)), g.constant(stack_rows(sr)), *m.skeleton);
  nn::Var target_pos = g.fk(g.constant(b.target_q), g.constant(b.target_r), *m.skeleton);
  std::vector<nn::Var> gq(vars.rollout.q.begin(), vars.rollout.q.begin() + L);
  std::vector<nn::Var> gr(vars.rollout.r.begin(), vars.rollout.r.begin() + L);
  nn::Var gen_pos = g.fk(g.concat_rows(gq), g.concat_rows(gr), *m.skeleton);
  const std::size_t S = static_cast<std::size_t>(P + L + 1);
  nn::Var f = scaled_features(g, m, g.concat_rows({seed_pos, gen_pos, target_pos}), S, B);
  vars.gen = g.scale(g.add(lsgan_generator(g, m.long_critic.score(g, f, S, B)),
                           lsgan_generator(g, m.short_critic.score(g, f, S, B))),
                     T(0.5));
  vars.total = g.add(vars.total, g.scale(vars.gen, static_cast<T>(m.cfg.train.losses.gen)));
  vars.adversarial = true;
}

// Reconstruction losses on the L transition frames plus the predicted target, and the LSGAN generator term.
template <class T>
GeneratorLossVars generator_loss(nn::Graph<T>& g, Model<T>& m, const Batch<T>& b, const std::type_identity_t<nn::Tensor<T>>* z_target,
                                 bool adversarial) {
  const LossWeights& w = m.cfg.train.losses;
  const int P = b.past, L = b.length;
  GeneratorLossVars out;
  out.rollout = m.generator.rollout(g, b, L + 1, z_target);
  std::vector<const nn::Tensor<T>*> tq, tr, tc;
  for (int i = P; i <= P + L; ++i) {
    tq.push_back(&b.q[i]);
    tr.push_back(&b.r[i]);
    tc.push_back(&b.contacts[i]);
  }
  nn::Var Q = g.concat_rows(out.rollout.q), R = g.concat_rows(out.rollout.r);
  nn::Var Qt = g.constant(stack_rows(tq)), Rt = g.constant(stack_rows(tr));
  out.quat = l1_mean(g, Q, Qt);
  out.root = l1_mean(g, R, Rt);
  nn::Var Pp = g.fk(Q, R, *m.skeleton);
  nn::Var Pt = g.fk(Qt, Rt, *m.skeleton);
  out.pos = position_loss(g, Pp, Pt, m.stats.std);
  nn::Var total = g.add(g.add(g.scale(out.quat, static_cast<T>(w.quat)), g.scale(out.root, static_cast<T>(w.root))),
                        g.scale(out.pos, static_cast<T>(w.pos)));
  if (m.cfg.generator.include_contacts) {
    out.contacts = l1_mean(g, g.concat_rows(out.rollout.contacts), g.constant(stack_rows(tc)));
    total = g.add(total, g.scale(out.contacts, static_cast<T>(w.contacts)));
  }
  out.total = total;
  if (adversarial) add_adversarial_term(g, m, b, out);
  return out;
}

// Critic loss on ground truth versus a detached generated transition (frames past..past+L-1).
template <class T>
nn::Var critic_loss(nn::Graph<T>& g, Model<T>& m, const Batch<T>& b, const std::vector<nn::Tensor<T>>& pred_q,
                    const std::vector<nn::Tensor<T>>& pred_r) {
  const int P = b.past, L = b.length;
  if (static_cast<int>(pred_q.size()) < L || static_cast<int>(pred_r.size()) < L)
    throw std::invalid_argument("critic_loss: missing generated frames");
  const std::size_t B = b.size, S = static_cast<std::size_t>(P + L + 1);
  std::vector<const nn::Tensor<T>*> rq, rr, fq, fr;
  for (int i = 0; i <= P + L; ++i) {
    rq.push_back(&b.q[i]);
    rr.push_back(&b.r[i]);
    const bool generated = i >= P && i < P + L;
    fq.push_back(generated ? &pred_q[i - P] : &b.q[i]);
    fr.push_back(generated ? &pred_r[i - P] : &b.r[i]);
  }
  nn::Var real = scaled_features(g, m, g.fk(g.constant(stack_rows(rq)), g.constant(stack_rows(rr)), *m.skeleton), S, B);
  nn::Var fake = scaled_features(g, m, g.fk(g.constant(stack_rows(fq)), g.constant(stack_rows(fr)), *m.skeleton), S, B);
  nn::Var l = lsgan_critic(g, m.long_critic.score(g, real, S, B), m.long_critic.score(g, fake, S, B));
  nn::Var s = lsgan_critic(g, m.short_critic.score(g, real, S, B), m.short_critic.score(g, fake, S, B));
  return g.scale(g.add(l, s), T(0.5));
}

}  // namespace inbetween
