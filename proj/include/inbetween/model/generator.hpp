#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "inbetween/data/features.hpp"
#include "inbetween/model/config.hpp"
#include "inbetween/model/schedule.hpp"
#include "inbetween/nn/layers.hpp"

namespace inbetween {

using nn::Graph;
using nn::Parameter;
using nn::Tensor;
using nn::Var;

class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One minibatch of examples sharing the same transition length. Per-frame tensors are B rows.
template <class T>
struct Batch {
  int past = kDefaultPast;
  int length = 0;
  std::size_t size = 0;
  std::vector<Tensor<T>> q;         // frames 0..past+L, B x 4j
  std::vector<Tensor<T>> r;         // B x 3
  std::vector<Tensor<T>> root_vel;  // B x 3
  std::vector<Tensor<T>> contacts;  // B x 4
  Tensor<T> target_q, target_r;

  int frames() const { return past + length + 1; }
};

template <class T>
Batch<T> make_batch(const std::vector<ModelInputs>& examples) {
  if (examples.empty()) throw std::invalid_argument("make_batch: no examples");
  Batch<T> b;
  b.past = examples[0].past;
  b.length = examples[0].length;
  b.size = examples.size();
  const std::size_t B = b.size, j = examples[0].target_q.size();
  for (const auto& e : examples) {
    if (e.past != b.past || e.length != b.length || e.target_q.size() != j)
      throw std::invalid_argument("make_batch: examples disagree on past, length or joint count");
  }
  const int n = b.frames();
  for (int i = 0; i < n; ++i) {
    Tensor<T> q(B, 4 * j), r(B, 3), rv(B, 3), c(B, 4);
    for (std::size_t e = 0; e < B; ++e) {
      const auto& ex = examples[e];
      for (std::size_t k = 0; k < j; ++k)
        for (int a = 0; a < 4; ++a) q(e, 4 * k + a) = static_cast<T>(ex.q[i][k][a]);
      for (int a = 0; a < 3; ++a) {
        r(e, a) = static_cast<T>(ex.r[i][a]);
        rv(e, a) = static_cast<T>(ex.root_velocity[i][a]);
      }
      for (int a = 0; a < 4; ++a) c(e, a) = static_cast<T>(ex.contacts[i][a]);
    }
    b.q.push_back(std::move(q));
    b.r.push_back(std::move(r));
    b.root_vel.push_back(std::move(rv));
    b.contacts.push_back(std::move(c));
  }
  b.target_q = b.q.back();
  b.target_r = b.r.back();
  return b;
}

// Per-step decoder outputs; entry s is the frame at index past + s.
struct RolloutVars {
  std::vector<Var> q, r, contacts;
  std::vector<double> lambdas;  // noise scale used at each generation step
};

template <class T>
class Generator {
 public:
  GeneratorConfig cfg;
  nn::Mlp<T> state_encoder, offset_encoder, target_encoder;
  nn::Lstm<T> lstm;
  nn::Mlp<T> decoder;

  Generator() = default;
  explicit Generator(const GeneratorConfig& c) : cfg(c) {
    const auto errors = c.validate();
    if (!errors.empty()) throw std::invalid_argument(errors.front());
    using nn::Activation;
    auto sz = [](int v) { return static_cast<std::size_t>(v); };
    state_encoder = nn::Mlp<T>("state_encoder", {sz(c.state_input_dim()), sz(c.encoder_hidden), sz(c.encoder_out)},
                               Activation::plu, Activation::plu);
    offset_encoder = nn::Mlp<T>("offset_encoder", {sz(c.offset_input_dim()), sz(c.encoder_hidden), sz(c.encoder_out)},
                                Activation::plu, Activation::plu);
    target_encoder = nn::Mlp<T>("target_encoder", {sz(c.target_input_dim()), sz(c.encoder_hidden), sz(c.encoder_out)},
                                Activation::plu, Activation::plu);
    lstm = nn::Lstm<T>("lstm", sz(c.lstm_input_dim()), sz(c.lstm_hidden));
    decoder = nn::Mlp<T>("decoder",
                         {sz(c.lstm_hidden), sz(c.decoder_hidden1), sz(c.decoder_hidden2), sz(c.decoder_output_dim())},
                         Activation::plu, Activation::none);
    tta_table_.resize(static_cast<std::size_t>(c.t_max_tta()) + 1);
    for (int t = 1; t <= c.t_max_tta(); ++t) {
      const auto z = tta_embedding(t, c.tta_dim(), c.tta_basis, c.t_max_tta());
      tta_table_[t] = Tensor<T>(1, z.size());
      for (std::size_t d = 0; d < z.size(); ++d) tta_table_[t].values[d] = static_cast<T>(z[d]);
    }
  }

  void init(std::mt19937_64& rng) {
    state_encoder.init(rng);
    offset_encoder.init(rng);
    target_encoder.init(rng);
    lstm.init(rng);
    decoder.init(rng);
  }

  std::vector<Parameter<T>*> parameters() {
    std::vector<Parameter<T>*> p;
    state_encoder.collect(p);
    offset_encoder.collect(p);
    target_encoder.collect(p);
    lstm.collect(p);
    decoder.collect(p);
    return p;
  }

  std::size_t parameter_count() {
    std::size_t n = 0;
    for (auto* p : parameters()) n += p->value.size();
    return n;
  }

  const Tensor<T>& tta_code(int tta) const {
    if (tta < 1) throw std::invalid_argument("tta must be at least 1, got " + std::to_string(tta));
    return tta_table_[static_cast<std::size_t>(std::min(tta, cfg.t_max_tta()))];
  }

  // Warms up on the seed frames, then runs `steps` autoregressive predictions.
  // steps = L yields the transition; steps = L + 1 also predicts the target frame.
  // z_target (B x z_dim, already scaled by sigma) may be null for noise-free rollouts.
  RolloutVars rollout(Graph<T>& g, const Batch<T>& b, int steps, const Tensor<T>* z_target = nullptr) {
    const int j = cfg.joints, P = b.past;
    if (static_cast<int>(b.target_q.cols()) != 4 * j) throw std::invalid_argument("rollout: joint count mismatch");
    if (steps < 1 || steps > b.length + 1) throw std::invalid_argument("rollout: steps must lie in [1, L+1]");
    if (P < 2 || static_cast<int>(b.q.size()) < P) throw std::invalid_argument("rollout: not enough seed frames");
    if (z_target && (z_target->rows() != b.size || static_cast<int>(z_target->cols()) != cfg.z_target_dim()))
      throw std::invalid_argument("rollout: z_target has the wrong shape");
    const std::size_t J4 = static_cast<std::size_t>(4 * j);
    const bool qv = cfg.state_input == StateInputMode::quaternion_velocities;

    Var tgt_q = g.constant(b.target_q), tgt_r = g.constant(b.target_r);
    Var h_target = target_encoder(g, tgt_q);
    Var z = z_target ? g.constant(*z_target) : Var{};
    auto state = lstm.zero_state(g, b.size);

    RolloutVars out;
    Var q_in, r_in, c_in, rv_in, q_prev, r_prev;
    const int last_input = P - 2 + steps;
    for (int i = 0; i <= last_input; ++i) {
      if (i < P) {
        q_in = g.constant(b.q[i]);
        r_in = g.constant(b.r[i]);
        rv_in = g.constant(b.root_vel[i]);
        c_in = g.constant(b.contacts[i]);
        q_prev = i > 0 ? g.constant(b.q[i - 1]) : Var{};
      } else {
        q_prev = q_in;
        r_prev = r_in;
        q_in = out.q.back();
        r_in = out.r.back();
        rv_in = g.sub(r_in, r_prev);
        if (cfg.include_contacts) c_in = out.contacts.back();
      }
      Var q_feature = q_in;
      if (qv) q_feature = i == 0 ? g.sub(g.constant(b.q[1]), q_in) : g.sub(q_in, q_prev);
      std::vector<Var> s_parts{q_feature, rv_in};
      if (cfg.include_contacts) s_parts.push_back(c_in);

      const int tta = b.past + b.length - i;
      Var ztta = g.constant(tta_code(tta));
      Var h_state = g.add_row(state_encoder(g, g.concat_cols(s_parts)), ztta);
      Var h_offset = offset_encoder(g, g.concat_cols({g.sub(tgt_r, r_in), g.sub(tgt_q, q_in)}));
      Var h_tgt = h_target;
      if (cfg.tta_on_all_encoders) {
        h_offset = g.add_row(h_offset, ztta);
        h_tgt = g.add_row(h_tgt, ztta);
      }
      Var augmented = g.concat_cols({h_offset, h_tgt});
      // The noise scale follows the frame being produced, one step closer to the target.
      const double lambda = noise_schedule(tta - 1);
      if (z_target && lambda > 0) augmented = g.add(augmented, g.scale(z, static_cast<T>(lambda)));
      state = lstm.step(g, g.concat_cols({h_state, augmented}), state);

      if (i >= P - 1) {
        out.lambdas.push_back(z_target ? lambda : 0.0);
        Var d = decoder(g, state.h);
        out.q.push_back(g.normalize_quats(g.add(q_in, g.slice_cols(d, 0, J4))));
        out.r.push_back(g.add(r_in, g.slice_cols(d, J4, J4 + 3)));
        if (cfg.include_contacts) out.contacts.push_back(g.sigmoid(g.slice_cols(d, J4 + 3, J4 + 7)));
      }
    }
    for (Var v : out.q) check_finite(g.value(v), "predicted quaternions");
    for (Var v : out.r) check_finite(g.value(v), "predicted root positions");
    return out;
  }

 private:
  std::vector<Tensor<T>> tta_table_;

  static void check_finite(const Tensor<T>& t, const char* what) {
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (!std::isfinite(static_cast<double>(t.values[k]))) {
        throw NonFiniteError(std::string("non-finite ") + what + " at flat index " + std::to_string(k));
      }
    }
  }
};

// Samples the per-sequence target noise, scaled by sigma.
template <class T>
Tensor<T> sample_target_noise(std::size_t batch, int dim, double sigma, std::mt19937_64& rng) {
  Tensor<T> z(batch, static_cast<std::size_t>(dim));
  std::normal_distribution<double> n(0.0, 1.0);
  for (auto& v : z.values) v = static_cast<T>(sigma * n(rng));
  return z;
}

struct GeneratedTransition {
  std::vector<FrameState> frames;
  std::vector<Contacts> contacts;
};

// Inference on canonicalized seed frames plus target. `variation` scales sigma_target.
template <class T>
GeneratedTransition generate_transition(Generator<T>& gen, const std::vector<FrameState>& seed,
                                        const FrameState& target, int length, double variation, std::uint64_t seed_value) {
  if (length < 1) throw std::invalid_argument("transition length must be at least 1");
  if (static_cast<int>(seed.size()) != gen.cfg.past)
    throw std::invalid_argument("expected " + std::to_string(gen.cfg.past) + " seed frames, got " +
                                std::to_string(seed.size()));
  std::vector<FrameState> frames = seed;
  // Placeholder transition frames are never read: predictions replace them.
  frames.insert(frames.end(), static_cast<std::size_t>(length), seed.back());
  frames.push_back(target);
  const auto inputs = assemble_from_frames(frames, gen.cfg.past, length);
  const Batch<T> b = make_batch<T>({inputs});
  Graph<T> g(false);
  Tensor<T> z;
  const Tensor<T>* zp = nullptr;
  if (variation > 0) {
    std::mt19937_64 rng(seed_value);
    z = sample_target_noise<T>(1, gen.cfg.z_target_dim(), variation * gen.cfg.sigma_target, rng);
    zp = &z;
  }
  const auto out = gen.rollout(g, b, length, zp);
  GeneratedTransition res;
  const int j = gen.cfg.joints;
  for (int s = 0; s < length; ++s) {
    FrameState f;
    f.q.resize(static_cast<std::size_t>(j));
    const auto& q = g.value(out.q[s]);
    for (int k = 0; k < j; ++k)
      f.q[k] = quat_normalize(Quaternion{q.values[4 * k], q.values[4 * k + 1], q.values[4 * k + 2], q.values[4 * k + 3]});
    const auto& r = g.value(out.r[s]);
    f.r = {r.values[0], r.values[1], r.values[2]};
    if (gen.cfg.include_contacts) {
      const auto& c = g.value(out.contacts[s]);
      for (int a = 0; a < 4; ++a) f.c[a] = c.values[a];
    }
    res.contacts.push_back(f.c);
    res.frames.push_back(std::move(f));
  }
  return res;
}

}  // namespace inbetween
