// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "inbetween/app/pipeline.hpp"
#include "inbetween/nn/gradcheck.hpp"
#include "inbetween/service/server.hpp"
#include "test_util.hpp"

using namespace inbetween;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char b[64];
  std::snprintf(b, sizeof b, f, v);
  return b;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Outcome noise_schedule_exact() {
  int bad = 0;
  for (int tta = 0; tta <= 60; ++tta) {
    const double expect = tta >= 30 ? 1.0 : tta >= 5 ? (tta - 5) / 25.0 : 0.0;
    if (noise_schedule(tta) != expect) ++bad;
  }
  const bool spots = noise_schedule(30) == 1.0 && noise_schedule(10) == 0.2 && noise_schedule(4) == 0.0;
  return {bad == 0 && spots, "tta 0..60 mismatches=" + std::to_string(bad) + ", spots " + (spots ? "ok" : "wrong")};
}

Outcome tta_embedding_properties() {
  const GeneratorConfig gc;
  const int tmax = gc.t_max_tta(), d = gc.tta_dim();
  Outcome o;
  std::vector<std::vector<double>> z;
  for (int t = 1; t <= tmax; ++t) z.push_back(tta_embedding(t, d, gc.tta_basis, tmax));
  for (const auto& v : z)
    for (double x : v)
      if (!(x >= -1 && x <= 1)) o.pass = false;
  double min_gap = 1e300;
  for (std::size_t a = 0; a < z.size(); ++a)
    for (std::size_t b = a + 1; b < z.size(); ++b) {
      double g = 0;
      for (int k = 0; k < d; ++k) g = std::max(g, std::abs(z[a][k] - z[b][k]));
      min_gap = std::min(min_gap, g);
    }
  if (!(min_gap > 0)) o.pass = false;
  for (int t = tmax + 1; t <= tmax + 40; ++t)
    if (tta_embedding(t, d, gc.tta_basis, tmax) != z.back()) o.pass = false;
  const auto spot = tta_embedding(1, 2, gc.tta_basis, tmax);
  const double spot_err = std::max(std::abs(spot[0] - std::sin(1.0)), std::abs(spot[1] - std::cos(1.0)));
  if (!(spot_err < 1e-12)) o.pass = false;
  o.detail = "T_max=" + std::to_string(tmax) + " d=" + std::to_string(d) + " min pairwise gap " +
             fmt("%.3g", min_gap) + ", spot error " + fmt("%.2g", spot_err);
  return o;
}

nn::Parameter<double> random_param(const std::string& name, std::size_t r, std::size_t c, std::mt19937_64& rng,
                                   double scale = 1.0) {
  nn::Parameter<double> p(name, r, c);
  std::normal_distribution<double> n(0.0, scale);
  for (auto& v : p.value.values) v = n(rng);
  return p;
}

Outcome gradient_suite() {
  using nn::Graph;
  using nn::Var;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(21);
  double worst = 0;
  int checks = 0;
  auto record = [&](const nn::GradCheckReport& r) {
    worst = std::max(worst, r.worst());
    ++checks;
  };

  auto a = random_param("a", 3, 4, rng), b = random_param("b", 3, 4, rng), w = random_param("w", 4, 5, rng);
  auto row = random_param("row", 1, 4, rng);
  for (auto* p : {&a, &b})
    for (auto& v : p->value.values) {
      if (std::abs(v) < 0.05) v += 0.2;
      if (std::abs(std::abs(v) - 1.0) < 0.05) v *= 1.2;
    }
  const std::vector<std::function<Var(Graph<double>&)>> prims = {
      [&](Graph<double>& g) { return g.sum(g.square(g.matmul(g.param(a), g.param(w)))); },
      [&](Graph<double>& g) { return g.sum(g.square(g.add(g.param(a), g.param(b)))); },
      [&](Graph<double>& g) { return g.sum(g.square(g.sub(g.param(a), g.param(b)))); },
      [&](Graph<double>& g) { return g.sum(g.mul(g.param(a), g.param(b))); },
      [&](Graph<double>& g) { return g.sum(g.square(g.add_row(g.param(a), g.param(row)))); },
      [&](Graph<double>& g) { return g.sum(g.square(g.scale(g.param(a), 0.3))); },
      [&](Graph<double>& g) { return g.sum(g.square(g.add_scalar(g.param(a), -0.7))); },
      [&](Graph<double>& g) { return g.sum(g.square(g.slice_cols(g.param(a), 1, 3))); },
      [&](Graph<double>& g) { return g.sum(g.square(g.slice_rows(g.param(a), 1, 3))); },
      [&](Graph<double>& g) {
        return g.sum(g.mul(g.concat_rows({g.param(a), g.param(b)}), g.concat_rows({g.param(b), g.param(a)})));
      },
      [&](Graph<double>& g) {
        return g.sum(g.mul(g.concat_cols({g.param(a), g.param(b)}), g.concat_cols({g.param(b), g.param(a)})));
      },
      [&](Graph<double>& g) { return g.sum(g.mul(g.reshape(g.param(a), 4, 3), g.reshape(g.param(b), 4, 3))); },
      [&](Graph<double>& g) { return g.sum(g.square(g.sigmoid(g.param(a)))); },
      [&](Graph<double>& g) { return g.sum(g.square(g.tanh(g.param(a)))); },
      [&](Graph<double>& g) { return g.sum(g.square(g.relu(g.param(a)))); },
      [&](Graph<double>& g) { return g.sum(g.square(g.plu(g.scale(g.param(a), 2.0)))); },
      [&](Graph<double>& g) { return g.l1_norm(g.param(a)); },
      [&](Graph<double>& g) { return g.mean(g.square(g.param(a))); },
      [&](Graph<double>& g) { return g.sum(g.square(g.mean_rows(g.param(a)))); },
  };
  for (const auto& f : prims) record(nn::gradient_check(f, {&a, &b, &w, &row}));

  // Layers.
  nn::Linear<double> lin("lin", 5, 3);
  lin.init(rng);
  auto x = random_param("x", 4, 5, rng);
  {
    std::vector<nn::Parameter<double>*> ps{&x};
    lin.collect(ps);
    record(nn::gradient_check([&](Graph<double>& g) { return g.sum(g.square(lin(g, g.param(x)))); }, ps));
  }
  for (auto act : {nn::Activation::relu, nn::Activation::plu, nn::Activation::tanh, nn::Activation::sigmoid}) {
    nn::Mlp<double> mlp("mlp", {5, 6, 4, 2}, act, nn::Activation::none);
    mlp.init(rng);
    std::vector<nn::Parameter<double>*> ps{&x};
    mlp.collect(ps);
    record(nn::gradient_check([&](Graph<double>& g) { return g.sum(g.square(mlp(g, g.param(x)))); }, ps));
  }
  {
    nn::Lstm<double> l("lstm", 4, 3);
    l.init(rng);
    auto xs = random_param("xs", 8, 4, rng);
    std::vector<nn::Parameter<double>*> ps{&xs};
    l.collect(ps);
    record(nn::gradient_check(
        [&](Graph<double>& g) {
          auto s = l.zero_state(g, 2);
          Var xv = g.param(xs);
          for (int t = 0; t < 4; ++t) s = l.step(g, g.slice_rows(xv, 2 * t, 2 * t + 2), s);
          return g.sum(g.square(g.add(s.h, s.cell)));
        },
        ps));
  }
  {
    auto s = test::random_skeleton(5, rng);
    auto q = random_param("q", 3, 20, rng), r = random_param("r", 3, 3, rng);
    const auto target = random_param("t", 3, 15, rng).value;
    record(nn::gradient_check(
        [&](Graph<double>& g) {
          return g.sum(g.square(g.sub(g.fk(g.normalize_quats(g.param(q)), g.param(r), *s), g.constant(target))));
        },
        {&q, &r}));
  }

  // Full generator step, adversarial term included, and the critic objective.
  auto s = toy_chain_skeleton();
  const PreparedData d = prepare_data(toy_gait_corpus(s, 5, 60, 3), s);
  ModelConfig c;
  c.generator.joints = 4;
  c.generator.encoder_hidden = 10;
  c.generator.encoder_out = 6;
  c.generator.lstm_hidden = 8;
  c.generator.decoder_hidden1 = 10;
  c.generator.decoder_hidden2 = 6;
  c.critic.hidden1 = 8;
  c.critic.hidden2 = 5;
  c.critic.long_window = 4;
  Model<double> m(c, d.skeleton, d.stats);
  m.init(rng);
  std::vector<ModelInputs> ex;
  for (int i = 0; i < 2; ++i) ex.push_back(assemble_example(d.train.at(static_cast<std::size_t>(i)), 3));
  const auto batch = make_batch<double>(ex);
  const auto z = sample_target_noise<double>(2, c.generator.z_target_dim(), 0.5, rng);
  nn::GradCheckOptions opt;
  opt.max_entries_per_block = 60;
  record(nn::gradient_check([&](Graph<double>& g) { return generator_loss(g, m, batch, &z, true).total; },
                            m.all_parameters(), opt));
  std::vector<nn::Tensor<double>> pq, pr;
  for (int i = c.generator.past; i < c.generator.past + 3; ++i) {
    pq.push_back(batch.q[i]);
    pr.push_back(batch.r[i]);
    for (auto& v : pr.back().values) v += 0.03;
  }
  record(nn::gradient_check([&](Graph<double>& g) { return critic_loss(g, m, batch, pq, pr); },
                            m.critic_parameters(), opt));

  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 300,
          std::to_string(checks) + " checks, worst relative error " + fmt("%.2e", worst) + ", " + fmt("%.1f", secs) + " s"};
}

Outcome fk_oracle() {
  std::mt19937_64 rng(77);
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int j = std::uniform_int_distribution<int>(1, 24)(rng);
    auto s = test::random_skeleton(j, rng);
    FrameState f = rest_frame(*s);
    std::vector<test::Mat4> local(static_cast<std::size_t>(j));
    std::uniform_real_distribution<double> ang(-3.1, 3.1), u(-2, 2);
    f.r = {u(rng), u(rng), u(rng)};
    for (int k = 0; k < j; ++k) {
      const Vec3 axis = test::random_unit(rng);
      const double angle = ang(rng);
      f.q[k] = quat_from_axis_angle(axis, angle);
      local[k] = test::homogeneous(test::rodrigues(axis, angle), k == 0 ? f.r : s->offsets[k]);
    }
    std::vector<test::Mat4> global(static_cast<std::size_t>(j));
    for (int k = 0; k < j; ++k) global[k] = k == 0 ? local[0] : test::matmul(global[s->parents[k]], local[k]);
    const auto res = fk(*s, f);
    for (int k = 0; k < j; ++k) {
      const Vec3 p{global[k][0][3], global[k][1][3], global[k][2][3]};
      worst = std::max(worst, norm(res.p[k] - p));
    }
  }
  return {worst < 1e-9, "1000 random chains, max position error " + fmt("%.2e", worst)};
}

Outcome baseline_reproduction() {
  const char* dir = std::getenv("INBETWEEN_LAFAN_DIR");
  if (dir && std::filesystem::is_directory(dir)) {
    const auto t0 = Clock::now();
    const PreparedData data = prepare_data(dir, kDefaultContactThreshold);
    BenchmarkOptions bo;
    bo.threads = std::max(1u, std::thread::hardware_concurrency());
    const auto rep = run_benchmark("Interpolation", interpolation_method(), data.test, data.stats, default_lengths(), bo);
    const double l2q[] = {0.22, 0.62, 0.98, 1.25}, l2p[] = {0.37, 1.25, 2.32, 3.45},
                 npss[] = {0.0023, 0.0391, 0.2013, 0.4493};
    bool pass = rep.window_count == 2232;
    std::ostringstream d;
    d << "LaFAN1 windows=" << rep.window_count;
    auto within = [](double v, double ref) { return std::abs(v - ref) <= 0.05 * ref; };
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
      const auto& r = rep.rows[i];
      pass = pass && within(r.l2q, l2q[i]) && within(r.l2p, l2p[i]) && within(r.npss, npss[i]);
      d << " L=" << r.length << ":" << fmt("%.3f", r.l2q) << "/" << fmt("%.3f", r.l2p) << "/" << fmt("%.4f", r.npss);
    }
    const double secs = seconds_since(t0);
    d << ", " << fmt("%.0f", secs) << " s";
    return {pass && secs < 1200, d.str()};
  }
  auto s = test::biped();
  std::mt19937_64 rng(15);
  std::vector<MotionClip> clips;
  for (int i = 0; i < 12; ++i) clips.push_back(constant_angular_velocity_clip(s, 200, rng));
  const auto windows = make_windows(clips, lafan_test_spec()).windows;
  const auto rep = run_benchmark("Interpolation", interpolation_method(), windows, compute_norm_stats(windows));
  bool pass = rep.rows.size() == 4;
  std::ostringstream d;
  d << "LaFAN1 absent (set INBETWEEN_LAFAN_DIR); constant-angular-velocity corpus, " << rep.window_count << " windows:";
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& r = rep.rows[i];
    if (i > 0) {
      const auto& p = rep.rows[i - 1];
      pass = pass && r.l2q > p.l2q && r.l2p > p.l2p && r.npss > p.npss;
    }
    d << " L=" << r.length << ":" << fmt("%.3f", r.l2q) << "/" << fmt("%.3f", r.l2p) << "/" << fmt("%.4f", r.npss);
  }
  return {pass, d.str()};
}

struct ToyRun {
  std::shared_ptr<const Skeleton> skeleton;
  PreparedData data;
  std::unique_ptr<Model<float>> model;
  double train_seconds = 0;
};

ToyRun& toy_run() {
  static ToyRun run = [] {
    ToyRun r;
    r.skeleton = toy_chain_skeleton();
    r.data = prepare_data(toy_gait_corpus(r.skeleton, 240, 160, 1), r.skeleton);
    const auto t0 = Clock::now();
    r.model = train_model<float>(toy_training_config(), r.data);
    r.train_seconds = seconds_since(t0);
    return r;
  }();
  return run;
}

double root_gap(const FrameState& a, const FrameState& b) { return norm(a.r - b.r); }

bool same_frame(const FrameState& a, const FrameState& b) {
  if (a.r.x != b.r.x || a.r.y != b.r.y || a.r.z != b.r.z || a.q.size() != b.q.size()) return false;
  for (std::size_t k = 0; k < a.q.size(); ++k)
    if (a.q[k].w != b.q[k].w || a.q[k].x != b.q[k].x || a.q[k].y != b.q[k].y || a.q[k].z != b.q[k].z) return false;
  return true;
}

Outcome toy_training() {
  auto& run = toy_run();
  auto& m = *run.model;
  const double height = skeleton_height(*run.skeleton);
  const auto model_rep = run_benchmark("model", model_method(m), run.data.test, run.data.stats, {30});
  const auto interp_rep = run_benchmark("interp", interpolation_method(), run.data.test, run.data.stats, {30});
  const double lm = model_rep.rows[0].l2p, li = interp_rep.rows[0].l2p;
  const double gain = 1.0 - lm / li;

  double worst_gap = 0;
  bool deterministic = true;
  for (const auto& w : run.data.test) {
    const auto tw = split_window(w, 30);
    const auto a = generate_transition(m.generator, tw.seed, tw.target, 30, 0.0, 1);
    const auto b = generate_transition(m.generator, tw.seed, tw.target, 30, 0.0, 2);
    worst_gap = std::max(worst_gap, root_gap(a.frames.back(), tw.target));
    for (std::size_t t = 0; t < a.frames.size(); ++t)
      if (!same_frame(a.frames[t], b.frames[t])) deterministic = false;
  }
  const bool pass = gain >= 0.2 && worst_gap <= 0.1 * height && deterministic && run.train_seconds < 1800;
  return {pass, "L2P@30 model " + fmt("%.3f", lm) + " vs interpolation " + fmt("%.3f", li) + " (" +
                    fmt("%.1f", 100 * gain) + "% better), worst final-frame root gap " + fmt("%.3f", worst_gap) +
                    " m (limit " + fmt("%.3f", 0.1 * height) + "), deterministic " + (deterministic ? "yes" : "no") +
                    ", training " + fmt("%.0f", run.train_seconds) + " s"};
}

Outcome variation_property() {
  auto& run = toy_run();
  auto& m = *run.model;
  const double height = skeleton_height(*run.skeleton);
  const auto tw = split_window(run.data.test.at(run.data.test.size() / 2), 30);
  std::vector<std::vector<Vec3>> mid;
  double worst_gap = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = generate_transition(m.generator, tw.seed, tw.target, 30, 1.0, seed);
    mid.push_back(fk(*run.skeleton, g.frames[15]).p);
    worst_gap = std::max(worst_gap, root_gap(g.frames.back(), tw.target));
  }
  double min_disp = 1e300;
  for (std::size_t a = 0; a < mid.size(); ++a)
    for (std::size_t b = a + 1; b < mid.size(); ++b) {
      double d = 0;
      for (std::size_t k = 0; k < mid[a].size(); ++k) d += norm(mid[a][k] - mid[b][k]);
      min_disp = std::min(min_disp, d / static_cast<double>(mid[a].size()));
    }
  return {min_disp > 0 && worst_gap <= 0.1 * height,
          "10 seeds, min pairwise mid-pose displacement " + fmt("%.2e", min_disp) + " m, worst final root gap " +
              fmt("%.3f", worst_gap) + " m"};
}

Outcome curriculum_trace() {
  const CurriculumConfig cc;
  bool pass = curriculum_max(0, cc) == 5;
  for (long e = cc.n_ep_max; e < cc.n_ep_max + 20; ++e) pass = pass && curriculum_max(e, cc) == cc.p_max;
  for (long e = 1; e < cc.n_ep_max; ++e) pass = pass && curriculum_max(e, cc) >= curriculum_max(e - 1, cc);

  auto s = toy_chain_skeleton();
  const PreparedData d = prepare_data(toy_gait_corpus(s, 10, 80, 2), s);
  ModelConfig c;
  c.generator.joints = 4;
  c.generator.encoder_hidden = 8;
  c.generator.encoder_out = 4;
  c.generator.lstm_hidden = 8;
  c.generator.decoder_hidden1 = 8;
  c.generator.decoder_hidden2 = 4;
  c.critic.hidden1 = 4;
  c.critic.hidden2 = 4;
  c.train.batch = 2;
  c.train.iterations_per_epoch = 10;
  c.train.iterations = 60;
  Model<float> m(c, d.skeleton, d.stats);
  std::mt19937_64 rng(1);
  m.init(rng);
  Trainer<float> t(m, d.train);
  std::vector<int> trace;
  int out_of_range = 0;
  t.run(c.train.iterations, [&](const IterationLog& l) {
    if (trace.size() <= static_cast<std::size_t>(l.epoch)) trace.push_back(l.current_max);
    if (l.current_max != curriculum_max(l.epoch, cc) || l.length < 5 || l.length > l.current_max) ++out_of_range;
    return true;
  });
  std::mt19937_64 srng(3);
  for (int i = 0; i < 20000; ++i) {
    const int cap = 5 + i % 26;
    const int L = sample_length(srng, 5, cap);
    if (L < 5 || L > cap) ++out_of_range;
  }
  pass = pass && out_of_range == 0 && trace.front() == 5 && trace.back() == cc.p_max;
  std::string tr;
  for (int v : trace) tr += (tr.empty() ? "" : ",") + std::to_string(v);
  return {pass, "per-epoch cap trace " + tr + ", violations " + std::to_string(out_of_range)};
}

// Direct DFT power over bins 1..N/2, normalized.
std::vector<double> dft_power(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> p;
  double total = 0;
  for (std::size_t k = 1; k <= n / 2; ++k) {
    double re = 0, im = 0;
    for (std::size_t t = 0; t < n; ++t) {
      const double a = 2 * 3.14159265358979323846 * static_cast<double>(k * t) / static_cast<double>(n);
      re += x[t] * std::cos(a);
      im -= x[t] * std::sin(a);
    }
    p.push_back(re * re + im * im);
    total += p.back();
  }
  for (auto& v : p) v /= total;
  return p;
}

Outcome metric_sanity() {
  std::mt19937_64 rng(31);
  auto s = test::biped();
  const auto windows = make_windows({constant_angular_velocity_clip(s, 120, rng)}, lafan_test_spec()).windows;
  const NormStats stats = compute_norm_stats(windows);
  double worst_zero = 0;
  for (const auto& w : windows) {
    const auto tw = split_window(w, 30);
    const Vec3 c{0, 0, 0};
    worst_zero = std::max({worst_zero, l2q(*s, tw.transition, tw.transition), l2p(*s, tw.transition, tw.transition, stats, &c),
                           npss(global_quaternions(*s, tw.transition), global_quaternions(*s, tw.transition))});
  }
  const double pi = 3.14159265358979323846;
  double worst_oracle = 0;
  for (int kp = 1; kp <= 8; ++kp)
    for (int kt = 1; kt <= 8; ++kt) {
      Sequence pred(16, std::vector<double>(2)), truth(16, std::vector<double>(2));
      std::vector<double> p0(16), t0(16), p1(16), t1(16);
      for (int t = 0; t < 16; ++t) {
        p0[t] = pred[t][0] = std::cos(2 * pi * kp * t / 16.0 + 0.3);
        t0[t] = truth[t][0] = 2.0 * std::sin(2 * pi * kt * t / 16.0 + 0.1);
        p1[t] = pred[t][1] = 0.5 * std::cos(2 * pi * kt * t / 16.0);
        t1[t] = truth[t][1] = std::cos(2 * pi * (9 - kp) * t / 16.0) + 0.25;
      }
      auto weight = [](const std::vector<double>& x) {
        double e = 0;
        const std::size_t n = x.size();
        for (std::size_t k = 1; k <= n / 2; ++k) {
          double re = 0, im = 0;
          for (std::size_t t = 0; t < n; ++t) {
            re += x[t] * std::cos(2 * 3.14159265358979323846 * static_cast<double>(k * t) / static_cast<double>(n));
            im -= x[t] * std::sin(2 * 3.14159265358979323846 * static_cast<double>(k * t) / static_cast<double>(n));
          }
          e += re * re + im * im;
        }
        return e;
      };
      auto emd = [](const std::vector<double>& a, const std::vector<double>& b) {
        double ca = 0, cb = 0, e = 0;
        for (std::size_t k = 0; k < a.size(); ++k) {
          ca += a[k];
          cb += b[k];
          e += std::abs(ca - cb);
        }
        return e;
      };
      const double w0 = weight(t0), w1 = weight(t1);
      const double expect =
          (w0 * emd(dft_power(p0), dft_power(t0)) + w1 * emd(dft_power(p1), dft_power(t1))) / (w0 + w1);
      worst_oracle = std::max(worst_oracle, std::abs(npss(pred, truth) - expect));
      if (kp != kt) {
        const double one_hot = std::abs(kp - kt);
        Sequence a(16, std::vector<double>(1)), b(16, std::vector<double>(1));
        for (int t = 0; t < 16; ++t) {
          a[t][0] = std::cos(2 * pi * kp * t / 16.0);
          b[t][0] = std::cos(2 * pi * kt * t / 16.0);
        }
        worst_oracle = std::max(worst_oracle, std::abs(npss(a, b) - one_hot));
      }
    }
  return {worst_zero == 0 && worst_oracle < 1e-9, "identical sequences max " + fmt("%.1g", worst_zero) +
                                                      ", 16-sample spectrum oracle max error " + fmt("%.2e", worst_oracle)};
}

std::shared_ptr<Skeleton> skeleton22() {
  std::mt19937_64 rng(22);
  auto s = test::random_skeleton(22, rng);
  for (auto& o : s->offsets) o = o * 0.3;
  return s;
}

Outcome service_contract() {
  auto s = skeleton22();
  NormStats st;
  st.mean.assign(66, 0.0);
  st.std.assign(66, 1.0);
  ModelConfig c;
  c.generator.joints = 22;
  auto model = std::make_shared<Model<float>>(c, s, st);
  std::mt19937_64 rng(5);
  model->init(rng);

  InferenceService<float> svc(model, "acceptance");
  httplib::Server srv;
  svc.install(srv);
  const int port = srv.bind_to_any_port("127.0.0.1");
  std::thread th([&] { srv.listen_after_bind(); });
  srv.wait_until_ready();
  httplib::Client cli("127.0.0.1", port);
  cli.set_read_timeout(30, 0);

  std::mt19937_64 mrng(9);
  const MotionClip clip = constant_angular_velocity_clip(s, 41, mrng);
  TransitionRequest req;
  req.past.assign(clip.frames.begin(), clip.frames.begin() + 10);
  req.target = clip.frames.back();
  req.length = 30;
  req.seed = 7;
  const std::string body = request_to_json(req).dump();

  bool pass = true;
  std::ostringstream d;
  std::string first;
  double worst_ms = 0;
  for (int i = 0; i < 6; ++i) {
    const auto t0 = Clock::now();
    auto r = cli.Post("/generate", body, "application/json");
    const double ms = 1000 * seconds_since(t0);
    if (!r || r->status != 200) {
      pass = false;
      break;
    }
    if (i == 0) {
      first = r->body;
      if (Json::parse(r->body)["frames"].size() != 30u) pass = false;
    } else {
      if (r->body != first) pass = false;
      worst_ms = std::max(worst_ms, ms);
    }
  }
  d << "22 joints, full widths: 30 frames, byte-identical repeats " << (pass ? "yes" : "no");
  for (int L : {1, 7, 45}) {
    Json j = Json::parse(body);
    j["length"] = L;
    auto r = cli.Post("/generate", j.dump(), "application/json");
    if (!r || r->status != 200 || Json::parse(r->body)["frames"].size() != static_cast<std::size_t>(L)) pass = false;
  }
  int rejected = 0;
  const std::vector<std::function<void(Json&)>> bad = {
      [](Json& j) { j["past"][0]["r"] = "x"; },          [](Json& j) { j.erase("target"); },
      [](Json& j) { j["length"] = "thirty"; },            [](Json& j) { j["unknown"] = 1; },
      [](Json& j) { j["past"][2]["q"][0] = {0, 0, 0, 0}; }, [](Json& j) { j["variation"] = -1; }};
  for (const auto& f : bad) {
    Json j = Json::parse(body);
    f(j);
    auto r = cli.Post("/generate", j.dump(), "application/json");
    if (r && r->status == 400) ++rejected;
  }
  auto malformed = cli.Post("/generate", "{\"past\":", "application/json");
  if (malformed && malformed->status == 400) ++rejected;
  pass = pass && rejected == static_cast<int>(bad.size()) + 1 && worst_ms < 500;
  d << ", " << rejected << "/" << bad.size() + 1 << " invalid requests rejected with 400, latency L=30 max "
    << fmt("%.0f", worst_ms) << " ms";
  srv.stop();
  th.join();
  return {pass, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  std::ofstream report;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--report" && i + 1 < argc) report.open(argv[++i]);
    else only.insert(std::atoi(argv[i]));
  }
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"noise schedule", noise_schedule_exact},
      {"time-to-arrival embedding", tta_embedding_properties},
      {"gradient checks", gradient_suite},
      {"forward kinematics oracle", fk_oracle},
      {"interpolation baseline", baseline_reproduction},
      {"toy training", toy_training},
      {"sampled variations", variation_property},
      {"curriculum", curriculum_trace},
      {"metric sanity", metric_sanity},
      {"service contract", service_contract},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::ostringstream line;
    line << (o.pass ? "PASS" : "FAIL") << "  " << id << ". " << criteria[i].first << ": " << o.detail << '\n';
    std::cout << line.str() << std::flush;
    if (report) report << line.str() << std::flush;
  }
  return failed == 0 ? 0 : 1;
}
