#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "inbetween/app/pipeline.hpp"
#include "inbetween/io/config_file.hpp"
#include "inbetween/service/server.hpp"

using namespace inbetween;
namespace fs = std::filesystem;

namespace {

ModelConfig config_or_default(const std::string& path) { return path.empty() ? ModelConfig{} : load_config(path); }

std::vector<int> parse_lengths(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  if (out.empty()) throw std::invalid_argument("--lengths is empty");
  return out;
}

std::pair<std::string, int> split_address(const std::string& a) {
  const auto pos = a.rfind(':');
  if (pos == std::string::npos) throw std::invalid_argument("address must look like host:port, got " + a);
  return {a.substr(0, pos), std::stoi(a.substr(pos + 1))};
}

int cmd_synth(const std::string& out, int clips, int frames, std::uint64_t seed) {
  fs::create_directories(out);
  auto s = toy_chain_skeleton();
  const auto corpus = toy_gait_corpus(s, clips, frames, seed);
  for (const auto& c : corpus) save_bvh((fs::path(out) / (c.action + "_" + c.subject + ".bvh")).string(), *s, c);
  std::cout << "wrote " << corpus.size() << " clips to " << out << "\n";
  return 0;
}

int cmd_prepare(const std::string& config, const std::string& data, const std::string& out) {
  const ModelConfig cfg = config_or_default(config);
  Corpus c = load_corpus(data, cfg.train.contact_threshold);
  const PreparedData d = prepare_data(c.clips, c.skeleton);
  std::ostream* os = &std::cout;
  std::ofstream f;
  if (!out.empty()) {
    f.open(out);
    if (!f) throw std::runtime_error("cannot write " + out);
    os = &f;
  }
  write_manifest(*os, c.manifest);
  std::cout << c.clips.size() << " clips, " << c.skeleton->joint_count() << " joints, " << d.train.size()
            << " training windows, " << d.test.size() << " test windows\n";
  return 0;
}

template <class T>
int train_as(const ModelConfig& cfg, const PreparedData& d, TrainOptions opt) {
  std::cout << "training on " << d.train.size() << " windows, " << cfg.train.iterations << " iterations ("
            << (sizeof(T) == 8 ? "64" : "32") << "-bit)\n";
  train_model<T>(cfg, d, opt);
  std::cout << "weights written to " << opt.out_path << "\n";
  return 0;
}

int cmd_train(const std::string& config, const std::string& data, const std::string& out, const std::string& resume) {
  const ModelConfig cfg = config_or_default(config);
  const PreparedData d = prepare_data(data, cfg.train.contact_threshold);
  const fs::path stem = fs::path(out).replace_extension();
  std::ofstream log(stem.string() + ".log", resume.empty() ? std::ios::trunc : std::ios::app);
  TrainOptions opt;
  opt.out_path = out;
  opt.checkpoint_path = stem.string() + ".ckpt";
  opt.resume_path = resume;
  opt.log = &log;
  const auto every = std::max<long>(1, cfg.train.iterations / 20);
  opt.on_iteration = [every](const IterationLog& l) {
    if (l.iteration % every == 0)
      std::cout << "iter " << l.iteration << " L=" << l.length << " total=" << l.loss.total << std::endl;
  };
  bool use_double = cfg.train.use_double;
  if (!resume.empty()) use_double = load_weights(resume).header.at("checkpoint").at("precision") == "f64";
  return use_double ? train_as<double>(cfg, d, opt) : train_as<float>(cfg, d, opt);
}

int cmd_eval(const std::string& config, const std::string& data, const std::string& weights, const std::string& baseline,
             const std::string& lengths, double variation, const std::string& out, unsigned threads) {
  if (variation > 0)
    throw std::invalid_argument("variation must be 0 for quantitative evaluation (target noise is turned off)");
  if (weights.empty() == baseline.empty()) throw std::invalid_argument("pass exactly one of --weights or --baseline");
  std::unique_ptr<Model<float>> model;
  double threshold = config_or_default(config).train.contact_threshold;
  if (!weights.empty()) {
    model = load_model<float>(weights);
    threshold = model->cfg.train.contact_threshold;
  }
  const PreparedData d = prepare_data(data, threshold);
  if (d.test.empty()) throw std::runtime_error("no test windows (subject5, 65 frames)");
  BenchmarkOptions bo;
  bo.threads = threads;
  BenchmarkReport rep;
  const auto L = parse_lengths(lengths);
  if (model) {
    rep = run_benchmark("model", model_method(*model), d.test, model->stats, L, bo);
  } else if (baseline == "interpolation") {
    rep = run_benchmark("Interpolation", interpolation_method(), d.test, d.stats, L, bo);
  } else if (baseline == "zero-velocity") {
    rep = run_benchmark("Zero-Vel", zero_velocity_method(), d.test, d.stats, L, bo);
  } else {
    throw std::invalid_argument("unknown baseline '" + baseline + "' (interpolation, zero-velocity)");
  }
  write_report_table(std::cout, {rep});
  if (!out.empty()) {
    std::ofstream tsv(out);
    if (!tsv) throw std::runtime_error("cannot write " + out);
    write_report_tsv(tsv, {rep});
    std::ofstream table(fs::path(out).replace_extension(".txt"));
    write_report_table(table, {rep});
  }
  return 0;
}

int cmd_generate(const std::string& weights, const std::string& input, const std::string& request_file, int length,
                 double variation, std::uint64_t seed, int start, int target_frame, bool ik, const std::string& out) {
  auto model = load_model<float>(weights);
  const int P = model->cfg.generator.past;
  TransitionRequest req;
  if (!request_file.empty()) {
    std::ifstream in(request_file);
    if (!in) throw std::runtime_error("cannot read " + request_file);
    req = parse_request(Json::parse(in));
  } else {
    if (input.empty()) throw std::invalid_argument("pass --input or --request");
    BvhData b = load_bvh(input);
    if (b.skeleton->joint_count() != model->cfg.generator.joints)
      throw std::invalid_argument("input skeleton does not match the model");
    const int n = static_cast<int>(b.clip.frames.size());
    const int tf = target_frame < 0 ? n - 1 : target_frame;
    if (start < 0 || start + P > n || tf < start + P || tf >= n)
      throw std::invalid_argument("input must supply " + std::to_string(P) + " context frames before the target frame");
    req.past.assign(b.clip.frames.begin() + start, b.clip.frames.begin() + start + P);
    req.target = b.clip.frames[tf];
    req.length = length;
  }
  if (length > 0) req.length = length;
  req.variation = variation;
  req.seed = seed;
  req.apply_ik = req.apply_ik || ik;
  const TransitionResponse res = run_transition(*model, req);
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
  MotionClip clip;
  clip.skeleton = model->skeleton;
  clip.frames = req.past;
  clip.frames.insert(clip.frames.end(), res.frames.begin(), res.frames.end());
  clip.frames.push_back(req.target);
  save_bvh(out, *model->skeleton, clip);
  std::cout << "wrote " << P << " context + " << res.frames.size() << " generated + 1 target frames to " << out << " ("
            << res.timing_ms << " ms)\n";
  return 0;
}

int cmd_serve(const std::string& weights, std::string address, unsigned threads) {
  std::shared_ptr<Model<float>> model = load_model<float>(weights);
  InferenceService<float> svc(model, file_fingerprint(weights));
  httplib::Server srv;
  srv.new_task_queue = [threads] { return new httplib::ThreadPool(std::max(1u, threads)); };
  svc.install(srv);
  const auto [host, port] = split_address(address);
  std::cout << "serving " << weights << " (" << svc.fingerprint() << ") on " << host << ":" << port << std::endl;
  if (!srv.listen(host, port)) throw std::runtime_error("cannot listen on " + address);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Motion in-betweening: data preparation, training, evaluation and inference"};
  app.require_subcommand(1);

  std::string config, data, weights, out, baseline, input, request, resume;
  std::string lengths = "5,15,30,45";
  const char* env_addr = std::getenv("INBETWEEN_ADDRESS");
  std::string address = env_addr ? env_addr : "127.0.0.1:8080";
  double variation = 0;
  std::uint64_t seed = 0;
  int length = 0, clips = 240, frames = 160, start = 0, target_frame = -1;
  unsigned threads = 1;
  bool ik = false;

  auto* synth = app.add_subcommand("synth", "write the procedural gait corpus as BVH files");
  synth->add_option("--out", out, "output directory")->required();
  synth->add_option("--clips", clips, "number of clips")->check(CLI::PositiveNumber);
  synth->add_option("--frames", frames, "frames per clip")->check(CLI::PositiveNumber);
  synth->add_option("--seed", seed, "generator seed");

  auto* prepare = app.add_subcommand("prepare", "index a BVH directory and report window counts");
  prepare->add_option("--config", config, "INI config");
  prepare->add_option("--data", data, "BVH directory")->required();
  prepare->add_option("--out", out, "manifest path (stdout if omitted)");

  auto* train = app.add_subcommand("train", "train a model; writes <out>, <out stem>.log and <out stem>.ckpt");
  train->add_option("--config", config, "INI config");
  train->add_option("--data", data, "BVH directory")->required();
  train->add_option("--out,--weights", out, "output weights")->required();
  train->add_option("--resume", resume, "checkpoint to resume from");

  auto* eval = app.add_subcommand("eval", "benchmark a model or a baseline on the test windows");
  eval->add_option("--config", config, "INI config (baselines only)");
  eval->add_option("--data", data, "BVH directory")->required();
  eval->add_option("--weights", weights, "model weights");
  eval->add_option("--baseline", baseline, "interpolation or zero-velocity");
  eval->add_option("--lengths", lengths, "comma-separated transition lengths");
  eval->add_option("--variation", variation, "must be 0");
  eval->add_option("--out", out, "TSV report path; a .txt table is written alongside");
  eval->add_option("--threads", threads, "worker threads");

  auto* generate = app.add_subcommand("generate", "generate one transition and write it as BVH");
  generate->add_option("--weights", weights, "model weights")->required();
  generate->add_option("--input", input, "BVH supplying context frames and the target");
  generate->add_option("--request", request, "JSON request file instead of --input");
  generate->add_option("--length", length, "transition length")->check(CLI::PositiveNumber);
  generate->add_option("--variation", variation, "noise scale, 0 is deterministic")->check(CLI::NonNegativeNumber);
  generate->add_option("--seed", seed, "noise seed");
  generate->add_option("--start", start, "first context frame in --input");
  generate->add_option("--target-frame", target_frame, "target frame in --input (default: last)");
  generate->add_flag("--ik", ik, "pin planted feet with two-bone IK");
  generate->add_option("--out", out, "output BVH")->required();

  auto* serve = app.add_subcommand("serve", "HTTP inference service (address also from INBETWEEN_ADDRESS)");
  serve->add_option("--weights", weights, "model weights")->required();
  serve->add_option("--address", address, "host:port");
  serve->add_option("--threads", threads, "worker threads");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*synth) return cmd_synth(out, clips, frames, seed);
    if (*prepare) return cmd_prepare(config, data, out);
    if (*train) return cmd_train(config, data, out, resume);
    if (*eval) return cmd_eval(config, data, weights, baseline, lengths, variation, out, threads);
    if (*generate) {
      if (input.empty() && request.empty()) throw std::invalid_argument("pass --input or --request");
      if (!input.empty() && length < 1) throw std::invalid_argument("--length is required with --input");
      return cmd_generate(weights, input, request, length, variation, seed, start, target_frame, ik, out);
    }
    if (*serve) return cmd_serve(weights, address, threads);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
