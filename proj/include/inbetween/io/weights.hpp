#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <zlib.h>

#include "inbetween/io/json_codec.hpp"
#include "inbetween/model/trainer.hpp"

namespace inbetween {

// File layout (little-endian):
//   "INBTWEEN" | u32 version | u64 total size | u32 header size | header JSON
//   u32 block count | blocks: u32 name size, name, u32 rows, u32 cols, u8 dtype, values
//   u32 crc32 of every preceding byte
inline constexpr char kWeightsMagic[8] = {'I', 'N', 'B', 'T', 'W', 'E', 'E', 'N'};
inline constexpr std::uint32_t kWeightsVersion = 1;

class WeightsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DType : std::uint8_t { f32 = 0, f64 = 1 };

struct WeightBlock {
  std::string name;
  std::uint32_t rows = 0, cols = 0;
  DType dtype = DType::f32;
  std::vector<double> values;
};

struct WeightsContainer {
  std::uint32_t version = kWeightsVersion;
  Json header = Json::object();
  std::vector<WeightBlock> blocks;

  const WeightBlock* find(const std::string& name) const {
    for (const auto& b : blocks)
      if (b.name == name) return &b;
    return nullptr;
  }
};

namespace detail {
class ByteWriter {
 public:
  std::vector<unsigned char> bytes;
  void raw(const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    bytes.insert(bytes.end(), c, c + n);
  }
  template <class U>
  void le(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) bytes.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
  }
  void f32(float v) { le(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    le(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
};

class ByteReader {
 public:
  ByteReader(const std::vector<unsigned char>& b, std::size_t end) : b_(b), end_(end) {}
  template <class U>
  U le() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<U>(b_[pos_ + i]) << (8 * i));
    pos_ += sizeof(U);
    return v;
  }
  float f32() { return std::bit_cast<float>(le<std::uint32_t>()); }
  double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }
  std::string str() {
    const auto n = le<std::uint32_t>();
    need(n);
    std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }
  void need(std::size_t n) const {
    if (pos_ + n > end_) throw WeightsError("weights file is truncated or malformed");
  }

 private:
  const std::vector<unsigned char>& b_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

inline std::uint32_t crc(const unsigned char* p, std::size_t n) {
  uLong c = crc32(0L, Z_NULL, 0);
  while (n > 0) {
    const uInt chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    c = crc32(c, p, chunk);
    p += chunk;
    n -= chunk;
  }
  return static_cast<std::uint32_t>(c);
}
}  // namespace detail

inline std::vector<unsigned char> encode_weights(const WeightsContainer& c) {
  std::set<std::string> names;
  for (const auto& b : c.blocks) {
    if (!names.insert(b.name).second) throw WeightsError("duplicate weight block: " + b.name);
    if (static_cast<std::size_t>(b.rows) * b.cols != b.values.size())
      throw WeightsError("weight block " + b.name + " has the wrong number of values");
  }
  detail::ByteWriter w;
  w.raw(kWeightsMagic, sizeof kWeightsMagic);
  w.le(c.version);
  const std::size_t size_at = w.bytes.size();
  w.le(std::uint64_t{0});
  w.str(c.header.dump());
  w.le(static_cast<std::uint32_t>(c.blocks.size()));
  for (const auto& b : c.blocks) {
    w.str(b.name);
    w.le(b.rows);
    w.le(b.cols);
    w.le(static_cast<std::uint8_t>(b.dtype));
    for (double v : b.values) {
      if (b.dtype == DType::f32) w.f32(static_cast<float>(v));
      else w.f64(v);
    }
  }
  const std::uint64_t total = w.bytes.size() + 4;
  for (std::size_t i = 0; i < 8; ++i) w.bytes[size_at + i] = static_cast<unsigned char>((total >> (8 * i)) & 0xff);
  w.le(detail::crc(w.bytes.data(), w.bytes.size()));
  return w.bytes;
}

inline WeightsContainer decode_weights(const std::vector<unsigned char>& bytes) {
  constexpr std::size_t prefix = sizeof kWeightsMagic + 4 + 8;
  if (bytes.size() < sizeof kWeightsMagic || std::memcmp(bytes.data(), kWeightsMagic, sizeof kWeightsMagic) != 0)
    throw WeightsError("not a weights file (bad magic bytes)");
  if (bytes.size() < prefix + 4) throw WeightsError("weights file is truncated");
  detail::ByteReader head(bytes, bytes.size());
  for (std::size_t i = 0; i < sizeof kWeightsMagic; ++i) head.le<std::uint8_t>();
  WeightsContainer c;
  c.version = head.le<std::uint32_t>();
  if (c.version != kWeightsVersion) {
    throw WeightsError("unsupported weights format version " + std::to_string(c.version) + " (this build reads version " +
                       std::to_string(kWeightsVersion) + ")");
  }
  const auto total = head.le<std::uint64_t>();
  if (bytes.size() < total) {
    throw WeightsError("weights file is truncated: expected " + std::to_string(total) + " bytes, found " +
                       std::to_string(bytes.size()));
  }
  if (bytes.size() > total) throw WeightsError("weights file has trailing bytes");
  const std::size_t body = bytes.size() - 4;
  std::uint32_t stored = 0;
  for (std::size_t i = 0; i < 4; ++i) stored |= static_cast<std::uint32_t>(bytes[body + i]) << (8 * i);
  if (stored != detail::crc(bytes.data(), body)) throw WeightsError("weights checksum mismatch (file is corrupted)");

  detail::ByteReader r(bytes, body);
  for (std::size_t i = 0; i < prefix; ++i) r.le<std::uint8_t>();
  try {
    c.header = Json::parse(r.str());
  } catch (const Json::exception& e) {
    throw WeightsError(std::string("weights header is not valid JSON: ") + e.what());
  }
  const auto n = r.le<std::uint32_t>();
  std::set<std::string> names;
  for (std::uint32_t i = 0; i < n; ++i) {
    WeightBlock b;
    b.name = r.str();
    if (!names.insert(b.name).second) throw WeightsError("duplicate weight block: " + b.name);
    b.rows = r.le<std::uint32_t>();
    b.cols = r.le<std::uint32_t>();
    const auto dt = r.le<std::uint8_t>();
    if (dt > 1) throw WeightsError("unknown dtype in block " + b.name);
    b.dtype = static_cast<DType>(dt);
    const std::size_t count = static_cast<std::size_t>(b.rows) * b.cols;
    r.need(count * (b.dtype == DType::f32 ? 4 : 8));
    b.values.resize(count);
    for (auto& v : b.values) v = b.dtype == DType::f32 ? static_cast<double>(r.f32()) : r.f64();
    c.blocks.push_back(std::move(b));
  }
  if (r.pos() != body) throw WeightsError("weights file has unexpected trailing data");
  return c;
}

inline void save_weights(const std::string& path, const WeightsContainer& c) {
  const auto bytes = encode_weights(c);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw WeightsError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw WeightsError("write failed: " + path);
}

inline WeightsContainer load_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WeightsError("cannot read " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_weights(bytes);
}

// ---- models and checkpoints ----

template <class T>
void add_blocks(WeightsContainer& c, const std::string& prefix, const std::vector<nn::Parameter<T>*>& params, DType dt) {
  for (const auto* p : params) {
    WeightBlock b;
    b.name = prefix + p->name;
    b.rows = static_cast<std::uint32_t>(p->value.rows());
    b.cols = static_cast<std::uint32_t>(p->value.cols());
    b.dtype = dt;
    b.values.assign(p->value.values.begin(), p->value.values.end());
    c.blocks.push_back(std::move(b));
  }
}

template <class T>
void read_blocks(const WeightsContainer& c, const std::string& prefix, const std::vector<nn::Parameter<T>*>& params) {
  for (auto* p : params) {
    const auto* b = c.find(prefix + p->name);
    if (!b) throw WeightsError("weights file lacks block " + prefix + p->name);
    if (b->rows != p->value.rows() || b->cols != p->value.cols())
      throw WeightsError("block " + b->name + " has shape " + std::to_string(b->rows) + "x" + std::to_string(b->cols) +
                         ", model expects " + std::to_string(p->value.rows()) + "x" + std::to_string(p->value.cols()));
    for (std::size_t i = 0; i < b->values.size(); ++i) p->value.values[i] = static_cast<T>(b->values[i]);
  }
}

template <class T>
WeightsContainer model_to_container(Model<T>& m, DType dt = DType::f32) {
  WeightsContainer c;
  c.header = {{"skeleton", skeleton_to_json(*m.skeleton)},
              {"config", config_to_json(m.cfg)},
              {"stats", stats_to_json(m.stats)}};
  add_blocks(c, "generator/", m.generator.parameters(), dt);
  add_blocks(c, "critic/", m.critic_parameters(), dt);
  return c;
}

template <class T>
std::unique_ptr<Model<T>> model_from_container(const WeightsContainer& c, bool with_critics = true) {
  std::shared_ptr<const Skeleton> s;
  ModelConfig cfg;
  NormStats stats;
  try {
    s = std::make_shared<const Skeleton>(skeleton_from_json(c.header.at("skeleton")));
    cfg = config_from_json(c.header.at("config"));
    stats = stats_from_json(c.header.at("stats"));
  } catch (const Json::exception& e) {
    throw WeightsError(std::string("weights header is incomplete: ") + e.what());
  }
  auto m = std::make_unique<Model<T>>(cfg, s, stats);
  read_blocks(c, "generator/", m->generator.parameters());
  if (with_critics) read_blocks(c, "critic/", m->critic_parameters());
  return m;
}

template <class T>
std::unique_ptr<Model<T>> load_model(const std::string& path) {
  return model_from_container<T>(load_weights(path));
}

template <class T>
void save_model(const std::string& path, Model<T>& m) {
  save_weights(path, model_to_container(m, DType::f32));
}

namespace detail {
template <class T>
void add_moments(WeightsContainer& c, const std::string& prefix, nn::AmsGrad<T>& opt) {
  const auto& ps = opt.params();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto& st = opt.state()[i];
    const std::pair<const char*, const std::vector<T>*> parts[] = {{"m", &st.m}, {"v", &st.v}, {"v_hat", &st.v_hat}};
    for (const auto& [tag, vals] : parts) {
      WeightBlock b;
      b.name = prefix + ps[i]->name + "/" + tag;
      b.rows = 1;
      b.cols = static_cast<std::uint32_t>(vals->size());
      b.dtype = DType::f64;
      b.values.assign(vals->begin(), vals->end());
      c.blocks.push_back(std::move(b));
    }
  }
}

template <class T>
void read_moments(const WeightsContainer& c, const std::string& prefix, nn::AmsGrad<T>& opt) {
  const auto& ps = opt.params();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    auto& st = opt.state()[i];
    std::pair<const char*, std::vector<T>*> parts[] = {{"m", &st.m}, {"v", &st.v}, {"v_hat", &st.v_hat}};
    for (auto& [tag, vals] : parts) {
      const auto* b = c.find(prefix + ps[i]->name + "/" + tag);
      if (!b || b->values.size() != vals->size()) throw WeightsError("checkpoint lacks optimizer state for " + ps[i]->name);
      for (std::size_t k = 0; k < vals->size(); ++k) (*vals)[k] = static_cast<T>(b->values[k]);
    }
  }
}
}  // namespace detail

// Full training state: parameters and moments in 64-bit, iteration counter and RNG state in the header.
template <class T>
void save_checkpoint(const std::string& path, Model<T>& m, Trainer<T>& t) {
  WeightsContainer c = model_to_container(m, DType::f64);
  c.header["checkpoint"] = {{"iteration", t.iteration()},
                            {"rng", t.rng_state()},
                            {"generator_steps", t.generator_optimizer().steps()},
                            {"critic_steps", t.critic_optimizer().steps()},
                            {"precision", sizeof(T) == 8 ? "f64" : "f32"}};
  detail::add_moments(c, "optimizer/generator/", t.generator_optimizer());
  detail::add_moments(c, "optimizer/critic/", t.critic_optimizer());
  save_weights(path, c);
}

// Restores a trainer built on a model loaded from the same checkpoint.
template <class T>
void restore_trainer(const WeightsContainer& c, Trainer<T>& t) {
  if (!c.header.contains("checkpoint")) throw WeightsError("weights file is not a training checkpoint");
  const auto& h = c.header.at("checkpoint");
  t.set_iteration(h.at("iteration").get<long>());
  t.set_rng_state(h.at("rng").get<std::string>());
  t.generator_optimizer().set_steps(h.at("generator_steps").get<std::size_t>());
  t.critic_optimizer().set_steps(h.at("critic_steps").get<std::size_t>());
  detail::read_moments(c, "optimizer/generator/", t.generator_optimizer());
  detail::read_moments(c, "optimizer/critic/", t.critic_optimizer());
}

}  // namespace inbetween
