#include "sqa/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "sqa/errors.hpp"

namespace sqa {
namespace {

constexpr char kMagic[4] = {'S', 'Q', 'A', 'W'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& b) : b_(b) {}
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b_[pos_++]) << (8 * i);
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_++]) << (8 * i);
    return v;
  }
  std::uint8_t u8() {
    need(1);
    return b_[pos_++];
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t remaining() const { return b_.size() - pos_; }

 private:
  void need(std::size_t k) const {
    if (b_.size() - pos_ < k) throw DomainError("checkpoint is truncated");
  }
  const std::vector<std::uint8_t>& b_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const CheckpointHeader& h, const WorldlineState& state) {
  if (h.n != state.n() || h.slices != state.slices()) throw DomainError("checkpoint header does not match state shape");
  Writer w;
  for (char c : kMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(h.n));
  w.u32(static_cast<std::uint32_t>(h.slices));
  w.f64(h.s);
  w.f64(h.beta);
  w.u64(h.seed);
  w.u64(static_cast<std::uint64_t>(h.steps));
  w.f64(h.alpha);
  w.f64(h.eta);
  w.u8(h.mode == CostMode::Spike ? 0 : 1);
  for (std::uint64_t word : state.words()) w.u64(word);
  return w.take();
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  for (char c : kMagic) {
    if (r.u8() != static_cast<std::uint8_t>(c)) throw DomainError("not a worldline checkpoint (bad magic)");
  }
  const std::uint32_t version = r.u32();
  if (version != kVersion) throw DomainError("unsupported checkpoint version " + std::to_string(version));
  CheckpointHeader h;
  h.n = static_cast<int>(r.u32());
  h.slices = static_cast<int>(r.u32());
  h.s = r.f64();
  h.beta = r.f64();
  h.seed = r.u64();
  h.steps = static_cast<std::int64_t>(r.u64());
  h.alpha = r.f64();
  h.eta = r.f64();
  const std::uint8_t mode = r.u8();
  if (mode > 1) throw DomainError("checkpoint has an unknown cost mode");
  h.mode = mode == 0 ? CostMode::Spike : CostMode::Spikeless;
  if (h.n < 1 || h.slices < 2) throw DomainError("checkpoint has an invalid shape");

  SpikeParams p{h.n, h.alpha, h.eta};
  validate(p, h.mode);
  WorldlineState state(p, h.slices);
  const std::size_t count = static_cast<std::size_t>(h.slices) * state.words_per_slice();
  if (r.remaining() != count * 8) throw DomainError("checkpoint payload size does not match its header");
  std::vector<std::uint64_t> words(count);
  for (auto& word : words) word = r.u64();
  state.assign_words(words);
  return {h, std::move(state)};
}

void save_checkpoint(const std::string& path, const CheckpointHeader& header, const WorldlineState& state) {
  const auto bytes = encode_checkpoint(header, state);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DomainError("cannot open checkpoint for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InternalError("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open checkpoint: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace sqa
