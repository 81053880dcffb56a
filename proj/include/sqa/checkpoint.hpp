#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sqa/pimc.hpp"

namespace sqa {

struct CheckpointHeader {
  int n = 0;
  int slices = 0;
  double s = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::int64_t steps = 0;
  double alpha = 0.0;
  double eta = 0.0;
  CostMode mode = CostMode::Spike;
};

struct Checkpoint {
  CheckpointHeader header;
  WorldlineState state;
};

/// Binary layout, all fields little-endian:
///   "SQAW" magic, u32 version, i32 n, i32 L, f64 s, f64 beta, u64 seed,
///   i64 steps, f64 alpha, f64 eta, u8 mode, then L * ceil(n/64) u64 words.
std::vector<std::uint8_t> encode_checkpoint(const CheckpointHeader& header, const WorldlineState& state);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::string& path, const CheckpointHeader& header, const WorldlineState& state);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace sqa
