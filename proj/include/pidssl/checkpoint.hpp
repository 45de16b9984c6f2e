#ifndef PIDSSL_CHECKPOINT_HPP
#define PIDSSL_CHECKPOINT_HPP

#include <cstdint>
#include <string>

#include "pidssl/losses.hpp"
#include "pidssl/network.hpp"

namespace pidssl {

// Versioned binary container, magic "PIDSSL01", little-endian 64-bit floats.
// Holds the model spec, parameters, optimizer state, RNG derivation state
// (master seed + phase + epochs completed) and, for synergy-phase runs, the
// frozen off-diagonal target so training is resumable bit-exactly.
struct Checkpoint {
  MlpSpec spec;
  ModelParams params;
  AdamState adam;
  std::uint64_t seed = 0;
  std::uint32_t phase = 0;  // 0 init, 1 redundancy phase, 2 synergy phase
  std::uint64_t epochs_completed = 0;
  bool has_target = false;
  TargetKind target_kind = TargetKind::Zero;
  Matrix target_matrix;
};

// Atomic write (temp file + rename).
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace pidssl

#endif
