#ifndef BNR_CHECKPOINT_HPP
#define BNR_CHECKPOINT_HPP

#include <filesystem>
#include <iosfwd>

#include "bnr/gibbs.hpp"

namespace bnr {

// Checkpoint file layout, little-endian, no padding:
//
//   char[8]   magic "BNRCKPT\0"
//   u32       format version (1)
//   u32       V
//   u32       R
//   u64       iteration counter
//   u64[4]    xoshiro256** state
//   f64       tau2, mu, theta, Delta
//   f64[q]    gamma
//   f64[q]    s
//   f64[R*V]  u, column-major (node by node)
//   u8[V]     xi
//   i8[R]     lambda
//   f64[R*3]  piTilde, row-major
//   f64[R*R]  M, column-major
//
// with q = V(V-1)/2.
inline constexpr char kCheckpointMagic[8] = {'B', 'N', 'R', 'C', 'K', 'P', 'T', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);

/// Writes to a temporary sibling and renames it into place.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace bnr

#endif
