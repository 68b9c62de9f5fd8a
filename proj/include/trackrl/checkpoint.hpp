#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "trackrl/agent.hpp"

namespace trackrl {

// Binary checkpoint, little-endian:
//
//   char[8]  magic "TRKRLCKP"
//   u32      format version (1)
//   u64      architecture hash of (actor, critic)
//   u32      network count (4: actor, critic, target actor, target critic)
//   per network:  u64 n, f64[n] parameters in declaration order
//   per optimizer (actor, critic):  u64 step, u64 n, f64[n] first moment,
//                                   f64[n] second moment
inline constexpr std::array<char, 8> kCheckpointMagic{'T', 'R', 'K', 'R', 'L', 'C', 'K', 'P'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <class T>
void write_pod(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw CheckpointError("checkpoint truncated");
  return v;
}

inline void write_doubles(std::ostream& os, const std::vector<double>& v) {
  write_pod<std::uint64_t>(os, v.size());
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
}

inline std::vector<double> read_doubles(std::istream& is, std::size_t expected) {
  const auto n = read_pod<std::uint64_t>(is);
  if (n != expected) {
    throw CheckpointError("checkpoint holds " + std::to_string(n) + " values where " +
                          std::to_string(expected) + " were expected");
  }
  std::vector<double> v(n);
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw CheckpointError("checkpoint truncated");
  return v;
}

inline std::vector<double> flatten(const std::vector<Tensor>& ts) {
  std::vector<double> out;
  for (const auto& t : ts) out.insert(out.end(), t.data().begin(), t.data().end());
  return out;
}

inline void unflatten(const std::vector<double>& flat, std::vector<Tensor>& ts) {
  std::size_t k = 0;
  for (auto& t : ts) {
    for (double& v : t.data()) v = flat[k++];
  }
}

inline std::size_t total_size(const std::vector<Tensor>& ts) {
  std::size_t n = 0;
  for (const auto& t : ts) n += t.size();
  return n;
}

}  // namespace detail

static_assert(std::endian::native == std::endian::little,
              "checkpoint layout assumes a little-endian host");

inline void save_checkpoint(const std::string& path, const AgentNets& nets) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw CheckpointError("cannot open checkpoint for writing: " + path);
  os.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  detail::write_pod<std::uint32_t>(os, kCheckpointVersion);
  detail::write_pod<std::uint64_t>(os, nets.hash());
  detail::write_pod<std::uint32_t>(os, 4);
  for (const Network* n : {&nets.actor, &nets.critic, &nets.target_actor, &nets.target_critic}) {
    detail::write_doubles(os, n->flat_parameters());
  }
  for (const AdamState* a : {&nets.actor_adam, &nets.critic_adam}) {
    detail::write_pod<std::uint64_t>(os, a->step);
    const auto m = detail::flatten(a->first_moment);
    const auto v = detail::flatten(a->second_moment);
    detail::write_pod<std::uint64_t>(os, m.size());
    os.write(reinterpret_cast<const char*>(m.data()),
             static_cast<std::streamsize>(m.size() * sizeof(double)));
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  if (!os) throw CheckpointError("failed writing checkpoint: " + path);
}

// Returns the architecture hash stored in a checkpoint header.
inline std::uint64_t read_checkpoint_hash(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot open checkpoint: " + path);
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kCheckpointMagic) throw CheckpointError("not a trackrl checkpoint: " + path);
  const auto version = detail::read_pod<std::uint32_t>(is);
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  return detail::read_pod<std::uint64_t>(is);
}

inline void load_checkpoint(const std::string& path, AgentNets& nets) {
  const std::uint64_t hash = read_checkpoint_hash(path);
  if (hash != nets.hash()) {
    throw CheckpointError("checkpoint architecture hash does not match the configured networks");
  }
  std::ifstream is(path, std::ios::binary);
  is.seekg(static_cast<std::streamoff>(kCheckpointMagic.size() + sizeof(std::uint32_t) +
                                       sizeof(std::uint64_t)));
  if (detail::read_pod<std::uint32_t>(is) != 4) throw CheckpointError("bad network count");
  for (Network* n : {&nets.actor, &nets.critic, &nets.target_actor, &nets.target_critic}) {
    n->set_flat_parameters(detail::read_doubles(is, n->parameter_count()));
  }
  for (AdamState* a : {&nets.actor_adam, &nets.critic_adam}) {
    const auto step = detail::read_pod<std::uint64_t>(is);
    const std::size_t n = detail::total_size(a->first_moment);
    const auto stored = detail::read_pod<std::uint64_t>(is);
    if (stored != n) throw CheckpointError("optimizer state size mismatch");
    std::vector<double> m(n), v(n);
    is.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(n * sizeof(double)));
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!is) throw CheckpointError("checkpoint truncated");
    a->step = step;
    detail::unflatten(m, a->first_moment);
    detail::unflatten(v, a->second_moment);
  }
}

}  // namespace trackrl
