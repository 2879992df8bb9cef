// Copyright 2026 The Psychic Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PSYCHIC_RNG_HPP_
#define PSYCHIC_RNG_HPP_

#include <array>
#include <cstdint>

namespace psychic {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
//
// The 64-bit seed is the key; a 64-bit stream id and a 64-bit block counter
// form the 128-bit counter. Streams are independent, so split(stream) gives
// reproducible sub-generators without sharing state. Samplers below are
// implemented here rather than via <random> distributions so the output
// stream is fixed by this file alone.
class Philox {
 public:
  explicit Philox(std::uint64_t seed, std::uint64_t stream = 0);

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter,
                                            std::array<std::uint32_t, 2> key);

  Philox split(std::uint64_t stream) const { return Philox(seed_, stream); }

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  // Standard normal via the Box-Muller transform (both outputs used).
  double normal();
  // Poisson by sequential inversion for small means, PTRS otherwise.
  std::uint64_t poisson(double mean);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_ = 0;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace psychic

#endif  // PSYCHIC_RNG_HPP_
