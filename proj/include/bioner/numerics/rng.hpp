// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bioner {

/// Counter-based SplitMix64 stream.
///
/// The n-th draw (0-based) of a stream with seed s is
///   mix(s + (n + 1) * 0x9E3779B97F4A7C15)
/// where mix is the SplitMix64 finalizer. A stream is fully described by
/// (seed, position), so it can be checkpointed and restored exactly and
/// gives identical integers on every platform. All derived draws (uniform
/// reals, bounded integers, normals) consume a documented number of words.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0, std::uint64_t position = 0) : seed_(seed), position_(position) {}

  /// Independent child stream keyed by a label and an index.
  static Rng derive(std::uint64_t seed, std::string_view label, std::uint64_t index = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t position() const { return position_; }

  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53 random bits. One word.
  double uniform();

  /// Uniform in [0, n) by rejection; unbiased. n must be > 0.
  std::uint64_t uniform_int(std::uint64_t n);

  /// True with probability p. One word.
  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller (cosine branch). Two words.
  double normal();

  /// Normal(0, stddev) resampled until |x| <= clip * stddev.
  double truncated_normal(double stddev, double clip);

  /// Fisher-Yates shuffle.
  template <typename Vec>
  void shuffle(Vec& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  /// k distinct indices from [0, n), in draw order (partial Fisher-Yates).
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::uint64_t seed_;
  std::uint64_t position_;
};

std::uint64_t splitmix64_mix(std::uint64_t z);

/// Endless index stream over [0, n): epoch e is a shuffle drawn from
/// Rng::derive(seed, label, e). Position k of the stream depends only on
/// (n, seed, label, k), so a run can seek to where it left off.
class EpochStream {
 public:
  EpochStream(std::size_t n, std::uint64_t seed, std::string_view label);

  std::size_t next();
  /// Moves to absolute stream position `position`.
  void seek(std::uint64_t position);

 private:
  void load_epoch(std::uint64_t epoch);

  std::size_t n_;
  std::uint64_t seed_;
  std::string label_;
  std::uint64_t epoch_ = 0;
  std::size_t offset_ = 0;
  std::vector<std::size_t> order_;
};

}  // namespace bioner
