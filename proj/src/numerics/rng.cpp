// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#include "bioner/numerics/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace bioner {

namespace {
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}
}  // namespace

std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Rng Rng::derive(std::uint64_t seed, std::string_view label, std::uint64_t index) {
  std::uint64_t s = splitmix64_mix(seed ^ fnv1a(label));
  s = splitmix64_mix(s + index * kGamma);
  return Rng(s);
}

std::uint64_t Rng::next_u64() {
  ++position_;
  return splitmix64_mix(seed_ + position_ * kGamma);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::uniform_int(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_int: empty range");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::truncated_normal(double stddev, double clip) {
  for (;;) {
    const double z = normal();
    if (std::fabs(z) <= clip) return z * stddev;
  }
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
  if (k > n) throw std::invalid_argument("sample_without_replacement: k > n");
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(uniform_int(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

EpochStream::EpochStream(std::size_t n, std::uint64_t seed, std::string_view label)
    : n_(n), seed_(seed), label_(label) {
  if (n == 0) throw std::invalid_argument("EpochStream needs at least one item");
  load_epoch(0);
}

std::size_t EpochStream::next() {
  if (offset_ == n_) load_epoch(epoch_ + 1);
  return order_[offset_++];
}

void EpochStream::seek(std::uint64_t position) {
  const std::uint64_t epoch = position / n_;
  if (epoch != epoch_) load_epoch(epoch);
  offset_ = static_cast<std::size_t>(position % n_);
}

void EpochStream::load_epoch(std::uint64_t epoch) {
  order_.resize(n_);
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  Rng rng = Rng::derive(seed_, label_, epoch);
  rng.shuffle(order_);
  epoch_ = epoch;
  offset_ = 0;
}

}  // namespace bioner
