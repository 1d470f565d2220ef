// Index-selection schedules: independent uniform sampling, random
// reshuffling (fresh permutation each epoch), shuffle-once (one permutation
// for the whole run) and the deterministic cyclic order. Permutations come
// from a Fisher-Yates shuffle driven by the seeded engine in rng.hpp, so
// equal (kind, n, seed) yields identical index streams everywhere.
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "visolve/rng.hpp"

namespace visolve {

enum class ScheduleKind { Independent, RandomReshuffling, ShuffleOnce, Cyclic };

ScheduleKind parse_schedule_kind(std::string_view name);  // independent|rr|so|cyclic
std::string to_string(ScheduleKind kind);

class Schedule {
 public:
  Schedule(ScheduleKind kind, int n, std::uint64_t seed);

  // Resets the cursor; reshuffles for RandomReshuffling. Legal at epoch 0
  // or when the previous epoch is exhausted.
  void begin_epoch(int epoch);

  // Next component index. Permutation kinds walk their epoch permutation
  // and throw once it is exhausted; Independent draws fresh and unbounded.
  int next_index();

  ScheduleKind kind() const { return kind_; }
  int n() const { return n_; }
  std::uint64_t seed() const { return seed_; }
  int cursor() const { return cursor_; }
  const std::vector<int>& permutation() const { return permutation_; }

 private:
  void shuffle();

  ScheduleKind kind_;
  int n_;
  std::uint64_t seed_;
  std::vector<int> permutation_;
  int cursor_;
  rng::Engine engine_;
};

}  // namespace visolve
