#include "visolve/schedule.hpp"

#include <numeric>
#include <stdexcept>

namespace visolve {

ScheduleKind parse_schedule_kind(std::string_view name) {
  if (name == "independent") return ScheduleKind::Independent;
  if (name == "rr") return ScheduleKind::RandomReshuffling;
  if (name == "so") return ScheduleKind::ShuffleOnce;
  if (name == "cyclic") return ScheduleKind::Cyclic;
  throw std::invalid_argument("unknown schedule kind: " + std::string(name));
}

std::string to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::Independent: return "independent";
    case ScheduleKind::RandomReshuffling: return "rr";
    case ScheduleKind::ShuffleOnce: return "so";
    case ScheduleKind::Cyclic: return "cyclic";
  }
  return "?";
}

Schedule::Schedule(ScheduleKind kind, int n, std::uint64_t seed)
    : kind_(kind), n_(n), seed_(seed), cursor_(n), engine_(seed) {
  if (n_ < 1) throw std::invalid_argument("Schedule: n must be >= 1");
  permutation_.resize(static_cast<size_t>(n_));
  std::iota(permutation_.begin(), permutation_.end(), 0);
  // Shuffle-once draws its single permutation now, outside the epoch loop.
  if (kind_ == ScheduleKind::ShuffleOnce) shuffle();
}

void Schedule::shuffle() {
  for (int i = n_ - 1; i > 0; --i) {
    const int j = static_cast<int>(rng::uniform_below(engine_, static_cast<std::uint64_t>(i) + 1));
    std::swap(permutation_[static_cast<size_t>(i)], permutation_[static_cast<size_t>(j)]);
  }
}

void Schedule::begin_epoch(int epoch) {
  // Independent draws have no epoch bound to exhaust.
  if (kind_ != ScheduleKind::Independent && epoch != 0 && cursor_ != n_) {
    throw std::logic_error("Schedule::begin_epoch: previous epoch not exhausted");
  }
  if (kind_ == ScheduleKind::RandomReshuffling) shuffle();
  cursor_ = 0;
}

int Schedule::next_index() {
  if (kind_ == ScheduleKind::Independent) {
    return static_cast<int>(rng::uniform_below(engine_, static_cast<std::uint64_t>(n_)));
  }
  if (cursor_ >= n_) throw std::logic_error("Schedule::next_index: epoch exhausted");
  return permutation_[static_cast<size_t>(cursor_++)];
}

}  // namespace visolve
