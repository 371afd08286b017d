#pragma once

#include <cstdint>
#include <vector>

#include "lbt/core/ids.hpp"
#include "lbt/game/game_spec.hpp"

namespace lbt::game {

// Order in which a session poses its questions. Built from whole shuffled
// permutations of all states with the final cycle truncated, so per-state
// visit counts differ by at most one.
struct Schedule {
  std::vector<StateId> order;
  std::uint64_t seed = 0;

  bool operator==(const Schedule&) const = default;
};

Schedule make_schedule(const GameSpec& game, std::uint64_t seed);

}  // namespace lbt::game
