#include "lbt/game/schedule.hpp"

#include <numeric>
#include <utility>

#include "lbt/core/error.hpp"
#include "lbt/core/rng.hpp"

namespace lbt::game {

Schedule make_schedule(const GameSpec& game, std::uint64_t seed) {
  const std::size_t n = game.n_states();
  if (n == 0) throw DomainError("cannot schedule a game without questions");

  Schedule s;
  s.seed = seed;
  s.order.reserve(game.iteration_count);
  Rng rng(seed);
  std::vector<std::size_t> cycle(n);
  while (s.order.size() < game.iteration_count) {
    std::iota(cycle.begin(), cycle.end(), std::size_t{0});
    for (std::size_t i = n - 1; i > 0; --i) {
      std::swap(cycle[i], cycle[rng.uniform_index(i + 1)]);
    }
    for (std::size_t i = 0; i < n && s.order.size() < game.iteration_count; ++i) {
      s.order.push_back(StateId{cycle[i]});
    }
  }
  return s;
}

}  // namespace lbt::game
