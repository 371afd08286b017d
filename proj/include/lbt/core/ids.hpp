#pragma once

#include <compare>
#include <cstddef>
#include <functional>

namespace lbt {

// Dense zero-based index tagged with the kind of thing it indexes.
template <class Tag>
struct Index {
  std::size_t value = 0;

  constexpr Index() = default;
  constexpr explicit Index(std::size_t v) : value(v) {}

  constexpr auto operator<=>(const Index&) const = default;
};

using StateId = Index<struct StateTag>;
using ActionId = Index<struct ActionTag>;

}  // namespace lbt

template <class Tag>
struct std::hash<lbt::Index<Tag>> {
  std::size_t operator()(const lbt::Index<Tag>& i) const noexcept {
    return std::hash<std::size_t>{}(i.value);
  }
};
