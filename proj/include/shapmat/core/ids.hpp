#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>

namespace shapmat {

// Opaque identifier; the tag keeps player and task ids from mixing.
template <class Tag>
class Id {
 public:
  using value_type = std::uint64_t;

  constexpr Id() = default;
  constexpr explicit Id(value_type value) : value_(value) {}

  constexpr value_type value() const { return value_; }

  friend constexpr auto operator<=>(const Id&, const Id&) = default;

 private:
  value_type value_ = 0;
};

struct PlayerTag {};
struct TaskTag {};

using PlayerId = Id<PlayerTag>;
using TaskId = Id<TaskTag>;

template <class Tag>
std::ostream& operator<<(std::ostream& os, Id<Tag> id) {
  return os << id.value();
}

}  // namespace shapmat

template <class Tag>
struct std::hash<shapmat::Id<Tag>> {
  std::size_t operator()(shapmat::Id<Tag> id) const noexcept {
    return std::hash<std::uint64_t>{}(id.value());
  }
};
