#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "shapmat/core/ids.hpp"

namespace shapmat {

// A set of players kept in ascending id order, so every coalition has exactly
// one serialized form. The form is what the utility cache keys on.
class Coalition {
 public:
  Coalition() = default;
  // Sorts the members; duplicates are rejected with kInvalidArgument.
  explicit Coalition(std::vector<PlayerId> members);
  Coalition(std::initializer_list<PlayerId> members);

  // Caller guarantees strictly ascending members.
  static Coalition from_sorted(std::vector<PlayerId> members);

  std::span<const PlayerId> members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  bool contains(PlayerId player) const;

  // Throws kInvalidArgument naming the first member missing from `universe`.
  void require_subset_of(const Coalition& universe) const;
  bool is_subset_of(const Coalition& other) const;

  Coalition with(PlayerId player) const;
  Coalition without(PlayerId player) const;

  // Subset selected by the bits of `mask` (bit i <-> members()[i]).
  Coalition subset(std::uint64_t mask) const;

  // "3,8,21"; the empty coalition serializes to "".
  std::string key() const;

  friend bool operator==(const Coalition&, const Coalition&) = default;

 private:
  std::vector<PlayerId> members_;
};

Coalition set_union(const Coalition& a, const Coalition& b);
Coalition set_difference(const Coalition& a, const Coalition& b);
std::size_t symmetric_difference_size(const Coalition& a, const Coalition& b);

}  // namespace shapmat
