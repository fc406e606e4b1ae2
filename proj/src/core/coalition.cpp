#include "shapmat/core/coalition.hpp"

#include <algorithm>
#include <bit>
#include <iterator>

#include "shapmat/core/error.hpp"

namespace shapmat {

Coalition::Coalition(std::vector<PlayerId> members) : members_(std::move(members)) {
  std::sort(members_.begin(), members_.end());
  auto dup = std::adjacent_find(members_.begin(), members_.end());
  if (dup != members_.end()) {
    throw Error(ErrorCode::kInvalidArgument,
                "duplicate coalition member " + std::to_string(dup->value()));
  }
}

Coalition::Coalition(std::initializer_list<PlayerId> members)
    : Coalition(std::vector<PlayerId>(members)) {}

Coalition Coalition::from_sorted(std::vector<PlayerId> members) {
  Coalition c;
  c.members_ = std::move(members);
  return c;
}

bool Coalition::contains(PlayerId player) const {
  return std::binary_search(members_.begin(), members_.end(), player);
}

bool Coalition::is_subset_of(const Coalition& other) const {
  return std::includes(other.members_.begin(), other.members_.end(),
                       members_.begin(), members_.end());
}

void Coalition::require_subset_of(const Coalition& universe) const {
  for (PlayerId z : members_) {
    if (!universe.contains(z)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "player " + std::to_string(z.value()) + " is not in the universe");
    }
  }
}

Coalition Coalition::with(PlayerId player) const {
  if (contains(player)) return *this;
  std::vector<PlayerId> out(members_);
  out.insert(std::upper_bound(out.begin(), out.end(), player), player);
  return from_sorted(std::move(out));
}

Coalition Coalition::without(PlayerId player) const {
  std::vector<PlayerId> out;
  out.reserve(members_.size());
  for (PlayerId z : members_) {
    if (z != player) out.push_back(z);
  }
  return from_sorted(std::move(out));
}

Coalition Coalition::subset(std::uint64_t mask) const {
  std::vector<PlayerId> out;
  out.reserve(static_cast<std::size_t>(std::popcount(mask)));
  for (std::size_t i = 0; i < members_.size() && mask != 0; ++i, mask >>= 1) {
    if (mask & 1U) out.push_back(members_[i]);
  }
  return from_sorted(std::move(out));
}

std::string Coalition::key() const {
  std::string out;
  out.reserve(members_.size() * 4);
  for (std::size_t i = 0; i < members_.size(); ++i) {
    if (i) out.push_back(',');
    out += std::to_string(members_[i].value());
  }
  return out;
}

Coalition set_union(const Coalition& a, const Coalition& b) {
  std::vector<PlayerId> out;
  std::set_union(a.members().begin(), a.members().end(), b.members().begin(),
                 b.members().end(), std::back_inserter(out));
  return Coalition::from_sorted(std::move(out));
}

Coalition set_difference(const Coalition& a, const Coalition& b) {
  std::vector<PlayerId> out;
  std::set_difference(a.members().begin(), a.members().end(), b.members().begin(),
                      b.members().end(), std::back_inserter(out));
  return Coalition::from_sorted(std::move(out));
}

std::size_t symmetric_difference_size(const Coalition& a, const Coalition& b) {
  std::vector<PlayerId> out;
  std::set_symmetric_difference(a.members().begin(), a.members().end(),
                                b.members().begin(), b.members().end(),
                                std::back_inserter(out));
  return out.size();
}

}  // namespace shapmat
