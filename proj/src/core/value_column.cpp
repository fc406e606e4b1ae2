#include "shapmat/core/value_column.hpp"

#include "shapmat/core/error.hpp"

namespace shapmat {

const char* to_string(Provenance p) noexcept {
  switch (p) {
    case Provenance::kExactLocal: return "EXACT_LOCAL";
    case Provenance::kMonteCarlo: return "MC";
    case Provenance::kInterpolated: return "INTERPOLATED";
    case Provenance::kReused: return "REUSED";
  }
  return "UNKNOWN";
}

SupportSet SupportSet::bounded(TaskId task, Coalition members,
                               std::uint64_t epoch, std::size_t k_max) {
  if (members.size() > k_max) throw SupportTooLarge(members.size(), k_max);
  return SupportSet{task, std::move(members), epoch};
}

}  // namespace shapmat
