#include "shapmat/models/model_family.hpp"

#include <cmath>

#include "shapmat/core/error.hpp"
#include "shapmat/models/support_profile.hpp"

namespace shapmat {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, message);
}

struct Validator {
  void operator()(const WknnParams& p) const {
    require(p.k >= 1, "wknn: k must be >= 1");
    require(p.support_multiplier >= 1.0, "wknn: support_multiplier must be >= 1");
  }
  void operator()(const TreeParams& p) const {
    require(p.min_leaf >= 1, "tree: min_leaf must be >= 1");
  }
  void operator()(const RbfParams& p) const {
    require(!p.gamma || (std::isfinite(*p.gamma) && *p.gamma > 0.0),
            "rbf: gamma must be > 0");
    require(p.relevance_threshold > 0.0 && p.relevance_threshold <= 1.0,
            "rbf: relevance_threshold must be in (0, 1]");
  }
  void operator()(const RidgeParams& p) const {
    require(p.mu > 0.0, "ridge: mu must be > 0");
    require(p.loss_lipschitz > 0.0, "ridge: loss_lipschitz must be > 0");
    require(p.loss_at_zero_bound >= p.loss_lipschitz * std::log(2.0) * (1 - 1e-12),
            "ridge: loss_at_zero_bound must be >= loss_lipschitz * ln 2");
    require(p.support_k >= 1, "ridge: support_k must be >= 1");
  }
};

}  // namespace

void validate(const ModelFamily& family) { std::visit(Validator{}, family); }

std::string family_name(const ModelFamily& family) {
  struct Namer {
    std::string operator()(const WknnParams&) const { return "wknn"; }
    std::string operator()(const TreeParams&) const { return "tree"; }
    std::string operator()(const RbfParams&) const { return "rbf"; }
    std::string operator()(const RidgeParams&) const { return "ridge"; }
  };
  return std::visit(Namer{}, family);
}

const char* to_string(UtilityKind kind) noexcept {
  switch (kind) {
    case UtilityKind::kAccuracy: return "accuracy";
    case UtilityKind::kNegativeLoss: return "negative_loss";
    case UtilityKind::kConfidence: return "confidence";
  }
  return "unknown";
}

UtilityKind utility_kind_from_string(const std::string& name) {
  if (name == "accuracy") return UtilityKind::kAccuracy;
  if (name == "negative_loss") return UtilityKind::kNegativeLoss;
  if (name == "confidence") return UtilityKind::kConfidence;
  throw Error(ErrorCode::kInvalidArgument, "unknown utility '" + name + "'");
}

const char* to_string(ProfileKind kind) noexcept {
  switch (kind) {
    case ProfileKind::kNeighborWeights: return "neighbor_weights";
    case ProfileKind::kDecisionPath: return "decision_path";
    case ProfileKind::kKernelRelevance: return "kernel_relevance";
    case ProfileKind::kEmbedding: return "embedding";
    case ProfileKind::kPpr: return "ppr";
  }
  return "unknown";
}

bool is_weight_kind(ProfileKind kind) noexcept {
  return kind == ProfileKind::kNeighborWeights ||
         kind == ProfileKind::kKernelRelevance || kind == ProfileKind::kPpr;
}

}  // namespace shapmat
