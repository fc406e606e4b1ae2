#pragma once

#include <memory>
#include <vector>

#include "shapmat/harness/dataset.hpp"
#include "shapmat/maintenance/engine.hpp"
#include "shapmat/selfval/selfval.hpp"

namespace fixture {

// A WKNN game over blobs with a support-scope self-valuation matrix and an
// engine whose anchor bases point at the exact local solutions.
struct Setup {
  std::unique_ptr<shapmat::Game> game;
  std::unique_ptr<shapmat::ShapleyMatrix> matrix;
  std::unique_ptr<shapmat::Engine> engine;
  std::vector<shapmat::DataPoint> spare;  // records not in the initial pool
};

inline Setup make_game(shapmat::GameConfig gc, std::size_t initial, std::size_t spare,
                       std::size_t anchors, std::uint64_t seed, double tau = 1.0) {
  using namespace shapmat;
  BlobSpec spec;
  spec.classes = 3;
  spec.per_class = (initial + spare + 2) / 3;
  spec.total = initial + spare;
  spec.separation = 2.0;
  spec.seed = seed;
  auto points = make_blobs(spec);

  Setup s;
  s.spare.assign(points.begin() + static_cast<std::ptrdiff_t>(initial), points.end());
  points.resize(initial);
  s.game = std::make_unique<Game>(gc, points);
  s.game->fit();
  register_proxy_tasks(*s.game);

  EngineConfig ec;
  ec.tau = tau;
  ec.distance.kind = s.game->natural_profile_kind();
  auto ids = s.game->universe().members();
  std::vector<PlayerId> pool(ids.begin(), ids.end());
  auto selection = select_anchors_fps(pool, anchors, proxy_distance(*s.game, ec.distance));
  SelfValOptions opts;
  opts.scope = SelfValScope::kSupport;
  auto built = build_self_matrix(*s.game, selection.anchors, opts);
  s.matrix = std::make_unique<ShapleyMatrix>(std::move(built.matrix));
  s.engine = std::make_unique<Engine>(*s.game, *s.matrix, ec);
  for (const auto& [t, basis] : built.basis) {
    s.engine->set_basis(t, basis, built.provenance.at(t));
  }
  return s;
}

inline Setup make_wknn(std::size_t initial, std::size_t spare, std::size_t anchors,
                       std::uint64_t seed, double tau = 1.0, std::size_t k = 3,
                       double multiplier = 2.0) {
  shapmat::GameConfig gc;
  gc.family = shapmat::WknnParams{k, multiplier};
  gc.utility = shapmat::UtilityKind::kConfidence;
  return make_game(gc, initial, spare, anchors, seed, tau);
}

// Kernel-vote game whose supports grow when a relevant player arrives.
inline Setup make_rbf(std::size_t initial, std::size_t spare, std::size_t anchors,
                      std::uint64_t seed) {
  shapmat::GameConfig gc;
  gc.family = shapmat::RbfParams{0.5, 0.3};
  gc.utility = shapmat::UtilityKind::kConfidence;
  gc.support_cap = 12;
  return make_game(gc, initial, spare, anchors, seed);
}

}  // namespace fixture
