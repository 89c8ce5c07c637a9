#pragma once

#include <cstdint>
#include <string>

#include "qpseudo/qgcn.hpp"

namespace qpseudo {

// Versioned text checkpoint: model config, every parameter array and the
// feature perturbation, serialized as hexfloats so values round-trip exactly.
void save_checkpoint(const std::string& path, const QgcnModel& model,
                     std::uint64_t config_hash);

struct LoadedCheckpoint {
  QgcnModel model;
  std::uint64_t config_hash = 0;
};
LoadedCheckpoint load_checkpoint(const std::string& path);

// Copies shape-matching GCN parameters (projection, layers, curvatures) from
// a saved model into `model`; task heads are left untouched. Used to seed
// node classification from link-prediction weights.
void warm_start_model(QgcnModel& model, const std::string& checkpoint_path);

// FNV-1a over a canonical string; stable across platforms and runs.
std::uint64_t fnv1a(const std::string& s);

}  // namespace qpseudo
