#pragma once

#include <string>
#include <vector>

#include "gsom/error.hpp"
#include "gsom/topology.hpp"

namespace gsom {

enum class PartitionProvenance { Components, StarRays, Hac };

inline std::string to_string(PartitionProvenance p) {
  switch (p) {
    case PartitionProvenance::Components: return "components";
    case PartitionProvenance::StarRays: return "star_rays";
    case PartitionProvenance::Hac: return "hac";
  }
  return "components";
}

/// Surjective map of units onto macro-classes 1..S.
class MacroPartition {
 public:
  MacroPartition(std::vector<int> unit_to_class, PartitionProvenance provenance)
      : unit_to_class_(std::move(unit_to_class)), provenance_(provenance) {
    require(!unit_to_class_.empty(), "MacroPartition: no units");
    class_count_ = 0;
    for (int c : unit_to_class_) {
      require(c >= 1, "MacroPartition: class ids start at 1");
      class_count_ = std::max(class_count_, c);
    }
    std::vector<char> seen(static_cast<std::size_t>(class_count_), 0);
    for (int c : unit_to_class_) seen[c - 1] = 1;
    for (int c = 0; c < class_count_; ++c)
      require(seen[c] != 0, "MacroPartition: class " + std::to_string(c + 1) + " has no units");
  }

  int unit_count() const { return static_cast<int>(unit_to_class_.size()); }
  int class_count() const { return class_count_; }
  PartitionProvenance provenance() const { return provenance_; }

  /// Macro-class of a 1-indexed unit.
  int class_of(int unit) const {
    require(unit >= 1 && unit <= unit_count(), "class_of: unit id out of range");
    return unit_to_class_[unit - 1];
  }

  /// Units of class c, ascending.
  std::vector<int> members(int c) const {
    require(c >= 1 && c <= class_count_, "members: class id out of range");
    std::vector<int> out;
    for (int u = 1; u <= unit_count(); ++u)
      if (unit_to_class_[u - 1] == c) out.push_back(u);
    return out;
  }

  const std::vector<int>& unit_to_class() const { return unit_to_class_; }

 private:
  std::vector<int> unit_to_class_;
  int class_count_ = 0;
  PartitionProvenance provenance_;
};

/// Partition of units into connected components, numbered in order of the
/// smallest member unit id.
inline MacroPartition components(const MapTopology& topo) {
  std::vector<int> u2c(static_cast<std::size_t>(topo.unit_count()));
  for (int u = 1; u <= topo.unit_count(); ++u) u2c[u - 1] = topo.component_of(u);
  return MacroPartition(std::move(u2c), PartitionProvenance::Components);
}

}  // namespace gsom
