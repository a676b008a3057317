// Copyright (c) the dynflow contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace dynflow {

/// A level set names the levels information may still flow to. Smaller sets
/// are more restrictive; the flow order is reverse set inclusion.
using LevelSet = std::set<std::string>;

/// l1 ⊑ l2 (l1 at most as restrictive as l2), i.e. l2 ⊆ l1.
inline bool leq(const LevelSet& l1, const LevelSet& l2) {
    return std::includes(l1.begin(), l1.end(), l2.begin(), l2.end());
}

/// Information carrying level set `from` is visible to an observer cleared at
/// `at`: from ⊑ at.
inline bool flows_to(const LevelSet& from, const LevelSet& at) { return leq(from, at); }

std::string to_string(const LevelSet& ls);

struct ResolveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A security lattice as declared by a benchmark case: named levels plus
/// order pairs, closed reflexively and transitively on construction.
class Lattice {
  public:
    Lattice() = default;
    Lattice(std::vector<std::string> levels,
            const std::vector<std::pair<std::string, std::string>>& order);

    const std::vector<std::string>& levels() const { return levels_; }
    bool has_level(const std::string& l) const { return index_.count(l) != 0; }
    bool leq(const std::string& a, const std::string& b) const;

    /// Level set representing a lattice level: its upward closure.
    LevelSet level_set(const std::string& level) const;

    /// Inverse of level_set for round-tripping annotated traces; empty
    /// optional when the set is not the image of any declared level.
    std::optional<std::string> level_of(const LevelSet& ls) const;

    /// All levels, each converted to its level set.
    std::vector<LevelSet> all_level_sets() const;

  private:
    std::vector<std::string> levels_;
    std::map<std::string, size_t> index_;
    std::vector<std::vector<bool>> le_; // le_[a][b] iff a ⊑ b
};

/// Level set for a principal under an acts-for relation: everyone who
/// (transitively) acts for the principal, plus the principal itself.
LevelSet role_level_set(const std::vector<std::pair<std::string, std::string>>& acts_for,
                        const std::string& principal);

} // namespace dynflow
