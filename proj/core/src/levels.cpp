// Copyright (c) the dynflow contributors.
// SPDX-License-Identifier: Apache-2.0

#include "dynflow/levels.hpp"

#include <sstream>

namespace dynflow {

std::string to_string(const LevelSet& ls) {
    std::ostringstream out;
    out << '{';
    bool first = true;
    for (const auto& l : ls) {
        if (!first)
            out << ',';
        out << l;
        first = false;
    }
    out << '}';
    return out.str();
}

Lattice::Lattice(std::vector<std::string> levels,
                 const std::vector<std::pair<std::string, std::string>>& order)
    : levels_(std::move(levels)) {
    for (size_t i = 0; i < levels_.size(); ++i) {
        if (index_.count(levels_[i]))
            throw ResolveError("duplicate lattice level: " + levels_[i]);
        index_[levels_[i]] = i;
    }
    const size_t n = levels_.size();
    le_.assign(n, std::vector<bool>(n, false));
    for (size_t i = 0; i < n; ++i)
        le_[i][i] = true;
    for (const auto& [a, b] : order) {
        if (!index_.count(a))
            throw ResolveError("unknown level in lattice order: " + a);
        if (!index_.count(b))
            throw ResolveError("unknown level in lattice order: " + b);
        le_[index_.at(a)][index_.at(b)] = true;
    }
    // Warshall closure.
    for (size_t k = 0; k < n; ++k)
        for (size_t i = 0; i < n; ++i)
            if (le_[i][k])
                for (size_t j = 0; j < n; ++j)
                    if (le_[k][j])
                        le_[i][j] = true;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < i; ++j)
            if (le_[i][j] && le_[j][i])
                throw ResolveError("lattice order is not antisymmetric: " + levels_[i] +
                                   " and " + levels_[j]);
}

bool Lattice::leq(const std::string& a, const std::string& b) const {
    auto ia = index_.find(a), ib = index_.find(b);
    if (ia == index_.end())
        throw ResolveError("unknown level: " + a);
    if (ib == index_.end())
        throw ResolveError("unknown level: " + b);
    return le_[ia->second][ib->second];
}

LevelSet Lattice::level_set(const std::string& level) const {
    auto it = index_.find(level);
    if (it == index_.end())
        throw ResolveError("unknown level: " + level);
    LevelSet ls;
    for (size_t j = 0; j < levels_.size(); ++j)
        if (le_[it->second][j])
            ls.insert(levels_[j]);
    return ls;
}

std::optional<std::string> Lattice::level_of(const LevelSet& ls) const {
    for (const auto& l : levels_)
        if (level_set(l) == ls)
            return l;
    return std::nullopt;
}

std::vector<LevelSet> Lattice::all_level_sets() const {
    std::vector<LevelSet> out;
    out.reserve(levels_.size());
    for (const auto& l : levels_)
        out.push_back(level_set(l));
    return out;
}

LevelSet role_level_set(const std::vector<std::pair<std::string, std::string>>& acts_for,
                        const std::string& principal) {
    // acts_for pairs read "first acts for second"; close transitively.
    LevelSet result{principal};
    bool grew = true;
    while (grew) {
        grew = false;
        for (const auto& [actor, target] : acts_for) {
            if (result.count(target) && !result.count(actor)) {
                result.insert(actor);
                grew = true;
            }
        }
    }
    return result;
}

} // namespace dynflow
