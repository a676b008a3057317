// Copyright (c) the dynflow contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <vector>

#include "dynflow/traces.hpp"

namespace dynflow {

/// Precomputed execution table for one test case: the universe plus each
/// member's extended output sequence. Members whose run did not terminate
/// are excluded from every knowledge set (and counted in diagnostics).
struct TraceTable {
    Universe universe;
    std::vector<OutSeq> seqs;            // parallel to universe
    std::vector<bool> terminating;       // parallel to universe
    std::vector<LabelOfInterest> labels;
    size_t excluded_nonterminating = 0;
    size_t excluded_stuck = 0;

    std::vector<size_t> live_members() const;
    std::set<std::string> vars_with_label(size_t label_idx) const;
    std::set<std::string> vars_without_label(size_t label_idx) const;
    std::set<std::string> all_vars() const;

    /// ⌊m⌋_X restricted to members whose runs terminate; knowledge sets can
    /// only ever contain those, so allowances are drawn from them as well.
    MemberSet live_closure(size_t member, const std::set<std::string>& X) const;
};

/// Relation on output sequences: sim(observed, candidate_full).
using SimRel = std::function<bool(const OutSeq&, const OutSeq&)>;

/// k1: members whose run is indistinguishable at L from the observed prefix.
MemberSet k1(const TraceTable& tt, const OutSeq& observed, const LevelSet& L);

/// Generalized knowledge over an arbitrary relation.
MemberSet k_gen(const TraceTable& tt, const OutSeq& observed, const SimRel& sim);

/// Knowledge attributable to the last event alone: the union of k1 over all
/// prefixes of all runs consistent with the observation w.r.t. (b, L).
MemberSet k2(const TraceTable& tt, const OutSeq& observed, const LevelSet& L, size_t label_idx);

/// Policy allowance at the end of `observed` for member m.
/// Transient: ⌊m⌋ on variables not labelled b. Persistent: additionally
/// intersected with the knowledge from everything before the last event.
MemberSet allowance(const TraceTable& tt, size_t member, const OutSeq& observed,
                    size_t label_idx, const LevelSet& L, PolicyType type);

MemberSet intersect(const MemberSet& a, const MemberSet& b);
bool subset(const MemberSet& a, const MemberSet& b);

} // namespace dynflow
