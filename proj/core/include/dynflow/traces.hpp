// Copyright (c) the dynflow contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dynflow/ast.hpp"
#include "dynflow/interp.hpp"
#include "dynflow/labels.hpp"
#include "dynflow/levels.hpp"

namespace dynflow {

/// Extended output event ⟨b, v, γ⟩ plus the open-lock set Δ (empty outside
/// lock programs). channel_key is the structural identity of the channel
/// label; channel_now its interpretation at the emitting step, which decides
/// visibility.
struct OutEvent {
    std::string channel_key;
    LevelSet channel_now;
    Value value;
    std::map<std::string, LevelSet> gamma;  // per program variable
    std::vector<LevelSet> label_gamma;      // per label of interest (by index)
    std::set<std::string> open_locks;       // Δ

    bool same_observation(const OutEvent& o) const {
        return channel_key == o.channel_key && value == o.value;
    }
};

/// Finite extended output sequence; events are 1-indexed through prefix().
using OutSeq = std::vector<OutEvent>;

inline OutSeq prefix(const OutSeq& t, size_t i) {
    return OutSeq(t.begin(), t.begin() + std::min(i, t.size()));
}
/// Contiguous window of events s..e (1-indexed, inclusive).
inline OutSeq window(const OutSeq& t, size_t s, size_t e) {
    if (s < 1 || e > t.size() || s > e)
        return {};
    return OutSeq(t.begin() + (s - 1), t.begin() + e);
}

/// Labels the knowledge machinery quantifies over. vars lists the variables
/// carrying this label (label equality is structural).
struct LabelOfInterest {
    std::string key;
    std::vector<std::string> vars;
};

/// One OutEvent per raw output of the trace, with γ snapshots for every
/// program variable and every label of interest at the emitting step.
OutSeq extend(const ExecTrace& trace, const PolicySpec& spec,
              const std::vector<LabelOfInterest>& labels,
              const std::vector<LabelPtr>& label_asts,
              const std::set<std::string>& locks = {});

// --- projections -----------------------------------------------------------

OutSeq project(const OutSeq& t, const std::function<bool(const OutEvent&)>& f);

/// Events currently observable at L: γ(b) ⊑ L for the channel label b.
OutSeq project_L(const OutSeq& t, const LevelSet& L);

/// Effective (secret) events for label index b at level L: the channel is
/// visible but information labelled b may not flow to L.
OutSeq project_secret(const OutSeq& t, size_t label_idx, const LevelSet& L);

// --- relations --------------------------------------------------------------

/// ⌊t1⌋_L is a prefix of ⌊t2⌋_L; events compare by channel key and value.
bool indist(const OutSeq& t1, const OutSeq& t2, const LevelSet& L);

/// Secret projections have equal length and, when non-empty, equal last
/// event. Two empty projections are consistent.
bool consistent(const OutSeq& t1, const OutSeq& t2, size_t label_idx, const LevelSet& L);

bool is_prefix_of(const OutSeq& a, const OutSeq& b);
bool is_subtrace_of(const OutSeq& a, const OutSeq& b); // contiguous

// --- memories ----------------------------------------------------------------

/// Set of initial memories backing every knowledge operator of a test case.
/// Indices into the universe identify memories everywhere below.
using Universe = std::vector<Memory>;
using MemberSet = std::set<size_t>;

/// ⌊m⌋_X within U: members agreeing with m on every variable in X.
MemberSet closure(const Memory& m, const Universe& u, const std::set<std::string>& X);

} // namespace dynflow
