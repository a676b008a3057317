// Copyright (c) the dynflow contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "dynflow/knowledge.hpp"
#include "dynflow/traces.hpp"

namespace dynflow {

struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Replayable counterexample: at output index i of member's run, the
/// knowledge gained (w.r.t. attacker/label) fails to cover the allowance;
/// `offender` is a member of allowance \ knowledge.
struct Witness {
    size_t member = 0;
    size_t event_index = 0; // 1-based; for subtrace mode the window end
    size_t window_start = 1;
    LevelSet attacker;
    std::string label_key;
    size_t offender = 0;
    std::string context; // e.g. the lock attacker a sub-condition failed for
};

struct Verdict {
    enum class Kind { Secure, Insecure, NotApplicable };
    Kind kind = Kind::Secure;
    std::optional<Witness> witness;

    static Verdict secure() { return {Kind::Secure, std::nullopt}; }
    static Verdict insecure(Witness w) { return {Kind::Insecure, std::move(w)}; }
    static Verdict not_applicable() { return {Kind::NotApplicable, std::nullopt}; }

    bool is_secure() const { return kind == Kind::Secure; }
    bool is_insecure() const { return kind == Kind::Insecure; }
    bool applicable() const { return kind != Kind::NotApplicable; }
};

std::string to_string(const Verdict& v);

/// One row of the formalization framework: an indistinguishability relation,
/// a consistency relation (identity unless stated), and an allowance.
/// All three may depend on the attacker level and the label of interest.
struct FrameworkInstance {
    enum class Quantifier { Prefix, Subtrace };

    std::string name;
    Quantifier quantifier = Quantifier::Prefix;

    /// sim(L, b, observed, candidate_full)
    std::function<bool(const LevelSet&, size_t, const OutSeq&, const OutSeq&)> sim;

    /// Non-identity consistency: consist(L, b, t1, t2). Unset means identity,
    /// which collapses the knowledge union to a single K query.
    std::function<bool(const LevelSet&, size_t, const OutSeq&, const OutSeq&)> consist;

    /// allow(member, observed, b, L); `observed` is t^[:i] (or the window).
    std::function<MemberSet(size_t, const OutSeq&, size_t, const LevelSet&)> allow;

    /// When false the label quantifier collapses to a single dummy index.
    bool per_label = true;
};

/// The generalized check: for every terminating member, attacker, label and
/// output prefix (or window), the knowledge gained must cover the allowance.
Verdict check_framework(const FrameworkInstance& inst, const TraceTable& tt,
                        const std::vector<LevelSet>& attackers);

/// Recompute knowledge and allowance at a witness tuple and confirm the
/// offender is allowed but ruled out.
bool replay_witness(const FrameworkInstance& inst, const TraceTable& tt, const Witness& w);

} // namespace dynflow
