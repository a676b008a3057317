// Copyright (c) the dynflow contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dynflow/framework.hpp"
#include "dynflow/knowledge.hpp"

namespace dynflow {

struct EncodeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CheckOptions {
    uint64_t fuel = kDefaultFuel;
    size_t ap_budget = 1000000;       // correspondence-search extensions
    size_t domain_bound = 4096;       // cartesian universe size
    size_t lock_attacker_max_locks = 3;
    bool powerset_attackers = false;  // requires |levels| <= 4
};

// ---------------------------------------------------------------------------
// Framework instances
// ---------------------------------------------------------------------------

FrameworkInstance dynrelease_instance(const TraceTable& tt, PolicyType type);
FrameworkInstance gradual_release_instance(const TraceTable& tt);
FrameworkInstance tight_gr_instance(const TraceTable& tt);
FrameworkInstance according_to_policy_instance(const TraceTable& tt, size_t budget);
FrameworkInstance crypto_erasure_instance(const TraceTable& tt);

Verdict check_dynrelease(const TraceTable& tt, const std::vector<LevelSet>& attackers,
                         PolicyType type);
Verdict check_gradual_release(const TraceTable& tt, const std::vector<LevelSet>& attackers);
Verdict check_tight_gr(const TraceTable& tt, const std::vector<LevelSet>& attackers);
Verdict check_according_to_policy(const TraceTable& tt, const std::vector<LevelSet>& attackers,
                                  size_t budget = 1000000);
Verdict check_crypto_erasure(const TraceTable& tt, const std::vector<LevelSet>& attackers);

// ---------------------------------------------------------------------------
// Forgetful attacker
// ---------------------------------------------------------------------------

/// Deterministic attacker automaton, represented by the state key reached
/// after observing a projected sequence. The transition function is total.
struct Automaton {
    std::string name;
    std::function<std::string(const OutSeq& projected)> state_of;
};

/// Remembers only the last observed output.
Automaton single_memory_automaton();
/// Remembers the whole observation; reduces the attacker to prefix knowledge.
Automaton perfect_recall_automaton();
/// One absorbing state; everything is indistinguishable.
Automaton absorbing_automaton();

FrameworkInstance forgetful_instance(const TraceTable& tt, const Automaton& atk);
Verdict check_forgetful(const TraceTable& tt, const std::vector<LevelSet>& attackers,
                        const Automaton& atk);

// ---------------------------------------------------------------------------
// Direct-definition checkers (oracle twins of the instances above)
// ---------------------------------------------------------------------------

/// Knowledge must remain constant at non-release events. Defined only when,
/// per attacker level, every event is either a release (everything readable)
/// or carries one shared base specification; nullopt otherwise.
std::optional<Verdict> check_gradual_release_direct(const TraceTable& tt,
                                                    const std::vector<LevelSet>& attackers);

/// Declassified-set formulation; defined when no variable upgrades at the
/// attacker level along any trace.
std::optional<Verdict> check_tight_gr_direct(const TraceTable& tt,
                                             const std::vector<LevelSet>& attackers);

/// Two-run correspondence check over pairs differing in a single variable.
Verdict check_according_to_policy_direct(const TraceTable& tt,
                                         const std::vector<LevelSet>& attackers,
                                         size_t budget = 1000000);

/// Subtrace-knowledge formulation with the weakest-policy allowance.
Verdict check_crypto_erasure_direct(const TraceTable& tt,
                                    const std::vector<LevelSet>& attackers);

/// Stepwise automaton-state formulation.
Verdict check_forgetful_direct(const TraceTable& tt, const std::vector<LevelSet>& attackers,
                               const Automaton& atk);

// ---------------------------------------------------------------------------
// Encoders
// ---------------------------------------------------------------------------

/// Rewrite x := declassify(e) into a bracketed release
///   EventOn(r); x := e; output(Γ(x), e); EventOff(r);
/// and weaken every label to r ? 𝕃 <=> Γ(x). Nested declassify is rejected.
std::pair<Program, PolicySpec> encode_gradual_release(const Program& p, const PolicySpec& base,
                                                      const Lattice& lat);

/// Rewrite x' := declassify(x) (single-variable argument only) into
///   EventOn(r_x); x' := x; output(Γ(x'), x);
/// with Γ'(x) = r_x ? 𝕃 <- Γ(x): a precise, permanent downgrade.
std::pair<Program, PolicySpec> encode_tight_gr(const Program& p, const PolicySpec& base,
                                               const Lattice& lat);

// ---------------------------------------------------------------------------
// Paralocks
// ---------------------------------------------------------------------------

/// Flow-lock specification: per variable, the lock set required for each
/// principal. A missing (variable, principal) entry means never visible.
struct FlowLockSpec {
    std::map<std::string, std::map<std::string, std::set<std::string>>> spec;

    std::vector<std::string> principals() const;
    /// Lock set guarding var for principal; nullopt encodes ⊤.
    std::optional<std::set<std::string>> lockset(const std::string& var,
                                                 const std::string& principal) const;
    /// Variables visible to the attacker: lockset(var, P) ⊆ Σ.
    std::set<std::string> visible_vars(const std::string& principal,
                                       const std::set<std::string>& locks) const;
};

struct LockAttacker {
    std::string principal;
    std::set<std::string> locks;
};

std::vector<LockAttacker> default_lock_attackers(const FlowLockSpec& spec,
                                                 const std::set<std::string>& locks,
                                                 size_t max_locks = 3);

/// Source-to-source encoding for one attacker: open/close become security
/// events s_lock, every specified assignment additionally reveals its value
/// on a channel labelled with the attacker-relative dynamic policy
///   (s_o1 || ... || s_ok) ? {P} <=> Γ_A(x)
/// over the locks o1..ok the attacker does not hold.
std::pair<Program, PolicySpec> encode_paralocks(const Program& p, const FlowLockSpec& spec,
                                                const LockAttacker& attacker);

/// Execution table for the lock program itself: one event per specified
/// assignment, keyed by the assigned variable, with the attacker-relative
/// static visibility as the channel level and the open locks as Δ.
TraceTable lock_static_table(const Program& p, const FlowLockSpec& spec,
                             const LockAttacker& attacker, const Universe& u, uint64_t fuel);

FrameworkInstance paralocks_instance(const TraceTable& tt, const FlowLockSpec& spec,
                                     const LockAttacker& attacker);

/// Secure iff the per-attacker sub-condition holds for every attacker.
Verdict check_paralocks(const Program& p, const FlowLockSpec& spec, const Universe& u,
                        const std::vector<LockAttacker>& attackers, uint64_t fuel = kDefaultFuel);

/// Knowledge stays constant whenever the open locks are all held by the
/// attacker.
Verdict check_paralocks_direct(const Program& p, const FlowLockSpec& spec, const Universe& u,
                               const std::vector<LockAttacker>& attackers,
                               uint64_t fuel = kDefaultFuel);

} // namespace dynflow
