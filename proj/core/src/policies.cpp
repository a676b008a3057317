// Copyright (c) the dynflow contributors.
// SPDX-License-Identifier: Apache-2.0

#include "dynflow/policies.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

namespace dynflow {

namespace {

std::set<std::string> public_vars_at(const OutEvent& ev, const LevelSet& L) {
    std::set<std::string> out;
    for (const auto& [var, ls] : ev.gamma)
        if (flows_to(ls, L))
            out.insert(var);
    return out;
}

} // namespace

// ---------------------------------------------------------------------------
// Framework instances
// ---------------------------------------------------------------------------

FrameworkInstance dynrelease_instance(const TraceTable& tt, PolicyType type) {
    FrameworkInstance inst;
    inst.name = type == PolicyType::Transient ? "dynrelease-tran" : "dynrelease-per";
    inst.per_label = true;
    inst.sim = [](const LevelSet& L, size_t, const OutSeq& t1, const OutSeq& t2) {
        return indist(t1, t2, L);
    };
    inst.consist = [](const LevelSet& L, size_t b, const OutSeq& t1, const OutSeq& t2) {
        return consistent(t1, t2, b, L);
    };
    inst.allow = [&tt, type](size_t m, const OutSeq& obs, size_t b, const LevelSet& L) {
        return allowance(tt, m, obs, b, L, type);
    };
    return inst;
}

FrameworkInstance gradual_release_instance(const TraceTable& tt) {
    FrameworkInstance inst;
    inst.name = "gr";
    inst.per_label = false;
    inst.sim = [](const LevelSet& L, size_t, const OutSeq& t1, const OutSeq& t2) {
        return indist(t1, t2, L);
    };
    inst.allow = [&tt](size_t m, const OutSeq& obs, size_t, const LevelSet& L) {
        MemberSet base = tt.live_closure(m, public_vars_at(obs.back(), L));
        MemberSet past = k1(tt, prefix(obs, obs.size() - 1), L);
        return intersect(base, past);
    };
    return inst;
}

FrameworkInstance tight_gr_instance(const TraceTable& tt) {
    FrameworkInstance inst;
    inst.name = "tgr";
    inst.per_label = false;
    inst.sim = [](const LevelSet& L, size_t, const OutSeq& t1, const OutSeq& t2) {
        return indist(t1, t2, L);
    };
    inst.allow = [&tt](size_t m, const OutSeq& obs, size_t, const LevelSet& L) {
        return tt.live_closure(m, public_vars_at(obs.back(), L));
    };
    return inst;
}

// --- According to Policy -----------------------------------------------------

namespace {

/// Does a complete, monotone, (0,0)-anchored correspondence exist whose
/// pairs all satisfy ok(i, j)? Searched as a staircase: one partner per
/// index of the covered side, non-decreasing on the other side. The budget
/// counts pair evaluations.
class CorrespondenceSearch {
  public:
    CorrespondenceSearch(size_t budget) : budget_(budget) {}

    bool exists(size_t n1, size_t n2, const std::function<bool(size_t, size_t)>& ok) {
        if (n1 == 0 || n2 == 0)
            return true; // the empty relation is complete on the empty side
        return covers_first(n1, n2, ok) || covers_first(n2, n1, [&](size_t i, size_t j) {
                   return ok(j, i);
               });
    }

  private:
    bool covers_first(size_t n1, size_t n2, const std::function<bool(size_t, size_t)>& ok) {
        // reach[j]: a staircase over t1[0..i] ending at partner j exists.
        std::vector<bool> reach(n2, false);
        reach[0] = evaluate(ok, 0, 0);
        for (size_t i = 1; i < n1; ++i) {
            std::vector<bool> next(n2, false);
            bool any_le = false;
            for (size_t j = 0; j < n2; ++j) {
                any_le = any_le || reach[j];
                if (any_le && evaluate(ok, i, j))
                    next[j] = true;
            }
            reach = std::move(next);
        }
        return std::find(reach.begin(), reach.end(), true) != reach.end();
    }

    bool evaluate(const std::function<bool(size_t, size_t)>& ok, size_t i, size_t j) {
        if (++used_ > budget_)
            throw BudgetError("correspondence search budget exceeded");
        return ok(i, j);
    }

    size_t budget_;
    size_t used_ = 0;
};

bool ap_sim(const OutSeq& t1, const OutSeq& t2, size_t b, const LevelSet& L, size_t budget) {
    auto effective = [&](const OutEvent& ev) {
        return !flows_to(ev.label_gamma[b], L) && flows_to(ev.channel_now, L);
    };
    auto ok = [&](size_t i, size_t j) {
        bool e1 = effective(t1[i]), e2 = effective(t2[j]);
        if (e1 && e2)
            return t1[i].same_observation(t2[j]);
        return true; // an ineffective side never distinguishes the pair
    };
    CorrespondenceSearch search(budget);
    return search.exists(t1.size(), t2.size(), ok);
}

} // namespace

FrameworkInstance according_to_policy_instance(const TraceTable& tt, size_t budget) {
    FrameworkInstance inst;
    inst.name = "ap";
    inst.per_label = true;
    inst.sim = [budget](const LevelSet& L, size_t b, const OutSeq& t1, const OutSeq& t2) {
        return ap_sim(t1, t2, b, L, budget);
    };
    inst.allow = [&tt](size_t m, const OutSeq&, size_t b, const LevelSet&) {
        return tt.live_closure(m, tt.vars_without_label(b));
    };
    return inst;
}

FrameworkInstance crypto_erasure_instance(const TraceTable& tt) {
    FrameworkInstance inst;
    inst.name = "ce";
    inst.per_label = false;
    inst.quantifier = FrameworkInstance::Quantifier::Subtrace;
    inst.sim = [](const LevelSet& L, size_t, const OutSeq& w, const OutSeq& t2) {
        return is_subtrace_of(project_L(w, L), project_L(t2, L));
    };
    inst.allow = [&tt](size_t m, const OutSeq& obs, size_t, const LevelSet& L) {
        MemberSet acc;
        bool first = true;
        for (const auto& ev : obs) {
            MemberSet part = tt.live_closure(m, public_vars_at(ev, L));
            acc = first ? part : intersect(acc, part);
            first = false;
        }
        return acc;
    };
    return inst;
}

Verdict check_dynrelease(const TraceTable& tt, const std::vector<LevelSet>& attackers,
                         PolicyType type) {
    return check_framework(dynrelease_instance(tt, type), tt, attackers);
}
Verdict check_gradual_release(const TraceTable& tt, const std::vector<LevelSet>& attackers) {
    return check_framework(gradual_release_instance(tt), tt, attackers);
}
Verdict check_tight_gr(const TraceTable& tt, const std::vector<LevelSet>& attackers) {
    return check_framework(tight_gr_instance(tt), tt, attackers);
}
Verdict check_according_to_policy(const TraceTable& tt, const std::vector<LevelSet>& attackers,
                                  size_t budget) {
    return check_framework(according_to_policy_instance(tt, budget), tt, attackers);
}
Verdict check_crypto_erasure(const TraceTable& tt, const std::vector<LevelSet>& attackers) {
    return check_framework(crypto_erasure_instance(tt), tt, attackers);
}

// ---------------------------------------------------------------------------
// Forgetful attacker
// ---------------------------------------------------------------------------

namespace {
std::string event_key(const OutEvent& ev) {
    return ev.channel_key + "|" + to_string(ev.value);
}
} // namespace

Automaton single_memory_automaton() {
    return {"single-memory", [](const OutSeq& projected) {
                return projected.empty() ? std::string("<init>") : event_key(projected.back());
            }};
}

Automaton perfect_recall_automaton() {
    return {"perfect-recall", [](const OutSeq& projected) {
                std::string s;
                for (const auto& ev : projected) {
                    s += event_key(ev);
                    s += ';';
                }
                return s;
            }};
}

Automaton absorbing_automaton() {
    return {"absorbing", [](const OutSeq&) { return std::string("q0"); }};
}

namespace {

bool fa_sim(const Automaton& atk, const LevelSet& L, const OutSeq& t1, const OutSeq& t2) {
    std::string target = atk.state_of(project_L(t1, L));
    OutSeq p2 = project_L(t2, L);
    for (size_t k = 0; k <= p2.size(); ++k)
        if (atk.state_of(OutSeq(p2.begin(), p2.begin() + k)) == target)
            return true;
    return false;
}

} // namespace

FrameworkInstance forgetful_instance(const TraceTable& tt, const Automaton& atk) {
    FrameworkInstance inst;
    inst.name = "fa-" + atk.name;
    inst.per_label = false;
    inst.sim = [atk](const LevelSet& L, size_t, const OutSeq& t1, const OutSeq& t2) {
        return fa_sim(atk, L, t1, t2);
    };
    inst.allow = [&tt, atk](size_t m, const OutSeq& obs, size_t, const LevelSet& L) {
        MemberSet base = tt.live_closure(m, public_vars_at(obs.back(), L));
        MemberSet past = k_gen(tt, prefix(obs, obs.size() - 1),
                               [&](const OutSeq& a, const OutSeq& b) { return fa_sim(atk, L, a, b); });
        return intersect(base, past);
    };
    return inst;
}

Verdict check_forgetful(const TraceTable& tt, const std::vector<LevelSet>& attackers,
                        const Automaton& atk) {
    return check_framework(forgetful_instance(tt, atk), tt, attackers);
}

// ---------------------------------------------------------------------------
// Direct-definition checkers
// ---------------------------------------------------------------------------

namespace {

bool all_public(const OutEvent& ev, const LevelSet& L) {
    for (const auto& [var, ls] : ev.gamma)
        if (!flows_to(ls, L))
            return false;
    return true;
}

Witness direct_witness(size_t m, size_t i, const LevelSet& L, size_t offender,
                       const std::string& key) {
    Witness w;
    w.member = m;
    w.event_index = i;
    w.attacker = L;
    w.label_key = key;
    w.offender = offender;
    return w;
}

} // namespace

std::optional<Verdict> check_gradual_release_direct(const TraceTable& tt,
                                                    const std::vector<LevelSet>& attackers) {
    for (const LevelSet& L : attackers) {
        // The definition needs a uniform base policy at non-release events.
        std::optional<std::map<std::string, LevelSet>> base;
        for (size_t m : tt.live_members()) {
            for (const auto& ev : tt.seqs[m]) {
                if (all_public(ev, L))
                    continue;
                if (!base)
                    base = ev.gamma;
                else if (*base != ev.gamma)
                    return std::nullopt;
            }
        }
        std::set<std::string> low;
        if (base)
            for (const auto& [var, ls] : *base)
                if (flows_to(ls, L))
                    low.insert(var);

        for (size_t m : tt.live_members()) {
            const OutSeq& t = tt.seqs[m];
            auto k_at = [&](size_t i) {
                if (!base)
                    return tt.live_closure(m, {});
                return intersect(tt.live_closure(m, low), k1(tt, prefix(t, i), L));
            };
            for (size_t i = 1; i <= t.size(); ++i) {
                if (all_public(t[i - 1], L))
                    continue; // release event: knowledge may change
                MemberSet before = k_at(i - 1);
                MemberSet after = k_at(i);
                if (before != after) {
                    size_t off = *std::find_if(before.begin(), before.end(), [&](size_t x) {
                        return !after.count(x);
                    });
                    return Verdict::insecure(direct_witness(m, i, L, off, ""));
                }
            }
        }
    }
    return Verdict::secure();
}

std::optional<Verdict> check_tight_gr_direct(const TraceTable& tt,
                                             const std::vector<LevelSet>& attackers) {
    for (const LevelSet& L : attackers) {
        // Base policy: visibility at the first output; defined only when all
        // traces agree and no variable ever upgrades at L along a trace.
        std::optional<std::map<std::string, bool>> base_public;
        for (size_t m : tt.live_members()) {
            const OutSeq& t = tt.seqs[m];
            if (t.empty())
                continue;
            std::map<std::string, bool> first;
            for (const auto& [var, ls] : t.front().gamma)
                first[var] = flows_to(ls, L);
            if (!base_public)
                base_public = first;
            else if (*base_public != first)
                return std::nullopt;
            for (size_t i = 1; i < t.size(); ++i)
                for (const auto& [var, ls] : t[i - 1].gamma)
                    if (flows_to(ls, L) && !flows_to(t[i].gamma.at(var), L))
                        return std::nullopt; // upgrade
        }
        if (!base_public)
            continue; // no outputs anywhere

        std::set<std::string> base_low;
        for (const auto& [var, pub] : *base_public)
            if (pub)
                base_low.insert(var);

        for (size_t m : tt.live_members()) {
            const OutSeq& t = tt.seqs[m];
            for (size_t i = 1; i <= t.size(); ++i) {
                std::set<std::string> declassified;
                for (const auto& [var, ls] : t[i - 1].gamma)
                    if (flows_to(ls, L) && !base_low.count(var))
                        declassified.insert(var);
                MemberSet allowed = intersect(tt.live_closure(m, base_low),
                                              tt.live_closure(m, declassified));
                MemberSet k = intersect(tt.live_closure(m, base_low),
                                        k1(tt, prefix(t, i), L));
                if (!subset(allowed, k)) {
                    size_t off = *std::find_if(allowed.begin(), allowed.end(), [&](size_t x) {
                        return !k.count(x);
                    });
                    return Verdict::insecure(direct_witness(m, i, L, off, ""));
                }
            }
        }
    }
    return Verdict::secure();
}

Verdict check_according_to_policy_direct(const TraceTable& tt,
                                         const std::vector<LevelSet>& attackers, size_t budget) {
    std::set<std::string> vars = tt.all_vars();
    for (const LevelSet& L : attackers) {
        for (const auto& x : vars) {
            size_t b = 0;
            for (size_t i = 0; i < tt.labels.size(); ++i) {
                const auto& lv = tt.labels[i].vars;
                if (std::find(lv.begin(), lv.end(), x) != lv.end())
                    b = i;
            }
            std::set<std::string> others = vars;
            others.erase(x);
            auto live = tt.live_members();
            for (size_t m1 : live) {
                for (size_t m2 : live) {
                    if (m1 == m2)
                        continue;
                    if (!closure(tt.universe[m1], tt.universe, others).count(m2))
                        continue;
                    if (!ap_sim(tt.seqs[m1], tt.seqs[m2], b, L, budget))
                        return Verdict::insecure(
                            direct_witness(m1, tt.seqs[m1].size(), L, m2, tt.labels[b].key));
                }
            }
        }
    }
    return Verdict::secure();
}

Verdict check_crypto_erasure_direct(const TraceTable& tt,
                                    const std::vector<LevelSet>& attackers) {
    for (const LevelSet& L : attackers) {
        for (size_t m : tt.live_members()) {
            const OutSeq& t = tt.seqs[m];
            for (size_t s = 1; s <= t.size(); ++s) {
                for (size_t e = s; e <= t.size(); ++e) {
                    OutSeq w = window(t, s, e);
                    OutSeq pw = project_L(w, L);
                    MemberSet k;
                    for (size_t cand : tt.live_members()) {
                        OutSeq pc = project_L(tt.seqs[cand], L);
                        // explicit split enumeration of the candidate run
                        bool found = false;
                        for (size_t start = 0; !found && start + pw.size() <= pc.size();
                             ++start) {
                            bool eq = true;
                            for (size_t i = 0; i < pw.size(); ++i)
                                if (!pw[i].same_observation(pc[start + i])) {
                                    eq = false;
                                    break;
                                }
                            found = eq;
                        }
                        if (pw.empty())
                            found = true;
                        if (found)
                            k.insert(cand);
                    }
                    MemberSet allowed;
                    bool first = true;
                    for (const auto& ev : w) {
                        MemberSet part = tt.live_closure(m, public_vars_at(ev, L));
                        allowed = first ? part : intersect(allowed, part);
                        first = false;
                    }
                    if (!subset(allowed, k)) {
                        size_t off = *std::find_if(allowed.begin(), allowed.end(),
                                                   [&](size_t v) { return !k.count(v); });
                        Witness wit = direct_witness(m, e, L, off, "");
                        wit.window_start = s;
                        return Verdict::insecure(wit);
                    }
                }
            }
        }
    }
    return Verdict::secure();
}

Verdict check_forgetful_direct(const TraceTable& tt, const std::vector<LevelSet>& attackers,
                               const Automaton& atk) {
    for (const LevelSet& L : attackers) {
        auto k_fa = [&](const OutSeq& obs) {
            MemberSet out;
            std::string target = atk.state_of(project_L(obs, L));
            for (size_t cand : tt.live_members()) {
                OutSeq pc = project_L(tt.seqs[cand], L);
                for (size_t k = 0; k <= pc.size(); ++k) {
                    if (atk.state_of(OutSeq(pc.begin(), pc.begin() + k)) == target) {
                        out.insert(cand);
                        break;
                    }
                }
            }
            return out;
        };
        for (size_t m : tt.live_members()) {
            const OutSeq& t = tt.seqs[m];
            for (size_t i = 1; i <= t.size(); ++i) {
                MemberSet gained = k_fa(prefix(t, i));
                MemberSet allowed = intersect(k_fa(prefix(t, i - 1)),
                                              tt.live_closure(m, public_vars_at(t[i - 1], L)));
                if (!subset(allowed, gained)) {
                    size_t off = *std::find_if(allowed.begin(), allowed.end(),
                                               [&](size_t v) { return !gained.count(v); });
                    return Verdict::insecure(direct_witness(m, i, L, off, ""));
                }
            }
        }
    }
    return Verdict::secure();
}

// ---------------------------------------------------------------------------
// Encoders
// ---------------------------------------------------------------------------

namespace {

std::string fresh_name(std::string base, const Program& p) {
    auto taken = [&](const std::string& n) {
        return p.variables.count(n) || p.events.count(n) || p.locks.count(n);
    };
    if (!taken(base))
        return base;
    for (int i = 1;; ++i) {
        std::string candidate = base + "_" + std::to_string(i);
        if (!taken(candidate))
            return candidate;
    }
}

CmdPtr rewrite_gr(const CmdPtr& c, const PolicySpec& base, const std::string& r) {
    switch (c->kind) {
    case Cmd::Kind::Seq:
        return Cmd::seq(rewrite_gr(c->first, base, r), rewrite_gr(c->second, base, r));
    case Cmd::Kind::If:
        return Cmd::if_(c->guard, rewrite_gr(c->first, base, r), rewrite_gr(c->second, base, r));
    case Cmd::Kind::While: return Cmd::while_(c->guard, rewrite_gr(c->first, base, r));
    case Cmd::Kind::Assign:
        if (c->is_declassify) {
            CmdPtr body = Cmd::seq(
                Cmd::event_on(r),
                Cmd::seq(Cmd::assign(c->target, c->rhs),
                         Cmd::seq(Cmd::output(base.label_of(c->target), c->rhs),
                                  Cmd::event_off(r))));
            return body;
        }
        return c;
    default: return c;
    }
}

} // namespace

std::pair<Program, PolicySpec> encode_gradual_release(const Program& p, const PolicySpec& base,
                                                      const Lattice& lat) {
    std::string r = fresh_name("r", p);
    Program out = p;
    out.body = rewrite_gr(p.body, base, r);
    out.events.insert(r);
    out.has_declassify = false;

    LevelSet all_levels(lat.levels().begin(), lat.levels().end());
    PolicySpec spec;
    spec.type = base.type;
    for (const auto& [var, label] : base.gamma)
        spec.gamma[var] =
            Label::mutate(Expr::event(r), Label::level_set(all_levels), MutationDir::TwoWay, label);
    return {out, spec};
}

namespace {

CmdPtr rewrite_tgr(const CmdPtr& c, const PolicySpec& base, const Program& p,
                   std::map<std::string, std::string>& release_events) {
    switch (c->kind) {
    case Cmd::Kind::Seq:
        return Cmd::seq(rewrite_tgr(c->first, base, p, release_events),
                        rewrite_tgr(c->second, base, p, release_events));
    case Cmd::Kind::If:
        return Cmd::if_(c->guard, rewrite_tgr(c->first, base, p, release_events),
                        rewrite_tgr(c->second, base, p, release_events));
    case Cmd::Kind::While:
        return Cmd::while_(c->guard, rewrite_tgr(c->first, base, p, release_events));
    case Cmd::Kind::Assign:
        if (c->is_declassify) {
            if (c->rhs->kind != Expr::Kind::Var && c->rhs->kind != Expr::Kind::Name)
                throw EncodeError("tight gradual release only declassifies single variables");
            const std::string& x = c->rhs->name;
            if (!release_events.count(x))
                release_events[x] = fresh_name("r_" + x, p);
            return Cmd::seq(Cmd::event_on(release_events[x]),
                            Cmd::seq(Cmd::assign(c->target, c->rhs),
                                     Cmd::output(base.label_of(c->target), c->rhs)));
        }
        return c;
    default: return c;
    }
}

} // namespace

std::pair<Program, PolicySpec> encode_tight_gr(const Program& p, const PolicySpec& base,
                                               const Lattice& lat) {
    std::map<std::string, std::string> release_events;
    Program out = p;
    out.body = rewrite_tgr(p.body, base, p, release_events);
    out.has_declassify = false;
    for (const auto& [var, ev] : release_events)
        out.events.insert(ev);

    LevelSet all_levels(lat.levels().begin(), lat.levels().end());
    PolicySpec spec;
    spec.type = base.type;
    for (const auto& [var, label] : base.gamma) {
        auto it = release_events.find(var);
        if (it == release_events.end())
            spec.gamma[var] = label;
        else
            spec.gamma[var] = Label::mutate(Expr::event(it->second),
                                            Label::level_set(all_levels), MutationDir::Left, label);
    }
    return {out, spec};
}

// ---------------------------------------------------------------------------
// Paralocks
// ---------------------------------------------------------------------------

std::vector<std::string> FlowLockSpec::principals() const {
    std::set<std::string> ps;
    for (const auto& [var, by_principal] : spec)
        for (const auto& [p, locks] : by_principal)
            ps.insert(p);
    return {ps.begin(), ps.end()};
}

std::optional<std::set<std::string>> FlowLockSpec::lockset(const std::string& var,
                                                           const std::string& principal) const {
    auto it = spec.find(var);
    if (it == spec.end())
        return std::nullopt;
    auto jt = it->second.find(principal);
    if (jt == it->second.end())
        return std::nullopt;
    return jt->second;
}

std::set<std::string> FlowLockSpec::visible_vars(const std::string& principal,
                                                 const std::set<std::string>& locks) const {
    std::set<std::string> out;
    for (const auto& [var, by_principal] : spec) {
        auto ls = lockset(var, principal);
        if (ls && std::includes(locks.begin(), locks.end(), ls->begin(), ls->end()))
            out.insert(var);
    }
    return out;
}

std::vector<LockAttacker> default_lock_attackers(const FlowLockSpec& spec,
                                                 const std::set<std::string>& locks,
                                                 size_t max_locks) {
    if (locks.size() > max_locks)
        throw BudgetError("lock count exceeds the attacker enumeration bound");
    std::vector<std::string> lock_list(locks.begin(), locks.end());
    std::vector<LockAttacker> out;
    for (const auto& p : spec.principals()) {
        for (size_t mask = 0; mask < (size_t(1) << lock_list.size()); ++mask) {
            LockAttacker a{p, {}};
            for (size_t i = 0; i < lock_list.size(); ++i)
                if (mask & (size_t(1) << i))
                    a.locks.insert(lock_list[i]);
            out.push_back(std::move(a));
        }
    }
    return out;
}

namespace {

std::set<std::string> mentioned_locks(const Program& p, const FlowLockSpec& spec) {
    std::set<std::string> out = p.locks;
    for (const auto& [var, by_principal] : spec.spec)
        for (const auto& [principal, ls] : by_principal)
            out.insert(ls.begin(), ls.end());
    return out;
}

LabelPtr attacker_label(const LockAttacker& A, const LevelSet& static_level,
                        const std::vector<std::string>& outside,
                        const std::string& event_prefix) {
    LevelSet mine{A.principal};
    if (outside.empty() || static_level == mine)
        return Label::level_set(static_level);
    ExprPtr any_outside;
    for (const auto& lock : outside) {
        ExprPtr ev = Expr::event(event_prefix + lock);
        any_outside = any_outside ? Expr::binary(BinOp::Or, any_outside, ev) : ev;
    }
    // Some lock the attacker does not hold is open: a release period, where
    // everything is readable; otherwise the static visibility applies.
    return Label::mutate(any_outside, Label::level_set(mine), MutationDir::TwoWay,
                         Label::level_set(static_level));
}

CmdPtr rewrite_paralocks(const CmdPtr& c, const FlowLockSpec& spec, const PolicySpec& labels,
                         const std::string& event_prefix) {
    switch (c->kind) {
    case Cmd::Kind::Seq:
        return Cmd::seq(rewrite_paralocks(c->first, spec, labels, event_prefix),
                        rewrite_paralocks(c->second, spec, labels, event_prefix));
    case Cmd::Kind::If:
        return Cmd::if_(c->guard, rewrite_paralocks(c->first, spec, labels, event_prefix),
                        rewrite_paralocks(c->second, spec, labels, event_prefix));
    case Cmd::Kind::While:
        return Cmd::while_(c->guard, rewrite_paralocks(c->first, spec, labels, event_prefix));
    case Cmd::Kind::Open: return Cmd::event_on(event_prefix + c->target);
    case Cmd::Kind::Close: return Cmd::event_off(event_prefix + c->target);
    case Cmd::Kind::Assign: {
        if (c->is_declassify)
            throw EncodeError("declassify is not part of the lock language");
        if (!spec.spec.count(c->target))
            return c;
        return Cmd::seq(c, Cmd::output(labels.label_of(c->target), c->rhs));
    }
    default: return c;
    }
}

} // namespace

std::pair<Program, PolicySpec> encode_paralocks(const Program& p, const FlowLockSpec& spec,
                                                const LockAttacker& attacker) {
    std::set<std::string> locks = mentioned_locks(p, spec);
    std::vector<std::string> outside;
    for (const auto& lock : locks)
        if (!attacker.locks.count(lock))
            outside.push_back(lock);

    const std::string prefix = "s_";
    PolicySpec labels;
    labels.type = PolicyType::Persistent;
    for (const auto& [var, by_principal] : spec.spec) {
        auto ls = spec.lockset(var, attacker.principal);
        bool visible = ls && std::includes(attacker.locks.begin(), attacker.locks.end(),
                                           ls->begin(), ls->end());
        LevelSet static_level = visible ? LevelSet{attacker.principal} : LevelSet{};
        labels.gamma[var] = attacker_label(attacker, static_level, outside, prefix);
    }

    Program out;
    out.body = rewrite_paralocks(p.body, spec, labels, prefix);
    out.variables = p.variables;
    out.events = p.events;
    for (const auto& lock : locks)
        out.events.insert(prefix + lock);
    return {out, labels};
}

namespace {

const Cmd* leftmost(const CmdPtr& c) {
    const Cmd* cur = c.get();
    while (cur->kind == Cmd::Kind::Seq)
        cur = cur->first.get();
    return cur;
}

} // namespace

TraceTable lock_static_table(const Program& p, const FlowLockSpec& spec,
                             const LockAttacker& attacker, const Universe& u, uint64_t fuel) {
    std::set<std::string> visible = spec.visible_vars(attacker.principal, attacker.locks);
    std::set<std::string> locks = mentioned_locks(p, spec);

    TraceTable tt;
    tt.universe = u;
    for (const auto& [var, by_principal] : spec.spec)
        tt.labels.push_back({var, {var}});

    for (const Memory& init : u) {
        OutSeq seq;
        CmdPtr c = p.body;
        Memory mem = init;
        uint64_t used = 0;
        bool ok = true;
        while (c->kind != Cmd::Kind::Skip) {
            if (used++ >= fuel) {
                tt.excluded_nonterminating++;
                ok = false;
                break;
            }
            const Cmd* active = leftmost(c);
            StepResult r;
            try {
                r = step(c, mem);
            } catch (const EvalError&) {
                tt.excluded_stuck++;
                ok = false;
                break;
            }
            if (active->kind == Cmd::Kind::Assign && spec.spec.count(active->target)) {
                OutEvent ev;
                ev.channel_key = active->target;
                ev.channel_now =
                    visible.count(active->target) ? LevelSet{attacker.principal} : LevelSet{};
                ev.value = r.mem.get(active->target);
                for (const auto& lock : locks)
                    if (mem.event_value(lock))
                        ev.open_locks.insert(lock);
                seq.push_back(std::move(ev));
            }
            mem = std::move(r.mem);
            c = r.cmd;
        }
        tt.terminating.push_back(ok);
        tt.seqs.push_back(ok ? std::move(seq) : OutSeq{});
    }
    return tt;
}

FrameworkInstance paralocks_instance(const TraceTable& tt, const FlowLockSpec& spec,
                                     const LockAttacker& attacker) {
    FrameworkInstance inst;
    inst.name = "paralocks";
    inst.per_label = false;
    inst.sim = [](const LevelSet& L, size_t, const OutSeq& t1, const OutSeq& t2) {
        return indist(t1, t2, L);
    };
    std::set<std::string> visible = spec.visible_vars(attacker.principal, attacker.locks);
    std::set<std::string> held = attacker.locks;
    inst.allow = [&tt, visible, held](size_t m, const OutSeq& obs, size_t, const LevelSet& L) {
        const auto& open = obs.back().open_locks;
        bool constrained = std::includes(held.begin(), held.end(), open.begin(), open.end());
        if (!constrained)
            return tt.live_closure(m, tt.all_vars()); // release: only m-identical memories
        MemberSet base = tt.live_closure(m, visible);
        MemberSet past = k1(tt, prefix(obs, obs.size() - 1), L);
        return intersect(base, past);
    };
    return inst;
}

Verdict check_paralocks(const Program& p, const FlowLockSpec& spec, const Universe& u,
                        const std::vector<LockAttacker>& attackers, uint64_t fuel) {
    for (const auto& A : attackers) {
        TraceTable tt = lock_static_table(p, spec, A, u, fuel);
        FrameworkInstance inst = paralocks_instance(tt, spec, A);
        std::vector<LevelSet> levels{LevelSet{A.principal}};
        Verdict v = check_framework(inst, tt, levels);
        if (v.is_insecure()) {
            v.witness->context = A.principal + ":" + to_string(LevelSet(A.locks));
            return v;
        }
    }
    return Verdict::secure();
}

Verdict check_paralocks_direct(const Program& p, const FlowLockSpec& spec, const Universe& u,
                               const std::vector<LockAttacker>& attackers, uint64_t fuel) {
    for (const auto& A : attackers) {
        TraceTable tt = lock_static_table(p, spec, A, u, fuel);
        std::set<std::string> visible = spec.visible_vars(A.principal, A.locks);
        LevelSet L{A.principal};
        for (size_t m : tt.live_members()) {
            const OutSeq& t = tt.seqs[m];
            auto k_pl = [&](size_t j) {
                return intersect(tt.live_closure(m, visible), k1(tt, prefix(t, j), L));
            };
            for (size_t i = 1; i <= t.size(); ++i) {
                const auto& open = t[i - 1].open_locks;
                if (!std::includes(A.locks.begin(), A.locks.end(), open.begin(), open.end()))
                    continue; // release period for this attacker
                MemberSet before = k_pl(i - 1);
                MemberSet after = k_pl(i);
                if (before != after) {
                    size_t off = *std::find_if(before.begin(), before.end(),
                                               [&](size_t x) { return !after.count(x); });
                    Witness w = direct_witness(m, i, L, off, "");
                    w.context = A.principal;
                    return Verdict::insecure(w);
                }
            }
        }
    }
    return Verdict::secure();
}

} // namespace dynflow
