// Copyright (c) the dynflow contributors.
// SPDX-License-Identifier: Apache-2.0

#include "dynflow/anntrace.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

#include "dynflow/parse.hpp"

namespace dynflow {

namespace {

Value value_from_json(const nlohmann::json& j, const std::string& where) {
    if (j.is_boolean())
        return j.get<bool>();
    if (j.is_number_integer())
        return j.get<int64_t>();
    throw LoadError("expected an integer or Boolean in " + where);
}

Memory memory_from_json(const nlohmann::json& j, const std::string& where) {
    std::map<std::string, Value> bindings;
    for (auto it = j.begin(); it != j.end(); ++it)
        bindings[it.key()] = value_from_json(it.value(), where);
    return Memory(std::move(bindings));
}

/// Events referenced by the test's labels: the program's declared events and
/// locks, plus any label-condition name that is not a program variable.
std::set<std::string> label_event_names(const Program& p,
                                        const std::map<std::string, LabelPtr>& labels) {
    std::set<std::string> events = p.events;
    events.insert(p.locks.begin(), p.locks.end());
    std::set<std::string> mentioned;
    for (const auto& [var, l] : labels)
        collect_names(l, mentioned);
    for (const auto& n : mentioned)
        if (!p.variables.count(n))
            events.insert(n);
    return events;
}

LabelPtr resolve_channel(const LabelPtr& l, const Lattice& lat,
                         const std::set<std::string>& events) {
    return resolve(bind_label_names(l, events), lat);
}

CmdPtr resolve_channels(const CmdPtr& c, const Lattice& lat,
                        const std::set<std::string>& events) {
    switch (c->kind) {
    case Cmd::Kind::Seq:
        return Cmd::seq(resolve_channels(c->first, lat, events),
                        resolve_channels(c->second, lat, events));
    case Cmd::Kind::If:
        return Cmd::if_(c->guard, resolve_channels(c->first, lat, events),
                        resolve_channels(c->second, lat, events));
    case Cmd::Kind::While:
        return Cmd::while_(c->guard, resolve_channels(c->first, lat, events));
    case Cmd::Kind::Output: return Cmd::output(resolve_channel(c->channel, lat, events), c->rhs);
    default: return c;
    }
}

} // namespace

TestCase load_test(const nlohmann::json& doc, const std::string& name) {
    TestCase tc;
    tc.name = name;
    try {
        tc.secure = doc.at("secure").get<bool>();
        tc.persistent = doc.at("persistent").get<bool>();
        tc.provenance = doc.value("provenance", "");

        const auto& lat = doc.at("lattice");
        std::vector<std::pair<std::string, std::string>> order;
        for (const auto& pair : lat.at("order")) {
            if (!pair.is_array() || pair.size() != 2)
                throw LoadError("lattice order entries are [lower, upper] pairs");
            order.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
        }
        tc.lattice = Lattice(lat.at("levels").get<std::vector<std::string>>(), order);

        if (doc.contains("domains") && !doc.at("domains").is_null()) {
            for (auto it = doc.at("domains").begin(); it != doc.at("domains").end(); ++it) {
                std::vector<Value> vals;
                for (const auto& v : it.value())
                    vals.push_back(value_from_json(v, "domains"));
                if (vals.empty())
                    throw LoadError("empty domain for variable " + it.key());
                tc.domains[it.key()] = std::move(vals);
            }
        }

        std::optional<std::set<std::string>> policy_vars;
        for (const auto& jt : doc.at("traces")) {
            AnnTraceEntry entry;
            entry.init = memory_from_json(jt.at("init"), "initial memory");
            for (const auto& jo : jt.at("outputs")) {
                AnnOutput out;
                out.level = jo.at("level").get<std::string>();
                if (!tc.lattice.has_level(out.level))
                    throw LoadError("output level not in lattice: " + out.level);
                out.value = jo.at("value").get<int64_t>();
                for (auto it = jo.at("policy").begin(); it != jo.at("policy").end(); ++it) {
                    const std::string lvl = it.value().get<std::string>();
                    if (!tc.lattice.has_level(lvl))
                        throw LoadError("policy level not in lattice: " + lvl);
                    out.policy[it.key()] = lvl;
                }
                std::set<std::string> vars;
                for (const auto& [v, _] : out.policy)
                    vars.insert(v);
                if (!policy_vars)
                    policy_vars = vars;
                else if (*policy_vars != vars)
                    throw LoadError("policy-state maps bind inconsistent variable sets");
                entry.outputs.push_back(std::move(out));
            }
            tc.traces.push_back(std::move(entry));
        }

        if (doc.contains("source") && !doc.at("source").is_null()) {
            const auto& js = doc.at("source");
            SourceSpec src;
            src.program_text = js.at("program").get<std::string>();
            src.program = parse_program(src.program_text);
            if (js.contains("encoder") && !js.at("encoder").is_null())
                src.encoder = js.at("encoder").get<std::string>();
            if (js.contains("locks") && !js.at("locks").is_null()) {
                for (auto it = js.at("locks").begin(); it != js.at("locks").end(); ++it)
                    for (auto jt2 = it.value().begin(); jt2 != it.value().end(); ++jt2)
                        src.locks.spec[it.key()][jt2.key()] = std::set<std::string>(
                            jt2.value().get<std::vector<std::string>>().begin(),
                            jt2.value().get<std::vector<std::string>>().end());
            }
            if (js.contains("gamma") && !js.at("gamma").is_null()) {
                std::map<std::string, LabelPtr> raw;
                for (auto it = js.at("gamma").begin(); it != js.at("gamma").end(); ++it)
                    raw[it.key()] = parse_label(it.value().get<std::string>());
                std::set<std::string> events = label_event_names(src.program, raw);
                for (const auto& [var, l] : raw)
                    src.spec.gamma[var] = resolve(bind_label_names(l, events), tc.lattice);
                src.spec.type = tc.persistent ? PolicyType::Persistent : PolicyType::Transient;
                src.program.body = resolve_channels(src.program.body, tc.lattice, events);
            }
            if (src.locks.spec.empty()) {
                for (const auto& v : src.program.variables)
                    if (!src.spec.gamma.count(v))
                        throw LoadError("variable without a policy label: " + v);
            }
            tc.source = std::move(src);
        }

        if (tc.traces.empty() && tc.domains.empty())
            throw LoadError("a test needs traces or domains to fix its universe");

        // Universe members must bind one shared name set covering every
        // variable the policies and closures mention.
        std::optional<std::set<std::string>> init_vars;
        for (const auto& tr : tc.traces) {
            std::set<std::string> names;
            for (const auto& [n, _] : tr.init.bindings())
                names.insert(n);
            if (!init_vars)
                init_vars = names;
            else if (*init_vars != names)
                throw LoadError("initial memories bind inconsistent name sets");
        }
        if (init_vars) {
            if (policy_vars)
                for (const auto& v : *policy_vars)
                    if (!init_vars->count(v))
                        throw LoadError("policy-state variable unbound in initial memories: " + v);
            if (tc.source && !tc.has_locks())
                for (const auto& [v, _] : tc.source->spec.gamma)
                    if (!init_vars->count(v))
                        throw LoadError("labelled variable unbound in initial memories: " + v);
        }
    } catch (const nlohmann::json::exception& e) {
        throw LoadError(std::string("malformed test document: ") + e.what());
    } catch (const ParseError& e) {
        throw LoadError(std::string("source does not parse: ") + e.what());
    } catch (const ResolveError& e) {
        throw LoadError(std::string("label resolution failed: ") + e.what());
    }
    return tc;
}

TestCase load_test_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw LoadError("cannot open " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw LoadError(path + ": " + e.what());
    }
    return load_test(doc, std::filesystem::path(path).stem().string());
}

std::vector<TestCase> load_test_dir(const std::string& path) {
    std::vector<std::string> files;
    for (const auto& entry : std::filesystem::directory_iterator(path))
        if (entry.path().extension() == ".json")
            files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    std::vector<TestCase> out;
    for (const auto& f : files)
        out.push_back(load_test_file(f));
    return out;
}

Tags tag_applicability(const TestCase& tc) {
    Tags tags;
    for (const auto& tr : tc.traces) {
        for (size_t k = 0; k + 1 < tr.outputs.size(); ++k) {
            for (const auto& [var, cur_level] : tr.outputs[k].policy) {
                LevelSet cur = tc.lattice.level_set(cur_level);
                LevelSet nxt = tc.lattice.level_set(tr.outputs[k + 1].policy.at(var));
                if (!leq(nxt, cur))
                    tags.no_upgrading = false;
                if (!leq(cur, nxt))
                    tags.no_downgrading = false;
            }
        }
    }
    return tags;
}

// ---------------------------------------------------------------------------
// Table building
// ---------------------------------------------------------------------------

namespace {

struct LabelIndex {
    std::vector<LabelOfInterest> labels;
    std::vector<LabelPtr> asts;
};

LabelIndex group_by_label(const PolicySpec& spec) {
    LabelIndex idx;
    for (const auto& [var, label] : spec.gamma) {
        bool found = false;
        for (size_t i = 0; i < idx.asts.size(); ++i) {
            if (equal(idx.asts[i], label)) {
                idx.labels[i].vars.push_back(var);
                found = true;
                break;
            }
        }
        if (!found) {
            idx.asts.push_back(label);
            idx.labels.push_back({to_string(label), {var}});
        }
    }
    return idx;
}

TraceTable build_table(const Program& p, const PolicySpec& spec, const Universe& u,
                       uint64_t fuel) {
    LabelIndex idx = group_by_label(spec);
    TraceTable tt;
    tt.universe = u;
    tt.labels = idx.labels;
    for (const Memory& init : u) {
        ExecTrace tr = run(p, init, fuel);
        if (tr.status == RunStatus::Terminated) {
            tt.terminating.push_back(true);
            tt.seqs.push_back(extend(tr, spec, idx.labels, idx.asts, p.locks));
        } else {
            tt.terminating.push_back(false);
            tt.seqs.push_back({});
            if (tr.status == RunStatus::NonTerminating)
                tt.excluded_nonterminating++;
            else
                tt.excluded_stuck++;
        }
    }
    return tt;
}

TraceTable table_from_annotations(const TestCase& tc) {
    TraceTable tt;
    for (const auto& tr : tc.traces) {
        tt.universe.push_back(tr.init);
        tt.terminating.push_back(true);
    }

    // Group variables whose annotated policies coincide at every output of
    // every trace; each group is one label of interest.
    std::map<std::string, size_t> group_of;
    std::map<std::string, std::string> signature;
    for (const auto& tr : tc.traces)
        for (const auto& out : tr.outputs)
            for (const auto& [var, lvl] : out.policy)
                signature[var] += lvl + ";";
    std::map<std::string, size_t> by_signature;
    for (const auto& [var, sig] : signature) {
        auto it = by_signature.find(sig);
        if (it == by_signature.end()) {
            by_signature[sig] = tt.labels.size();
            group_of[var] = tt.labels.size();
            tt.labels.push_back({"policy(" + var + ")", {var}});
        } else {
            group_of[var] = it->second;
            tt.labels[it->second].vars.push_back(var);
        }
    }

    for (const auto& tr : tc.traces) {
        OutSeq seq;
        for (const auto& out : tr.outputs) {
            OutEvent ev;
            ev.channel_key = out.level;
            ev.channel_now = tc.lattice.level_set(out.level);
            ev.value = out.value;
            ev.label_gamma.assign(tt.labels.size(), {});
            for (const auto& [var, lvl] : out.policy) {
                ev.gamma[var] = tc.lattice.level_set(lvl);
                ev.label_gamma[group_of.at(var)] = ev.gamma[var];
            }
            seq.push_back(std::move(ev));
        }
        tt.seqs.push_back(std::move(seq));
    }
    return tt;
}

std::vector<LevelSet> enumerate_attackers(const Lattice& lat, bool powerset) {
    std::vector<LevelSet> out = lat.all_level_sets();
    if (powerset && lat.levels().size() <= 4) {
        const auto& lv = lat.levels();
        for (size_t mask = 0; mask < (size_t(1) << lv.size()); ++mask) {
            LevelSet ls;
            for (size_t i = 0; i < lv.size(); ++i)
                if (mask & (size_t(1) << i))
                    ls.insert(lv[i]);
            if (std::find(out.begin(), out.end(), ls) == out.end())
                out.push_back(ls);
        }
    }
    return out;
}

/// The source with its encoder applied (the form every checker runs).
std::pair<Program, PolicySpec> effective_source(const TestCase& tc) {
    const SourceSpec& src = *tc.source;
    if (!src.encoder)
        return {src.program, src.spec};
    if (*src.encoder == "gr")
        return encode_gradual_release(src.program, src.spec, tc.lattice);
    if (*src.encoder == "tgr")
        return encode_tight_gr(src.program, src.spec, tc.lattice);
    throw LoadError("unknown encoder: " + *src.encoder);
}

Universe universe_of(const TestCase& tc, size_t bound) {
    if (!tc.traces.empty()) {
        Universe u;
        for (const auto& tr : tc.traces) {
            if (std::find(u.begin(), u.end(), tr.init) != u.end())
                throw LoadError("duplicate initial memory in traces");
            u.push_back(tr.init);
        }
        return u;
    }
    return domain_universe(tc.domains, bound);
}

} // namespace

std::vector<Memory> domain_universe(const std::map<std::string, std::vector<Value>>& domains,
                                    size_t bound) {
    size_t total = 1;
    for (const auto& [var, vals] : domains) {
        total *= vals.size();
        if (total > bound)
            throw BudgetError("domain product exceeds the universe bound");
    }
    std::vector<Memory> out;
    std::map<std::string, Value> current;
    std::function<void(std::map<std::string, std::vector<Value>>::const_iterator)> rec =
        [&](auto it) {
            if (it == domains.end()) {
                out.push_back(Memory(current));
                return;
            }
            for (const auto& v : it->second) {
                current[it->first] = v;
                rec(std::next(it));
            }
        };
    rec(domains.begin());
    return out;
}

GeneratedTraces generate_traces(const Program& p, const PolicySpec& spec, const Lattice& lat,
                                const std::vector<Memory>& inits, uint64_t fuel) {
    LabelIndex idx = group_by_label(spec);
    GeneratedTraces gen;
    for (const Memory& init : inits) {
        ExecTrace tr = run(p, init, fuel);
        if (tr.status == RunStatus::NonTerminating) {
            gen.excluded_nonterminating++;
            continue;
        }
        if (tr.status == RunStatus::Stuck) {
            gen.excluded_stuck++;
            continue;
        }
        OutSeq seq = extend(tr, spec, idx.labels, idx.asts, p.locks);
        AnnTraceEntry entry;
        entry.init = init;
        for (const auto& ev : seq) {
            AnnOutput out;
            auto level = lat.level_of(ev.channel_now);
            if (!level)
                throw LoadError("channel level set " + to_string(ev.channel_now) +
                                " is not the image of any lattice level");
            out.level = *level;
            if (!is_int(ev.value))
                throw LoadError("annotated traces hold integer outputs only");
            out.value = as_int(ev.value);
            for (const auto& [var, ls] : ev.gamma) {
                auto plevel = lat.level_of(ls);
                if (!plevel)
                    throw LoadError("policy level set " + to_string(ls) +
                                    " is not the image of any lattice level");
                out.policy[var] = *plevel;
            }
            entry.outputs.push_back(std::move(out));
        }
        gen.traces.push_back(std::move(entry));
    }
    return gen;
}

ValidationResult validate_roundtrip(const TestCase& tc, uint64_t fuel) {
    if (!tc.source || tc.traces.empty() || tc.has_locks())
        return {true, "nothing to validate"};
    auto [program, spec] = effective_source(tc);
    std::vector<Memory> inits;
    for (const auto& tr : tc.traces)
        inits.push_back(tr.init);
    GeneratedTraces gen = generate_traces(program, spec, tc.lattice, inits, fuel);
    if (gen.traces.size() != tc.traces.size())
        return {false, tc.name + ": some listed memories did not terminate"};
    for (size_t i = 0; i < tc.traces.size(); ++i) {
        const auto& want = tc.traces[i].outputs;
        const auto& got = gen.traces[i].outputs;
        if (want.size() != got.size())
            return {false, tc.name + ": trace " + std::to_string(i) + " has " +
                               std::to_string(got.size()) + " outputs, annotation lists " +
                               std::to_string(want.size())};
        for (size_t k = 0; k < want.size(); ++k) {
            if (want[k].level != got[k].level || want[k].value != got[k].value ||
                want[k].policy != got[k].policy)
                return {false, tc.name + ": trace " + std::to_string(i) + ", output " +
                                   std::to_string(k + 1) + " differs from the annotation"};
        }
    }
    return {true, ""};
}

// ---------------------------------------------------------------------------
// Policy registry
// ---------------------------------------------------------------------------

std::string to_string(PolicyId id) {
    switch (id) {
    case PolicyId::DynRelease: return "dynrelease";
    case PolicyId::DynReleaseTran: return "dynrelease-tran";
    case PolicyId::DynReleasePer: return "dynrelease-per";
    case PolicyId::GradualRelease: return "gr";
    case PolicyId::TightGR: return "tgr";
    case PolicyId::AccordingToPolicy: return "ap";
    case PolicyId::CryptoErasure: return "ce";
    case PolicyId::ForgetfulSingle: return "fa-single";
    case PolicyId::Paralocks: return "paralocks";
    }
    return "?";
}

std::optional<PolicyId> policy_from_string(const std::string& s) {
    for (PolicyId id :
         {PolicyId::DynRelease, PolicyId::DynReleaseTran, PolicyId::DynReleasePer,
          PolicyId::GradualRelease, PolicyId::TightGR, PolicyId::AccordingToPolicy,
          PolicyId::CryptoErasure, PolicyId::ForgetfulSingle, PolicyId::Paralocks})
        if (to_string(id) == s)
            return id;
    return std::nullopt;
}

std::vector<PolicyId> all_policies() {
    return {PolicyId::DynRelease,     PolicyId::GradualRelease, PolicyId::TightGR,
            PolicyId::AccordingToPolicy, PolicyId::CryptoErasure, PolicyId::ForgetfulSingle,
            PolicyId::Paralocks};
}

Prepared prepare(const TestCase& tc, const CheckOptions& opts) {
    Prepared p;
    p.tc = tc;
    p.tags = tag_applicability(tc);
    if (tc.has_locks()) {
        p.lock_universe = universe_of(tc, opts.domain_bound);
        std::set<std::string> locks = tc.source->program.locks;
        for (const auto& [var, by_principal] : tc.source->locks.spec)
            for (const auto& [principal, ls] : by_principal)
                locks.insert(ls.begin(), ls.end());
        p.lock_attackers =
            default_lock_attackers(tc.source->locks, locks, opts.lock_attacker_max_locks);
        return p;
    }
    Universe u = universe_of(tc, opts.domain_bound);
    if (tc.source) {
        auto [program, spec] = effective_source(tc);
        p.table = build_table(program, spec, u, opts.fuel);
    } else {
        p.table = table_from_annotations(tc);
    }
    p.attackers = enumerate_attackers(tc.lattice, opts.powerset_attackers);
    return p;
}

namespace {

std::string attacker_context(const LockAttacker& a) {
    std::string s = a.principal + "|";
    bool first = true;
    for (const auto& l : a.locks) {
        if (!first)
            s += ",";
        s += l;
        first = false;
    }
    return s;
}

std::optional<LockAttacker> attacker_from_context(const std::string& ctx) {
    auto bar = ctx.find('|');
    if (bar == std::string::npos)
        return std::nullopt;
    LockAttacker a;
    a.principal = ctx.substr(0, bar);
    std::string rest = ctx.substr(bar + 1);
    std::istringstream in(rest);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty())
            a.locks.insert(item);
    return a;
}

PolicyType dynrelease_type(PolicyId id, const TestCase& tc) {
    if (id == PolicyId::DynReleaseTran)
        return PolicyType::Transient;
    if (id == PolicyId::DynReleasePer)
        return PolicyType::Persistent;
    return tc.persistent ? PolicyType::Persistent : PolicyType::Transient;
}

/// Per-attacker sub-check of a lock test: the transformed program is run
/// over the same universe and checked at the attacker's own level.
Verdict check_lock_encoded(PolicyId id, const Prepared& p, const CheckOptions& opts) {
    for (const auto& A : p.lock_attackers) {
        auto [program, spec] = encode_paralocks(p.tc.source->program, p.tc.source->locks, A);
        TraceTable tt = build_table(program, spec, p.lock_universe, opts.fuel);
        std::vector<LevelSet> levels{LevelSet{A.principal}};
        Verdict v;
        if (id == PolicyId::ForgetfulSingle)
            v = check_forgetful(tt, levels, single_memory_automaton());
        else
            v = check_dynrelease(tt, levels, dynrelease_type(id, p.tc));
        if (v.is_insecure()) {
            v.witness->context = attacker_context(A);
            return v;
        }
    }
    return Verdict::secure();
}

} // namespace

Verdict run_policy(PolicyId id, const Prepared& p, const CheckOptions& opts) {
    if (p.tc.has_locks()) {
        switch (id) {
        case PolicyId::Paralocks: {
            Verdict v = check_paralocks(p.tc.source->program, p.tc.source->locks,
                                        p.lock_universe, p.lock_attackers, opts.fuel);
            return v;
        }
        case PolicyId::DynRelease:
        case PolicyId::DynReleaseTran:
        case PolicyId::DynReleasePer:
        case PolicyId::ForgetfulSingle: return check_lock_encoded(id, p, opts);
        default: return Verdict::not_applicable();
        }
    }
    switch (id) {
    case PolicyId::DynRelease:
    case PolicyId::DynReleaseTran:
    case PolicyId::DynReleasePer:
        return check_dynrelease(p.table, p.attackers, dynrelease_type(id, p.tc));
    case PolicyId::GradualRelease: return check_gradual_release(p.table, p.attackers);
    case PolicyId::TightGR: return check_tight_gr(p.table, p.attackers);
    case PolicyId::AccordingToPolicy:
        return check_according_to_policy(p.table, p.attackers, opts.ap_budget);
    case PolicyId::CryptoErasure: return check_crypto_erasure(p.table, p.attackers);
    case PolicyId::ForgetfulSingle:
        return check_forgetful(p.table, p.attackers, single_memory_automaton());
    case PolicyId::Paralocks: return Verdict::not_applicable();
    }
    return Verdict::not_applicable();
}

bool replay_verdict(PolicyId id, const Prepared& p, const Verdict& v, const CheckOptions& opts) {
    if (!v.is_insecure() || !v.witness)
        return false;
    const Witness& w = *v.witness;
    if (p.tc.has_locks()) {
        auto A = attacker_from_context(w.context);
        if (!A)
            return false;
        if (id == PolicyId::Paralocks) {
            TraceTable tt = lock_static_table(p.tc.source->program, p.tc.source->locks, *A,
                                              p.lock_universe, opts.fuel);
            FrameworkInstance inst = paralocks_instance(tt, p.tc.source->locks, *A);
            return replay_witness(inst, tt, w);
        }
        auto [program, spec] = encode_paralocks(p.tc.source->program, p.tc.source->locks, *A);
        TraceTable tt = build_table(program, spec, p.lock_universe, opts.fuel);
        if (id == PolicyId::ForgetfulSingle) {
            Automaton atk = single_memory_automaton();
            FrameworkInstance inst = forgetful_instance(tt, atk);
            return replay_witness(inst, tt, w);
        }
        FrameworkInstance inst = dynrelease_instance(tt, dynrelease_type(id, p.tc));
        return replay_witness(inst, tt, w);
    }
    switch (id) {
    case PolicyId::DynRelease:
    case PolicyId::DynReleaseTran:
    case PolicyId::DynReleasePer: {
        FrameworkInstance inst = dynrelease_instance(p.table, dynrelease_type(id, p.tc));
        return replay_witness(inst, p.table, w);
    }
    case PolicyId::GradualRelease: {
        FrameworkInstance inst = gradual_release_instance(p.table);
        return replay_witness(inst, p.table, w);
    }
    case PolicyId::TightGR: {
        FrameworkInstance inst = tight_gr_instance(p.table);
        return replay_witness(inst, p.table, w);
    }
    case PolicyId::AccordingToPolicy: {
        FrameworkInstance inst = according_to_policy_instance(p.table, opts.ap_budget);
        return replay_witness(inst, p.table, w);
    }
    case PolicyId::CryptoErasure: {
        FrameworkInstance inst = crypto_erasure_instance(p.table);
        return replay_witness(inst, p.table, w);
    }
    case PolicyId::ForgetfulSingle: {
        Automaton atk = single_memory_automaton();
        FrameworkInstance inst = forgetful_instance(p.table, atk);
        return replay_witness(inst, p.table, w);
    }
    default: return false;
    }
}

// ---------------------------------------------------------------------------
// Applicability and evaluation
// ---------------------------------------------------------------------------

Matrix default_matrix() {
    Matrix m;
    m[PolicyId::DynRelease] = {MatrixRule{}};
    m[PolicyId::DynReleaseTran] = {MatrixRule{}};
    m[PolicyId::DynReleasePer] = {MatrixRule{}};
    m[PolicyId::ForgetfulSingle] = {MatrixRule{}};
    m[PolicyId::GradualRelease] = {MatrixRule{true, std::nullopt, std::nullopt, false}};
    m[PolicyId::TightGR] = {MatrixRule{true, std::nullopt, std::nullopt, false}};
    // Declassification and erasure, but not persistent upgrades.
    m[PolicyId::AccordingToPolicy] = {MatrixRule{false, std::nullopt, std::nullopt, false},
                                      MatrixRule{std::nullopt, true, std::nullopt, false}};
    m[PolicyId::CryptoErasure] = {MatrixRule{false, std::nullopt, true, false}};
    m[PolicyId::Paralocks] = {MatrixRule{true, std::nullopt, std::nullopt, true}};
    return m;
}

Matrix load_matrix_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw LoadError("cannot open matrix file " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw LoadError(path + ": " + e.what());
    }
    Matrix m = default_matrix();
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        auto id = policy_from_string(it.key());
        if (!id)
            throw LoadError("unknown policy in matrix: " + it.key());
        std::vector<MatrixRule> rules;
        for (const auto& jr : it.value()) {
            MatrixRule r;
            if (jr.contains("persistent"))
                r.persistent = jr.at("persistent").get<bool>();
            if (jr.contains("no_upgrading"))
                r.no_upgrading = jr.at("no_upgrading").get<bool>();
            if (jr.contains("no_downgrading"))
                r.no_downgrading = jr.at("no_downgrading").get<bool>();
            if (jr.contains("locks"))
                r.locks = jr.at("locks").get<bool>();
            rules.push_back(r);
        }
        m[*id] = rules;
    }
    return m;
}

bool applicable(const Matrix& m, PolicyId id, const Prepared& p) {
    auto it = m.find(id);
    if (it == m.end())
        return true;
    for (const auto& r : it->second) {
        bool ok = true;
        if (r.persistent && *r.persistent != p.tc.persistent)
            ok = false;
        if (r.no_upgrading && *r.no_upgrading != p.tags.no_upgrading)
            ok = false;
        if (r.no_downgrading && *r.no_downgrading != p.tags.no_downgrading)
            ok = false;
        if (r.locks && *r.locks != p.tc.has_locks())
            ok = false;
        if (ok)
            return true;
    }
    return false;
}

ResultTable evaluate(const std::vector<PolicyId>& policies, const std::vector<Prepared>& tests,
                     const Matrix& matrix, const CheckOptions& opts, size_t jobs) {
    ResultTable table;
    table.policies = policies;
    for (const auto& t : tests)
        table.tests.push_back(t.tc.name);

    auto cell_of = [&](PolicyId id, const Prepared& p) {
        Cell c;
        if (!applicable(matrix, id, p)) {
            c.verdict = Verdict::not_applicable();
            c.matches = false;
            return c;
        }
        c.verdict = run_policy(id, p, opts);
        c.matches = c.verdict.applicable() && (c.verdict.is_secure() == p.tc.secure);
        return c;
    };

    for (PolicyId id : policies) {
        std::vector<Cell> row(tests.size());
        if (jobs > 1) {
            std::vector<std::future<Cell>> futures;
            futures.reserve(tests.size());
            for (size_t i = 0; i < tests.size(); ++i)
                futures.push_back(std::async(std::launch::async,
                                             [&, id, i] { return cell_of(id, tests[i]); }));
            for (size_t i = 0; i < tests.size(); ++i)
                row[i] = futures[i].get();
        } else {
            for (size_t i = 0; i < tests.size(); ++i)
                row[i] = cell_of(id, tests[i]);
        }
        ResultTable::Row totals;
        for (const auto& c : row) {
            if (!c.verdict.applicable())
                totals.na++;
            else if (c.matches)
                totals.yes++;
            else
                totals.no++;
        }
        table.cells[id] = std::move(row);
        table.totals[id] = totals;
    }
    return table;
}

std::string ResultTable::render_text() const {
    std::ostringstream out;
    size_t name_width = 4;
    for (const auto& t : tests)
        name_width = std::max(name_width, t.size());
    out << std::string(name_width, ' ') << "  ";
    for (PolicyId id : policies)
        out << to_string(id) << "  ";
    out << "\n";
    for (size_t i = 0; i < tests.size(); ++i) {
        out << tests[i] << std::string(name_width - tests[i].size(), ' ') << "  ";
        for (PolicyId id : policies) {
            const Cell& c = cells.at(id)[i];
            std::string mark = !c.verdict.applicable() ? "-" : (c.matches ? "Y" : "X");
            size_t w = to_string(id).size();
            out << mark << std::string(w + 1, ' ');
        }
        out << "\n";
    }
    out << "\ntotals (yes/no/n-a):\n";
    for (PolicyId id : policies) {
        const Row& r = totals.at(id);
        out << "  " << to_string(id) << ": " << r.yes << "/" << r.no << "/" << r.na << "\n";
    }
    return out.str();
}

nlohmann::json ResultTable::render_json() const {
    nlohmann::json doc;
    doc["tests"] = tests;
    nlohmann::json rows = nlohmann::json::object();
    for (PolicyId id : policies) {
        nlohmann::json row;
        nlohmann::json jcells = nlohmann::json::array();
        const auto& cs = cells.at(id);
        for (size_t i = 0; i < tests.size(); ++i) {
            jcells.push_back({{"test", tests[i]},
                              {"verdict", to_string(cs[i].verdict)},
                              {"matches", cs[i].matches}});
        }
        row["cells"] = jcells;
        const Row& r = totals.at(id);
        row["yes"] = r.yes;
        row["no"] = r.no;
        row["na"] = r.na;
        rows[to_string(id)] = row;
    }
    doc["policies"] = rows;
    return doc;
}

std::string ResultTable::render_csv() const {
    std::ostringstream out;
    out << "policy,test,verdict,matches\n";
    for (PolicyId id : policies) {
        const auto& cs = cells.at(id);
        for (size_t i = 0; i < tests.size(); ++i)
            out << to_string(id) << "," << tests[i] << "," << to_string(cs[i].verdict) << ","
                << (cs[i].matches ? "true" : "false") << "\n";
    }
    return out.str();
}

} // namespace dynflow
