// Copyright (c) the dynflow contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dynflow/policies.hpp"

namespace dynflow {

struct LoadError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One annotated execution: initial memory plus the output events with their
/// policy states, levels written as lattice level names.
struct AnnOutput {
    std::string level;
    int64_t value = 0;
    std::map<std::string, std::string> policy;
};
struct AnnTraceEntry {
    Memory init;
    std::vector<AnnOutput> outputs;
};

struct SourceSpec {
    std::string program_text;
    std::map<std::string, std::string> gamma_text;
    std::optional<std::string> encoder; // "gr" | "tgr"
    FlowLockSpec locks;

    Program program;  // parsed source, before any encoder
    PolicySpec spec;  // resolved labels (empty for lock tests)
};

struct TestCase {
    bool secure = true;
    bool persistent = false;
    Lattice lattice;
    std::optional<SourceSpec> source;
    std::map<std::string, std::vector<Value>> domains;
    std::vector<AnnTraceEntry> traces;
    std::string provenance;
    std::string name; // file stem, for reports

    bool has_locks() const { return source && !source->locks.spec.empty(); }
};

TestCase load_test(const nlohmann::json& doc, const std::string& name = "");
TestCase load_test_file(const std::string& path);
std::vector<TestCase> load_test_dir(const std::string& path);

/// Applicability tags derived from the annotated traces: A when no policy
/// ever gets more restrictive between consecutive outputs, B dually.
struct Tags {
    bool no_upgrading = true;   // A
    bool no_downgrading = true; // B
};
Tags tag_applicability(const TestCase& tc);

/// Run the (possibly encoder-expanded) source over a set of initial
/// memories and annotate every output. Members that get stuck or do not
/// terminate are reported and excluded.
struct GeneratedTraces {
    std::vector<AnnTraceEntry> traces;
    size_t excluded_nonterminating = 0;
    size_t excluded_stuck = 0;
};
GeneratedTraces generate_traces(const Program& p, const PolicySpec& spec, const Lattice& lat,
                                const std::vector<Memory>& inits, uint64_t fuel = kDefaultFuel);

/// Cartesian-product universe from per-variable domains.
std::vector<Memory> domain_universe(const std::map<std::string, std::vector<Value>>& domains,
                                    size_t bound = 4096);

/// Regenerate every stored trace of a source-carrying test and compare the
/// annotations exactly.
struct ValidationResult {
    bool ok = true;
    std::string detail;
};
ValidationResult validate_roundtrip(const TestCase& tc, uint64_t fuel = kDefaultFuel);

// ---------------------------------------------------------------------------
// Policy registry and benchmark evaluation
// ---------------------------------------------------------------------------

enum class PolicyId {
    DynRelease,     // transient/persistent chosen by the test's flag
    DynReleaseTran,
    DynReleasePer,
    GradualRelease,
    TightGR,
    AccordingToPolicy,
    CryptoErasure,
    ForgetfulSingle,
    Paralocks,
};

std::string to_string(PolicyId id);
std::optional<PolicyId> policy_from_string(const std::string& s);
std::vector<PolicyId> all_policies();

/// A fully prepared test: trace table, labels of interest and attacker
/// enumeration (for lock tests the per-attacker tables are built on demand).
struct Prepared {
    TestCase tc;
    Tags tags;
    TraceTable table;                 // empty in lock mode
    std::vector<LevelSet> attackers;  // empty in lock mode
    std::vector<LockAttacker> lock_attackers;
    Universe lock_universe;
};

Prepared prepare(const TestCase& tc, const CheckOptions& opts = {});

Verdict run_policy(PolicyId id, const Prepared& p, const CheckOptions& opts = {});

/// Recompute knowledge and allowance at an Insecure verdict's witness tuple
/// and confirm the offender is allowed but ruled out.
bool replay_verdict(PolicyId id, const Prepared& p, const Verdict& v,
                    const CheckOptions& opts = {});

/// Applicability matrix: a policy applies to a test when any rule matches.
struct MatrixRule {
    std::optional<bool> persistent;
    std::optional<bool> no_upgrading;   // tag A
    std::optional<bool> no_downgrading; // tag B
    std::optional<bool> locks;
};
using Matrix = std::map<PolicyId, std::vector<MatrixRule>>;

Matrix default_matrix();
Matrix load_matrix_file(const std::string& path);
bool applicable(const Matrix& m, PolicyId id, const Prepared& p);

struct Cell {
    Verdict verdict;
    bool matches = false; // verdict agrees with ground truth (n-a never matches)
};

struct ResultTable {
    std::vector<PolicyId> policies;
    std::vector<std::string> tests; // test names, sorted
    std::map<PolicyId, std::vector<Cell>> cells;
    struct Row {
        size_t yes = 0, no = 0, na = 0;
    };
    std::map<PolicyId, Row> totals;

    std::string render_text() const;
    nlohmann::json render_json() const;
    std::string render_csv() const;
};

ResultTable evaluate(const std::vector<PolicyId>& policies, const std::vector<Prepared>& tests,
                     const Matrix& matrix, const CheckOptions& opts = {}, size_t jobs = 1);

} // namespace dynflow
