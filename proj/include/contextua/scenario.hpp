#pragma once

#include "contextua/error.hpp"

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace contextua {

using MeasurementId = std::uint32_t;
using Outcome = std::uint32_t;
// Sorted, duplicate-free list of measurement ids.
using Context = std::vector<MeasurementId>;

struct LocalSection {
    Context domain;
    std::vector<Outcome> values;  // aligned with domain

    auto operator<=>(const LocalSection&) const = default;
    bool operator==(const LocalSection&) const = default;
    std::optional<Outcome> value_of(MeasurementId x) const;
};

struct MultipartiteScenario {
    std::vector<std::string> sites;
    std::vector<std::vector<std::string>> settings;               // per site
    std::vector<std::vector<std::vector<std::string>>> outcomes;  // per site, per setting
};

class Scenario;
using ScenarioPtr = std::shared_ptr<const Scenario>;

class Scenario {
public:
    static ScenarioPtr multipartite(MultipartiteScenario spec);
    static ScenarioPtr general(std::vector<std::string> measurements,
                               std::vector<std::vector<std::string>> outcomes,
                               const std::vector<std::vector<std::string>>& maximal_contexts);

    std::size_t size() const { return labels_.size(); }
    const std::string& label(MeasurementId x) const { return labels_.at(x); }
    std::optional<MeasurementId> find(const std::string& label) const;
    MeasurementId id_of(const std::string& label) const;
    std::size_t outcome_count(MeasurementId x) const { return outcome_labels_.at(x).size(); }
    const std::vector<std::string>& outcome_labels(MeasurementId x) const { return outcome_labels_.at(x); }
    Outcome outcome_of(MeasurementId x, const std::string& label) const;

    bool is_multipartite() const { return multipartite_.has_value(); }
    const MultipartiteScenario& multipartite_spec() const;
    std::size_t site_count() const;
    std::size_t site_of(MeasurementId x) const { return site_of_.at(x); }
    std::size_t setting_of(MeasurementId x) const { return setting_of_.at(x); }
    MeasurementId measurement(std::size_t site, std::size_t setting) const;
    std::optional<std::size_t> find_site(const std::string& label) const;

    bool is_context(const Context& c) const;
    void require_context(const Context& c) const;
    Context context_from_labels(const std::vector<std::string>& labels) const;
    std::string context_to_string(const Context& c) const;

    std::size_t maximal_context_count() const;
    // Materialized cover; multipartite covers are enumerated lexicographically
    // in (site, setting) declaration order.
    std::vector<Context> maximal_contexts() const;
    // First maximal context (in enumeration order) containing c.
    Context maximal_context_containing(const Context& c) const;
    // Every nonempty context of the downward closure, deduplicated and sorted.
    std::vector<Context> all_contexts() const;

    std::size_t section_count(const Context& c) const;
    std::vector<std::size_t> radices(const Context& c) const;
    LocalSection section(const Context& c, std::size_t index) const;
    std::size_t section_index(const LocalSection& s) const;
    std::vector<LocalSection> sections_of(const Context& c) const;

    // Number of global assignments, or nullopt on overflow.
    std::optional<std::size_t> global_assignment_count() const;

    bool same_as(const Scenario& other) const;

private:
    Scenario() = default;
    void index_labels();

    std::vector<std::string> labels_;
    std::vector<std::vector<std::string>> outcome_labels_;
    std::map<std::string, MeasurementId> by_label_;
    std::optional<MultipartiteScenario> multipartite_;
    std::vector<std::size_t> site_of_, setting_of_, site_offset_;
    std::map<std::string, std::size_t> site_by_label_;
    std::vector<Context> explicit_cover_;
};

LocalSection restrict_section(const LocalSection& s, const Context& c);
Context context_union(const Context& a, const Context& b);
Context context_intersection(const Context& a, const Context& b);
bool context_subset(const Context& a, const Context& b);
bool contexts_disjoint(const Context& a, const Context& b);
LocalSection section_union(const LocalSection& a, const LocalSection& b);

// Adaptive measurement protocol as an explicit decision tree. A node at depth k
// (1-based) below the last round has one child per section of its context, in
// section_index order.
struct ProtocolNode {
    Context context;
    std::vector<ProtocolNode> next;
    std::size_t run_count = 0;
};

using Run = std::vector<LocalSection>;

class MeasurementProtocol {
public:
    MeasurementProtocol(int rounds, ProtocolNode root, const Scenario& scenario);
    static MeasurementProtocol single(Context c, const Scenario& scenario);
    static MeasurementProtocol empty(int rounds, const Scenario& scenario);
    // Materializes a tree from a rule giving the round-k context from the
    // prefix of earlier sections.
    static MeasurementProtocol build(int rounds, const Scenario& scenario,
                                     const std::function<Context(const Run& prefix)>& rule);

    int rounds() const { return rounds_; }
    const ProtocolNode& root() const { return root_; }
    std::size_t run_count() const { return root_.run_count; }
    std::vector<Run> runs(const Scenario& scenario) const;
    std::size_t run_index(const Run& run, const Scenario& scenario) const;
    // Context of round k along the run prefix (only the first k-1 sections are read).
    Context context_at(int round, const Run& prefix, const Scenario& scenario) const;
    // Union of all contexts that occur anywhere in the tree.
    Context support() const;
    const std::vector<std::uint32_t>& key() const { return key_; }

    bool operator==(const MeasurementProtocol& o) const { return key_ == o.key_; }
    bool operator<(const MeasurementProtocol& o) const { return key_ < o.key_; }

private:
    int rounds_;
    ProtocolNode root_;
    std::vector<std::uint32_t> key_;
};

struct ProtocolReport {
    bool ok = true;
    std::string message;
    Run offending_prefix;
};

ProtocolReport validate_protocol(const MeasurementProtocol& p, const Scenario& scenario);

// Round-synchronous product; shorter protocols are padded with empty rounds.
MeasurementProtocol parallel_product(const std::vector<MeasurementProtocol>& ps, const Scenario& scenario);

// Projects a run of a product protocol onto one of its components.
Run restrict_run(const Run& run, const MeasurementProtocol& component, const Scenario& scenario);

Context run_context(const Run& run);
LocalSection run_section(const Run& run);

}  // namespace contextua
