#include "contextua/scenario.hpp"

#include "contextua/numeric.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <sstream>

namespace contextua {

std::optional<Outcome> LocalSection::value_of(MeasurementId x) const {
    auto it = std::lower_bound(domain.begin(), domain.end(), x);
    if (it == domain.end() || *it != x) return std::nullopt;
    return values[static_cast<std::size_t>(it - domain.begin())];
}

void Scenario::index_labels() {
    for (MeasurementId x = 0; x < labels_.size(); ++x) {
        auto [it, inserted] = by_label_.emplace(labels_[x], x);
        require(inserted, ErrorCode::LabelCollision, "duplicate measurement label '" + labels_[x] + "'");
        require(!outcome_labels_[x].empty(), ErrorCode::InvalidArgument,
                "measurement '" + labels_[x] + "' has no outcomes");
        std::set<std::string> seen(outcome_labels_[x].begin(), outcome_labels_[x].end());
        require(seen.size() == outcome_labels_[x].size(), ErrorCode::LabelCollision,
                "duplicate outcome label at '" + labels_[x] + "'");
    }
}

ScenarioPtr Scenario::multipartite(MultipartiteScenario spec) {
    require(spec.settings.size() == spec.sites.size() && spec.outcomes.size() == spec.sites.size(),
            ErrorCode::InvalidArgument, "multipartite scenario tables disagree on the number of sites");
    std::shared_ptr<Scenario> s(new Scenario());
    for (std::size_t i = 0; i < spec.sites.size(); ++i) {
        require(spec.sites[i].find('/') == std::string::npos, ErrorCode::InvalidArgument,
                "site label may not contain '/': " + spec.sites[i]);
        auto [it, inserted] = s->site_by_label_.emplace(spec.sites[i], i);
        require(inserted, ErrorCode::LabelCollision, "duplicate site '" + spec.sites[i] + "'");
        require(!spec.settings[i].empty(), ErrorCode::InvalidArgument, "site '" + spec.sites[i] + "' has no settings");
        require(spec.outcomes[i].size() == spec.settings[i].size(), ErrorCode::InvalidArgument,
                "outcome table size mismatch at site '" + spec.sites[i] + "'");
        s->site_offset_.push_back(s->labels_.size());
        for (std::size_t x = 0; x < spec.settings[i].size(); ++x) {
            s->labels_.push_back(spec.sites[i] + "/" + spec.settings[i][x]);
            s->outcome_labels_.push_back(spec.outcomes[i][x]);
            s->site_of_.push_back(i);
            s->setting_of_.push_back(x);
        }
    }
    s->site_offset_.push_back(s->labels_.size());
    s->index_labels();
    s->multipartite_ = std::move(spec);
    return s;
}

ScenarioPtr Scenario::general(std::vector<std::string> measurements, std::vector<std::vector<std::string>> outcomes,
                              const std::vector<std::vector<std::string>>& maximal_contexts) {
    require(measurements.size() == outcomes.size(), ErrorCode::InvalidArgument,
            "measurement and outcome lists differ in length");
    std::shared_ptr<Scenario> s(new Scenario());
    s->labels_ = std::move(measurements);
    s->outcome_labels_ = std::move(outcomes);
    s->index_labels();
    std::vector<bool> covered(s->labels_.size(), false);
    for (const auto& labels : maximal_contexts) {
        Context c;
        for (const auto& l : labels) c.push_back(s->id_of(l));
        std::sort(c.begin(), c.end());
        require(std::adjacent_find(c.begin(), c.end()) == c.end(), ErrorCode::InvalidArgument,
                "maximal context repeats a measurement");
        for (auto x : c) covered[x] = true;
        s->explicit_cover_.push_back(std::move(c));
    }
    for (std::size_t x = 0; x < covered.size(); ++x)
        require(covered[x], ErrorCode::InvalidArgument, "measurement '" + s->labels_[x] + "' is not covered");
    for (std::size_t a = 0; a < s->explicit_cover_.size(); ++a)
        for (std::size_t b = 0; b < s->explicit_cover_.size(); ++b)
            if (a != b)
                require(!context_subset(s->explicit_cover_[a], s->explicit_cover_[b]), ErrorCode::InvalidArgument,
                        "maximal contexts do not form an antichain");
    return s;
}

std::optional<MeasurementId> Scenario::find(const std::string& label) const {
    auto it = by_label_.find(label);
    if (it == by_label_.end()) return std::nullopt;
    return it->second;
}

MeasurementId Scenario::id_of(const std::string& label) const {
    auto id = find(label);
    require(id.has_value(), ErrorCode::InvalidArgument, "unknown measurement '" + label + "'");
    return *id;
}

Outcome Scenario::outcome_of(MeasurementId x, const std::string& label) const {
    const auto& ls = outcome_labels_.at(x);
    auto it = std::find(ls.begin(), ls.end(), label);
    require(it != ls.end(), ErrorCode::OutcomeLabelMismatch,
            "unknown outcome '" + label + "' for measurement '" + labels_[x] + "'");
    return static_cast<Outcome>(it - ls.begin());
}

const MultipartiteScenario& Scenario::multipartite_spec() const {
    require(multipartite_.has_value(), ErrorCode::PreconditionViolated, "scenario is not multipartite");
    return *multipartite_;
}

std::size_t Scenario::site_count() const { return multipartite_spec().sites.size(); }

MeasurementId Scenario::measurement(std::size_t site, std::size_t setting) const {
    require(is_multipartite() && site + 1 < site_offset_.size() &&
                site_offset_[site] + setting < site_offset_[site + 1],
            ErrorCode::InvalidArgument, "no such (site, setting)");
    return static_cast<MeasurementId>(site_offset_[site] + setting);
}

std::optional<std::size_t> Scenario::find_site(const std::string& label) const {
    auto it = site_by_label_.find(label);
    if (it == site_by_label_.end()) return std::nullopt;
    return it->second;
}

bool Scenario::is_context(const Context& c) const {
    for (std::size_t k = 0; k < c.size(); ++k) {
        if (c[k] >= labels_.size()) return false;
        if (k > 0 && c[k - 1] >= c[k]) return false;
    }
    if (c.empty()) return true;
    if (is_multipartite()) {
        for (std::size_t k = 1; k < c.size(); ++k)
            if (site_of_[c[k - 1]] == site_of_[c[k]]) return false;
        return true;
    }
    for (const auto& m : explicit_cover_)
        if (context_subset(c, m)) return true;
    return false;
}

void Scenario::require_context(const Context& c) const {
    require(is_context(c), ErrorCode::ContextNotInCover, "not a context: " + context_to_string(c));
}

Context Scenario::context_from_labels(const std::vector<std::string>& labels) const {
    Context c;
    for (const auto& l : labels) c.push_back(id_of(l));
    std::sort(c.begin(), c.end());
    require_context(c);
    return c;
}

std::string Scenario::context_to_string(const Context& c) const {
    std::ostringstream os;
    os << "{";
    for (std::size_t k = 0; k < c.size(); ++k) {
        if (k) os << ", ";
        os << (c[k] < labels_.size() ? labels_[c[k]] : "#" + std::to_string(c[k]));
    }
    os << "}";
    return os.str();
}

std::size_t Scenario::maximal_context_count() const {
    if (!is_multipartite()) return explicit_cover_.size();
    std::size_t n = 1;
    for (const auto& xs : multipartite_->settings) {
        if (n > std::numeric_limits<std::size_t>::max() / xs.size()) return std::numeric_limits<std::size_t>::max();
        n *= xs.size();
    }
    return n;
}

std::vector<Context> Scenario::maximal_contexts() const {
    if (!is_multipartite()) return explicit_cover_;
    std::size_t n = maximal_context_count();
    require(n <= (std::size_t{1} << 24), ErrorCode::SearchSpaceTooLarge, "too many maximal contexts to materialize");
    std::vector<std::size_t> radices;
    for (const auto& xs : multipartite_->settings) radices.push_back(xs.size());
    std::vector<Context> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        auto digits = radix_digits(k, radices);
        Context c;
        for (std::size_t i = 0; i < digits.size(); ++i) c.push_back(static_cast<MeasurementId>(site_offset_[i] + digits[i]));
        out.push_back(std::move(c));
    }
    return out;
}

Context Scenario::maximal_context_containing(const Context& c) const {
    require_context(c);
    if (!is_multipartite()) {
        for (const auto& m : explicit_cover_)
            if (context_subset(c, m)) return m;
        fail(ErrorCode::ContextNotInCover, context_to_string(c));
    }
    std::vector<std::size_t> chosen(site_count(), 0);
    for (auto x : c) chosen[site_of_[x]] = setting_of_[x];
    Context m;
    for (std::size_t i = 0; i < chosen.size(); ++i) m.push_back(static_cast<MeasurementId>(site_offset_[i] + chosen[i]));
    return m;
}

std::vector<Context> Scenario::all_contexts() const {
    std::set<Context> out;
    if (is_multipartite()) {
        std::vector<std::size_t> radices;
        for (const auto& xs : multipartite_->settings) radices.push_back(xs.size() + 1);
        std::size_t n = radix_product(radices);
        require(n <= (std::size_t{1} << 22), ErrorCode::SearchSpaceTooLarge, "too many contexts to enumerate");
        for (std::size_t k = 1; k < n; ++k) {
            auto digits = radix_digits(k, radices);
            Context c;
            for (std::size_t i = 0; i < digits.size(); ++i)
                if (digits[i] > 0) c.push_back(static_cast<MeasurementId>(site_offset_[i] + digits[i] - 1));
            out.insert(std::move(c));
        }
    } else {
        for (const auto& m : explicit_cover_) {
            require(m.size() < 24, ErrorCode::SearchSpaceTooLarge, "maximal context too large");
            for (std::size_t mask = 1; mask < (std::size_t{1} << m.size()); ++mask) {
                Context c;
                for (std::size_t k = 0; k < m.size(); ++k)
                    if (mask >> k & 1) c.push_back(m[k]);
                out.insert(std::move(c));
            }
        }
    }
    return {out.begin(), out.end()};
}

std::size_t Scenario::section_count(const Context& c) const { return radix_product(radices(c)); }

std::vector<std::size_t> Scenario::radices(const Context& c) const {
    std::vector<std::size_t> r;
    r.reserve(c.size());
    for (auto x : c) r.push_back(outcome_labels_.at(x).size());
    return r;
}

LocalSection Scenario::section(const Context& c, std::size_t index) const {
    auto digits = radix_digits(index, radices(c));
    LocalSection s{c, {}};
    s.values.assign(digits.begin(), digits.end());
    return s;
}

std::size_t Scenario::section_index(const LocalSection& s) const {
    std::vector<std::size_t> digits(s.values.begin(), s.values.end());
    auto r = radices(s.domain);
    for (std::size_t k = 0; k < r.size(); ++k)
        require(digits[k] < r[k], ErrorCode::InvalidArgument, "outcome out of range");
    return radix_index(digits, r);
}

std::vector<LocalSection> Scenario::sections_of(const Context& c) const {
    require_context(c);
    std::size_t n = section_count(c);
    std::vector<LocalSection> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) out.push_back(section(c, k));
    return out;
}

std::optional<std::size_t> Scenario::global_assignment_count() const {
    std::size_t n = 1;
    for (const auto& o : outcome_labels_) {
        if (n > std::numeric_limits<std::size_t>::max() / o.size()) return std::nullopt;
        n *= o.size();
    }
    return n;
}

bool Scenario::same_as(const Scenario& other) const {
    if (this == &other) return true;
    if (labels_ != other.labels_ || outcome_labels_ != other.outcome_labels_) return false;
    if (is_multipartite() != other.is_multipartite()) return false;
    if (!is_multipartite()) return explicit_cover_ == other.explicit_cover_;
    return true;
}

LocalSection restrict_section(const LocalSection& s, const Context& c) {
    LocalSection out{c, {}};
    out.values.reserve(c.size());
    for (auto x : c) {
        auto v = s.value_of(x);
        require(v.has_value(), ErrorCode::NotSubcontext, "restriction target is not a subcontext");
        out.values.push_back(*v);
    }
    return out;
}

Context context_union(const Context& a, const Context& b) {
    Context out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

Context context_intersection(const Context& a, const Context& b) {
    Context out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

bool context_subset(const Context& a, const Context& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

bool contexts_disjoint(const Context& a, const Context& b) {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) return false;
        if (a[i] < b[j]) ++i;
        else ++j;
    }
    return true;
}

LocalSection section_union(const LocalSection& a, const LocalSection& b) {
    LocalSection out;
    std::size_t i = 0, j = 0;
    while (i < a.domain.size() || j < b.domain.size()) {
        if (j == b.domain.size() || (i < a.domain.size() && a.domain[i] < b.domain[j])) {
            out.domain.push_back(a.domain[i]);
            out.values.push_back(a.values[i++]);
        } else if (i == a.domain.size() || b.domain[j] < a.domain[i]) {
            out.domain.push_back(b.domain[j]);
            out.values.push_back(b.values[j++]);
        } else {
            require(a.values[i] == b.values[j], ErrorCode::InvalidArgument, "sections disagree on their overlap");
            out.domain.push_back(a.domain[i]);
            out.values.push_back(a.values[i]);
            ++i;
            ++j;
        }
    }
    return out;
}

namespace {

std::size_t finalize_node(ProtocolNode& node, int depth, int rounds, const Scenario& scenario) {
    for (std::size_t k = 0; k < node.context.size(); ++k) {
        require(node.context[k] < scenario.size(), ErrorCode::InvalidArgument, "protocol uses an unknown measurement");
        require(k == 0 || node.context[k - 1] < node.context[k], ErrorCode::InvalidArgument,
                "protocol context is not sorted");
    }
    std::size_t sections = scenario.section_count(node.context);
    if (depth == rounds) {
        require(node.next.empty(), ErrorCode::InvalidArgument, "protocol tree deeper than its round count");
        node.run_count = sections;
        return sections;
    }
    require(node.next.size() == sections, ErrorCode::InvalidArgument,
            "protocol node needs one child per section of its context");
    std::size_t total = 0;
    for (auto& child : node.next) total += finalize_node(child, depth + 1, rounds, scenario);
    node.run_count = total;
    return total;
}

void write_key(const ProtocolNode& node, std::vector<std::uint32_t>& key) {
    key.push_back(static_cast<std::uint32_t>(node.context.size()));
    key.insert(key.end(), node.context.begin(), node.context.end());
    key.push_back(static_cast<std::uint32_t>(node.next.size()));
    for (const auto& c : node.next) write_key(c, key);
}

void collect_runs(const ProtocolNode& node, const Scenario& scenario, Run& prefix, std::vector<Run>& out) {
    std::size_t sections = scenario.section_count(node.context);
    for (std::size_t k = 0; k < sections; ++k) {
        prefix.push_back(scenario.section(node.context, k));
        if (node.next.empty()) out.push_back(prefix);
        else collect_runs(node.next[k], scenario, prefix, out);
        prefix.pop_back();
    }
}

ProtocolNode build_node(int depth, int rounds, const Scenario& scenario,
                        const std::function<Context(const Run&)>& rule, Run& prefix) {
    ProtocolNode node;
    node.context = rule(prefix);
    if (depth < rounds) {
        std::size_t sections = scenario.section_count(node.context);
        node.next.reserve(sections);
        for (std::size_t k = 0; k < sections; ++k) {
            prefix.push_back(scenario.section(node.context, k));
            node.next.push_back(build_node(depth + 1, rounds, scenario, rule, prefix));
            prefix.pop_back();
        }
    }
    return node;
}

}  // namespace

MeasurementProtocol::MeasurementProtocol(int rounds, ProtocolNode root, const Scenario& scenario)
    : rounds_(rounds), root_(std::move(root)) {
    require(rounds >= 1, ErrorCode::InvalidArgument, "protocol needs at least one round");
    finalize_node(root_, 1, rounds_, scenario);
    key_.push_back(static_cast<std::uint32_t>(rounds_));
    write_key(root_, key_);
}

MeasurementProtocol MeasurementProtocol::single(Context c, const Scenario& scenario) {
    return MeasurementProtocol(1, ProtocolNode{std::move(c), {}, 0}, scenario);
}

MeasurementProtocol MeasurementProtocol::empty(int rounds, const Scenario& scenario) {
    return build(rounds, scenario, [](const Run&) { return Context{}; });
}

MeasurementProtocol MeasurementProtocol::build(int rounds, const Scenario& scenario,
                                               const std::function<Context(const Run&)>& rule) {
    Run prefix;
    return MeasurementProtocol(rounds, build_node(1, rounds, scenario, rule, prefix), scenario);
}

std::vector<Run> MeasurementProtocol::runs(const Scenario& scenario) const {
    std::vector<Run> out;
    out.reserve(run_count());
    Run prefix;
    collect_runs(root_, scenario, prefix, out);
    return out;
}

std::size_t MeasurementProtocol::run_index(const Run& run, const Scenario& scenario) const {
    require(run.size() == static_cast<std::size_t>(rounds_), ErrorCode::ProtocolMismatch, "run has the wrong length");
    const ProtocolNode* node = &root_;
    std::size_t index = 0;
    for (int k = 0; k < rounds_; ++k) {
        require(run[k].domain == node->context, ErrorCode::ProtocolMismatch, "run does not follow the protocol");
        std::size_t s = scenario.section_index(run[k]);
        if (node->next.empty()) return index + s;
        for (std::size_t j = 0; j < s; ++j) index += node->next[j].run_count;
        node = &node->next[s];
    }
    return index;
}

Context MeasurementProtocol::context_at(int round, const Run& prefix, const Scenario& scenario) const {
    const ProtocolNode* node = &root_;
    for (int k = 1; k < round; ++k) node = &node->next.at(scenario.section_index(prefix.at(k - 1)));
    return node->context;
}

Context MeasurementProtocol::support() const {
    Context out;
    std::function<void(const ProtocolNode&)> walk = [&](const ProtocolNode& n) {
        out = context_union(out, n.context);
        for (const auto& c : n.next) walk(c);
    };
    walk(root_);
    return out;
}

ProtocolReport validate_protocol(const MeasurementProtocol& p, const Scenario& scenario) {
    ProtocolReport report;
    Run prefix;
    std::function<bool(const ProtocolNode&, const Context&)> walk = [&](const ProtocolNode& node, const Context& used) {
        if (!contexts_disjoint(node.context, used)) {
            report.ok = false;
            report.message = "round " + std::to_string(prefix.size() + 1) + " repeats a measurement of " +
                             scenario.context_to_string(node.context);
            report.offending_prefix = prefix;
            return false;
        }
        Context all = context_union(used, node.context);
        if (!scenario.is_context(all)) {
            report.ok = false;
            report.message = "run leaves the cover: " + scenario.context_to_string(all);
            report.offending_prefix = prefix;
            return false;
        }
        if (node.next.empty()) return true;
        for (std::size_t k = 0; k < node.next.size(); ++k) {
            prefix.push_back(scenario.section(node.context, k));
            bool ok = walk(node.next[k], all);
            prefix.pop_back();
            if (!ok) return false;
        }
        return true;
    };
    walk(p.root(), Context{});
    return report;
}

namespace {

ProtocolNode product_node(const std::vector<const ProtocolNode*>& nodes, int depth, int rounds,
                          const Scenario& scenario) {
    ProtocolNode out;
    for (const auto* n : nodes) {
        if (!n) continue;
        require(contexts_disjoint(out.context, n->context), ErrorCode::IncompatibleProtocols,
                "components measure the same measurement in round " + std::to_string(depth));
        out.context = context_union(out.context, n->context);
    }
    if (depth == rounds) return out;
    std::size_t sections = scenario.section_count(out.context);
    out.next.reserve(sections);
    for (std::size_t k = 0; k < sections; ++k) {
        LocalSection s = scenario.section(out.context, k);
        std::vector<const ProtocolNode*> children;
        for (const auto* n : nodes) {
            if (!n || n->next.empty()) {
                children.push_back(nullptr);
                continue;
            }
            auto part = restrict_section(s, n->context);
            children.push_back(&n->next[scenario.section_index(part)]);
        }
        out.next.push_back(product_node(children, depth + 1, rounds, scenario));
    }
    return out;
}

}  // namespace

MeasurementProtocol parallel_product(const std::vector<MeasurementProtocol>& ps, const Scenario& scenario) {
    int rounds = 1;
    for (const auto& p : ps) rounds = std::max(rounds, p.rounds());
    std::vector<const ProtocolNode*> roots;
    for (const auto& p : ps) roots.push_back(&p.root());
    MeasurementProtocol product(rounds, product_node(roots, 1, rounds, scenario), scenario);
    auto report = validate_protocol(product, scenario);
    require(report.ok, ErrorCode::IncompatibleProtocols, report.message);
    return product;
}

Run restrict_run(const Run& run, const MeasurementProtocol& component, const Scenario& scenario) {
    Run out;
    const ProtocolNode* node = &component.root();
    for (std::size_t k = 0; k < run.size(); ++k) {
        if (!node) {
            out.push_back(LocalSection{});
            continue;
        }
        out.push_back(restrict_section(run[k], node->context));
        node = node->next.empty() ? nullptr : &node->next[scenario.section_index(out.back())];
    }
    out.resize(static_cast<std::size_t>(component.rounds()));
    return out;
}

Context run_context(const Run& run) {
    Context c;
    for (const auto& s : run) c = context_union(c, s.domain);
    return c;
}

LocalSection run_section(const Run& run) {
    LocalSection out;
    for (const auto& s : run) out = section_union(out, s);
    return out;
}

}  // namespace contextua
