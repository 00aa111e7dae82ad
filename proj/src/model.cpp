#include "contextua/model.hpp"

#include <cmath>

namespace contextua {

namespace {

void check_distribution(const std::vector<Prob>& t, const std::string& where) {
    Prob total = Prob::zero();
    for (const auto& p : t) {
        if (p.exact()) require(sgn(p.rational()) >= 0, ErrorCode::InvalidArgument, "negative probability in " + where);
        else require(p.to_double() >= -1e-12, ErrorCode::InvalidArgument, "negative probability in " + where);
        total += p;
    }
    if (total.exact())
        require(total.rational() == 1, ErrorCode::InvalidArgument, where + " sums to " + total.to_string());
    else
        require(std::fabs(total.to_double() - 1.0) <= 1e-9, ErrorCode::InvalidArgument,
                where + " sums to " + total.to_string());
}

}  // namespace

std::vector<Prob> marginalize(const Scenario& scenario, const Context& from, const std::vector<Prob>& table,
                              const Context& to) {
    require(context_subset(to, from), ErrorCode::NotSubcontext, "marginal onto a non-subcontext");
    std::vector<std::size_t> pos;
    for (auto x : to) pos.push_back(static_cast<std::size_t>(std::lower_bound(from.begin(), from.end(), x) - from.begin()));
    auto from_r = scenario.radices(from);
    auto to_r = scenario.radices(to);
    std::vector<Prob> out(radix_product(to_r), Prob::zero());
    std::vector<std::size_t> digits(from.size(), 0), sub(to.size(), 0);
    for (std::size_t k = 0; k < table.size(); ++k) {
        if (!table[k].is_zero()) {
            for (std::size_t j = 0; j < pos.size(); ++j) sub[j] = digits[pos[j]];
            out[radix_index(sub, to_r)] += table[k];
        }
        for (std::size_t j = from.size(); j-- > 0;) {
            if (++digits[j] < from_r[j]) break;
            digits[j] = 0;
        }
    }
    return out;
}

EmpiricalModel::EmpiricalModel(ScenarioPtr scenario, std::vector<std::vector<Prob>> tables)
    : scenario_(std::move(scenario)), contexts_(scenario_->maximal_contexts()), tables_(std::move(tables)) {
    require(tables_.size() == contexts_.size(), ErrorCode::InvalidArgument,
            "empirical model needs one table per maximal context");
    for (std::size_t k = 0; k < contexts_.size(); ++k) {
        index_.emplace(contexts_[k], k);
        require(tables_[k].size() == scenario_->section_count(contexts_[k]), ErrorCode::InvalidArgument,
                "table size mismatch at " + scenario_->context_to_string(contexts_[k]));
        check_distribution(tables_[k], "table " + scenario_->context_to_string(contexts_[k]));
    }
}

EmpiricalModel EmpiricalModel::from_function(ScenarioPtr scenario,
                                             const std::function<Prob(const LocalSection&)>& p) {
    std::vector<std::vector<Prob>> tables;
    for (const auto& c : scenario->maximal_contexts()) {
        std::vector<Prob> t;
        for (const auto& s : scenario->sections_of(c)) t.push_back(p(s));
        tables.push_back(std::move(t));
    }
    return EmpiricalModel(std::move(scenario), std::move(tables));
}

std::size_t EmpiricalModel::context_index(const Context& maximal) const {
    auto it = index_.find(maximal);
    require(it != index_.end(), ErrorCode::ContextNotInCover, "not a maximal context: " + scenario_->context_to_string(maximal));
    return it->second;
}

const std::vector<Prob>& EmpiricalModel::table(const Context& maximal) const { return tables_[context_index(maximal)]; }

bool EmpiricalModel::exact() const {
    for (const auto& t : tables_)
        if (!all_exact(t)) return false;
    return true;
}

std::vector<Prob> EmpiricalModel::marginal(const Context& c) const {
    Context m = scenario_->maximal_context_containing(c);
    const auto& t = table(m);
    if (m == c) return t;
    return marginalize(*scenario_, m, t, c);
}

Prob EmpiricalModel::probability(const LocalSection& s) const {
    return marginal(s.domain)[scenario_->section_index(s)];
}

Behaviour EmpiricalModel::as_behaviour(int rounds) const {
    auto self = std::make_shared<EmpiricalModel>(*this);
    return Behaviour(scenario_, rounds, [self](const MeasurementProtocol& p) {
        const auto& sc = *self->scenario();
        std::map<Context, std::vector<Prob>> cache;
        std::vector<Prob> out;
        out.reserve(p.run_count());
        for (const auto& run : p.runs(sc)) {
            LocalSection s = run_section(run);
            auto it = cache.find(s.domain);
            if (it == cache.end()) it = cache.emplace(s.domain, self->marginal(s.domain)).first;
            out.push_back(it->second[sc.section_index(s)]);
        }
        return out;
    });
}

EmpiricalModel EmpiricalModel::to_double() const {
    auto tables = tables_;
    for (auto& t : tables)
        for (auto& p : t) p = Prob(p.to_double());
    return EmpiricalModel(scenario_, std::move(tables));
}

PossibilisticModel::PossibilisticModel(ScenarioPtr scenario, std::vector<std::vector<bool>> supports)
    : scenario_(std::move(scenario)), contexts_(scenario_->maximal_contexts()), supports_(std::move(supports)) {
    require(supports_.size() == contexts_.size(), ErrorCode::InvalidArgument,
            "possibilistic model needs one support per maximal context");
    for (std::size_t k = 0; k < contexts_.size(); ++k) {
        index_.emplace(contexts_[k], k);
        require(supports_[k].size() == scenario_->section_count(contexts_[k]), ErrorCode::InvalidArgument,
                "support size mismatch");
    }
}

PossibilisticModel PossibilisticModel::support_of(const EmpiricalModel& e) {
    std::vector<std::vector<bool>> supports;
    for (const auto& t : e.tables()) {
        std::vector<bool> s;
        for (const auto& p : t) s.push_back(p.exact() ? !p.is_zero() : p.to_double() > 1e-9);
        supports.push_back(std::move(s));
    }
    return PossibilisticModel(e.scenario(), std::move(supports));
}

std::size_t PossibilisticModel::context_index(const Context& maximal) const {
    auto it = index_.find(maximal);
    require(it != index_.end(), ErrorCode::ContextNotInCover, "not a maximal context: " + scenario_->context_to_string(maximal));
    return it->second;
}

std::vector<LocalSection> PossibilisticModel::supported_sections(const Context& maximal) const {
    const auto& sup = support(maximal);
    std::vector<LocalSection> out;
    for (std::size_t k = 0; k < sup.size(); ++k)
        if (sup[k]) out.push_back(scenario_->section(maximal, k));
    return out;
}

bool PossibilisticModel::possible(const LocalSection& s) const {
    Context m = scenario_->maximal_context_containing(s.domain);
    for (const auto& t : supported_sections(m))
        if (restrict_section(t, s.domain) == s) return true;
    return false;
}

bool PossibilisticModel::flasque() const {
    for (std::size_t a = 0; a < contexts_.size(); ++a)
        for (std::size_t b = a + 1; b < contexts_.size(); ++b) {
            Context overlap = context_intersection(contexts_[a], contexts_[b]);
            std::vector<bool> pa(scenario_->section_count(overlap), false), pb = pa;
            for (const auto& s : supported_sections(contexts_[a]))
                pa[scenario_->section_index(restrict_section(s, overlap))] = true;
            for (const auto& s : supported_sections(contexts_[b]))
                pb[scenario_->section_index(restrict_section(s, overlap))] = true;
            if (pa != pb) return false;
        }
    return true;
}

Behaviour::Behaviour(ScenarioPtr scenario, int rounds, Generator generator)
    : scenario_(std::move(scenario)), rounds_(rounds), generator_(std::move(generator)),
      memo_(std::make_shared<Memo>()) {
    require(rounds_ >= 1, ErrorCode::InvalidArgument, "behaviour needs at least one round");
}

std::vector<Prob> Behaviour::table(const MeasurementProtocol& p) const {
    require(p.rounds() == rounds_, ErrorCode::ProtocolMismatch,
            "protocol has " + std::to_string(p.rounds()) + " rounds, behaviour has " + std::to_string(rounds_));
    {
        std::lock_guard<std::mutex> lock(memo_->mutex);
        auto it = memo_->tables.find(p.key());
        if (it != memo_->tables.end()) return it->second;
    }
    auto report = validate_protocol(p, *scenario_);
    require(report.ok, ErrorCode::ProtocolMismatch, report.message);
    auto t = generator_(p);
    require(t.size() == p.run_count(), ErrorCode::Internal, "behaviour generator returned a table of the wrong size");
    check_distribution(t, "behaviour table");
    std::lock_guard<std::mutex> lock(memo_->mutex);
    return memo_->tables.emplace(p.key(), std::move(t)).first->second;
}

std::vector<Prob> Behaviour::table(const Context& c) const {
    return table(MeasurementProtocol::single(c, *scenario_));
}

std::size_t Behaviour::cached_tables() const {
    std::lock_guard<std::mutex> lock(memo_->mutex);
    return memo_->tables.size();
}

}  // namespace contextua
