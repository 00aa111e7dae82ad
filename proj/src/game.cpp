#include "contextua/game.hpp"

#include <algorithm>
#include <cmath>

namespace contextua {

Game::Game(std::string name, ScenarioPtr scenario, int rounds, std::vector<GameTerm> terms,
           std::optional<Rational> classical_bound)
    : name_(std::move(name)), scenario_(std::move(scenario)), rounds_(rounds), terms_(std::move(terms)),
      classical_bound_(std::move(classical_bound)) {
    Prob total = Prob::zero();
    for (auto& t : terms_) {
        require(t.protocol.rounds() == rounds_, ErrorCode::ProtocolMismatch, "game term has the wrong round count");
        auto report = validate_protocol(t.protocol, *scenario_);
        require(report.ok, ErrorCode::ProtocolMismatch, "game protocol invalid: " + report.message);
        std::sort(t.accepting.begin(), t.accepting.end());
        t.accepting.erase(std::unique(t.accepting.begin(), t.accepting.end()), t.accepting.end());
        require(t.accepting.empty() || t.accepting.back() < t.protocol.run_count(), ErrorCode::InvalidArgument,
                "accepting set names a run the protocol cannot produce");
        total += t.weight;
    }
    if (total.exact())
        require(total.rational() == 1, ErrorCode::InvalidArgument, "game weights sum to " + total.to_string());
    else
        require(std::fabs(total.to_double() - 1) <= 1e-12, ErrorCode::InvalidArgument, "game weights do not sum to 1");
    if (classical_bound_)
        require(*classical_bound_ >= 0 && *classical_bound_ <= 1, ErrorCode::InvalidArgument,
                "classical bound outside [0,1]");
}

Game Game::from_predicate(std::string name, ScenarioPtr scenario,
                          const std::vector<std::pair<Prob, MeasurementProtocol>>& queries,
                          const std::function<bool(std::size_t, const Run&)>& accept,
                          std::optional<Rational> classical_bound) {
    require(!queries.empty(), ErrorCode::InvalidArgument, "game without queries");
    int rounds = queries.front().second.rounds();
    std::vector<GameTerm> terms;
    for (std::size_t k = 0; k < queries.size(); ++k) {
        GameTerm t{queries[k].first, queries[k].second, {}};
        auto runs = t.protocol.runs(*scenario);
        for (std::size_t r = 0; r < runs.size(); ++r)
            if (accept(k, runs[r])) t.accepting.push_back(r);
        terms.push_back(std::move(t));
    }
    return Game(std::move(name), std::move(scenario), rounds, std::move(terms), std::move(classical_bound));
}

Game Game::with_classical_bound(Rational gamma) const {
    return Game(name_, scenario_, rounds_, terms_, std::move(gamma));
}

Rational classical_bound_by_enumeration(const Game& game, std::size_t cap) {
    const auto& sc = *game.scenario();
    Context used;
    for (const auto& t : game.terms()) used = context_union(used, t.protocol.support());
    auto radices = sc.radices(used);
    std::size_t n = radix_product(radices);
    require(n <= cap, ErrorCode::SearchSpaceTooLarge, "too many deterministic strategies to enumerate");
    // Scores are accumulated as integers over the common denominator.
    Integer denom = 1;
    for (const auto& t : game.terms()) {
        Rational w = t.weight.to_rational();
        mpz_lcm(denom.get_mpz_t(), denom.get_mpz_t(), w.get_den().get_mpz_t());
    }
    std::vector<Integer> weights;
    for (const auto& t : game.terms()) {
        Rational w = t.weight.to_rational() * denom;
        weights.push_back(w.get_num());
    }
    Integer best = 0;
    std::vector<std::size_t> digits(used.size(), 0);
    std::vector<Outcome> value_of(sc.size(), 0);
    for (std::size_t g = 0; g < n; ++g) {
        for (std::size_t k = 0; k < used.size(); ++k) value_of[used[k]] = static_cast<Outcome>(digits[k]);
        Integer score = 0;
        for (std::size_t ti = 0; ti < game.terms().size(); ++ti) {
            const auto& t = game.terms()[ti];
            // The unique run a deterministic assignment produces.
            const ProtocolNode* node = &t.protocol.root();
            std::size_t index = 0;
            for (;;) {
                LocalSection s{node->context, {}};
                for (auto x : node->context) s.values.push_back(value_of[x]);
                std::size_t si = sc.section_index(s);
                if (node->next.empty()) {
                    index += si;
                    break;
                }
                for (std::size_t j = 0; j < si; ++j) index += node->next[j].run_count;
                node = &node->next[si];
            }
            if (std::binary_search(t.accepting.begin(), t.accepting.end(), index)) score += weights[ti];
        }
        if (score > best) best = score;
        for (std::size_t k = used.size(); k-- > 0;) {
            if (++digits[k] < radices[k]) break;
            digits[k] = 0;
        }
    }
    Rational out(best, denom);
    out.canonicalize();
    return out;
}

}  // namespace contextua
