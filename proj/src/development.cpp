#include "cortex/development.hpp"

#include <stdexcept>

#include <fmt/format.h>

namespace cortex {

std::uint64_t UsageLedger::total() const {
    std::uint64_t sum = 0;
    for (const auto& e : entries) sum += e.tau;
    return sum;
}

UsageLedger ledger_of(const FeatureRepository& repo) {
    UsageLedger ledger;
    ledger.entries.reserve(repo.size());
    for (const auto& p : repo.prototypes()) {
        ledger.entries.push_back({p.id, p.counter, p.birth_stimulus, p.survivals});
    }
    return ledger;
}

std::vector<double> relative_frequency(const UsageLedger& ledger) {
    const auto total = ledger.total();
    if (ledger.entries.empty() || total == 0) throw std::invalid_argument("usage counters are all zero");
    std::vector<double> fr;
    fr.reserve(ledger.entries.size());
    for (const auto& e : ledger.entries) fr.push_back(static_cast<double>(e.tau) / static_cast<double>(total));
    return fr;
}

DisposalResult dispose(FeatureRepository& repo, const UsageLedger& ledger, bool reset_counters) {
    if (repo.empty()) throw std::invalid_argument("cannot dispose from an empty dictionary");
    if (ledger.entries.size() != repo.size()) throw std::invalid_argument("ledger does not match the dictionary");
    for (std::size_t i = 0; i < ledger.entries.size(); ++i) {
        if (ledger.entries[i].id != repo.prototypes()[i].id) throw std::invalid_argument("ledger ids out of order");
    }
    const auto fr = relative_frequency(ledger);
    const double chance = 1.0 / static_cast<double>(fr.size());

    DisposalResult out;
    out.previous = repo.prototypes();
    out.remap.assign(repo.size() + 1, 0);
    std::vector<bool> keep(fr.size());
    for (std::size_t i = 0; i < fr.size(); ++i) keep[i] = fr[i] > chance;

    bool any = false;
    for (bool k : keep) any = any || k;
    if (!any) {
        std::size_t top = 0;
        for (std::size_t i = 1; i < fr.size(); ++i) {
            if (ledger.entries[i].tau > ledger.entries[top].tau) top = i;
        }
        keep[top] = true;
        out.guard_applied = true;
    }

    std::vector<Prototype> survivors;
    for (std::size_t i = 0; i < keep.size(); ++i) {
        const auto& p = out.previous[i];
        if (!keep[i]) {
            out.disposed.push_back(p.id);
            continue;
        }
        out.survived.push_back(p.id);
        auto q = p;
        q.id = static_cast<int>(survivors.size() + 1);
        q.counter = reset_counters ? 0 : ledger.entries[i].tau;
        q.survivals = p.survivals + 1;
        out.remap[static_cast<std::size_t>(p.id)] = q.id;
        survivors.push_back(q);
    }
    repo = FeatureRepository::from_prototypes(repo.params(), std::move(survivors));
    return out;
}

void substitute(ObjectRepository& objects, const DisposalResult& disposal, const FeatureRepository& repo) {
    if (repo.empty()) throw std::invalid_argument("no surviving features to substitute with");
    // Replacement for every old id, resolved once.
    std::vector<int> replacement(disposal.remap.size(), 0);
    for (std::size_t old = 1; old < disposal.remap.size(); ++old) {
        if (disposal.remap[old] != 0) {
            replacement[old] = disposal.remap[old];
            continue;
        }
        const auto& gone = disposal.previous[old - 1].vector;
        int best = 0;
        int best_sq = 0;
        for (const auto& p : repo.prototypes()) {
            const int sq = kernels::squared_distance(gone, p.vector);
            if (best == 0 || sq < best_sq) {
                best = p.id;
                best_sq = sq;
            }
        }
        replacement[old] = best;
    }

    for (const auto& obj : objects.objects()) {
        FeatureMap map = obj.map;
        for (int& v : map.data()) {
            if (v == 0) continue;
            if (static_cast<std::size_t>(v) >= replacement.size()) {
                throw std::invalid_argument(fmt::format("object {} references unknown feature {}", obj.id, v));
            }
            v = replacement[static_cast<std::size_t>(v)];
        }
        objects.replace_map(obj.id, std::move(map));
    }
}

// --- survival ---------------------------------------------------------------

void SurvivalReport::check_index(int stimulus) {
    if (!rows_.empty() && stimulus <= rows_.back().stimulus) {
        throw std::invalid_argument(fmt::format("survival row for stimulus {} already recorded", stimulus));
    }
    if (rows_.empty()) first_stimulus_ = stimulus;
}

std::size_t SurvivalReport::cohort_of(const FeatureRepository& repo) const {
    std::size_t n = 0;
    for (const auto& p : repo.prototypes()) n += p.birth_stimulus == first_stimulus_ ? 1 : 0;
    return n;
}

void SurvivalReport::record(int stimulus, const DisposalResult& disposal, const FeatureRepository& after) {
    check_index(stimulus);
    SurvivalRow row;
    row.stimulus = stimulus;
    row.before = disposal.previous.size();
    row.survived = disposal.survived.size();
    if (rows_.empty()) {
        for (const auto& p : disposal.previous) row.cohort_before += p.birth_stimulus == first_stimulus_ ? 1 : 0;
    } else {
        row.cohort_before = rows_.back().cohort;
    }
    row.cohort = cohort_of(after);
    row.rate = row.before ? static_cast<double>(row.survived) / static_cast<double>(row.before) : 1.0;
    rows_.push_back(row);
}

void SurvivalReport::record_idle(int stimulus, const FeatureRepository& repo) {
    check_index(stimulus);
    SurvivalRow row;
    row.stimulus = stimulus;
    row.before = repo.size();
    row.survived = repo.size();
    row.cohort = cohort_of(repo);
    row.cohort_before = rows_.empty() ? row.cohort : rows_.back().cohort;
    row.rate = 1.0;
    rows_.push_back(row);
}

std::string SurvivalReport::to_csv() const {
    std::string out = "stimulus,before,survived,cohort_before,cohort,rate\n";
    for (const auto& r : rows_) {
        out += fmt::format("{},{},{},{},{},{}\n", r.stimulus, r.before, r.survived, r.cohort_before, r.cohort, r.rate);
    }
    return out;
}

}  // namespace cortex
