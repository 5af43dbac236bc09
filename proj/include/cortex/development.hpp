#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cortex/it_objects.hpp"
#include "cortex/v4_features.hpp"

namespace cortex {

struct LedgerEntry {
    int id = 0;
    std::uint64_t tau = 0;
    int birth_stimulus = 0;
    int survivals = 0;
};

/// Usage counters of the live features, in id order.
struct UsageLedger {
    std::vector<LedgerEntry> entries;

    std::uint64_t total() const;
};

UsageLedger ledger_of(const FeatureRepository& repo);

/// fr_i = tau_i / sum(tau). Throws std::invalid_argument if every counter is 0.
std::vector<double> relative_frequency(const UsageLedger& ledger);

struct DisposalResult {
    /// Old ids, ascending.
    std::vector<int> survived;
    std::vector<int> disposed;
    /// remap[old_id] = new id, 0 if disposed. remap[0] is unused.
    std::vector<int> remap;
    /// Every feature sat at the chance level; the top feature was kept.
    bool guard_applied = false;
    /// Dictionary before disposal (old ids).
    std::vector<Prototype> previous;
};

/// Removes every feature with fr_i <= 1/F (F = live count) and renumbers the
/// survivors densely in their previous order. If that would empty the
/// dictionary, the feature with the highest tau (lowest id on ties) is kept.
/// Survivors' survival counts are incremented; counters are zeroed when
/// `reset_counters` is set.
DisposalResult dispose(FeatureRepository& repo, const UsageLedger& ledger, bool reset_counters = false);

/// Rewrites stored object maps after a disposal: survivors go through the
/// remap table, disposed ids become the surviving feature whose vector is
/// nearest to the disposed vector (lowest id on ties).
void substitute(ObjectRepository& objects, const DisposalResult& disposal, const FeatureRepository& repo);

struct SurvivalRow {
    int stimulus = 0;
    std::size_t before = 0;
    std::size_t survived = 0;
    /// First-stimulus features alive before and after this disposal.
    std::size_t cohort_before = 0;
    std::size_t cohort = 0;
    double rate = 0.0;
};

class SurvivalReport {
public:
    /// Appends a row for a disposal performed while processing `stimulus`.
    /// Throws std::invalid_argument unless stimulus indices strictly increase.
    void record(int stimulus, const DisposalResult& disposal, const FeatureRepository& after);
    /// Row for a stimulus where no disposal could run (empty dictionary or no usage).
    void record_idle(int stimulus, const FeatureRepository& repo);

    const std::vector<SurvivalRow>& rows() const { return rows_; }
    std::string to_csv() const;

private:
    std::size_t cohort_of(const FeatureRepository& repo) const;
    void check_index(int stimulus);

    std::vector<SurvivalRow> rows_;
    int first_stimulus_ = 0;
};

inline void record_survival(SurvivalReport& report, int stimulus, const DisposalResult& disposal,
                            const FeatureRepository& after) {
    report.record(stimulus, disposal, after);
}

}  // namespace cortex
