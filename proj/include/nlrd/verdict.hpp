#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace nlrd {

enum class Verdict { pass, fail, inconclusive };

const char* to_string(Verdict v) noexcept;

// One sampled quantity: what was measured, at which probe (eta, t, s, ...) and the value.
struct EvidenceRow {
    std::string quantity;
    double at = 0.0;
    double value = 0.0;

    bool operator==(const EvidenceRow&) const = default;
};

struct ConditionVerdict {
    std::string assumption;
    Verdict verdict = Verdict::inconclusive;
    std::vector<EvidenceRow> evidence;
    std::vector<std::pair<std::string, double>> thresholds;
    std::string note;

    bool passed() const noexcept { return verdict == Verdict::pass; }
    void add(std::string quantity, double at, double value) {
        evidence.push_back({std::move(quantity), at, value});
    }
    bool operator==(const ConditionVerdict&) const = default;
};

// Limit test used throughout: the sampled sequence should settle below tol.
//   pass          last value < tol and the second half of the sequence is nonincreasing
//   fail          last value >= tol
//   inconclusive  last value < tol but the tail trend is not monotone
// Nonincreasing allows a relative rounding slack of `slack`.
Verdict decreasing_below(std::span<const double> values, double tol, double slack = 1e-12);

// Strict tail monotonicity check shared by the verdicts above.
bool tail_nonincreasing(std::span<const double> values, double slack = 1e-12);

// Combines verdicts: any fail -> fail, else any inconclusive -> inconclusive, else pass.
Verdict combine(std::span<const Verdict> verdicts) noexcept;

void write_report(std::ostream& os, const ConditionVerdict& v);
void write_evidence_csv(std::ostream& os, std::span<const ConditionVerdict> verdicts);

}  // namespace nlrd
