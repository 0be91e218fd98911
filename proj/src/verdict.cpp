#include "nlrd/verdict.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "nlrd/csv.hpp"

namespace nlrd {

const char* to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

bool tail_nonincreasing(std::span<const double> values, double slack) {
    if (values.size() < 2) return true;
    const std::size_t start = (values.size() - 1) / 2;
    for (std::size_t i = start + 1; i < values.size(); ++i) {
        const double allowed = values[i - 1] + slack * std::max(std::abs(values[i - 1]), 1e-300);
        if (!(values[i] <= allowed)) return false;
    }
    return true;
}

Verdict decreasing_below(std::span<const double> values, double tol, double slack) {
    if (values.empty()) return Verdict::inconclusive;
    const double last = values.back();
    if (!std::isfinite(last) || !(last < tol)) return Verdict::fail;
    return tail_nonincreasing(values, slack) ? Verdict::pass : Verdict::inconclusive;
}

Verdict combine(std::span<const Verdict> verdicts) noexcept {
    bool inconclusive = false;
    for (Verdict v : verdicts) {
        if (v == Verdict::fail) return Verdict::fail;
        if (v == Verdict::inconclusive) inconclusive = true;
    }
    return inconclusive ? Verdict::inconclusive : Verdict::pass;
}

void write_report(std::ostream& os, const ConditionVerdict& v) {
    os << "[" << v.assumption << "] " << to_string(v.verdict) << '\n';
    if (!v.note.empty()) os << "  note: " << v.note << '\n';
    for (const auto& [name, value] : v.thresholds) os << "  threshold " << name << " = " << format_real(value) << '\n';
    for (const auto& row : v.evidence)
        os << "  " << row.quantity << " @ " << format_real(row.at) << " = " << format_real(row.value) << '\n';
}

void write_evidence_csv(std::ostream& os, std::span<const ConditionVerdict> verdicts) {
    os << "assumption,verdict,quantity,at,value\n";
    for (const auto& v : verdicts)
        for (const auto& row : v.evidence)
            os << v.assumption << ',' << to_string(v.verdict) << ',' << row.quantity << ',' << format_real(row.at)
               << ',' << format_real(row.value) << '\n';
}

}  // namespace nlrd
