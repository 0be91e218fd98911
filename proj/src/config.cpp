#include "nlrd/config.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>

#include "nlrd/csv.hpp"
#include "nlrd/scenarios.hpp"

namespace nlrd {

namespace {

constexpr std::pair<ExperimentKind, const char*> kind_names[] = {
    {ExperimentKind::energy_audit, "energy-audit"},     {ExperimentKind::gronwall, "gronwall"},
    {ExperimentKind::absorbing, "absorbing"},           {ExperimentKind::conditions, "conditions"},
    {ExperimentKind::attractor, "attractor"},           {ExperimentKind::robustness, "robustness"},
    {ExperimentKind::finite_time, "finite-time"},       {ExperimentKind::noncommutation, "noncommutation"},
    {ExperimentKind::refinement, "refinement"},
};

const std::map<std::string, std::vector<std::string>>& known_keys() {
    static const std::map<std::string, std::vector<std::string>> keys{
        {"grid", {"length", "nodes", "eigenvalue"}},
        {"time", {"dt", "blowup_ceiling", "max_retries", "horizon"}},
        {"family", {"scenario", "eta_schedule", "mu", "mu_fraction", "forcing_amplitude", "perturbation_scale"}},
        {"experiment",
         {"kind", "target_time", "tolerance", "condition_tolerance", "cloud_size", "n_modes", "seed", "pullback_count",
          "threshold_ratio", "output_dir"}},
    };
    return keys;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

struct Entry {
    std::string value;
    int line;
};

std::string join(const std::vector<ConfigIssue>& issues, const std::string& kind) {
    std::ostringstream os;
    os << kind << ':';
    for (const auto& i : issues) {
        os << "\n  ";
        if (i.line > 0) os << "line " << i.line << ": ";
        if (!i.key.empty()) os << i.key << ": ";
        os << i.reason;
    }
    return os.str();
}

class Reader {
public:
    explicit Reader(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

    template <class Fn>
    void with(const std::string& key, Fn fn) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return;
        if (!fn(it->second.value)) issues_.push_back({it->second.line, key, "cannot parse '" + it->second.value + "'"});
    }

    void real(const std::string& key, double& out) {
        with(key, [&](const std::string& v) { return parse_real(v, out); });
    }
    void real(const std::string& key, std::optional<double>& out) {
        with(key, [&](const std::string& v) {
            double x = 0.0;
            if (!parse_real(v, x)) return false;
            out = x;
            return true;
        });
    }
    template <class Int>
    void integer(const std::string& key, Int& out) {
        with(key, [&](const std::string& v) {
            Int x{};
            const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
            if (ec != std::errc{} || p != v.data() + v.size()) return false;
            out = x;
            return true;
        });
    }

    static bool parse_real(const std::string& v, double& out) {
        if (v.empty()) return false;
        char* end = nullptr;
        errno = 0;
        const double x = std::strtod(v.c_str(), &end);
        if (end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(x)) return false;
        out = x;
        return true;
    }

    std::vector<ConfigIssue> issues_;

private:
    std::map<std::string, Entry> entries_;
};

}  // namespace

const char* to_string(ExperimentKind kind) noexcept {
    for (const auto& [k, name] : kind_names)
        if (k == kind) return name;
    return "unknown";
}

std::optional<ExperimentKind> parse_experiment_kind(std::string_view text) {
    for (const auto& [k, name] : kind_names)
        if (text == name) return k;
    return std::nullopt;
}

ConfigError::ConfigError(const std::string& kind, std::vector<ConfigIssue> issues)
    : std::runtime_error(join(issues, kind)), issues_(std::move(issues)) {}

RunConfig parse_config(std::string_view text) {
    std::vector<ConfigIssue> issues;
    std::map<std::string, Entry> entries;  // "section.key"
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                issues.push_back({line_no, "", "unterminated section header"});
                continue;
            }
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (!known_keys().contains(section)) issues.push_back({line_no, section, "unknown section"});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            issues.push_back({line_no, "", "expected 'key = value'"});
            continue;
        }
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (section.empty()) {
            issues.push_back({line_no, key, "key outside of any section"});
            continue;
        }
        const auto sec = known_keys().find(section);
        if (sec == known_keys().end()) continue;
        if (std::find(sec->second.begin(), sec->second.end(), key) == sec->second.end()) {
            issues.push_back({line_no, section + "." + key, "unknown key"});
            continue;
        }
        const std::string full = section + "." + key;
        if (entries.contains(full)) {
            issues.push_back({line_no, full, "duplicate key (first on line " + std::to_string(entries[full].line) + ")"});
            continue;
        }
        entries[full] = {value, line_no};
    }
    if (!issues.empty()) throw ParseError(std::move(issues));

    const auto scenario = entries.find("family.scenario");
    if (scenario == entries.end()) throw ValidationError({{0, "family.scenario", "missing scenario name"}});
    RunConfig c;
    try {
        c = default_config(scenario->second.value);
    } catch (const std::out_of_range& e) {
        throw ValidationError({{scenario->second.line, "family.scenario", e.what()}});
    }

    Reader r(entries);
    r.real("grid.length", c.grid.length);
    r.integer("grid.nodes", c.grid.nodes);
    r.with("grid.eigenvalue", [&](const std::string& v) {
        if (v == "discrete") c.grid.eigenvalue = EigenvalueMode::discrete;
        else if (v == "continuous") c.grid.eigenvalue = EigenvalueMode::continuous;
        else return false;
        return true;
    });
    r.real("time.dt", c.time.dt);
    r.real("time.blowup_ceiling", c.time.blowup_ceiling);
    r.integer("time.max_retries", c.time.max_retries);
    r.real("time.horizon", c.time.horizon);
    r.with("family.eta_schedule", [&](const std::string& v) {
        std::vector<double> etas;
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            double x = 0.0;
            if (!Reader::parse_real(trim(item), x)) return false;
            etas.push_back(x);
        }
        if (etas.empty()) return false;
        c.family.eta_schedule = std::move(etas);
        return true;
    });
    if (entries.contains("family.mu") && entries.contains("family.mu_fraction"))
        r.issues_.push_back({entries["family.mu"].line, "family.mu", "give either mu or mu_fraction, not both"});
    if (entries.contains("family.mu_fraction")) c.family.mu.reset();
    r.real("family.mu", c.family.mu);
    r.real("family.mu_fraction", c.family.mu_fraction);
    r.real("family.forcing_amplitude", c.family.forcing_amplitude);
    r.real("family.perturbation_scale", c.family.perturbation_scale);
    r.with("experiment.kind", [&](const std::string& v) {
        const auto k = parse_experiment_kind(v);
        if (!k) return false;
        c.experiment.kind = *k;
        return true;
    });
    r.real("experiment.target_time", c.experiment.target_time);
    r.real("experiment.tolerance", c.experiment.tolerance);
    r.real("experiment.condition_tolerance", c.experiment.condition_tolerance);
    r.integer("experiment.cloud_size", c.experiment.cloud_size);
    r.integer("experiment.n_modes", c.experiment.n_modes);
    r.integer("experiment.seed", c.experiment.seed);
    r.integer("experiment.pullback_count", c.experiment.pullback_count);
    r.real("experiment.threshold_ratio", c.experiment.threshold_ratio);
    r.with("experiment.output_dir", [&](const std::string& v) {
        if (v.empty()) return false;
        c.experiment.output_dir = v;
        return true;
    });
    if (!r.issues_.empty()) throw ParseError(std::move(r.issues_));
    validate(c);
    return c;
}

void validate(const RunConfig& c) {
    std::vector<ConfigIssue> issues;
    const auto need = [&](bool ok, const char* key, const std::string& reason) {
        if (!ok) issues.push_back({0, key, reason});
    };
    need(c.grid.length > 0.0, "grid.length", "must be positive");
    need(c.grid.nodes >= 3, "grid.nodes", "must be at least 3");
    need(c.time.dt > 0.0, "time.dt", "must be positive");
    need(c.time.blowup_ceiling > 0.0, "time.blowup_ceiling", "must be positive");
    need(c.time.max_retries >= 0, "time.max_retries", "must be >= 0");
    need(c.time.horizon > 0.0, "time.horizon", "must be positive");
    need(c.experiment.tolerance > 0.0, "experiment.tolerance", "must be positive");
    need(c.experiment.condition_tolerance > 0.0, "experiment.condition_tolerance", "must be positive");
    need(c.experiment.cloud_size >= 1, "experiment.cloud_size", "must be >= 1");
    need(c.experiment.n_modes >= 1, "experiment.n_modes", "must be >= 1");
    need(c.experiment.pullback_count >= 2, "experiment.pullback_count", "must be >= 2");
    need(c.experiment.threshold_ratio > 0.0 && c.experiment.threshold_ratio <= 1.0, "experiment.threshold_ratio",
         "must lie in (0, 1]");
    need(!c.experiment.output_dir.empty(), "experiment.output_dir", "must not be empty");

    const auto& etas = c.family.eta_schedule;
    bool schedule_ok = !etas.empty();
    for (std::size_t i = 0; i < etas.size(); ++i) {
        if (!(etas[i] > 0.0 && etas[i] <= 1.0)) schedule_ok = false;
        if (i > 0 && !(etas[i] < etas[i - 1])) schedule_ok = false;
    }
    need(schedule_ok, "family.eta_schedule", "must be nonempty, strictly decreasing, inside (0, 1]");
    if (!c.family.mu) {
        need(c.family.mu_fraction > 0.0 && c.family.mu_fraction < 2.0, "family.mu_fraction",
             "mu_eta = mu_fraction * m * lambda_1 must lie in the open interval (0, 2 m lambda_1)");
    }

    bool scenario_ok = true;
    try {
        (void)find_scenario(c.family.scenario);
    } catch (const std::out_of_range& e) {
        scenario_ok = false;
        issues.push_back({0, "family.scenario", e.what()});
    }
    need(c.experiment.kind != ExperimentKind::refinement || c.family.scenario == "heat_benchmark", "experiment.kind",
         "refinement needs the heat_benchmark scenario (exact solution)");
    if (issues.empty() && scenario_ok) {
        try {
            const PerturbedFamily family = build_family(c);
            const double ceiling = 2.0 * family.viscosity_floor() * first_eigenvalue(c.make_grid(), c.grid.eigenvalue);
            for (double eta : family.schedule()) {
                const double mu = family.mu_at(eta);
                if (!(mu > 0.0 && mu < ceiling)) {
                    issues.push_back({0, c.family.mu ? "family.mu" : "family.mu_fraction",
                                      "mu_eta = " + format_real(mu) + " at eta = " + format_real(eta) +
                                          " is outside the open interval (0, 2 m lambda_1) = (0, " +
                                          format_real(ceiling) + ")"});
                    break;
                }
            }
        } catch (const std::exception& e) {
            issues.push_back({0, "family", std::string("cannot build family: ") + e.what()});
        }
    }
    if (!issues.empty()) throw ValidationError(std::move(issues));
}

std::string emit_config(const RunConfig& c) {
    std::ostringstream os;
    os << "[grid]\n";
    os << "length = " << format_real(c.grid.length) << '\n';
    os << "nodes = " << c.grid.nodes << '\n';
    os << "eigenvalue = " << (c.grid.eigenvalue == EigenvalueMode::discrete ? "discrete" : "continuous") << '\n';
    os << "\n[time]\n";
    os << "dt = " << format_real(c.time.dt) << '\n';
    os << "blowup_ceiling = " << format_real(c.time.blowup_ceiling) << '\n';
    os << "max_retries = " << c.time.max_retries << '\n';
    os << "horizon = " << format_real(c.time.horizon) << '\n';
    os << "\n[family]\n";
    os << "scenario = " << c.family.scenario << '\n';
    os << "eta_schedule = ";
    for (std::size_t i = 0; i < c.family.eta_schedule.size(); ++i)
        os << (i ? ", " : "") << format_real(c.family.eta_schedule[i]);
    os << '\n';
    if (c.family.mu)
        os << "mu = " << format_real(*c.family.mu) << '\n';
    else
        os << "mu_fraction = " << format_real(c.family.mu_fraction) << '\n';
    os << "forcing_amplitude = " << format_real(c.family.forcing_amplitude) << '\n';
    os << "perturbation_scale = " << format_real(c.family.perturbation_scale) << '\n';
    os << "\n[experiment]\n";
    os << "kind = " << to_string(c.experiment.kind) << '\n';
    os << "target_time = " << format_real(c.experiment.target_time) << '\n';
    os << "tolerance = " << format_real(c.experiment.tolerance) << '\n';
    os << "condition_tolerance = " << format_real(c.experiment.condition_tolerance) << '\n';
    os << "cloud_size = " << c.experiment.cloud_size << '\n';
    os << "n_modes = " << c.experiment.n_modes << '\n';
    os << "seed = " << c.experiment.seed << '\n';
    os << "pullback_count = " << c.experiment.pullback_count << '\n';
    os << "threshold_ratio = " << format_real(c.experiment.threshold_ratio) << '\n';
    os << "output_dir = " << c.experiment.output_dir << '\n';
    return os.str();
}

}  // namespace nlrd
