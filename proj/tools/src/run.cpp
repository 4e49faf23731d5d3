#include "volcheck_cli/run.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>

#include "volcheck/bounds.hpp"
#include "volcheck/catalog.hpp"
#include "volcheck/errors.hpp"
#include "volcheck/geometry.hpp"
#include "volcheck/volume.hpp"
#include "volcheck_cli/config.hpp"

namespace volcheck::cli {

namespace {

/// %.15g, with inf and nan spelled the same on every platform.
std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) v = 0.0;  // no "-0"
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.15g", v);
    return buffer;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string current;
    std::istringstream in(s);
    while (std::getline(in, current, sep)) parts.push_back(current);
    return parts;
}

double parse_number(const std::string& s, const std::string& key) {
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size()) throw ConfigError(key, "'" + s + "' is not a number");
    return v;
}

std::vector<double> parse_list(const std::string& s, const std::string& key) {
    std::vector<double> out;
    for (const auto& part : split(s, ',')) out.push_back(parse_number(part, key));
    return out;
}

/// Command line values; each one overrides the matching config entry.
struct Flags {
    std::string config_path;
    std::optional<std::string> catalog;
    std::vector<std::string> params;
    std::optional<std::string> grid;
    std::optional<int> panels;
    std::optional<double> t1;
    std::optional<double> t;
    std::optional<double> T;
    std::optional<std::string> times;
    std::optional<std::string> ladder;
    std::optional<std::string> box;
    std::optional<double> tol;
    std::optional<std::string> format;
    std::optional<double> tau;
    std::optional<double> tau2;
    std::optional<std::string> cmc_range;
    std::optional<int> cmc_samples;
    std::optional<int> hypothesis_samples;
    bool finite_differences = false;
};

RunConfig merge(const Flags& f) {
    RunConfig c = f.config_path.empty() ? RunConfig{} : load_config(f.config_path);
    if (f.catalog) {
        c.catalog = *f.catalog;
        c.metric.reset();
    }
    for (const auto& p : f.params) {
        const auto eq = p.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("params", "expected key=value, got '" + p + "'");
        const std::string key = p.substr(0, eq);
        const std::string value = p.substr(eq + 1);
        double d = 0.0;
        const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), d);
        if (ec == std::errc() && end == value.data() + value.size()) {
            c.params[key] = d;
        } else {
            c.params[key] = value;
        }
    }
    if (f.grid) {
        c.grid.clear();
        for (const auto& part : split(*f.grid, ',')) {
            const double g = parse_number(part, "grid");
            if (g != std::floor(g)) throw ConfigError("grid", "node counts must be integers");
            c.grid.push_back(static_cast<int>(g));
        }
    }
    if (f.panels) c.panels = *f.panels;
    if (f.t1) c.t1 = *f.t1;
    if (f.t) c.t = *f.t;
    if (f.T) c.T = *f.T;
    if (f.times) c.times = parse_list(*f.times, "times");
    if (f.ladder) c.ladder.points = parse_list(*f.ladder, "ladder");
    if (f.box) {
        Box box;
        for (const auto& part : split(*f.box, ',')) {
            const auto ends = split(part, ':');
            if (ends.size() != 2) throw ConfigError("subset.box", "expected a:b per axis, got '" + part + "'");
            box.intervals.emplace_back(parse_number(ends[0], "subset.box"), parse_number(ends[1], "subset.box"));
        }
        c.box = std::move(box);
    }
    if (f.tol) c.tolerance = *f.tol;
    if (f.format) c.format = *f.format;
    if (f.tau) c.tau = *f.tau;
    if (f.tau2) c.tau2 = *f.tau2;
    if (f.cmc_range) {
        const auto r = parse_list(*f.cmc_range, "remark.range");
        if (r.size() != 2) throw ConfigError("remark.range", "expected t_begin,t_end");
        c.cmc_range = std::make_pair(r[0], r[1]);
    }
    if (f.cmc_samples) c.cmc_samples = *f.cmc_samples;
    if (f.hypothesis_samples) c.hypothesis_samples = *f.hypothesis_samples;
    if (f.finite_differences) c.finite_differences = true;
    validate(c);
    return c;
}

SpatialSubset subset_of(const RunConfig& c) { return c.box ? SpatialSubset(*c.box) : SpatialSubset::all(); }

void note_snapping(const RunConfig& c, const MetricSpec& m, const Grid& grid, std::ostream& err) {
    const auto* torus = std::get_if<Torus>(&m.domain());
    if (!c.box || torus == nullptr) return;
    const SnappedSubset s = snap_subset(SpatialSubset(*c.box), grid, *torus);
    if (s.adjusted) err << "note: box snapped to grid cells: " << SpatialSubset(s.box).describe() << '\n';
}

/// Writes rows either as CSV under `header` or as key=value lines
/// (suffixed [k] when there is more than one row).
void emit(const RunConfig& c, std::ostream& out, const std::vector<std::string>& header,
          const std::vector<std::vector<std::string>>& rows) {
    if (c.format == "csv") {
        for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
        out << '\n';
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
            out << '\n';
        }
        return;
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            out << header[i];
            if (rows.size() > 1) out << '[' << r << ']';
            out << '=' << rows[r][i] << '\n';
        }
    }
}

std::string maybe(const std::optional<double>& v) { return v ? num(*v) : ""; }

int command_info(const RunConfig& c, std::ostream& out) {
    const ResolvedMetric r = build_metric(c);
    const MetricSpec& m = r.metric;
    out << "source=" << r.source << '\n';
    out << "dimension=" << m.dimension() << '\n';
    out << "signature=" << to_string(m.signature()) << '\n';
    if (const auto* torus = std::get_if<Torus>(&m.domain())) {
        out << "domain=torus\n";
        out << "lengths=";
        for (std::size_t i = 0; i < torus->lengths.size(); ++i) out << (i ? "," : "") << num(torus->lengths[i]);
        out << '\n';
    } else {
        out << "domain=homogeneous\n";
        out << "sigma_volume=" << num(std::get<Homogeneous>(m.domain()).sigma_volume) << '\n';
    }
    out << "window=" << num(m.window().t_minus) << "," << num(m.window().t_plus) << '\n';
    out << "declared_homogeneous=" << (m.declared_homogeneous() ? "true" : "false") << '\n';
    if (r.entry) {
        for (const auto& [key, value] : r.entry->params) {
            out << "param." << key << '=';
            if (const double* d = std::get_if<double>(&value)) {
                out << num(*d);
            } else {
                out << std::get<std::string>(value);
            }
            out << '\n';
        }
    }
    return kExitOk;
}

int command_slice_volume(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const ResolvedMetric r = build_metric(c);
    const Grid grid = build_grid(c, r.metric.dimension());
    const double t = c.t.value_or(c.t1);
    const SpatialSubset subset = subset_of(c);
    note_snapping(c, r.metric, grid, err);
    const QuadratureResult v = slice_volume(r.metric, t, subset, grid);
    const QuadratureResult rate = slice_volume_rate(r.metric, t, subset, grid);
    std::optional<double> reference;
    if (r.entry && subset.is_all()) {
        const double args[] = {t};
        reference = catalog::reference(*r.entry, catalog::Quantity::SliceVolume, args);
    }
    emit(c, out, {"t", "volume", "error_estimate", "rate", "reference"},
         {{num(t), num(v.value), num(v.error_estimate), num(rate.value), maybe(reference)}});
    return kExitOk;
}

double default_end(const RunConfig& c, const MetricSpec& m) {
    if (c.T) return *c.T;
    return resolve_ladder(c, m, Direction::Future).back();
}

int command_sweep(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const ResolvedMetric r = build_metric(c);
    const Grid grid = build_grid(c, r.metric.dimension());
    std::vector<double> times = c.times;
    if (times.empty()) {
        const double end = default_end(c, r.metric);
        for (int k = 0; k <= 10; ++k) times.push_back(c.t1 + (end - c.t1) * k / 10.0);
    }
    note_snapping(c, r.metric, grid, err);
    const VolumeSweep s = volume_sweep(r.metric, times, subset_of(c), grid);
    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < s.times.size(); ++k) rows.push_back({num(s.times[k]), num(s.volumes[k]), num(s.rates[k])});
    emit(c, out, {"t", "volume", "rate"}, rows);
    return kExitOk;
}

int command_cylinder(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const ResolvedMetric r = build_metric(c);
    const Grid grid = build_grid(c, r.metric.dimension());
    const double end = default_end(c, r.metric);
    const SpatialSubset subset = subset_of(c);
    note_snapping(c, r.metric, grid, err);
    const QuadratureResult q = cylinder_volume(r.metric, c.t1, end, subset, grid, TimeRule{c.panels});
    std::optional<double> reference;
    if (r.entry && subset.is_all()) {
        const double args[] = {c.t1, end};
        reference = catalog::reference(*r.entry, catalog::Quantity::CylinderVolume, args);
    }
    emit(c, out, {"t1", "T", "volume", "error_estimate", "reference"},
         {{num(c.t1), num(end), num(q.value), num(q.error_estimate), maybe(reference)}});
    return kExitOk;
}

int command_curvature(const RunConfig& c, std::ostream& out) {
    const ResolvedMetric r = build_metric(c);
    const Grid grid = build_grid(c, r.metric.dimension());
    const double t = c.t.value_or(c.t1);
    const CurvatureRange h = mean_curvature_extrema(r.metric, t, grid);
    const double discrepancy = two_path_discrepancy(r.metric, t, grid);
    emit(c, out, {"t", "h_min", "h_max", "two_path_discrepancy"},
         {{num(t), num(h.min), num(h.max), num(discrepancy)}});
    return kExitOk;
}

int exit_code(Verdict v) {
    switch (v) {
        case Verdict::Holds: return kExitOk;
        case Verdict::Violated: return kExitViolated;
        case Verdict::HypothesisNotMet: return kExitHypothesisNotMet;
    }
    return kExitError;
}

void emit_report(const RunConfig& c, const BoundReport& report, std::ostream& out, std::ostream& err) {
    const std::vector<std::string> header = {"theorem", "t1", "T", "epsilon0_or_gamma", "reference_volume",
                                             "cylinder_volume", "bound", "margin", "verdict"};
    if (c.format == "csv") {
        std::vector<std::vector<std::string>> rows;
        for (std::size_t k = 0; k < report.ladder.size(); ++k) {
            rows.push_back({to_string(report.theorem), num(report.start_time), num(report.ladder[k]),
                            num(report.constant), num(report.reference_volume), num(report.measured[k]),
                            num(report.bounds[k]), num(report.margins[k]), to_string(report.point_verdicts[k])});
        }
        emit(c, out, header, rows);
        for (const auto& note : report.notes) err << "note: " << note << '\n';
        return;
    }
    out << "theorem=" << to_string(report.theorem) << '\n';
    out << "t1=" << num(report.start_time) << '\n';
    out << "subset=" << report.subset << '\n';
    out << "epsilon0_or_gamma=" << num(report.constant) << '\n';
    out << "reference_volume=" << num(report.reference_volume) << '\n';
    out << "tolerance=" << num(report.tolerance) << '\n';
    out << "hypothesis_samples=" << report.hypothesis_samples << '\n';
    out << "verdict=" << to_string(report.verdict) << '\n';
    for (std::size_t k = 0; k < report.ladder.size(); ++k) {
        const std::string i = "[" + std::to_string(k) + "]";
        out << "T" << i << '=' << num(report.ladder[k]) << '\n';
        out << "cylinder_volume" << i << '=' << num(report.measured[k]) << '\n';
        out << "error_estimate" << i << '=' << num(report.measured_errors[k]) << '\n';
        out << "bound" << i << '=' << num(report.bounds[k]) << '\n';
        out << "sharper_bound" << i << '=' << num(report.sharper_bounds[k]) << '\n';
        out << "margin" << i << '=' << num(report.margins[k]) << '\n';
        out << "verdict" << i << '=' << to_string(report.point_verdicts[k]) << '\n';
    }
    for (const auto& note : report.notes) out << "note=" << note << '\n';
}

/// Default t-range for mean curvature time: from t1 to 99% of the way to T+
/// (or t1 + 10 when T+ is infinite).
TimeInterval cmc_range(const RunConfig& c, const MetricSpec& m) {
    if (c.cmc_range) return {c.cmc_range->first, c.cmc_range->second};
    const double tplus = m.window().t_plus;
    return {c.t1, std::isfinite(tplus) ? c.t1 + 0.99 * (tplus - c.t1) : c.t1 + 10.0};
}

int command_check(const RunConfig& c, const std::string& theorem, std::ostream& out, std::ostream& err) {
    const ResolvedMetric r = build_metric(c);
    const MetricSpec& m = r.metric;
    const CheckOptions options{build_grid(c, m.dimension()), TimeRule{c.panels}, c.tolerance, c.hypothesis_samples};
    const SpatialSubset subset = subset_of(c);
    note_snapping(c, m, options.grid, err);

    BoundReport report;
    if (theorem == "remark2") {
        if (c.box) throw ConfigError("subset", "remark2 works on whole slices only");
        const MetricSpec cmc = reparameterize_by_mean_curvature(m, cmc_range(c, m), c.cmc_samples);
        report = check_remark_sec2(cmc, c.tau, c.tau2, options);
    } else if (theorem == "thm01-past" || theorem == "thm12-past") {
        const auto ladder = resolve_ladder(c, m, Direction::Past);
        report = theorem == "thm01-past" ? check_thm01_past(m, c.t1, ladder, subset, options)
                                         : check_thm12_past(m, c.t1, ladder, subset, options);
    } else {
        const auto ladder = resolve_ladder(c, m, Direction::Future);
        if (theorem == "thm01-future") {
            report = check_thm01_future(m, c.t1, ladder, subset, options);
        } else if (theorem == "thm12") {
            report = check_thm12(m, c.t1, ladder, subset, options);
        } else {
            report = check_riemannian(m, c.t1, ladder, subset, options,
                                      theorem == "riemann-i" ? RiemannCase::I : RiemannCase::II);
        }
    }
    emit_report(c, report, out, err);
    return exit_code(report.verdict);
}

int command_catalog_list(std::ostream& out) {
    for (const auto& info : catalog::list()) {
        out << info.name << ": " << info.description << '\n';
        for (const auto& p : info.schema) {
            out << "  " << p.name << " = ";
            if (const double* d = std::get_if<double>(&p.default_value)) {
                out << num(*d);
            } else {
                out << '"' << std::get<std::string>(p.default_value) << '"';
            }
            out << "  (" << p.description << ")\n";
        }
    }
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Checks volume bounds for foliated Lorentzian and Riemannian manifolds.", "volcheck"};
    app.require_subcommand(1);
    app.fallthrough();

    Flags f;
    app.add_option("--config", f.config_path, "TOML run file; flags override its entries");
    app.add_option("--catalog", f.catalog, "catalog entry name");
    app.add_option("--param", f.params, "catalog parameter key=value (repeatable)");
    app.add_option("--grid", f.grid, "nodes per axis: N or N1,N2,...");
    app.add_option("--panels", f.panels, "Gauss-Legendre panels in time");
    app.add_option("--t1", f.t1, "start time t1 (t2 for past checks)");
    app.add_option("--t", f.t, "evaluation time for slice-volume and curvature");
    app.add_option("--T", f.T, "end time for cylinder and sweep");
    app.add_option("--times", f.times, "comma separated times for sweep");
    app.add_option("--ladder", f.ladder, "comma separated ladder points");
    app.add_option("--box", f.box, "subset a1:b1,a2:b2,... (torus domains)");
    app.add_option("--tol", f.tol, "margin tolerance");
    app.add_option("--format", f.format, "csv or kv");
    app.add_option("--tau", f.tau, "remark2: lower mean curvature time");
    app.add_option("--tau2", f.tau2, "remark2: upper mean curvature time");
    app.add_option("--cmc-range", f.cmc_range, "remark2: t-range t_begin,t_end for the mean curvature clock");
    app.add_option("--cmc-samples", f.cmc_samples, "remark2: interpolation samples");
    app.add_option("--hypothesis-samples", f.hypothesis_samples, "times at which hypotheses are sampled");
    app.add_flag("--fd", f.finite_differences, "drop analytic derivatives and use finite differences");

    auto* info = app.add_subcommand("info", "describe the configured metric");
    auto* slice = app.add_subcommand("slice-volume", "volume and its rate of one slice");
    auto* sweep = app.add_subcommand("sweep", "slice volumes and rates at several times");
    auto* cylinder = app.add_subcommand("cylinder", "volume of the cylinder between t1 and T");
    auto* curvature = app.add_subcommand("curvature", "mean curvature range and two-path check at one time");
    auto* check = app.add_subcommand("check", "check one theorem along a ladder");
    std::string theorem;
    check->add_option("theorem", theorem, "thm01-future|thm01-past|thm12|thm12-past|remark2|riemann-i|riemann-ii")
        ->required()
        ->check(CLI::IsMember({"thm01-future", "thm01-past", "thm12", "thm12-past", "remark2", "riemann-i",
                               "riemann-ii"}));
    auto* cat = app.add_subcommand("catalog", "catalog commands");
    std::string action;
    cat->add_option("action", action, "list")->required()->check(CLI::IsMember({"list"}));

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        if (cat->parsed()) return command_catalog_list(out);
        const RunConfig c = merge(f);
        if (info->parsed()) return command_info(c, out);
        if (slice->parsed()) return command_slice_volume(c, out, err);
        if (sweep->parsed()) return command_sweep(c, out, err);
        if (cylinder->parsed()) return command_cylinder(c, out, err);
        if (curvature->parsed()) return command_curvature(c, out);
        if (check->parsed()) return command_check(c, theorem, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}

}  // namespace volcheck::cli
