#include "volcheck_cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <toml.hpp>

namespace volcheck::cli {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string join(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
}

double number(const toml::node& node, const std::string& key) {
    if (node.is_number()) return *node.value<double>();
    if (node.is_string()) {
        const std::string s = *node.value<std::string>();
        if (s == "inf" || s == "+inf") return kInf;
        if (s == "-inf") return -kInf;
    }
    throw ConfigError(key, "expected a number");
}

int integer(const toml::node& node, const std::string& key) {
    if (!node.is_integer()) throw ConfigError(key, "expected an integer");
    const auto v = *node.value<std::int64_t>();
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
        throw ConfigError(key, "integer out of range");
    }
    return static_cast<int>(v);
}

std::string text(const toml::node& node, const std::string& key) {
    if (!node.is_string()) throw ConfigError(key, "expected a string");
    return *node.value<std::string>();
}

bool boolean(const toml::node& node, const std::string& key) {
    if (!node.is_boolean()) throw ConfigError(key, "expected true or false");
    return *node.value<bool>();
}

const toml::array& array(const toml::node& node, const std::string& key) {
    const toml::array* a = node.as_array();
    if (a == nullptr) throw ConfigError(key, "expected an array");
    return *a;
}

const toml::table& table(const toml::node& node, const std::string& key) {
    const toml::table* t = node.as_table();
    if (t == nullptr) throw ConfigError(key, "expected a table");
    return *t;
}

std::vector<double> numbers(const toml::node& node, const std::string& key) {
    std::vector<double> out;
    const auto& a = array(node, key);
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(number(*a.get(i), key + "[" + std::to_string(i) + "]"));
    return out;
}

[[noreturn]] void unknown(const std::string& key) { throw ConfigError(key, "unknown key"); }

void read_params(const toml::table& t, const std::string& path, RunConfig& c) {
    for (auto&& [k, v] : t) {
        const std::string key = join(path, std::string(k.str()));
        if (v.is_string()) {
            c.params[std::string(k.str())] = *v.value<std::string>();
        } else if (v.is_number()) {
            c.params[std::string(k.str())] = *v.value<double>();
        } else {
            throw ConfigError(key, "catalog parameters must be numbers or strings");
        }
    }
}

void read_metric(const toml::table& t, const std::string& path, RunConfig& c) {
    InlineMetric m;
    bool have_n = false;
    for (auto&& [k, v] : t) {
        const std::string name(k.str());
        const std::string key = join(path, name);
        if (name == "n") {
            m.n = integer(v, key);
            have_n = true;
        } else if (name == "signature") {
            const std::string s = text(v, key);
            if (s == "lorentzian") {
                m.signature = Signature::Lorentzian;
            } else if (s == "riemannian") {
                m.signature = Signature::Riemannian;
            } else {
                throw ConfigError(key, "expected \"lorentzian\" or \"riemannian\"");
            }
        } else if (name == "psi") {
            m.psi = text(v, key);
        } else if (name == "sigma") {
            const auto& a = array(v, key);
            for (std::size_t i = 0; i < a.size(); ++i) m.sigma.push_back(text(*a.get(i), key + "[" + std::to_string(i) + "]"));
        } else if (name == "domain") {
            m.domain = text(v, key);
            if (m.domain != "torus" && m.domain != "homogeneous") {
                throw ConfigError(key, "expected \"torus\" or \"homogeneous\"");
            }
        } else if (name == "lengths") {
            m.lengths = numbers(v, key);
        } else if (name == "L") {
            m.lengths = {number(v, key)};
        } else if (name == "sigma_volume") {
            m.sigma_volume = number(v, key);
        } else {
            unknown(key);
        }
    }
    if (!have_n) throw ConfigError(join(path, "n"), "missing");
    c.metric = std::move(m);
}

void read_ladder(const toml::node& node, const std::string& key, RunConfig& c) {
    if (node.is_array()) {
        c.ladder.points = numbers(node, key);
        return;
    }
    for (auto&& [k, v] : table(node, key)) {
        const std::string name(k.str());
        const std::string sub = join(key, name);
        if (name == "points") {
            c.ladder.points = numbers(v, sub);
        } else if (name == "start") {
            c.ladder.start = number(v, sub);
        } else if (name == "endpoint") {
            c.ladder.endpoint = number(v, sub);
        } else if (name == "count") {
            c.ladder.count = integer(v, sub);
        } else if (name == "ratio") {
            c.ladder.ratio = number(v, sub);
        } else {
            unknown(sub);
        }
    }
}

void read_subset(const toml::table& t, const std::string& path, RunConfig& c) {
    for (auto&& [k, v] : t) {
        const std::string name(k.str());
        const std::string key = join(path, name);
        if (name != "box") unknown(key);
        Box box;
        const auto& rows = array(v, key);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const std::string row_key = key + "[" + std::to_string(i) + "]";
            const auto pair = numbers(*rows.get(i), row_key);
            if (pair.size() != 2) throw ConfigError(row_key, "expected [a, b]");
            box.intervals.emplace_back(pair[0], pair[1]);
        }
        c.box = std::move(box);
    }
}

void read_remark(const toml::table& t, const std::string& path, RunConfig& c) {
    for (auto&& [k, v] : t) {
        const std::string name(k.str());
        const std::string key = join(path, name);
        if (name == "tau") {
            c.tau = number(v, key);
        } else if (name == "tau2") {
            c.tau2 = number(v, key);
        } else if (name == "range") {
            const auto r = numbers(v, key);
            if (r.size() != 2) throw ConfigError(key, "expected [t_begin, t_end]");
            c.cmc_range = std::make_pair(r[0], r[1]);
        } else if (name == "samples") {
            c.cmc_samples = integer(v, key);
        } else {
            unknown(key);
        }
    }
}

RunConfig from_table(const toml::table& root) {
    RunConfig c;
    for (auto&& [k, v] : root) {
        const std::string key(k.str());
        if (key == "catalog") {
            c.catalog = text(v, key);
        } else if (key == "params") {
            read_params(table(v, key), key, c);
        } else if (key == "metric") {
            read_metric(table(v, key), key, c);
        } else if (key == "window") {
            for (auto&& [wk, wv] : table(v, key)) {
                const std::string name(wk.str());
                if (name == "tminus") {
                    c.window_tminus = number(wv, join(key, name));
                } else if (name == "tplus") {
                    c.window_tplus = number(wv, join(key, name));
                } else {
                    unknown(join(key, name));
                }
            }
        } else if (key == "grid") {
            c.grid.clear();
            if (v.is_array()) {
                const auto& a = array(v, key);
                for (std::size_t i = 0; i < a.size(); ++i) c.grid.push_back(integer(*a.get(i), key + "[" + std::to_string(i) + "]"));
            } else {
                c.grid.push_back(integer(v, key));
            }
        } else if (key == "panels") {
            c.panels = integer(v, key);
        } else if (key == "t1") {
            c.t1 = number(v, key);
        } else if (key == "t") {
            c.t = number(v, key);
        } else if (key == "T") {
            c.T = number(v, key);
        } else if (key == "times") {
            c.times = numbers(v, key);
        } else if (key == "ladder") {
            read_ladder(v, key, c);
        } else if (key == "subset") {
            read_subset(table(v, key), key, c);
        } else if (key == "tol") {
            c.tolerance = number(v, key);
        } else if (key == "format") {
            c.format = text(v, key);
        } else if (key == "hypothesis_samples") {
            c.hypothesis_samples = integer(v, key);
        } else if (key == "finite_differences") {
            c.finite_differences = boolean(v, key);
        } else if (key == "remark") {
            read_remark(table(v, key), key, c);
        } else {
            unknown(key);
        }
    }
    return c;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

bool strictly_monotone(const std::vector<double>& v, bool increasing) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (increasing ? !(v[i] > v[i - 1]) : !(v[i] < v[i - 1])) return false;
    }
    return true;
}

}  // namespace

RunConfig parse_config(const std::string& text_in, const std::string& source_name) {
    try {
        return from_table(toml::parse(text_in, source_name));
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << e.description() << " (line " << e.source().begin.line << ", column " << e.source().begin.column << ")";
        throw ConfigError(source_name, os.str());
    }
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path, "cannot open file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path);
}

void validate(const RunConfig& c) {
    if (c.catalog.has_value() == c.metric.has_value()) {
        throw ConfigError(c.metric ? "metric" : "catalog",
                          "give exactly one metric source: a catalog name or an inline [metric] table");
    }
    if (!c.params.empty() && !c.catalog) throw ConfigError("params", "parameters need a catalog entry");
    if (!std::isfinite(c.t1)) throw ConfigError("t1", "must be finite");
    const double tminus = c.window_tminus.value_or(-kInf);
    const double tplus = c.window_tplus.value_or(kInf);
    if (!(tminus < tplus)) throw ConfigError("window", "Tminus " + fmt(tminus) + " must be below Tplus " + fmt(tplus));
    if (!(c.t1 < tplus)) throw ConfigError("window", "Tplus " + fmt(tplus) + " must exceed t1 = " + fmt(c.t1));
    if (!(c.t1 >= tminus)) throw ConfigError("window", "Tminus " + fmt(tminus) + " is above t1 = " + fmt(c.t1));
    if (c.grid.empty()) throw ConfigError("grid", "needs at least one count");
    for (int g : c.grid) {
        if (g < 1) throw ConfigError("grid", "node counts must be positive");
    }
    if (c.panels < 1) throw ConfigError("panels", "must be positive");
    if (!(c.tolerance >= 0.0)) throw ConfigError("tol", "must be non-negative");
    if (c.format != "csv" && c.format != "kv") throw ConfigError("format", "expected \"csv\" or \"kv\"");
    if (c.hypothesis_samples < 2) throw ConfigError("hypothesis_samples", "must be at least 2");
    if (c.ladder.count < 1) throw ConfigError("ladder.count", "must be positive");
    if (!(c.ladder.ratio > 0.0 && c.ladder.ratio < 1.0)) throw ConfigError("ladder.ratio", "must lie in (0, 1)");
    if (!c.ladder.points.empty() && !strictly_monotone(c.ladder.points, true) &&
        !strictly_monotone(c.ladder.points, false)) {
        throw ConfigError("ladder", "points must be strictly monotone");
    }
    if (!std::is_sorted(c.times.begin(), c.times.end())) throw ConfigError("times", "must be sorted");
    if (c.cmc_samples < 4) throw ConfigError("remark.samples", "must be at least 4");
    if (c.metric) {
        const auto& m = *c.metric;
        if (m.n < 1 || m.n > kMaxDimension) {
            throw ConfigError("metric.n", "must lie in [1, " + std::to_string(kMaxDimension) + "]");
        }
        if (m.sigma.size() != static_cast<std::size_t>(m.n * m.n)) {
            throw ConfigError("metric.sigma", "needs " + std::to_string(m.n * m.n) + " row-major entries");
        }
        if (m.lengths.size() > 1 && m.lengths.size() != static_cast<std::size_t>(m.n)) {
            throw ConfigError("metric.lengths", "needs one length or " + std::to_string(m.n));
        }
    }
}

ResolvedMetric build_metric(const RunConfig& c) {
    const double tminus = c.window_tminus.value_or(-kInf);
    const double tplus = c.window_tplus.value_or(kInf);
    std::optional<MetricSpec> metric;
    std::optional<catalog::CatalogEntry> entry;
    std::string source;
    if (c.catalog) {
        auto built = catalog::make(*c.catalog, c.params);
        const MetricSpec& m = built.metric;
        const TimeWindow window{std::max(m.window().t_minus, tminus), std::min(m.window().t_plus, tplus)};
        if (!(window.t_minus < window.t_plus)) throw ConfigError("window", "does not overlap the catalog window");
        metric.emplace(m.dimension(), m.signature(), m.psi(), m.sigma_components(), m.domain(), window);
        entry = std::move(built.entry);
        source = *c.catalog;
    } else {
        const InlineMetric& im = *c.metric;
        SpatialDomain domain;
        if (im.domain == "torus") {
            std::vector<double> lengths = im.lengths;
            if (lengths.empty()) lengths = {1.0};
            if (lengths.size() == 1) lengths.assign(static_cast<std::size_t>(im.n), lengths[0]);
            domain = Torus{lengths};
        } else {
            domain = Homogeneous{im.sigma_volume};
        }
        metric.emplace(metric_from_expressions(im.n, im.signature, im.psi, im.sigma, domain, TimeWindow{tminus, tplus}));
        source = "inline";
    }
    if (!metric->window().contains(c.t1)) {
        throw ConfigError("window", "t1 = " + fmt(c.t1) + " lies outside the metric window [" +
                                        fmt(metric->window().t_minus) + ", " + fmt(metric->window().t_plus) + "]");
    }
    if (c.finite_differences) metric.emplace(metric->without_derivatives());
    return {std::move(*metric), std::move(entry), std::move(source)};
}

Grid build_grid(const RunConfig& c, int dimension) {
    if (c.grid.size() == 1) return Grid::uniform(dimension, c.grid[0]);
    if (c.grid.size() != static_cast<std::size_t>(dimension)) {
        throw ConfigError("grid", "needs one count or " + std::to_string(dimension) + " counts");
    }
    return Grid(c.grid);
}

std::vector<double> resolve_ladder(const RunConfig& c, const MetricSpec& m, Direction direction) {
    const bool future = direction == Direction::Future;
    if (!c.ladder.points.empty()) {
        if (!strictly_monotone(c.ladder.points, future)) {
            throw ConfigError("ladder", std::string("points must ") + (future ? "increase" : "decrease") +
                                            " away from t1 for this check");
        }
        return c.ladder.points;
    }
    const double sign = future ? 1.0 : -1.0;
    const double endpoint = c.ladder.endpoint.value_or(future ? m.window().t_plus : m.window().t_minus);
    std::vector<double> ladder;
    if (std::isfinite(endpoint)) {
        const double start = c.ladder.start.value_or(c.t1 + 0.9 * (endpoint - c.t1));
        if (!(sign * (endpoint - start) > 0.0)) throw ConfigError("ladder.start", "must lie between t1 and the endpoint");
        for (int k = 0; k < c.ladder.count; ++k) {
            ladder.push_back(endpoint - (endpoint - start) * std::pow(c.ladder.ratio, k));
        }
    } else {
        const double start = c.ladder.start.value_or(c.t1 + sign);
        for (int k = 0; k < c.ladder.count; ++k) ladder.push_back(start + sign * (std::ldexp(1.0, k) - 1.0));
    }
    return ladder;
}

}  // namespace volcheck::cli
