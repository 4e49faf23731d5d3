#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "volcheck/catalog.hpp"
#include "volcheck/errors.hpp"
#include "volcheck/geometry.hpp"
#include "volcheck/volume.hpp"

namespace volcheck::cli {

/// Bad configuration; `key()` is the dotted path of the offending entry.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& message)
        : Error(key + ": " + message), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

struct InlineMetric {
    int n = 0;
    Signature signature = Signature::Lorentzian;
    std::string psi = "0";
    std::vector<std::string> sigma;  // row-major n x n
    std::string domain = "torus";
    std::vector<double> lengths;     // empty: all ones
    double sigma_volume = 1.0;
};

/// Either explicit ladder points or a geometric approach to an endpoint.
///
/// Finite endpoint E: T_k = E - (E - start) ratio^k. Infinite endpoint:
/// T_k = start + 2^k - 1. Past-directed checks mirror both rules.
struct LadderSpec {
    std::vector<double> points;
    std::optional<double> start;
    std::optional<double> endpoint;
    int count = 4;
    double ratio = 0.1;
};

struct RunConfig {
    std::optional<std::string> catalog;
    catalog::ParamMap params;
    std::optional<InlineMetric> metric;

    std::optional<double> window_tminus;
    std::optional<double> window_tplus;

    std::vector<int> grid{32};  // one entry applies to every axis
    int panels = 20;
    double t1 = 0.0;
    std::optional<double> t;
    std::optional<double> T;
    std::vector<double> times;
    LadderSpec ladder;
    std::optional<Box> box;
    double tolerance = 1e-9;
    std::string format = "csv";
    int hypothesis_samples = 64;
    bool finite_differences = false;

    double tau = 4.0;
    double tau2 = 8.0;
    std::optional<std::pair<double, double>> cmc_range;
    int cmc_samples = 400;
};

/// Reads a TOML run file. Unknown keys and type mismatches raise ConfigError.
RunConfig load_config(const std::string& path);

/// Same as load_config, from text already in memory.
RunConfig parse_config(const std::string& text, const std::string& source_name = "<config>");

/// Cross-field checks that need the whole config (one metric source,
/// window against t1, ladder order). Called after flags are merged.
void validate(const RunConfig& config);

/// Builds the metric the config describes, with the configured window
/// applied on top of any catalog window.
struct ResolvedMetric {
    MetricSpec metric;
    std::optional<catalog::CatalogEntry> entry;
    std::string source;
};
ResolvedMetric build_metric(const RunConfig& config);

Grid build_grid(const RunConfig& config, int dimension);

enum class Direction { Future, Past };

/// Ladder points in increasing order (future) or decreasing order (past).
std::vector<double> resolve_ladder(const RunConfig& config, const MetricSpec& metric, Direction direction);

}  // namespace volcheck::cli
