#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "volcheck/geometry.hpp"

namespace volcheck::catalog {

using ParamValue = std::variant<double, std::string>;
using ParamMap = std::map<std::string, ParamValue>;

struct ParamSchema {
    std::string name;
    ParamValue default_value;
    std::string description;
};

enum class Quantity { MeanCurvature, SliceVolume, CylinderVolume, Gamma1 };

const char* to_string(Quantity q);

/// Closed-form references of one built metric. Arguments are {t} for
/// MeanCurvature and SliceVolume, {t1, T} for CylinderVolume and Gamma1.
struct CatalogEntry {
    std::string name;
    ParamMap params;  // resolved, defaults filled in
    std::map<Quantity, std::function<double(std::span<const double>)>> references;
};

struct EntryInfo {
    std::string name;
    std::string description;
    std::vector<ParamSchema> schema;
};

struct Built {
    MetricSpec metric;
    CatalogEntry entry;
};

/// All entries with their parameter schemas, sorted by name.
std::vector<EntryInfo> list();

/// Builds a catalog metric. Every entry accepts `domain` ("torus" with side
/// `L`, or "homogeneous" with sigma-volume `V`) besides its own parameters.
/// Throws PreconditionError for unknown names, unknown keys or bad values.
Built make(const std::string& name, const ParamMap& params = {});

/// Closed-form value, or nullopt when the entry has none for `q`.
std::optional<double> reference(const CatalogEntry& entry, Quantity q, std::span<const double> args);

}  // namespace volcheck::catalog
