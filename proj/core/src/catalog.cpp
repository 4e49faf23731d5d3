#include "volcheck/catalog.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include "volcheck/errors.hpp"
#include "volcheck/expr.hpp"

namespace volcheck::catalog {

const char* to_string(Quantity q) {
    switch (q) {
        case Quantity::MeanCurvature: return "mean-curvature";
        case Quantity::SliceVolume: return "slice-volume";
        case Quantity::CylinderVolume: return "cylinder-volume";
        case Quantity::Gamma1: return "gamma1";
    }
    return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 2.0 * std::numbers::pi;

using Reference = std::function<double(std::span<const double>)>;

/// Parameters after defaults are merged in, with typed accessors.
class Params {
public:
    Params(const std::string& entry, const std::vector<ParamSchema>& schema, const ParamMap& given)
        : entry_(entry) {
        for (const auto& p : schema) values_[p.name] = p.default_value;
        for (const auto& [key, value] : given) {
            if (!values_.count(key)) {
                throw PreconditionError(entry + ": unknown parameter '" + key + "'");
            }
            values_[key] = value;
        }
    }

    double number(const std::string& key) const {
        const ParamValue& v = values_.at(key);
        if (const double* d = std::get_if<double>(&v)) return *d;
        const std::string& s = std::get<std::string>(v);
        double out = 0.0;
        const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        if (ec != std::errc() || end != s.data() + s.size()) {
            if (s == "inf" || s == "+inf") return kInf;
            if (s == "-inf") return -kInf;
            throw PreconditionError(entry_ + ": parameter '" + key + "' must be a number, got '" + s + "'");
        }
        return out;
    }

    std::string text(const std::string& key) const {
        const ParamValue& v = values_.at(key);
        if (const std::string* s = std::get_if<std::string>(&v)) return *s;
        char buffer[64];
        const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, std::get<double>(v));
        return std::string(buffer, end);
    }

    int dimension() const {
        const double n = number("n");
        if (!(n >= 1 && n <= kMaxDimension) || n != std::floor(n)) {
            throw PreconditionError(entry_ + ": n must be an integer in [1, " +
                                    std::to_string(kMaxDimension) + "]");
        }
        return static_cast<int>(n);
    }

    double positive(const std::string& key) const {
        const double v = number(key);
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw PreconditionError(entry_ + ": parameter '" + key + "' must be positive and finite");
        }
        return v;
    }

    double finite(const std::string& key) const {
        const double v = number(key);
        if (!std::isfinite(v)) throw PreconditionError(entry_ + ": parameter '" + key + "' must be finite");
        return v;
    }

    const ParamMap& resolved() const { return values_; }
    const std::string& entry() const { return entry_; }

private:
    std::string entry_;
    ParamMap values_;
};

struct DomainChoice {
    SpatialDomain domain;
    double volume = 1.0;  // L^n or V
    double side = 1.0;    // L for tori
    bool torus = true;
};

DomainChoice choose_domain(const Params& p, int n, bool torus_only) {
    const std::string kind = p.text("domain");
    DomainChoice c;
    if (kind == "torus") {
        c.side = p.positive("L");
        c.domain = Torus{std::vector<double>(static_cast<std::size_t>(n), c.side)};
        c.volume = std::pow(c.side, n);
    } else if (kind == "homogeneous") {
        if (torus_only) throw PreconditionError(p.entry() + ": this entry needs domain = \"torus\"");
        c.volume = p.positive("V");
        c.domain = Homogeneous{c.volume};
        c.torus = false;
    } else {
        throw PreconditionError(p.entry() + ": domain must be \"torus\" or \"homogeneous\", got \"" + kind + "\"");
    }
    return c;
}

/// sigma = diag(f, ..., f) with zero off-diagonal entries.
std::vector<ScalarField> diagonal(int n, const ScalarField& f) {
    std::vector<ScalarField> sigma;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) sigma.push_back(i == j ? f : ScalarField::constant(0.0));
    }
    return sigma;
}

std::vector<ParamSchema> with_domain(std::vector<ParamSchema> own) {
    own.push_back({"domain", std::string("torus"), "\"torus\" or \"homogeneous\""});
    own.push_back({"L", 1.0, "torus side length"});
    own.push_back({"V", 1.0, "total sigma-volume of a homogeneous domain"});
    return own;
}

ScalarField power_law(double T, double q) {
    return ScalarField::of_time([T, q](double t) { return std::pow(T - t, 2.0 * q); },
                                [T, q](double t) { return -2.0 * q * std::pow(T - t, 2.0 * q - 1.0); });
}

/// Closed forms shared by the power-law crunches: |M| = c_M (T - t)^{nq},
/// |Q| = c_Q [(T - t1)^{nq+1} - (T - t2)^{nq+1}] / (nq + 1).
Reference crunch_slice(double c, double T, double nq) {
    return [=](std::span<const double> a) { return c * std::pow(T - a[0], nq); };
}

Reference crunch_cylinder(double c, double T, double nq) {
    return [=](std::span<const double> a) {
        return c * (std::pow(T - a[0], nq + 1.0) - std::pow(T - a[1], nq + 1.0)) / (nq + 1.0);
    };
}

Reference elapsed() {
    return [](std::span<const double> a) { return a[1] - a[0]; };
}

struct Definition {
    std::string name;
    std::string description;
    std::vector<ParamSchema> schema;
    std::function<Built(const Params&)> build;
};

Built flrw_crunch(const Params& p) {
    const int n = p.dimension();
    const double q = p.positive("q");
    const double T = p.finite("Tplus");
    const DomainChoice d = choose_domain(p, n, false);
    MetricSpec m(n, Signature::Lorentzian, ScalarField::constant(0.0), diagonal(n, power_law(T, q)), d.domain,
                 TimeWindow{-kInf, T});
    const double nq = n * q;
    CatalogEntry e{"flrw-crunch", p.resolved(), {}};
    e.references[Quantity::MeanCurvature] = [=](std::span<const double> a) { return nq / (T - a[0]); };
    e.references[Quantity::SliceVolume] = crunch_slice(d.volume, T, nq);
    e.references[Quantity::CylinderVolume] = crunch_cylinder(d.volume, T, nq);
    e.references[Quantity::Gamma1] = elapsed();
    return {std::move(m), std::move(e)};
}

Built minkowski_strip(const Params& p) {
    const int n = p.dimension();
    const DomainChoice d = choose_domain(p, n, false);
    MetricSpec m(n, Signature::Lorentzian, ScalarField::constant(0.0), diagonal(n, ScalarField::constant(1.0)),
                 d.domain, TimeWindow{});
    const double v = d.volume;
    CatalogEntry e{"minkowski-strip", p.resolved(), {}};
    e.references[Quantity::MeanCurvature] = [](std::span<const double>) { return 0.0; };
    e.references[Quantity::SliceVolume] = [v](std::span<const double>) { return v; };
    e.references[Quantity::CylinderVolume] = [v](std::span<const double> a) { return v * (a[1] - a[0]); };
    e.references[Quantity::Gamma1] = elapsed();
    return {std::move(m), std::move(e)};
}

Built conformal_homogeneous(const Params& p) {
    const int n = p.dimension();
    const DomainChoice d = choose_domain(p, n, false);
    const expr::Expr psi = expr::parse(p.text("psi"), n);
    if (psi.depends_on_space()) throw PreconditionError(p.entry() + ": psi may depend on t only");
    const expr::Expr rate = expr::differentiate(psi, expr::Variable::time());
    const TimeWindow window{p.number("tminus"), p.number("tplus")};
    MetricSpec m(n, Signature::Lorentzian, ScalarField::from_expr(psi, n), diagonal(n, ScalarField::constant(1.0)),
                 d.domain, window);
    const std::vector<double> origin(static_cast<std::size_t>(n), 0.0);
    const double v = d.volume;
    CatalogEntry e{"conformal-homogeneous", p.resolved(), {}};
    e.references[Quantity::MeanCurvature] = [=](std::span<const double> a) {
        return -std::exp(-psi.evaluate(a[0], origin)) * n * rate.evaluate(a[0], origin);
    };
    e.references[Quantity::SliceVolume] = [=](std::span<const double> a) {
        return v * std::exp(n * psi.evaluate(a[0], origin));
    };
    return {std::move(m), std::move(e)};
}

Built perturbed_flrw(const Params& p) {
    const int n = p.dimension();
    const double q = p.positive("q");
    const double T = p.finite("Tplus");
    const double eps = p.finite("epsilon");
    if (!(eps >= 0.0 && eps < 1.0)) throw PreconditionError(p.entry() + ": epsilon must lie in [0, 1)");
    const DomainChoice d = choose_domain(p, n, true);
    const double k = kTwoPi / d.side;
    const double exponent = 2.0 / n;

    // (T - t)^{2q} (1 + eps sin(k x1))^{2/n}
    auto value = [=](double t, std::span<const double> x) {
        return std::pow(T - t, 2.0 * q) * std::pow(1.0 + eps * std::sin(k * x[0]), exponent);
    };
    auto dt = [=](double t, std::span<const double> x) {
        return -2.0 * q * std::pow(T - t, 2.0 * q - 1.0) * std::pow(1.0 + eps * std::sin(k * x[0]), exponent);
    };
    std::vector<PointFunction> dx;
    dx.emplace_back([=](double t, std::span<const double> x) {
        const double w = 1.0 + eps * std::sin(k * x[0]);
        return std::pow(T - t, 2.0 * q) * exponent * std::pow(w, exponent - 1.0) * eps * k * std::cos(k * x[0]);
    });
    for (int i = 1; i < n; ++i) dx.emplace_back([](double, std::span<const double>) { return 0.0; });
    const ScalarField f(value, PointFunction(dt), std::move(dx), eps != 0.0);

    MetricSpec m(n, Signature::Lorentzian, ScalarField::constant(0.0), diagonal(n, f), d.domain,
                 TimeWindow{-kInf, T});
    const double nq = n * q;
    CatalogEntry e{"perturbed-flrw", p.resolved(), {}};
    // sqrt(det sigma) carries the factor (1 + eps sin), whose mean is 1, and
    // H = -(1/2) d/dt log det g does not see it.
    e.references[Quantity::MeanCurvature] = [=](std::span<const double> a) { return nq / (T - a[0]); };
    e.references[Quantity::SliceVolume] = crunch_slice(d.volume, T, nq);
    e.references[Quantity::Gamma1] = elapsed();
    if (eps == 0.0) e.references[Quantity::CylinderVolume] = crunch_cylinder(d.volume, T, nq);
    return {std::move(m), std::move(e)};
}

Built perturbed_lapse(const Params& p) {
    const int n = p.dimension();
    const double q = p.positive("q");
    const double T = p.finite("Tplus");
    const double eps = p.finite("epsilon");
    const DomainChoice d = choose_domain(p, n, true);
    const double k = kTwoPi / d.side;

    std::vector<PointFunction> dx;
    dx.emplace_back([=](double, std::span<const double> x) { return eps * k * std::cos(k * x[0]); });
    for (int i = 1; i < n; ++i) dx.emplace_back([](double, std::span<const double>) { return 0.0; });
    const ScalarField psi([=](double, std::span<const double> x) { return eps * std::sin(k * x[0]); },
                          PointFunction([](double, std::span<const double>) { return 0.0; }), std::move(dx),
                          eps != 0.0);

    MetricSpec m(n, Signature::Lorentzian, psi, diagonal(n, power_law(T, q)), d.domain, TimeWindow{-kInf, T});
    const double nq = n * q;
    // The torus mean of e^{a sin(k x1)} is I0(a).
    const double slice_factor = d.volume * std::cyl_bessel_i(0.0, n * eps);
    const double cylinder_factor = d.volume * std::cyl_bessel_i(0.0, (n + 1) * eps);
    CatalogEntry e{"perturbed-lapse", p.resolved(), {}};
    e.references[Quantity::SliceVolume] = crunch_slice(slice_factor, T, nq);
    e.references[Quantity::CylinderVolume] = crunch_cylinder(cylinder_factor, T, nq);
    return {std::move(m), std::move(e)};
}

Built riemannian_exponential(const Params& p, double rate, const char* name) {
    const int n = p.dimension();
    const DomainChoice d = choose_domain(p, n, false);
    const ScalarField f = ScalarField::of_time([rate](double t) { return std::exp(2.0 * rate * t); },
                                               [rate](double t) { return 2.0 * rate * std::exp(2.0 * rate * t); });
    MetricSpec m(n, Signature::Riemannian, ScalarField::constant(0.0), diagonal(n, f), d.domain, TimeWindow{});
    const double v = d.volume;
    CatalogEntry e{name, p.resolved(), {}};
    e.references[Quantity::MeanCurvature] = [=](std::span<const double>) { return rate * n; };
    e.references[Quantity::SliceVolume] = [=](std::span<const double> a) { return v * std::exp(rate * n * a[0]); };
    e.references[Quantity::CylinderVolume] = [=](std::span<const double> a) {
        return v * (std::exp(rate * n * a[1]) - std::exp(rate * n * a[0])) / (rate * n);
    };
    e.references[Quantity::Gamma1] = elapsed();
    return {std::move(m), std::move(e)};
}

const std::vector<Definition>& definitions() {
    static const std::vector<Definition> table = {
        {"conformal-homogeneous",
         "Lorentzian, psi = psi(t) from a formula, sigma = delta",
         with_domain({{"n", 2.0, "spatial dimension"},
                      {"psi", std::string("-t"), "formula in t"},
                      {"tminus", -kInf, "start of the time window"},
                      {"tplus", kInf, "end of the time window"}}),
         conformal_homogeneous},
        {"flrw-crunch",
         "Lorentzian, psi = 0, sigma = (Tplus - t)^(2q) delta; crunch at Tplus",
         with_domain({{"n", 3.0, "spatial dimension"}, {"q", 2.0 / 3.0, "power"}, {"Tplus", 1.0, "crunch time"}}),
         flrw_crunch},
        {"minkowski-strip", "Lorentzian, psi = 0, sigma = delta", with_domain({{"n", 2.0, "spatial dimension"}}),
         minkowski_strip},
        {"perturbed-flrw",
         "flrw-crunch with sigma scaled by (1 + epsilon sin(2 pi x1 / L))^(2/n); torus only",
         with_domain({{"n", 2.0, "spatial dimension"},
                      {"q", 2.0 / 3.0, "power"},
                      {"Tplus", 1.0, "crunch time"},
                      {"epsilon", 0.1, "perturbation amplitude in [0, 1)"}}),
         perturbed_flrw},
        {"perturbed-lapse",
         "flrw-crunch with psi = epsilon sin(2 pi x1 / L); mean curvature varies in x; torus only",
         with_domain({{"n", 2.0, "spatial dimension"},
                      {"q", 2.0 / 3.0, "power"},
                      {"Tplus", 1.0, "crunch time"},
                      {"epsilon", 0.1, "lapse perturbation amplitude"}}),
         perturbed_lapse},
        {"riemannian-cusp", "Riemannian, psi = 0, sigma = exp(-2t) delta; H = -n",
         with_domain({{"n", 2.0, "spatial dimension"}}),
         [](const Params& p) { return riemannian_exponential(p, -1.0, "riemannian-cusp"); }},
        {"riemannian-expanding", "Riemannian, psi = 0, sigma = exp(2t) delta; H = n",
         with_domain({{"n", 2.0, "spatial dimension"}}),
         [](const Params& p) { return riemannian_exponential(p, 1.0, "riemannian-expanding"); }},
    };
    return table;
}

}  // namespace

std::vector<EntryInfo> list() {
    std::vector<EntryInfo> out;
    for (const auto& d : definitions()) out.push_back({d.name, d.description, d.schema});
    return out;
}

Built make(const std::string& name, const ParamMap& params) {
    for (const auto& d : definitions()) {
        if (d.name == name) return d.build(Params(name, d.schema, params));
    }
    std::string known;
    for (const auto& d : definitions()) known += (known.empty() ? "" : ", ") + d.name;
    throw PreconditionError("unknown catalog entry '" + name + "' (known: " + known + ")");
}

std::optional<double> reference(const CatalogEntry& entry, Quantity q, std::span<const double> args) {
    const std::size_t expected = (q == Quantity::MeanCurvature || q == Quantity::SliceVolume) ? 1 : 2;
    if (args.size() != expected) {
        throw PreconditionError(std::string(to_string(q)) + " takes " + std::to_string(expected) + " argument(s)");
    }
    const auto it = entry.references.find(q);
    if (it == entry.references.end()) return std::nullopt;
    return it->second(args);
}

}  // namespace volcheck::catalog
