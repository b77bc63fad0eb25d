#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "scenario.hpp"

namespace mlbgg
{

using json = nlohmann::json;

/// Sweep ranges for the optimization commands.
struct SweepSpec
{
    Count backup_min = 0;
    Count backup_max = 40;
    /// Independent repetitions of the backup sweep (root seeds seed, seed+1, ...).
    std::size_t repeats = 4;
    std::vector<double> alpha_grid;
    std::vector<Count> eta_grid{11, 21, 41};

    friend bool operator==(SweepSpec const&, SweepSpec const&) = default;
};

struct ExperimentConfig
{
    Scenario scenario;
    SweepSpec sweep;
    std::string output_dir = "out";
    std::size_t workers = 1;

    friend bool operator==(ExperimentConfig const&, ExperimentConfig const&) = default;
};

/// Evenly spaced grid start, start + step, ... up to stop (inclusive).
inline std::vector<double> linear_grid(double start, double stop, double step)
{
    if (!(step > 0.0) || stop < start)
    {
        throw ParameterError("invalid grid specification");
    }
    std::vector<double> out;
    auto const n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
    for (std::size_t i = 0; i <= n; ++i)
    {
        // Rounded to 12 decimals so 0.1 * 3 prints as 0.3 in every output.
        out.push_back(std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12);
    }
    return out;
}

/*!
 * Built-in experiment: 41 subordinate networks (eta = 40), reserve sweep
 * 0..40, 1000 trials. The intensities and cost coefficients are
 * illustrative choices; configs/default.json carries the same values.
 */
inline ExperimentConfig default_config()
{
    ExperimentConfig cfg;
    auto& s = cfg.scenario;
    s.seed = 1;
    s.n_trials = 1000;

    Layer1NetworkConfig net;
    net.nodes = 100;
    net.lambda_attacker = 1.05;
    net.lambda_honest = 1.0;
    net.delta = 1.0;
    s.layer1.assign(41, net);

    s.layer0.eta = 40;
    s.layer0.lambda_corrupt = 1.0;
    s.layer0.lambda_genuine = 1.0;
    s.layer0.delta = 1.0;
    s.layer0.alpha = 0.4;

    s.cost.network_values = {100.0};
    s.cost.backup_cost = 0.2;
    s.cost.layer0_value = 1000.0;
    s.cost.alliance_cost = 0.0;
    s.cost.alliance_fixed_cost = 350.0;

    cfg.sweep.alpha_grid = linear_grid(0.0, 1.0, 0.02);
    return cfg;
}

namespace detail
{

/// Strict object reader: every key must be consumed, types are checked, and
/// errors carry the dotted path of the offending field.
class ObjectReader
{
  public:
    ObjectReader(json const& node, std::string path) : node_(node), path_(std::move(path))
    {
        if (!node_.is_object())
        {
            throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
        }
    }

    std::string field(std::string const& key) const
    {
        return path_.empty() ? key : path_ + "." + key;
    }

    bool has(std::string const& key) const { return node_.contains(key); }

    json const& raw(std::string const& key)
    {
        seen_.insert(key);
        return node_.at(key);
    }

    template<class T>
    T get(std::string const& key, T fallback)
    {
        if (!has(key))
        {
            return fallback;
        }
        return convert<T>(raw(key), field(key));
    }

    template<class T>
    std::optional<T> get_optional(std::string const& key)
    {
        if (!has(key) || node_.at(key).is_null())
        {
            seen_.insert(key);
            return std::nullopt;
        }
        return convert<T>(raw(key), field(key));
    }

    ObjectReader child(std::string const& key) { return ObjectReader(raw(key), field(key)); }

    void finish() const
    {
        for (auto const& [key, value] : node_.items())
        {
            if (!seen_.contains(key))
            {
                throw ConfigError(field(key), "unknown key");
            }
        }
    }

    template<class T>
    static T convert(json const& value, std::string const& where)
    {
        if constexpr (std::is_same_v<T, double>)
        {
            if (!value.is_number())
            {
                throw ConfigError(where, "expected a number");
            }
            double const x = value.get<double>();
            if (!std::isfinite(x))
            {
                throw ConfigError(where, "expected a finite number");
            }
            return x;
        }
        else if constexpr (std::is_same_v<T, bool>)
        {
            if (!value.is_boolean())
            {
                throw ConfigError(where, "expected true or false");
            }
            return value.get<bool>();
        }
        else if constexpr (std::is_integral_v<T>)
        {
            if (!value.is_number_integer())
            {
                throw ConfigError(where, "expected an integer");
            }
            if constexpr (std::is_unsigned_v<T>)
            {
                if (value.is_number_unsigned())
                {
                    return value.get<T>();
                }
                if (value.get<std::int64_t>() < 0)
                {
                    throw ConfigError(where, "expected a nonnegative integer");
                }
            }
            return value.get<T>();
        }
        else
        {
            if (!value.is_string())
            {
                throw ConfigError(where, "expected a string");
            }
            return value.get<std::string>();
        }
    }

  private:
    json const& node_;
    std::string path_;
    std::set<std::string> seen_;
};

inline void check(bool ok, std::string const& where, std::string const& message)
{
    if (!ok)
    {
        throw ConfigError(where, message);
    }
}

inline MarkDistribution read_marks(ObjectReader r)
{
    auto const kind = r.get<std::string>("kind", "unit");
    MarkDistribution out;
    if (kind == "unit")
    {
        out = MarkDistribution::unit();
    }
    else if (kind == "poisson")
    {
        double const mean = r.get<double>("mean", 1.0);
        check(mean > 0.0, r.field("mean"), "poisson mark mean must be positive");
        out = MarkDistribution::poisson(mean);
    }
    else if (kind == "geometric")
    {
        double const p = r.get<double>("p", 1.0);
        check(p > 0.0 && p <= 1.0, r.field("p"), "must lie in (0, 1]");
        out = MarkDistribution::geometric(p);
    }
    else
    {
        throw ConfigError(r.field("kind"), "expected one of unit, poisson, geometric");
    }
    r.finish();
    return out;
}

inline json marks_to_json(MarkDistribution const& m)
{
    switch (m.kind)
    {
        case MarkKind::unit:
            return {{"kind", "unit"}};
        case MarkKind::poisson:
            return {{"kind", "poisson"}, {"mean", m.parameter}};
        case MarkKind::geometric:
            return {{"kind", "geometric"}, {"p", m.parameter}};
    }
    return {{"kind", "unit"}};
}

inline Layer1NetworkConfig read_network(ObjectReader r, Layer1NetworkConfig n, ThresholdRule rule)
{
    n.rule = rule;
    n.nodes = r.get<Count>("nodes", n.nodes);
    check(n.nodes >= 1, r.field("nodes"), "must be a positive integer");
    n.lambda_attacker = r.get<double>("lambda_attacker", n.lambda_attacker);
    check(n.lambda_attacker > 0.0, r.field("lambda_attacker"), "must be positive");
    n.lambda_honest = r.get<double>("lambda_honest", n.lambda_honest);
    check(n.lambda_honest > 0.0, r.field("lambda_honest"), "must be positive");
    if (r.has("attacker_marks"))
    {
        n.attacker_marks = read_marks(r.child("attacker_marks"));
    }
    if (r.has("honest_marks"))
    {
        n.honest_marks = read_marks(r.child("honest_marks"));
    }
    n.initial_attacker = r.get<Count>("initial_attacker", n.initial_attacker);
    check(n.initial_attacker >= 0, r.field("initial_attacker"), "must be nonnegative");
    n.initial_honest = r.get<Count>("initial_honest", n.initial_honest);
    check(n.initial_honest >= 0, r.field("initial_honest"), "must be nonnegative");
    check(n.initial_attacker + n.initial_honest <= n.nodes, r.field("initial_honest"),
          "initial captures exceed the node count");
    n.delta = r.get<double>("delta", n.delta);
    check(n.delta > 0.0, r.field("delta"), "must be positive");
    if (r.has("tau0"))
    {
        n.tau0 = r.get_optional<double>("tau0");
    }
    check(!n.tau0 || *n.tau0 > 0.0, r.field("tau0"), "must be positive");
    if (r.has("max_epochs"))
    {
        n.max_epochs = r.get_optional<std::size_t>("max_epochs");
    }
    check(!n.max_epochs || *n.max_epochs >= 1, r.field("max_epochs"), "must be at least 1");
    r.finish();
    return n;
}

inline json network_to_json(Layer1NetworkConfig const& n)
{
    json out = {{"nodes", n.nodes},
                {"lambda_attacker", n.lambda_attacker},
                {"lambda_honest", n.lambda_honest},
                {"attacker_marks", marks_to_json(n.attacker_marks)},
                {"honest_marks", marks_to_json(n.honest_marks)},
                {"initial_attacker", n.initial_attacker},
                {"initial_honest", n.initial_honest},
                {"delta", n.delta}};
    if (n.tau0)
    {
        out["tau0"] = *n.tau0;
    }
    if (n.max_epochs)
    {
        out["max_epochs"] = *n.max_epochs;
    }
    return out;
}

inline Layer0Config read_layer0(ObjectReader r, Layer0Config c, ThresholdRule rule,
                                R1Variant variant)
{
    c.rule = rule;
    c.r1_variant = variant;
    c.eta = r.get<Count>("eta", c.eta);
    check(c.eta >= 1, r.field("eta"), "must be a positive integer");
    c.lambda_corrupt = r.get<double>("lambda_corrupt", c.lambda_corrupt);
    check(c.lambda_corrupt > 0.0, r.field("lambda_corrupt"), "must be positive");
    c.lambda_genuine = r.get<double>("lambda_genuine", c.lambda_genuine);
    check(c.lambda_genuine > 0.0, r.field("lambda_genuine"), "must be positive");
    if (r.has("corrupt_marks"))
    {
        c.corrupt_marks = read_marks(r.child("corrupt_marks"));
    }
    if (r.has("genuine_marks"))
    {
        c.genuine_marks = read_marks(r.child("genuine_marks"));
    }
    c.initial_corrupt = r.get<Count>("initial_corrupt", c.initial_corrupt);
    check(c.initial_corrupt >= 0, r.field("initial_corrupt"), "must be nonnegative");
    c.initial_genuine = r.get<Count>("initial_genuine", c.initial_genuine);
    check(c.initial_genuine >= 0, r.field("initial_genuine"), "must be nonnegative");
    c.delta = r.get<double>("delta", c.delta);
    check(c.delta > 0.0, r.field("delta"), "must be positive");
    if (r.has("tau0"))
    {
        c.tau0 = r.get_optional<double>("tau0");
    }
    check(!c.tau0 || *c.tau0 > 0.0, r.field("tau0"), "must be positive");
    if (r.has("max_epochs"))
    {
        c.max_epochs = r.get_optional<std::size_t>("max_epochs");
    }
    check(!c.max_epochs || *c.max_epochs >= 1, r.field("max_epochs"), "must be at least 1");
    c.alpha = r.get<double>("alpha", c.alpha);
    check(c.alpha >= 0.0 && c.alpha <= 1.0, r.field("alpha"), "must lie in [0, 1]");
    r.finish();
    return c;
}

inline json layer0_to_json(Layer0Config const& c)
{
    json out = {{"eta", c.eta},
                {"lambda_corrupt", c.lambda_corrupt},
                {"lambda_genuine", c.lambda_genuine},
                {"corrupt_marks", marks_to_json(c.corrupt_marks)},
                {"genuine_marks", marks_to_json(c.genuine_marks)},
                {"initial_corrupt", c.initial_corrupt},
                {"initial_genuine", c.initial_genuine},
                {"delta", c.delta},
                {"alpha", c.alpha}};
    if (c.tau0)
    {
        out["tau0"] = *c.tau0;
    }
    if (c.max_epochs)
    {
        out["max_epochs"] = *c.max_epochs;
    }
    return out;
}

} // namespace detail

/// Parse and validate an experiment document. Defaults fill absent keys.
inline ExperimentConfig config_from_json(json const& doc)
{
    using detail::check;
    detail::ObjectReader root(doc, "");
    ExperimentConfig cfg = default_config();
    auto& s = cfg.scenario;
    auto const base_network = s.layer1.front();

    s.seed = root.get<std::uint64_t>("seed", s.seed);
    s.n_trials = root.get<std::size_t>("trials", s.n_trials);
    check(s.n_trials >= 1, "trials", "must be at least 1");
    cfg.workers = root.get<std::size_t>("workers", cfg.workers);
    check(cfg.workers >= 1, "workers", "must be at least 1");

    ThresholdRule rule = ThresholdRule::paper_geq_half;
    R1Variant variant = R1Variant::threshold_scaled;
    try
    {
        rule = parse_threshold_rule(root.get<std::string>("threshold_rule", "paper-geq-half"));
    }
    catch (ParameterError const& e)
    {
        throw ConfigError("threshold_rule", e.what());
    }
    try
    {
        variant = parse_r1_variant(root.get<std::string>("r1_variant", "threshold-scaled"));
    }
    catch (ParameterError const& e)
    {
        throw ConfigError("r1_variant", e.what());
    }

    if (root.has("layer1"))
    {
        auto l1 = root.child("layer1");
        auto const eta = l1.get<Count>("eta", s.eta());
        check(eta >= 1, l1.field("eta"), "must be at least 1");
        check(l1.has("network") != l1.has("networks"), l1.field("network"),
              "give exactly one of 'network' (template) or 'networks' (list)");
        if (l1.has("network"))
        {
            auto const tmpl = detail::read_network(l1.child("network"), base_network, rule);
            s.layer1.assign(static_cast<std::size_t>(eta) + 1, tmpl);
        }
        else
        {
            auto const& list = l1.raw("networks");
            check(list.is_array(), l1.field("networks"), "expected an array");
            check(list.size() == static_cast<std::size_t>(eta) + 1, l1.field("networks"),
                  "expected eta + 1 = " + std::to_string(eta + 1) + " entries");
            s.layer1.clear();
            for (std::size_t i = 0; i < list.size(); ++i)
            {
                s.layer1.push_back(detail::read_network(
                    detail::ObjectReader(list[i], l1.field("networks") + "[" + std::to_string(i) + "]"),
                    base_network, rule));
            }
        }
        l1.finish();
    }
    for (auto& net : s.layer1)
    {
        net.rule = rule;
    }

    if (root.has("layer0"))
    {
        s.layer0 = detail::read_layer0(root.child("layer0"), s.layer0, rule, variant);
    }
    s.layer0.rule = rule;
    s.layer0.r1_variant = variant;

    if (root.has("cost"))
    {
        auto c = root.child("cost");
        if (c.has("network_value"))
        {
            auto const& v = c.raw("network_value");
            s.cost.network_values.clear();
            if (v.is_array())
            {
                for (std::size_t i = 0; i < v.size(); ++i)
                {
                    auto const where = c.field("network_value") + "[" + std::to_string(i) + "]";
                    double const x = detail::ObjectReader::convert<double>(v[i], where);
                    check(x >= 0.0, where, "must be nonnegative");
                    s.cost.network_values.push_back(x);
                }
                check(s.cost.network_values.size() == s.layer1.size(), c.field("network_value"),
                      "expected one value per subordinate network");
            }
            else
            {
                double const x = detail::ObjectReader::convert<double>(v, c.field("network_value"));
                check(x >= 0.0, c.field("network_value"), "must be nonnegative");
                s.cost.network_values.push_back(x);
            }
        }
        for (auto [key, slot] : {std::pair{"layer0_value", &s.cost.layer0_value},
                                 std::pair{"backup_cost", &s.cost.backup_cost},
                                 std::pair{"alliance_cost", &s.cost.alliance_cost},
                                 std::pair{"alliance_fixed_cost", &s.cost.alliance_fixed_cost}})
        {
            *slot = c.get<double>(key, *slot);
            check(*slot >= 0.0, c.field(key), "must be nonnegative");
        }
        c.finish();
    }

    if (root.has("sweep"))
    {
        auto w = root.child("sweep");
        auto& sw = cfg.sweep;
        sw.backup_min = w.get<Count>("backup_min", sw.backup_min);
        sw.backup_max = w.get<Count>("backup_max", sw.backup_max);
        check(sw.backup_min >= 0, w.field("backup_min"), "must be nonnegative");
        check(sw.backup_max >= sw.backup_min, w.field("backup_max"), "must be >= backup_min");
        sw.repeats = w.get<std::size_t>("repeats", sw.repeats);
        check(sw.repeats >= 1, w.field("repeats"), "must be at least 1");
        if (w.has("alpha_grid"))
        {
            auto const& g = w.raw("alpha_grid");
            auto const where = w.field("alpha_grid");
            sw.alpha_grid.clear();
            if (g.is_object())
            {
                detail::ObjectReader gr(g, where);
                double const start = gr.get<double>("start", 0.0);
                double const stop = gr.get<double>("stop", 1.0);
                double const step = gr.get<double>("step", 0.05);
                gr.finish();
                check(step > 0.0 && stop >= start, where, "need step > 0 and stop >= start");
                sw.alpha_grid = linear_grid(start, stop, step);
            }
            else
            {
                check(g.is_array() && !g.empty(), where, "expected a nonempty array or {start, stop, step}");
                for (std::size_t i = 0; i < g.size(); ++i)
                {
                    sw.alpha_grid.push_back(detail::ObjectReader::convert<double>(
                        g[i], where + "[" + std::to_string(i) + "]"));
                }
            }
            for (std::size_t i = 0; i < sw.alpha_grid.size(); ++i)
            {
                auto const at = where + "[" + std::to_string(i) + "]";
                check(sw.alpha_grid[i] >= 0.0 && sw.alpha_grid[i] <= 1.0, at, "must lie in [0, 1]");
                check(i == 0 || sw.alpha_grid[i] > sw.alpha_grid[i - 1], at,
                      "grid must be strictly ascending");
            }
        }
        if (w.has("eta_grid"))
        {
            auto const& g = w.raw("eta_grid");
            auto const where = w.field("eta_grid");
            check(g.is_array() && !g.empty(), where, "expected a nonempty array");
            sw.eta_grid.clear();
            for (std::size_t i = 0; i < g.size(); ++i)
            {
                auto const at = where + "[" + std::to_string(i) + "]";
                auto const e = detail::ObjectReader::convert<Count>(g[i], at);
                check(e >= 1, at, "must be a positive integer");
                check(i == 0 || e > sw.eta_grid.back(), at, "grid must be strictly ascending");
                sw.eta_grid.push_back(e);
            }
        }
        w.finish();
    }
    if (cfg.sweep.alpha_grid.empty())
    {
        cfg.sweep.alpha_grid = linear_grid(0.0, 1.0, 0.02);
    }

    if (root.has("output"))
    {
        auto o = root.child("output");
        cfg.output_dir = o.get<std::string>("dir", cfg.output_dir);
        o.finish();
    }
    root.finish();

    try
    {
        s.validate();
    }
    catch (ParameterError const& e)
    {
        throw ConfigError("scenario", e.what());
    }
    return cfg;
}

/// Canonical scenario document: the basis of the config fingerprint.
inline json scenario_to_json(Scenario const& s)
{
    ThresholdRule const rule = s.layer0.rule;
    json out = {{"seed", s.seed},
                {"trials", s.n_trials},
                {"threshold_rule", std::string(to_string(rule))},
                {"r1_variant", std::string(to_string(s.layer0.r1_variant))}};
    json l1 = {{"eta", s.eta()}};
    bool const uniform = std::all_of(s.layer1.begin(), s.layer1.end(),
                                     [&](auto const& n) { return n == s.layer1.front(); });
    if (uniform)
    {
        l1["network"] = detail::network_to_json(s.layer1.front());
    }
    else
    {
        json list = json::array();
        for (auto const& n : s.layer1)
        {
            list.push_back(detail::network_to_json(n));
        }
        l1["networks"] = std::move(list);
    }
    out["layer1"] = std::move(l1);
    out["layer0"] = detail::layer0_to_json(s.layer0);
    json cost = {{"layer0_value", s.cost.layer0_value},
                 {"backup_cost", s.cost.backup_cost},
                 {"alliance_cost", s.cost.alliance_cost},
                 {"alliance_fixed_cost", s.cost.alliance_fixed_cost}};
    if (s.cost.network_values.size() == 1)
    {
        cost["network_value"] = s.cost.network_values.front();
    }
    else
    {
        cost["network_value"] = s.cost.network_values;
    }
    out["cost"] = std::move(cost);
    return out;
}

inline json config_to_json(ExperimentConfig const& cfg)
{
    json out = scenario_to_json(cfg.scenario);
    out["workers"] = cfg.workers;
    out["sweep"] = {{"backup_min", cfg.sweep.backup_min},
                    {"backup_max", cfg.sweep.backup_max},
                    {"repeats", cfg.sweep.repeats},
                    {"alpha_grid", cfg.sweep.alpha_grid},
                    {"eta_grid", cfg.sweep.eta_grid}};
    out["output"] = {{"dir", cfg.output_dir}};
    return out;
}

/// FNV-1a over the canonical scenario dump, as 16 hex digits.
inline std::string fingerprint(Scenario const& s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char const c : scenario_to_json(s).dump())
    {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

inline ExperimentConfig parse_config(std::string const& text)
{
    json doc;
    try
    {
        doc = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    }
    catch (json::parse_error const& e)
    {
        throw ConfigError("", std::string("malformed config: ") + e.what());
    }
    return config_from_json(doc);
}

inline ExperimentConfig load_config(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw ConfigError("", "cannot read config file " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

} // namespace mlbgg
