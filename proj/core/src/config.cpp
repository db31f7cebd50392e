#include "kmsorder/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace kmsorder {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool is_identifier(const std::string& s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isalnum(c) || c == '_' || c == '-'; });
}

std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    std::istringstream in(s);
    in.imbue(std::locale::classic());
    double v;
    in >> v;
    if (in.fail()) return std::nullopt;
    in >> std::ws;
    if (!in.eof()) return std::nullopt;
    return v;
}

struct Scalar {
    bool is_number;
    double number;
    std::string text;
};

Scalar parse_scalar(const std::string& raw, int line, const std::string& field) {
    const auto s = trim(raw);
    if (s.empty()) throw ConfigError("empty value", line, field);
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"') throw ConfigError("unterminated string", line, field);
        return {false, 0.0, s.substr(1, s.size() - 2)};
    }
    if (auto v = parse_number(s)) return {true, *v, {}};
    if (!is_identifier(s)) throw ConfigError("cannot parse value '" + s + "'", line, field);
    return {false, 0.0, s};
}

std::vector<std::string> split_array(const std::string& body) {
    std::vector<std::string> items;
    std::string cur;
    bool quoted = false;
    for (char c : body) {
        if (c == '"') quoted = !quoted;
        if (c == ',' && !quoted) {
            items.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty() || !items.empty()) items.push_back(cur);
    return items;
}

ConfigValue parse_value(const std::string& raw, int line, const std::string& field) {
    const auto s = trim(raw);
    if (s == "true") return true;
    if (s == "false") return false;
    if (!s.empty() && s.front() == '[') {
        if (s.back() != ']') throw ConfigError("unterminated array", line, field);
        const auto items = split_array(s.substr(1, s.size() - 2));
        std::vector<double> nums;
        std::vector<std::string> strs;
        for (const auto& it : items) {
            const auto sc = parse_scalar(it, line, field);
            if (sc.is_number)
                nums.push_back(sc.number);
            else
                strs.push_back(sc.text);
        }
        if (!nums.empty() && !strs.empty())
            throw ConfigError("array mixes numbers and strings", line, field);
        if (!strs.empty()) return strs;
        return nums;
    }
    const auto sc = parse_scalar(s, line, field);
    if (sc.is_number) return sc.number;
    return sc.text;
}

std::string field_name(const std::string& section, const std::string& key) {
    return section + "." + key;
}

const char* type_name(const ConfigValue& v) {
    switch (v.index()) {
        case 0: return "number";
        case 1: return "boolean";
        case 2: return "string";
        case 3: return "number array";
        default: return "string array";
    }
}

}  // namespace

ConfigError::ConfigError(const std::string& message, int line, std::string field)
    : InvalidInput("config" + (line > 0 ? ":" + std::to_string(line) : std::string()) +
                   (field.empty() ? std::string() : ": " + field) + ": " + message),
      line_(line),
      field_(std::move(field)) {}

ConfigFile ConfigFile::parse(const std::string& text) {
    ConfigFile cfg;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto s = trim(strip_comment(raw));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError("malformed section header", line, "");
            section = trim(s.substr(1, s.size() - 2));
            if (!is_identifier(section)) throw ConfigError("invalid section name", line, section);
            if (cfg.sections_.count(section))
                throw ConfigError("duplicate section", line, section);
            cfg.sections_[section].line = line;
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line, "");
        const auto key = trim(s.substr(0, eq));
        if (!is_identifier(key)) throw ConfigError("invalid key", line, key);
        if (section.empty()) throw ConfigError("key outside any section", line, key);
        const auto field = field_name(section, key);
        auto& sec = cfg.sections_[section];
        if (sec.entries.count(key)) throw ConfigError("duplicate key", line, field);
        sec.entries[key] = {parse_value(s.substr(eq + 1), line, field), line};
        sec.order.push_back(key);
    }
    return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'", 0, "");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    const auto it = sections_.find(section);
    return it != sections_.end() && it->second.entries.count(key) != 0;
}

std::vector<std::string> ConfigFile::keys(const std::string& section) const {
    const auto it = sections_.find(section);
    if (it == sections_.end()) return {};
    return it->second.order;
}

const ConfigEntry& ConfigFile::entry(const std::string& section, const std::string& key) const {
    const auto it = sections_.find(section);
    if (it == sections_.end() || !it->second.entries.count(key))
        throw ConfigError("missing required key", 0, field_name(section, key));
    used_.insert(field_name(section, key));
    return it->second.entries.at(key);
}

std::optional<double> ConfigFile::number(const std::string& section, const std::string& key) const {
    if (!has(section, key)) return std::nullopt;
    const auto& e = entry(section, key);
    if (const auto* v = std::get_if<double>(&e.value)) return *v;
    throw ConfigError(std::string("expected a number, found ") + type_name(e.value), e.line,
                      field_name(section, key));
}

double ConfigFile::number(const std::string& section, const std::string& key, double fallback) const {
    return number(section, key).value_or(fallback);
}

bool ConfigFile::boolean(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    const auto& e = entry(section, key);
    if (const auto* v = std::get_if<bool>(&e.value)) return *v;
    throw ConfigError(std::string("expected true/false, found ") + type_name(e.value), e.line,
                      field_name(section, key));
}

std::string ConfigFile::string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
    if (!has(section, key)) return fallback;
    const auto& e = entry(section, key);
    if (const auto* v = std::get_if<std::string>(&e.value)) return *v;
    throw ConfigError(std::string("expected a string, found ") + type_name(e.value), e.line,
                      field_name(section, key));
}

std::vector<double> ConfigFile::numbers(const std::string& section, const std::string& key,
                                        const std::vector<double>& fallback) const {
    if (!has(section, key)) return fallback;
    const auto& e = entry(section, key);
    if (const auto* v = std::get_if<std::vector<double>>(&e.value)) return *v;
    if (const auto* v = std::get_if<double>(&e.value)) return {*v};
    throw ConfigError(std::string("expected a number array, found ") + type_name(e.value), e.line,
                      field_name(section, key));
}

void ConfigFile::reject_unused() const {
    for (const auto& [name, sec] : sections_)
        for (const auto& key : sec.order)
            if (!used_.count(field_name(name, key)))
                throw ConfigError("unknown key", sec.entries.at(key).line, field_name(name, key));
}

// ------------------------------------------------------------------- specs

SpectralModel ModelSpec::build() const {
    if (beta && acceleration)
        throw ConfigError("give either beta or acceleration, not both", 0, "model.beta");
    auto resolve_beta = [&]() {
        if (acceleration) return unruh_beta(*acceleration);
        if (beta) return *beta;
        return 1.0;
    };
    const ModelTag t = model_tag_from_string(tag);
    SpectralModel m = [&]() {
        switch (t) {
            case ModelTag::accelerated_massless_3p1:
                return SpectralModel::accelerated_massless(2.0 * std::numbers::pi / resolve_beta(),
                                                           lambda_uv);
            case ModelTag::flat_ohmic:
                return SpectralModel::flat_ohmic(resolve_beta(), lambda_uv);
            case ModelTag::discrete_modes: {
                if (mode_frequencies.size() != mode_weights.size())
                    throw ConfigError("mode_frequencies and mode_weights differ in length", 0,
                                      "model.mode_weights");
                DiscreteModeSet set;
                set.beta = resolve_beta();
                for (std::size_t k = 0; k < mode_frequencies.size(); ++k)
                    set.modes.push_back({mode_frequencies[k], mode_weights[k]});
                return SpectralModel::discrete(set);
            }
            case ModelTag::custom: break;
        }
        throw ConfigError("model tag 'custom' cannot be built from a config file", 0, "model.tag");
    }();
    if (detailed_balance_defect != 0.0) m = m.with_detailed_balance_defect(detailed_balance_defect);
    return m;
}

Observable observable_from_name(const std::string& name) {
    if (name == "x") return Observable::x();
    if (name == "y") return Observable::y();
    if (name == "z") return Observable::z();
    if (name == "identity" || name == "i") return Observable::identity();
    throw InvalidInput("unknown observable '" + name + "' (expected x, y, z or identity)");
}

Leg LegSpec::build() const {
    return {observable_from_name(observable),
            SwitchingFunction(switching_shape_from_string(shape), center, half_width, amplitude)};
}

Protocol ProtocolSpec::build() const { return {first.build(), second.build(), lambda}; }

const std::vector<std::string>& sweepable_parameters() {
    static const std::vector<std::string> names{
        "beta",          "acceleration",       "lambda",           "lambda_uv",
        "first_center",  "first_half_width",   "first_amplitude",  "first_shape",
        "second_center", "second_half_width",  "second_amplitude", "second_shape"};
    return names;
}

void apply_sweep_value(RunConfig& cfg, const SweepAxis& axis, std::size_t i) {
    const auto& n = axis.name;
    auto num = [&]() { return axis.values.at(i); };
    if (n == "beta") {
        cfg.model.beta = num();
        cfg.model.acceleration.reset();
    } else if (n == "acceleration") {
        cfg.model.acceleration = num();
        cfg.model.beta.reset();
    } else if (n == "lambda") cfg.protocol.lambda = num();
    else if (n == "lambda_uv") cfg.model.lambda_uv = num();
    else if (n == "first_center") cfg.protocol.first.center = num();
    else if (n == "first_half_width") cfg.protocol.first.half_width = num();
    else if (n == "first_amplitude") cfg.protocol.first.amplitude = num();
    else if (n == "first_shape") cfg.protocol.first.shape = axis.labels.at(i);
    else if (n == "second_center") cfg.protocol.second.center = num();
    else if (n == "second_half_width") cfg.protocol.second.half_width = num();
    else if (n == "second_amplitude") cfg.protocol.second.amplitude = num();
    else if (n == "second_shape") cfg.protocol.second.shape = axis.labels.at(i);
    else throw InvalidInput("unknown sweep parameter '" + n + "'");
}

std::vector<std::vector<std::size_t>> sweep_points(const std::vector<SweepAxis>& axes) {
    std::vector<std::vector<std::size_t>> pts{{}};
    for (const auto& ax : axes) {
        std::vector<std::vector<std::size_t>> next;
        for (const auto& p : pts)
            for (std::size_t i = 0; i < ax.size(); ++i) {
                auto q = p;
                q.push_back(i);
                next.push_back(std::move(q));
            }
        pts = std::move(next);
    }
    return pts;
}

RunConfig RunConfig::from_file(const ConfigFile& f) {
    RunConfig c;
    c.output_dir = f.string("run", "output_dir", c.output_dir);
    if (auto s = f.number("run", "seed")) {
        if (*s < 0 || std::floor(*s) != *s)
            throw ConfigError("seed must be a non-negative integer", f.entry("run", "seed").line, "run.seed");
        c.seed = static_cast<std::uint64_t>(*s);
    }
    if (auto w = f.number("run", "workers")) {
        if (*w < 0 || std::floor(*w) != *w)
            throw ConfigError("workers must be a non-negative integer", f.entry("run", "workers").line,
                              "run.workers");
        c.workers = static_cast<int>(*w);
    }

    const auto b = f.numbers("detector", "bloch", {c.bloch[0], c.bloch[1], c.bloch[2]});
    if (b.size() != 3) throw ConfigError("bloch needs three components", f.entry("detector", "bloch").line, "detector.bloch");
    c.bloch = {b[0], b[1], b[2]};

    auto& m = c.model;
    m.tag = f.string("model", "tag", m.tag);
    m.beta = f.number("model", "beta");
    m.acceleration = f.number("model", "acceleration");
    if (m.beta && m.acceleration)
        throw ConfigError("give either beta or acceleration, not both", f.entry("model", "acceleration").line,
                          "model.acceleration");
    m.lambda_uv = f.number("model", "lambda_uv", m.lambda_uv);
    m.mode_frequencies = f.numbers("model", "mode_frequencies", m.mode_frequencies);
    m.mode_weights = f.numbers("model", "mode_weights", m.mode_weights);
    m.detailed_balance_defect = f.number("model", "test_corrupt_detailed_balance", 0.0);

    auto leg = [&](const std::string& prefix, LegSpec& l) {
        l.observable = f.string("protocol", prefix + "_observable", l.observable);
        l.shape = f.string("protocol", prefix + "_shape", l.shape);
        l.center = f.number("protocol", prefix + "_center", l.center);
        l.half_width = f.number("protocol", prefix + "_half_width", l.half_width);
        l.amplitude = f.number("protocol", prefix + "_amplitude", l.amplitude);
    };
    leg("first", c.protocol.first);
    leg("second", c.protocol.second);
    c.protocol.lambda = f.number("protocol", "lambda", c.protocol.lambda);

    const auto& allowed = sweepable_parameters();
    for (const auto& key : f.keys("sweep")) {
        const auto& e = f.entry("sweep", key);
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError("unknown sweep parameter", e.line, "sweep." + key);
        SweepAxis ax{key, {}, {}};
        if (const auto* v = std::get_if<std::vector<double>>(&e.value)) ax.values = *v;
        else if (const auto* v = std::get_if<double>(&e.value)) ax.values = {*v};
        else if (const auto* v = std::get_if<std::vector<std::string>>(&e.value)) ax.labels = *v;
        else if (const auto* v = std::get_if<std::string>(&e.value)) ax.labels = {*v};
        else throw ConfigError("sweep axis must be an array", e.line, "sweep." + key);
        const bool wants_labels = key.ends_with("_shape");
        if (wants_labels != !ax.labels.empty() && ax.size() > 0)
            throw ConfigError(wants_labels ? "expected shape names" : "expected numbers", e.line,
                              "sweep." + key);
        if (ax.size() == 0) continue;  // an empty axis leaves the base value
        c.sweep.push_back(std::move(ax));
    }

    c.asymmetry.tolerance = f.number("asymmetry", "tolerance", c.asymmetry.tolerance);
    c.asymmetry.quadrature.abs = f.number("asymmetry", "quad_abs_tol", c.asymmetry.quadrature.abs);
    c.asymmetry.quadrature.rel = f.number("asymmetry", "quad_rel_tol", c.asymmetry.quadrature.rel);

    auto& o = c.oracle;
    o.n_max = static_cast<int>(f.number("oracle", "n_max", o.n_max));
    o.refine_n_max = static_cast<int>(f.number("oracle", "refine_n_max", o.refine_n_max));
    o.step = f.number("oracle", "step", o.step);
    if (f.has("oracle", "lambdas")) {
        o.lambdas = f.numbers("oracle", "lambdas", {});
    } else if (f.has("oracle", "lambda_min") || f.has("oracle", "lambda_max") ||
               f.has("oracle", "lambda_points")) {
        const double lo = f.number("oracle", "lambda_min", 0.01);
        const double hi = f.number("oracle", "lambda_max", 0.3);
        const double n = f.number("oracle", "lambda_points", 8);
        if (!(n >= 1) || std::floor(n) != n)
            throw ConfigError("lambda_points must be a positive integer", f.entry("oracle", "lambda_points").line,
                              "oracle.lambda_points");
        o.lambdas = EvolutionSpec::geometric_grid(lo, hi, static_cast<std::size_t>(n));
    }
    o.leakage_threshold = f.number("oracle", "leakage_threshold", o.leakage_threshold);
    o.min_slope = f.number("oracle", "min_slope", o.min_slope);
    o.min_r2 = f.number("oracle", "min_r2", o.min_r2);
    o.max_slope_shift = f.number("oracle", "max_slope_shift", o.max_slope_shift);

    auto& g = c.geometry;
    if (f.has("geometry", "s_values")) {
        g.s_values = f.numbers("geometry", "s_values", {});
    } else {
        const double lo = f.number("geometry", "s_min", 0.0);
        const double hi = f.number("geometry", "s_max", 5.0);
        const double step = f.number("geometry", "s_step", 0.1);
        if (!(step > 0.0) || hi < lo)
            throw ConfigError("need s_step > 0 and s_max ≥ s_min", 0, "geometry.s_step");
        const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
        for (std::size_t i = 0; i <= n; ++i) g.s_values.push_back(lo + step * double(i));
    }
    g.entropy_tolerance = f.number("geometry", "entropy_tolerance", g.entropy_tolerance);
    g.metric_tolerance = f.number("geometry", "metric_tolerance", g.metric_tolerance);

    auto& k = c.kms;
    if (f.has("kms", "times")) {
        k.times = f.numbers("kms", "times", {});
    } else {
        const double lo = f.number("kms", "t_min", -3.0);
        const double hi = f.number("kms", "t_max", 3.0);
        const auto n = static_cast<std::size_t>(f.number("kms", "t_points", 25));
        for (std::size_t i = 0; i < n; ++i)
            k.times.push_back(n == 1 ? lo : lo + (hi - lo) * double(i) / double(n - 1));
    }
    if (f.has("kms", "omegas")) {
        k.omegas = f.numbers("kms", "omegas", {});
    } else {
        const double reach = f.number("kms", "omega_max", 10.0 * c.model.lambda_uv);
        const auto n = static_cast<std::size_t>(f.number("kms", "omega_points", 200));
        for (std::size_t i = 0; i < n; ++i)
            k.omegas.push_back(n == 1 ? reach : -reach + 2.0 * reach * double(i) / double(n - 1));
    }
    k.balance_tolerance = f.number("kms", "balance_tolerance", k.balance_tolerance);
    k.time_tolerance = f.number("kms", "time_tolerance");

    f.reject_unused();

    for (const auto& [field, value] :
         {std::pair{"asymmetry.tolerance", c.asymmetry.tolerance},
          std::pair{"asymmetry.quad_abs_tol", c.asymmetry.quadrature.abs},
          std::pair{"asymmetry.quad_rel_tol", c.asymmetry.quadrature.rel},
          std::pair{"geometry.entropy_tolerance", g.entropy_tolerance},
          std::pair{"geometry.metric_tolerance", g.metric_tolerance},
          std::pair{"kms.balance_tolerance", k.balance_tolerance},
          std::pair{"oracle.leakage_threshold", o.leakage_threshold}})
        if (!(value > 0.0)) throw ConfigError("tolerances must be positive", 0, field);
    if (k.time_tolerance && !(*k.time_tolerance > 0.0))
        throw ConfigError("tolerances must be positive", 0, "kms.time_tolerance");
    return c;
}

RunConfig RunConfig::load(const std::string& path) {
    return from_file(ConfigFile::load(path));
}

void RunConfig::scale_tolerances(double scale) {
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw InvalidInput("tolerance scale must be positive");
    asymmetry.tolerance *= scale;
    geometry.entropy_tolerance *= scale;
    geometry.metric_tolerance *= scale;
    kms.balance_tolerance *= scale;
    if (kms.time_tolerance) *kms.time_tolerance *= scale;
    kms.default_scale *= scale;
    oracle.max_slope_shift *= scale;
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace kmsorder
