// config.hpp: Run configuration: a flat-section key/value text format
//
//   # comment
//   [model]
//   tag = "flat_ohmic"
//   beta = 2.0
//   mode_frequencies = [2.0, 3.5]
//
// Values are numbers, true/false, quoted strings (bare words are accepted as
// strings too) or single-line arrays of numbers or strings. Every error
// names the line and the section.key it concerns.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "kmsorder/error.hpp"
#include "kmsorder/geometry.hpp"
#include "kmsorder/oracle.hpp"
#include "kmsorder/perturbative.hpp"
#include "kmsorder/spectral.hpp"
#include "kmsorder/switching.hpp"

namespace kmsorder {

class ConfigError : public InvalidInput {
public:
    ConfigError(const std::string& message, int line, std::string field);
    int line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    int line_;
    std::string field_;
};

using ConfigValue =
    std::variant<double, bool, std::string, std::vector<double>, std::vector<std::string>>;

struct ConfigEntry {
    ConfigValue value;
    int line = 0;
};

class ConfigFile {
public:
    static ConfigFile parse(const std::string& text);
    static ConfigFile load(const std::string& path);

    bool has(const std::string& section, const std::string& key) const;
    bool has_section(const std::string& section) const { return sections_.count(section) != 0; }
    // Keys of a section in file order.
    std::vector<std::string> keys(const std::string& section) const;
    const ConfigEntry& entry(const std::string& section, const std::string& key) const;

    double number(const std::string& section, const std::string& key, double fallback) const;
    std::optional<double> number(const std::string& section, const std::string& key) const;
    bool boolean(const std::string& section, const std::string& key, bool fallback) const;
    std::string string(const std::string& section, const std::string& key,
                       const std::string& fallback) const;
    std::vector<double> numbers(const std::string& section, const std::string& key,
                                const std::vector<double>& fallback) const;

    // Throws ConfigError for the first key that no accessor asked for.
    void reject_unused() const;

private:
    struct Section {
        std::map<std::string, ConfigEntry> entries;
        std::vector<std::string> order;
        int line = 0;
    };
    std::map<std::string, Section> sections_;
    mutable std::set<std::string> used_;
};

struct ModelSpec {
    std::string tag = "flat_ohmic";
    std::optional<double> beta;
    std::optional<double> acceleration;
    double lambda_uv = 5.0;
    std::vector<double> mode_frequencies;
    std::vector<double> mode_weights;  // couplings g_k
    double detailed_balance_defect = 0.0;

    SpectralModel build() const;
};

struct LegSpec {
    std::string observable = "x";
    std::string shape = "cosine_bump";
    double center = -2.0;
    double half_width = 1.0;
    double amplitude = 1.0;

    Leg build() const;
};

struct ProtocolSpec {
    LegSpec first;
    LegSpec second{"y", "cosine_bump", 2.0, 1.0, 1.0};
    double lambda = 0.05;

    Protocol build() const;
};

struct SweepAxis {
    std::string name;
    std::vector<double> values;
    std::vector<std::string> labels;  // for the shape axes
    std::size_t size() const { return labels.empty() ? values.size() : labels.size(); }
};

struct AsymmetrySpec {
    double tolerance = 1e-6;  // pairwise relative agreement of c
    Tolerance quadrature = kAsymmetryTolerance;
};

struct OracleSpec {
    int n_max = 10;
    int refine_n_max = 12;  // 0 disables the refinement rerun
    double step = 1e-3;
    std::vector<double> lambdas = EvolutionSpec::geometric_grid(0.01, 0.3, 8);
    double leakage_threshold = 1e-6;
    double min_slope = kMinScalingSlope;
    double min_r2 = kMinScalingR2;
    double max_slope_shift = 0.05;
};

struct GeometrySpec {
    std::vector<double> s_values;  // default 0, 0.1, …, 5
    double entropy_tolerance = 1e-12;
    double metric_tolerance = kMetricTolerance;
};

struct KmsSpec {
    std::vector<double> times;   // default 25 points on [−3, 3]
    std::vector<double> omegas;  // default 200 points on [−10Λ, 10Λ] (ω = 0 skipped)
    double balance_tolerance = 1e-12;
    std::optional<double> time_tolerance;  // default 1e-6 continuum, 1e-10 discrete
    double default_scale = 1.0;            // applied to the default time tolerance
};

struct RunConfig {
    std::string output_dir = "out";
    std::uint64_t seed = 12345;
    int workers = 0;
    Vec3 bloch{0.3, 0.2, 0.4};
    ModelSpec model;
    ProtocolSpec protocol;
    std::vector<SweepAxis> sweep;
    AsymmetrySpec asymmetry;
    OracleSpec oracle;
    GeometrySpec geometry;
    KmsSpec kms;

    static RunConfig from_file(const ConfigFile& file);
    static RunConfig load(const std::string& path);

    DensityMatrix initial_state() const { return DensityMatrix::from_bloch(bloch); }
    // Multiplies every declared tolerance by `scale`.
    void scale_tolerances(double scale);
};

// Names accepted as sweep axes.
const std::vector<std::string>& sweepable_parameters();

// Applies one sweep coordinate to a copy of the configuration.
void apply_sweep_value(RunConfig& cfg, const SweepAxis& axis, std::size_t index);

// Cartesian product of the axes, first axis slowest; one empty point when
// there are no axes.
std::vector<std::vector<std::size_t>> sweep_points(const std::vector<SweepAxis>& axes);

Observable observable_from_name(const std::string& name);

// FNV-1a, 64 bit.
std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace kmsorder
