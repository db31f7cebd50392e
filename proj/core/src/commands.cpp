#include "kmsorder/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "kmsorder/config.hpp"
#include "kmsorder/csv.hpp"
#include "kmsorder/svg_plot.hpp"

#ifndef KMSORDER_VERSION
#define KMSORDER_VERSION "0.0.0"
#endif

namespace kmsorder {

namespace fs = std::filesystem;
using json = nlohmann::json;

int resolve_workers(std::optional<int> cli, int config_value) {
    if (cli && *cli > 0) return *cli;
    if (const char* env = std::getenv("KMSORDER_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
    }
    if (config_value > 0) return config_value;
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    const std::size_t threads = std::min<std::size_t>(n, std::size_t(std::max(1, workers)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex m;
    auto body = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(m);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

namespace {

struct Context {
    std::string command;
    std::string config_path;
    std::string config_text;
    RunConfig cfg;
    fs::path out;
    int workers = 1;
    double tolerance_scale = 1.0;
    std::ostream* log;
    std::ostream* err;
    std::chrono::steady_clock::time_point start;
    std::vector<std::string> files;
};

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot read config '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out << j.dump(2) << '\n';
}

void write_metadata(Context& ctx, int status, const std::string& error = {}) {
    if (ctx.out.empty()) return;
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count();
    json j{{"command", ctx.command},
           {"version", KMSORDER_VERSION},
           {"config_path", ctx.config_path},
           {"config_hash", hex64(fnv1a64(ctx.config_text))},
           {"seed", ctx.cfg.seed},
           {"workers", ctx.workers},
           {"tolerance_scale", ctx.tolerance_scale},
           {"started_utc", utc_timestamp()},
           {"wall_time_seconds", wall},
           {"exit_status", status},
           {"files", ctx.files}};
    if (!error.empty()) j["error"] = error;
    try {
        write_json(ctx.out / "metadata.json", j);
    } catch (const std::exception& e) {
        *ctx.err << "error: " << e.what() << '\n';
    }
}

// Loads the config and prepares the output directory, then runs `body`.
// Every exception becomes exit status 2 with a one-line diagnostic.
int run_guarded(const std::string& command, const CommandOptions& opt,
                const std::function<int(Context&)>& body) {
    Context ctx;
    ctx.command = command;
    ctx.config_path = opt.config_path;
    ctx.log = opt.log ? opt.log : &std::cout;
    ctx.err = opt.err ? opt.err : &std::cerr;
    ctx.start = std::chrono::steady_clock::now();
    ctx.tolerance_scale = opt.tolerance_scale;
    try {
        ctx.config_text = read_text(opt.config_path);
        ctx.cfg = RunConfig::from_file(ConfigFile::parse(ctx.config_text));
        ctx.cfg.scale_tolerances(opt.tolerance_scale);
        ctx.workers = resolve_workers(opt.workers, ctx.cfg.workers);
        ctx.out = opt.out_dir ? fs::path(*opt.out_dir) : fs::path(ctx.cfg.output_dir);
        fs::create_directories(ctx.out);
    } catch (const std::exception& e) {
        *ctx.err << command << ": error: " << e.what() << '\n';
        ctx.out.clear();
        return kExitError;
    }
    try {
        const int status = body(ctx);
        write_metadata(ctx, status);
        return status;
    } catch (const std::exception& e) {
        *ctx.err << command << ": error: " << e.what() << '\n';
        write_metadata(ctx, kExitError, e.what());
        return kExitError;
    }
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// asymmetry

struct AsymmetryRow {
    double c_time = NAN, c_freq = NAN, c_dyson = NAN, c_imag = NAN;
    double residual = NAN, quad_error = NAN;
    bool passed = false;
    std::string status;
};

AsymmetryRow asymmetry_row(const RunConfig& cfg) {
    AsymmetryRow row;
    const auto model = cfg.model.build();
    const auto protocol = cfg.protocol.build();
    const auto rho = cfg.initial_state();
    const auto& qt = cfg.asymmetry.quadrature;
    const std::array<AsymmetryResult, 3> r{delta_rho_commutator_time(protocol, model, rho, qt),
                                           delta_rho_frequency(protocol, model, rho, qt),
                                           delta_rho_dyson(protocol, model, rho, qt)};
    row.c_time = r[0].c;
    row.c_freq = r[1].c;
    row.c_dyson = r[2].c;
    row.c_imag = std::abs(r[1].c_imag);
    row.quad_error = std::max({r[0].quadrature_error, r[1].quadrature_error, r[2].quadrature_error});
    row.residual = 0.0;
    row.passed = true;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i + 1; j < 3; ++j) {
            const double diff = std::abs(r[i].c - r[j].c);
            const double scale = std::max(std::abs(r[i].c), std::abs(r[j].c));
            row.residual = std::max(row.residual, scale > 0.0 ? diff / scale : diff);
            const double allowed = std::max(cfg.asymmetry.tolerance * scale,
                                            r[i].quadrature_error + r[j].quadrature_error);
            if (!(diff <= allowed)) row.passed = false;
        }
    row.status = row.passed ? "pass" : "fail";
    return row;
}

int asymmetry_body(Context& ctx) {
    const auto points = sweep_points(ctx.cfg.sweep);
    std::vector<AsymmetryRow> rows(points.size());
    parallel_for(points.size(), ctx.workers, [&](std::size_t k) {
        RunConfig local = ctx.cfg;
        for (std::size_t a = 0; a < local.sweep.size(); ++a)
            apply_sweep_value(local, local.sweep[a], points[k][a]);
        try {
            rows[k] = asymmetry_row(local);
        } catch (const std::exception& e) {
            rows[k].status = std::string("error: ") + e.what();
        }
    });

    std::vector<std::string> header;
    for (const auto& a : ctx.cfg.sweep) header.push_back(a.name);
    for (const char* h : {"c_time", "c_freq", "c_dyson", "c_imag_freq", "max_pairwise_residual",
                          "quadrature_error", "tolerance", "status"})
        header.push_back(h);
    CsvWriter csv((ctx.out / "asymmetry.csv").string(), header);
    ctx.files.push_back("asymmetry.csv");

    int status = kExitPass;
    std::size_t passed = 0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        std::vector<CsvCell> cells;
        for (std::size_t a = 0; a < ctx.cfg.sweep.size(); ++a) {
            const auto& axis = ctx.cfg.sweep[a];
            if (axis.labels.empty())
                cells.emplace_back(axis.values[points[k][a]]);
            else
                cells.emplace_back(axis.labels[points[k][a]]);
        }
        const auto& r = rows[k];
        for (double v : {r.c_time, r.c_freq, r.c_dyson, r.c_imag, r.residual, r.quad_error,
                         ctx.cfg.asymmetry.tolerance})
            cells.emplace_back(v);
        cells.emplace_back(r.status);
        csv.row(cells);
        if (r.passed) {
            ++passed;
        } else if (r.status.rfind("error", 0) == 0) {
            *ctx.err << "asymmetry: point " << k << ": " << r.status << '\n';
            status = kExitError;
        } else {
            *ctx.err << "asymmetry: point " << k << ": methods disagree, relative residual "
                     << fmt(r.residual) << '\n';
            if (status == kExitPass) status = kExitBreach;
        }
    }
    *ctx.log << "asymmetry: " << passed << '/' << rows.size() << " points agree within "
             << fmt(ctx.cfg.asymmetry.tolerance) << " -> " << (ctx.out / "asymmetry.csv").string()
             << '\n';
    return status;
}

// oracle

struct OracleRun {
    int n_max = 0;
    std::vector<ScalingPoint> points;
    std::optional<ScalingFit> fit;
    std::string error;
};

OracleRun oracle_run(const Context& ctx, const Protocol& protocol, const SpectralModel& model,
                     int n_max) {
    OracleRun run;
    run.n_max = n_max;
    const TruncatedField field(model.modes(), n_max);
    EvolutionSpec spec;
    spec.step = ctx.cfg.oracle.step;
    spec.lambdas = ctx.cfg.oracle.lambdas;
    spec.leakage_threshold = ctx.cfg.oracle.leakage_threshold;
    spec.validate();
    const auto rho = ctx.cfg.initial_state();
    run.points.resize(spec.lambdas.size());
    parallel_for(spec.lambdas.size(), ctx.workers, [&](std::size_t i) {
        run.points[i] = scaling_point(field, protocol, rho, spec, spec.lambdas[i]);
    });
    try {
        run.fit = fit_scaling(run.points);
    } catch (const InvalidInput& e) {
        run.error = e.what();
    }
    return run;
}

json fit_json(const OracleRun& run) {
    json j{{"n_max", run.n_max}};
    if (!run.fit) {
        j["error"] = run.error;
        return j;
    }
    j["slope"] = run.fit->slope;
    j["intercept"] = run.fit->intercept;
    j["r2"] = run.fit->r2;
    j["decades"] = run.fit->decades;
    j["warnings"] = run.fit->warnings;
    std::size_t used = 0;
    for (const auto& p : run.points) used += p.ok;
    j["points_used"] = used;
    return j;
}

int oracle_body(Context& ctx) {
    const auto model = ctx.cfg.model.build();
    if (!model.is_discrete())
        throw InvalidInput("oracle: the exact oracle needs model.tag = \"discrete_modes\"");
    const auto protocol = ctx.cfg.protocol.build();
    const auto& oc = ctx.cfg.oracle;

    std::vector<OracleRun> runs;
    runs.push_back(oracle_run(ctx, protocol, model, oc.n_max));
    if (oc.refine_n_max > 0) runs.push_back(oracle_run(ctx, protocol, model, oc.refine_n_max));

    CsvWriter csv((ctx.out / "scaling.csv").string(),
                  {"n_max", "lambda", "exact_norm", "pert_norm", "diff_norm", "leakage",
                   "unitarity_drift", "status"});
    ctx.files.push_back("scaling.csv");
    for (const auto& run : runs)
        for (const auto& p : run.points)
            csv.row({static_cast<long long>(run.n_max), p.lambda, p.exact_norm, p.pert_norm,
                     p.diff_norm, p.leakage, p.unitarity_drift,
                     p.ok ? std::string("ok") : "error: " + p.error});

    const auto& base = runs.front();
    json j = fit_json(base);
    j["thresholds"] = {{"min_slope", oc.min_slope},
                       {"min_r2", oc.min_r2},
                       {"max_slope_shift", oc.max_slope_shift}};
    std::vector<std::string> failures;
    if (!base.fit) {
        failures.push_back("fit: " + base.error);
    } else {
        if (!(base.fit->slope >= oc.min_slope)) failures.push_back("slope below " + fmt(oc.min_slope));
        if (!(base.fit->r2 >= oc.min_r2)) failures.push_back("r2 below " + fmt(oc.min_r2));
    }
    if (runs.size() > 1) {
        const auto& ref = runs[1];
        json r = fit_json(ref);
        if (base.fit && ref.fit) {
            const double shift = std::abs(ref.fit->slope - base.fit->slope);
            r["slope_shift"] = shift;
            if (!(shift < oc.max_slope_shift))
                failures.push_back("slope moved by " + fmt(shift) + " under n_max refinement");
        } else {
            failures.push_back("refinement fit unavailable");
        }
        j["refined"] = r;
    }
    j["failures"] = failures;
    j["passed"] = failures.empty();
    write_json(ctx.out / "scaling_fit.json", j);
    ctx.files.push_back("scaling_fit.json");

    if (base.fit) {
        *ctx.log << "oracle: slope " << fmt(base.fit->slope) << ", r2 " << fmt(base.fit->r2)
                 << ", " << fmt(base.fit->decades) << " decades";
        if (runs.size() > 1 && runs[1].fit)
            *ctx.log << ", refined slope " << fmt(runs[1].fit->slope) << " at n_max "
                     << runs[1].n_max;
        *ctx.log << '\n';
        for (const auto& w : base.fit->warnings) *ctx.err << "oracle: warning: " << w << '\n';
    }
    for (const auto& f : failures) *ctx.err << "oracle: " << f << '\n';
    if (!base.fit) return kExitError;
    return failures.empty() ? kExitPass : kExitBreach;
}

// geometry

int geometry_body(Context& ctx) {
    const auto& g = ctx.cfg.geometry;
    std::vector<double> grid = g.s_values;
    std::vector<GeometryReport> reps(grid.size());
    parallel_for(grid.size(), ctx.workers, [&](std::size_t i) { reps[i] = geometry_report(grid[i]); });
    const auto pos = entropy_positivity_report(grid);

    CsvWriter csv((ctx.out / "geometry.csv").string(),
                  {"s", "relative_entropy", "g_bkm", "g_bures", "ratio", "g_bkm_numeric",
                   "g_bures_numeric", "residual_entropy", "residual_bkm", "residual_bures",
                   "residual_ratio", "status"});
    ctx.files.push_back("geometry.csv");
    int status = kExitPass;
    std::size_t breaches = 0;
    for (const auto& r : reps) {
        const bool ok = r.residual_entropy <= g.entropy_tolerance &&
                        r.residual_bkm <= g.metric_tolerance &&
                        r.residual_bures <= g.metric_tolerance &&
                        r.residual_ratio <= 2.0 * g.metric_tolerance;
        if (!ok) {
            ++breaches;
            status = kExitBreach;
        }
        csv.row({r.s, r.relative_entropy, r.g_bkm, r.g_bures, r.ratio, r.g_bkm_numeric,
                 r.g_bures_numeric, r.residual_entropy, r.residual_bkm, r.residual_bures,
                 r.residual_ratio, std::string(ok ? "pass" : "fail")});
    }
    if (!pos.all_nonnegative || !pos.unique_zero_at_origin || !pos.strictly_increasing) {
        *ctx.err << "geometry: relative entropy is not non-negative with a unique zero at s = 0\n";
        status = kExitBreach;
    }

    PlotSeries D{"D(rho_y||rho_x)", "#1f77b4", {}, {}};
    PlotSeries bkm{"g_BKM", "#d62728", {}, {}};
    PlotSeries bures{"g_Bures", "#2ca02c", {}, {}};
    PlotSeries ratio{"g_BKM/g_Bures", "#9467bd", {}, {}};
    for (const auto& r : reps) {
        for (auto* s : {&D, &bkm, &bures, &ratio}) s->x.push_back(r.s);
        D.y.push_back(r.relative_entropy);
        bkm.y.push_back(r.g_bkm);
        bures.y.push_back(r.g_bures);
        ratio.y.push_back(r.ratio);
    }
    write_line_plot((ctx.out / "geometry.svg").string(),
                    {"Qubit Gibbs family: entropy and metrics", "s", "value"},
                    {D, bkm, bures, ratio});
    ctx.files.push_back("geometry.svg");
    *ctx.log << "geometry: " << reps.size() - breaches << '/' << reps.size()
             << " points within tolerance -> " << (ctx.out / "geometry.csv").string() << '\n';
    return status;
}

// kms-check

int kms_body(Context& ctx) {
    const auto model = ctx.cfg.model.build();
    const auto& k = ctx.cfg.kms;
    const double time_tol =
        k.time_tolerance ? *k.time_tolerance : (model.is_discrete() ? 1e-10 : 1e-6) * k.default_scale;

    const auto balance = detailed_balance_check(model, k.omegas, k.balance_tolerance);

    struct TimeRow {
        std::optional<KmsPoint> point;
        std::string error;
    };
    std::vector<TimeRow> trows(k.times.size());
    parallel_for(k.times.size(), ctx.workers, [&](std::size_t i) {
        try {
            const std::array<double, 1> t{k.times[i]};
            trows[i].point = kms_time_domain_check(model, t, time_tol).points.front();
        } catch (const std::exception& e) {
            trows[i].error = e.what();
        }
    });

    CsvWriter csv((ctx.out / "kms.csv").string(),
                  {"check", "x", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "deviation",
                   "quadrature_error", "tolerance", "status"});
    ctx.files.push_back("kms.csv");
    std::size_t balance_fail = 0, time_fail = 0, errors = 0;
    for (const auto& p : balance.points) {
        const bool ok = p.relative_error <= k.balance_tolerance;
        balance_fail += !ok;
        csv.row({std::string("detailed_balance"), p.omega, p.ratio, 0.0, p.expected, 0.0,
                 p.relative_error, 0.0, k.balance_tolerance, std::string(ok ? "pass" : "fail")});
    }
    for (std::size_t i = 0; i < trows.size(); ++i) {
        const auto& r = trows[i];
        if (!r.point) {
            ++errors;
            csv.row({std::string("kms_time"), k.times[i], NAN, NAN, NAN, NAN, NAN, NAN, time_tol,
                     "error: " + r.error});
            continue;
        }
        const auto& p = *r.point;
        const bool ok = p.deviation <= time_tol;
        time_fail += !ok;
        csv.row({std::string("kms_time"), p.time, p.direct.real(), p.direct.imag(),
                 p.continued.real(), p.continued.imag(), p.deviation, p.quadrature_error, time_tol,
                 std::string(ok ? "pass" : "fail")});
    }
    *ctx.log << "kms-check: detailed balance max relative error " << fmt(balance.max_relative_error)
             << " (tol " << fmt(k.balance_tolerance) << "), " << trows.size() - time_fail - errors
             << '/' << trows.size() << " time points within " << fmt(time_tol) << '\n';
    if (balance_fail)
        *ctx.err << "kms-check: detailed balance violated at " << balance_fail << " frequencies\n";
    if (time_fail) *ctx.err << "kms-check: KMS condition violated at " << time_fail << " times\n";
    if (errors) {
        *ctx.err << "kms-check: " << errors << " time points failed to evaluate\n";
        return kExitError;
    }
    return balance_fail || time_fail ? kExitBreach : kExitPass;
}

}  // namespace

int cmd_asymmetry(const CommandOptions& opt) { return run_guarded("asymmetry", opt, asymmetry_body); }
int cmd_oracle(const CommandOptions& opt) { return run_guarded("oracle", opt, oracle_body); }
int cmd_geometry(const CommandOptions& opt) { return run_guarded("geometry", opt, geometry_body); }
int cmd_kms_check(const CommandOptions& opt) { return run_guarded("kms-check", opt, kms_body); }

int run_command(const std::string& name, const CommandOptions& opt) {
    if (name == "asymmetry") return cmd_asymmetry(opt);
    if (name == "oracle") return cmd_oracle(opt);
    if (name == "geometry") return cmd_geometry(opt);
    if (name == "kms-check") return cmd_kms_check(opt);
    (opt.err ? *opt.err : std::cerr) << "unknown command '" << name << "'\n";
    return kExitError;
}

}  // namespace kmsorder
