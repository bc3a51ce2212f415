// diffpass — command-line front end for the differential-passivity library.
//
// Subcommands:
//   list       enumerate the bundled example systems
//   check      scan the pointwise certificate conditions over a state region
//   simulate   integrate the prolonged system, audit the dissipation balance
//   demo       write the showcase CSV/SVG/JSON artifact sets
//
// Exit codes: 0 success / all conditions pass, 1 a condition fails (or a scan
// is unreliable), 2 best verdict is boundary, 64 usage error, 65 malformed
// signal expression, 70 trajectory divergence.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "diffpass/diffpass.hpp"

namespace {

using namespace diffpass;
using nlohmann::json;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitBoundary = 2;
constexpr int kExitUsage = 64;
constexpr int kExitBadExpr = 65;
constexpr int kExitDiverged = 70;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A malformed user-supplied signal expression, with the caret block prebuilt.
struct BadExprError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string::size_type pos = 0;
    while (pos <= text.size()) {
        const auto next = text.find(sep, pos);
        if (next == std::string::npos) {
            parts.push_back(text.substr(pos));
            break;
        }
        parts.push_back(text.substr(pos, next - pos));
        pos = next + 1;
    }
    return parts;
}

Vec parse_vec(const std::string& text, const std::string& what) {
    Vec v;
    for (const std::string& tok : split(text, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw UsageError("could not parse " + what + " entry '" + tok + "'");
        }
    }
    return v;
}

Signals parse_signals(const std::string& text, std::size_t expected, const std::string& what) {
    Signals sigs;
    for (const std::string& expr : split(text, ';')) {
        try {
            sigs.push_back(SignalExpr::parse(expr));
        } catch (const ParseError& pe) {
            const std::size_t col = std::min(pe.offset, expr.size());
            throw BadExprError(std::string(pe.what()) + "\n  " + expr + "\n  " +
                               std::string(col, ' ') + "^");
        }
    }
    if (sigs.size() != expected)
        throw UsageError(what + ": expected " + std::to_string(expected) +
                         " expression(s) separated by ';', got " + std::to_string(sigs.size()));
    return sigs;
}

// Grid syntax: lo:hi:count[,lo:hi:count...], one triple per state axis.
SampleGrid parse_grid(const std::string& spec, std::size_t n) {
    SampleGrid grid;
    const std::vector<std::string> axes = split(spec, ',');
    if (axes.size() != n)
        throw UsageError("--grid: expected " + std::to_string(n) + " axis triple(s), got " +
                         std::to_string(axes.size()));
    for (const std::string& axis : axes) {
        const std::vector<std::string> f = split(axis, ':');
        if (f.size() != 3) throw UsageError("--grid: axis '" + axis + "' is not lo:hi:count");
        try {
            grid.lower.push_back(std::stod(f[0]));
            grid.upper.push_back(std::stod(f[1]));
            const long c = std::stol(f[2]);
            if (c < 2) throw std::invalid_argument("count");
            grid.counts.push_back(static_cast<std::size_t>(c));
        } catch (const std::exception&) {
            throw UsageError("--grid: could not parse axis '" + axis + "'");
        }
    }
    grid.validate();
    return grid;
}

// Default grid over the declared domain (fallback box +-3 per unbounded
// axis), with per-axis counts chosen to keep the total around 10^4 points.
SampleGrid default_grid(const ControlAffineSystem& sys) {
    SampleGrid grid;
    const std::size_t n = sys.n;
    const std::size_t per_axis = n == 1 ? 1001 : n == 2 ? 101 : n == 3 ? 21 : 7;
    for (std::size_t i = 0; i < n; ++i) {
        const bool bounded = !sys.domain_lo.empty() && std::isfinite(sys.domain_lo[i]) &&
                             std::isfinite(sys.domain_hi[i]);
        grid.lower.push_back(bounded ? sys.domain_lo[i] : -3.0);
        grid.upper.push_back(bounded ? sys.domain_hi[i] : 3.0);
        grid.counts.push_back(per_axis);
    }
    return grid;
}

Mat parse_p_matrix(const std::string& spec, std::size_t n) {
    if (spec.empty()) return Mat::identity(n);
    const Vec entries = parse_vec(spec, "--P");
    if (entries.size() != n * n)
        throw UsageError("--P: expected " + std::to_string(n * n) +
                         " row-major entries, got " + std::to_string(entries.size()));
    Mat p(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) p(i, j) = entries[i * n + j];
    return p;
}

int verdict_exit(const std::vector<ConditionReport>& reports) {
    bool any_boundary = false;
    for (const ConditionReport& r : reports) {
        if (r.verdict == Verdict::fail || r.invalid) return kExitFail;
        if (r.verdict == Verdict::boundary) any_boundary = true;
    }
    return any_boundary ? kExitBoundary : kExitPass;
}

const char* exit_verdict_name(int code) {
    return code == kExitPass ? "pass" : code == kExitBoundary ? "boundary" : "fail";
}

// ------------------------------------------------------------------ check

struct CheckOptions {
    std::string system;
    std::string storage = "bundle";
    std::string p_spec;
    std::string grid_spec;
    std::vector<std::string> u_samples;
    double tol = kMarginTol;
    double residual_tol = kResidualTol;
    std::string out_file;
};

int run_check(const CheckOptions& opt) {
    const ExampleBundle bundle = make_example(opt.system);
    SampleGrid grid =
        opt.grid_spec.empty() ? default_grid(bundle.sys) : parse_grid(opt.grid_spec, bundle.sys.n);
    for (const std::string& raw : opt.u_samples) {
        const Vec u = parse_vec(raw, "--u-sample");
        if (u.size() != bundle.sys.m)
            throw UsageError("--u-sample: expected " + std::to_string(bundle.sys.m) +
                             " entries");
        grid.u_samples.push_back(u);
    }

    std::vector<ConditionReport> reports;
    json out;
    out["system"] = bundle.name;
    out["storage"] = opt.storage;

    if (opt.storage == "natural" || opt.storage == "qpq") {
        if (!bundle.grad)
            throw UsageError("--storage " + opt.storage + ": '" + bundle.name +
                             "' has no gradient form");
    }

    if (opt.storage == "natural") {
        const GradientSystem& gs = *bundle.grad;
        if (grid.u_samples.empty()) grid.u_samples.push_back(Vec(gs.m, 0.0));
        // Validate that Q itself is an admissible metric before scanning with it.
        natural_storage(gs);
        reports.push_back(scan_region(
            "natural-contraction", ConditionSense::leq,
            [&gs](const Vec& x, const Vec& u) { return check_gradient_natural(gs, x, u); },
            grid, opt.tol));
    } else if (opt.storage == "qpq") {
        const GradientSystem& gs = *bundle.grad;
        const Mat p = parse_p_matrix(opt.p_spec, gs.n);
        reports.push_back(scan_region(
            "qpq-margin", ConditionSense::geq,
            [&gs, &p](const Vec& x, const Vec&) { return check_theorem_qpq(gs, p, x).margin; },
            grid, opt.tol));
        reports.push_back(scan_region(
            "qpq-output", ConditionSense::equality,
            [&gs, &p](const Vec& x, const Vec&) {
                return check_theorem_qpq(gs, p, x).output_residual;
            },
            grid, opt.residual_tol));
        if (bundle.name == "rigid-body") {
            const RigidBodyParts rb = rigid_body();
            reports.push_back(scan_region(
                "spin-contraction", ConditionSense::leq,
                [&rb](const Vec& x, const Vec&) {
                    return check_rigid_body(rb.closed_loop, rb.r, x);
                },
                grid, opt.tol));
        }
    } else {
        const QuadraticStorage st = opt.storage == "constant"
                                        ? make_constant_storage(
                                              parse_p_matrix(opt.p_spec, bundle.sys.n))
                                        : bundle.storage;
        const ControlAffineSystem& sys = bundle.sys;
        reports.push_back(scan_region(
            "metric-contraction", ConditionSense::leq,
            [&sys, &st](const Vec& x, const Vec&) {
                return check_metric_contraction(sys, st, x);
            },
            grid, opt.tol));
        reports.push_back(scan_region(
            "killing", ConditionSense::equality,
            [&sys, &st](const Vec& x, const Vec&) {
                const std::vector<double> res = check_killing(sys, st, x);
                return res.empty() ? 0.0 : *std::max_element(res.begin(), res.end());
            },
            grid, opt.residual_tol));
        reports.push_back(scan_region(
            "output-match", ConditionSense::equality,
            [&sys, &st](const Vec& x, const Vec&) { return check_output_match(sys, st, x); },
            grid, opt.residual_tol));
    }

    json conds = json::array();
    for (const ConditionReport& r : reports) conds.push_back(r.to_json());
    out["conditions"] = conds;
    const int code = verdict_exit(reports);
    out["verdict"] = exit_verdict_name(code);

    const std::string text = out.dump(2);
    std::cout << text << "\n";
    if (!opt.out_file.empty()) {
        std::ofstream f(opt.out_file);
        if (!f) throw UsageError("--out: cannot open '" + opt.out_file + "'");
        f << text << "\n";
    }
    return code;
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
    std::string system;
    std::string x0, dx0, u, du;
    double dt = 0.0;  // 0 = bundle recommendation
    double T = 10.0;
    std::string csv_file;
};

int run_simulate(const SimulateOptions& opt) {
    const ExampleBundle bundle = make_example(opt.system);
    const Vec x0 = opt.x0.empty() ? bundle.demo_x0 : parse_vec(opt.x0, "--x0");
    const Vec dx0 = opt.dx0.empty() ? bundle.demo_dx0 : parse_vec(opt.dx0, "--dx0");
    const Signals u =
        opt.u.empty() ? bundle.default_u : parse_signals(opt.u, bundle.sys.m, "--u");
    const Signals du =
        opt.du.empty() ? bundle.default_du : parse_signals(opt.du, bundle.sys.m, "--du");
    const double dt = opt.dt > 0.0 ? opt.dt : bundle.recommended_dt;

    const Trajectory traj =
        integrate_prolonged(bundle.sys, x0, dx0, u, du, bundle.storage, dt, opt.T);

    if (!opt.csv_file.empty()) {
        std::ofstream f(opt.csv_file);
        if (!f) throw UsageError("--csv: cannot open '" + opt.csv_file + "'");
        write_trajectory_csv(traj, bundle.sys.n, bundle.sys.m, bundle.sys.p, f);
    }

    json out;
    out["system"] = bundle.name;
    out["dt"] = dt;
    out["T"] = opt.T;
    out["samples"] = traj.size();
    out["truncated"] = traj.truncated;
    if (traj.truncated) out["truncation_time"] = traj.truncation_time;
    out["dissipation_residual"] = dissipation_residual(traj);
    out["balance_deviation"] = dissipation_balance_deviation(traj);
    out["storage_initial"] = traj.dS.front();
    out["storage_final"] = traj.dS.back();
    std::cout << out.dump(2) << "\n";
    return kExitPass;
}

// -------------------------------------------------------------------- demo

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw UsageError("cannot open '" + path.string() + "' for writing");
    f << text;
}

// Decimate a long run for plotting/CSV artifacts.
std::size_t artifact_stride(std::size_t samples) { return std::max<std::size_t>(1, samples / 2000); }

std::string ensemble_csv(const EnsembleResult& res, const std::string& member_prefix) {
    std::ostringstream os;
    os << "t";
    for (std::size_t i = 0; i < res.members.size(); ++i) os << ',' << member_prefix << i + 1;
    os << ",spread\n";
    char buf[40];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf;
    };
    const std::size_t stride = artifact_stride(res.times.size());
    for (std::size_t k = 0; k < res.times.size(); k += stride) {
        put(res.times[k]);
        for (const auto& member : res.members) {
            os << ',';
            put(member[k][0]);
        }
        os << ',';
        put(res.spread[k]);
        os << '\n';
    }
    return os.str();
}

std::vector<PlotSeries> ensemble_series(const EnsembleResult& res,
                                        const std::string& member_prefix,
                                        std::size_t coordinate = 0) {
    std::vector<PlotSeries> series;
    const std::size_t stride = artifact_stride(res.times.size());
    for (std::size_t i = 0; i < res.members.size(); ++i) {
        PlotSeries s;
        s.label = member_prefix + std::to_string(i + 1);
        for (std::size_t k = 0; k < res.times.size(); k += stride) {
            s.x.push_back(res.times[k]);
            s.y.push_back(res.members[i][k][coordinate]);
        }
        series.push_back(std::move(s));
    }
    return series;
}

json ensemble_json(const EnsembleResult& res) {
    json j;
    j["members"] = res.members.size();
    j["final_time"] = res.times.empty() ? 0.0 : res.times.back();
    j["final_spread"] = res.final_spread;
    json statuses = json::array();
    for (std::size_t i = 0; i < res.status.size(); ++i) {
        json s;
        s["status"] = res.status[i] == MemberStatus::complete     ? "complete"
                      : res.status[i] == MemberStatus::truncated  ? "truncated"
                                                                  : "diverged";
        if (res.status[i] != MemberStatus::complete) s["stop_time"] = res.stop_times[i];
        statuses.push_back(s);
    }
    j["member_status"] = statuses;
    return j;
}

// Sinusoidally forced oscillator ensemble; the small-amplitude variant stays
// inside the certified region and entrains, the large-amplitude one escapes.
void demo_oscillator_ensemble(const std::filesystem::path& dir, const std::string& stem,
                              const std::string& input_expr) {
    const ExampleBundle b = make_example("osc-c");
    const std::vector<Vec> ics = {Vec{-2.5}, Vec{-1.0}, Vec{0.0}, Vec{1.0}, Vec{2.5}};
    const Signals u = {SignalExpr::parse(input_expr)};
    const EnsembleResult res = ensemble_contraction(b.sys, ics, u, 1e-3, 10.0);

    write_file(dir / (stem + ".csv"), ensemble_csv(res, "x"));
    json j = ensemble_json(res);
    j["input"] = input_expr;

    // Spread behavior after the transient: sampled each unit of time.
    json spread_samples = json::array();
    for (double t = 0.0; t <= res.times.back() + 1e-9; t += 1.0) {
        const std::size_t k =
            std::min(res.times.size() - 1, static_cast<std::size_t>(std::llround(t / 1e-3)));
        json s;
        s["t"] = res.times[k];
        s["spread"] = res.spread[k];
        spread_samples.push_back(s);
    }
    j["spread_samples"] = spread_samples;
    write_file(dir / (stem + ".json"), j.dump(2) + "\n");

    std::vector<PlotSeries> series = ensemble_series(res, "x", 0);
    for (std::size_t i = 0; i < series.size(); ++i)
        series[i].label = "x0 = " + std::to_string(ics[i][0]).substr(0, 4);
    std::ostringstream svg;
    write_svg_plot(svg, series, "Oscillator ensemble under u = " + input_expr, "t", "x");
    write_file(dir / (stem + ".svg"), svg.str());
}

void demo_circuit_ensemble(const std::filesystem::path& dir) {
    const ExampleBundle b = make_example("rc");
    const std::vector<Vec> ics = {Vec{0.5}, Vec{1.0}, Vec{2.0}, Vec{5.0}};
    const EnsembleResult res =
        ensemble_contraction(b.sys, ics, b.default_u, b.recommended_dt, 10.0);

    write_file(dir / "fig2.csv", ensemble_csv(res, "v"));
    std::vector<PlotSeries> series = ensemble_series(res, "v", 0);
    for (std::size_t i = 0; i < series.size(); ++i)
        series[i].label = "v0 = " + std::to_string(ics[i][0]).substr(0, 3);
    std::ostringstream svg;
    write_svg_plot(svg, series, "Circuit ensemble under i = 2+sin(2 pi t)", "t", "v");
    write_file(dir / "fig2.svg", svg.str());

    json j = ensemble_json(res);
    j["input"] = "2+sin(2*pi*t)";
    write_file(dir / "fig2.json", j.dump(2) + "\n");
}

void demo_spin_tracking(const std::filesystem::path& dir) {
    const RigidBodyParts rb = rigid_body();
    const SignalExpr d = SignalExpr::parse("3*sin(pi*t)");
    const Signals u = {rb.tracking_input(d).base};
    const Signals du = {SignalExpr::parse("0")};
    const double dt = 1e-3, T = 20.0;
    const Trajectory traj = integrate_prolonged(rb.sys_closed, Vec{0.2, 0.1, -0.1},
                                                Vec{0.0, 0.0, 0.0}, u, du, rb.storage, dt, T);

    // CSV: spin components against the reference.
    std::ostringstream csv;
    csv << "t,w1,w2,w3,ref,err\n";
    char buf[40];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        csv << buf;
    };
    const std::size_t stride = artifact_stride(traj.size());
    double max_err_tail = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double ref = d(traj.times[k]);
        const double err = std::abs(traj.x[k][0] - ref);
        if (traj.times[k] >= 10.0) max_err_tail = std::max(max_err_tail, err);
        if (k % stride != 0) continue;
        put(traj.times[k]);
        csv << ',';
        put(traj.x[k][0]);
        csv << ',';
        put(traj.x[k][1]);
        csv << ',';
        put(traj.x[k][2]);
        csv << ',';
        put(ref);
        csv << ',';
        put(err);
        csv << '\n';
    }
    write_file(dir / "fig3-track.csv", csv.str());

    PlotSeries w1{"w1", {}, {}}, refs{"reference", {}, {}};
    for (std::size_t k = 0; k < traj.size(); k += stride) {
        w1.x.push_back(traj.times[k]);
        w1.y.push_back(traj.x[k][0]);
        refs.x.push_back(traj.times[k]);
        refs.y.push_back(d(traj.times[k]));
    }
    std::ostringstream svg;
    write_svg_plot(svg, {w1, refs}, "Spin-rate tracking, v = r1 d + d'", "t", "w1");
    write_file(dir / "fig3-track.svg", svg.str());

    json j;
    j["reference"] = "3*sin(pi*t)";
    j["max_error_after_t10"] = max_err_tail;
    j["tracking_bound"] = 0.05;
    j["tracks"] = max_err_tail <= 0.05;
    j["truncated"] = traj.truncated;
    write_file(dir / "fig3-track.json", j.dump(2) + "\n");
}

void demo_spin_feedback(const std::filesystem::path& dir) {
    const RigidBodyParts rb = rigid_body();
    const SignalExpr d = SignalExpr::parse("3*sin(pi*t)");
    const TrackingInputs ti = rb.tracking_input(d);
    const std::vector<Vec> ics = {Vec{-0.5, 0.1, -0.1}, Vec{0.5, 0.1, -0.1},
                                  Vec{1.5, 0.1, -0.1}};
    const double dt = 1e-3, T = 20.0;
    const EnsembleResult base =
        ensemble_contraction(rb.sys_closed, ics, {ti.base}, dt, T);
    const EnsembleResult fb =
        ensemble_contraction(rb.sys_closed_fb, ics, {ti.feedback_feedforward}, dt, T);

    auto time_to = [](const EnsembleResult& res, double level) {
        for (std::size_t k = 0; k < res.times.size(); ++k)
            if (res.spread[k] <= level) return res.times[k];
        return -1.0;
    };
    const double t_base = time_to(base, 0.05);
    const double t_fb = time_to(fb, 0.05);

    std::ostringstream csv;
    csv << "t,spread_base,spread_feedback\n";
    char buf[40];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        csv << buf;
    };
    const std::size_t len = std::min(base.times.size(), fb.times.size());
    const std::size_t stride = artifact_stride(len);
    for (std::size_t k = 0; k < len; k += stride) {
        put(base.times[k]);
        csv << ',';
        put(base.spread[k]);
        csv << ',';
        put(fb.spread[k]);
        csv << '\n';
    }
    write_file(dir / "fig3-feedback.csv", csv.str());

    PlotSeries sb{"damping only", {}, {}}, sf{"with output feedback", {}, {}};
    for (std::size_t k = 0; k < len; k += stride) {
        sb.x.push_back(base.times[k]);
        sb.y.push_back(base.spread[k]);
        sf.x.push_back(fb.times[k]);
        sf.y.push_back(fb.spread[k]);
    }
    std::ostringstream svg;
    write_svg_plot(svg, {sb, sf}, "Ensemble spread with and without output feedback", "t",
                   "spread");
    write_file(dir / "fig3-feedback.svg", svg.str());

    json j;
    j["spread_level"] = 0.05;
    j["time_to_level_base"] = t_base;
    j["time_to_level_feedback"] = t_fb;
    j["feedback_faster"] = t_fb >= 0.0 && (t_base < 0.0 || t_fb < t_base);
    j["base"] = ensemble_json(base);
    j["feedback"] = ensemble_json(fb);
    write_file(dir / "fig3-feedback.json", j.dump(2) + "\n");
}

int run_demo(const std::string& name, const std::string& out_dir) {
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    if (name == "fig1-small") {
        demo_oscillator_ensemble(dir, "fig1-small", "1+0.5*sin(pi*t)");
    } else if (name == "fig1-large") {
        demo_oscillator_ensemble(dir, "fig1-large", "1+5*sin(pi*t)");
    } else if (name == "fig2") {
        demo_circuit_ensemble(dir);
    } else if (name == "fig3-track") {
        demo_spin_tracking(dir);
    } else if (name == "fig3-feedback") {
        demo_spin_feedback(dir);
    } else {
        throw UsageError("unknown demo '" + name +
                         "' (expected fig1-small, fig1-large, fig2, fig3-track, or "
                         "fig3-feedback)");
    }
    return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Differential passivity: pointwise certificates and prolonged simulation"};
    app.require_subcommand(1);
    // Let global options (--threads) appear after the subcommand name too.
    app.fallthrough();
    int threads = 0;
    app.add_option("--threads", threads, "Cap worker threads (0 = hardware concurrency)");

    CLI::App* list_cmd = app.add_subcommand("list", "List the bundled example systems");

    CheckOptions check;
    CLI::App* check_cmd =
        app.add_subcommand("check", "Scan the pointwise conditions over a state region");
    check_cmd->add_option("system", check.system, "Example system name")->required();
    check_cmd->add_option("--storage", check.storage, "bundle | natural | qpq | constant")
        ->check(CLI::IsMember({"bundle", "natural", "qpq", "constant"}));
    check_cmd->add_option("--P", check.p_spec,
                          "Row-major entries of the weighting matrix (default identity)");
    check_cmd->add_option("--grid", check.grid_spec,
                          "Region as lo:hi:count per axis, comma separated");
    check_cmd->add_option("--u-sample", check.u_samples,
                          "Input sample as comma-separated entries (repeatable)");
    check_cmd->add_option("--tol", check.tol, "Eigenvalue margin tolerance");
    check_cmd->add_option("--residual-tol", check.residual_tol, "Equality residual tolerance");
    check_cmd->add_option("--out", check.out_file, "Also write the JSON report to this file");

    SimulateOptions sim;
    CLI::App* sim_cmd = app.add_subcommand(
        "simulate", "Integrate the prolonged system and audit the dissipation balance");
    sim_cmd->add_option("system", sim.system, "Example system name")->required();
    sim_cmd->add_option("--x0", sim.x0, "Initial state, comma separated");
    sim_cmd->add_option("--dx0", sim.dx0, "Initial variation, comma separated");
    sim_cmd->add_option("--u", sim.u, "Input expressions, ';' separated");
    sim_cmd->add_option("--du", sim.du, "Input-variation expressions, ';' separated");
    sim_cmd->add_option("--dt", sim.dt, "Step size (default: bundle recommendation)");
    sim_cmd->add_option("--T", sim.T, "Final time");
    sim_cmd->add_option("--csv", sim.csv_file, "Write the trajectory table to this file");

    std::string demo_name, demo_dir = ".";
    CLI::App* demo_cmd = app.add_subcommand("demo", "Write a showcase artifact set");
    demo_cmd->add_option("name", demo_name,
                         "fig1-small | fig1-large | fig2 | fig3-track | fig3-feedback")
        ->required();
    demo_cmd->add_option("--out-dir", demo_dir, "Output directory (default: current)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    if (threads > 0) setenv("DIFFPASS_THREADS", std::to_string(threads).c_str(), 1);

    try {
        if (list_cmd->parsed()) {
            for (const std::string& name : example_names()) {
                const ExampleBundle b = make_example(name);
                std::cout << name << "  (n=" << b.sys.n << ", m=" << b.sys.m
                          << ", p=" << b.sys.p << ")  " << b.description << "\n";
            }
            return kExitPass;
        }
        if (check_cmd->parsed()) return run_check(check);
        if (sim_cmd->parsed()) return run_simulate(sim);
        if (demo_cmd->parsed()) return run_demo(demo_name, demo_dir);
    } catch (const BadExprError& e) {
        // Malformed signal expression, with a caret under the offending character.
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadExpr;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadExpr;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const UnknownExampleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DivergedError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDiverged;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFail;
    }
    return kExitUsage;
}
