#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

namespace blowup::cli {

using transforms::GChoice;
using transforms::Method;

// ---- problem set-up -----------------------------------------------------------

ResolvedProblem resolve(const RunConfig& cfg) {
    const ProblemSpec& ps = cfg.problem;
    if (ps.id && ps.rhs)
        throw std::invalid_argument("give either --problem or --rhs, not both");
    if (!ps.id && !ps.rhs)
        throw std::invalid_argument("give --problem or --rhs");

    std::optional<problems::TestProblem> test;
    if (ps.id) {
        test = *ps.id == "ypow" ? problems::power_family(ps.p, ps.a) : problems::get_problem(*ps.id, ps.a);
    }
    transforms::CauchyProblem problem = test ? test->problem
                                        : ps.order == 1
                                            ? transforms::CauchyProblem::first_order(expr::parse(*ps.rhs), ps.x0, ps.y0)
                                            : transforms::CauchyProblem::second_order(expr::parse(*ps.rhs), ps.x0,
                                                                                      ps.y0, ps.y1);
    GChoice g;
    if (cfg.g) {
        g = GChoice::parse(*cfg.g, cfg.s);
    } else {
        g = test ? test->nonlocal_g() : GChoice::default_for(problem.order);
        if (g.kind == transforms::GKind::arc_length)
            g.s = cfg.s;
    }
    g.validate(problem.order);
    return {std::move(problem), std::move(test), std::move(g)};
}

ode::StopRule stop_rule(const RunConfig& cfg, double start) {
    ode::StopRule stop;
    stop.max_steps = cfg.max_steps;
    if (cfg.param_max)
        stop.max_parameter = *cfg.param_max;
    else if (cfg.span)
        stop.max_parameter = start + *cfg.span;
    stop.decay_threshold = cfg.eps_stop;
    stop.decay_component = 0;
    return stop;
}

SolveOutcome solve(const RunConfig& cfg) {
    if (!(cfg.h > 0))
        throw std::invalid_argument("step h must be > 0");
    ResolvedProblem rp = resolve(cfg);
    transforms::TransformedSystem sys = transforms::transform(rp.problem, cfg.method, rp.g);
    ode::Trajectory traj = ode::integrate(sys.system, cfg.h, stop_rule(cfg, sys.system.start()));
    SolveOutcome out{std::move(sys), std::move(traj), std::nullopt, {}};
    try {
        out.estimate = singularity::estimate_x_star(out.trajectory);
        const auto fit = singularity::fit_power_law(out.trajectory, out.estimate->x_star);
        out.estimate->A = fit.A;
        out.estimate->beta = fit.beta;
    } catch (const EstimationError& e) {
        out.estimate_error = e.what();
    }
    return out;
}

// ---- compare ------------------------------------------------------------------

namespace {

// Same Cauchy problem: ex1 and ex2-form (ex3 and ex4-form) differ only in the
// paired g, so the resolved problems are compared, not the ids.
bool same_problem(const RunConfig& a, const RunConfig& b) {
    const auto pa = resolve(a).problem;
    const auto pb = resolve(b).problem;
    return pa.order == pb.order && pa.x0 == pb.x0 && pa.y0 == pb.y0 && (pa.order == 1 || pa.y1 == pb.y1) &&
           pa.f.to_string() == pb.f.to_string();
}

CompareSide run_side(const RunConfig& cfg, std::size_t steps) {
    ResolvedProblem rp = resolve(cfg);
    auto sys = transforms::transform(rp.problem, cfg.method, rp.g);
    ode::StopRule stop;
    stop.max_steps = steps;
    stop.decay_threshold = 0;
    CompareSide side{std::string(transforms::to_string(cfg.method)), ode::integrate(sys.system, cfg.h, stop),
                     std::nullopt};
    if (cfg.method == Method::nonlocal)
        side.label += "(g=" + rp.g.describe() + ")";
    try {
        side.estimate = singularity::estimate_x_star(side.trajectory);
    } catch (const EstimationError&) {
    }
    return side;
}

} // namespace

Comparison compare(const RunConfig& left, const RunConfig& right, std::size_t steps) {
    if (!same_problem(left, right))
        throw std::invalid_argument("compare: both sides must target the same problem");
    if (steps == 0)
        throw std::invalid_argument("compare: step budget must be positive");
    Comparison cmp{0.0, false, run_side(left, steps), run_side(right, steps)};
    const ResolvedProblem rp = resolve(left);
    if (rp.test) {
        cmp.reference_x_star = rp.test->x_star;
        cmp.reference_exact = true;
    } else {
        const auto& l = cmp.left.estimate;
        const auto& r = cmp.right.estimate;
        if (!l && !r)
            throw EstimationError("compare: neither run yields an x* estimate to compare against");
        const bool use_left = l && (!r || l->uncertainty <= r->uncertainty);
        cmp.reference_x_star = use_left ? l->x_star : r->x_star;
    }
    return cmp;
}

// ---- sweep --------------------------------------------------------------------

Sweep sweep(const RunConfig& cfg, std::vector<double> hs) {
    if (hs.size() < 2)
        throw std::invalid_argument("sweep needs at least two step sizes");
    for (double h : hs)
        if (!(h > 0))
            throw std::invalid_argument("sweep step sizes must be > 0");
    if (!cfg.param_max && !cfg.span)
        throw std::invalid_argument("sweep needs a parameter bound (--param-max or --span)");

    const ResolvedProblem rp = resolve(cfg);
    const auto sys = transforms::transform(rp.problem, cfg.method, rp.g);
    ode::StopRule stop = stop_rule(cfg, sys.system.start());
    stop.decay_threshold = 0;
    const double target = stop.max_parameter;

    // Independent runs; the system is immutable and shared read-only.
    auto run_h = [&](double h) { return ode::integrate(sys.system, h, stop); };
    std::vector<std::future<ode::Trajectory>> jobs;
    for (double h : hs)
        jobs.push_back(std::async(std::launch::async, run_h, h));

    Sweep out;
    std::optional<ode::State> exact;
    if (rp.test) {
        try {
            exact = problems::exact_transformed_state(*rp.test, cfg.method, target);
            out.reference_exact = true;
        } catch (const std::invalid_argument&) {
        }
    }
    if (!exact) {
        const double h_ref = *std::min_element(hs.begin(), hs.end()) / 4;
        const auto ref = ode::integrate(sys.system, h_ref, stop);
        exact = std::vector<double>(ref.state(ref.size() - 1).begin(), ref.state(ref.size() - 1).end());
    }

    for (std::size_t i = 0; i < hs.size(); ++i) {
        const ode::Trajectory traj = jobs[i].get();
        const double h = hs[i];
        const double p_end = traj.param(traj.size() - 1);
        if (traj.reason != ode::Termination::parameter_bound || std::fabs(p_end - target) > 1e-9 * std::max(1.0, std::fabs(target)))
            throw std::invalid_argument("sweep: run with h=" + format_double(h) + " stopped at parameter " +
                                        format_double(p_end) + " (" + std::string(ode::to_string(traj.reason)) +
                                        "); step sizes must divide the parameter span");
        const auto last = traj.state(traj.size() - 1);
        double err = 0;
        for (std::size_t k = 0; k < last.size(); ++k)
            err = std::max(err, std::fabs(last[k] - (*exact)[k]));
        SweepRow row{h, traj.size() - 1, err, std::nullopt};
        if (i > 0 && err > 0 && out.rows.back().error > 0)
            row.order = std::log(out.rows.back().error / err) / std::log(out.rows.back().h / h);
        out.rows.push_back(row);
    }
    return out;
}

// ---- output -------------------------------------------------------------------

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

void write_trajectory(std::ostream& os, const ode::Trajectory& traj, Format fmt) {
    const auto& names = traj.names();
    if (fmt == Format::csv) {
        os << "param";
        for (const auto& n : names)
            os << ',' << n;
        os << '\n';
        for (std::size_t i = 0; i < traj.size(); ++i) {
            os << format_double(traj.param(i));
            for (double v : traj.state(i))
                os << ',' << format_double(v);
            os << '\n';
        }
        return;
    }
    for (std::size_t i = 0; i < traj.size(); ++i) {
        os << "{\"param\":" << format_double(traj.param(i));
        const auto s = traj.state(i);
        for (std::size_t k = 0; k < s.size(); ++k)
            os << ",\"" << names[k] << "\":" << format_double(s[k]);
        os << "}\n";
    }
}

namespace {

nlohmann::json optional_number(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

} // namespace

std::string summary_json(const SolveOutcome& o) {
    nlohmann::json j;
    const auto& e = o.estimate;
    j["x_star"] = e ? nlohmann::json(e->x_star) : nlohmann::json(nullptr);
    j["uncertainty"] = e ? nlohmann::json(e->uncertainty) : nlohmann::json(nullptr);
    j["A"] = e ? optional_number(e->A) : nlohmann::json(nullptr);
    j["beta"] = e ? optional_number(e->beta) : nlohmann::json(nullptr);
    j["steps"] = o.trajectory.size() - 1;
    j["reason"] = std::string(ode::to_string(o.trajectory.reason));
    j["method"] = std::string(transforms::to_string(o.system.method));
    j["parameter"] = o.system.parameter_name;
    if (e)
        j["x_star_method"] = std::string(singularity::to_string(e->method));
    if (!o.trajectory.message.empty())
        j["message"] = o.trajectory.message;
    if (!o.estimate_error.empty())
        j["estimate_error"] = o.estimate_error;
    return j.dump();
}

void write_comparison(std::ostream& os, const Comparison& cmp) {
    const auto& l = cmp.left.trajectory;
    const auto& r = cmp.right.trajectory;
    const std::size_t lx = l.index_of("x"), rx = r.index_of("x");
    os << "step,param_left,x_left,err_left,param_right,x_right,err_right\n";
    const std::size_t n = std::max(l.size(), r.size());
    auto cells = [&](const ode::Trajectory& t, std::size_t xi, std::size_t i) {
        if (i >= t.size())
            return std::string(",,");
        const double x = t.state(i)[xi];
        return format_double(t.param(i)) + "," + format_double(x) + "," +
               format_double(std::fabs(x - cmp.reference_x_star));
    };
    for (std::size_t i = 0; i < n; ++i)
        os << i << ',' << cells(l, lx, i) << ',' << cells(r, rx, i) << '\n';
}

std::string comparison_json(const Comparison& cmp) {
    auto side = [&](const CompareSide& s) {
        const auto& t = s.trajectory;
        const double x_end = t.state(t.size() - 1)[t.index_of("x")];
        nlohmann::json j;
        j["method"] = s.label;
        j["steps"] = t.size() - 1;
        j["reason"] = std::string(ode::to_string(t.reason));
        j["x_end"] = x_end;
        j["x_end_error"] = std::fabs(x_end - cmp.reference_x_star);
        j["x_star"] = s.estimate ? nlohmann::json(s.estimate->x_star) : nlohmann::json(nullptr);
        j["x_star_error"] = s.estimate ? nlohmann::json(std::fabs(s.estimate->x_star - cmp.reference_x_star))
                                       : nlohmann::json(nullptr);
        return j;
    };
    nlohmann::json j;
    j["reference_x_star"] = cmp.reference_x_star;
    j["reference"] = cmp.reference_exact ? "exact" : "best-estimate";
    j["left"] = side(cmp.left);
    j["right"] = side(cmp.right);
    return j.dump();
}

void write_sweep(std::ostream& os, const Sweep& sw) {
    os << "h,steps,error,order\n";
    for (const auto& r : sw.rows)
        os << format_double(r.h) << ',' << r.steps << ',' << format_double(r.error) << ','
           << (r.order ? format_double(*r.order) : std::string()) << '\n';
}

std::string plot_script(const std::string& csv_path, const std::string& parameter_name) {
    std::ostringstream os;
    os << "#!/usr/bin/env python3\n"
          "# Plots a trajectory written by `blowup solve --format csv`.\n"
          "import csv\n"
          "import sys\n\n"
          "import matplotlib.pyplot as plt\n\n"
          "path = sys.argv[1] if len(sys.argv) > 1 else \""
       << csv_path
       << "\"\n"
          "with open(path, newline=\"\") as fh:\n"
          "    rows = list(csv.DictReader(fh))\n"
          "param = [float(r[\"param\"]) for r in rows]\n"
          "x = [float(r[\"x\"]) for r in rows]\n"
          "y = [float(r[\"y\"]) for r in rows]\n\n"
          "fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))\n"
          "ax1.plot(x, y, \".-\")\n"
          "ax1.set_xlabel(\"x\")\n"
          "ax1.set_ylabel(\"y\")\n"
          "ax1.set_yscale(\"log\")\n"
          "ax2.plot(param, x, \".-\")\n"
          "ax2.set_xlabel(\""
       << parameter_name
       << "\")\n"
          "ax2.set_ylabel(\"x\")\n"
          "fig.tight_layout()\n"
          "plt.show()\n";
    return os.str();
}

// ---- command line ---------------------------------------------------------------

namespace {

constexpr const char* exit_code_help =
    "Exit codes:\n"
    "  0  success\n"
    "  1  invalid arguments or configuration\n"
    "  2  expression parse error\n"
    "  3  singular or failing transformed system\n"
    "  4  x* estimation or power-law fit failed\n"
    "  5  I/O error\n";

struct Sink {
    // Either stdout or an owned file.
    Sink(const std::string& path, std::ostream& stdout_stream) {
        if (path == "-") {
            stream = &stdout_stream;
            return;
        }
        file.open(path, std::ios::binary);
        if (!file)
            throw IoError("cannot open '" + path + "' for writing");
        file.imbue(std::locale::classic());
        stream = &file;
    }
    void close(const std::string& path) {
        if (stream == &file) {
            file.close();
            if (!file)
                throw IoError("error writing '" + path + "'");
        } else {
            stream->flush();
        }
    }
    std::ostream& operator*() { return *stream; }

    std::ofstream file;
    std::ostream* stream = nullptr;
};

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw IoError("cannot open '" + path + "' for writing");
    f << text;
    f.close();
    if (!f)
        throw IoError("error writing '" + path + "'");
}

void add_problem_options(CLI::App* sub, RunConfig& cfg) {
    auto& ps = cfg.problem;
    sub->add_option("--problem", ps.id, "Built-in problem: ex1, ex2-form, ex3, ex4-form, ypow");
    sub->add_option("--a", ps.a, "Problem parameter a (y(0) = a); initial value y0 for ypow")->capture_default_str();
    sub->add_option("--p", ps.p, "Exponent of the synthetic problem y' = y^p (ypow)")->capture_default_str();
    sub->add_option("--rhs", ps.rhs, "Inline right-hand side f over x, y (and t = y' for order 2)");
    sub->add_option("--order", ps.order, "Order of the inline equation (1 or 2)")
        ->check(CLI::IsMember({1, 2}))
        ->capture_default_str();
    sub->add_option("--x0", ps.x0, "Initial point")->capture_default_str();
    sub->add_option("--y0", ps.y0, "y(x0)")->capture_default_str();
    sub->add_option("--y1", ps.y1, "y'(x0), order 2")->capture_default_str();
    sub->add_option("--h", cfg.h, "RK4 step in the new parameter")->capture_default_str();
    sub->add_option("--s", cfg.s, "Exponent s of the arc-length g")->capture_default_str();
}

void add_run_options(CLI::App* sub, RunConfig& cfg, std::string& method) {
    sub->add_option("--method", method, "differential | nonlocal")->capture_default_str();
    sub->add_option("--g", cfg.g, "g for nonlocal: arc-length, f-over-y, f-over-t, t-over-y or an expression");
    sub->add_option("--t-max,--xi-max,--param-max", cfg.param_max, "Upper bound on the parameter t or xi");
    sub->add_option("--span", cfg.span, "Upper bound on the parameter, relative to its start");
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Numerical integration of blow-up Cauchy problems via differential and non-local transformations"};
    app.footer(exit_code_help);
    // -h would clash with the step option --h.
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);

    RunConfig solve_cfg;
    std::string solve_method = "differential";
    std::string format = "csv";
    std::string out_path = "-";
    std::optional<std::string> summary_path;
    std::optional<std::string> plot_path;
    auto* solve_cmd = app.add_subcommand("solve", "Transform, integrate and locate the blow-up point");
    add_problem_options(solve_cmd, solve_cfg);
    add_run_options(solve_cmd, solve_cfg, solve_method);
    solve_cmd->add_option("--max-steps", solve_cfg.max_steps, "Step budget")->capture_default_str();
    solve_cmd->add_option("--eps-stop", solve_cfg.eps_stop, "Stop once |dx/dparam| falls below this (0 disables)")
        ->capture_default_str();
    solve_cmd->add_option("--format", format, "Trajectory format")
        ->check(CLI::IsMember({"csv", "jsonl"}))
        ->capture_default_str();
    solve_cmd->add_option("--out", out_path, "Trajectory file ('-' for stdout)")->capture_default_str();
    solve_cmd->add_option("--summary", summary_path, "Summary JSON file (default: stdout, or stderr when the trajectory goes to stdout)");
    solve_cmd->add_option("--plot-script", plot_path, "Also write a matplotlib script for the CSV trajectory");

    RunConfig cmp_cfg;
    cmp_cfg.eps_stop = 0;
    std::string left_method = "differential", right_method = "nonlocal";
    std::optional<std::string> left_g, right_g;
    std::size_t cmp_steps = 100;
    std::string cmp_out = "-";
    std::optional<std::string> cmp_summary;
    auto* cmp_cmd = app.add_subcommand("compare", "Run two methods on one problem with equal step budgets");
    add_problem_options(cmp_cmd, cmp_cfg);
    cmp_cmd->add_option("--left-method", left_method, "Method of the left run")->capture_default_str();
    cmp_cmd->add_option("--right-method", right_method, "Method of the right run")->capture_default_str();
    cmp_cmd->add_option("--left-g", left_g, "g of the left run (nonlocal)");
    cmp_cmd->add_option("--right-g", right_g, "g of the right run (nonlocal)");
    cmp_cmd->add_option("--steps", cmp_steps, "Step budget of each run")->capture_default_str();
    cmp_cmd->add_option("--out", cmp_out, "Comparison table ('-' for stdout)")->capture_default_str();
    cmp_cmd->add_option("--summary", cmp_summary, "Summary JSON file");

    RunConfig sweep_cfg;
    sweep_cfg.eps_stop = 0;
    std::string sweep_method = "differential";
    std::vector<double> hs;
    std::string sweep_out = "-";
    auto* sweep_cmd = app.add_subcommand("sweep", "Final-state error and empirical order over a ladder of steps");
    add_problem_options(sweep_cmd, sweep_cfg);
    add_run_options(sweep_cmd, sweep_cfg, sweep_method);
    sweep_cmd->add_option("--hs", hs, "Step sizes, comma separated")->delimiter(',')->required();
    sweep_cmd->add_option("--out", sweep_out, "Convergence table ('-' for stdout)")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (*solve_cmd) {
            solve_cfg.method = transforms::parse_method(solve_method);
            const SolveOutcome outcome = solve(solve_cfg);
            Sink sink(out_path, out);
            write_trajectory(*sink, outcome.trajectory, format == "csv" ? Format::csv : Format::jsonl);
            sink.close(out_path);
            const std::string summary = summary_json(outcome);
            if (summary_path)
                write_text_file(*summary_path, summary + "\n");
            else
                (out_path == "-" ? err : out) << summary << '\n';
            if (plot_path) {
                if (format != "csv" || out_path == "-")
                    throw std::invalid_argument("--plot-script needs --format csv and an --out file");
                write_text_file(*plot_path, plot_script(out_path, outcome.system.parameter_name));
            }
            if (outcome.trajectory.reason == ode::Termination::rhs_error) {
                err << "error: " << outcome.trajectory.message << '\n';
                return exit_singular;
            }
            if (!outcome.estimate_error.empty()) {
                err << "error: " << outcome.estimate_error << '\n';
                return exit_estimation;
            }
            return exit_ok;
        }
        if (*cmp_cmd) {
            RunConfig left = cmp_cfg, right = cmp_cfg;
            left.method = transforms::parse_method(left_method);
            right.method = transforms::parse_method(right_method);
            left.g = left_g;
            right.g = right_g;
            const Comparison cmp = compare(left, right, cmp_steps);
            Sink sink(cmp_out, out);
            write_comparison(*sink, cmp);
            sink.close(cmp_out);
            const std::string summary = comparison_json(cmp);
            if (cmp_summary)
                write_text_file(*cmp_summary, summary + "\n");
            else
                (cmp_out == "-" ? err : out) << summary << '\n';
            return exit_ok;
        }
        if (*sweep_cmd) {
            sweep_cfg.method = transforms::parse_method(sweep_method);
            const Sweep sw = sweep(sweep_cfg, hs);
            Sink sink(sweep_out, out);
            write_sweep(*sink, sw);
            sink.close(sweep_out);
            return exit_ok;
        }
    } catch (const expr::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_parse;
    } catch (const SingularTransformError& e) {
        err << "error: " << e.what() << '\n';
        return exit_singular;
    } catch (const expr::EvalError& e) {
        err << "error: " << e.what() << '\n';
        return exit_singular;
    } catch (const EstimationError& e) {
        err << "error: " << e.what() << '\n';
        return exit_estimation;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return exit_io;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }
    return exit_usage;
}

} // namespace blowup::cli
