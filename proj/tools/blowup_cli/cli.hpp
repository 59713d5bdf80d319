#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "blowup/ode.hpp"
#include "blowup/problems.hpp"
#include "blowup/singularity.hpp"
#include "blowup/transforms.hpp"

namespace blowup::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 1,
    exit_parse = 2,
    exit_singular = 3,
    exit_estimation = 4,
    exit_io = 5,
};

class IoError : public Error {
public:
    using Error::Error;
};

enum class Format { csv, jsonl };

struct ProblemSpec {
    std::optional<std::string> id;  // built-in problem, or
    std::optional<std::string> rhs;  // inline right-hand side
    double a = 1.0;
    double p = 2.0;  // ypow only
    int order = 1;
    double x0 = 0.0;
    double y0 = 1.0;
    double y1 = 1.0;
};

struct RunConfig {
    ProblemSpec problem;
    transforms::Method method = transforms::Method::differential;
    std::optional<std::string> g;  // name or expression; problem default when empty
    double s = 2.0;
    double h = 0.2;
    std::size_t max_steps = 10'000'000;
    std::optional<double> param_max;  // absolute bound on t or xi
    std::optional<double> span;       // bound relative to the start parameter
    double eps_stop = 1e-8;
};

/// A problem ready to transform, with its closed form when built in.
struct ResolvedProblem {
    transforms::CauchyProblem problem;
    std::optional<problems::TestProblem> test;
    transforms::GChoice g;
};

ResolvedProblem resolve(const RunConfig& cfg);
ode::StopRule stop_rule(const RunConfig& cfg, double start);

struct SolveOutcome {
    transforms::TransformedSystem system;
    ode::Trajectory trajectory;
    std::optional<singularity::BlowupEstimate> estimate;
    std::string estimate_error;  // set when estimation failed
};

/// Transform, integrate and estimate. Transform and first-step failures throw;
/// estimation failures are reported in the outcome.
SolveOutcome solve(const RunConfig& cfg);

struct CompareSide {
    std::string label;
    ode::Trajectory trajectory;
    std::optional<singularity::BlowupEstimate> estimate;
};

struct Comparison {
    double reference_x_star = 0.0;
    bool reference_exact = false;
    CompareSide left;
    CompareSide right;
};

/// Runs both configs with the same step budget and no decay stop.
Comparison compare(const RunConfig& left, const RunConfig& right, std::size_t steps);

struct SweepRow {
    double h = 0.0;
    std::size_t steps = 0;
    double error = 0.0;
    std::optional<double> order;  // vs the previous row
};

struct Sweep {
    std::vector<SweepRow> rows;
    bool reference_exact = false;
};

/// Final-state error per step size against the closed form (built-in
/// problems) or a run at min(h)/4. Needs >= 2 step sizes and a parameter bound.
Sweep sweep(const RunConfig& cfg, std::vector<double> hs);

// ---- output -------------------------------------------------------------------

/// 17 significant digits, '.' separator, independent of the global locale.
std::string format_double(double v);

void write_trajectory(std::ostream& os, const ode::Trajectory& traj, Format fmt);
std::string summary_json(const SolveOutcome& outcome);
void write_comparison(std::ostream& os, const Comparison& cmp);
std::string comparison_json(const Comparison& cmp);
void write_sweep(std::ostream& os, const Sweep& sw);
std::string plot_script(const std::string& csv_path, const std::string& parameter_name);

/// Full command line front end. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace blowup::cli
