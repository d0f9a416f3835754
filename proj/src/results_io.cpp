#include "needle/results_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace needle {

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string trial_file(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "trial_%04d.csv", index);
  return buf;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

void write_trials_csv(std::ostream& out, const std::vector<TrialResult>& trials) {
  out << "trial,mode,converged,time_to_converge,min_clearance,final_time,x0,failure_reason\n";
  for (const auto& t : trials) {
    std::string x0;
    for (Eigen::Index i = 0; i < t.x0.size(); ++i) x0 += (i ? " " : "") + format_number(t.x0[i]);
    out << t.trial << ',' << to_string(t.mode) << ',' << (t.converged ? 1 : 0) << ','
        << (t.converged ? format_number(t.time_to_converge) : "nan") << ',' << format_number(t.min_clearance) << ','
        << format_number(t.final_time) << ',' << quoted(x0) << ',' << quoted(t.failure_reason) << '\n';
  }
}

void write_trajectory_csv(std::ostream& out, const TrialResult& trial) {
  const Eigen::Index n = trial.x.empty() ? 0 : trial.x.front().size();
  const Eigen::Index m = trial.u.empty() ? 0 : trial.u.front().size();
  out << "t";
  for (Eigen::Index i = 0; i < n; ++i) out << ",x" << i;
  for (Eigen::Index i = 0; i < m; ++i) out << ",u" << i;
  out << ",J,error_distance\n";
  for (std::size_t k = 0; k < trial.t.size(); ++k) {
    out << format_number(trial.t[k]);
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_number(trial.x[k][i]);
    for (Eigen::Index i = 0; i < m; ++i) out << ',' << format_number(trial.u[k][i]);
    out << ',' << format_number(trial.J[k]) << ',' << format_number(trial.error_distance[k]) << '\n';
  }
}

void write_actions_csv(std::ostream& out, const TrialResult& trial) {
  const Eigen::Index m = trial.actions.empty() ? 0 : trial.actions.front().action.u.size();
  out << "t,tau,lambda,predicted_dJ,realized_dJ,mig,mih,J0,line_search_iterations";
  for (Eigen::Index i = 0; i < m; ++i) out << ",u" << i;
  out << '\n';
  for (const auto& r : trial.actions) {
    const auto& a = r.action;
    out << format_number(r.t) << ',' << format_number(a.tau) << ',' << format_number(a.lambda) << ','
        << format_number(a.predicted_dJ) << ',' << format_number(a.realized_dJ) << ',' << format_number(a.mig)
        << ',' << format_number(a.mih) << ',' << format_number(a.J0) << ',' << a.line_search_iterations;
    for (Eigen::Index i = 0; i < m; ++i) out << ',' << format_number(i < a.u.size() ? a.u[i] : 0.0);
    out << '\n';
  }
}

void write_summary(std::ostream& out, const MonteCarloSummary& s) {
  out << "scenario = " << s.scenario << '\n'
      << "mode = " << to_string(s.mode) << '\n'
      << "seed = " << s.seed << '\n'
      << "trials = " << s.trials << '\n'
      << "converged = " << s.converged << '\n'
      << "success_rate = " << format_number(s.success_rate) << '\n'
      << "mean_time = " << format_number(s.mean_time) << '\n'
      << "median_time = " << format_number(s.median_time) << '\n'
      << "p90_time = " << format_number(s.p90_time) << '\n'
      << "max_time = " << format_number(s.max_time) << '\n'
      << "min_clearance = " << format_number(s.min_clearance) << '\n';
}

void emit_results(const MonteCarloResult& result, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "trajectories", ec);
  if (!ec) std::filesystem::create_directories(out_dir / "actions", ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());
  {
    auto f = open_out(out_dir / "trials.csv");
    write_trials_csv(f, result.trials);
  }
  {
    auto f = open_out(out_dir / "summary.txt");
    write_summary(f, result.summary);
  }
  for (const auto& t : result.trials) {
    auto traj = open_out(out_dir / "trajectories" / trial_file(t.trial));
    write_trajectory_csv(traj, t);
    auto acts = open_out(out_dir / "actions" / trial_file(t.trial));
    write_actions_csv(acts, t);
  }
}

}  // namespace needle
