#include "convoy/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "json.hpp"

namespace convoy {

namespace {

constexpr double kTransientWindow = 4.0;  // m of leader travel
constexpr double kSettlingBand = 0.02;    // m

struct SeriesStats {
  double mean{0.0};
  double rmse{0.0};
  double std_dev{0.0};
  double max_signed{0.0};
  std::size_t count{0};
};

SeriesStats series_stats(const std::vector<double>& values) {
  SeriesStats s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double v : values) {
    sum += v;
    sum_sq += v * v;
    if (std::abs(v) > std::abs(s.max_signed)) s.max_signed = v;
  }
  const double n = static_cast<double>(values.size());
  s.mean = sum / n;
  s.rmse = std::sqrt(sum_sq / n);
  const double var = std::max(0.0, sum_sq / n - s.mean * s.mean);
  s.std_dev = std::sqrt(var);
  return s;
}

}  // namespace

std::string format_6sig(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

double round_6sig(double value) {
  return std::strtod(format_6sig(value).c_str(), nullptr);
}

void write_csv(const TrajectoryLog& log, std::ostream& out) {
  out << "time_s";
  for (int i = 0; i < log.n_robots; ++i) {
    out << ",x_" << i << ",y_" << i << ",theta_" << i << ",est_x_" << i
        << ",est_y_" << i << ",est_theta_" << i << ",v_cmd_" << i
        << ",delta_cmd_" << i << ",v_act_" << i << ",delta_act_" << i
        << ",lat_err_" << i;
  }
  for (int j = 0; j + 1 < log.n_robots; ++j) {
    out << ",gap_" << j;
  }
  out << ",flags\n";

  for (const LogRow& row : log.rows) {
    out << format_6sig(row.time);
    for (const RobotSample& r : row.robots) {
      out << ',' << format_6sig(r.true_pose.x) << ',' << format_6sig(r.true_pose.y)
          << ',' << format_6sig(r.true_pose.theta) << ','
          << format_6sig(r.est_pose.x) << ',' << format_6sig(r.est_pose.y) << ','
          << format_6sig(r.est_pose.theta) << ',' << format_6sig(r.u_cmd.v) << ','
          << format_6sig(r.u_cmd.delta) << ',' << format_6sig(r.u_act.v) << ','
          << format_6sig(r.u_act.delta) << ',' << format_6sig(r.lat_err);
    }
    for (double gap : row.chord_gaps) {
      out << ',' << format_6sig(gap);
    }
    out << ',' << row.flags << '\n';
  }
}

std::vector<std::size_t> coupling_check(const std::vector<double>& gaps,
                                        double d_target, double travel) {
  if (travel <= 0.0) {
    throw std::invalid_argument("coupling_check: travel must be > 0");
  }
  std::vector<std::size_t> events;
  bool in_violation = false;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    const bool violated = std::abs(gaps[i] - d_target) > travel;
    if (violated && !in_violation) {
      events.push_back(i);
    }
    in_violation = violated;
  }
  return events;
}

MetricsReport compute_metrics(const TrajectoryLog& log, double d_target,
                              SpacingMode mode, double coupling_travel) {
  if (log.rows.empty()) {
    throw std::invalid_argument("compute_metrics: empty log");
  }
  MetricsReport report;

  const int n_pairs = log.n_robots - 1;

  // Pooled spacing errors after the transient window; transient separately.
  std::vector<double> spacing_errors;
  std::vector<double> transient_errors;
  std::vector<double> transient_travel;
  std::vector<double> leader_lat;
  std::vector<double> follower_lat;

  for (const LogRow& row : log.rows) {
    const bool steady = row.leader_travel >= kTransientWindow;
    for (int j = 0; j < n_pairs; ++j) {
      const double gap = mode == SpacingMode::kEuclidean ? row.chord_gaps[j]
                                                         : row.arc_gaps[j];
      const double err = gap - d_target;
      if (steady) {
        spacing_errors.push_back(err);
      } else {
        transient_errors.push_back(err);
        transient_travel.push_back(row.leader_travel);
      }
    }
    if (steady) {
      leader_lat.push_back(row.robots[0].lat_err);
      for (int i = 1; i < log.n_robots; ++i) {
        follower_lat.push_back(row.robots[i].lat_err);
      }
    }
  }

  const SeriesStats spacing = series_stats(spacing_errors);
  report.mean_err_cm = 100.0 * spacing.mean;
  report.rmse_cm = 100.0 * spacing.rmse;
  report.std_dev_cm = 100.0 * spacing.std_dev;
  report.max_err_cm = 100.0 * spacing.max_signed;

  const SeriesStats lead = series_stats(leader_lat);
  report.leader_rmse_cm = 100.0 * lead.rmse;
  report.leader_max_cm = 100.0 * lead.max_signed;
  const SeriesStats fol = series_stats(follower_lat);
  report.follower_rmse_cm = 100.0 * fol.rmse;
  report.follower_max_cm = 100.0 * fol.max_signed;

  // Startup transient: peak error and the travel distance after which the
  // error stays inside the settling band for the rest of the window.
  double peak = 0.0;
  for (double e : transient_errors) {
    if (std::abs(e) > std::abs(peak)) peak = e;
  }
  report.transient.peak_err_cm = 100.0 * peak;
  double settle = 0.0;
  for (std::size_t i = 0; i < transient_errors.size(); ++i) {
    if (std::abs(transient_errors[i]) > kSettlingBand) {
      settle = std::min(transient_travel[i], kTransientWindow);
    }
  }
  report.transient.settling_distance_m = settle;

  // Coupling events on the physical (chordal) gap over the full run.
  int events = 0;
  for (int j = 0; j < n_pairs; ++j) {
    std::vector<double> gaps;
    gaps.reserve(log.rows.size());
    for (const LogRow& row : log.rows) {
      gaps.push_back(row.chord_gaps[j]);
    }
    events += static_cast<int>(coupling_check(gaps, d_target,
                                              coupling_travel).size());
  }
  report.coupling_violations = events;
  return report;
}

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["mean_err_cm"] = round_6sig(mean_err_cm);
  j["rmse_cm"] = round_6sig(rmse_cm);
  j["std_dev_cm"] = round_6sig(std_dev_cm);
  j["max_err_cm"] = round_6sig(max_err_cm);
  j["leader_rmse_cm"] = round_6sig(leader_rmse_cm);
  j["leader_max_cm"] = round_6sig(leader_max_cm);
  j["follower_rmse_cm"] = round_6sig(follower_rmse_cm);
  j["follower_max_cm"] = round_6sig(follower_max_cm);
  j["transient"] = {{"peak_err_cm", round_6sig(transient.peak_err_cm)},
                    {"settling_distance_m",
                     round_6sig(transient.settling_distance_m)}};
  j["coupling_violations"] = coupling_violations;
  j["aborted"] = aborted;
  return j.dump(2) + "\n";
}

}  // namespace convoy
