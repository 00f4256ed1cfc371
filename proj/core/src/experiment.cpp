#include "cavtel/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "cavtel/errors.hpp"

namespace cavtel {

const char* const kSummaryCsvHeader =
    "sweep_var,sweep_value,protocol,model,n_traj,n_accepted,success_prob,"
    "avg_fidelity,stderr_fidelity,stderr_success,t_A_us,t_B_us,t_d_us,t_c_us,"
    "t_D_us,seed";

const char* to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::None: return "none";
    case SweepVariable::KappaT: return "kappa_t";
    case SweepVariable::OverallInefficiency: return "overall_inefficiency";
  }
  return "?";
}

QubitState sample_input_state(RngStream& rng) {
  const double u = rng.uniform(-1.0, 1.0);  // cos(theta), Haar measure
  const double phi = rng.uniform(0.0, two_pi);
  const double a = std::sqrt(0.5 * (1.0 + u));
  const double b = std::sqrt(0.5 * (1.0 - u));
  return QubitState(a, std::polar(b, phi));
}

std::string format_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

namespace {

struct TrajResult {
  bool accepted = false;
  int epsilon = 0;
  double fidelity = 0.0;
  Complex alpha, beta;
  int n_observed = 0;
};

struct PointSetup {
  PhysicalParams params;
  DetectorModel detector;
  double sweep_value = 0.0;
  std::optional<std::string> error;
};

PointSetup setup_point(const CampaignConfig& cfg, double value) {
  PointSetup out{cfg.params, cfg.detector, value, std::nullopt};
  switch (cfg.sweep_variable) {
    case SweepVariable::None:
      break;
    case SweepVariable::KappaT:
      out.params = cfg.params.with_kappa_t(two_pi * value);
      break;
    case SweepVariable::OverallInefficiency: {
      const double eta_prime = 1.0 - value;
      const double ceiling =
          DetectorModel::eta_a(cfg.params) * cfg.detector.eta();
      if (eta_prime > ceiling + 1e-12) {
        out.error = "requested overall efficiency " +
                    std::to_string(eta_prime) +
                    " exceeds eta_a * eta = " + std::to_string(ceiling);
        return out;
      }
      const double eta_p =
          ceiling == 0.0 ? 0.0 : std::min(1.0, eta_prime / ceiling);
      out.detector =
          DetectorModel(cfg.detector.eta(), eta_p, cfg.detector.dark_rate());
      break;
    }
  }
  if (cfg.dark_rate_is_total)
    out.detector = DetectorModel(out.detector.eta(), out.detector.eta_p(),
                                 0.5 * out.detector.dark_rate());
  return out;
}

void run_point_trajectories(const CampaignConfig& cfg,
                            const ProtocolMachine& machine,
                            const DetectorModel& det,
                            std::vector<TrajResult>& results) {
  const int n = cfg.n_traj;
  unsigned hw = std::thread::hardware_concurrency();
  int n_threads = cfg.n_threads > 0 ? cfg.n_threads : int(hw ? hw : 1);
  n_threads = std::max(1, std::min(n_threads, n));

  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        RngStream rng(cfg.base_seed, std::uint64_t(i));
        const QubitState input = sample_input_state(rng);
        const RunOutcome outcome =
            machine.run(input, det, rng);
        TrajResult& r = results[i];
        r.accepted = outcome.accepted;
        r.epsilon = outcome.epsilon.value_or(0);
        r.fidelity = outcome.fidelity.value_or(0.0);
        r.alpha = input.alpha();
        r.beta = input.beta();
        for (const StageRecord& s : outcome.records)
          r.n_observed += s.record.observed_click_count();
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };

  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);
}

PointSummary aggregate(const CampaignConfig& cfg, const PointSetup& setup,
                       const StageSchedule& sched,
                       const std::vector<std::string>& flags,
                       const std::vector<TrajResult>& results) {
  PointSummary s;
  s.sweep_variable = cfg.sweep_variable;
  s.sweep_value = setup.sweep_value;
  s.protocol = cfg.protocol;
  s.model = cfg.model;
  s.n_traj = cfg.n_traj;
  s.schedule = sched;
  s.seed = cfg.base_seed;
  s.calibration_flags = flags;

  double sum = 0.0;
  for (const TrajResult& r : results)
    if (r.accepted) {
      ++s.n_accepted;
      sum += r.fidelity;
    }
  s.success_prob = double(s.n_accepted) / double(s.n_traj);
  if (s.n_accepted > 0) s.avg_fidelity = sum / double(s.n_accepted);
  if (s.n_accepted > 1) {
    double ss = 0.0;
    for (const TrajResult& r : results)
      if (r.accepted) {
        const double d = r.fidelity - s.avg_fidelity;
        ss += d * d;
      }
    s.stderr_fidelity = std::sqrt(ss / double(s.n_accepted - 1)) /
                        std::sqrt(double(s.n_accepted));
  }
  s.stderr_success = std::sqrt(s.success_prob * (1.0 - s.success_prob) /
                               double(s.n_traj));
  return s;
}

void log_trajectories(std::ostream& os, const PointSummary& point,
                      const std::vector<TrajResult>& results, bool header) {
  if (header)
    os << "sweep_var,sweep_value,index,accepted,epsilon,fidelity,"
          "alpha_re,alpha_im,beta_re,beta_im,n_observed\n";
  for (size_t i = 0; i < results.size(); ++i) {
    const TrajResult& r = results[i];
    os << to_string(point.sweep_variable) << ','
       << format_double(point.sweep_value) << ',' << i << ','
       << (r.accepted ? 1 : 0) << ',' << r.epsilon << ','
       << (r.accepted ? format_double(r.fidelity) : std::string()) << ','
       << format_double(r.alpha.real()) << ',' << format_double(r.alpha.imag())
       << ',' << format_double(r.beta.real()) << ','
       << format_double(r.beta.imag()) << ',' << r.n_observed << '\n';
  }
}

}  // namespace

CampaignSummary run_campaign(const CampaignConfig& cfg) {
  if (cfg.n_traj < 1) throw ConfigError("run_campaign: n_traj must be >= 1");
  std::vector<double> values = cfg.sweep_values;
  if (cfg.sweep_variable == SweepVariable::None) values = {0.0};
  if (values.empty())
    throw ConfigError("run_campaign: sweep requested with no values");
  for (double v : values) {
    if (!std::isfinite(v)) throw ConfigError("run_campaign: non-finite sweep value");
    if (cfg.sweep_variable == SweepVariable::OverallInefficiency &&
        (v < 0.0 || v > 1.0))
      throw ConfigError("run_campaign: inefficiency values must lie in [0, 1]");
    if (cfg.sweep_variable == SweepVariable::KappaT && v < 0.0)
      throw ConfigError("run_campaign: kappa values must be nonnegative");
  }

  CampaignSummary summary;
  std::ofstream log_stream;
  if (!cfg.trajectory_log_path.empty()) {
    log_stream.open(cfg.trajectory_log_path);
    if (!log_stream)
      throw ConfigError("run_campaign: cannot open trajectory log " +
                        cfg.trajectory_log_path);
  }

  bool wrote_log_header = false;
  for (double value : values) {
    PointSetup setup = setup_point(cfg, value);
    PointSummary point;
    point.sweep_variable = cfg.sweep_variable;
    point.sweep_value = value;
    point.protocol = cfg.protocol;
    point.model = cfg.model;
    point.n_traj = cfg.n_traj;
    point.seed = cfg.base_seed;

    if (setup.error) {
      point.error = setup.error;
      summary.points.push_back(std::move(point));
      continue;
    }
    try {
      const CalibrationReport cal = calibrate_schedule(
          setup.params, cfg.model, cfg.protocol, cfg.m_index,
          cfg.t_big_over_kappa);
      const ProtocolMachine machine(cfg.protocol, setup.params, cal.schedule,
                                    cfg.model);
      std::vector<TrajResult> results(cfg.n_traj);
      run_point_trajectories(cfg, machine, setup.detector, results);
      point = aggregate(cfg, setup, cal.schedule, cal.flags, results);
      if (log_stream.is_open()) {
        log_trajectories(log_stream, point, results, !wrote_log_header);
        wrote_log_header = true;
      }
    } catch (const Error& e) {
      point.error = e.what();
    }
    summary.points.push_back(std::move(point));
  }

  if (cfg.sweep_variable == SweepVariable::KappaT) {
    std::vector<const PointSummary*> ok;
    for (const auto& pt : summary.points)
      if (!pt.error && pt.n_accepted > 0) ok.push_back(&pt);
    if (ok.size() >= 2) {
      const size_t n_ref = std::min<size_t>(3, ok.size());
      double plateau = 0.0;
      for (size_t i = 0; i < n_ref; ++i) plateau += ok[i]->avg_fidelity;
      plateau /= double(n_ref);
      for (const auto* pt : ok) {
        if (std::abs(pt->avg_fidelity - plateau) > 0.01) break;
        summary.plateau_edge = pt->sweep_value;
      }
    }
  }

  if (!cfg.output_path.empty()) write_summary_csv(cfg.output_path, summary);
  return summary;
}

CampaignSummary sweep_kappa(CampaignConfig cfg, std::vector<double> values) {
  cfg.sweep_variable = SweepVariable::KappaT;
  cfg.sweep_values = std::move(values);
  return run_campaign(cfg);
}

CampaignSummary sweep_inefficiency(CampaignConfig cfg,
                                   std::vector<double> values) {
  cfg.sweep_variable = SweepVariable::OverallInefficiency;
  cfg.sweep_values = std::move(values);
  return run_campaign(cfg);
}

void write_summary_csv(std::ostream& os, const CampaignSummary& summary) {
  os << kSummaryCsvHeader << '\n';
  for (const PointSummary& p : summary.points) {
    os << to_string(p.sweep_variable) << ',' << format_double(p.sweep_value)
       << ',' << to_string(p.protocol) << ',' << to_string(p.model) << ','
       << p.n_traj << ',' << p.n_accepted << ','
       << format_double(p.success_prob) << ',' << format_double(p.avg_fidelity)
       << ',' << format_double(p.stderr_fidelity) << ','
       << format_double(p.stderr_success) << ','
       << format_double(p.schedule.t_A) << ',' << format_double(p.schedule.t_B)
       << ',' << format_double(p.schedule.t_d) << ','
       << format_double(p.schedule.t_c) << ',' << format_double(p.schedule.t_D)
       << ',' << p.seed << '\n';
  }
}

void write_summary_csv(const std::string& path,
                       const CampaignSummary& summary) {
  std::ofstream os(path);
  if (!os) throw ConfigError("write_summary_csv: cannot open " + path);
  write_summary_csv(os, summary);
}

std::vector<std::pair<std::string, std::string>> read_config_file(
    const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("read_config_file: cannot open " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    const auto b = s.find_last_not_of(" \t\r\n");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("read_config_file: line " + std::to_string(line_no) +
                        " is not 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw ConfigError("read_config_file: empty key on line " +
                        std::to_string(line_no));
    out.emplace_back(key, value);
  }
  return out;
}

}  // namespace cavtel
