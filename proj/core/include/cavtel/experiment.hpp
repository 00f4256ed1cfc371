#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cavtel/calibrate.hpp"
#include "cavtel/protocol.hpp"

namespace cavtel {

enum class SweepVariable { None, KappaT, OverallInefficiency };
const char* to_string(SweepVariable v);

/// Monte Carlo campaign over Haar-random input qubits.
struct CampaignConfig {
  PhysicalParams params = PhysicalParams::from_mhz(100, 10, 10, 0, 0.265);
  DetectorModel detector = DetectorModel::perfect();
  ProtocolKind protocol = ProtocolKind::Modified;
  ModelKind model = ModelKind::Full;
  int n_traj = 20000;
  std::uint64_t base_seed = 1;
  int m_index = 0;
  double t_big_over_kappa = 10.0;

  /// Dark rate interpreted as the total over both detectors (halved per
  /// detector) instead of per detector.
  bool dark_rate_is_total = false;

  SweepVariable sweep_variable = SweepVariable::None;
  std::vector<double> sweep_values;  // kappa_t/2pi in MHz, or 1 - eta'

  int n_threads = 0;  // 0 = hardware concurrency
  std::string output_path;            // summary CSV ("" = do not write)
  std::string trajectory_log_path;    // per-trajectory CSV ("" = off)
};

/// Aggregates of one sweep point.
struct PointSummary {
  SweepVariable sweep_variable = SweepVariable::None;
  double sweep_value = 0.0;
  ProtocolKind protocol = ProtocolKind::Modified;
  ModelKind model = ModelKind::Full;
  int n_traj = 0;
  int n_accepted = 0;
  double success_prob = 0.0;
  double avg_fidelity = 0.0;     // over accepted runs
  double stderr_fidelity = 0.0;  // sample std / sqrt(n_accepted)
  double stderr_success = 0.0;   // sqrt(p(1-p)/n_traj)
  StageSchedule schedule;
  std::uint64_t seed = 0;
  std::vector<std::string> calibration_flags;
  std::optional<std::string> error;  // calibration failed for this point
};

struct CampaignSummary {
  std::vector<PointSummary> points;

  /// For kappa sweeps: largest kappa value whose fidelity stays within
  /// 0.01 of the low-kappa plateau mean.
  std::optional<double> plateau_edge;
};

/// Haar-uniform qubit: cos(theta/2)|0> + e^{i phi} sin(theta/2)|1> with
/// cos(theta) uniform on [-1, 1] and phi uniform on [0, 2 pi).
QubitState sample_input_state(RngStream& rng);

/// Calibrate once per sweep point, then run n_traj trajectories with
/// per-index seed streams. Deterministic for a given base_seed regardless
/// of thread count. Per-point calibration failures are recorded in the
/// summary instead of aborting the sweep.
CampaignSummary run_campaign(const CampaignConfig& cfg);

/// Sweep the mirror-transmission rate kappa_t (values are kappa_t/2pi in
/// MHz).
CampaignSummary sweep_kappa(CampaignConfig cfg, std::vector<double> values);

/// Sweep the overall detection inefficiency 1 - eta'. eta_a is fixed by
/// kappa_t/kappa and eta by the detector; the residual is folded into
/// eta_p.
CampaignSummary sweep_inefficiency(CampaignConfig cfg,
                                   std::vector<double> values);

/// Summary CSV, one row per sweep point, doubles in round-trip exact form.
extern const char* const kSummaryCsvHeader;
void write_summary_csv(std::ostream& os, const CampaignSummary& summary);
void write_summary_csv(const std::string& path, const CampaignSummary& summary);

/// Flat "key = value" config file mirroring the CLI flag names with
/// dashes replaced by underscores. Returns the key/value pairs in file
/// order; validation happens at CLI level.
std::vector<std::pair<std::string, std::string>> read_config_file(
    const std::string& path);

/// Round-trip exact decimal form of a double (shortest %.17g that parses
/// back to the same bits).
std::string format_double(double v);

}  // namespace cavtel
