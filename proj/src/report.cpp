#include "diffinv/report.hpp"

#include <cstdint>
#include <cstdio>
#include <sstream>

#include "diffinv/io.hpp"

namespace diffinv {

nlohmann::json to_json(const SolveReport& report) {
  return {{"iterations", report.iterations},
          {"residual", report.final_relative_residual},
          {"solver", to_string(report.solver)}};
}

nlohmann::json to_json(const PositivityFit& fit) {
  return {{"c_hat", fit.c_hat}, {"beta_hat", fit.beta_hat}, {"r2", fit.r2}, {"n_bins", fit.n_bins}};
}

nlohmann::json to_json(const ExponentFit& fit) {
  return {{"alpha_hat", fit.alpha_hat}, {"c_hat", fit.c_hat},   {"r2", fit.r2},
          {"n_used", fit.n_used},       {"n_excluded", fit.n_excluded},
          {"status", to_string(fit.status)}};
}

nlohmann::json to_json(const Recovery1D& rec) {
  return {{"gamma_hat", rec.gamma_hat}, {"w_excl", rec.w_excl}};
}

nlohmann::json to_json(const PwcRecovery& rec) {
  int ok = 0, unstable = 0, out_of_range = 0;
  for (PwcFlag f : rec.flags) {
    if (f == PwcFlag::ok) ++ok;
    if (f == PwcFlag::unstable_denominator) ++unstable;
    if (f == PwcFlag::out_of_range) ++out_of_range;
  }
  return {{"partition_n", rec.partition.subcubes_per_side()},
          {"subcubes", rec.values.size()},
          {"ok", ok},
          {"unstable_denominator", unstable},
          {"out_of_range", out_of_range}};
}

nlohmann::json to_json(const ScalingStudy& study) {
  return {{"slope", study.slope}, {"points", study.points.size()}};
}

std::string pwc_recovery_csv(const PwcRecovery& rec) {
  std::ostringstream os;
  os << "q_index,value,flag\n";
  for (std::size_t q = 0; q < rec.values.size(); ++q) {
    os << q << ',' << io::format_double(rec.values[q]) << ',' << to_string(rec.flags[q]) << '\n';
  }
  return os.str();
}

std::string envelope_csv(const PositivityFit& fit) {
  std::ostringstream os;
  os << "log_dist,log_wmin\n";
  for (const auto& p : fit.envelope) {
    os << io::format_double(p.log_dist) << ',' << io::format_double(p.log_wmin) << '\n';
  }
  return os.str();
}

std::string samples_csv(const std::vector<PairSample>& samples) {
  std::ostringstream os;
  os << "seed,delta_l2,e_h10,excluded\n";
  for (const auto& s : samples) {
    os << s.seed << ',' << io::format_double(s.delta_l2) << ',' << io::format_double(s.e_h10) << ','
       << (s.excluded ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string scaling_csv(const ScalingStudy& study) {
  std::ostringstream os;
  os << "t,functional\n";
  for (const auto& p : study.points) {
    os << io::format_double(p.t) << ',' << io::format_double(p.functional) << '\n';
  }
  return os.str();
}

std::string config_hash(const nlohmann::json& config) {
  const std::string text = config.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace diffinv
