#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "diffinv/experiments.hpp"
#include "diffinv/forward.hpp"
#include "diffinv/mollify.hpp"
#include "diffinv/positivity.hpp"
#include "diffinv/recovery.hpp"

namespace diffinv {

inline constexpr const char* kVersion = "diffinv 0.1.0";

nlohmann::json to_json(const SolveReport& report);
nlohmann::json to_json(const PositivityFit& fit);
nlohmann::json to_json(const ExponentFit& fit);
nlohmann::json to_json(const Recovery1D& rec);
nlohmann::json to_json(const PwcRecovery& rec);
nlohmann::json to_json(const ScalingStudy& study);

/// `q_index,value,flag`
std::string pwc_recovery_csv(const PwcRecovery& rec);
/// `log_dist,log_wmin`
std::string envelope_csv(const PositivityFit& fit);
/// `seed,delta_l2,e_h10,excluded`
std::string samples_csv(const std::vector<PairSample>& samples);
/// `t,functional`
std::string scaling_csv(const ScalingStudy& study);

/// 64-bit FNV-1a of the compact dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

}  // namespace diffinv
