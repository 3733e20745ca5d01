#pragma once

namespace stabsim {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kReportSchema = "stabsim-report/1";

}  // namespace stabsim
