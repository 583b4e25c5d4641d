#ifndef NLEACH_VERSION_HPP
#define NLEACH_VERSION_HPP

namespace nleach {

inline constexpr const char* kToolName = "nleach";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace nleach

#endif
