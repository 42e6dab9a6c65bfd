#ifndef QBEATS_VERSION_HPP
#define QBEATS_VERSION_HPP

namespace qbeats {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace qbeats

#endif
