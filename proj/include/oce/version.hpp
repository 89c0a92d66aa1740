#ifndef OCE_VERSION_HPP
#define OCE_VERSION_HPP

namespace oce {

inline constexpr const char* k_version = "0.1.0";

} // namespace oce

#endif
