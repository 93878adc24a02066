#ifndef XSCREEN_VERSION_HPP
#define XSCREEN_VERSION_HPP

namespace xscreen {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace xscreen

#endif  // XSCREEN_VERSION_HPP
